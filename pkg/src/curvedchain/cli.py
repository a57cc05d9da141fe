"""Command-line interface.

Exit codes: 0 success, 1 runtime failure, 2 bad arguments or configuration,
3 backend capability exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import shutil
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .circuit import build_quench_circuit, export_openqasm
from .config import BACKENDS, check_capability, check_fields, parse_config
from .errors import CapabilityError, ConfigError
from .experiments import run
from .lattice import DEFAULT_FRONT_SPEED, build_profile, light_cone, read_profile_csv
from .observables import fmt
from .presets import PRESETS, preset_text

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG, EXIT_CAPABILITY = 0, 1, 2, 3


def parse_profile_arg(text: str):
    """``uniform:N``, ``horizon:N[:j_star]`` (default ``N/7``) or ``csv:PATH``."""
    kind, _, rest = text.partition(":")
    try:
        if kind == "csv":
            return read_profile_csv(Path(rest).read_text(encoding="utf-8"))
        parts = rest.split(":")
        n = int(parts[0])
        if kind == "uniform" and len(parts) == 1:
            return build_profile("uniform", n)
        if kind == "horizon" and len(parts) in (1, 2):
            j_star = float(Fraction(parts[1])) if len(parts) == 2 else n / 7
            return build_profile("horizon", n, j_star=j_star)
    except OSError as exc:
        raise ConfigError(f"cannot read profile file: {exc}") from exc
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad profile spec {text!r}: {exc}") from exc
    raise ConfigError(f"bad profile spec {text!r}; use uniform:N, horizon:N[:j_star] or csv:PATH")


def _shots(text: str):
    if text == "exact":
        return None
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer or 'exact', got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("shots must be >= 1")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _load_config(args):
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    else:
        text = preset_text(args.preset)
    return parse_config(text)


def _add_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", metavar="PATH", help="configuration file")
    src.add_argument("--preset", metavar="NAME", choices=list(PRESETS),
                     help="named preset: " + ", ".join(PRESETS))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvedchain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run an experiment and write a result directory")
    _add_source(p)
    p.add_argument("--out", metavar="DIR", help="output directory (default: out_dir from the config)")
    p.add_argument("--seed", type=_seed, metavar="U64", help="base seed for shot sampling")
    p.add_argument("--backend", choices=BACKENDS)
    p.add_argument("--shots", type=_shots, metavar="N|exact", default=argparse.SUPPRESS,
                   help="shots per step, or 'exact' for infinite-shot expectation values")
    p.add_argument("--workers", type=_positive_int, metavar="K",
                   help="parallel workers (fallback: CURVEDCHAIN_WORKERS, else 1)")
    p.add_argument("--incremental", action="store_true",
                   help="reuse the evolved state between steps instead of rebuilding circuits")
    p.add_argument("--no-xy-optimize", action="store_true",
                   help="use the general three-CNOT block even when delta = 0")

    p = sub.add_parser("geodesic", help="light-cone fronts as CSV on stdout")
    p.add_argument("--profile", required=True, metavar="SPEC",
                   help="uniform:N, horizon:N[:j_star] or csv:PATH")
    p.add_argument("--origin", required=True, type=float, metavar="I")
    p.add_argument("--tmax", required=True, type=float, metavar="T")
    p.add_argument("--samples", type=_positive_int, default=11, metavar="K", help="number of times (default 11)")
    p.add_argument("--front-speed", type=float, default=DEFAULT_FRONT_SPEED, metavar="C",
                   help=f"front speed in sites per unit time at v = 1 (default {DEFAULT_FRONT_SPEED:g})")

    p = sub.add_parser("profile", help="bond velocities as CSV")
    p.add_argument("--profile", required=True, metavar="SPEC",
                   help="uniform:N, horizon:N[:j_star] or csv:PATH")
    p.add_argument("--out", metavar="FILE", help="write here instead of stdout")

    p = sub.add_parser("export-qasm", help="write the quench circuit as OpenQASM 2.0")
    _add_source(p)
    p.add_argument("--steps", type=int, metavar="S", help="Trotter steps (default: from the config)")
    p.add_argument("--out", metavar="FILE", help="write here instead of stdout")
    p.add_argument("--no-xy-optimize", action="store_true",
                   help="use the general three-CNOT block even when delta = 0")

    p = sub.add_parser("presets", help="list presets or print one")
    p.add_argument("--show", metavar="NAME", choices=list(PRESETS), help="print the configuration text")
    return parser


def _write_text(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_name(target.name + ".partial")
    try:
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(target)
    finally:
        tmp.unlink(missing_ok=True)


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.backend:
        changes["backend"] = args.backend
    if hasattr(args, "shots"):
        changes["shots"] = args.shots
    if args.incremental:
        changes["incremental"] = True
    if args.no_xy_optimize:
        changes["xy_optimize"] = False
    if args.out:
        changes["out_dir"] = args.out
    cfg = cfg.replace(**changes)
    check_fields(cfg)
    check_capability(cfg)
    bundles = run(cfg, workers=args.workers)
    out = Path(cfg.out_dir)
    existed = out.exists()
    written = []
    try:
        if len(bundles) == 1:
            written.append(bundles[0].write(out))
        else:
            for bundle in bundles:
                written.append(bundle.write(out / bundle.label))
    except BaseException:
        for path in written:
            shutil.rmtree(path, ignore_errors=True)
        if not existed:
            shutil.rmtree(out, ignore_errors=True)
        raise
    for path in written:
        print(path)
    return EXIT_OK


def cmd_geodesic(args) -> int:
    profile = parse_profile_arg(args.profile)
    curve = light_cone(profile, args.origin, args.tmax, args.samples, front_speed=args.front_speed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["origin", "t", "left", "right"])
    for t, left, right in curve.samples:
        w.writerow([fmt(curve.origin), fmt(t), fmt(left), fmt(right)])
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_profile(args) -> int:
    _write_text(args.out, parse_profile_arg(args.profile).to_csv())
    return EXIT_OK


def cmd_export_qasm(args) -> int:
    cfg = _load_config(args)
    if args.steps is not None and args.steps < 0:
        raise ConfigError("--steps must be >= 0")
    circuit = build_quench_circuit(cfg.spec, cfg.flips(), args.steps,
                                   xy_optimize=cfg.xy_optimize and not args.no_xy_optimize)
    _write_text(args.out, export_openqasm(circuit))
    return EXIT_OK


def cmd_presets(args) -> int:
    if args.show:
        sys.stdout.write(preset_text(args.show))
    else:
        for name, (description, _) in PRESETS.items():
            print(f"{name:8s} {description}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "geodesic": cmd_geodesic,
    "profile": cmd_profile,
    "export-qasm": cmd_export_qasm,
    "presets": cmd_presets,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CapabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        return EXIT_RUNTIME
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
