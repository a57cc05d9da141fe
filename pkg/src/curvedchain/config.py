"""Experiment configuration: a sectioned ``key = value`` text format.

Example::

    [profile]
    kind = horizon
    n_sites = 80
    j_star = 80/7

    [spec]
    delta = 0.0
    J = 1.0
    dt = 0.1
    steps = 20

    [experiment]
    protocol = neel_quench
    initial_state = neel
    backend = freefermion
    shots = exact
    seed = 0
    outputs = magnetization, connected_zz
    out_dir = out

Unknown sections or keys are errors.  ``j_star`` accepts fractions.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from fractions import Fraction

from .circuit import ChainSpec, neel_flips
from .errors import CapabilityError, ConfigError
from .lattice import build_profile
from .statevector import EXACT_MAX_QUBITS, MAX_QUBITS

BACKENDS = ("statevector", "freefermion", "exact_oracle")
PROTOCOLS = ("neel_quench", "ballistic", "delta_sweep", "frequency_scan")
OUTPUTS = (
    "magnetization",
    "connected_zz",
    "distance_correlator",
    "staggered_magnetization",
    "geodesics",
)
DEFAULT_OUTPUTS = OUTPUTS

_KEYS = {
    "profile": {"kind", "n_sites", "j_star", "bond_values"},
    "spec": {"delta", "J", "dt", "steps"},
    "experiment": {
        "protocol", "initial_state", "backend", "shots", "seed", "outputs", "out_dir",
        "origins", "deltas", "cut_sites", "n_cut", "xy_optimize", "incremental",
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    spec: ChainSpec
    backend: str
    initial_state: str | tuple[int, ...] = "neel"
    shots: int | None = None
    seed: int = 0
    outputs: tuple[str, ...] = DEFAULT_OUTPUTS
    out_dir: str = "out"
    protocol: str = "neel_quench"
    origins: tuple[int, ...] = ()
    deltas: tuple[float, ...] = ()
    cut_sites: tuple[int, ...] = ()
    n_cut: int | None = None
    xy_optimize: bool = True
    incremental: bool | None = None

    @property
    def n_sites(self) -> int:
        return self.spec.n_sites

    def flips(self) -> list[int]:
        if self.initial_state == "neel":
            return neel_flips(self.n_sites)
        if self.initial_state == "all_up":
            return []
        return list(self.initial_state)

    def stagger_cut(self) -> int:
        """Boundary cut for the staggered magnetization, scaled from 9 at N = 80."""
        if self.n_cut is not None:
            return self.n_cut
        return min(9, round(9 * self.n_sites / 80))

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def with_delta(self, delta: float) -> "ExperimentConfig":
        return self.replace(spec=dataclasses.replace(self.spec, delta=float(delta)))

    def to_text(self) -> str:
        return dump_config(self)


def _ints(text):
    return tuple(int(v) for v in _items(text))


def _items(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _number(text):
    return float(Fraction(text.strip())) if "/" in text else float(text)


def _bool(text):
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse configuration text; raises ``ConfigError`` on any problem."""
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from exc
    for section in parser.sections():
        if section not in _KEYS:
            raise ConfigError(f"unknown section [{section}]")
        unknown = set(parser[section]) - _KEYS[section]
        if unknown:
            raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")
    for section in _KEYS:
        if section not in parser:
            raise ConfigError(f"missing section [{section}]")
    prof, spc, exp = parser["profile"], parser["spec"], parser["experiment"]
    try:
        kind = prof["kind"].strip()
        n_sites = int(prof["n_sites"])
        j_star = prof.get("j_star")
        values = prof.get("bond_values")
        profile = build_profile(
            kind, n_sites,
            j_star=_number(j_star) if j_star is not None else None,
            values=[_number(v) for v in _items(values)] if values is not None else None,
        )
        spec = ChainSpec(
            profile,
            delta=_number(spc["delta"]),
            J=_number(spc.get("J", "1")),
            dt=_number(spc.get("dt", "0.1")),
            steps=int(spc.get("steps", "20")),
        )
        init = exp.get("initial_state", "neel").strip()
        if init.startswith("flips"):
            _, _, rest = init.partition(":")
            initial_state: str | tuple[int, ...] = _ints(rest)
        elif init in ("neel", "all_up"):
            initial_state = init
        else:
            raise ConfigError(f"initial_state must be neel, all_up or 'flips: ...', got {init!r}")
        shots_text = exp.get("shots", "exact").strip()
        shots = None if shots_text == "exact" else int(shots_text)
        outputs = tuple(_items(exp.get("outputs", ", ".join(DEFAULT_OUTPUTS))))
        cfg = ExperimentConfig(
            spec=spec,
            backend=exp["backend"].strip(),
            initial_state=initial_state,
            shots=shots,
            seed=int(exp.get("seed", "0")),
            outputs=outputs,
            out_dir=exp.get("out_dir", "out").strip(),
            protocol=exp.get("protocol", "neel_quench").strip(),
            origins=_ints(exp.get("origins", "")),
            deltas=tuple(_number(v) for v in _items(exp.get("deltas", ""))),
            cut_sites=_ints(exp.get("cut_sites", "")),
            n_cut=int(exp["n_cut"]) if "n_cut" in exp else None,
            xy_optimize=_bool(exp.get("xy_optimize", "true")),
            incremental=_bool(exp["incremental"]) if "incremental" in exp else None,
        )
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc.args[0]!r}") from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    check_fields(cfg)
    return cfg


def check_fields(cfg: ExperimentConfig) -> None:
    """Static checks on names and ranges (not backend capability)."""
    if cfg.backend not in BACKENDS:
        raise ConfigError(f"backend must be one of {BACKENDS}, got {cfg.backend!r}")
    if cfg.protocol not in PROTOCOLS:
        raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {cfg.protocol!r}")
    for name in cfg.outputs:
        if name not in OUTPUTS:
            raise ConfigError(f"unknown output {name!r}; choose from {OUTPUTS}")
    if cfg.shots is not None and cfg.shots < 1:
        raise ConfigError("shots must be >= 1 or 'exact'")
    if not 0 <= cfg.seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    n = cfg.n_sites
    for site in cfg.flips() + list(cfg.origins) + list(cfg.cut_sites):
        if not 1 <= site <= n:
            raise ConfigError(f"site {site} outside [1, {n}]")
    if len(set(cfg.flips())) != len(cfg.flips()):
        raise ConfigError("duplicate flip sites")


def check_capability(cfg: ExperimentConfig, max_qubits: int = MAX_QUBITS) -> None:
    """Backend limits; raises ``CapabilityError``."""
    deltas = cfg.deltas if cfg.protocol == "delta_sweep" and cfg.deltas else (cfg.spec.delta,)
    if cfg.backend == "freefermion":
        bad = [d for d in deltas if d != 0]
        if bad:
            raise CapabilityError(
                f"freefermion backend requires delta = 0 (got delta = {bad[0]!r})"
            )
        if cfg.shots is not None:
            raise CapabilityError("freefermion backend only supports shots = exact")
    elif cfg.backend == "statevector" and cfg.n_sites > max_qubits:
        raise CapabilityError(
            f"statevector backend requires N <= {max_qubits} (got N = {cfg.n_sites})"
        )
    elif cfg.backend == "exact_oracle" and cfg.n_sites > EXACT_MAX_QUBITS:
        raise CapabilityError(
            f"exact_oracle backend requires N <= {EXACT_MAX_QUBITS} (got N = {cfg.n_sites})"
        )


def _num(x: float) -> str:
    return repr(float(x))


def dump_config(cfg: ExperimentConfig) -> str:
    """Canonical text; ``parse_config(dump_config(c)) == c``."""
    p = cfg.spec.profile
    lines = ["[profile]", f"kind = {p.kind}", f"n_sites = {p.n_sites}"]
    if p.kind == "horizon":
        lines.append(f"j_star = {_num(p.j_star)}")
    if p.kind == "custom":
        lines.append("bond_values = " + ", ".join(_num(v) for v in p.bond_values))
    s = cfg.spec
    lines += ["", "[spec]", f"delta = {_num(s.delta)}", f"J = {_num(s.J)}",
              f"dt = {_num(s.dt)}", f"steps = {s.steps}"]
    init = cfg.initial_state
    init_text = init if isinstance(init, str) else "flips: " + ", ".join(map(str, init))
    lines += [
        "", "[experiment]",
        f"protocol = {cfg.protocol}",
        f"initial_state = {init_text}",
        f"backend = {cfg.backend}",
        f"shots = {'exact' if cfg.shots is None else cfg.shots}",
        f"seed = {cfg.seed}",
        f"outputs = {', '.join(cfg.outputs)}",
        f"out_dir = {cfg.out_dir}",
    ]
    if cfg.origins:
        lines.append("origins = " + ", ".join(map(str, cfg.origins)))
    if cfg.deltas:
        lines.append("deltas = " + ", ".join(_num(d) for d in cfg.deltas))
    if cfg.cut_sites:
        lines.append("cut_sites = " + ", ".join(map(str, cfg.cut_sites)))
    if cfg.n_cut is not None:
        lines.append(f"n_cut = {cfg.n_cut}")
    if not cfg.xy_optimize:
        lines.append("xy_optimize = false")
    if cfg.incremental is not None:
        lines.append(f"incremental = {str(cfg.incremental).lower()}")
    return "\n".join(lines) + "\n"
