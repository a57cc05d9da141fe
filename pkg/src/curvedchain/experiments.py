"""End-to-end quench protocols: backend selection, observables, bundles."""

from __future__ import annotations

import csv
import io
import json
import os
import shutil
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, kernels
from . import observables as obs
from .circuit import build_quench_circuit, trotter_step
from .config import ExperimentConfig, check_capability, check_fields
from .errors import ConfigError
from .freefermion import Propagator, build_hopping, ff_connected_zz, ff_magnetization, init_occupation
from .lattice import GeodesicCurve, geodesics_csv_rows, light_cone
from .observables import ObservableSeries, fmt
from .statevector import (
    RNG_ALGORITHM,
    apply_circuit,
    exact_unitary_evolve,
    init_product_state,
    magnetization,
    sample_counts,
    zz_matrix,
)


@dataclass
class ResultBundle:
    config: ExperimentConfig
    series: dict[str, ObservableSeries] = field(default_factory=dict)
    geodesics: list[GeodesicCurve] = field(default_factory=list)
    tables: dict[str, str] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    label: str = ""

    @property
    def config_echo(self) -> str:
        return self.config.to_text()

    def provenance(self) -> dict:
        return {
            "code_version": __version__,
            "kernel_backend": kernels.BACKEND,
            "rng": RNG_ALGORITHM,
            "seed_schedule": "base_seed + step (shared by every run of a protocol)",
            "float_format": "shortest round-trip (Python repr)",
            "backend": self.config.backend,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        }

    def geodesics_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["origin", "t", "left", "right"])
        for origin, t, left, right in geodesics_csv_rows(self.geodesics):
            w.writerow([fmt(origin), fmt(t), fmt(left), fmt(right)])
        return buf.getvalue()

    def files(self) -> dict[str, str]:
        """File name -> text for everything except ``meta.json``."""
        out = {f"{name}.csv": s.to_csv() for name, s in self.series.items()}
        if self.geodesics:
            out["geodesics.csv"] = self.geodesics_csv()
        out.update(self.tables)
        out["config.ini"] = self.config_echo
        return out

    def meta(self) -> dict:
        return {
            "label": self.label,
            "config": self.config_echo,
            "provenance": self.provenance(),
            "series": {name: {"kind": s.kind, "backend": s.backend, **s.metadata}
                       for name, s in self.series.items()},
            **self.metadata,
        }

    def write(self, out_dir: str | os.PathLike) -> Path:
        """Write atomically: files land in ``out_dir`` only if every write succeeds."""
        out = Path(out_dir)
        out.parent.mkdir(parents=True, exist_ok=True)
        tmp = Path(tempfile.mkdtemp(prefix=".partial-", dir=out.parent))
        try:
            for name, text in self.files().items():
                (tmp / name).write_text(text, encoding="utf-8")
            (tmp / "meta.json").write_text(
                json.dumps(self.meta(), indent=2, sort_keys=True, default=_json_default) + "\n",
                encoding="utf-8",
            )
            out.mkdir(parents=True, exist_ok=True)
            for item in tmp.iterdir():
                os.replace(item, out / item.name)
        finally:
            shutil.rmtree(tmp, ignore_errors=True)
        return out


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj)}")


def _workers(workers):
    if workers is None:
        workers = int(os.environ.get("CURVEDCHAIN_WORKERS", "1") or 1)
    return max(1, workers)


def _pmap(fn, items, workers):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _exact_observables(cfg: ExperimentConfig, flips):
    """Per-step magnetization and full ``<ZZ>`` from an infinite-shot backend."""
    spec = cfg.spec
    n, steps = spec.n_sites, spec.steps
    mags, zzs = [], []
    if cfg.backend == "freefermion":
        prop = Propagator.from_hopping(build_hopping(spec.profile, spec.J))
        g0 = init_occupation(n, flips)
        for s in range(steps + 1):
            g = prop.evolve(g0, s * spec.dt)
            m = ff_magnetization(g)
            mags.append(m)
            zzs.append(ff_connected_zz(g) + np.outer(m, m))
        return np.array(mags), np.array(zzs)
    state = init_product_state(n, flips)
    if cfg.backend == "statevector":
        layer = trotter_step(spec, cfg.xy_optimize)
    for s in range(steps + 1):
        if s > 0:
            if cfg.backend == "statevector":
                state = apply_circuit(state, layer)
            else:
                state = exact_unitary_evolve(spec, state, spec.dt)
        mags.append(magnetization(state))
        zzs.append(zz_matrix(state))
    return np.array(mags), np.array(zzs)


def _sampled_tables(cfg: ExperimentConfig, flips, workers: int):
    """Shot tables for steps ``0..steps``, seeded with ``cfg.seed + step``."""
    spec = cfg.spec
    n, steps = spec.n_sites, spec.steps

    def seed_for(s):
        return cfg.seed + s

    incremental = bool(cfg.incremental)
    if cfg.backend == "exact_oracle" or incremental:
        states = []
        state = init_product_state(n, flips)
        layer = trotter_step(spec, cfg.xy_optimize)
        for s in range(steps + 1):
            if s > 0:
                state = (exact_unitary_evolve(spec, state, spec.dt)
                         if cfg.backend == "exact_oracle" else apply_circuit(state, layer))
            states.append(state)
        return _pmap(lambda s: sample_counts(states[s], cfg.shots, seed_for(s), s, spec.dt),
                     range(steps + 1), workers)

    blank = init_product_state(n, [])

    def run_step(s):
        circuit = build_quench_circuit(spec, flips, s, cfg.xy_optimize)
        return sample_counts(apply_circuit(blank, circuit), cfg.shots, seed_for(s), s, spec.dt)

    return _pmap(run_step, range(steps + 1), workers)


def simulate_magnetization_and_correlations(cfg: ExperimentConfig, flips, workers: int = 1):
    """Magnetization (site) and connected ZZ (pair) series for one initial state."""
    spec = cfg.spec
    steps = np.arange(spec.steps + 1)
    times = steps * spec.dt
    if cfg.shots is None:
        mags, zzs = _exact_observables(cfg, flips)
        conn = zzs - mags[:, :, None] * mags[:, None, :]
        mag = obs.exact_series("magnetization", "site", steps, times, mags, backend=cfg.backend)
        corr = obs.exact_series("connected_zz", "pair", steps, times, conn, backend=cfg.backend)
        return mag, corr
    tables = _sampled_tables(cfg, flips, workers)
    mag = obs.magnetization_from_counts(tables)
    corr = obs.connected_zz_from_counts(tables)
    for s in (mag, corr):
        s.backend = cfg.backend
        s.metadata["seeds"] = [t.seed for t in tables]
    return mag, corr


def _prepare(cfg: ExperimentConfig):
    check_fields(cfg)
    check_capability(cfg)


def _geodesics(cfg: ExperimentConfig) -> list[GeodesicCurve]:
    t_max = cfg.spec.steps * cfg.spec.dt
    if not cfg.origins or t_max <= 0:
        return []
    return [light_cone(cfg.spec.profile, o, t_max, cfg.spec.steps + 1) for o in cfg.origins]


def run_neel_quench(cfg: ExperimentConfig, workers: int | None = None) -> ResultBundle:
    """Quench from ``cfg.initial_state`` (Neel by default) and measure every step."""
    _prepare(cfg)
    workers = _workers(workers)
    mag, corr = simulate_magnetization_and_correlations(cfg, cfg.flips(), workers)
    bundle = ResultBundle(cfg, label="neel_quench")
    wanted = set(cfg.outputs)
    if "magnetization" in wanted:
        bundle.series["magnetization"] = mag
    if "connected_zz" in wanted:
        bundle.series["connected_zz"] = corr
    if "distance_correlator" in wanted:
        bundle.series["distance_correlator"] = obs.distance_averaged_correlator(corr)
    if "staggered_magnetization" in wanted:
        n_cut = cfg.stagger_cut()
        if cfg.n_sites - 2 * n_cut >= 2:
            bundle.series["staggered_magnetization"] = obs.staggered_magnetization(
                mag, n_cut, corr, cfg.shots)
    for i in cfg.cut_sites:
        bundle.series[f"correlator_cut_{i}"] = ObservableSeries(
            f"correlator_cut_{i}", "site", corr.steps, corr.times,
            corr.values[:, i - 1, :], corr.stderr[:, i - 1, :], backend=corr.backend,
            metadata={"i": i})
    if "geodesics" in wanted:
        bundle.geodesics = _geodesics(cfg)
    return bundle


def overlap_time(cfg: ExperimentConfig, a: int, b: int) -> float:
    """``|b - a| / (2 v_qp)`` with ``v_qp = 4 J |v|`` averaged over the bonds between."""
    lo, hi = sorted((a, b))
    v = np.abs(cfg.spec.profile.values[lo - 1:hi - 1]).mean()
    return (hi - lo) / (2 * 4 * abs(cfg.spec.J) * v)


def run_ballistic_protocol(cfg: ExperimentConfig, workers: int | None = None) -> ResultBundle:
    """Double versus single spin-flip runs with all-up background subtraction."""
    _prepare(cfg)
    workers = _workers(workers)
    flips = cfg.flips()
    if cfg.initial_state in ("neel", "all_up") or len(flips) != 2:
        raise ConfigError("ballistic protocol needs initial_state = flips: a, b")
    a, b = flips
    if a == b:
        raise ConfigError("the two flip sites collide")
    runs = {"all_up": [], "both": [a, b], "first": [a], "second": [b]}
    mags = {}
    for key, fl in runs.items():
        mags[key], _ = simulate_magnetization_and_correlations(cfg, fl, workers)
        mags[key].name = f"magnetization_{key}"
    bundle = ResultBundle(cfg, label="ballistic")
    for key, series in mags.items():
        bundle.series[series.name] = series
    bg = mags["all_up"]
    mode1 = obs.background_subtract(mags["both"], bg, 1, name="residual_mode1_both")
    bundle.series[mode1.name] = mode1
    for key in ("first", "second"):
        r = obs.background_subtract(mags[key], bg, 1, name=f"residual_mode1_{key}")
        bundle.series[r.name] = r
    mode2 = obs.background_subtract(mags["first"], bg, 2, other=mags["second"],
                                    name="residual_mode2")
    bundle.series[mode2.name] = mode2
    diff = np.abs(mode1.values - mode2.values)
    bundle.series["residual_difference"] = ObservableSeries(
        "residual_difference", "site", mode1.steps, mode1.times, diff,
        np.hypot(mode1.stderr, mode2.stderr), backend=cfg.backend)
    bundle.metadata["flips"] = [a, b]
    bundle.metadata["overlap_time"] = overlap_time(cfg, a, b)
    if "geodesics" in cfg.outputs:
        bundle.geodesics = _geodesics(cfg.replace(origins=(a, b)))
    return bundle


def run_delta_sweep(cfg: ExperimentConfig, deltas: Sequence[float] | None = None,
                    workers: int | None = None) -> list[ResultBundle]:
    """The same Neel quench for each anisotropy in ``deltas``."""
    deltas = list(cfg.deltas if deltas is None else deltas)
    if not deltas:
        raise ConfigError("delta sweep needs at least one delta")
    _prepare(cfg.replace(deltas=tuple(deltas)))
    bundles = []
    for delta in deltas:
        sub = cfg.with_delta(delta).replace(protocol="neel_quench", deltas=())
        try:
            bundle = run_neel_quench(sub, workers)
        except Exception as exc:
            try:
                labelled = type(exc)(f"[delta={delta!r}] {exc}")
            except Exception:
                raise exc
            raise labelled from exc
        bundle.label = f"delta_{delta!r}"
        if delta == 0 and cfg.backend != "freefermion" and cfg.shots is None:
            ff = sub.replace(backend="freefermion")
            m_ff, c_ff = simulate_magnetization_and_correlations(ff, ff.flips())
            m_sv, c_sv = simulate_magnetization_and_correlations(sub, sub.flips())
            bundle.metadata["crosscheck_freefermion"] = {
                "note": "statevector is Trotterized; differences include Trotter error",
                "dt": sub.spec.dt,
                "max_abs_magnetization": float(np.abs(m_ff.values - m_sv.values).max()),
                "max_abs_connected_zz": float(np.abs(c_ff.values - c_sv.values).max()),
            }
        bundles.append(bundle)
    return bundles


def run_frequency_scan(cfg: ExperimentConfig, workers: int | None = None,
                       min_speed_fraction: float = 0.1) -> ResultBundle:
    """Local oscillation frequency of ``M_j(t)`` against ``J |v_j|``.

    Sites within ``n_cut`` of a chain end, outside the horizons, or slower
    than ``min_speed_fraction`` of the fastest site are excluded; sites with
    fewer than two zero crossings are flagged ``frozen``.
    """
    _prepare(cfg)
    if cfg.backend != "freefermion" or cfg.spec.delta != 0:
        raise ConfigError("frequency scan needs backend = freefermion and delta = 0")
    if cfg.n_sites < 100:
        raise ConfigError("frequency scan needs N >= 100")
    spec = cfg.spec
    profile = spec.profile
    steps = np.arange(spec.steps + 1)
    times = steps * spec.dt
    prop = Propagator.from_hopping(build_hopping(profile, spec.J))
    occ = np.zeros(cfg.n_sites)
    occ[[f - 1 for f in cfg.flips()]] = 1.0
    mags = []
    for t in times:
        u = prop.forward(-t)
        mags.append(1.0 - 2.0 * (np.abs(u) ** 2) @ occ)
    mags = np.array(mags)
    margin = cfg.n_cut if cfg.n_cut is not None else 9
    hz = profile.horizons()
    speeds = np.array([profile.site_velocity(j) for j in range(1, cfg.n_sites + 1)])
    rows = []
    for j in range(1, cfg.n_sites + 1):
        speed = speeds[j - 1]
        fit = obs.fit_local_frequency(mags[:, j - 1], times=times)
        inside = not hz or hz[0] < j < hz[-1]
        if j <= margin or j > cfg.n_sites - margin or not inside \
                or speed < min_speed_fraction * speeds.max():
            status = "excluded"
        elif fit.omega is None:
            status = "frozen"
        else:
            status = "ok"
        ratio = fit.omega / (abs(spec.J) * speed) if fit.omega is not None and speed > 0 else None
        rows.append((j, fit.omega, speed, ratio, status))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["site", "omega", "v", "ratio", "status"])
    for j, omega, speed, ratio, status in rows:
        w.writerow([j, "" if omega is None else fmt(omega), fmt(speed),
                    "" if ratio is None else fmt(ratio), status])
    bundle = ResultBundle(cfg, label="frequency_scan")
    bundle.tables["frequency.csv"] = buf.getvalue()
    if "magnetization" in cfg.outputs:
        bundle.series["magnetization"] = obs.exact_series(
            "magnetization", "site", steps, times, mags, backend="freefermion")
    ok = [r for r in rows if r[4] == "ok"]
    ratios = np.array([r[3] for r in ok])
    bundle.metadata["frequency"] = {
        "bulk_sites": [r[0] for r in ok],
        "frozen_sites": [r[0] for r in rows if r[4] == "frozen"],
        "median_ratio": float(np.median(ratios)) if len(ratios) else None,
        "max_relative_deviation": (float(np.max(np.abs(ratios / np.median(ratios) - 1)))
                                   if len(ratios) else None),
    }
    return bundle


def run(cfg: ExperimentConfig, workers: int | None = None) -> list[ResultBundle]:
    """Dispatch on ``cfg.protocol``; always returns a list of bundles."""
    if cfg.protocol == "neel_quench":
        return [run_neel_quench(cfg, workers)]
    if cfg.protocol == "ballistic":
        return [run_ballistic_protocol(cfg, workers)]
    if cfg.protocol == "delta_sweep":
        return run_delta_sweep(cfg, workers=workers)
    if cfg.protocol == "frequency_scan":
        return [run_frequency_scan(cfg, workers)]
    raise ConfigError(f"unknown protocol {cfg.protocol!r}")
