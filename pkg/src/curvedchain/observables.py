"""Estimators and derived quantities built from shots or exact expectations.

Shot-based standard errors use ``sqrt(Var(O) / shots)``; for a Pauli
string ``O`` this is ``sqrt((1 - <O>^2) / shots)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .lattice import DeformationProfile
from .statevector import ShotTable

SERIES_KINDS = ("site", "pair", "distance", "scalar")
CSV_HEADERS = {
    "site": ["step", "t", "site", "value", "stderr"],
    "pair": ["step", "t", "i", "j", "value", "stderr"],
    "distance": ["step", "t", "x", "value", "stderr"],
    "scalar": ["step", "t", "value", "stderr"],
}


def fmt(value) -> str:
    """Shortest round-trip text for floats, plain text for integers."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


@dataclass
class ObservableSeries:
    """Time-indexed observable with standard errors.

    ``values`` and ``stderr`` have a leading step axis.  Site series are
    ``(steps, N)``, pair series ``(steps, N, N)``, distance series
    ``(steps, len(labels))`` and scalar series ``(steps,)``.
    """

    name: str
    kind: str
    steps: np.ndarray
    times: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    labels: np.ndarray | None = None
    backend: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SERIES_KINDS:
            raise ConfigError(f"unknown series kind {self.kind!r}")
        self.steps = np.asarray(self.steps, dtype=int)
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        if self.values.shape != self.stderr.shape:
            raise ConfigError("values and stderr shapes differ")
        if self.values.shape[0] != len(self.steps) or len(self.times) != len(self.steps):
            raise ConfigError("step axis length mismatch")
        if self.labels is None and self.kind == "site":
            self.labels = np.arange(1, self.values.shape[1] + 1)

    @property
    def n_sites(self) -> int:
        return self.values.shape[1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADERS[self.kind])
        for k, (s, t) in enumerate(zip(self.steps, self.times)):
            val, err = self.values[k], self.stderr[k]
            if self.kind == "scalar":
                w.writerow([fmt(s), fmt(t), fmt(val), fmt(err)])
            elif self.kind == "pair":
                n = val.shape[0]
                for i in range(n):
                    for j in range(n):
                        w.writerow([fmt(s), fmt(t), i + 1, j + 1, fmt(val[i, j]), fmt(err[i, j])])
            else:
                for label, v, e in zip(self.labels, val, err):
                    w.writerow([fmt(s), fmt(t), fmt(label), fmt(v), fmt(e)])
        return buf.getvalue()


def _as_tables(tables):
    if isinstance(tables, ShotTable):
        tables = [tables]
    tables = list(tables)
    if not tables:
        raise ConfigError("no shot tables given")
    for tab in tables:
        if tab.shots < 1:
            raise ConfigError("zero shots")
    return tables


def _spin_matrix(table: ShotTable):
    """Distinct outcomes as a ``(k, N)`` matrix of +-1 and their counts."""
    keys = sorted(table.counts)
    bits = np.array([[c == "1" for c in key] for key in keys], dtype=float)
    weights = np.array([table.counts[k] for k in keys], dtype=float)
    return 1.0 - 2.0 * bits, weights


def magnetization_from_counts(tables, name: str = "magnetization") -> ObservableSeries:
    """``M_j = sum_p p (1 - 2 n_j)`` with ``delta_M = sqrt((1 - M^2)/shots)``."""
    tables = _as_tables(tables)
    vals, errs = [], []
    for tab in tables:
        z, w = _spin_matrix(tab)
        m = w @ z / tab.shots
        vals.append(m)
        errs.append(np.sqrt(np.clip(1.0 - m ** 2, 0.0, None) / tab.shots))
    return ObservableSeries(
        name, "site", [t.step for t in tables], [t.time for t in tables], vals, errs,
        backend="shots", metadata={"shots": tables[0].shots},
    )


def zz_from_counts(table: ShotTable) -> np.ndarray:
    z, w = _spin_matrix(table)
    return z.T @ (w[:, None] * z) / table.shots


def connected_zz_from_counts(tables, name: str = "connected_zz") -> ObservableSeries:
    """``C_ij = <ZZ> - M_i M_j`` with ``delta_C = sqrt((1 - <ZZ>^2)/shots)``."""
    tables = _as_tables(tables)
    vals, errs = [], []
    for tab in tables:
        z, w = _spin_matrix(tab)
        m = w @ z / tab.shots
        zz = z.T @ (w[:, None] * z) / tab.shots
        vals.append(zz - np.outer(m, m))
        errs.append(np.sqrt(np.clip(1.0 - zz ** 2, 0.0, None) / tab.shots))
    return ObservableSeries(
        name, "pair", [t.step for t in tables], [t.time for t in tables], vals, errs,
        backend="shots", metadata={"shots": tables[0].shots},
    )


def exact_series(name, kind, steps, times, values, backend="", labels=None) -> ObservableSeries:
    """Infinite-shot series: standard errors are zero."""
    values = np.asarray(values, dtype=float)
    return ObservableSeries(name, kind, steps, times, values, np.zeros_like(values),
                            labels=labels, backend=backend)


def distance_averaged_correlator(corr: ObservableSeries, window: tuple[int, int] | None = None,
                                 separations: Sequence[int] | None = None,
                                 name: str = "distance_correlator") -> ObservableSeries:
    """``C(x, t) = (1/N_x) sum_i C_{i, i+x}`` over pairs inside ``window``.

    ``window`` is an inclusive 1-based site range (default: the whole chain).
    Errors add in quadrature over the averaged pairs.
    """
    if corr.kind != "pair":
        raise ConfigError("distance averaging needs a pair series")
    n = corr.n_sites
    lo, hi = window if window is not None else (1, n)
    if not 1 <= lo <= hi <= n:
        raise ConfigError(f"window {window} outside [1, {n}]")
    width = hi - lo + 1
    seps = list(range(width)) if separations is None else [int(x) for x in separations]
    vals = np.empty((len(corr.steps), len(seps)))
    errs = np.empty_like(vals)
    for k, x in enumerate(seps):
        if abs(x) >= width:
            raise ConfigError(f"separation {x} not smaller than window size {width}")
        i = np.arange(lo, hi + 1)
        i = i[(i + x >= lo) & (i + x <= hi)] - 1
        vals[:, k] = corr.values[:, i, i + x].mean(axis=1)
        errs[:, k] = np.sqrt((corr.stderr[:, i, i + x] ** 2).sum(axis=1)) / len(i)
    return ObservableSeries(name, "distance", corr.steps, corr.times, vals, errs,
                            labels=np.array(seps), backend=corr.backend)


def staggered_magnetization(mag: ObservableSeries, n_cut: int = 9,
                            corr: ObservableSeries | None = None,
                            shots: int | None = None,
                            name: str = "staggered_magnetization") -> ObservableSeries:
    """``M_s = (1/(N-2n)) sum_{j=n+1}^{N-n} (-1)^(j-1) M_j``.

    With ``corr`` and ``shots`` the error is ``sqrt(sum f_i f_j C_ij / shots)``;
    otherwise it is zero (exact data).
    """
    n = mag.n_sites
    size = n - 2 * n_cut
    if n_cut < 0 or size < 2:
        raise ConfigError(f"empty window: N={n}, n_cut={n_cut} leaves {size} sites")
    sites = np.arange(n_cut + 1, n - n_cut + 1)
    f = (-1.0) ** (sites - 1) / size
    vals = mag.values[:, sites - 1] @ f
    if corr is not None and shots:
        sub = corr.values[:, sites[:, None] - 1, sites[None, :] - 1]
        var = np.einsum("i,sij,j->s", f, sub, f)
        errs = np.sqrt(np.clip(var, 0.0, None) / shots)
    else:
        errs = np.zeros_like(vals)
    return ObservableSeries(name, "scalar", mag.steps, mag.times, vals, errs,
                            backend=mag.backend, metadata={"n_cut": n_cut})


def unequal_time_proxy(mag: ObservableSeries, initial, name: str = "unequal_time") -> ObservableSeries:
    """``G_ji(t, 0) ~ M_j(t) M_i(0)`` for product initial states.

    ``initial`` is a site series (its first step is used) or an array of
    ``M_i(0)``.  ``values[s, j-1, i-1]`` holds ``G_ji``.
    """
    if isinstance(initial, ObservableSeries):
        m0, e0 = initial.values[0], initial.stderr[0]
    else:
        m0 = np.asarray(initial, dtype=float)
        e0 = np.zeros_like(m0)
    if m0.shape != (mag.n_sites,):
        raise ConfigError("initial magnetization has the wrong length")
    vals = mag.values[:, :, None] * m0[None, None, :]
    errs = np.sqrt((mag.stderr[:, :, None] * m0[None, None, :]) ** 2
                   + (mag.values[:, :, None] * e0[None, None, :]) ** 2)
    return ObservableSeries(name, "pair", mag.steps, mag.times, vals, errs, backend=mag.backend)


def _same_grid(a: ObservableSeries, b: ObservableSeries):
    if a.values.shape != b.values.shape or not np.array_equal(a.steps, b.steps):
        raise ConfigError(f"grid mismatch between {a.name!r} and {b.name!r}")


def background_subtract(mag: ObservableSeries, background: ObservableSeries, mode: int = 1,
                        other: ObservableSeries | None = None,
                        name: str | None = None) -> ObservableSeries:
    """Background-subtracted magnetization.

    mode 1: ``|M - M_bg| / 2``;  mode 2: ``|M + M_other - 2 M_bg| / 2``.
    """
    _same_grid(mag, background)
    if mode == 1:
        vals = 0.5 * np.abs(mag.values - background.values)
        errs = 0.5 * np.hypot(mag.stderr, background.stderr)
    elif mode == 2:
        if other is None:
            raise ConfigError("mode 2 needs a second magnetization series")
        _same_grid(mag, other)
        vals = 0.5 * np.abs(mag.values + other.values - 2.0 * background.values)
        errs = 0.5 * np.sqrt(mag.stderr ** 2 + other.stderr ** 2 + 4.0 * background.stderr ** 2)
    else:
        raise ConfigError(f"mode must be 1 or 2, got {mode}")
    return ObservableSeries(name or f"residual_mode{mode}", "site", mag.steps, mag.times,
                            vals, errs, backend=mag.backend)


@dataclass(frozen=True)
class FrequencyFit:
    omega: float | None
    tau: float
    residual: float
    crossings: np.ndarray


def _parabola_root(t3, y3, lo, hi):
    a, b, c = np.polyfit(t3, y3, 2)
    roots = np.roots([a, b, c]) if abs(a) > 1e-300 else np.roots([b, c])
    for r in roots:
        if abs(r.imag) < 1e-12 and lo <= r.real <= hi:
            return float(r.real)
    return None


def zero_crossings(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sign-change times, refined with a parabola through three samples."""
    out = []
    nz = np.flatnonzero(y != 0)
    for a, b in zip(nz[:-1], nz[1:]):
        if y[a] * y[b] > 0:
            continue
        lin = t[a] - y[a] * (t[b] - t[a]) / (y[b] - y[a])
        root = None
        if b == a + 1 and len(t) >= 3:
            # three samples around the crossing, leaning towards the nearer side
            k = a - 1 if a + 2 >= len(t) or (a >= 1 and abs(y[a]) < abs(y[b])) else a
            root = _parabola_root(t[k:k + 3], y[k:k + 3], t[a], t[b])
        out.append(lin if root is None else root)
    return np.array(out)


def _peak(t, y, k):
    """Vertex of the parabola through samples k-1, k, k+1 (abs value, time)."""
    if 0 < k < len(t) - 1:
        a, b, c = np.polyfit(t[k - 1:k + 2], y[k - 1:k + 2], 2)
        if a != 0:
            tv = -b / (2 * a)
            if t[k - 1] <= tv <= t[k + 1]:
                return abs(c - b * b / (4 * a)), tv
    return abs(y[k]), t[k]


def count_sign_changes(values) -> int:
    v = np.asarray(values, dtype=float)
    v = v[v != 0]
    return int(np.sum(v[:-1] * v[1:] < 0))


def _log_slope(t, amp):
    keep = amp > 0
    if keep.sum() < 2:
        return 0.0, 0.0
    coef, res, *_ = np.polyfit(t[keep], np.log(amp[keep]), 1, full=True)
    rms = math.sqrt(res[0] / keep.sum()) if len(res) else 0.0
    return coef[0], rms


def fit_local_frequency(values, dt: float | None = None, times=None) -> FrequencyFit:
    """Oscillation frequency and decay time of a damped signal.

    The frequency comes from the spacing of zero crossings (least-squares
    slope of crossing time against crossing index).  The decay time comes
    from a log-linear fit to the oscillation peaks, or to ``|y|`` itself
    when fewer than two full half-cycles are present.  ``residual`` is the
    RMS of that log fit.
    """
    y = np.asarray(values, dtype=float)
    if times is None:
        if dt is None:
            raise ConfigError("give dt or times")
        t = np.arange(len(y)) * dt
    else:
        t = np.asarray(times, dtype=float)
    if len(y) < 4 or len(t) != len(y):
        raise ConfigError("series too short for a frequency fit")
    zc = zero_crossings(t, y)
    omega = None
    if len(zc) >= 2:
        half_period = np.polyfit(np.arange(len(zc)), zc, 1)[0]
        omega = math.pi / half_period
    peaks = []
    for lo, hi in zip(zc[:-1], zc[1:]):
        inside = np.flatnonzero((t > lo) & (t < hi))
        if len(inside):
            k = inside[np.argmax(np.abs(y[inside]))]
            peaks.append(_peak(t, y, k))
    if len(peaks) >= 2:
        amp, tp = np.array([p[0] for p in peaks]), np.array([p[1] for p in peaks])
        slope, rms = _log_slope(tp, amp)
    else:
        slope, rms = _log_slope(t, np.abs(y))
    tau = -1.0 / slope if slope < 0 else math.inf
    return FrequencyFit(omega, tau, rms, zc)


def collapse_metric(curves: Mapping[int, Sequence[float]], times, profile: DeformationProfile,
                    align_sign: bool = True) -> tuple[float, float]:
    """Spread of site curves in raw time and in rescaled time ``|v_j| t``.

    Spread is the grid-averaged standard deviation across curves.  With
    ``align_sign`` each curve is multiplied by the sign of its first sample
    so that both sublattices of a Neel quench are comparable.
    """
    sites = sorted(curves)
    if len(sites) < 2:
        raise ConfigError("collapse needs at least two sites")
    hz = profile.horizons()
    for j in sites:
        if hz and not (hz[0] < j < hz[-1]):
            raise ConfigError(f"site {j} is not between the horizons {hz}")
    t = np.asarray(times, dtype=float)
    ys = []
    for j in sites:
        y = np.asarray(curves[j], dtype=float)
        if len(y) != len(t):
            raise ConfigError(f"curve for site {j} does not match the time grid")
        if align_sign and y[0] != 0:
            y = y * np.sign(y[0])
        ys.append(y)
    ys = np.array(ys)
    spread_raw = float(np.mean(np.std(ys, axis=0)))

    speeds = np.array([profile.site_velocity(j) for j in sites])
    lo = max(float(t[0]) * s for s in speeds)
    hi = min(float(t[-1]) * s for s in speeds)
    if not hi > lo:
        raise ConfigError("rescaled time domains do not overlap")
    step = float(np.min(np.diff(t))) * float(speeds.min())
    grid = np.arange(lo, hi + 0.5 * step, step)
    grid = grid[grid <= hi]
    rescaled = np.array([np.interp(grid, s * t, y) for s, y in zip(speeds, ys)])
    spread_rescaled = float(np.mean(np.std(rescaled, axis=0)))
    return spread_raw, spread_rescaled


def first_arrival(corr: ObservableSeries, origin: int, threshold: float) -> np.ndarray:
    """Per site, the first time ``|C_{origin, j}| >= threshold`` (nan if never)."""
    row = np.abs(corr.values[:, origin - 1, :])
    hit = row >= threshold
    out = np.full(corr.n_sites, np.nan)
    for j in range(corr.n_sites):
        if j == origin - 1:
            out[j] = 0.0
        elif hit[:, j].any():
            out[j] = corr.times[np.argmax(hit[:, j])]
    return out


def front_positions(corr: ObservableSeries, origin: int, threshold: float):
    """Outermost sites left/right of ``origin`` with ``|C| >= threshold`` per step."""
    left = np.full(len(corr.steps), float(origin))
    right = np.full(len(corr.steps), float(origin))
    for k in range(len(corr.steps)):
        row = np.abs(corr.values[k, origin - 1, :])
        row[origin - 1] = 0.0
        idx = np.flatnonzero(row >= threshold) + 1
        if len(idx):
            left[k] = min(origin, idx.min())
            right[k] = max(origin, idx.max())
    return left, right
