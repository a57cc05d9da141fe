"""Deformation profiles and light-cone geodesics of the emergent metric.

Coordinates are continuous site positions ``x`` in ``[1, N]``.  Bond ``j``
(coupling sites ``j`` and ``j+1``) is anchored at ``x = j``, so the horizon
profile vanishes exactly at ``x = j_star + 1`` and ``x = N + 1 - j_star``.
Outside ``[1, N-1]`` the velocity is held constant at the end-bond value.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError

V_FLOOR = 1e-9
POINTS_PER_CELL = 64
DEFAULT_FRONT_SPEED = 8.0

KINDS = ("uniform", "horizon", "custom")


@dataclass(frozen=True)
class DeformationProfile:
    """Per-bond velocity factors ``v_1 .. v_{N-1}``.

    Attributes
    ----------
    n_sites : int
        Number of sites ``N``.
    bond_values : tuple of float
        ``N - 1`` velocity factors; ``bond_values[j - 1]`` is ``v_j``.
    kind : str
        One of ``uniform``, ``horizon``, ``custom``.
    j_star : float or None
        Horizon parameter, only set for ``kind == "horizon"``.
    """

    n_sites: int
    bond_values: tuple[float, ...]
    kind: str = "custom"
    j_star: float | None = None
    _anchors: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown profile kind {self.kind!r}")
        if self.n_sites < 2:
            raise ConfigError(f"n_sites must be >= 2, got {self.n_sites}")
        if len(self.bond_values) != self.n_sites - 1:
            raise ConfigError(
                f"expected {self.n_sites - 1} bond values, got {len(self.bond_values)}"
            )
        values = np.asarray(self.bond_values, dtype=float)
        if not np.all(np.isfinite(values)):
            raise ConfigError("bond values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "_anchors", values)

    @property
    def values(self) -> np.ndarray:
        """Read-only array of bond values."""
        return self._anchors

    def bond(self, j: int) -> float:
        """Velocity factor ``v_j`` of bond ``j`` (1-based)."""
        if not 1 <= j <= self.n_sites - 1:
            raise ConfigError(f"bond index {j} outside [1, {self.n_sites - 1}]")
        return float(self._anchors[j - 1])

    def velocity(self, x):
        """Signed continuous velocity ``v(x)`` at site coordinate(s) ``x``.

        The horizon kind uses the closed-form profile continued to real
        ``x``; other kinds interpolate the bond values linearly.
        """
        x = np.clip(np.asarray(x, dtype=float), 1.0, max(1.0, self.n_sites - 1.0))
        if self.kind == "horizon":
            return _horizon_formula(x, self.n_sites, self.j_star)
        if self.n_sites == 2:
            return np.full_like(x, self._anchors[0])
        return np.interp(x, np.arange(1, self.n_sites, dtype=float), self._anchors)

    def site_velocity(self, j: int) -> float:
        """Local speed ``|v|`` at site ``j``: mean magnitude of its adjacent bonds."""
        if not 1 <= j <= self.n_sites:
            raise ConfigError(f"site {j} outside [1, {self.n_sites}]")
        adjacent = [abs(self._anchors[b - 1]) for b in (j - 1, j) if 1 <= b <= self.n_sites - 1]
        return float(np.mean(adjacent))

    def horizons(self) -> list[float]:
        """Coordinates where the velocity vanishes, sorted ascending."""
        if self.kind == "uniform":
            return []
        if self.kind == "horizon":
            return [self.j_star + 1.0, self.n_sites + 1.0 - self.j_star]
        out = []
        v = self._anchors
        for k in range(len(v)):
            if abs(v[k]) <= V_FLOOR:
                out.append(float(k + 1))
            elif k + 1 < len(v) and abs(v[k + 1]) > V_FLOOR and v[k] * v[k + 1] < 0:
                out.append(k + 1 + v[k] / (v[k] - v[k + 1]))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["bond", "v"])
        for j, value in enumerate(self._anchors, start=1):
            writer.writerow([j, repr(float(value))])
        return buf.getvalue()


def _horizon_formula(x, n_sites, j_star):
    return (
        np.sin(np.pi / n_sites * (x - 1 - j_star))
        * np.sin(np.pi / n_sites * (x - 1 + j_star))
        / np.sin(2 * np.pi / n_sites * j_star)
    )


def build_profile(
    kind: str,
    n_sites: int,
    j_star: float | None = None,
    values: Sequence[float] | None = None,
) -> DeformationProfile:
    """Construct a deformation profile.

    ``uniform`` sets every bond to 1.  ``horizon`` evaluates the two-horizon
    profile ``sin(pi(j-1-j*)/N) sin(pi(j-1+j*)/N) / sin(2 pi j*/N)``.
    ``custom`` takes ``values`` verbatim.
    """
    if not isinstance(n_sites, (int, np.integer)) or n_sites < 2:
        raise ConfigError(f"n_sites must be an integer >= 2, got {n_sites!r}")
    n_sites = int(n_sites)
    if kind == "uniform":
        return DeformationProfile(n_sites, (1.0,) * (n_sites - 1), "uniform")
    if kind == "horizon":
        if j_star is None:
            raise ConfigError("horizon profile requires j_star")
        j_star = float(j_star)
        if not 0 < j_star < n_sites / 2:
            raise ConfigError(f"j_star must lie in (0, N/2) = (0, {n_sites / 2}), got {j_star}")
        bonds = _horizon_formula(np.arange(1, n_sites, dtype=float), n_sites, j_star)
        return DeformationProfile(n_sites, tuple(float(b) for b in bonds), "horizon", j_star)
    if kind == "custom":
        if values is None:
            raise ConfigError("custom profile requires bond values")
        return DeformationProfile(n_sites, tuple(float(b) for b in values), "custom")
    raise ConfigError(f"unknown profile kind {kind!r}")


def read_profile_csv(text: str) -> DeformationProfile:
    """Parse ``bond,v`` CSV text into a custom profile."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["bond", "v"]:
        raise ConfigError("profile CSV must start with header 'bond,v'")
    values = []
    for n, row in enumerate(rows[1:], start=1):
        if not row:
            continue
        try:
            bond, value = int(row[0]), float(row[1])
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"bad profile CSV row {n}: {row!r}") from exc
        if bond != len(values) + 1:
            raise ConfigError(f"profile CSV bonds must be consecutive from 1; got {bond}")
        values.append(value)
    return build_profile("custom", len(values) + 1, values=values)


def _check_coordinate(profile, x, name):
    if not (1 <= x <= profile.n_sites):
        raise ConfigError(f"{name}={x} outside [1, {profile.n_sites}]")


def _grid(a, b, points_per_cell):
    """Grid on [a, b] (a < b) with breakpoints at every integer inside."""
    breaks = [a] + [float(k) for k in range(math.floor(a) + 1, math.ceil(b))] + [b]
    pieces = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        n = max(2, math.ceil((hi - lo) * points_per_cell))
        n += n % 2  # Simpson needs an even number of intervals
        pieces.append(np.linspace(lo, hi, n + 1))
    return pieces


def _blocked(v):
    return bool(np.any(np.abs(v) <= V_FLOOR) or np.any(v[:-1] * v[1:] < 0))


def travel_time(profile: DeformationProfile, a: float, b: float,
                points_per_cell: int = POINTS_PER_CELL) -> float:
    """``|integral_a^b dx / |v(x)||`` or ``inf`` if a horizon lies in between."""
    if a == b:
        return 0.0
    lo, hi = min(a, b), max(a, b)
    total = 0.0
    for xs in _grid(lo, hi, points_per_cell):
        v = profile.velocity(xs)
        if _blocked(v):
            return math.inf
        f = 1.0 / np.abs(v)
        h = (xs[-1] - xs[0]) / (len(xs) - 1)
        total += h / 3.0 * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum() + 2.0 * f[2:-1:2].sum())
    return total


def geodesic_time(profile: DeformationProfile, i: float, j: float,
                  front_speed: float = DEFAULT_FRONT_SPEED,
                  points_per_cell: int = POINTS_PER_CELL) -> float:
    """Time for a correlation front to connect sites ``i`` and ``j``.

    Returns ``math.inf`` when the path crosses a horizon (``|v| <= V_FLOOR``
    or a sign change of ``v``).
    """
    _check_coordinate(profile, i, "i")
    _check_coordinate(profile, j, "j")
    if front_speed <= 0:
        raise ConfigError("front_speed must be positive")
    return travel_time(profile, i, j, points_per_cell) / front_speed


@dataclass(frozen=True)
class GeodesicCurve:
    origin: float
    times: np.ndarray
    left: np.ndarray
    right: np.ndarray
    horizon_clamped: tuple[bool, bool]

    @property
    def samples(self):
        return list(zip(self.times.tolist(), self.left.tolist(), self.right.tolist()))


def _front_table(profile, origin, direction, front_speed, points_per_cell):
    """Cumulative arrival times along a ray from ``origin`` (trapezoid)."""
    end = profile.n_sites if direction > 0 else 1
    span = abs(end - origin)
    if span == 0:
        return np.array([origin]), np.array([0.0]), False
    n = max(1, math.ceil(span * points_per_cell))
    xs = origin + direction * np.linspace(0.0, span, n + 1)
    v = profile.velocity(xs)
    bad = np.abs(v) <= V_FLOOR
    bad[1:] |= v[:-1] * v[1:] < 0
    clamped = bool(bad.any())
    if clamped:
        stop = int(np.argmax(bad))
        xs, v = xs[:stop], v[:stop]
    if len(xs) == 0:
        return np.array([origin]), np.array([0.0]), True
    f = 1.0 / (np.abs(v) * front_speed)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.abs(np.diff(xs)))])
    return xs, cum, clamped


def light_cone(profile: DeformationProfile, origin: float, t_max: float, n_samples: int,
               front_speed: float = DEFAULT_FRONT_SPEED,
               points_per_cell: int = POINTS_PER_CELL) -> GeodesicCurve:
    """Left/right geodesic fronts from ``origin`` at ``n_samples`` times in ``[0, t_max]``.

    Fronts stop at the chain ends and never reach a horizon.
    """
    _check_coordinate(profile, origin, "origin")
    if t_max <= 0:
        raise ConfigError("t_max must be positive")
    if n_samples < 2:
        raise ConfigError("n_samples must be >= 2")
    times = np.linspace(0.0, t_max, n_samples)
    fronts, clamped = [], []
    for direction in (-1, +1):
        xs, cum, hit = _front_table(profile, origin, direction, front_speed, points_per_cell)
        fronts.append(np.interp(times, cum, xs) if len(xs) > 1 else np.full(n_samples, xs[0]))
        clamped.append(hit)
    return GeodesicCurve(origin, times, fronts[0], fronts[1], (clamped[0], clamped[1]))


def geodesics_csv_rows(curves: Sequence[GeodesicCurve]):
    for curve in curves:
        for t, left, right in curve.samples:
            yield (curve.origin, t, left, right)
