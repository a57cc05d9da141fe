"""Exact XX-chain (delta = 0) dynamics via the Jordan-Wigner mapping.

The spin chain maps to free fermions hopping with amplitude ``2 J v_j``;
a down spin is an occupied site, so ``<sigma^z_j> = 1 - 2 <n_j>``.  The
state is tracked through ``G_ij = <c_i^dag c_j>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConfigError
from .lattice import DeformationProfile


def build_hopping(profile: DeformationProfile, J: float = 1.0) -> np.ndarray:
    """Real symmetric tridiagonal hopping matrix with off-diagonals ``2 J v_j``."""
    off = 2.0 * J * profile.values
    return np.diag(off, 1) + np.diag(off, -1)


def init_occupation(n: int, flips: Iterable[int] = ()) -> np.ndarray:
    """Diagonal correlation matrix of a product state with fermions at ``flips``."""
    flips = list(flips)
    if len(set(flips)) != len(flips):
        raise ConfigError(f"duplicate flip sites in {flips}")
    occ = np.zeros(n)
    for f in flips:
        if not 1 <= f <= n:
            raise ConfigError(f"flip site {f} outside [1, {n}]")
        occ[f - 1] = 1.0
    return np.diag(occ).astype(complex)


@dataclass(frozen=True)
class Propagator:
    """Eigendecomposition ``h = Q diag(w) Q^T`` reused for every time."""

    energies: np.ndarray
    modes: np.ndarray

    @classmethod
    def from_hopping(cls, h: np.ndarray) -> "Propagator":
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ConfigError("hopping matrix must be square")
        w, q = np.linalg.eigh(h)
        return cls(w, q)

    def forward(self, t: float) -> np.ndarray:
        """``exp(+i h t)``."""
        return (self.modes * np.exp(1j * self.energies * t)) @ self.modes.T

    def evolve(self, g0: np.ndarray, t: float) -> np.ndarray:
        if not np.isfinite(t):
            raise ConfigError("t must be finite")
        if g0.shape != self.modes.shape:
            raise ConfigError(f"G has shape {g0.shape}, hopping is {self.modes.shape}")
        if t == 0:
            return np.array(g0, dtype=complex)
        u = self.forward(t)
        return u @ g0 @ u.conj().T


def evolve_correlations(g0: np.ndarray, h: np.ndarray, t: float) -> np.ndarray:
    """``G(t) = exp(iht) G0 exp(-iht)``."""
    return Propagator.from_hopping(h).evolve(g0, t)


def ff_magnetization(g: np.ndarray) -> np.ndarray:
    return 1.0 - 2.0 * np.real(np.diag(g))


def ff_connected_zz(g: np.ndarray) -> np.ndarray:
    """Connected ``<sigma^z_i sigma^z_j>`` from Wick's theorem.

    Off-diagonal entries are ``-4 |G_ij|^2``; the diagonal is ``1 - M_j^2``.
    """
    c = -4.0 * np.abs(g) ** 2
    m = ff_magnetization(g)
    np.fill_diagonal(c, 1.0 - m ** 2)
    return c


def ff_zz(g: np.ndarray) -> np.ndarray:
    """Full ``<sigma^z_i sigma^z_j>`` (not connected)."""
    m = ff_magnetization(g)
    return ff_connected_zz(g) + np.outer(m, m)
