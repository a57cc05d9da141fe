"""Dense statevector simulation, exact propagation and shot sampling.

Basis convention: ``|0> = up``, ``|1> = down``; site 1 is the most
significant bit of the amplitude index, and the leftmost character of a
bitstring.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from . import kernels
from .circuit import ChainSpec, Circuit, Gate
from .errors import CapabilityError, ConfigError

MAX_QUBITS = 26
EXACT_MAX_QUBITS = 14
RNG_ALGORITHM = "numpy.random.PCG64"


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ConfigError(
                f"expected {1 << self.n_qubits} amplitudes, got {self.amplitudes.shape}"
            )

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def _check_size(n, max_qubits):
    if n < 1:
        raise ConfigError("need at least one qubit")
    if n > max_qubits:
        raise CapabilityError(
            f"statevector backend limited to N <= {max_qubits} qubits (requested {n})"
        )


def init_product_state(n: int, flips: Iterable[int] = (),
                       max_qubits: int = MAX_QUBITS) -> StateVector:
    """Computational basis state with down spins (bit 1) exactly at ``flips``."""
    _check_size(n, max_qubits)
    flips = list(flips)
    if len(set(flips)) != len(flips):
        raise ConfigError(f"duplicate flip sites in {flips}")
    index = 0
    for f in flips:
        if not 1 <= f <= n:
            raise ConfigError(f"flip site {f} outside [1, {n}]")
        index |= 1 << (n - f)
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n, amps)


def gate_matrix(gate: Gate) -> np.ndarray:
    """2x2 matrix of a single-qubit gate."""
    if gate.kind == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    c, s = np.cos(gate.angle / 2), np.sin(gate.angle / 2)
    if gate.kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if gate.kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if gate.kind == "RZ":
        return np.diag([np.exp(-0.5j * gate.angle), np.exp(0.5j * gate.angle)])
    raise ConfigError(f"{gate.kind} is not a single-qubit gate")


def _apply_gates(amps, n, gates, impl):
    for gate in gates:
        if gate.kind == "CNOT":
            impl.apply_cnot(amps, n, gate.qubits[0], gate.qubits[1])
        elif gate.kind == "X":
            impl.apply_x(amps, n, gate.qubits[0])
        elif gate.kind == "RZ":
            impl.apply_diag(amps, n, gate.qubits[0],
                            np.exp(-0.5j * gate.angle), np.exp(0.5j * gate.angle))
        else:
            m = gate_matrix(gate)
            impl.apply_1q(amps, n, gate.qubits[0], m[0, 0], m[0, 1], m[1, 0], m[1, 1])


def apply_circuit(state: StateVector, circuit: Circuit, impl=None) -> StateVector:
    """Return ``circuit`` applied to ``state``; the input is left untouched.

    ``impl`` overrides the kernel module (see ``kernels.available()``).
    """
    if circuit.n_qubits != state.n_qubits:
        raise ConfigError(
            f"circuit acts on {circuit.n_qubits} qubits, state has {state.n_qubits}"
        )
    out = state.copy()
    _apply_gates(out.amplitudes, out.n_qubits, circuit.gates, impl or kernels)
    return out


def circuit_unitary(circuit: Circuit, impl=None) -> np.ndarray:
    """Dense matrix of the gate product (global phase not applied)."""
    n = circuit.n_qubits
    _check_size(n, 12)
    dim = 1 << n
    cols = np.empty((dim, dim), dtype=np.complex128)
    for k in range(dim):
        amps = np.zeros(dim, dtype=np.complex128)
        amps[k] = 1.0
        _apply_gates(amps, n, circuit.gates, impl or kernels)
        cols[:, k] = amps
    return cols


def _site_bits(n):
    idx = np.arange(1 << n)
    return ((idx[:, None] >> (n - np.arange(1, n + 1))[None, :]) & 1).astype(np.int8)


def xxz_hamiltonian(spec: ChainSpec) -> sp.csr_matrix:
    """Sparse ``J sum_j v_j (XX + YY + delta ZZ)`` in the computational basis."""
    n = spec.n_sites
    dim = 1 << n
    idx = np.arange(dim)
    diag = np.zeros(dim)
    rows, cols, vals = [], [], []
    for j in range(1, n):
        coupling = spec.J * spec.profile.bond(j)
        b1 = (idx >> (n - j)) & 1
        b2 = (idx >> (n - j - 1)) & 1
        differ = b1 != b2
        diag += coupling * spec.delta * np.where(differ, -1.0, 1.0)
        src = idx[differ]
        mask = (1 << (n - j)) | (1 << (n - j - 1))
        rows.append(src ^ mask)
        cols.append(src)
        vals.append(np.full(src.size, 2.0 * coupling))
    rows.append(idx)
    cols.append(idx)
    vals.append(diag)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )


def exact_unitary_evolve(spec: ChainSpec, state: StateVector, t: float,
                         max_qubits: int = EXACT_MAX_QUBITS) -> StateVector:
    """``exp(-i t H) |state>`` for the deformed XXZ Hamiltonian."""
    if spec.n_sites != state.n_qubits:
        raise ConfigError("spec and state sizes differ")
    if state.n_qubits > max_qubits:
        raise CapabilityError(
            f"exact propagation limited to N <= {max_qubits} (requested {state.n_qubits})"
        )
    if not np.isfinite(t):
        raise ConfigError("t must be finite")
    if t == 0:
        return state.copy()
    h = xxz_hamiltonian(spec)
    return StateVector(state.n_qubits, expm_multiply(-1j * t * h, state.amplitudes))


def _check_site(state, j):
    if not 1 <= j <= state.n_qubits:
        raise ConfigError(f"site {j} outside [1, {state.n_qubits}]")


def expectation_z(state: StateVector, j: int) -> float:
    _check_site(state, j)
    n = state.n_qubits
    p = state.probabilities().reshape(1 << (j - 1), 2, 1 << (n - j))
    return float(p[:, 0, :].sum() - p[:, 1, :].sum())


def expectation_zz(state: StateVector, i: int, j: int) -> float:
    _check_site(state, i)
    _check_site(state, j)
    if i == j:
        return float(state.probabilities().sum())
    n = state.n_qubits
    idx = np.arange(1 << n)
    sign = 1 - 2 * (((idx >> (n - i)) ^ (idx >> (n - j))) & 1)
    return float(np.dot(state.probabilities(), sign))


def magnetization(state: StateVector) -> np.ndarray:
    """All ``<sigma^z_j>`` at once, ordered by site."""
    n = state.n_qubits
    p = state.probabilities()
    out = np.empty(n)
    for j in range(1, n + 1):
        view = p.reshape(1 << (j - 1), 2, 1 << (n - j))
        out[j - 1] = view[:, 0, :].sum() - view[:, 1, :].sum()
    return out


def zz_matrix(state: StateVector) -> np.ndarray:
    """Matrix of ``<sigma^z_i sigma^z_j>`` (ones on the diagonal)."""
    z = 1.0 - 2.0 * _site_bits(state.n_qubits)
    return z.T @ (state.probabilities()[:, None] * z)


@dataclass
class ShotTable:
    step: int
    time: float
    shots: int
    counts: dict[str, int]
    seed: int
    rng: str = RNG_ALGORITHM
    n_qubits: int = field(default=0)

    def __post_init__(self):
        if not self.n_qubits and self.counts:
            self.n_qubits = len(next(iter(self.counts)))
        if sum(self.counts.values()) != self.shots:
            raise ConfigError("counts do not sum to shots")
        if any(len(b) != self.n_qubits for b in self.counts):
            raise ConfigError("bitstring length differs from n_qubits")

    def to_json(self) -> str:
        return json.dumps({
            "step": self.step,
            "time": self.time,
            "shots": self.shots,
            "seed": self.seed,
            "counts": dict(sorted(self.counts.items())),
        })

    @classmethod
    def from_json(cls, text: str) -> "ShotTable":
        data = json.loads(text)
        return cls(int(data["step"]), float(data["time"]), int(data["shots"]),
                   {str(k): int(v) for k, v in data["counts"].items()}, int(data["seed"]))


def sample_counts(state: StateVector, shots: int, seed: int, step: int = 0,
                  dt: float = 0.1) -> ShotTable:
    """Draw ``shots`` computational-basis outcomes from ``|amplitude|^2``."""
    if shots < 1:
        raise ConfigError("shots must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    p = state.probabilities()
    p = p / p.sum()
    hits = rng.multinomial(shots, p)
    n = state.n_qubits
    counts = {format(int(k), f"0{n}b"): int(hits[k]) for k in np.flatnonzero(hits)}
    return ShotTable(step, step * dt, shots, counts, seed, n_qubits=n)
