"""Gate sequences for Trotterized quenches of the deformed XXZ chain.

Qubit indices are 1-based site labels.  Gates are listed in application
order.  Rotations follow ``R_a(theta) = exp(-i theta sigma^a / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import ConfigError
from .lattice import DeformationProfile

ROTATIONS = ("RX", "RY", "RZ")
GATE_KINDS = ROTATIONS + ("X", "CNOT")
HALF_PI = math.pi / 2


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ConfigError(f"unknown gate kind {self.kind!r}")
        arity = 2 if self.kind == "CNOT" else 1
        if len(self.qubits) != arity:
            raise ConfigError(f"{self.kind} takes {arity} qubit(s), got {self.qubits}")
        if any(q < 1 for q in self.qubits):
            raise ConfigError(f"qubit indices are 1-based, got {self.qubits}")
        if self.kind == "CNOT" and self.qubits[0] == self.qubits[1]:
            raise ConfigError("CNOT control and target must differ")
        if (self.kind in ROTATIONS) != (self.angle is not None):
            raise ConfigError(f"{self.kind} angle mismatch: {self.angle!r}")
        if self.angle is not None and not math.isfinite(self.angle):
            raise ConfigError(f"{self.kind} angle must be finite, got {self.angle!r}")


def rx(q, theta):
    return Gate("RX", (q,), float(theta))


def ry(q, theta):
    return Gate("RY", (q,), float(theta))


def rz(q, theta):
    return Gate("RZ", (q,), float(theta))


def x(q):
    return Gate("X", (q,))


def cnot(control, target):
    return Gate("CNOT", (control, target))


@dataclass(frozen=True)
class Circuit:
    """Immutable gate list.

    ``global_phase`` is bookkeeping only: the intended operator is
    ``exp(i * global_phase)`` times the product of the gates.  Simulators
    never apply it.
    """

    n_qubits: int
    gates: tuple[Gate, ...] = ()
    global_phase: float = 0.0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ConfigError("a circuit needs at least one qubit")
        for gate in self.gates:
            if max(gate.qubits) > self.n_qubits:
                raise ConfigError(f"gate {gate} exceeds {self.n_qubits} qubits")

    def __len__(self):
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(
            max(self.n_qubits, other.n_qubits),
            self.gates + other.gates,
            self.global_phase + other.global_phase,
        )

    def widened(self, n_qubits: int) -> "Circuit":
        return Circuit(n_qubits, self.gates, self.global_phase)


@dataclass(frozen=True)
class ChainSpec:
    """Physical parameters of a deformed XXZ quench."""

    profile: DeformationProfile
    delta: float
    J: float = 1.0
    dt: float = 0.1
    steps: int = 20

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.steps < 0:
            raise ConfigError(f"steps must be >= 0, got {self.steps}")
        for name in ("delta", "J", "dt"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")

    @property
    def n_sites(self) -> int:
        return self.profile.n_sites

    def bond_angles(self, j: int) -> tuple[float, float, float]:
        """``(alpha, beta, gamma)`` of the bond-``j`` block for one time step."""
        a = -self.dt * self.J * self.profile.bond(j)
        return a, a, a * self.delta


@dataclass(frozen=True)
class CircuitStats:
    cnot_count: int = 0
    single_qubit_count: int = 0
    depth: int = 0


def _distinct(j1, j2):
    if j1 == j2:
        raise ConfigError(f"two-qubit block needs distinct qubits, got {j1} twice")


def _n_gate_gates(j1, j2, alpha, beta, gamma):
    return [
        rz(j2, -HALF_PI),
        cnot(j2, j1),
        rz(j1, HALF_PI - 2 * gamma),
        ry(j2, 2 * alpha - HALF_PI),
        cnot(j1, j2),
        ry(j2, HALF_PI - 2 * beta),
        cnot(j2, j1),
        rz(j1, HALF_PI),
    ]


def _xy_gate_gates(j1, j2, alpha, beta):
    return [
        rx(j1, HALF_PI),
        rx(j2, HALF_PI),
        cnot(j2, j1),
        rz(j1, -2 * beta),
        rx(j2, -2 * alpha),
        cnot(j2, j1),
        rx(j1, -HALF_PI),
        rx(j2, -HALF_PI),
    ]


def n_gate(j1: int, j2: int, alpha: float, beta: float, gamma: float,
           n_qubits: int | None = None) -> Circuit:
    """Three-CNOT circuit for ``exp(i(alpha XX + beta YY + gamma ZZ))``.

    The gate product differs from the target by ``exp(i pi/4)``, recorded
    in ``global_phase``.
    """
    _distinct(j1, j2)
    return Circuit(n_qubits or max(j1, j2), tuple(_n_gate_gates(j1, j2, alpha, beta, gamma)),
                   math.pi / 4)


def xy_gate(j1: int, j2: int, alpha: float, beta: float,
            n_qubits: int | None = None) -> Circuit:
    """Two-CNOT circuit for ``exp(i(alpha XX + beta YY))`` (exact, no phase)."""
    _distinct(j1, j2)
    return Circuit(n_qubits or max(j1, j2), tuple(_xy_gate_gates(j1, j2, alpha, beta)))


def _uses_xy(spec, xy_optimize):
    return xy_optimize and spec.delta == 0


def _step_gates(spec, xy_optimize):
    gates, phase = [], 0.0
    n = spec.n_sites
    # odd bonds act first on the state, then even bonds
    for parity in (1, 0):
        for j in range(1, n):
            if j % 2 != parity:
                continue
            alpha, beta, gamma = spec.bond_angles(j)
            if _uses_xy(spec, xy_optimize):
                gates += _xy_gate_gates(j, j + 1, alpha, beta)
            else:
                gates += _n_gate_gates(j, j + 1, alpha, beta, gamma)
                phase += math.pi / 4
    return gates, phase


def trotter_step(spec: ChainSpec, xy_optimize: bool = True) -> Circuit:
    """One first-order Trotter step ``exp(-i dt H)``: odd sublayer, then even.

    With ``delta == 0`` the two-CNOT XY blocks are used unless
    ``xy_optimize`` is False.
    """
    gates, phase = _step_gates(spec, xy_optimize)
    return Circuit(spec.n_sites, tuple(gates), phase)


def cancel_rx_pairs(circuit: Circuit, atol: float = 1e-12) -> Circuit:
    """Remove RX pairs on one qubit whose angles sum to zero with nothing between."""
    out: list[Gate | None] = []
    history: dict[int, list[int]] = {}
    for gate in circuit.gates:
        if gate.kind == "RX":
            q = gate.qubits[0]
            stack = history.get(q)
            if stack:
                prev = out[stack[-1]]
                if prev.kind == "RX" and abs(prev.angle + gate.angle) <= atol:
                    out[stack.pop()] = None
                    continue
        out.append(gate)
        for q in gate.qubits:
            history.setdefault(q, []).append(len(out) - 1)
    return Circuit(circuit.n_qubits, tuple(g for g in out if g is not None),
                   circuit.global_phase)


def _check_flips(flips, n):
    flips = list(flips)
    for f in flips:
        if not 1 <= f <= n:
            raise ConfigError(f"flip site {f} outside [1, {n}]")
    if len(set(flips)) != len(flips):
        raise ConfigError(f"duplicate flip sites in {flips}")
    return sorted(flips)


def build_quench_circuit(spec: ChainSpec, flips: Iterable[int], steps: int | None = None,
                         xy_optimize: bool = True) -> Circuit:
    """X gates on ``flips`` followed by ``steps`` Trotter layers.

    For ``delta == 0`` (XY blocks) the basis-change RX gates between
    sublayers cancel, leaving one opening and one closing RX layer.
    """
    steps = spec.steps if steps is None else steps
    if not 0 <= steps <= spec.steps:
        raise ConfigError(f"steps must lie in [0, {spec.steps}], got {steps}")
    n = spec.n_sites
    gates = [x(f) for f in _check_flips(flips, n)]
    layer, phase = _step_gates(spec, xy_optimize)
    circuit = Circuit(n, tuple(gates + layer * steps), phase * steps)
    if _uses_xy(spec, xy_optimize):
        circuit = cancel_rx_pairs(circuit)
    return circuit


def neel_flips(n_sites: int) -> list[int]:
    """Down spins of the Neel state ``|up down up down ...>``."""
    return list(range(2, n_sites + 1, 2))


def circuit_stats(circuit: Circuit) -> CircuitStats:
    level: dict[int, int] = {}
    cnots = singles = depth = 0
    for gate in circuit.gates:
        if gate.kind == "CNOT":
            cnots += 1
        else:
            singles += 1
        d = max(level.get(q, 0) for q in gate.qubits) + 1
        for q in gate.qubits:
            level[q] = d
        depth = max(depth, d)
    return CircuitStats(cnots, singles, depth)


_QASM_NAMES = {"RX": "rx", "RY": "ry", "RZ": "rz", "X": "x", "CNOT": "cx"}


def export_openqasm(circuit: Circuit) -> str:
    """OpenQASM 2.0 text; site ``j`` maps to register entry ``q[j-1]``."""
    lines = [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        f"// site j -> q[j-1]; global phase {circuit.global_phase!r} omitted",
        f"qreg q[{circuit.n_qubits}];",
    ]
    for gate in circuit.gates:
        name = _QASM_NAMES[gate.kind]
        args = ",".join(f"q[{q - 1}]" for q in gate.qubits)
        if gate.angle is None:
            lines.append(f"{name} {args};")
        else:
            lines.append(f"{name}({gate.angle!r}) {args};")
    return "\n".join(lines) + "\n"


def count_qasm_gates(text: str) -> dict[str, int]:
    """Count gate statements per mnemonic in OpenQASM text."""
    counts: dict[str, int] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("//"):
            continue
        head = line.split("(")[0].split()[0].rstrip(";")
        if head in ("OPENQASM", "include", "qreg", "creg"):
            continue
        counts[head] = counts.get(head, 0) + 1
    return counts

