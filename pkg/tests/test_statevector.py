import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from curvedchain.circuit import ChainSpec, Circuit, cnot, rx, ry, rz, x
from curvedchain.errors import CapabilityError, ConfigError
from curvedchain.lattice import build_profile
from curvedchain.statevector import (
    ShotTable,
    StateVector,
    apply_circuit,
    circuit_unitary,
    exact_unitary_evolve,
    expectation_z,
    expectation_zz,
    gate_matrix,
    init_product_state,
    magnetization,
    sample_counts,
    xxz_hamiltonian,
    zz_matrix,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
P0 = np.diag([1.0, 0.0])
P1 = np.diag([0.0, 1.0])


def embed(ops, n):
    """Kronecker product with ``ops[site]`` at 1-based sites, identity elsewhere."""
    out = np.array([[1.0 + 0j]])
    for site in range(1, n + 1):
        out = np.kron(out, ops.get(site, I2))
    return out


def dense_gate(gate, n):
    if gate.kind == "CNOT":
        c, t = gate.qubits
        return embed({c: P0}, n) + embed({c: P1, t: X}, n)
    return embed({gate.qubits[0]: gate_matrix(gate)}, n)


def dense_hamiltonian(spec):
    n = spec.n_sites
    h = np.zeros((1 << n, 1 << n), dtype=complex)
    for j in range(1, n):
        v = spec.J * spec.profile.bond(j)
        for p, w in ((X, 1.0), (Y, 1.0), (Z, spec.delta)):
            h += v * w * embed({j: p, j + 1: p}, n)
    return h


def random_circuit(rng, n, length):
    gates = []
    for _ in range(length):
        kind = rng.integers(5)
        q = int(rng.integers(1, n + 1))
        theta = float(rng.uniform(-np.pi, np.pi))
        if kind == 0:
            gates.append(rx(q, theta))
        elif kind == 1:
            gates.append(ry(q, theta))
        elif kind == 2:
            gates.append(rz(q, theta))
        elif kind == 3:
            gates.append(x(q))
        else:
            t = int(rng.integers(1, n))
            gates.append(cnot(q, t if t < q else t + 1))
    return Circuit(n, tuple(gates))


def test_rotation_convention():
    theta = 0.7
    assert np.allclose(gate_matrix(rx(1, theta)), expm(-0.5j * theta * X))
    assert np.allclose(gate_matrix(ry(1, theta)), expm(-0.5j * theta * Y))
    assert np.allclose(gate_matrix(rz(1, theta)), expm(-0.5j * theta * Z))


@pytest.mark.parametrize("seed", range(5))
def test_kernels_match_dense_matrices(kernel_impl, seed):
    rng = np.random.default_rng(seed)
    n = 4
    circ = random_circuit(rng, n, 30)
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    psi /= np.linalg.norm(psi)
    expected = psi.copy()
    for g in circ.gates:
        expected = dense_gate(g, n) @ expected
    got = apply_circuit(StateVector(n, psi), circ, impl=kernel_impl)
    assert np.max(np.abs(got.amplitudes - expected)) < 1e-12


def test_backends_agree():
    from curvedchain import kernels

    impls = kernels.available()
    if len(impls) < 2:
        pytest.skip("compiled kernels not built")
    rng = np.random.default_rng(7)
    circ = random_circuit(rng, 9, 200)
    u = [circuit_unitary(circ, impl) for impl in impls.values()]
    assert np.max(np.abs(u[0] - u[1])) < 1e-12


def test_apply_circuit_leaves_input_untouched():
    psi = init_product_state(3, [2])
    before = psi.amplitudes.copy()
    apply_circuit(psi, Circuit(3, (rx(1, 0.3), cnot(1, 2))))
    assert np.array_equal(psi.amplitudes, before)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6))
def test_norm_preserved(seed, n):
    rng = np.random.default_rng(seed)
    circ = random_circuit(rng, n, 40) if n > 1 else Circuit(1, (rx(1, 0.4), rz(1, 1.1)))
    out = apply_circuit(init_product_state(n, []), circ)
    assert abs(out.norm() - 1.0) < 1e-12


def test_product_state_bit_order():
    psi = init_product_state(4, [1, 3])
    assert np.flatnonzero(psi.amplitudes).tolist() == [0b1010]
    assert magnetization(psi).tolist() == [-1.0, 1.0, -1.0, 1.0]
    assert expectation_z(psi, 1) == -1.0
    assert expectation_zz(psi, 1, 2) == -1.0
    assert expectation_zz(psi, 1, 3) == 1.0
    assert np.array_equal(zz_matrix(psi), np.outer(magnetization(psi), magnetization(psi)))


def test_product_state_errors():
    with pytest.raises(ConfigError):
        init_product_state(4, [1, 1])
    with pytest.raises(ConfigError):
        init_product_state(4, [5])
    with pytest.raises(CapabilityError):
        init_product_state(30, [])
    with pytest.raises(ConfigError):
        expectation_z(init_product_state(3), 4)


def test_circuit_size_mismatch():
    with pytest.raises(ConfigError):
        apply_circuit(init_product_state(3), Circuit(4, ()))


@pytest.mark.parametrize("kind,delta", [("uniform", 0.5), ("horizon", 0.0), ("horizon", 2.0)])
def test_hamiltonian_matches_dense(kind, delta):
    n = 6
    profile = build_profile(kind, n, j_star=n / 7 if kind == "horizon" else None)
    spec = ChainSpec(profile, delta, J=0.8)
    assert np.max(np.abs(xxz_hamiltonian(spec).toarray() - dense_hamiltonian(spec))) < 1e-13


def test_exact_evolution_matches_dense_expm():
    n = 6
    spec = ChainSpec(build_profile("horizon", n, j_star=n / 7), 0.5)
    psi = init_product_state(n, [2, 4, 6])
    got = exact_unitary_evolve(spec, psi, 1.3)
    expected = expm(-1.3j * dense_hamiltonian(spec)) @ psi.amplitudes
    assert np.max(np.abs(got.amplitudes - expected)) < 1e-12


def test_exact_evolution_limits():
    spec = ChainSpec(build_profile("uniform", 15), 0.5)
    with pytest.raises(CapabilityError):
        exact_unitary_evolve(spec, init_product_state(15), 1.0)
    spec = ChainSpec(build_profile("uniform", 4), 0.5)
    with pytest.raises(ConfigError):
        exact_unitary_evolve(spec, init_product_state(4), float("inf"))
    psi = init_product_state(4, [2])
    assert np.array_equal(exact_unitary_evolve(spec, psi, 0.0).amplitudes, psi.amplitudes)


def test_sampling_deterministic_and_consistent():
    rng = np.random.default_rng(3)
    psi = apply_circuit(init_product_state(5), random_circuit(rng, 5, 40))
    a = sample_counts(psi, 4096, seed=11, step=3, dt=0.1)
    b = sample_counts(psi, 4096, seed=11, step=3, dt=0.1)
    c = sample_counts(psi, 4096, seed=12, step=3, dt=0.1)
    assert a.counts == b.counts
    assert a.counts != c.counts
    assert sum(a.counts.values()) == 4096
    assert all(len(k) == 5 for k in a.counts)
    assert a.time == pytest.approx(0.3)


def test_sampling_product_state_is_deterministic_outcome():
    table = sample_counts(init_product_state(4, [2, 4]), 100, seed=0)
    assert table.counts == {"0101": 100}


def test_shot_table_json_round_trip():
    table = sample_counts(init_product_state(3, [1]), 10, seed=5, step=2)
    back = ShotTable.from_json(table.to_json())
    assert back == table


def test_shot_table_validation():
    with pytest.raises(ConfigError):
        ShotTable(0, 0.0, 10, {"01": 5}, 0)
    with pytest.raises(ConfigError):
        ShotTable(0, 0.0, 2, {"01": 1, "1": 1}, 0)
    with pytest.raises(ConfigError):
        sample_counts(init_product_state(2), 0, seed=0)
