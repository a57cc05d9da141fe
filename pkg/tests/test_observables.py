import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvedchain.circuit import ChainSpec, build_quench_circuit, neel_flips
from curvedchain.errors import ConfigError
from curvedchain.lattice import build_profile
from curvedchain.observables import (
    CSV_HEADERS,
    ObservableSeries,
    background_subtract,
    collapse_metric,
    connected_zz_from_counts,
    count_sign_changes,
    distance_averaged_correlator,
    exact_series,
    first_arrival,
    fit_local_frequency,
    fmt,
    front_positions,
    magnetization_from_counts,
    staggered_magnetization,
    unequal_time_proxy,
    zero_crossings,
    zz_from_counts,
)
from curvedchain.statevector import ShotTable, apply_circuit, init_product_state, magnetization, zz_matrix, sample_counts


def test_max_standard_error_at_2_14_shots():
    table = ShotTable(0, 0.0, 2 ** 14, {"0": 2 ** 13, "1": 2 ** 13}, seed=0)
    series = magnetization_from_counts([table])
    assert series.values[0, 0] == 0.0
    assert series.stderr[0, 0] == 0.0078125


def test_estimators_on_hand_counts():
    table = ShotTable(0, 0.0, 4, {"00": 2, "01": 1, "11": 1}, seed=0)
    m = magnetization_from_counts(table)
    assert m.values[0].tolist() == [0.5, 0.0]
    assert m.stderr[0, 0] == pytest.approx(math.sqrt(0.75 / 4))
    zz = zz_from_counts(table)
    assert zz[0, 1] == pytest.approx((2 - 1 + 1) / 4)
    c = connected_zz_from_counts(table)
    assert c.values[0, 0, 1] == pytest.approx(0.5 - 0.5 * 0.0)
    assert c.values[0, 0, 0] == pytest.approx(1 - 0.25)


def test_estimators_converge_to_exact():
    n = 6
    spec = ChainSpec(build_profile("uniform", n), 0.5, steps=5)
    psi = apply_circuit(init_product_state(n), build_quench_circuit(spec, neel_flips(n), 5))
    table = sample_counts(psi, 2 ** 16, seed=1)
    m = magnetization_from_counts(table)
    exact_m = magnetization(psi)
    assert np.all(np.abs(m.values[0] - exact_m) <= 5 * m.stderr[0] + 1e-12)
    zz = zz_from_counts(table)
    assert np.max(np.abs(zz - zz_matrix(psi))) < 0.03



def test_estimator_error_shrinks_as_inverse_sqrt_shots():
    n = 6
    spec = ChainSpec(build_profile("uniform", n), 0.5, steps=5)
    psi = apply_circuit(init_product_state(n), build_quench_circuit(spec, neel_flips(n), 5))
    exact_m = magnetization(psi)
    rms = []
    for k in (10, 14, 18):
        dev = [magnetization_from_counts(sample_counts(psi, 2 ** k, seed=s)).values[0] - exact_m
               for s in range(8)]
        rms.append(float(np.sqrt(np.mean(np.square(dev)))))
    # each factor 16 in shots should cut the error by about 4
    for coarse, fine in zip(rms, rms[1:]):
        assert 2.5 < coarse / fine < 6.5


def site_series(values, dt=0.1, name="m"):
    values = np.asarray(values, dtype=float)
    steps = np.arange(len(values))
    return exact_series(name, "site", steps, steps * dt, values)


def pair_series(values, dt=0.1):
    values = np.asarray(values, dtype=float)
    steps = np.arange(len(values))
    return exact_series("c", "pair", steps, steps * dt, values)


@pytest.mark.parametrize("kind", sorted(CSV_HEADERS))
def test_csv_headers_and_newline(kind):
    shape = {"site": (2, 3), "pair": (2, 3, 3), "distance": (2, 3), "scalar": (2,)}[kind]
    labels = np.array([0, 1, 2]) if kind == "distance" else None
    s = exact_series("x", kind, [0, 1], [0.0, 0.1], np.full(shape, 0.1), labels=labels)
    text = s.to_csv()
    assert text.splitlines()[0] == ",".join(CSV_HEADERS[kind])
    assert text.endswith("\n")
    assert "0.1" in text.splitlines()[-1]


def test_fmt_round_trip():
    for v in (0.1, 1 / 3, -2.5e-17, 1e300, 0.0):
        assert float(fmt(v)) == v
    assert fmt(np.int64(3)) == "3"


def test_series_validation():
    with pytest.raises(ConfigError):
        ObservableSeries("x", "site", [0], [0.0], np.zeros((1, 2)), np.zeros((1, 3)))
    with pytest.raises(ConfigError):
        ObservableSeries("x", "volume", [0], [0.0], np.zeros((1, 2)), np.zeros((1, 2)))
    with pytest.raises(ConfigError):
        ObservableSeries("x", "site", [0, 1], [0.0], np.zeros((2, 2)), np.zeros((2, 2)))


def test_distance_average():
    c = np.zeros((1, 4, 4))
    c[0] = np.arange(16).reshape(4, 4)
    out = distance_averaged_correlator(pair_series(c))
    assert out.labels.tolist() == [0, 1, 2, 3]
    assert out.values[0, 0] == pytest.approx(np.mean([0, 5, 10, 15]))
    assert out.values[0, 1] == pytest.approx(np.mean([1, 6, 11]))
    assert out.values[0, 3] == pytest.approx(3)
    win = distance_averaged_correlator(pair_series(c), window=(2, 3), separations=[0, 1, -1])
    assert win.values[0].tolist() == [pytest.approx(7.5), 6.0, 9.0]
    with pytest.raises(ConfigError):
        distance_averaged_correlator(pair_series(c), window=(2, 3), separations=[2])
    with pytest.raises(ConfigError):
        distance_averaged_correlator(site_series(np.zeros((1, 4))))


def test_staggered_magnetization_neel():
    n = 16
    m0 = np.array([(-1.0) ** (j - 1) for j in range(1, n + 1)])
    s = staggered_magnetization(site_series([m0, -m0]), n_cut=2)
    assert s.values == pytest.approx([1.0, -1.0], abs=1e-15)
    assert s.metadata["n_cut"] == 2
    with pytest.raises(ConfigError):
        staggered_magnetization(site_series([m0]), n_cut=8)


def test_staggered_error_from_covariance():
    n = 4
    m = site_series(np.zeros((1, n)))
    cov = np.eye(n)[None]
    s = staggered_magnetization(m, 0, pair_series(cov), shots=100)
    # uncorrelated unit-variance sites: var = sum f_i^2 / shots = 1/(4 * 100)
    assert s.stderr[0] == pytest.approx(math.sqrt(1 / 400))


def test_background_subtraction_modes():
    bg = site_series(np.ones((2, 3)))
    a = site_series([[1, -1, 1], [0.5, 0.2, 1]])
    b = site_series([[-1, 1, 1], [0.1, 0.9, 1]])
    r1 = background_subtract(a, bg, 1)
    assert r1.values.tolist() == [[0, 1, 0], [0.25, 0.4, 0]]
    r2 = background_subtract(a, bg, 2, other=b)
    assert r2.values[0].tolist() == [1, 1, 0]
    with pytest.raises(ConfigError):
        background_subtract(a, bg, 2)
    with pytest.raises(ConfigError):
        background_subtract(a, bg, 3)
    with pytest.raises(ConfigError):
        background_subtract(a, site_series(np.ones((3, 3))), 1)


def test_unequal_time_proxy():
    m = site_series([[1, -1], [0.5, 0.25]])
    g = unequal_time_proxy(m, m)
    assert g.values[1].tolist() == [[0.5, -0.5], [0.25, -0.25]]
    with pytest.raises(ConfigError):
        unequal_time_proxy(m, [1.0, 1.0, 1.0])


@settings(max_examples=40, deadline=None)
@given(st.floats(1.0, 12.0), st.floats(0.0, 2.0), st.floats(0.05, 1.0))
def test_frequency_fit_recovers_damped_cosine(omega, phase, rate):
    t = np.arange(0, 8, 0.01)
    y = np.exp(-rate * t) * np.cos(omega * t + phase)
    if np.sum(np.abs(np.diff(np.sign(y))) > 0) < 3:
        return
    fit = fit_local_frequency(y, times=t)
    assert fit.omega == pytest.approx(omega, rel=2e-3)


def test_frequency_fit_decay_time():
    t = np.arange(0, 10, 0.01)
    fit = fit_local_frequency(np.exp(-t / 3) * np.cos(4 * t), dt=0.01)
    assert fit.tau == pytest.approx(3.0, rel=0.02)
    mono = fit_local_frequency(np.exp(-t / 5), times=t)
    assert mono.omega is None
    assert mono.tau == pytest.approx(5.0, rel=1e-6)
    flat = fit_local_frequency(np.ones(20), dt=0.1)
    assert flat.tau == math.inf
    with pytest.raises(ConfigError):
        fit_local_frequency([1, 2, 3])
    with pytest.raises(ConfigError):
        fit_local_frequency(np.ones(10))


def test_zero_crossings_and_sign_changes():
    t = np.linspace(0, 2 * np.pi, 400)
    zc = zero_crossings(t, np.sin(t + 0.3))
    assert zc == pytest.approx([np.pi - 0.3, 2 * np.pi - 0.3], abs=1e-6)
    assert count_sign_changes([1, 0, -1, -2, 3]) == 2
    assert count_sign_changes([1, 1, 1]) == 0


def test_collapse_metric_perfect_collapse():
    profile = build_profile("horizon", 80, j_star=80 / 7)
    t = np.arange(0, 4, 0.01)
    sites = [25, 30, 40, 50, 55]
    curves = {j: (-1) ** j * np.cos(8 * profile.site_velocity(j) * t) for j in sites}
    raw, rescaled = collapse_metric(curves, t, profile)
    assert rescaled < 1e-3
    assert raw > 0.1
    with pytest.raises(ConfigError):
        collapse_metric({5: curves[25], 40: curves[40]}, t, profile)
    with pytest.raises(ConfigError):
        collapse_metric({40: curves[40]}, t, profile)


def test_fronts_and_arrival():
    c = np.zeros((3, 5, 5))
    c[1, 2, 3] = 0.5
    c[2, 2, [0, 4]] = 0.5
    corr = pair_series(c)
    arrival = first_arrival(corr, 3, 0.1)
    assert arrival[2] == 0.0
    assert arrival[3] == pytest.approx(0.1)
    assert arrival[0] == pytest.approx(0.2)
    assert math.isnan(arrival[1])
    left, right = front_positions(corr, 3, 0.1)
    assert left.tolist() == [3, 3, 1]
    assert right.tolist() == [3, 4, 5]
