import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvedchain.config import check_capability, dump_config, parse_config
from curvedchain.errors import CapabilityError, ConfigError
from curvedchain.presets import PRESETS, load_preset, preset_text

BASE = """
[profile]
kind = horizon
n_sites = 12
j_star = 12/7

[spec]
delta = 0.5
dt = 0.1
steps = 4

[experiment]
backend = statevector
shots = exact
outputs = magnetization, connected_zz
"""


def test_parse_defaults():
    cfg = parse_config(BASE)
    assert cfg.n_sites == 12
    assert cfg.spec.profile.j_star == pytest.approx(12 / 7)
    assert cfg.spec.J == 1.0
    assert cfg.initial_state == "neel"
    assert cfg.flips() == [2, 4, 6, 8, 10, 12]
    assert cfg.shots is None
    assert cfg.protocol == "neel_quench"
    assert cfg.xy_optimize is True


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_round_trip(name):
    cfg = load_preset(name)
    text = dump_config(cfg)
    assert parse_config(text) == cfg
    assert dump_config(parse_config(text)) == text


@settings(max_examples=40, deadline=None)
@given(
    st.integers(4, 20),
    st.floats(-3, 3, allow_nan=False),
    st.floats(0.001, 1.0),
    st.integers(0, 30),
    st.one_of(st.none(), st.integers(1, 10 ** 6)),
    st.integers(0, 2 ** 64 - 1),
)
def test_round_trip_property(n, delta, dt, steps, shots, seed):
    cfg = parse_config(BASE).replace(shots=shots, seed=seed)
    cfg = cfg.replace(spec=cfg.spec.__class__(cfg.spec.profile, delta, 1.0, dt, steps))
    assert parse_config(dump_config(cfg)) == cfg


def test_flips_and_custom_profile():
    text = BASE.replace("kind = horizon\nn_sites = 12\nj_star = 12/7",
                        "kind = custom\nn_sites = 4\nbond_values = 1, -0.5, 1/3")
    text = text.replace("shots = exact", "shots = exact\ninitial_state = flips: 1, 3")
    cfg = parse_config(text)
    assert cfg.flips() == [1, 3]
    assert cfg.spec.profile.bond(3) == pytest.approx(1 / 3)
    assert parse_config(dump_config(cfg)) == cfg


@pytest.mark.parametrize("old,new", [
    ("delta = 0.5", "delta = 0.5\ndelat = 1"),
    ("[spec]", "[spec]\n[extra]\nfoo = 1\n[spec2]"),
    ("backend = statevector", "backend = quantum"),
    ("outputs = magnetization, connected_zz", "outputs = magnetisation"),
    ("shots = exact", "shots = -4"),
    ("shots = exact", "shots = many"),
    ("n_sites = 12", "n_sites = twelve"),
    ("j_star = 12/7", "j_star = 7"),
    ("steps = 4", "steps = -1"),
    ("shots = exact", "shots = exact\ninitial_state = flips: 2, 2"),
    ("shots = exact", "shots = exact\ninitial_state = flips: 13"),
    ("shots = exact", "shots = exact\ninitial_state = domain_wall"),
    ("shots = exact", "shots = exact\nxy_optimize = maybe"),
    ("backend = statevector\n", ""),
    ("[experiment]", "[experiment"),
])
def test_parse_errors(old, new):
    assert old in BASE
    with pytest.raises(ConfigError):
        parse_config(BASE.replace(old, new))


def test_missing_section():
    with pytest.raises(ConfigError):
        parse_config(BASE.split("[experiment]")[0])


def test_capability_checks():
    cfg = parse_config(BASE)
    check_capability(cfg)
    with pytest.raises(CapabilityError, match="requires delta = 0"):
        check_capability(cfg.replace(backend="freefermion"))
    with pytest.raises(CapabilityError):
        check_capability(cfg.with_delta(0.0).replace(backend="freefermion", shots=100))
    check_capability(cfg.with_delta(0.0).replace(backend="freefermion"))
    with pytest.raises(CapabilityError):
        check_capability(cfg, max_qubits=10)
    big = load_preset("fig2b").replace(backend="statevector")
    with pytest.raises(CapabilityError):
        check_capability(big)
    with pytest.raises(CapabilityError):
        check_capability(big.replace(backend="exact_oracle"))


def test_sweep_capability_uses_all_deltas():
    cfg = parse_config(BASE).with_delta(0.0).replace(
        backend="freefermion", protocol="delta_sweep", deltas=(0.0, 0.5))
    with pytest.raises(CapabilityError):
        check_capability(cfg)


def test_stagger_cut_scaling():
    cfg = parse_config(BASE)
    assert cfg.stagger_cut() == 1
    assert load_preset("figS3").stagger_cut() == 9
    assert cfg.replace(n_cut=3).stagger_cut() == 3


def test_unknown_preset():
    with pytest.raises(ConfigError):
        preset_text("fig9")
