"""Named figure-analog configurations at desk scale.

Interacting runs use N = 16 (statevector) instead of the N = 80 hardware
chain; delta = 0 runs keep the full size via the free-fermion backend.
Correlator cut sites are rescaled from (37, 59, 63) at N = 80 as
``round(i * N / 80)``.
"""

from __future__ import annotations

from .config import ExperimentConfig, parse_config
from .errors import ConfigError

_OUTPUTS = "magnetization, connected_zz, distance_correlator, staggered_magnetization, geodesics"

PRESETS: dict[str, tuple[str, str]] = {
    "fig2a": ("uniform chain light cone, delta = 1/2, 2^14 shots per step (N = 16)", f"""
[profile]
kind = uniform
n_sites = 16

[spec]
delta = 0.5
dt = 0.1
steps = 20

[experiment]
protocol = neel_quench
initial_state = neel
backend = statevector
shots = 16384
seed = 2024
outputs = {_OUTPUTS}
origins = 8
out_dir = out/fig2a
"""),
    "fig2b": ("curved light cone with geodesic overlay, delta = 0, N = 80", f"""
[profile]
kind = horizon
n_sites = 80
j_star = 80/7

[spec]
delta = 0
dt = 0.1
steps = 20

[experiment]
protocol = neel_quench
initial_state = neel
backend = freefermion
shots = exact
outputs = {_OUTPUTS}
origins = 20, 30, 40, 50, 60
out_dir = out/fig2b
"""),
    "fig3": ("delta sweep 0, 1/2, 1, 2 on the horizon profile (N = 16, cuts 7, 12, 13)", f"""
[profile]
kind = horizon
n_sites = 16
j_star = 16/7

[spec]
delta = 0
dt = 0.1
steps = 20

[experiment]
protocol = delta_sweep
initial_state = neel
backend = statevector
shots = exact
outputs = {_OUTPUTS}
origins = 8
deltas = 0, 0.5, 1, 2
cut_sites = 7, 12, 13
out_dir = out/fig3
"""),
    "fig4": ("magnetization freezing near the horizons, delta = 1/2 (N = 16)", """
[profile]
kind = horizon
n_sites = 16
j_star = 16/7

[spec]
delta = 0.5
dt = 0.1
steps = 20

[experiment]
protocol = neel_quench
initial_state = neel
backend = statevector
shots = exact
outputs = magnetization, connected_zz, staggered_magnetization
out_dir = out/fig4
"""),
    "fig5": ("ballistic protocol on a uniform chain, flips 5 and 11, delta = 1/2 (N = 16)", """
[profile]
kind = uniform
n_sites = 16

[spec]
delta = 0.5
dt = 0.1
steps = 20

[experiment]
protocol = ballistic
initial_state = flips: 5, 11
backend = statevector
shots = exact
outputs = magnetization
out_dir = out/fig5
"""),
    "figS1": ("staggered magnetization on a uniform chain, gapless and gapped (N = 16)", """
[profile]
kind = uniform
n_sites = 16

[spec]
delta = 0.5
dt = 0.1
steps = 20

[experiment]
protocol = delta_sweep
initial_state = neel
backend = statevector
shots = exact
outputs = magnetization, staggered_magnetization
deltas = 0, 0.5, 1, 2
out_dir = out/figS1
"""),
    "figS2": ("local frequency against the deformation profile, delta = 0, N = 300", """
[profile]
kind = horizon
n_sites = 300
j_star = 300/7

[spec]
delta = 0
dt = 0.02
steps = 250

[experiment]
protocol = frequency_scan
initial_state = neel
backend = freefermion
shots = exact
outputs = magnetization
out_dir = out/figS2
"""),
    "figS3": ("XX chain magnetization on the horizon profile, N = 80", """
[profile]
kind = horizon
n_sites = 80
j_star = 80/7

[spec]
delta = 0
dt = 0.1
steps = 20

[experiment]
protocol = neel_quench
initial_state = neel
backend = freefermion
shots = exact
outputs = magnetization, staggered_magnetization
out_dir = out/figS3
"""),
    "figS4": ("ballistic protocol on the horizon profile, flips 20 and 30, delta = 0, N = 40", """
[profile]
kind = horizon
n_sites = 40
j_star = 40/7

[spec]
delta = 0
dt = 0.1
steps = 20

[experiment]
protocol = ballistic
initial_state = flips: 20, 30
backend = freefermion
shots = exact
outputs = magnetization, geodesics
out_dir = out/figS4
"""),
}


def preset_names() -> list[str]:
    return list(PRESETS)


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return PRESETS[name][1].lstrip()


def load_preset(name: str) -> ExperimentConfig:
    return parse_config(preset_text(name))
