import numpy as np
import pytest

from navdex.synth import DriftConfig, SynthConfig

# 30 s keeps the O(N^2) Lyapunov step affordable in cohort tests
COHORT_BASE = SynthConfig(
    duration_s=30.0, seed=100, blink_rate_hz=0.3, blink_amp_uv=200.0,
    saccade_rate_hz=0.5, saccade_amp_uv=100.0, noise_sd_uv=5.0,
    drift=DriftConfig(poly_degree=3, poly_amp_uv=50.0, sin_freq_hz=0.02, sin_amp_uv=20.0),
)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def cohort_base():
    return COHORT_BASE
