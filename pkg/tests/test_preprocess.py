import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from navdex.errors import EvenKernel, InvalidCutoff, OrderTooHigh, TooShort
from navdex.model import Recording
from navdex.preprocess import (
    PreprocessConfig,
    bandpass,
    bic_baseline_remove,
    detrend_linear,
    median_smooth,
    preprocess,
    savitzky_golay,
)

FS = 250.0


def _rms(x):
    return np.sqrt(np.mean(x ** 2))


# --- detrend ---------------------------------------------------------------

def test_detrend_exact_line_and_constant():
    np.testing.assert_allclose(detrend_linear([0, 1, 2, 3]), 0, atol=1e-12)
    np.testing.assert_allclose(detrend_linear([5, 5, 5]), 0, atol=1e-12)


def test_detrend_spike_matches_closed_form():
    n = 9
    t = np.arange(n, dtype=float)
    spike = np.zeros(n)
    spike[2] = 1.0
    x = 0.7 * t - 3.0 + spike
    # closed-form simple regression of the spike on t
    slope = (n * np.sum(t * spike) - t.sum() * spike.sum()) / (n * np.sum(t * t) - t.sum() ** 2)
    icpt = (spike.sum() - slope * t.sum()) / n
    np.testing.assert_allclose(detrend_linear(x), spike - (slope * t + icpt), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.integers(2, 200), elements=st.floats(-1e3, 1e3)))
def test_detrend_residual_has_no_line_and_is_idempotent(x):
    r = detrend_linear(x)
    t = np.arange(x.size)
    scale = max(1.0, np.max(np.abs(x)))
    slope, icpt = np.polyfit(t, r, 1) if x.size > 2 else (0.0, r.mean())
    assert abs(slope) <= 1e-9 * scale and abs(icpt) <= 1e-9 * scale * x.size
    np.testing.assert_allclose(detrend_linear(r), r, atol=1e-9 * scale)


def test_detrend_too_short():
    with pytest.raises(TooShort):
        detrend_linear([1.0])


# --- band-pass -------------------------------------------------------------

def test_bandpass_passband_gain_and_zero_phase():
    t = np.arange(5000) / FS
    x = np.sin(2 * np.pi * 5 * t)
    y = bandpass(x, FS)
    assert abs(_rms(y) / _rms(x) - 1) <= 0.05
    lags = np.arange(-20, 21)
    xc = [np.dot(x[50:-50], np.roll(y, k)[50:-50]) for k in lags]
    assert lags[int(np.argmax(xc))] == 0


def test_bandpass_stopband_attenuation():
    t = np.arange(5000) / FS
    x = np.sin(2 * np.pi * 30 * t)
    assert _rms(bandpass(x, FS)) <= 0.1 * _rms(x)


def test_bandpass_removes_dc():
    y = bandpass(np.full(5000, 7.0), FS)
    assert np.max(np.abs(y[500:-500])) < 1e-6


def test_bandpass_errors():
    with pytest.raises(TooShort):
        bandpass(np.zeros(20), FS)
    with pytest.raises(InvalidCutoff):
        bandpass(np.zeros(1000), 30.0)  # 20 Hz low-pass above Nyquist
    with pytest.raises(InvalidCutoff):
        PreprocessConfig(hp_cutoff_hz=30.0)


# --- median ----------------------------------------------------------------

def test_median_impulse_removed():
    np.testing.assert_array_equal(median_smooth([1, 9, 1, 1, 1], 3), [1, 1, 1, 1, 1])


@pytest.mark.parametrize("kernel", [1, 3, 5, 7, 9])
def test_median_monotone_unchanged(kernel):
    x = np.cumsum(np.random.default_rng(kernel).uniform(0, 1, 50))
    np.testing.assert_array_equal(median_smooth(x, kernel), x)


def _naive_median(x, k):
    half = k // 2
    out = []
    for i in range(len(x)):
        win = [x[min(max(j, 0), len(x) - 1)] for j in range(i - half, i + half + 1)]
        out.append(sorted(win)[half])
    return np.array(out)


def test_median_matches_naive(rng):
    x = rng.normal(size=300)
    np.testing.assert_array_equal(median_smooth(x, 5), _naive_median(x, 5))


def test_median_errors():
    with pytest.raises(EvenKernel):
        median_smooth(np.zeros(10), 4)
    with pytest.raises(TooShort):
        median_smooth(np.zeros(3), 5)


# --- Savitzky-Golay --------------------------------------------------------

def test_sg_reproduces_quadratic():
    n = np.arange(200, dtype=float)
    x = n ** 2
    y = savitzky_golay(x, 7, 2)
    np.testing.assert_allclose(y[3:-3], x[3:-3], rtol=0, atol=1e-9 * np.max(x))
    assert np.max(np.abs(y[3:-3] - x[3:-3])) <= 1e-9 * np.max(x)


def test_sg_reduces_white_noise_variance(rng):
    x = rng.normal(size=5000)
    assert np.var(savitzky_golay(x, 7, 2)) < np.var(x)


def test_sg_impulse_matches_local_fit():
    window, order = 7, 2
    x = np.zeros(41)
    x[20] = 1.0
    y = savitzky_golay(x, window, order)
    half = window // 2
    # brute force: evaluate a local least-squares polynomial at each window centre
    oracle = np.empty_like(x)
    for i in range(half, x.size - half):
        k = np.arange(-half, half + 1)
        oracle[i] = np.polyval(np.polyfit(k, x[i - half:i + half + 1], order), 0.0)
    np.testing.assert_allclose(y[half:-half], oracle[half:-half], atol=1e-12)
    # central kernel row read off the impulse response
    k = np.arange(-half, half + 1)
    V = np.vander(k, order + 1)
    central_row = np.linalg.pinv(V)[-1]
    np.testing.assert_allclose(y[20 - half:20 + half + 1], central_row[::-1], atol=1e-12)


def test_sg_errors():
    with pytest.raises(OrderTooHigh):
        savitzky_golay(np.zeros(20), 5, 5)
    with pytest.raises(TooShort):
        savitzky_golay(np.zeros(5), 7, 2)


# --- BIC baseline ----------------------------------------------------------

def _bic_oracle(x, dmax):
    n = x.size
    t = np.linspace(-1, 1, n)
    scale = np.max(np.abs(x))
    best = None
    for d in range(1, dmax + 1):
        fit = np.polyval(np.polyfit(t, x, d), t)
        rss = max(np.sum((x - fit) ** 2), n * (1e-10 * scale) ** 2)
        bic = n * np.log(rss / n) + (d + 1) * np.log(n)
        if best is None or bic < best[0]:
            best = (bic, d)
    return best[1]


def test_bic_pure_cubic():
    t = np.linspace(-1, 1, 1000)
    x = 40 * t ** 3 - 5 * t ** 2 + 3 * t + 2
    resid, degree = bic_baseline_remove(x, 10)
    assert degree == 3
    assert np.max(np.abs(resid)) <= 1e-6 * np.max(np.abs(x))


def test_bic_zeros():
    resid, degree = bic_baseline_remove(np.zeros(100), 10)
    assert degree == 1
    assert np.all(resid == 0)


def test_bic_line_plus_noise_picks_one():
    hits = 0
    t = np.linspace(0, 1, 1000)
    for seed in range(100):
        r = np.random.default_rng(seed)
        line = 10 * t
        x = line + r.normal(0, np.std(line) / 10, t.size)
        hits += bic_baseline_remove(x, 10)[1] == 1
    assert hits >= 90


def test_bic_matches_independent_oracle(rng):
    t = np.linspace(0, 1, 800)
    for _ in range(5):
        x = np.polyval(rng.normal(size=5), t) + rng.normal(0, 0.05, t.size)
        assert bic_baseline_remove(x, 6)[1] == _bic_oracle(x, 6)


def test_bic_too_short():
    with pytest.raises(TooShort):
        bic_baseline_remove(np.zeros(12), 10)


# --- full chain ------------------------------------------------------------

def test_default_config_values():
    cfg = PreprocessConfig()
    assert (cfg.lp_cutoff_hz, cfg.hp_cutoff_hz, cfg.sg_window, cfg.sg_order) == (20, 0.05, 7, 2)
    assert cfg.median_kernel == 5 and cfg.baseline_degree_max == 10


def test_preprocess_constant_recording():
    rec = Recording("c", FS, np.full(2000, 3.0), np.full(2000, -1.0))
    out = preprocess(rec)
    assert len(out) == 2000
    np.testing.assert_allclose(out.h, 0, atol=1e-9)
    np.testing.assert_allclose(out.v, 0, atol=1e-9)


def test_preprocess_keeps_sine_removes_drift():
    n = 15000
    t = np.arange(n) / FS
    u = 2 * t / t[-1] - 1
    sine = np.sin(2 * np.pi * 5 * t)
    drift = 20 * u ** 3 - 8 * u ** 2 + 5 * u
    rec = Recording("d", FS, sine + drift, sine + drift)
    out = preprocess(rec)
    core = slice(500, -500)
    assert abs(_rms(out.h[core]) / _rms(sine[core]) - 1) <= 0.10

    def slow(x):
        # content below 1 Hz, measured by a brick-wall FFT mask
        X = np.fft.rfft(x)
        X[np.fft.rfftfreq(x.size, 1 / FS) > 1.0] = 0
        return np.fft.irfft(X, x.size)

    before = np.mean(np.abs(slow(drift)))
    after = np.mean(np.abs(slow(out.h)))
    assert after * 10 <= before


def test_preprocess_deterministic(rng):
    rec = Recording("r", FS, rng.normal(size=3000), rng.normal(size=3000))
    a, b = preprocess(rec), preprocess(rec)
    assert np.array_equal(a.h, b.h) and np.array_equal(a.v, b.v)
