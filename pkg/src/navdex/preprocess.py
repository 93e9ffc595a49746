"""Signal conditioning applied to each channel before feature extraction.

The chain is: linear detrend -> zero-phase Butterworth low-pass and high-pass
-> median smoothing -> Savitzky-Golay smoothing -> polynomial baseline removal
with the degree picked by BIC.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
from numpy.polynomial import legendre
from scipy import signal

from .errors import EvenKernel, InvalidCutoff, OrderTooHigh, TooShort
from .model import Channel, Recording

FILTER_ORDER = 4


@dataclass(frozen=True)
class PreprocessConfig:
    lp_cutoff_hz: float = 20.0
    hp_cutoff_hz: float = 0.05
    median_kernel: int = 5
    sg_window: int = 7
    sg_order: int = 2
    baseline_degree_max: int = 10

    def __post_init__(self):
        if self.sg_order < 0 or self.sg_order >= self.sg_window:
            raise OrderTooHigh(f"sg_order {self.sg_order} must be in [0, sg_window={self.sg_window})")
        for name in ("median_kernel", "sg_window"):
            val = getattr(self, name)
            if val < 1 or val % 2 == 0:
                raise EvenKernel(f"{name} must be a positive odd integer, got {val}")
        if self.baseline_degree_max < 1:
            raise ValueError("baseline_degree_max must be >= 1")
        if not 0 < self.hp_cutoff_hz < self.lp_cutoff_hz:
            raise InvalidCutoff(f"need 0 < hp ({self.hp_cutoff_hz}) < lp ({self.lp_cutoff_hz})")

    @classmethod
    def from_json(cls, path) -> "PreprocessConfig":
        data = json.loads(Path(path).read_text())
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown preprocess config keys {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    def updated(self, **overrides) -> "PreprocessConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def _as_signal(x, min_len, what) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"{what}: expected a 1-D sequence")
    if x.size < min_len:
        raise TooShort(f"{what}: need at least {min_len} samples, got {x.size}")
    return x


def detrend_linear(x) -> np.ndarray:
    """Subtract the least-squares line from ``x``."""
    x = _as_signal(x, 2, "detrend_linear")
    n = x.size
    # centred abscissa keeps the 2x2 normal equations well conditioned
    t = np.arange(n) - (n - 1) / 2.0
    slope = np.dot(t, x) / np.dot(t, t)
    return x - x.mean() - slope * t


def _check_cutoffs(fs_hz, cfg):
    nyq = fs_hz / 2.0
    if not 0 < cfg.hp_cutoff_hz < cfg.lp_cutoff_hz < nyq:
        raise InvalidCutoff(f"need 0 < hp ({cfg.hp_cutoff_hz}) < lp ({cfg.lp_cutoff_hz}) "
                            f"< fs/2 ({nyq}) Hz")


def bandpass(x, fs_hz: float, cfg: PreprocessConfig = PreprocessConfig()) -> np.ndarray:
    """Zero-phase 4th-order Butterworth low-pass followed by high-pass.

    Both filters run forward then backward. The low-pass uses odd
    (point-reflection) padding of ``3 * order`` samples with steady-state
    initial conditions. The high-pass starts from rest on the mean-removed
    signal: steady-state initial conditions would assume the edge sample had
    been held forever, which for a 0.05 Hz corner injects a step transient
    lasting several seconds.
    """
    _check_cutoffs(fs_hz, cfg)
    x = _as_signal(x, 6 * FILTER_ORDER + 1, "bandpass")
    padlen = 3 * FILTER_ORDER
    lp = signal.butter(FILTER_ORDER, cfg.lp_cutoff_hz, btype="lowpass", fs=fs_hz, output="sos")
    hp = signal.butter(FILTER_ORDER, cfg.hp_cutoff_hz, btype="highpass", fs=fs_hz, output="sos")
    y = signal.sosfiltfilt(lp, x, padtype="odd", padlen=padlen)
    y = y - y.mean()
    y = signal.sosfilt(hp, y)
    return signal.sosfilt(hp, y[::-1])[::-1]


def median_smooth(x, kernel: int = 5) -> np.ndarray:
    """Sliding median with edge-replicate padding."""
    if kernel < 1 or kernel % 2 == 0:
        raise EvenKernel(f"median kernel must be a positive odd integer, got {kernel}")
    x = _as_signal(x, kernel, "median_smooth")
    half = kernel // 2
    padded = np.pad(x, half, mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(padded, kernel)
    return np.median(windows, axis=1)


def savitzky_golay(x, window: int = 7, order: int = 2) -> np.ndarray:
    """Savitzky-Golay smoothing with edge-replicate padding."""
    if order < 0 or order >= window:
        raise OrderTooHigh(f"order {order} must be < window {window}")
    if window % 2 == 0:
        raise EvenKernel(f"window must be odd, got {window}")
    x = _as_signal(x, window, "savitzky_golay")
    return signal.savgol_filter(x, window, order, mode="nearest")


def _bic(rss, n, degree):
    return n * np.log(rss / n) + (degree + 1) * np.log(n)


def bic_baseline_remove(x, degree_max: int = 10) -> tuple[np.ndarray, int]:
    """Fit polynomials of degree 1..``degree_max`` and subtract the BIC-best one.

    The abscissa is mapped onto [-1, 1] and a Legendre basis is used for
    conditioning. Residual sums of squares below round-off level are treated
    as equal so that an exact fit does not keep "improving" with degree; ties
    go to the lower degree.

    Returns
    -------
    residual : ndarray
    degree : int
    """
    if degree_max < 1:
        raise ValueError("degree_max must be >= 1")
    x = _as_signal(x, degree_max + 3, "bic_baseline_remove")
    n = x.size
    scale = np.max(np.abs(x))
    if scale == 0.0:
        return x.copy(), 1
    t = np.linspace(-1.0, 1.0, n)
    basis = legendre.legvander(t, degree_max)
    rss_floor = n * (1e-10 * scale) ** 2

    best = None
    for degree in range(1, degree_max + 1):
        coef, *_ = np.linalg.lstsq(basis[:, : degree + 1], x, rcond=None)
        fit = basis[:, : degree + 1] @ coef
        rss = max(float(np.sum((x - fit) ** 2)), rss_floor)
        bic = _bic(rss, n, degree)
        if best is None or bic < best[0]:
            best = (bic, degree, fit)
    _, degree, fit = best
    return x - fit, degree


def preprocess_channel(x, fs_hz: float, cfg: PreprocessConfig = PreprocessConfig()):
    """Run the full chain on one channel; returns ``(signal, baseline_degree)``."""
    y = detrend_linear(x)
    y = bandpass(y, fs_hz, cfg)
    y = median_smooth(y, cfg.median_kernel)
    y = savitzky_golay(y, cfg.sg_window, cfg.sg_order)
    return bic_baseline_remove(y, cfg.baseline_degree_max)


def preprocess(rec: Recording, cfg: PreprocessConfig = PreprocessConfig()) -> Recording:
    out = {}
    for ch in Channel:
        out[ch.suffix], _ = preprocess_channel(rec.channel(ch), rec.fs_hz, cfg)
    return rec.replace(h=out["h"], v=out["v"])
