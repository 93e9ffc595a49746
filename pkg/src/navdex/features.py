"""Per-channel statistical features (22 per channel, 44 per recording).

Conventions: population (1/N) moments, excess kurtosis, a 64-bin histogram
over ``[min, max]`` shared by mode and entropy, linear-interpolation
quantiles, zero-crossing rate in crossings per second and area under the
curve in amplitude-seconds.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd
from scipy import integrate, signal

from .errors import DegenerateSignal, DuplicateSubject, EmptyInput, NavdexError, TooShort
from .model import FEATURE_ABBRS, Channel, FeatureVector, Recording, feature_frame

MIN_SPECTRAL_LEN = 256


@dataclass(frozen=True)
class FeatureConfig:
    hist_bins: int = 64
    psd_segment: int = 1024
    psd_overlap: float = 0.5
    lyap_embed_dim: int = 5
    lyap_delay: int = 4
    lyap_fit_len: int = 50
    dfa_min_box: int = 4
    dfa_num_boxes: int = 16

    def __post_init__(self):
        for name, val in asdict(self).items():
            if not val > 0:
                raise ValueError(f"{name} must be positive, got {val}")
        if not self.psd_overlap < 1:
            raise ValueError("psd_overlap must be < 1")

    def to_dict(self):
        return asdict(self)


# ---------------------------------------------------------------------------
# amplitude statistics

def mean(x):
    return float(np.mean(x))


def median(x):
    return float(np.median(x))


def _histogram(x, bins):
    lo, hi = float(np.min(x)), float(np.max(x))
    if lo == hi:
        return np.array([x.size]), np.array([lo, hi])
    return np.histogram(x, bins=bins, range=(lo, hi))


def mode(x, bins=64):
    """Centre of the fullest bin of a uniform histogram over [min, max]."""
    counts, edges = _histogram(x, bins)
    k = int(np.argmax(counts))  # first maximum -> lowest bin on ties
    return float(0.5 * (edges[k] + edges[k + 1]))


def variance(x):
    return float(np.var(x))


def std(x):
    return float(np.std(x))


def _standardized(x, what):
    sd = np.std(x)
    if sd == 0 or not np.isfinite(sd):
        raise DegenerateSignal(f"{what} undefined for a zero-variance signal")
    return (x - np.mean(x)) / sd


def skewness(x):
    return float(np.mean(_standardized(x, "skewness") ** 3))


def kurtosis(x):
    """Excess kurtosis (0 for a Gaussian)."""
    return float(np.mean(_standardized(x, "kurtosis") ** 4) - 3.0)


def iqr(x):
    q25, q75 = np.percentile(x, [25, 75])
    return float(q75 - q25)


def rms(x):
    return float(np.sqrt(np.mean(x * x)))


def signal_magnitude_area(x):
    return float(np.mean(np.abs(x)))


def energy(x):
    return float(np.dot(x, x))


def entropy(x, bins=64):
    """Shannon entropy (nats) of the amplitude histogram."""
    counts, _ = _histogram(x, bins)
    p = counts[counts > 0] / x.size
    return float(-np.sum(p * np.log(p)) + 0.0)


def zero_crossing_rate(x, fs_hz):
    """Sign changes per second; zeros take the sign of the previous nonzero sample."""
    s = np.sign(x)
    nz = np.flatnonzero(s)
    if nz.size < 2:
        return 0.0
    # forward-fill zeros; leading zeros carry no sign and are dropped
    filled = s[nz[np.maximum(np.searchsorted(nz, np.arange(x.size), side="right") - 1, 0)]]
    filled = filled[nz[0]:]
    changes = np.count_nonzero(filled[1:] != filled[:-1])
    return float(changes / (x.size / fs_hz))


def area_under_curve(x, fs_hz):
    return float(integrate.trapezoid(x, dx=1.0 / fs_hz))


# ---------------------------------------------------------------------------
# spectral

def welch_psd(x, fs_hz, segment=1024, overlap=0.5):
    """Welch periodogram with a Hann window.

    A segment longer than the signal shrinks to the largest power of two
    that fits.
    """
    n = x.size
    if segment > n:
        segment = 1 << (n.bit_length() - 1)
    return signal.welch(x, fs=fs_hz, window="hann", nperseg=segment,
                        noverlap=int(overlap * segment), detrend="constant")


def spectral_centroid_bandwidth(x, fs_hz, segment=1024, overlap=0.5):
    f, p = welch_psd(x, fs_hz, segment, overlap)
    total = p.sum()
    if not total > 0:
        raise DegenerateSignal("spectral centroid undefined for a signal with no power")
    w = p / total
    sc = float(np.dot(f, w))
    sb = float(np.sqrt(np.dot((f - sc) ** 2, w)))
    return sc, sb


# ---------------------------------------------------------------------------
# nonlinear

def teager_kaiser(x):
    """Mean of x[n]^2 - x[n-1] x[n+1] over the interior samples."""
    x = np.asarray(x, dtype=float)
    if x.size < 3:
        raise TooShort("Teager-Kaiser operator needs at least 3 samples")
    return float(np.mean(x[1:-1] ** 2 - x[:-2] * x[2:]))


def dfa_box_sizes(n, min_box=4, num_boxes=16):
    max_box = n // 4
    if max_box <= min_box:
        raise TooShort(f"DFA needs N/4 > min_box ({min_box}); N={n}")
    sizes = np.unique(np.round(np.geomspace(min_box, max_box, num_boxes)).astype(int))
    return sizes


def dfa_fluctuations(x, box_sizes):
    """RMS fluctuation F(s) of the linearly detrended profile for each box size."""
    x = np.asarray(x, dtype=float)
    profile = np.cumsum(x - x.mean())
    flucts = np.empty(len(box_sizes))
    for k, s in enumerate(box_sizes):
        n_win = profile.size // s
        seg = profile[: n_win * s].reshape(n_win, s)
        t = np.arange(s) - (s - 1) / 2.0
        seg_c = seg - seg.mean(axis=1, keepdims=True)
        slope = seg_c @ t / np.dot(t, t)
        resid = seg_c - slope[:, None] * t
        flucts[k] = np.sqrt(np.mean(resid ** 2))
    return flucts


def dfa(x, min_box=4, num_boxes=16):
    """DFA-1 scaling exponent: slope of log F(s) against log s."""
    x = np.asarray(x, dtype=float)
    sizes = dfa_box_sizes(x.size, min_box, num_boxes)
    flucts = dfa_fluctuations(x, sizes)
    if np.any(flucts <= 0):
        raise DegenerateSignal("DFA undefined: zero fluctuation at some scale")
    slope, _ = np.polyfit(np.log(sizes), np.log(flucts), 1)
    return float(slope)


def delay_embed(x, dim, delay):
    m = x.size - (dim - 1) * delay
    if m < 1:
        raise TooShort(f"series of length {x.size} too short to embed with dim={dim}, delay={delay}")
    idx = np.arange(m)[:, None] + delay * np.arange(dim)[None, :]
    return x[idx]


def mean_period(x):
    """Reciprocal of the power-weighted mean frequency, in samples."""
    p = np.abs(np.fft.rfft(x - x.mean())) ** 2
    f = np.fft.rfftfreq(x.size)
    if not p.sum() > 0:
        return 1
    mf = np.dot(f, p) / p.sum()
    return int(np.ceil(1.0 / mf)) if mf > 0 else 1


def _nearest_neighbors(orbit, min_tsep, chunk=512):
    """Index of each point's nearest neighbour at least ``min_tsep + 1`` samples away."""
    m = orbit.shape[0]
    if m <= min_tsep + 1:
        return np.full(m, -1)
    sq = np.einsum("ij,ij->i", orbit, orbit)
    nn = np.empty(m, dtype=int)
    band = np.arange(-min_tsep, min_tsep + 1)
    for start in range(0, m, chunk):
        stop = min(start + chunk, m)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * orbit[start:stop] @ orbit.T
        rows = np.arange(stop - start)[:, None]
        cols = np.clip(np.arange(start, stop)[:, None] + band, 0, m - 1)
        d2[rows, cols] = np.inf
        nn[start:stop] = np.argmin(d2, axis=1)
    return nn


def divergence_curve(x, dim=5, delay=4, fit_len=50, min_tsep=None):
    """Mean log distance between initially nearest neighbours, per step ahead."""
    x = np.asarray(x, dtype=float)
    orbit = delay_embed(x, dim, delay)
    m = orbit.shape[0] - fit_len + 1
    if m < 2:
        raise TooShort("series too short for the requested embedding and fit length")
    if min_tsep is None:
        min_tsep = mean_period(x)
    min_tsep = min(min_tsep, m // 2)
    nn = _nearest_neighbors(orbit[:m], min_tsep)
    ok = nn >= 0
    j, k = np.arange(m)[ok], nn[ok]
    curve = np.empty(fit_len)
    for i in range(fit_len):
        d = np.linalg.norm(orbit[j + i] - orbit[k + i], axis=1)
        d = d[d > 0]
        curve[i] = np.mean(np.log(d)) if d.size else -np.inf
    return curve


def lyapunov_rosenstein(x, dim=5, delay=4, fit_len=50, min_tsep=None):
    """Largest Lyapunov exponent (per sample step) by Rosenstein's method."""
    curve = divergence_curve(x, dim, delay, fit_len, min_tsep)
    if not np.all(np.isfinite(curve)):
        raise DegenerateSignal("Lyapunov exponent undefined: neighbours coincide")
    slope, _ = np.polyfit(np.arange(fit_len), curve, 1)
    return float(slope)


# ---------------------------------------------------------------------------

def channel_features(x, fs_hz, cfg: FeatureConfig = FeatureConfig()):
    """All 22 features of one channel.

    Returns ``(values, degenerate)``: a dict keyed by abbreviation, NaN for
    features that are undefined on this signal, and the list of those
    abbreviations.
    """
    x = np.asarray(x, dtype=float)
    if x.size < MIN_SPECTRAL_LEN:
        raise TooShort(f"feature extraction needs at least {MIN_SPECTRAL_LEN} samples, got {x.size}")
    out = {}
    degenerate = []

    def put(abbrs, fn):
        try:
            vals = fn()
        except DegenerateSignal:
            vals = (np.nan,) * len(abbrs)
            degenerate.extend(abbrs)
        if len(abbrs) == 1:
            vals = (vals,) if np.isscalar(vals) else vals
        out.update(zip(abbrs, vals))

    lo, hi = float(np.min(x)), float(np.max(x))
    put(("ME",), lambda: mean(x))
    put(("MD",), lambda: median(x))
    put(("MO",), lambda: mode(x, cfg.hist_bins))
    put(("VA",), lambda: variance(x))
    put(("SD",), lambda: std(x))
    put(("SK",), lambda: skewness(x))
    put(("KU",), lambda: kurtosis(x))
    put(("MI",), lambda: lo)
    put(("MA",), lambda: hi)
    put(("RA",), lambda: hi - lo)
    put(("IQR",), lambda: iqr(x))
    put(("RMS",), lambda: rms(x))
    put(("SMA",), lambda: signal_magnitude_area(x))
    put(("ER",), lambda: energy(x))
    put(("EN",), lambda: entropy(x, cfg.hist_bins))
    put(("ZCR",), lambda: zero_crossing_rate(x, fs_hz))
    put(("AUC",), lambda: area_under_curve(x, fs_hz))
    put(("SC", "SB"), lambda: spectral_centroid_bandwidth(x, fs_hz, cfg.psd_segment, cfg.psd_overlap))
    put(("LE",), lambda: lyapunov_rosenstein(x, cfg.lyap_embed_dim, cfg.lyap_delay, cfg.lyap_fit_len))
    put(("DFA",), lambda: dfa(x, cfg.dfa_min_box, cfg.dfa_num_boxes))
    put(("TK",), lambda: teager_kaiser(x))
    assert tuple(out) == FEATURE_ABBRS
    return out, degenerate


def extract_all(rec: Recording, cfg: FeatureConfig = FeatureConfig(), on_degenerate="raise") -> FeatureVector:
    """Compute the 44-entry feature vector of a (preprocessed) recording.

    Parameters
    ----------
    on_degenerate : {"raise", "nan"}
        What to do when a feature is undefined for a channel (e.g. skewness of a
        constant signal). ``"nan"`` stores NaN for those entries.
    """
    if on_degenerate not in ("raise", "nan"):
        raise ValueError("on_degenerate must be 'raise' or 'nan'")
    values = {}
    bad = []
    for ch in Channel:
        feats, degenerate = channel_features(rec.channel(ch), rec.fs_hz, cfg)
        values.update({f"{abbr}_{ch.suffix}": val for abbr, val in feats.items()})
        bad.extend(f"{abbr}_{ch.suffix}" for abbr in degenerate)
    if bad and on_degenerate == "raise":
        raise DegenerateSignal(f"{rec.subject_id}: degenerate signal, undefined features {bad}", keys=bad)
    return FeatureVector(values, subject_id=rec.subject_id)


def _thread_count():
    try:
        return max(1, int(os.environ.get("NAVDEX_THREADS", "1")))
    except ValueError:
        return 1


def feature_table(recordings, cfg: FeatureConfig = FeatureConfig(), on_degenerate="raise") -> pd.DataFrame:
    """Feature frame with one row per recording, in input order."""
    recordings = list(recordings)
    if not recordings:
        raise EmptyInput("no recordings given")
    ids = [r.subject_id for r in recordings]
    dup = sorted({s for s in ids if ids.count(s) > 1})
    if dup:
        raise DuplicateSubject(f"duplicate subject ids {dup}")

    def one(rec):
        try:
            return extract_all(rec, cfg, on_degenerate)
        except DegenerateSignal:
            raise
        except NavdexError as exc:
            raise type(exc)(f"{rec.subject_id}: {exc}") from exc

    workers = min(_thread_count(), len(recordings))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            vectors = list(pool.map(one, recordings))
    else:
        vectors = [one(r) for r in recordings]
    return feature_frame(vectors)
