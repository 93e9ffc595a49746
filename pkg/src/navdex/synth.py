"""Synthetic two-channel EOG recordings with ground-truth event logs.

Blinks are Gaussian bumps on the vertical channel (sigma = width / 6).
Saccades are logistic steps to a new gaze position on both channels, the
horizontal component spanning ``[-A, A]`` and the vertical ``[-A/2, A/2]``.
Each event occupies an interval of its width (blink) or rise time (saccade)
centred on its time stamp; events are placed by uniform rejection sampling
so that intervals widened 1.5x never overlap. Fixations are the gaps between
events.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import OverconstrainedPlacement
from .model import EventCounts, Recording

MAX_PLACEMENT_TRIES = 2000
EXCLUSION_FACTOR = 1.5


@dataclass(frozen=True)
class DriftConfig:
    poly_degree: int = 0
    poly_amp_uv: float = 0.0
    sin_freq_hz: float = 0.02
    sin_amp_uv: float = 0.0


@dataclass(frozen=True)
class SynthConfig:
    duration_s: float = 60.0
    fs_hz: float = 250.0
    seed: int = 0
    blink_rate_hz: float = 0.0
    blink_amp_uv: float = 0.0
    blink_width_ms: float = 250.0
    saccade_rate_hz: float = 0.0
    saccade_amp_uv: float = 0.0
    saccade_rise_ms: float = 40.0
    noise_sd_uv: float = 0.0
    drift: DriftConfig = field(default_factory=DriftConfig)
    subject_id: str = "s01"

    def __post_init__(self):
        if isinstance(self.drift, dict):
            object.__setattr__(self, "drift", DriftConfig(**self.drift))
        for f in fields(self):
            val = getattr(self, f.name)
            if f.name in ("seed", "drift", "subject_id"):
                continue
            if not (val >= 0 and math.isfinite(val)):
                raise ValueError(f"{f.name} must be a nonnegative number, got {val}")
        d = self.drift
        if d.poly_degree < 0 or d.poly_amp_uv < 0 or d.sin_amp_uv < 0 or d.sin_freq_hz < 0:
            raise ValueError("drift parameters must be nonnegative")
        if not self.fs_hz > 0:
            raise ValueError("fs_hz must be positive")
        if self.n_samples < 256:
            raise ValueError(f"duration_s * fs_hz must be >= 256, got {self.n_samples}")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.fs_hz))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> "SynthConfig":
        return cls(**d)

    def with_param(self, name: str, value) -> "SynthConfig":
        """Copy with one parameter replaced; ``drift.<field>`` addresses drift settings."""
        if name.startswith("drift."):
            return replace(self, drift=replace(self.drift, **{name[6:]: value}))
        if name not in self.__dataclass_fields__ or name == "drift":
            raise ValueError(f"unknown synth parameter {name!r}")
        return replace(self, **{name: value})


@dataclass(frozen=True)
class GroundTruth:
    duration_s: float
    blink_times_s: tuple[float, ...]
    saccade_times_s: tuple[float, ...]
    event_intervals: tuple[tuple[float, float], ...]
    event_kinds: tuple[str, ...]
    fixation_segments: tuple[tuple[float, float], ...]

    @property
    def counts(self) -> EventCounts:
        sacc = sum(e - s for (s, e), kind in zip(self.event_intervals, self.event_kinds)
                   if kind == "saccade")
        return EventCounts(
            blink_count=len(self.blink_times_s),
            fixation_count=len(self.fixation_segments),
            fixation_duration_s=float(sum(e - s for s, e in self.fixation_segments)),
            saccade_count=len(self.saccade_times_s),
            saccade_duration_s=float(sacc),
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["counts"] = asdict(self.counts)
        return d

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def _place_events(rng, widths, duration):
    """Centres for events of the given widths, in placement order."""
    centres = []
    taken = []  # (lo, hi) widened intervals
    for w in widths:
        half = 0.5 * w
        zone = 0.5 * EXCLUSION_FACTOR * w
        if duration <= w:
            raise OverconstrainedPlacement(f"event of width {w}s does not fit in {duration}s")
        for _ in range(MAX_PLACEMENT_TRIES):
            c = rng.uniform(half, duration - half)
            if all(c + zone <= lo or c - zone >= hi for lo, hi in taken):
                break
        else:
            raise OverconstrainedPlacement(
                f"could not place {len(widths)} events without overlap in {duration}s")
        centres.append(c)
        taken.append((c - zone, c + zone))
    return centres


def _drift(rng, t, duration, cfg: DriftConfig):
    out = np.zeros_like(t)
    if cfg.poly_amp_uv > 0 and cfg.poly_degree > 0:
        u = 2.0 * t / duration - 1.0
        coef = rng.standard_normal(cfg.poly_degree + 1)
        coef[0] = 0.0
        poly = np.polynomial.polynomial.polyval(u, coef)
        peak = np.max(np.abs(poly))
        if peak > 0:
            out += cfg.poly_amp_uv * poly / peak
    if cfg.sin_amp_uv > 0:
        phase = rng.uniform(0, 2 * np.pi)
        out += cfg.sin_amp_uv * np.sin(2 * np.pi * cfg.sin_freq_hz * t + phase)
    return out


def generate(cfg: SynthConfig) -> tuple[Recording, GroundTruth]:
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_samples
    duration = n / cfg.fs_hz
    t = np.arange(n) / cfg.fs_hz

    n_blinks = int(rng.poisson(cfg.blink_rate_hz * duration))
    n_sacc = int(rng.poisson(cfg.saccade_rate_hz * duration))
    blink_w = cfg.blink_width_ms / 1000.0
    sacc_w = cfg.saccade_rise_ms / 1000.0
    kinds = np.array(["b"] * n_blinks + ["s"] * n_sacc)
    rng.shuffle(kinds)
    widths = [blink_w if k == "b" else sacc_w for k in kinds]
    centres = _place_events(rng, widths, duration)

    h = np.zeros(n)
    v = np.zeros(n)
    blink_times = sorted(c for c, k in zip(centres, kinds) if k == "b")
    sacc_times = sorted(c for c, k in zip(centres, kinds) if k == "s")

    sigma = blink_w / 6.0
    for c in blink_times:
        lo, hi = np.searchsorted(t, [c - 4 * sigma, c + 4 * sigma])
        v[lo:hi] += cfg.blink_amp_uv * np.exp(-0.5 * ((t[lo:hi] - c) / sigma) ** 2)

    # 10-90% rise time of a logistic is 2 ln(9) tau
    tau = sacc_w / (2.0 * np.log(9.0))
    gaze_h = gaze_v = 0.0
    amp = cfg.saccade_amp_uv
    for c in sacc_times:
        new_h = rng.uniform(-amp, amp)
        new_v = rng.uniform(-0.5 * amp, 0.5 * amp)
        with np.errstate(over="ignore"):
            step = 1.0 / (1.0 + np.exp(-(t - c) / tau))
        h += (new_h - gaze_h) * step
        v += (new_v - gaze_v) * step
        gaze_h, gaze_v = new_h, new_v

    h += _drift(rng, t, duration, cfg.drift)
    v += _drift(rng, t, duration, cfg.drift)
    if cfg.noise_sd_uv > 0:
        h += rng.normal(0.0, cfg.noise_sd_uv, n)
        v += rng.normal(0.0, cfg.noise_sd_uv, n)

    events = sorted((c - 0.5 * w, c + 0.5 * w, "blink" if k == "b" else "saccade")
                    for c, w, k in zip(centres, widths, kinds))
    intervals = [(lo, hi) for lo, hi, _ in events]
    fixations = []
    cursor = 0.0
    for lo, hi in intervals:
        if lo > cursor:
            fixations.append((cursor, lo))
        cursor = max(cursor, hi)
    if cursor < duration:
        fixations.append((cursor, duration))

    truth = GroundTruth(
        duration_s=duration,
        blink_times_s=tuple(blink_times),
        saccade_times_s=tuple(sacc_times),
        event_intervals=tuple(intervals),
        event_kinds=tuple(k for _, _, k in events),
        fixation_segments=tuple(fixations),
    )
    return Recording(cfg.subject_id, cfg.fs_hz, h, v), truth


def generate_cohort(n: int, base_cfg: SynthConfig, sweep=None):
    """``n`` recordings with one parameter swept linearly across a range.

    Parameters
    ----------
    sweep : (name, (low, high)), optional
        Parameter to vary; ``name`` may be ``drift.<field>``. Recording ``i``
        uses ``low + i * (high - low) / (n - 1)`` and seed ``base_cfg.seed + i``.

    Returns
    -------
    recordings, truths, values
        ``values`` holds the swept parameter per recording (None without a sweep).
    """
    if n < 5:
        raise ValueError("a cohort needs at least 5 recordings")
    values = [None] * n
    if sweep is not None:
        name, (low, high) = sweep
        values = list(np.linspace(low, high, n))
    recs, truths = [], []
    for i in range(n):
        cfg = replace(base_cfg, seed=base_cfg.seed + i, subject_id=f"s{i + 1:02d}")
        if sweep is not None:
            val = values[i]
            if name.endswith("degree"):
                val = int(round(val))
            cfg = cfg.with_param(name, float(val) if not isinstance(val, int) else val)
        rec, truth = generate(cfg)
        recs.append(rec)
        truths.append(truth)
    return recs, truths, values
