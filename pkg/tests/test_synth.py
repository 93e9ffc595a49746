import json
from dataclasses import replace

import numpy as np
import pytest
from scipy.signal import find_peaks

from navdex.errors import OverconstrainedPlacement
from navdex.synth import DriftConfig, GroundTruth, SynthConfig, generate, generate_cohort


def test_silent_config_is_zero():
    rec, truth = generate(SynthConfig(duration_s=10, seed=4))
    assert not rec.h.any() and not rec.v.any()
    c = truth.counts
    assert (c.blink_count, c.saccade_count, c.saccade_duration_s) == (0, 0, 0.0)
    assert truth.fixation_segments == ((0.0, 10.0),)


def test_blink_count_equals_placed_pulses():
    cfg = SynthConfig(duration_s=60, seed=9, blink_rate_hz=10 / 60, blink_amp_uv=150.0)
    rec, truth = generate(cfg)
    peaks, _ = find_peaks(rec.v, height=75.0)
    assert len(peaks) == truth.counts.blink_count == len(truth.blink_times_s)
    np.testing.assert_allclose(peaks / cfg.fs_hz, truth.blink_times_s, atol=1 / cfg.fs_hz)
    assert np.max(rec.v) == pytest.approx(150.0, rel=1e-3)
    assert not rec.h.any()


def test_saccades_step_between_targets():
    cfg = SynthConfig(duration_s=30, seed=2, saccade_rate_hz=0.5, saccade_amp_uv=100.0)
    rec, truth = generate(cfg)
    assert truth.counts.saccade_count == len(truth.saccade_times_s) > 0
    assert np.all(np.abs(rec.h) <= 100.0 + 1e-9)
    assert np.all(np.abs(rec.v) <= 50.0 + 1e-9)
    # gaze is flat away from the steps
    step = np.abs(np.diff(rec.h))
    assert np.sum(step > 1e-3) < 0.2 * step.size


def test_monte_carlo_rates():
    cfg = SynthConfig(duration_s=60, blink_rate_hz=0.25, blink_amp_uv=100,
                      saccade_rate_hz=0.5, saccade_amp_uv=50)
    counts = [generate(replace(cfg, seed=s))[1].counts for s in range(50)]
    assert np.mean([c.blink_count for c in counts]) == pytest.approx(15, rel=0.1)
    assert np.mean([c.saccade_count for c in counts]) == pytest.approx(30, rel=0.1)


def test_determinism_and_seed_dependence():
    cfg = SynthConfig(duration_s=20, seed=5, blink_rate_hz=0.5, blink_amp_uv=100,
                      saccade_rate_hz=1.0, saccade_amp_uv=80, noise_sd_uv=3,
                      drift=DriftConfig(2, 30.0, 0.02, 10.0))
    a, ta = generate(cfg)
    b, tb = generate(cfg)
    assert np.array_equal(a.h, b.h) and np.array_equal(a.v, b.v) and ta == tb
    c, tc = generate(replace(cfg, seed=6))
    assert not np.array_equal(a.v, c.v)
    assert ta.blink_times_s != tc.blink_times_s


@pytest.mark.parametrize("seed", range(10))
def test_durations_partition_recording(seed):
    cfg = SynthConfig(duration_s=30, seed=seed, blink_rate_hz=0.4, blink_amp_uv=100,
                      saccade_rate_hz=1.5, saccade_amp_uv=80)
    _, truth = generate(cfg)
    events = sum(e - s for s, e in truth.event_intervals)
    fix = sum(e - s for s, e in truth.fixation_segments)
    assert abs(events + fix - truth.duration_s) <= 1 / cfg.fs_hz
    ivs = truth.event_intervals
    assert all(a[1] <= b[0] for a, b in zip(ivs, ivs[1:]))
    assert list(truth.blink_times_s) == sorted(truth.blink_times_s)
    c = truth.counts
    assert c.blink_count + c.saccade_count == len(ivs)


def test_overconstrained():
    cfg = SynthConfig(duration_s=2, seed=0, blink_rate_hz=20.0, blink_amp_uv=100, blink_width_ms=250)
    with pytest.raises(OverconstrainedPlacement):
        generate(cfg)


def test_config_validation_and_round_trip():
    with pytest.raises(ValueError):
        SynthConfig(duration_s=1.0)
    with pytest.raises(ValueError):
        SynthConfig(blink_rate_hz=-1)
    cfg = SynthConfig(seed=3, drift=DriftConfig(1, 2.0, 0.03, 4.0))
    assert SynthConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    assert cfg.with_param("drift.sin_amp_uv", 9.0).drift.sin_amp_uv == 9.0
    with pytest.raises(ValueError):
        cfg.with_param("nonsense", 1)


def test_truth_json(tmp_path):
    _, truth = generate(SynthConfig(duration_s=10, seed=1, blink_rate_hz=0.5, blink_amp_uv=90))
    truth.save(tmp_path / "t.json")
    d = json.loads((tmp_path / "t.json").read_text())
    assert d["counts"]["blink_count"] == len(d["blink_times_s"])
    assert isinstance(truth, GroundTruth)


def test_cohort_zero_width_sweep():
    base = SynthConfig(duration_s=10, seed=40, blink_rate_hz=0.3, blink_amp_uv=100, noise_sd_uv=2)
    recs, truths, values = generate_cohort(5, base, ("blink_amp_uv", (100.0, 100.0)))
    assert values == [100.0] * 5
    assert [r.subject_id for r in recs] == ["s01", "s02", "s03", "s04", "s05"]
    assert len({r.v.tobytes() for r in recs}) == 5
    solo, _ = generate(replace(base, seed=42, subject_id="s03"))
    assert np.array_equal(solo.v, recs[2].v)


def test_cohort_sweep_monotone():
    base = SynthConfig(duration_s=10, seed=0, blink_rate_hz=0.5, blink_amp_uv=100)
    recs, _, values = generate_cohort(6, base, ("blink_amp_uv", (50.0, 300.0)))
    assert np.all(np.diff(values) > 0)
    peaks = [r.v.max() for r in recs if r.v.max() > 0]
    assert np.all(np.diff(peaks) > 0)
    with pytest.raises(ValueError):
        generate_cohort(4, base)
