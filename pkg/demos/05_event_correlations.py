"""Which features track which eye-movement events.

Two 20-recording cohorts: one sweeps blink rate, one sweeps saccade rate.
For each event measure we list the features with the strongest Spearman
correlation, in the layout of a top-N table. Takes about half a minute.
"""
from navdex.features import feature_table
from navdex.metrics import correlate_events, top_correlations
from navdex.model import event_frame
from navdex.preprocess import preprocess
from navdex.synth import SynthConfig, generate_cohort

base = SynthConfig(duration_s=30, seed=100, blink_rate_hz=0.3, blink_amp_uv=200,
                   saccade_rate_hz=0.5, saccade_amp_uv=100, noise_sd_uv=5)

for sweep in (("blink_rate_hz", (0.05, 0.8)), ("saccade_rate_hz", (0.1, 2.0))):
    recs, truths, _ = generate_cohort(20, base, sweep)
    feats = feature_table([preprocess(r) for r in recs])
    events = event_frame({r.subject_id: t.counts for r, t in zip(recs, truths)})
    grid = correlate_events(feats, events)
    print(f"\nsweep {sweep[0]} over {sweep[1]}:")
    print(top_correlations(grid, 4)[["blink_count", "saccade_count"]].to_string(index=False))
