"""The 44-feature vector and two of its nonlinear members.

DFA separates white from integrated noise; the Teager-Kaiser mean of a
sinusoid has a closed form. Then a full feature vector is extracted from a
synthetic recording.
"""
import numpy as np

from navdex import features as F
from navdex.preprocess import preprocess
from navdex.synth import SynthConfig, generate

rng = np.random.default_rng(0)
noise = rng.standard_normal(8192)
print(f"DFA alpha, white noise      : {F.dfa(noise):.3f}  (expect ~0.5)")
print(f"DFA alpha, integrated noise : {F.dfa(np.cumsum(noise)):.3f}  (expect ~1.5)")

A, w = 2.0, 0.2
n = np.arange(4096)
print(f"TKEO mean of {A} sin({w} n)  : {F.teager_kaiser(A * np.sin(w * n)):.5f}"
      f"  vs A^2 sin^2(w) = {A ** 2 * np.sin(w) ** 2:.5f}")

rec, _ = generate(SynthConfig(duration_s=30, seed=3, blink_rate_hz=0.3, blink_amp_uv=200,
                              saccade_rate_hz=0.5, saccade_amp_uv=100, noise_sd_uv=5))
fv = F.extract_all(preprocess(rec))
print(f"\n{len(fv)} features for {fv.subject_id}; a few of them:")
for key in ("ME_v", "SD_v", "ER_v", "ZCR_h", "SC_v", "LE_h", "DFA_v", "TK_h"):
    print(f"  {key:6s} {fv[key]: .6g}")
