"""Deriving an index by greedy cross-validated pair search.

The target is planted as 3*f0 - 2*f1 plus a little noise among 44 random
features. The derivation log shows which pairs were merged and why the
search stopped.
"""
import numpy as np

from navdex.derive import DeriveConfig, derive_index

rng = np.random.default_rng(42)
X = rng.normal(size=(27, 44))
signal = 3 * X[:, 0] - 2 * X[:, 1]
y = signal + rng.normal(0, 0.01 * signal.std(), 27)

model = derive_index(X, y, DeriveConfig(folds_k=5, lambda_reg=0.005, stop_threshold=0.01))
for rec in model.derivation_log:
    status = "accepted" if rec["accepted"] else "rejected"
    print(f"iteration {rec['iteration']}: {rec['pair']} cv-mse {rec['mean_mse']:.5f} "
          f"penalty {rec['penalty']:.5f} -> {status}")
print("\nflat coefficients after folding the scale:")
for key, coef in model.flat_coefficients().items():
    print(f"  {key}: {coef:+.4f}")
print(f"offset {model.offset:+.4f}")
