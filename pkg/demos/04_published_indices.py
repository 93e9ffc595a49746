"""Scoring with the five published indices.

A zero feature vector exposes each offset. A unit vector on one feature
exposes scale times coefficient. Feature importance is shown for a random
feature table.
"""
import numpy as np
import pandas as pd

from navdex.indices import PublishedIndex, feature_importance, score_published
from navdex.model import FEATURE_KEYS, FeatureVector

zero = FeatureVector.zeros()
for which in PublishedIndex:
    model = which.model
    print(f"{which.value} ({which.subscale.value}): scale {model.scale}, offset {model.offset}, "
          f"zero vector -> {score_published(which, zero):.2f}")

basis = dict(zero)
basis["SB_v"] = 1.0
print(f"\nSB_v = 1, everything else 0: NO = {score_published('NO', basis):.2f}")

X = pd.DataFrame(np.random.default_rng(0).normal(size=(27, 44)), columns=FEATURE_KEYS)
imp = feature_importance([w.model for w in PublishedIndex], X)
print("\nlargest importances (|scale*coef| * SD) on unit-variance features:")
print(imp.stack().sort_values(ascending=False).head(8).to_string())
