"""The five published subscore indices and feature-importance reporting.

Coefficients are stored as printed: an inner linear combination, an outer
scale and an offset.
"""
from __future__ import annotations

from enum import Enum
from pathlib import Path

import pandas as pd

from .derive import IndexModel, score
from .errors import EmptyInput, MissingFeature
from .model import Subscale

_PUBLISHED = {
    "NO": (
        Subscale.NavigationOrientation, -1.03, 110.64,
        (("SB_v", 8000), ("TK_h", 2), ("ZCR_h", -0.14), ("SK_h", -9), ("MO_h", 8),
         ("ER_v", -0.02), ("MA_v", 10), ("RMS_v", -30)),
    ),
    "SA": (
        Subscale.SpatialAnxiety, -1.13, -1.84,
        (("TK_v", -3.6), ("MO_v", -52), ("EN_v", 0.9), ("ER_v", -0.02), ("TK_h", -13),
         ("ZCR_v", -0.02), ("DFA_v", -31)),
    ),
    "LR": (
        Subscale.LandmarkRecognition, -1.08, -18.20,
        (("EN_v", -0.2), ("RA_v", -1.4), ("TK_h", -1), ("DFA_h", -11), ("MI_h", -1),
         ("MD_v", -26)),
    ),
    "PS": (
        Subscale.PathSurvey, -0.85, -5.22,
        (("SK_h", 1.2), ("EN_h", -0.4), ("AUC_v", -4.3), ("KU_h", 0.16)),
    ),
    "PR": (
        Subscale.PathRoute, -1.04, -0.48,
        (("SK_v", 0.34), ("SMA_v", 0.001), ("TK_h", 0.71), ("EN_v", -0.06), ("ZCR_v", -0.006),
         ("DFA_h", -1.6)),
    ),
}


class PublishedIndex(str, Enum):
    NO = "NO"
    SA = "SA"
    LR = "LR"
    PS = "PS"
    PR = "PR"

    @property
    def model(self) -> IndexModel:
        return PUBLISHED_MODELS[self]

    @property
    def subscale(self) -> Subscale:
        return _PUBLISHED[self.value][0]


PUBLISHED_MODELS = {
    PublishedIndex(key): IndexModel(terms=terms, scale=scale, offset=offset, subscale=sub,
                                    name=key, config={"source": "published"})
    for key, (sub, scale, offset, terms) in _PUBLISHED.items()
}


def score_published(which, fv) -> float:
    return score(PublishedIndex(which).model, fv)


def feature_importance(models, X: pd.DataFrame) -> pd.DataFrame:
    """Importance of each feature column per model.

    ``|scale * coefficient| * sd(feature)`` with the sample standard deviation
    over the rows of ``X``; features a model does not use score 0.
    """
    models = list(models)
    if not models:
        raise EmptyInput("no models given")
    sd = X.std(axis=0, ddof=1)
    out = pd.DataFrame(0.0, index=pd.Index(X.columns, name="feature"),
                       columns=[m.label for m in models])
    for col, m in zip(out.columns, models):
        for key, coef in m.terms:
            if key not in X.columns:
                raise MissingFeature(f"feature {key!r} used by {m.label} is not in the table")
            out.loc[key, col] = abs(m.scale * coef) * sd[key]
    return out


def export_published(directory) -> list:
    """Write each published index as an IndexModel JSON file; returns the paths."""
    paths = []
    for which, model in PUBLISHED_MODELS.items():
        path = Path(directory) / f"{which.value}.json"
        model.save(path)
        paths.append(path)
    return paths
