import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from navdex.derive import IndexModel, score
from navdex.errors import EmptyInput, MissingFeature
from navdex.indices import (
    PUBLISHED_MODELS,
    PublishedIndex,
    export_published,
    feature_importance,
    score_published,
)
from navdex.model import FEATURE_KEYS, FeatureVector, Subscale

OFFSETS = {"NO": 110.64, "SA": -1.84, "LR": -18.20, "PS": -5.22, "PR": -0.48}

TERM_SETS = {
    "NO": {"SB_v", "TK_h", "ZCR_h", "SK_h", "MO_h", "ER_v", "MA_v", "RMS_v"},
    "SA": {"TK_v", "MO_v", "EN_v", "ER_v", "TK_h", "ZCR_v", "DFA_v"},
    "LR": {"EN_v", "RA_v", "TK_h", "DFA_h", "MI_h", "MD_v"},
    "PS": {"SK_h", "EN_h", "AUC_v", "KU_h"},
    "PR": {"SK_v", "SMA_v", "TK_h", "EN_v", "ZCR_v", "DFA_h"},
}


def _basis(key, value=1.0):
    d = dict(FeatureVector.zeros())
    d[key] = value
    return FeatureVector(d)


@pytest.mark.parametrize("which", list(OFFSETS))
def test_zero_vector_gives_offset(which):
    assert score_published(which, FeatureVector.zeros()) == pytest.approx(OFFSETS[which], abs=1e-12)


def test_hand_arithmetic():
    assert score_published("NO", _basis("SB_v")) == pytest.approx(-8129.36, abs=1e-9)
    assert score_published("PS", _basis("SK_h")) == pytest.approx(-6.24, abs=1e-9)


@pytest.mark.parametrize("which", list(OFFSETS))
def test_every_basis_vector(which):
    model = PUBLISHED_MODELS[PublishedIndex(which)]
    coefs = dict(model.terms)
    for key in FEATURE_KEYS:
        got = score_published(which, _basis(key)) - model.offset
        assert got == pytest.approx(model.scale * coefs.get(key, 0.0), abs=1e-9)


@pytest.mark.parametrize("which", list(OFFSETS))
def test_term_sets(which):
    assert set(PublishedIndex(which).model.feature_keys) == TERM_SETS[which]


def test_subscale_mapping():
    assert PublishedIndex.NO.subscale is Subscale.NavigationOrientation
    assert PublishedIndex.LR.subscale is Subscale.LandmarkRecognition
    assert PublishedIndex.PR.subscale is Subscale.PathRoute


def test_missing_feature():
    with pytest.raises(MissingFeature):
        score_published("PS", {"SK_h": 1.0})


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.sampled_from(list(OFFSETS)))
def test_affine(seed, alpha, which):
    r = np.random.default_rng(seed)
    a = dict(zip(FEATURE_KEYS, r.normal(size=44)))
    b = dict(zip(FEATURE_KEYS, r.normal(size=44)))
    mix = {k: alpha * a[k] + (1 - alpha) * b[k] for k in FEATURE_KEYS}
    lhs = score_published(which, mix)
    rhs = alpha * score_published(which, a) + (1 - alpha) * score_published(which, b)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-6)


def test_importance_definition(rng):
    X = pd.DataFrame(rng.normal(size=(30, 44)), columns=FEATURE_KEYS)
    X["ME_h"] = np.where(np.arange(30) % 2, 1.0, -1.0) * 1.0
    X["ME_h"] *= 2.0 / X["ME_h"].std(ddof=1)
    m = IndexModel(terms=[("ME_h", 1.0)], scale=1.0, offset=0.0, name="toy")
    imp = feature_importance([m], X)
    assert imp.loc["ME_h", "toy"] == pytest.approx(2.0, rel=1e-12)
    assert (imp.drop(index="ME_h") == 0).all().all()

    models = [p.model for p in PublishedIndex]
    imp = feature_importance(models, X)
    assert list(imp.columns) == ["NO", "SA", "LR", "PS", "PR"]
    used = set().union(*TERM_SETS.values())
    for key in set(FEATURE_KEYS) - used:
        assert (imp.loc[key] == 0).all()
    X2 = X.copy()
    X2["SB_v"] *= 2
    imp2 = feature_importance(models, X2)
    assert imp2.loc["SB_v", "NO"] == pytest.approx(2 * imp.loc["SB_v", "NO"], rel=1e-12)
    assert imp2.loc["TK_h", "NO"] == imp.loc["TK_h", "NO"]


def test_importance_errors(rng):
    with pytest.raises(EmptyInput):
        feature_importance([], pd.DataFrame({"SB_v": [1.0, 2.0]}))
    with pytest.raises(MissingFeature):
        feature_importance([PublishedIndex.NO.model], pd.DataFrame({"SB_v": [1.0, 2.0]}))


def test_export_round_trip(tmp_path, rng):
    paths = export_published(tmp_path)
    assert sorted(p.name for p in paths) == sorted(f"{k}.json" for k in OFFSETS)
    fv = dict(zip(FEATURE_KEYS, rng.normal(size=44)))
    for p in paths:
        back = IndexModel.load(p)
        assert score(back, fv) == score_published(p.stem, fv)
