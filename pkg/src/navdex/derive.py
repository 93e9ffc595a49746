"""Greedy cross-validated pair combination for deriving subscore indices.

Each iteration scores every pair of columns in the current pool by the mean
k-fold test MSE of a two-feature least-squares fit plus an L1 penalty on the
full-data slopes, merges the best pair into one composite column and repeats
while the best mean MSE keeps improving by at least ``stop_threshold``. The
last composite is then calibrated against the target by a one-variable fit.

All pair fits are solved in closed form from fold covariance matrices, so an
iteration evaluates every pair at once.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import ConstantTarget, InsufficientSubjects, MissingFeature
from .model import Subscale

# squared correlation above 1 - SINGULAR_TOL counts as collinear
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class DeriveConfig:
    folds_k: int = 5
    lambda_reg: float = 0.005
    stop_threshold: float = 0.01
    shuffle_seed: int | None = None

    def __post_init__(self):
        if self.folds_k < 2:
            raise ValueError("folds_k must be >= 2")
        if self.lambda_reg < 0:
            raise ValueError("lambda_reg must be >= 0")
        if not self.stop_threshold > 0:
            raise ValueError("stop_threshold must be > 0")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class PairScore:
    i: int
    j: int
    mean_mse: float
    penalty: float
    score: float
    coef_i: float
    coef_j: float
    intercept: float
    singular: bool = False

    @property
    def full_fit_coeffs(self):
        return self.coef_i, self.coef_j, self.intercept


@dataclass(frozen=True)
class IndexModel:
    """Affine scorer ``scale * sum(coef * feature) + offset``."""

    terms: tuple[tuple[str, float], ...]
    scale: float
    offset: float
    subscale: Subscale | None = None
    inner_offsets: tuple[float, ...] = ()
    derivation_log: tuple[dict, ...] = ()
    config: dict = field(default_factory=dict)
    name: str | None = None

    def __post_init__(self):
        terms = tuple((str(k), float(c)) for k, c in self.terms)
        if not terms:
            raise ValueError("IndexModel needs at least one term")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "inner_offsets", tuple(float(v) for v in self.inner_offsets))
        object.__setattr__(self, "derivation_log", tuple(self.derivation_log))
        if self.subscale is not None:
            object.__setattr__(self, "subscale", Subscale.parse(self.subscale))

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        return self.subscale.value if self.subscale is not None else "index"

    @property
    def feature_keys(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.terms)

    def flat_coefficients(self) -> dict[str, float]:
        """Coefficients with the outer scale folded in."""
        return {k: self.scale * c for k, c in self.terms}

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "subscale": self.subscale.value if self.subscale is not None else None,
            "terms": [{"feature": k, "coefficient": c} for k, c in self.terms],
            "scale": self.scale,
            "offset": self.offset,
            "inner_offsets": list(self.inner_offsets),
            "config": dict(self.config),
            "derivation_log": [dict(r) for r in self.derivation_log],
        }

    @classmethod
    def from_dict(cls, d) -> "IndexModel":
        return cls(
            terms=tuple((t["feature"], t["coefficient"]) for t in d["terms"]),
            scale=d["scale"],
            offset=d["offset"],
            subscale=d.get("subscale"),
            inner_offsets=tuple(d.get("inner_offsets", ())),
            derivation_log=tuple(d.get("derivation_log", ())),
            config=dict(d.get("config", {})),
            name=d.get("name"),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "IndexModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def score(model: IndexModel, fv) -> float:
    """Evaluate ``model`` on a feature mapping (FeatureVector, dict or Series)."""
    total = 0.0
    for key, coef in model.terms:
        try:
            val = fv[key]
        except KeyError:
            raise MissingFeature(f"feature {key!r} required by {model.label} is missing") from None
        total += coef * float(val)
    return model.scale * total + model.offset


def score_table(model: IndexModel, features: pd.DataFrame) -> pd.Series:
    """Score every row of a feature frame."""
    missing = [k for k in model.feature_keys if k not in features.columns]
    if missing:
        raise MissingFeature(f"features {missing} required by {model.label} are missing")
    coefs = np.array([c for _, c in model.terms])
    inner = features[list(model.feature_keys)].to_numpy(dtype=float) @ coefs
    return pd.Series(model.scale * inner + model.offset, index=features.index, name=model.label)


# ---------------------------------------------------------------------------
# folds and pair fits

def kfold_indices(n: int, k: int, seed: int | None = None) -> list[np.ndarray]:
    """Test-index blocks of near-equal size (first ``n % k`` blocks one larger)."""
    if k > n:
        raise InsufficientSubjects(f"{k} folds need at least {k} subjects, got {n}")
    order = np.arange(n)
    if seed is not None:
        order = np.random.default_rng(seed).permutation(n)
    return [np.sort(b) for b in np.array_split(order, k)]


def _pair_fits(X, y, pi, pj):
    """Closed-form two-feature OLS with intercept, batched over pairs.

    Returns slopes ``bi, bj``, intercepts and a collinearity flag. Collinear
    pairs get the minimum-norm slope solution (pseudo-inverse of the 2x2
    centred normal matrix).
    """
    xm = X.mean(axis=0)
    ym = y.mean()
    Xc = X - xm
    yc = y - ym
    cov = Xc.T @ Xc
    cy = Xc.T @ yc
    a, b, d = cov[pi, pi], cov[pi, pj], cov[pj, pj]
    e, f = cy[pi], cy[pj]
    det = a * d - b * b
    singular = ~(det > SINGULAR_TOL * a * d)
    with np.errstate(divide="ignore", invalid="ignore"):
        bi = (d * e - b * f) / det
        bj = (a * f - b * e) / det
    if np.any(singular):
        for s in np.flatnonzero(singular):
            m = np.array([[a[s], b[s]], [b[s], d[s]]])
            bi[s], bj[s] = np.linalg.pinv(m, rcond=1e-8) @ np.array([e[s], f[s]])
    intercept = ym - bi * xm[pi] - bj * xm[pj]
    return bi, bj, intercept, singular


def evaluate_pairs(X, y, pairs, cfg: DeriveConfig = DeriveConfig()) -> list[PairScore]:
    """Score each ``(i, j)`` column pair of ``X`` against ``y``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
    pi, pj = pairs[:, 0], pairs[:, 1]
    if np.any(pi == pj):
        raise ValueError("a pair needs two distinct columns")
    folds = kfold_indices(n, cfg.folds_k, cfg.shuffle_seed)
    if n - max(len(f) for f in folds) < 3:
        raise InsufficientSubjects(f"{n} subjects leave fewer than 3 training rows in some fold")

    fold_mse = []
    for test in folds:
        train = np.setdiff1d(np.arange(n), test, assume_unique=True)
        bi, bj, c, _ = _pair_fits(X[train], y[train], pi, pj)
        pred = c + X[np.ix_(test, pi)] * bi + X[np.ix_(test, pj)] * bj
        fold_mse.append(np.mean((y[test, None] - pred) ** 2, axis=0))
    mean_mse = np.mean(fold_mse, axis=0)

    bi, bj, c, singular = _pair_fits(X, y, pi, pj)
    penalty = cfg.lambda_reg * (np.abs(bi) + np.abs(bj))
    total = mean_mse + penalty
    return [
        PairScore(int(pi[k]), int(pj[k]), float(mean_mse[k]), float(penalty[k]), float(total[k]),
                  float(bi[k]), float(bj[k]), float(c[k]), bool(singular[k]))
        for k in range(len(pairs))
    ]


def cv_pair_score(X, y, i: int, j: int, cfg: DeriveConfig = DeriveConfig()) -> PairScore:
    """Cross-validated, penalised score of one column pair."""
    return evaluate_pairs(X, y, [(i, j)], cfg)[0]


# ---------------------------------------------------------------------------

def _as_matrix(X, columns):
    if isinstance(X, pd.DataFrame):
        cols = list(X.columns) if columns is None else list(columns)
        return X[cols].to_numpy(dtype=float), cols
    X = np.asarray(X, dtype=float)
    cols = [f"f{i}" for i in range(X.shape[1])] if columns is None else list(columns)
    if len(cols) != X.shape[1]:
        raise ValueError("column name count does not match X")
    return X, cols


def derive_index(X, y, cfg: DeriveConfig = DeriveConfig(), columns=None,
                 subscale: Subscale | str | None = None) -> IndexModel:
    """Derive an index model for target ``y`` from feature matrix ``X``.

    Parameters
    ----------
    X : DataFrame or (n_subjects, n_features) array
        Raw (unstandardised) features, rows in canonical subject order.
    y : (n_subjects,) array
    columns : sequence of str, optional
        Feature names for an array ``X`` (a DataFrame supplies its own).
    """
    X, names = _as_matrix(X, columns)
    y = np.asarray(y, dtype=float).ravel()
    n, p = X.shape
    if y.size != n:
        raise ValueError(f"X has {n} rows but y has {y.size} values")
    if p < 2:
        raise ValueError("need at least two feature columns")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("X and y must be finite")
    if np.ptp(y) == 0:
        raise ConstantTarget("target has zero variance")
    if n < cfg.folds_k:
        raise InsufficientSubjects(f"{cfg.folds_k} folds need at least {cfg.folds_k} subjects, got {n}")

    # each pool column is a weight vector over the raw features
    pool = [np.eye(p)[k] for k in range(p)]
    pool_names = list(names)
    log = []
    inner_offsets = []
    composite = None
    prev_mse = None
    while len(pool) >= 2:
        W = np.column_stack(pool)
        Z = X @ W
        pairs = list(combinations(range(len(pool)), 2))
        scores = evaluate_pairs(Z, y, pairs, cfg)
        totals = np.array([s.score for s in scores])
        best = scores[int(np.argmin(totals))]  # first minimum == lexicographic tie-break
        record = {
            "iteration": len(log) + 1,
            "pair": [pool_names[best.i], pool_names[best.j]],
            "mean_mse": best.mean_mse,
            "penalty": best.penalty,
            "score": best.score,
            "coefficients": [best.coef_i, best.coef_j],
            "intercept": best.intercept,
            "singular": best.singular,
        }
        if prev_mse is not None and prev_mse - best.mean_mse < cfg.stop_threshold:
            record["accepted"] = False
            log.append(record)
            break
        record["accepted"] = True
        log.append(record)
        prev_mse = best.mean_mse
        composite = best.coef_i * pool[best.i] + best.coef_j * pool[best.j]
        inner_offsets.append(best.intercept)
        label = f"z{len(inner_offsets)}"
        pool = [w for k, w in enumerate(pool) if k not in (best.i, best.j)] + [composite]
        pool_names = [nm for k, nm in enumerate(pool_names) if k not in (best.i, best.j)] + [label]

    z = X @ composite
    zc = z - z.mean()
    denom = float(zc @ zc)
    scale = float(zc @ (y - y.mean()) / denom) if denom > 0 else 0.0
    offset = float(y.mean() - scale * z.mean())
    terms = tuple((names[k], float(composite[k])) for k in range(p) if composite[k] != 0.0)
    return IndexModel(
        terms=terms,
        scale=scale,
        offset=offset,
        subscale=subscale,
        inner_offsets=tuple(inner_offsets),
        derivation_log=tuple(log),
        config=cfg.to_dict(),
    )


def derive_for_subscale(features: pd.DataFrame, subscores, subscale,
                        cfg: DeriveConfig = DeriveConfig()) -> IndexModel:
    """Derive an index for one subscale; subjects are ordered lexicographically."""
    subscale = Subscale.parse(subscale)
    subjects = sorted(features.index)
    y = subscores.column(subscale, subjects)
    return derive_index(features.loc[subjects], y, cfg, subscale=subscale)
