"""Regression metrics, Spearman correlation and event-correlation grids."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd
from scipy.stats import rankdata

from .errors import (
    ConstantActualForR2,
    ConstantVector,
    EmptyInput,
    LengthMismatch,
    SubjectMismatch,
    ZeroActualForMape,
)
from .model import Subscale

TABLE_COLUMNS = ("R2 Score", "MAE", "MSE", "RMSE", "MAPE", "rho")


@dataclass(frozen=True)
class EvaluationReport:
    subscale: Subscale | None
    r2: float
    mae: float
    mse: float
    rmse: float
    mape: float
    spearman_rho: float
    pairs: tuple[tuple[str, float, float], ...] = field(default=())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["subscale"] = self.subscale.value if self.subscale is not None else None
        d["pairs"] = [{"subject_id": s, "actual": a, "estimated": e} for s, a, e in self.pairs]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d) -> "EvaluationReport":
        pairs = tuple((p["subject_id"], p["actual"], p["estimated"]) for p in d.get("pairs", ()))
        sub = d.get("subscale")
        return cls(Subscale.parse(sub) if sub else None, d["r2"], d["mae"], d["mse"], d["rmse"],
                   d["mape"], d["spearman_rho"], pairs)


def _pair_vectors(a, b, min_len=1):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size != b.size:
        raise LengthMismatch(f"length {a.size} != {b.size}")
    if a.size < min_len:
        raise EmptyInput(f"need at least {min_len} values, got {a.size}")
    return a, b


def mae(actual, estimated):
    a, e = _pair_vectors(actual, estimated)
    return float(np.mean(np.abs(a - e)))


def mse(actual, estimated):
    a, e = _pair_vectors(actual, estimated)
    return float(np.mean((a - e) ** 2))


def rmse(actual, estimated):
    return float(np.sqrt(mse(actual, estimated)))


def mape(actual, estimated):
    """Mean absolute percentage error, in percent. Zero actuals are an error."""
    a, e = _pair_vectors(actual, estimated)
    if np.any(a == 0):
        raise ZeroActualForMape("MAPE is undefined when an actual value is 0; filter those rows first")
    return float(100.0 * np.mean(np.abs((a - e) / a)))


def r2_score(actual, estimated):
    a, e = _pair_vectors(actual, estimated)
    ss_tot = np.sum((a - a.mean()) ** 2)
    if ss_tot == 0:
        raise ConstantActualForR2("R2 is undefined for constant actual values")
    return float(1.0 - np.sum((a - e) ** 2) / ss_tot)


def spearman(x, y) -> float:
    """Spearman rank correlation; tied values share their mean rank."""
    x, y = _pair_vectors(x, y, min_len=3)
    rx = rankdata(x, method="average")
    ry = rankdata(y, method="average")
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt(np.dot(rx, rx) * np.dot(ry, ry))
    if denom == 0:
        raise ConstantVector("Spearman correlation is undefined for a constant vector")
    return float(np.clip(np.dot(rx, ry) / denom, -1.0, 1.0))


def evaluate(actual, estimated, subscale=None, subject_ids=None) -> EvaluationReport:
    a, e = _pair_vectors(actual, estimated)
    if subject_ids is None:
        subject_ids = [str(i) for i in range(a.size)]
    subject_ids = list(subject_ids)
    if len(subject_ids) != a.size:
        raise LengthMismatch("subject_ids length does not match the data")
    m = mse(a, e)
    try:
        rho = spearman(a, e)
    except (ConstantVector, EmptyInput):
        rho = float("nan")
    return EvaluationReport(
        subscale=Subscale.parse(subscale) if subscale is not None else None,
        r2=r2_score(a, e),
        mae=mae(a, e),
        mse=m,
        rmse=float(np.sqrt(m)),
        mape=mape(a, e),
        spearman_rho=rho,
        pairs=tuple((str(s), float(x), float(y)) for s, x, y in zip(subject_ids, a, e)),
    )


def render_table(reports) -> str:
    """Plain-text table with one row per report, in the order R2, MAE, MSE, RMSE, MAPE, rho."""
    reports = list(reports)
    rows = []
    for r in reports:
        name = r.subscale.value if r.subscale is not None else "-"
        rows.append((name, f"{r.r2:.2f}", f"{r.mae:.2f}", f"{r.mse:.2f}", f"{r.rmse:.3f}",
                     f"{r.mape:.2f}", f"{r.spearman_rho:.2f}"))
    header = ("Score Name",) + TABLE_COLUMNS
    widths = [max(len(str(row[k])) for row in [header] + rows) for k in range(len(header))]
    lines = ["  ".join(str(c).ljust(w) if k == 0 else str(c).rjust(w)
                       for k, (c, w) in enumerate(zip(row, widths)))
             for row in [header] + rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def correlate_events(features: pd.DataFrame, events: pd.DataFrame) -> pd.DataFrame:
    """Spearman rho of every feature column against every event measure.

    Cells where either vector is constant are NaN.
    """
    if set(features.index) != set(events.index):
        only_f = sorted(set(features.index) - set(events.index))
        only_e = sorted(set(events.index) - set(features.index))
        raise SubjectMismatch(f"subjects only in features: {only_f}; only in events: {only_e}")
    subjects = sorted(features.index)
    F = features.loc[subjects]
    E = events.loc[subjects]
    grid = pd.DataFrame(np.nan, index=pd.Index(F.columns, name="feature"), columns=E.columns)
    for fc in F.columns:
        x = F[fc].to_numpy(dtype=float)
        for ec in E.columns:
            try:
                grid.loc[fc, ec] = spearman(x, E[ec].to_numpy(dtype=float))
            except ConstantVector:
                pass
    return grid


def top_correlations(grid: pd.DataFrame, n: int = 6) -> pd.DataFrame:
    """Per event measure, the ``n`` features with the largest ``|rho|``.

    Cells read like ``"MD_v (-0.81)"``.
    """
    cols = {}
    for ec in grid.columns:
        s = grid[ec].dropna()
        s = s.reindex(s.abs().sort_values(ascending=False, kind="mergesort").index)[:n]
        cols[ec] = [f"{k} ({v:.2f})" for k, v in s.items()] + [""] * (n - len(s))
    return pd.DataFrame(cols)
