"""Side-by-side comparison against the published index performance.

Runs preprocess -> features -> published indices -> metrics on a dataset
laid out as a recordings directory plus a subscore CSV, and prints our
metrics next to the published ones. Nothing here is a pass/fail check: the
published coefficients assume feature conventions that were never released.
"""
from __future__ import annotations

import pandas as pd

from .derive import score_table
from .features import FeatureConfig, feature_table
from .indices import PublishedIndex
from .metrics import evaluate
from .model import Subscale, load_recordings, load_subscores
from .preprocess import PreprocessConfig, preprocess

# R2, MAE, MSE, RMSE, MAPE, rho as published for the 27-participant cohort
PUBLISHED_PERFORMANCE = {
    Subscale.NavigationOrientation: (0.72, 4.16, 25.58, 5.057, 7.76, -0.81),
    Subscale.SpatialAnxiety: (0.51, 4.97, 41.81, 6.466, 20.21, -0.63),
    Subscale.DistanceEstimation: (0.33, 2.86, 13.93, 3.73, 37.01, -0.56),
    Subscale.LandmarkRecognition: (0.50, 0.78, 0.86, 0.93, 12.99, -0.63),
    Subscale.PathRoute: (0.52, 0.43, 0.28, 0.53, 20.25, -0.79),
    Subscale.PathSurvey: (0.41, 0.68, 0.80, 0.89, 34.26, -0.63),
    Subscale.LocationAllocentric: (0.08, 0.80, 1.04, 1.02, 39.37, -0.31),
}
METRICS = ("r2", "mae", "mse", "rmse", "mape", "spearman_rho")


def compare(features: pd.DataFrame, subscores) -> pd.DataFrame:
    """One row per published index: our metric next to the published one."""
    rows = []
    subjects = sorted(features.index)
    for which in PublishedIndex:
        sub = which.subscale
        est = score_table(which.model, features.loc[subjects]).to_numpy()
        rep = evaluate(subscores.column(sub, subjects), est, sub, subjects)
        row = {"index": which.value, "subscale": sub.value}
        for name, ref in zip(METRICS, PUBLISHED_PERFORMANCE[sub]):
            row[f"{name}_ours"] = getattr(rep, name)
            row[f"{name}_published"] = ref
        rows.append(row)
    return pd.DataFrame(rows).set_index("index")


def run_dataset(recordings_dir, subscores_csv, preprocess_cfg=PreprocessConfig(),
                feature_cfg=FeatureConfig()) -> pd.DataFrame:
    recs = [preprocess(r, preprocess_cfg) for r in load_recordings(recordings_dir)]
    features = feature_table(recs, feature_cfg)
    return compare(features, load_subscores(subscores_csv))


def main(argv=None):
    import argparse

    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("recordings")
    p.add_argument("subscores")
    args = p.parse_args(argv)
    table = run_dataset(args.recordings, args.subscores)
    with pd.option_context("display.width", 200, "display.max_columns", None):
        print(table)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
