import json
import subprocess
import sys

import numpy as np
import pandas as pd
import pytest

from navdex.cli import main
from navdex.model import FEATURE_KEYS, Subscale, load_feature_table, save_feature_table

SYNTH = {
    "duration_s": 12.0, "seed": 3, "blink_rate_hz": 0.4, "blink_amp_uv": 150.0,
    "saccade_rate_hz": 0.8, "saccade_amp_uv": 80.0, "noise_sd_uv": 4.0,
    "drift": {"poly_degree": 2, "poly_amp_uv": 30.0, "sin_freq_hz": 0.02, "sin_amp_uv": 10.0},
}


@pytest.fixture
def synth_dir(tmp_path):
    cfg = tmp_path / "synth.json"
    cfg.write_text(json.dumps(SYNTH))
    out = tmp_path / "recs"
    assert main(["synth", "--out", str(out), "--config", str(cfg), "--n", "3"]) == 0
    return out


def test_synth_layout(synth_dir):
    names = sorted(p.name for p in synth_dir.iterdir())
    for sid in ("s01", "s02", "s03"):
        assert {f"{sid}.csv", f"{sid}.manifest.json", f"{sid}.truth.json"} <= set(names)
    assert "events.csv" in names and "run_manifest.json" in names
    assert not [n for n in names if n.endswith(".tmp")]


def test_features_shape_and_manifest(synth_dir, tmp_path):
    out = tmp_path / "feat" / "features.csv"
    assert main(["preprocess", "--in", str(synth_dir), "--out", str(tmp_path / "clean")]) == 0
    assert main(["features", "--in", str(tmp_path / "clean"), "--out", str(out)]) == 0
    df = pd.read_csv(out)
    assert df.shape == (3, 45)
    assert list(df.columns) == ["subject_id"] + list(FEATURE_KEYS)
    man = json.loads((out.parent / "run_manifest.json").read_text())
    assert man["command"] == "features"
    assert set(man) >= {"config", "inputs", "tool_version", "wall_time_s"}
    clean_man = json.loads((tmp_path / "clean" / "run_manifest.json").read_text())
    assert clean_man["config"]["preprocess"]["lp_cutoff_hz"] == 20.0


def _zero_features(path):
    df = pd.DataFrame(np.zeros((1, 44)), columns=FEATURE_KEYS, index=pd.Index(["s01"], name="subject_id"))
    save_feature_table(df, path)


def test_score_zero_row(tmp_path, capsys):
    feat = tmp_path / "f.csv"
    _zero_features(feat)
    assert main(["score", "--index", "NO", "--features", str(feat)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "subject_id,NavigationOrientation"
    assert float(out[1].split(",")[1]) == pytest.approx(110.64, abs=1e-12)
    dest = tmp_path / "scores.csv"
    assert main(["score", "--index", "NO", "--index", "PS", "--features", str(feat), "--out", str(dest)]) == 0
    df = pd.read_csv(dest)
    assert df.loc[0, "PathSurvey"] == pytest.approx(-5.22)


def _cohort_tables(tmp_path, n=27):
    r = np.random.default_rng(0)
    ids = [f"s{i + 1:02d}" for i in range(n)]
    F = pd.DataFrame(r.normal(size=(n, 44)), columns=FEATURE_KEYS, index=pd.Index(ids, name="subject_id"))
    y = 40 + 5 * F["TK_h"] - 3 * F["SB_v"] + r.normal(0, 0.5, n)
    save_feature_table(F, tmp_path / "features.csv")
    pd.DataFrame({"subject_id": ids, "NavigationOrientation": y}).to_csv(tmp_path / "subscores.csv", index=False)
    return F, y


def test_derive_score_evaluate_report(tmp_path, capsys):
    _cohort_tables(tmp_path)
    model = tmp_path / "out" / "NO.json"
    rc = main(["derive", "--features", str(tmp_path / "features.csv"), "--subscores",
               str(tmp_path / "subscores.csv"), "--subscale", "NavigationOrientation",
               "--lambda", "0.005", "--folds", "5", "--threshold", "0.01", "--out", str(model)])
    assert rc == 0
    d = json.loads(model.read_text())
    assert (d["config"]["lambda_reg"], d["config"]["folds_k"], d["config"]["stop_threshold"]) == (0.005, 5, 0.01)
    assert d["subscale"] == "NavigationOrientation"

    est = tmp_path / "out" / "est.csv"
    assert main(["score", "--model", str(model), "--features", str(tmp_path / "features.csv"),
                 "--out", str(est)]) == 0
    capsys.readouterr()
    rep = tmp_path / "out" / "eval.json"
    assert main(["evaluate", "--estimates", str(est), "--subscores", str(tmp_path / "subscores.csv"),
                 "--out", str(rep)]) == 0
    table = capsys.readouterr().out
    assert "NavigationOrientation" in table
    reports = json.loads(rep.read_text())
    assert reports[0]["r2"] > 0.9 and len(reports[0]["pairs"]) == 27

    figs = tmp_path / "figs"
    assert main(["report", "--estimates", str(est), "--subscores", str(tmp_path / "subscores.csv"),
                 "--model", str(model), "--features", str(tmp_path / "features.csv"),
                 "--out", str(figs)]) == 0
    assert (figs / "NavigationOrientation.svg").exists()
    assert (figs / "feature_importance.csv").exists()
    assert (figs / "run_manifest.json").exists()


def test_correlate(synth_dir, tmp_path, capsys):
    feat = tmp_path / "f.csv"
    assert main(["features", "--in", str(synth_dir), "--out", str(feat)]) == 0
    grid = tmp_path / "grid.csv"
    assert main(["correlate", "--features", str(feat), "--events", str(synth_dir / "events.csv"),
                 "--out", str(grid), "--top", "3"]) == 0
    assert pd.read_csv(grid, index_col=0).shape == (44, 5)


def test_exit_codes(tmp_path, capsys):
    feat = tmp_path / "f.csv"
    _zero_features(feat)
    # validation errors
    assert main(["score", "--features", str(feat)]) == 1
    assert main(["score", "--index", "XX", "--features", str(feat)]) == 1
    assert main(["preprocess", "--in", str(tmp_path), "--out", str(tmp_path / "o"), "--lp", "200"]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("subject_id,ME_h\ns01,1\n")
    assert main(["score", "--index", "NO", "--features", str(bad)]) == 1
    # I/O error
    assert main(["score", "--index", "NO", "--features", str(tmp_path / "missing.csv")]) == 2
    err = capsys.readouterr().err
    assert "missing.csv" in err


def test_report_empty_estimates(tmp_path):
    est = tmp_path / "est.csv"
    est.write_text("subject_id,NavigationOrientation\n")
    subs = tmp_path / "subs.csv"
    subs.write_text("subject_id,NavigationOrientation\ns01,3\n")
    assert main(["report", "--estimates", str(est), "--subscores", str(subs), "--out", str(tmp_path / "r")]) == 1


def test_console_entry_point(tmp_path):
    feat = tmp_path / "f.csv"
    _zero_features(feat)
    res = subprocess.run([sys.executable, "-m", "navdex.cli", "score", "--index", "SA",
                          "--features", str(feat)], capture_output=True, text=True)
    assert res.returncode == 0
    assert float(res.stdout.splitlines()[1].split(",")[1]) == pytest.approx(-1.84)
