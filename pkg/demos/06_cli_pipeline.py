"""The whole pipeline through the command line.

Synthesises eight recordings, preprocesses them, extracts features, derives
an index against a made-up subscore and evaluates it. Everything lands in a
temporary directory whose tree is printed at the end.
"""
import json
import tempfile
from pathlib import Path

import pandas as pd

from navdex.cli import main

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    (root / "synth.json").write_text(json.dumps({
        "duration_s": 12.0, "seed": 7, "blink_rate_hz": 0.4, "blink_amp_uv": 150.0,
        "saccade_rate_hz": 0.8, "saccade_amp_uv": 80.0, "noise_sd_uv": 4.0}))

    def run(*argv):
        print("$ navdex " + " ".join(str(a).replace(tmp, "<tmp>") for a in argv))
        code = main([str(a) for a in argv])
        assert code == 0, code

    run("synth", "--out", root / "raw", "--config", root / "synth.json", "--n", 8)
    run("preprocess", "--in", root / "raw", "--out", root / "clean")
    run("features", "--in", root / "clean", "--out", root / "features.csv")

    ev = pd.read_csv(root / "raw" / "events.csv")
    pd.DataFrame({"subject_id": ev["subject_id"],
                  "NavigationOrientation": 20 + 3 * ev["blink_count"] + ev["saccade_count"]}
                 ).to_csv(root / "subscores.csv", index=False)

    run("derive", "--features", root / "features.csv", "--subscores", root / "subscores.csv",
        "--subscale", "NavigationOrientation", "--lambda", 0.005, "--folds", 5,
        "--threshold", 0.01, "--out", root / "NO.json")
    run("score", "--model", root / "NO.json", "--features", root / "features.csv",
        "--out", root / "estimates.csv")
    run("evaluate", "--estimates", root / "estimates.csv", "--subscores", root / "subscores.csv",
        "--out", root / "evaluation.json")
    run("report", "--estimates", root / "estimates.csv", "--subscores", root / "subscores.csv",
        "--model", root / "NO.json", "--features", root / "features.csv", "--out", root / "figures")

    print("\nfiles written:")
    for p in sorted(root.rglob("*")):
        if p.is_file():
            print("  " + str(p.relative_to(root)))
