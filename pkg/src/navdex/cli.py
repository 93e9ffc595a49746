"""Command-line entry point: ``navdex <command> [options]``.

Exit status is 0 on success, 1 on a validation error and 2 on an I/O error.
Outputs are written to a temporary file and renamed into place, and each
output directory receives a ``run_manifest.json`` describing the run.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path

import pandas as pd

from . import __version__
from .derive import DeriveConfig, IndexModel, derive_for_subscale, score_table
from .errors import EmptyInput, NavdexError
from .features import FeatureConfig, feature_table
from .indices import PublishedIndex, feature_importance
from .metrics import correlate_events, evaluate, render_table, top_correlations
from .model import (
    Subscale,
    event_frame,
    load_event_table,
    load_feature_table,
    load_recordings,
    load_subscores,
    recording_paths,
    save_event_table,
    save_feature_table,
    save_recording,
)
from .preprocess import PreprocessConfig, preprocess_channel
from .report import write_report
from .synth import SynthConfig, generate, generate_cohort

MANIFEST_NAME = "run_manifest.json"


# ---------------------------------------------------------------------------
# file helpers

@contextmanager
def atomic_path(path):
    """Yield a temporary sibling of ``path``; rename it into place on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def write_text(path, text):
    with atomic_path(path) as tmp:
        tmp.write_text(text)


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _hash_inputs(paths):
    out = {}
    for p in paths:
        if p is None:
            continue
        p = Path(p)
        if p.is_dir():
            for f in sorted(p.iterdir()):
                if f.is_file() and f.name != MANIFEST_NAME:
                    out[str(f)] = _sha256(f)
        elif p.exists():
            out[str(p)] = _sha256(p)
    return out


def write_manifest(out_dir, command, config, inputs, started, extra=None):
    manifest = {
        "command": command,
        "config": config,
        "inputs": _hash_inputs(inputs),
        "tool_version": __version__,
        "wall_time_s": round(time.perf_counter() - started, 6),
    }
    if extra:
        manifest.update(extra)
    write_text(Path(out_dir) / MANIFEST_NAME, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _write_csv_frame(path, saver, frame):
    with atomic_path(path) as tmp:
        saver(frame, tmp)


# ---------------------------------------------------------------------------
# commands

def cmd_synth(args):
    started = time.perf_counter()
    cfg = SynthConfig.from_dict(json.loads(Path(args.config).read_text())) if args.config else SynthConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.sweep:
        name, lo, hi = args.sweep
        recs, truths, _ = generate_cohort(args.n, cfg, (name, (float(lo), float(hi))))
    elif args.n > 1:
        # same seed and id scheme as a cohort, without the sweep's size floor
        pairs = [generate(replace(cfg, seed=cfg.seed + i, subject_id=f"s{i + 1:02d}"))
                 for i in range(args.n)]
        recs, truths = [p[0] for p in pairs], [p[1] for p in pairs]
    else:
        rec, truth = generate(cfg)
        recs, truths = [rec], [truth]
    for rec, truth in zip(recs, truths):
        with atomic_path(out / f"{rec.subject_id}.csv") as tmp_csv, \
                atomic_path(out / f"{rec.subject_id}.manifest.json") as tmp_man:
            save_recording(rec, tmp_csv, tmp_man)
        write_text(out / f"{rec.subject_id}.truth.json", json.dumps(truth.to_dict(), indent=2) + "\n")
    events = event_frame({r.subject_id: t.counts for r, t in zip(recs, truths)})
    _write_csv_frame(out / "events.csv", save_event_table, events)
    write_manifest(out, "synth", {"synth": cfg.to_dict(), "n": args.n, "sweep": args.sweep},
                   [args.config], started)
    return 0


def _preprocess_config(args):
    cfg = PreprocessConfig.from_json(args.config) if args.config else PreprocessConfig()
    return cfg.updated(lp_cutoff_hz=args.lp, hp_cutoff_hz=args.hp, median_kernel=args.median_kernel,
                       sg_window=args.sg_window, sg_order=args.sg_order,
                       baseline_degree_max=args.baseline_degree_max)


def cmd_preprocess(args):
    started = time.perf_counter()
    cfg = _preprocess_config(args)
    recs = load_recordings(args.input)
    if not recs:
        raise EmptyInput(f"no recordings (*.manifest.json) found in {args.input}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    degrees = {}
    for rec in recs:
        chans = {}
        for ch in ("h", "v"):
            try:
                chans[ch], degrees[f"{rec.subject_id}_{ch}"] = preprocess_channel(
                    getattr(rec, ch), rec.fs_hz, cfg)
            except NavdexError as exc:
                raise type(exc)(f"{rec.subject_id} ({ch}): {exc}") from exc
        clean = rec.replace(**chans)
        with atomic_path(out / f"{rec.subject_id}.csv") as tmp_csv, \
                atomic_path(out / f"{rec.subject_id}.manifest.json") as tmp_man:
            save_recording(clean, tmp_csv, tmp_man)
    write_manifest(out, "preprocess", {"preprocess": cfg.to_dict()}, [args.input, args.config], started,
                   {"baseline_degrees": degrees})
    return 0


def cmd_features(args):
    started = time.perf_counter()
    cfg = FeatureConfig(**json.loads(Path(args.config).read_text())) if args.config else FeatureConfig()
    if not recording_paths(args.input):
        raise EmptyInput(f"no recordings (*.manifest.json) found in {args.input}")
    frame = feature_table(load_recordings(args.input), cfg,
                          on_degenerate="nan" if args.allow_degenerate else "raise")
    _write_csv_frame(args.out, save_feature_table, frame)
    write_manifest(Path(args.out).parent, "features", {"features": cfg.to_dict()},
                   [args.input, args.config], started)
    return 0


def cmd_derive(args):
    started = time.perf_counter()
    base = json.loads(Path(args.config).read_text()) if args.config else {}
    overrides = {"folds_k": args.folds, "lambda_reg": args.lam, "stop_threshold": args.threshold,
                 "shuffle_seed": args.seed}
    base.update({k: v for k, v in overrides.items() if v is not None})
    cfg = DeriveConfig(**base)
    features = load_feature_table(args.features)
    subscores = load_subscores(args.subscores)
    model = derive_for_subscale(features, subscores, args.subscale, cfg)
    write_text(args.out, json.dumps(model.to_dict(), indent=2) + "\n")
    write_manifest(Path(args.out).parent, "derive", {"derive": cfg.to_dict(), "subscale": args.subscale},
                   [args.features, args.subscores, args.config], started)
    return 0


def _models(args):
    models = [PublishedIndex(k).model for k in (args.index or [])]
    models += [IndexModel.load(p) for p in (getattr(args, "model", None) or [])]
    return models


def _column_name(model):
    return model.subscale.value if model.subscale is not None else model.label


def cmd_score(args):
    started = time.perf_counter()
    models = _models(args)
    if not models:
        raise NavdexError("give at least one --index or --model")
    features = load_feature_table(args.features)
    out = pd.DataFrame(index=features.index)
    for m in models:
        col = _column_name(m)
        if col in out.columns:
            raise NavdexError(f"two models both estimate {col}")
        out[col] = score_table(m, features)
    text = out.to_csv(index_label="subject_id", float_format="%.17g", lineterminator="\n")
    if args.out:
        write_text(args.out, text)
        write_manifest(Path(args.out).parent, "score",
                       {"index": args.index, "model": args.model}, [args.features] + (args.model or []),
                       started)
    else:
        sys.stdout.write(text)
    return 0


def _load_estimates(path):
    est = pd.read_csv(path, dtype={"subject_id": str}, float_precision="round_trip").set_index("subject_id")
    return est


def _reports(estimates, subscores, requested):
    names = requested or [c for c in estimates.columns if c in Subscale._value2member_map_]
    if not names:
        raise EmptyInput("no subscale columns to evaluate")
    reports = []
    for name in names:
        sub = Subscale.parse(name)
        if sub.value not in estimates.columns:
            raise NavdexError(f"estimates have no {sub.value} column")
        subjects = sorted(estimates.index)
        actual = subscores.column(sub, subjects)
        reports.append(evaluate(actual, estimates.loc[subjects, sub.value].to_numpy(float), sub, subjects))
    return reports


def cmd_evaluate(args):
    started = time.perf_counter()
    reports = _reports(_load_estimates(args.estimates), load_subscores(args.subscores), args.subscale)
    sys.stdout.write(render_table(reports))
    if args.out:
        payload = [r.to_dict() for r in reports]
        write_text(args.out, json.dumps(payload, indent=2) + "\n")
        write_text(Path(args.out).with_suffix(".txt"), render_table(reports))
        write_manifest(Path(args.out).parent, "evaluate", {"subscale": args.subscale},
                       [args.estimates, args.subscores], started)
    return 0


def cmd_correlate(args):
    started = time.perf_counter()
    grid = correlate_events(load_feature_table(args.features), load_event_table(args.events))
    text = grid.to_csv(index_label="feature", float_format="%.17g", lineterminator="\n")
    write_text(args.out, text)
    if args.top:
        sys.stdout.write(top_correlations(grid, args.top).to_string(index=False) + "\n")
    write_manifest(Path(args.out).parent, "correlate", {"top": args.top},
                   [args.features, args.events], started)
    return 0


def cmd_report(args):
    started = time.perf_counter()
    estimates = _load_estimates(args.estimates)
    if estimates.empty:
        raise EmptyInput("estimate file has no rows")
    reports = _reports(estimates, load_subscores(args.subscores), args.subscale)
    importance = None
    models = _models(args)
    if models:
        if not args.features:
            raise NavdexError("--features is required to compute feature importance")
        importance = feature_importance(models, load_feature_table(args.features))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_report(out, reports, importance, writer=write_text)
    write_manifest(out, "report", {"index": args.index, "model": args.model},
                   [args.estimates, args.subscores, args.features] + (args.model or []), started)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="navdex", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"navdex {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate synthetic recordings with ground truth")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--config", help="SynthConfig JSON")
    s.add_argument("--seed", type=int)
    s.add_argument("--n", type=int, default=1, help="number of recordings")
    s.add_argument("--sweep", nargs=3, metavar=("PARAM", "LOW", "HIGH"))
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("preprocess", help="condition every recording in a directory")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--config", help="PreprocessConfig JSON")
    s.add_argument("--lp", type=float)
    s.add_argument("--hp", type=float)
    s.add_argument("--median-kernel", type=int)
    s.add_argument("--sg-window", type=int)
    s.add_argument("--sg-order", type=int)
    s.add_argument("--baseline-degree-max", type=int)
    s.set_defaults(func=cmd_preprocess)

    s = sub.add_parser("features", help="extract the 44-feature table")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--config", help="FeatureConfig JSON")
    s.add_argument("--allow-degenerate", action="store_true",
                   help="write NaN for undefined features instead of failing")
    s.set_defaults(func=cmd_features)

    s = sub.add_parser("derive", help="derive an index for one subscale")
    s.add_argument("--features", "--in", dest="features", required=True)
    s.add_argument("--subscores", required=True)
    s.add_argument("--subscale", required=True, choices=[x.value for x in Subscale])
    s.add_argument("--out", required=True)
    s.add_argument("--config", help="DeriveConfig JSON")
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--folds", type=int)
    s.add_argument("--threshold", type=float)
    s.add_argument("--seed", type=int, help="shuffle subjects before forming folds")
    s.set_defaults(func=cmd_derive)

    s = sub.add_parser("score", help="apply published or derived indices")
    s.add_argument("--features", "--in", dest="features", required=True)
    s.add_argument("--index", action="append", choices=[x.value for x in PublishedIndex])
    s.add_argument("--model", action="append", help="IndexModel JSON")
    s.add_argument("--out")
    s.set_defaults(func=cmd_score)

    s = sub.add_parser("evaluate", help="compare estimates with subscores")
    s.add_argument("--estimates", "--in", dest="estimates", required=True)
    s.add_argument("--subscores", required=True)
    s.add_argument("--subscale", action="append")
    s.add_argument("--out")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("correlate", help="Spearman grid of features against event measures")
    s.add_argument("--features", "--in", dest="features", required=True)
    s.add_argument("--events", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--top", type=int, default=0, help="print the top-N features per measure")
    s.set_defaults(func=cmd_correlate)

    s = sub.add_parser("report", help="SVG/CSV figures of estimates and feature importance")
    s.add_argument("--estimates", "--in", dest="estimates", required=True)
    s.add_argument("--subscores", required=True)
    s.add_argument("--subscale", action="append")
    s.add_argument("--index", action="append", choices=[x.value for x in PublishedIndex])
    s.add_argument("--model", action="append")
    s.add_argument("--features")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags; that is a validation error here
        return 1 if exc.code == 2 else (exc.code or 0)
    try:
        return args.func(args)
    except (NavdexError, KeyError, json.JSONDecodeError, TypeError, ValueError) as exc:
        print(f"navdex {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"navdex {args.command}: I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
