"""Command-line entry point: ingest, features, experiment, synth, plot.

Exit codes: 0 success, 1 validation failure, 2 runtime error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict, fields
from pathlib import Path

from . import classifiers as clf
from .builder import DEFAULT_HORIZON, DEFAULT_STEP, check_steps
from .experiments import ExperimentConfig, run_early_stage, run_final_stage
from .extract import early_table, final_table, series_tensor, write_feature_csv
from .model import CascadeError, ParseError, load_dataset, write_dataset
from .report import (config_hash, format_early_summary, format_table, write_curves_csv,
                     write_metrics_json, write_roc_csv, write_table_csv)

log = logging.getLogger("cascadelab")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def _add_inputs(p):
    p.add_argument("--posts", required=True, type=Path)
    p.add_argument("--interactions", required=True, type=Path)
    p.add_argument("--friendships", required=True, type=Path)


def _kinds(text):
    kinds = tuple(k.strip().lower() for k in text.split(",") if k.strip())
    bad = [k for k in kinds if k not in clf.KINDS]
    if bad or not kinds:
        raise argparse.ArgumentTypeError(f"classifiers must be drawn from {','.join(clf.KINDS)}")
    return kinds


def _hyper_override(text):
    key, _, value = text.partition("=")
    names = {f.name: f.type for f in fields(clf.Hyper)}
    if key not in names or not value:
        raise argparse.ArgumentTypeError(f"--hyper takes key=value with key in {sorted(names)}")
    return key, (int(value) if names[key] in (int, "int") else float(value))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cascadelab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and validate the three input files")
    _add_inputs(p)

    p = sub.add_parser("features", help="write features.csv (final) or early_features.csv")
    _add_inputs(p)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--mode", choices=("final", "early"), default="final")
    p.add_argument("--delta", type=int, default=DEFAULT_HORIZON,
                   help="early mode: minutes since publication (multiple of 30)")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("experiment", help="run the early or final stage experiment")
    _add_inputs(p)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--scenario", choices=("early", "final"), default="final")
    p.add_argument("--classifiers", type=_kinds, default=clf.KINDS)
    p.add_argument("--step", type=int, default=DEFAULT_STEP)
    p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--hyper", type=_hyper_override, action="append", default=[],
                   metavar="KEY=VALUE", help="classifier hyperparameter override, repeatable")
    p.add_argument("--plots", action="store_true", help="also render PNG figures from the CSVs")

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--preset", choices=("separable", "null"), required=True)
    p.add_argument("--n-per-class", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", type=Path, help="INI file of presets (default: bundled)")
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("plot", help="render figures from CSVs in an output directory")
    p.add_argument("--out", required=True, type=Path)
    return parser


def _load(args):
    ds, report = load_dataset(args.posts, args.interactions, args.friendships)
    return ds, report


def cmd_ingest(args) -> int:
    ds, report = _load(args)
    counts = ds.label_counts()
    if not ds.posts:
        log.warning("no posts in %s", args.posts)
        print("0 posts")
    else:
        print(f"{counts['science']} science, {counts['conspiracy']} conspiracy")
    print(f"{len(ds.interactions)} interactions, {len(ds.friends)} friendship edges")
    for w in report.warnings:
        print(f"warning: {w}")
    for v in report.violations:
        print(f"violation: {v}")
    if not report.ok:
        print(f"{len(report.violations)} violations")
        return EXIT_INVALID
    return EXIT_OK


def _validated(args):
    ds, report = _load(args)
    if not report.ok:
        for v in report.violations:
            print(f"violation: {v}", file=sys.stderr)
        return None
    return ds


def cmd_features(args) -> int:
    ds = _validated(args)
    if ds is None:
        return EXIT_INVALID
    config = {"command": "features", "posts": str(args.posts),
              "interactions": str(args.interactions), "friendships": str(args.friendships),
              "mode": args.mode, "delta": args.delta if args.mode == "early" else None}
    h = config_hash(config)
    args.out.mkdir(parents=True, exist_ok=True)
    if args.mode == "final":
        table = final_table(ds, args.workers)
        path = args.out / "features.csv"
        write_feature_csv(table, path, h)
    else:
        if args.delta % DEFAULT_STEP or not DEFAULT_STEP <= args.delta <= DEFAULT_HORIZON:
            raise CascadeError(f"--delta must be a multiple of {DEFAULT_STEP} up to {DEFAULT_HORIZON}")
        ids, labels, S = series_tensor(ds, args.workers)
        table = early_table(ids, labels, S, args.delta)
        path = args.out / "early_features.csv"
        write_feature_csv(table, path, h, delta=args.delta)
    print(f"wrote {path} ({len(table.post_ids)} rows, {len(table.names)} features)")
    return EXIT_OK


def cmd_experiment(args) -> int:
    check_steps(args.step, args.horizon)
    hyper = clf.Hyper(**dict(args.hyper))
    run_config = {
        "posts": str(args.posts), "interactions": str(args.interactions),
        "friendships": str(args.friendships), "out": str(args.out),
        "scenario": args.scenario, "classifiers": list(args.classifiers),
        "step": args.step, "horizon": args.horizon, "folds": args.folds, "reps": args.reps,
        "seed": args.seed, "workers": args.workers, "hyper": asdict(hyper),
    }
    ds = _validated(args)
    if ds is None:
        return EXIT_INVALID
    config = ExperimentConfig(kinds=args.classifiers, folds=args.folds, reps=args.reps,
                              seed=args.seed, step=args.step, horizon=args.horizon,
                              workers=args.workers, hyper=hyper)
    args.out.mkdir(parents=True, exist_ok=True)
    h = config_hash(run_config)
    if args.scenario == "final":
        table = final_table(ds, args.workers)
        write_feature_csv(table, args.out / "features.csv", h)
        report = run_final_stage(table, args.classifiers, config)
        write_roc_csv(report, args.out / "roc.csv", h)
        write_table_csv(report, args.out / "table.csv", h)
        summary = format_table(report)
    else:
        ids, labels, S = series_tensor(ds, args.workers)
        report = run_early_stage(ids, labels, S, args.classifiers, config)
        write_curves_csv(report, args.out / "curves_early.csv", h)
        summary = format_early_summary(report)
    write_metrics_json(report, run_config, asdict(hyper), args.out / "metrics.json")
    print(summary)
    print(f"config_hash={h}")
    if args.plots:
        from .plotting import render_all
        for path in render_all(args.out):
            print(f"wrote {path}")
    return EXIT_OK


def cmd_synth(args) -> int:
    from .synthgen import dataset_settings, gen_dataset, load_presets
    presets = load_presets(args.config)
    settings = dataset_settings(args.config)
    ds = gen_dataset(args.preset, args.n_per_class, args.seed, presets, settings)
    paths = write_dataset(ds, args.out)
    print(f"wrote {len(ds.posts)} posts, {len(ds.interactions)} interactions, "
          f"{len(ds.friends)} friendships to {args.out}")
    for p in paths.values():
        print(f"  {p}")
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import render_all
    written = render_all(args.out)
    if not written:
        print(f"no CSVs to plot in {args.out}", file=sys.stderr)
        return EXIT_RUNTIME
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


COMMANDS = {"ingest": cmd_ingest, "features": cmd_features, "experiment": cmd_experiment,
            "synth": cmd_synth, "plot": cmd_plot}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (CascadeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
