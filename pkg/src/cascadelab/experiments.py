"""Early Stage and Final Stage experiment drivers.

Each scenario runs two passes per classifier:

* full pass: stratified k-fold CV on the whole (imbalanced) table, scored with
  AUC and scaled kappa; out-of-fold scores are pooled for the ROC curve;
* balanced pass: ``reps`` undersampling draws, each evaluated with k-fold CV;
  precision/recall/accuracy/F1 are averaged over folds, then over draws.

Every (step, draw, fold, classifier) unit gets its own seed derived from the
master seed, so any parallel schedule reproduces the sequential result.
"""
from __future__ import annotations

import logging
import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import classifiers as clf
from .builder import DEFAULT_HORIZON, DEFAULT_STEP, check_steps
from .extract import FeatureTable, early_table
from .metrics import mean_metrics, metric_set, roc_points, stratified_kfold, undersample_balanced

log = logging.getLogger(__name__)

BALANCED_METRICS = ("precision", "recall", "accuracy", "f1")


@dataclass(frozen=True)
class ExperimentConfig:
    kinds: tuple = clf.KINDS
    folds: int = 5
    reps: int = 10
    seed: int = 0
    step: int = DEFAULT_STEP
    horizon: int = DEFAULT_HORIZON
    workers: int = 1
    hyper: clf.Hyper = field(default_factory=clf.Hyper)

    def describe(self) -> dict:
        d = asdict(self)
        d["kinds"] = list(self.kinds)
        return d


def derive_seed(master: int, *keys: int) -> int:
    """Independent 32-bit seed for one work unit."""
    ss = np.random.SeedSequence(entropy=master, spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1)[0])


# ---------------------------------------------------------------- work units

def _cv_unit(args):
    """Fit/score one classifier over a set of folds. Returns (fold metric dicts, oof scores)."""
    X, y, kind, splits, seeds, hyper, schema = args
    oof = np.full(len(y), np.nan)
    folds = []
    for (train, test), seed in zip(splits, seeds):
        model = clf.fit(kind, X[train], y[train], seed=seed, hyper=hyper, schema=schema)
        scores = clf.predict_proba(model, X[test])
        oof[test] = scores
        folds.append(metric_set(scores, y[test]).as_dict())
    return folds, oof


def _map(fn, units, workers):
    if workers <= 1 or len(units) <= 1:
        return [fn(u) for u in units]
    with ProcessPoolExecutor(workers, mp_context=mp.get_context("fork")) as pool:
        return list(pool.map(fn, units))


def _plan(X, y, schema, kinds, config, step_key):
    """All work units of one table: full pass plus each undersampling draw, per classifier."""
    units, keys = [], []
    k = config.folds
    full_splits = stratified_kfold(y, k, derive_seed(config.seed, step_key, 0, 0))
    for ki, kind in enumerate(kinds):
        seeds = [derive_seed(config.seed, step_key, 0, 3, f, ki) for f in range(k)]
        units.append((X, y, kind, full_splits, seeds, config.hyper, schema))
        keys.append((kind, 0))
    for rep in range(1, config.reps + 1):
        keep = undersample_balanced(y, derive_seed(config.seed, step_key, rep, 1))
        Xb, yb = X[keep], y[keep]
        splits = stratified_kfold(yb, k, derive_seed(config.seed, step_key, rep, 2))
        for ki, kind in enumerate(kinds):
            seeds = [derive_seed(config.seed, step_key, rep, 3, f, ki) for f in range(k)]
            units.append((Xb, yb, kind, splits, seeds, config.hyper, schema))
            keys.append((kind, rep))
    return units, keys


def _collect(results, keys, y, kinds):
    """Fold results -> per-classifier full/balanced summaries and pooled OOF scores."""
    out = {}
    for kind in kinds:
        out[kind] = {"full": None, "balanced_reps": [], "oof": None}
    for (kind, rep), (folds, oof) in zip(keys, results):
        if rep == 0:
            out[kind]["full"] = {"folds": folds, "mean": mean_metrics(folds)}
            out[kind]["oof"] = oof
        else:
            out[kind]["balanced_reps"].append({"rep": rep, "folds": folds,
                                               "mean": mean_metrics(folds)})
    for kind in kinds:
        reps = out[kind]["balanced_reps"]
        out[kind]["balanced"] = {"reps": reps,
                                 "mean": mean_metrics([r["mean"] for r in reps]) if reps else None}
        del out[kind]["balanced_reps"]
        pooled = out[kind]["full"]
        pooled["pooled_auc"] = metric_set(out[kind]["oof"], y).auc
    return out


# ---------------------------------------------------------------- scenarios

def run_final_stage(table: FeatureTable, kinds=clf.KINDS, config: ExperimentConfig = None) -> dict:
    config = config or ExperimentConfig()
    kinds = tuple(kinds)
    X, y = table.X, table.y
    units, keys = _plan(X, y, table.schema, kinds, config, step_key=0)
    log.info("final stage: %d work units", len(units))
    res = _collect(_map(_cv_unit, units, config.workers), keys, y, kinds)
    report = {
        "scenario": "final",
        "n_posts": int(len(y)),
        "class_counts": {"science": int((y == 0).sum()), "conspiracy": int((y == 1).sum())},
        "features": list(table.names),
        "reps": config.reps,
        "folds": config.folds,
        "seed": config.seed,
        "classifiers": {},
        "table": {},
        "roc": {},
    }
    for kind in kinds:
        r = res[kind]
        report["classifiers"][kind] = {"full": r["full"], "balanced": r["balanced"]}
        bal = r["balanced"]["mean"] or {}
        report["table"][kind] = {m: bal.get(m) for m in BALANCED_METRICS}
        report["roc"][kind] = [list(p) for p in roc_points(r["oof"], y)]
    return report


def run_early_stage(post_ids, labels, S, kinds=clf.KINDS, config: ExperimentConfig = None,
                    deltas=None) -> dict:
    """Evaluate the 18 evolution features at every delta (default 30, 60, ..., 2880).

    ``S`` is the (n_posts, 3, 96) series tensor; features at delta only read
    the first delta/30 snapshots.
    """
    config = config or ExperimentConfig()
    kinds = tuple(kinds)
    n_steps = check_steps(config.step, config.horizon)
    if config.step != DEFAULT_STEP:
        raise ValueError(f"series are sampled every {DEFAULT_STEP} minutes; step must match")
    deltas = list(deltas) if deltas is not None else [config.step * k for k in range(1, n_steps + 1)]
    y = np.array([lab == "conspiracy" for lab in labels], dtype=np.int64)

    units, keys = [], []
    for delta in deltas:
        table = early_table(post_ids, labels, S, delta)
        u, k = _plan(table.X, y, table.schema, kinds, config, step_key=delta)
        units += u
        keys += [(delta,) + kk for kk in k]
    log.info("early stage: %d deltas, %d work units", len(deltas), len(units))
    results = _map(_cv_unit, units, config.workers)

    steps = []
    for delta in deltas:
        sel = [(kk[1:], r) for kk, r in zip(keys, results) if kk[0] == delta]
        res = _collect([r for _, r in sel], [k for k, _ in sel], y, kinds)
        entry = {"delta": delta, "classifiers": {}}
        for kind in kinds:
            entry["classifiers"][kind] = {"full": res[kind]["full"],
                                          "balanced": res[kind]["balanced"]}
        steps.append(entry)
    return {
        "scenario": "early",
        "n_posts": int(len(y)),
        "class_counts": {"science": int((y == 0).sum()), "conspiracy": int((y == 1).sum())},
        "reps": config.reps,
        "folds": config.folds,
        "seed": config.seed,
        "deltas": deltas,
        "steps": steps,
    }


def early_curves(report: dict):
    """Rows (classifier, delta, metric, value): AUC and kappa from the full pass,
    precision/recall/accuracy/F1 from the balanced pass."""
    rows = []
    kinds = list(report["steps"][0]["classifiers"]) if report["steps"] else []
    for kind in kinds:
        for metric in ("auc", "kappa_scaled") + BALANCED_METRICS:
            for st in report["steps"]:
                c = st["classifiers"][kind]
                src = c["full"]["mean"] if metric in ("auc", "kappa_scaled") else c["balanced"]["mean"]
                rows.append((kind, st["delta"], metric, None if src is None else src[metric]))
    return rows
