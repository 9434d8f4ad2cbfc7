"""Persist experiment reports: metrics.json, curves_early.csv, roc.csv, table.csv."""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

from .experiments import BALANCED_METRICS, early_curves

# schema of metrics.json (top level):
#   config           run configuration, verbatim
#   config_hash      sha256 of the canonical JSON of ``config``
#   hyperparameters  classifier defaults actually used
#   report           scenario output of run_final_stage / run_early_stage
METRICS_SCHEMA_VERSION = 1


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _clean(obj):
    """JSON-safe copy: drops numpy arrays held under 'oof', casts numpy scalars."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items() if k != "oof"}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, float) and obj == float("inf"):
        return "inf"
    return obj


def write_metrics_json(report: dict, config: dict, hyper: dict, path) -> str:
    h = config_hash(config)
    doc = {"schema_version": METRICS_SCHEMA_VERSION, "config": config, "config_hash": h,
           "hyperparameters": hyper, "report": _clean(report)}
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return h


def _csv(path, header, rows, h):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# config_hash={h}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in r])


def write_curves_csv(report: dict, path, h) -> None:
    _csv(path, ["classifier", "delta", "metric", "value"], early_curves(report), h)


def write_roc_csv(report: dict, path, h) -> None:
    rows = []
    for kind, pts in report["roc"].items():
        for thr, fpr, tpr in pts:
            rows.append((kind, "inf" if thr == float("inf") else float(thr), float(fpr), float(tpr)))
    _csv(path, ["classifier", "threshold", "fpr", "tpr"], rows, h)


def write_table_csv(report: dict, path, h) -> None:
    rows = [(kind,) + tuple(vals[m] for m in BALANCED_METRICS)
            for kind, vals in report["table"].items()]
    _csv(path, ["classifier"] + list(BALANCED_METRICS), rows, h)


def read_csv_rows(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(ln for ln in fh if not ln.startswith("#")))


def format_table(report: dict) -> str:
    """Balanced-pass metrics per classifier, plus full-pass AUC and scaled kappa."""
    head = f"{'Classifier':<11}" + "".join(f"{m.capitalize():>11}" for m in BALANCED_METRICS)
    head += f"{'AUC':>9}{'Kappa':>9}"
    lines = [head, "-" * len(head)]
    for kind, vals in report["table"].items():
        full = report["classifiers"][kind]["full"]["mean"]
        cells = "".join(f"{'-' if vals[m] is None else format(vals[m], '.3f'):>11}"
                        for m in BALANCED_METRICS)
        lines.append(f"{kind.upper():<11}{cells}{full['auc']:>9.3f}{full['kappa_scaled']:>9.3f}")
    return "\n".join(lines)


def format_early_summary(report: dict) -> str:
    lines = [f"{'Classifier':<11}{'metric':<14}{'min':>8}{'mean':>8}{'max':>8}   (over "
             f"{len(report['deltas'])} steps)"]
    by = {}
    for kind, _, metric, value in early_curves(report):
        if value is not None:
            by.setdefault((kind, metric), []).append(value)
    for (kind, metric), vals in by.items():
        lines.append(f"{kind.upper():<11}{metric:<14}{min(vals):>8.3f}"
                     f"{sum(vals) / len(vals):>8.3f}{max(vals):>8.3f}")
    return "\n".join(lines)
