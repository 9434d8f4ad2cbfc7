"""Bulk feature extraction over a dataset, optionally across worker processes."""
from __future__ import annotations

import csv
import logging
import multiprocessing as mp
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .builder import DEFAULT_STEP, CascadeIndex
from .evolution import EARLY_NAMES, FINAL_NAMES, MAX_STEPS, final_from_index, series_from_index
from .model import POSITIVE_LABEL

log = logging.getLogger(__name__)


@dataclass
class FeatureTable:
    post_ids: list
    labels: list  # "science" / "conspiracy"
    names: tuple
    X: np.ndarray
    schema: str

    @property
    def y(self) -> np.ndarray:
        return np.array([lab == POSITIVE_LABEL for lab in self.labels], dtype=np.int64)


# worker-side state, set by _init (or inherited through fork)
_STATE: dict = {}


def _init(posts, groups, friends):
    _STATE["posts"] = posts
    _STATE["groups"] = groups
    _STATE["friends"] = friends


def _final_chunk(bounds):
    lo, hi = bounds
    posts, groups, friends = _STATE["posts"], _STATE["groups"], _STATE["friends"]
    out = np.empty((hi - lo, len(FINAL_NAMES)))
    for i in range(lo, hi):
        p = posts[i]
        out[i - lo] = final_from_index(CascadeIndex(p, groups[p.post_id], friends)).values
    return out


def _series_chunk(bounds):
    lo, hi = bounds
    posts, groups, friends = _STATE["posts"], _STATE["groups"], _STATE["friends"]
    out = np.empty((hi - lo, 3, MAX_STEPS))
    for i in range(lo, hi):
        p = posts[i]
        out[i - lo] = series_from_index(CascadeIndex(p, groups[p.post_id], friends), MAX_STEPS)
    return out


def _run_chunks(fn, dataset, workers, chunk=256):
    posts = sorted(dataset.posts, key=lambda p: p.post_id)
    groups = dataset.by_post()
    bounds = [(lo, min(lo + chunk, len(posts))) for lo in range(0, len(posts), chunk)]
    t0 = time.perf_counter()
    if workers <= 1 or len(bounds) <= 1:
        _init(posts, groups, dataset.friends)
        parts = [fn(b) for b in bounds]
    else:
        ctx = mp.get_context("fork")
        with ProcessPoolExecutor(workers, mp_context=ctx, initializer=_init,
                                 initargs=(posts, groups, dataset.friends)) as pool:
            parts = list(pool.map(fn, bounds))
    elapsed = time.perf_counter() - t0
    log.info("extracted %d posts in %.2fs (%.0f posts/s, %d workers)",
             len(posts), elapsed, len(posts) / max(elapsed, 1e-9), max(workers, 1))
    return posts, parts


def final_table(dataset, workers: int = 1) -> FeatureTable:
    posts, parts = _run_chunks(_final_chunk, dataset, workers)
    X = np.concatenate(parts) if parts else np.empty((0, len(FINAL_NAMES)))
    return FeatureTable([p.post_id for p in posts], [p.label for p in posts],
                        FINAL_NAMES, X, "final-28")


def series_tensor(dataset, workers: int = 1):
    """(post_ids, labels, array of shape (n_posts, 3, 96)) holding the three evolution series."""
    posts, parts = _run_chunks(_series_chunk, dataset, workers)
    S = np.concatenate(parts) if parts else np.empty((0, 3, MAX_STEPS))
    return [p.post_id for p in posts], [p.label for p in posts], S


def prefix_stats(S: np.ndarray, n: int) -> np.ndarray:
    """Six summary statistics of every series prefix ``S[..., :n]``, vectorized over posts.

    Returns shape (n_posts, 18) in EARLY_NAMES order. Agrees with
    ``evolution.series_stats`` to round-off.
    """
    v = S[..., :n]
    i = np.arange(1, n + 1, dtype=np.float64)
    mean = v.sum(axis=-1) / n
    lwm = 2 * (v * i).sum(axis=-1) / (n * (n + 1))
    qwm = 6 * (v * i * i).sum(axis=-1) / (n * (n + 1) * (2 * n + 1))
    std = np.sqrt(((v - mean[..., None]) ** 2).sum(axis=-1) / n)
    aac = np.abs(np.diff(v, axis=-1)).sum(axis=-1) / n
    vmax = v.max(axis=-1)
    const = vmax == v.min(axis=-1)
    first = v[..., 0]
    mean, lwm, qwm = (np.where(const, first, a) for a in (mean, lwm, qwm))
    std = np.where(const, 0.0, std)
    aac = np.where(const, 0.0, aac)
    stats = np.stack([mean, lwm, qwm, std, aac, vmax], axis=-1)  # (posts, 3, 6)
    return stats.reshape(len(S), 18)


def early_table(post_ids, labels, S, delta_minutes: int) -> FeatureTable:
    n = delta_minutes // DEFAULT_STEP
    return FeatureTable(list(post_ids), list(labels), EARLY_NAMES, prefix_stats(S, n), "early-18")


def write_feature_csv(table: FeatureTable, path, config_hash=None, delta=None) -> None:
    """``post_id,label[,delta_minutes],<names>``; floats written with repr precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        if config_hash:
            fh.write(f"# config_hash={config_hash}\n")
        w = csv.writer(fh, lineterminator="\n")
        head = ["post_id", "label"] + (["delta_minutes"] if delta is not None else [])
        w.writerow(head + list(table.names))
        for pid, lab, row in zip(table.post_ids, table.labels, table.X):
            lead = [pid, lab] + ([delta] if delta is not None else [])
            w.writerow(lead + [repr(float(x)) for x in row])


def read_feature_csv(path) -> FeatureTable:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    head, body = rows[0], rows[1:]
    start = 3 if "delta_minutes" in head else 2
    names = tuple(head[start:])
    schema = {18: "early-18", 28: "final-28"}[len(names)]
    X = np.array([[float(x) for x in r[start:]] for r in body]).reshape(len(body), len(names))
    return FeatureTable([r[0] for r in body], [r[1] for r in body], names, X, schema)
