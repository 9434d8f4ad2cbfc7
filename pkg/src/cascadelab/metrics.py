"""Classification metrics, stratified folds and undersampling. Label 1 is the positive class."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, asdict

import numpy as np
from scipy.stats import rankdata

from .model import CascadeError


class SingleClass(CascadeError, ValueError):
    pass


class LengthMismatch(CascadeError, ValueError):
    pass


class TooFewSamples(CascadeError, ValueError):
    pass


@dataclass(frozen=True)
class MetricSet:
    auc: float
    kappa_scaled: float
    precision: float
    recall: float
    accuracy: float
    f1: float

    names = ("auc", "kappa_scaled", "precision", "recall", "accuracy", "f1")

    def as_dict(self):
        return asdict(self)


def _binary(labels):
    y = np.asarray(labels)
    if y.dtype == bool:
        y = y.astype(np.int64)
    return y


def auc(scores, labels) -> float:
    """P(score+ > score-) + 0.5 P(score+ == score-), from average ranks."""
    s = np.asarray(scores, dtype=np.float64)
    y = _binary(labels)
    if len(s) != len(y):
        raise LengthMismatch(f"{len(s)} scores vs {len(y)} labels")
    n_pos = int(np.count_nonzero(y == 1))
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUC needs both classes")
    ranks = rankdata(s)  # average ranks give the 1/2 credit for ties
    # rank sums are multiples of 0.5 and far below 2**52, so this is exact
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def confusion(pred, labels):
    p = _binary(pred)
    y = _binary(labels)
    if len(p) != len(y):
        raise LengthMismatch(f"{len(p)} predictions vs {len(y)} labels")
    if len(y) == 0:
        raise LengthMismatch("empty input")
    tp = int(np.count_nonzero((p == 1) & (y == 1)))
    fp = int(np.count_nonzero((p == 1) & (y == 0)))
    fn = int(np.count_nonzero((p == 0) & (y == 1)))
    tn = len(y) - tp - fp - fn
    return tp, fp, fn, tn


def kappa_scaled(pred, labels) -> float:
    """Cohen's kappa mapped to [0, 1] as (kappa + 1) / 2; chance agreement of 1 gives 0.5."""
    tp, fp, fn, tn = confusion(pred, labels)
    n = tp + fp + fn + tn
    p_o = (tp + tn) / n
    p_e = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / (n * n)
    if p_e == 1.0:
        return 0.5
    kappa = (p_o - p_e) / (1.0 - p_e)
    return (kappa + 1.0) / 2.0


def basic_metrics(pred, labels):
    """(precision, recall, accuracy, f1); an undefined ratio is 0 with a warning."""
    tp, fp, fn, tn = confusion(pred, labels)
    n = tp + fp + fn + tn
    if tp + fp == 0:
        warnings.warn("no positive predictions; precision set to 0", RuntimeWarning, stacklevel=2)
        precision = 0.0
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        warnings.warn("no positive labels; recall set to 0", RuntimeWarning, stacklevel=2)
        recall = 0.0
    else:
        recall = tp / (tp + fn)
    f1 = 2 * precision * recall / (precision + recall) if precision > 0 and recall > 0 else 0.0
    return precision, recall, (tp + tn) / n, f1


def metric_set(scores, labels, threshold=0.5) -> MetricSet:
    scores = np.asarray(scores, dtype=np.float64)
    pred = (scores >= threshold).astype(np.int64)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        prec, rec, acc, f1 = basic_metrics(pred, labels)
    return MetricSet(auc(scores, labels), kappa_scaled(pred, labels), prec, rec, acc, f1)


def mean_metrics(sets) -> dict:
    sets = list(sets)
    return {name: float(np.mean([getattr(m, name) if isinstance(m, MetricSet) else m[name]
                                 for m in sets]))
            for name in MetricSet.names}


def roc_points(scores, labels):
    """(threshold, fpr, tpr) at every distinct score, highest first, after a (inf, 0, 0) start.

    A sample counts as positive when its score is >= the threshold.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = _binary(labels)
    n_pos = int(np.count_nonzero(y == 1))
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("ROC needs both classes")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    tps = np.cumsum(y == 1)
    fps = np.cumsum(y == 0)
    last = np.r_[np.nonzero(np.diff(s))[0], len(s) - 1]
    pts = [(float("inf"), 0.0, 0.0)]
    pts += [(float(s[i]), fps[i] / n_neg, tps[i] / n_pos) for i in last]
    return pts


# ---------------------------------------------------------------- resampling

def stratified_kfold(labels, k: int = 5, seed: int = 0):
    """k (train, test) index arrays; per-class counts in each test fold differ by at most 1."""
    y = _binary(labels)
    if k < 2:
        raise ValueError("k must be at least 2")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(y), dtype=np.int64)
    offset = 0
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if len(idx) < k:
            raise TooFewSamples(f"class {cls} has {len(idx)} rows, fewer than k={k}")
        idx = rng.permutation(idx)
        # rotate the deal so the remainders of different classes land in different folds
        fold_of[idx] = (np.arange(len(idx)) + offset) % k
        offset = (offset + len(idx)) % k
    all_idx = np.arange(len(y))
    return [(all_idx[fold_of != f], all_idx[fold_of == f]) for f in range(k)]


def undersample_balanced(labels, seed: int = 0) -> np.ndarray:
    """Sorted indices keeping every minority row and an equal-size random majority subset."""
    y = _binary(labels)
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) < 2:
        raise SingleClass("undersampling needs both classes")
    minority = classes[np.argmin(counts)]
    n_keep = counts.min()
    keep = [np.flatnonzero(y == minority)]
    rng = np.random.default_rng(seed)
    for cls in classes:
        if cls == minority:
            continue
        idx = np.flatnonzero(y == cls)
        keep.append(rng.choice(idx, size=n_keep, replace=False))
    return np.sort(np.concatenate(keep))
