"""Time series of high-level features over snapshots, and their summary statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .builder import DEFAULT_HORIZON, DEFAULT_STEP, FRIENDSHIP_RANK, CascadeIndex, sweep
from .model import CascadeError, FeatureVector
from .static import HIGH_LEVEL_NAMES, TOPOLOGICAL_NAMES, high_level_or_zero, topological

SERIES_NAMES = ("friendships_ratio", "size", "interactions_ratio")
STAT_NAMES = ("mean", "lwm", "qwm", "std", "aac", "max")
EARLY_NAMES = tuple(f"{s}_{st}" for s in SERIES_NAMES for st in STAT_NAMES)
FINAL_NAMES = HIGH_LEVEL_NAMES + TOPOLOGICAL_NAMES + EARLY_NAMES
MAX_STEPS = DEFAULT_HORIZON // DEFAULT_STEP


class EmptySeries(CascadeError, ValueError):
    pass


@dataclass(frozen=True)
class EvolutionSeries:
    post_id: str
    name: str
    values: tuple

    @property
    def n(self):
        return len(self.values)


@dataclass(frozen=True)
class SeriesStats:
    mean: float
    linear_weighted_mean: float
    quadratic_weighted_mean: float
    std_dev: float
    avg_abs_change: float
    maximum: float

    def values(self):
        return (self.mean, self.linear_weighted_mean, self.quadratic_weighted_mean,
                self.std_dev, self.avg_abs_change, self.maximum)


def weighted_mean(v, power: int) -> float:
    """Mean of ``v`` with weights i**power, i = 1..n (power 1 or 2), closed-form normalizer."""
    n = len(v)
    norm = {0: n, 1: n * (n + 1) // 2, 2: n * (n + 1) * (2 * n + 1) // 6}[power]
    return math.fsum(i ** power * x for i, x in enumerate(v, 1)) / norm


def series_stats(values) -> SeriesStats:
    """Mean, linear/quadratic weighted means (weights i and i**2, i from 1), population std,
    average absolute change and maximum.

    The average absolute change sums the n-1 successive differences but divides by n.
    """
    v = [float(x) for x in getattr(values, "values", values)]
    n = len(v)
    if n == 0:
        raise EmptySeries("series has no values")
    vmax = max(v)
    if vmax == min(v):
        return SeriesStats(v[0], v[0], v[0], 0.0, 0.0, v[0])
    mean = weighted_mean(v, 0)
    lwm = weighted_mean(v, 1)
    qwm = weighted_mean(v, 2)
    std = math.sqrt(math.fsum((x - mean) ** 2 for x in v) / n)
    aac = math.fsum(abs(a - b) for a, b in zip(v, v[1:])) / n
    return SeriesStats(mean, lwm, qwm, std, aac, vmax)


def series_from_index(index: CascadeIndex, n_steps: int, step_minutes=DEFAULT_STEP):
    """The three series (friendships ratio, size, interactions ratio) for snapshots 1..n_steps.

    Zero-edge snapshots contribute 0 to every series.
    """
    if not 1 <= n_steps <= DEFAULT_HORIZON // step_minutes:
        raise ValueError(f"n_steps must be in [1, {DEFAULT_HORIZON // step_minutes}], got {n_steps}")
    fr, size, ir = [], [], []
    n_friend = 0
    for _, vertices, best, changes in sweep(index, step_minutes, n_steps):
        # ranks only go up, so a pair leaves "friendship" at most once
        for old, new in changes:
            if old is None:
                n_friend += new == FRIENDSHIP_RANK
            elif old == FRIENDSHIP_RANK:
                n_friend -= 1
        m = len(best)
        if m == 0:
            fr.append(0.0)
            size.append(0.0)
            ir.append(0.0)
        else:
            fr.append(n_friend / m)
            size.append(float(m))
            ir.append(len(vertices) / m)
    return fr, size, ir


def build_series(post, interactions, friends, n_steps: int):
    index = CascadeIndex(post, interactions, friends)
    values = series_from_index(index, n_steps)
    return [EvolutionSeries(post.post_id, name, tuple(vals))
            for name, vals in zip(SERIES_NAMES, values)]


def series_from_snapshots(snapshots):
    """Same three series, recomputed from stored snapshot graphs alone."""
    out = ([], [], [])
    for g in snapshots:
        h = high_level_or_zero(g)
        out[0].append(h.friendships_ratio)
        out[1].append(float(h.size))
        out[2].append(h.interactions_ratio)
    return out


def stats_vector(series) -> tuple:
    values = []
    for s in series:
        values.extend(series_stats(s).values())
    return tuple(values)


def early_from_index(index: CascadeIndex, delta_minutes: int) -> FeatureVector:
    if delta_minutes % DEFAULT_STEP or not DEFAULT_STEP <= delta_minutes <= DEFAULT_HORIZON:
        raise ValueError(f"delta must be a multiple of {DEFAULT_STEP} in "
                         f"[{DEFAULT_STEP}, {DEFAULT_HORIZON}], got {delta_minutes}")
    series = series_from_index(index, delta_minutes // DEFAULT_STEP)
    return FeatureVector("early-18", EARLY_NAMES, stats_vector(series))


def early_features(post, interactions, friends, delta_minutes: int) -> FeatureVector:
    """18 evolution features from the snapshots up to ``delta_minutes``, in EARLY_NAMES order."""
    return early_from_index(CascadeIndex(post, interactions, friends), delta_minutes)


def final_from_index(index: CascadeIndex) -> FeatureVector:
    graph = index.graph()
    hl = high_level_or_zero(graph)
    topo = topological(graph)
    evo = stats_vector(series_from_index(index, MAX_STEPS))
    return FeatureVector("final-28", FINAL_NAMES, hl.values() + topo.values() + evo)


def final_features(post, interactions, friends) -> FeatureVector:
    """All 28 features: 5 high-level and 5 topological on the final graph, then the
    18 evolution features over the full two-day horizon."""
    return final_from_index(CascadeIndex(post, interactions, friends))
