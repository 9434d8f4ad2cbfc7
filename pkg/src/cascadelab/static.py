"""High-level and topological features of a propagation graph."""
from __future__ import annotations

import logging
from dataclasses import dataclass, astuple, fields

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .model import DegenerateGraph, PropagationGraph

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HighLevelFeatures:
    size: int
    friendships_ratio: float
    interactions_ratio: float
    lifetime_minutes: float
    time_to_90pct_minutes: float

    names = ("size", "friendships_ratio", "interactions_ratio", "lifetime", "time_to_90pct")

    def values(self):
        return tuple(float(v) for v in astuple(self))


@dataclass(frozen=True)
class TopologicalFeatures:
    avg_degree: float
    clustering: float
    assortativity: float
    avg_path_length: float
    diameter: int

    names = ("avg_degree", "clustering", "assortativity", "avg_path_length", "diameter")

    def values(self):
        return tuple(float(v) for v in astuple(self))


HIGH_LEVEL_NAMES = HighLevelFeatures.names
TOPOLOGICAL_NAMES = TopologicalFeatures.names
assert len(fields(HighLevelFeatures)) == len(HIGH_LEVEL_NAMES)


def time_to_fraction(times, num=9, den=10):
    """Smallest time by which at least ceil(num/den * len(times)) of ``times`` have occurred."""
    if not times:
        return 0
    ordered = sorted(times)
    need = -(-num * len(ordered) // den)  # integer ceiling, 0.9*10 must give 9
    return ordered[max(need, 1) - 1]


def high_level(graph: PropagationGraph) -> HighLevelFeatures:
    n_edges = graph.n_edges
    if n_edges == 0:
        raise DegenerateGraph(f"post {graph.post_id}: graph has no edges")
    n_friend = sum(1 for e in graph.edges if e.type == "friendship")
    times = [e.time for e in graph.edges if e.time is not None]
    lifetime = max(times) / 60.0 if times else 0.0
    return HighLevelFeatures(
        size=n_edges,
        friendships_ratio=n_friend / n_edges,
        interactions_ratio=graph.n_vertices / n_edges,
        lifetime_minutes=lifetime,
        time_to_90pct_minutes=time_to_fraction(times) / 60.0,
    )


def high_level_or_zero(graph: PropagationGraph) -> HighLevelFeatures:
    try:
        return high_level(graph)
    except DegenerateGraph:
        return HighLevelFeatures(0, 0.0, 0.0, 0.0, 0.0)


# ---------------------------------------------------------------- topology

class _Indexed:
    """Integer-indexed edge arrays of a graph (vertex ids sorted)."""

    def __init__(self, graph: PropagationGraph):
        self.nodes = sorted(graph.vertices)
        pos = {v: i for i, v in enumerate(self.nodes)}
        self.seed = pos[graph.seed_id]
        self.n = len(self.nodes)
        m = graph.n_edges
        self.src = np.fromiter((pos[e.u] for e in graph.edges), dtype=np.int64, count=m)
        self.dst = np.fromiter((pos[e.v] for e in graph.edges), dtype=np.int64, count=m)
        self.deg = np.bincount(np.concatenate([self.src, self.dst]), minlength=self.n)
        self._adj = None

    @property
    def adj(self):
        if self._adj is None:
            ones = np.ones(2 * len(self.src), dtype=np.int64)
            rows = np.concatenate([self.src, self.dst])
            cols = np.concatenate([self.dst, self.src])
            self._adj = csr_matrix((ones, (rows, cols)), shape=(self.n, self.n))
        return self._adj


def _ix(graph):
    return graph if isinstance(graph, _Indexed) else _Indexed(graph)


def avg_degree(graph) -> float:
    n = len(graph.vertices)
    if n == 0:
        raise DegenerateGraph("graph has no vertices")
    return 2 * graph.n_edges / n


def global_clustering(graph) -> float:
    """3 * triangles / connected triplets; 0 when there are no triplets or fewer than 3 vertices."""
    g = _ix(graph)
    if g.n < 3:
        return 0.0
    deg = g.deg
    triplets = int((deg * (deg - 1) // 2).sum())
    if triplets == 0:
        return 0.0
    a = g.adj
    # each triangle is counted 6 times in sum((A @ A) * A)
    closed = int((a @ a).multiply(a).sum())
    return closed / 2 / triplets


def assortativity(graph) -> float:
    """Pearson correlation of endpoint degrees over both directions of every edge.

    Returns 0 for fewer than two edges or when all endpoint degrees are equal.
    """
    g = _ix(graph)
    if len(g.src) < 2:
        return 0.0
    du = g.deg[g.src]
    dv = g.deg[g.dst]
    # integer moments over both edge directions; exact, so independent of vertex order.
    # x and y hold the same multiset, hence var(x) == var(y).
    n = 2 * len(du)
    s = int((du + dv).sum())
    sxy = 2 * int((du * dv).sum())
    sxx = int((du * du + dv * dv).sum())
    den = n * sxx - s * s
    if den == 0:
        return 0.0
    r = (n * sxy - s * s) / den
    return min(1.0, max(-1.0, r))


def _seed_distances(graph):
    g = _ix(graph)
    if g.n == 1:
        return np.zeros((1, 1))
    dist = shortest_path(g.adj, method="D", directed=False, unweighted=True)
    if np.isinf(dist).any():
        keep = np.isfinite(dist[g.seed])
        log.warning("graph is disconnected; path features use the seed's component "
                    "(%d of %d vertices)", int(keep.sum()), g.n)
        dist = dist[np.ix_(keep, keep)]
    return dist


def path_stats(graph) -> tuple[float, int]:
    """(average shortest path length, diameter) from one all-pairs BFS."""
    dist = _seed_distances(graph)
    n = dist.shape[0]
    if n < 2:
        return 0.0, 0
    iu = np.triu_indices(n, 1)
    d = dist[iu]
    # hop counts are exact small integers, so the sum is exact
    return float(d.sum()) / len(d), int(d.max())


def avg_path_length(graph) -> float:
    return path_stats(graph)[0]


def diameter(graph) -> int:
    return path_stats(graph)[1]


def topological(graph: PropagationGraph) -> TopologicalFeatures:
    g = _Indexed(graph)
    apl, diam = path_stats(g)
    return TopologicalFeatures(
        avg_degree=avg_degree(graph),
        clustering=global_clustering(g),
        assortativity=assortativity(g),
        avg_path_length=apl,
        diameter=diam,
    )
