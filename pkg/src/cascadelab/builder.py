"""Potential propagation graphs, final and time-bounded, for a single post.

Edge rule, per interaction of user ``u``:

* the interaction carries ``via_user_id = w``: edge ``(u, w)`` of the interaction's kind;
* otherwise: edge ``(u, seed)`` of the interaction's kind.

On top of that, every pair of interacting users who are friends gets a
``friendship`` edge, timed when the later of the two first acted. Parallel
edges collapse to one, keeping the highest-precedence type
(reshare > comment > like > friendship) and the earliest known time.

Untimed likes appear in the final graph only.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

from .model import (CascadeError, PropEdge, PropagationGraph, TYPE_RANK, UnknownPost)

log = logging.getLogger(__name__)

RANK_TYPE = {r: t for t, r in TYPE_RANK.items()}
FRIENDSHIP_RANK = TYPE_RANK["friendship"]

DEFAULT_STEP = 30
DEFAULT_HORIZON = 2880


class InvalidStep(CascadeError, ValueError):
    pass


class CascadeIndex:
    """Pre-digested interactions of one post: edge contributions plus admission times.

    A contribution is ``(time, pair, rank)``; time is seconds since post
    creation or None for untimed likes.
    """

    def __init__(self, post, interactions, friends):
        self.post = post
        self.seed = post.page_id
        self.warnings: list[str] = []
        created = post.created_at

        records = []  # (user, rank, rel_time, via)
        for it in interactions:
            if it.post_id != post.post_id:
                raise UnknownPost(f"interaction on {it.post_id} passed for post {post.post_id}")
            rel = None
            if it.timestamp is not None:
                rel = it.timestamp - created
                if rel < 0:
                    raise CascadeError(f"{it.user_id} {it.kind} precedes post {post.post_id}")
            records.append((it.user_id, TYPE_RANK[it.kind], rel, it.via_user_id))

        first: dict[str, Optional[int]] = {}
        for user, _, rel, _ in records:
            prev = first.get(user, "missing")
            if prev == "missing":
                first[user] = rel
            elif rel is not None and (prev is None or rel < prev):
                first[user] = rel

        # via targets must be present no later than the interaction that cites them
        needed: dict[str, tuple] = {}
        for user, rank, rel, via in records:
            if via is None:
                continue
            have = first.get(via, "missing")
            if have == "missing" or (rel is not None and (have is None or have > rel)):
                cur = needed.get(via)
                if cur is None or _earlier(rel, cur[1]):
                    needed[via] = (rank, rel)
        for via in sorted(needed):
            rank, rel = needed[via]
            msg = (f"post {post.post_id}: via-user {via} has no interaction at or before "
                   f"the one citing it; attached to the seed at t={rel}")
            self.warnings.append(msg)
            log.warning(msg)
            records.append((via, rank, rel, None))
            have = first.get(via)
            if via not in first or (rel is not None and (have is None or rel < have)):
                first[via] = rel

        self.first_time = first
        contribs = []
        for user, rank, rel, via in records:
            other = self.seed if via is None else via
            pair = (user, other) if user < other else (other, user)
            contribs.append((rel, pair, rank))

        for a in first:
            for b in friends.neighbors(a):
                if b <= a or b not in first:
                    continue
                ta, tb = first[a], first[b]
                t = None if ta is None or tb is None else max(ta, tb)
                contribs.append((t, (a, b), FRIENDSHIP_RANK))
        self.contribs = contribs
        self.timed = sorted((c for c in contribs if c[0] is not None),
                            key=lambda c: (c[0], c[1], c[2]))

    def graph(self, cutoff_seconds: Optional[int] = None, horizon: Optional[int] = None):
        """Collapse contributions admitted by ``cutoff_seconds`` (None = all, final graph)."""
        best: dict[tuple, list] = {}
        if cutoff_seconds is None:
            vertices = {self.seed, *self.first_time}
            pool = self.contribs
        else:
            vertices = {self.seed}
            vertices.update(u for u, t in self.first_time.items()
                            if t is not None and t <= cutoff_seconds)
            pool = [c for c in self.timed if c[0] <= cutoff_seconds]
        for t, pair, rank in pool:
            _merge(best, t, pair, rank)
        return _freeze(self.post.post_id, self.seed, vertices, best, horizon)


def _earlier(a, b):
    if a is None:
        return False
    return b is None or a < b


def _merge(best, t, pair, rank):
    """Fold one contribution into ``best``; returns the pair's previous rank (None if new)."""
    cur = best.get(pair)
    if cur is None:
        best[pair] = [rank, t]
        return None
    old = cur[0]
    if rank > old:
        cur[0] = rank
    if t is not None and (cur[1] is None or t < cur[1]):
        cur[1] = t
    return old


def _freeze(post_id, seed, vertices, best, horizon):
    edges = tuple(PropEdge(u, v, RANK_TYPE[r], t) for (u, v), (r, t) in sorted(best.items()))
    return PropagationGraph(post_id, seed, frozenset(vertices), edges, horizon)


def build_final_graph(post, interactions, friends) -> PropagationGraph:
    return CascadeIndex(post, interactions, friends).graph()


def build_snapshot(post, interactions, friends, delta_minutes: int) -> PropagationGraph:
    """Graph of the interactions timed within ``[0, delta_minutes]`` of creation, inclusive."""
    if int(delta_minutes) != delta_minutes or delta_minutes <= 0:
        raise InvalidStep(f"delta_minutes must be a positive integer, got {delta_minutes}")
    idx = CascadeIndex(post, interactions, friends)
    return idx.graph(int(delta_minutes) * 60, horizon=int(delta_minutes))


def check_steps(step_minutes, horizon_minutes) -> int:
    if step_minutes <= 0 or horizon_minutes <= 0 or horizon_minutes % step_minutes:
        raise InvalidStep(f"horizon {horizon_minutes} is not a positive multiple of step {step_minutes}")
    return horizon_minutes // step_minutes


def sweep(index: CascadeIndex, step_minutes=DEFAULT_STEP, n_steps=None,
          horizon_minutes=DEFAULT_HORIZON):
    """Walk the timed contributions once, yielding the live state after every step.

    Yields ``(delta_minutes, vertices, best, changes)`` where ``best`` maps
    pair -> [rank, time] and ``changes`` lists ``(old_rank, new_rank)`` for the
    pairs touched during the step (old_rank None for new pairs). The
    containers are mutated in place between yields.
    """
    total = check_steps(step_minutes, horizon_minutes)
    n_steps = total if n_steps is None else n_steps
    timed = index.timed
    users = sorted(((t, u) for u, t in index.first_time.items() if t is not None))
    vertices = {index.seed}
    best: dict[tuple, list] = {}
    ci = ui = 0
    for k in range(1, n_steps + 1):
        cutoff = k * step_minutes * 60
        while ui < len(users) and users[ui][0] <= cutoff:
            vertices.add(users[ui][1])
            ui += 1
        changes = []
        while ci < len(timed) and timed[ci][0] <= cutoff:
            t, pair, rank = timed[ci]
            old = _merge(best, t, pair, rank)
            if old is None or best[pair][0] != old:
                changes.append((old, best[pair][0]))
            ci += 1
        yield k * step_minutes, vertices, best, changes


def snapshot_series(post, interactions, friends, step_minutes: int = DEFAULT_STEP,
                    horizon_minutes: int = DEFAULT_HORIZON) -> list[PropagationGraph]:
    """Snapshots at step, 2*step, ..., horizon, each extending the previous one."""
    check_steps(step_minutes, horizon_minutes)
    idx = CascadeIndex(post, interactions, friends)
    out = []
    for delta, vertices, best, changes in sweep(idx, step_minutes, None, horizon_minutes):
        if out and not changes and len(vertices) == out[-1].n_vertices:
            # nothing arrived during this step, share the frozen sets
            last = out[-1]
            out.append(PropagationGraph(last.post_id, last.seed_id, last.vertices, last.edges, delta))
        else:
            out.append(_freeze(post.post_id, idx.seed, vertices, best, delta))
    return out


# ---------------------------------------------------------------- edge-list dump

def dump_graph(graph: PropagationGraph) -> str:
    """Edge-list text: header ``# post_id seed_id n_vertices`` then ``u,v,type,time|null``.

    Identifiers must not contain commas or whitespace.
    """
    lines = [f"# {graph.post_id} {graph.seed_id} {graph.n_vertices}"]
    for e in graph.edges:
        lines.append(f"{e.u},{e.v},{e.type},{'null' if e.time is None else e.time}")
    return "\n".join(lines) + "\n"


def parse_graph(text: str, horizon: Optional[int] = None) -> PropagationGraph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise CascadeError("graph dump must start with '# post_id seed_id n_vertices'")
    parts = lines[0][1:].split()
    if len(parts) != 3:
        raise CascadeError(f"bad graph header {lines[0]!r}")
    post_id, seed_id, n_vertices = parts[0], parts[1], int(parts[2])
    vertices = {seed_id}
    edges = []
    for no, ln in enumerate(lines[1:], 2):
        cols = ln.split(",")
        if len(cols) != 4:
            raise CascadeError(f"line {no}: expected u,v,type,time")
        u, v, typ, t = cols
        edges.append(PropEdge(u, v, typ, None if t == "null" else int(t)))
        vertices.update((u, v))
    if len(vertices) != n_vertices:
        raise CascadeError(f"header says {n_vertices} vertices, edges cover {len(vertices)}")
    return PropagationGraph(post_id, seed_id, frozenset(vertices), tuple(sorted(edges)), horizon)


def write_graph(graph: PropagationGraph, path) -> None:
    Path(path).write_text(dump_graph(graph), encoding="utf-8")


def read_graph(path, horizon=None) -> PropagationGraph:
    return parse_graph(Path(path).read_text(encoding="utf-8"), horizon)
