"""Domain types, file I/O and validation for posts, interactions and friendships."""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

log = logging.getLogger(__name__)

LABELS = ("science", "conspiracy")
POSITIVE_LABEL = "conspiracy"
KINDS = ("like", "comment", "reshare")
EDGE_TYPES = KINDS + ("friendship",)

# collapse precedence for parallel edges, highest wins
TYPE_RANK = {"friendship": 0, "like": 1, "comment": 2, "reshare": 3}


class CascadeError(Exception):
    pass


class ParseError(CascadeError):
    def __init__(self, path, line_no, msg):
        super().__init__(f"{path}:{line_no}: {msg}")
        self.path = path
        self.line_no = line_no


class UnknownPost(CascadeError):
    pass


class DegenerateGraph(CascadeError):
    pass


@dataclass(frozen=True)
class PostRecord:
    post_id: str
    page_id: str
    label: str
    created_at: int

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r} for post {self.post_id}")
        if not math.isfinite(self.created_at) or self.created_at < 0:
            raise ValueError(f"bad created_at {self.created_at!r} for post {self.post_id}")


@dataclass(frozen=True)
class InteractionRecord:
    post_id: str
    user_id: str
    kind: str
    timestamp: Optional[int] = None
    via_user_id: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown interaction kind {self.kind!r}")
        if self.kind != "like" and self.timestamp is None:
            raise ValueError(f"{self.kind} by {self.user_id} on {self.post_id} has no timestamp")
        if self.via_user_id is not None and self.via_user_id == self.user_id:
            raise ValueError(f"interaction by {self.user_id} is via itself")


class FriendshipStore:
    """Undirected, irreflexive, deduplicated user adjacency."""

    def __init__(self, pairs: Iterable[tuple[str, str]] = ()):
        self._adj: dict[str, set[str]] = {}
        for a, b in pairs:
            self.add(a, b)

    def add(self, a: str, b: str) -> None:
        if a == b:
            raise ValueError(f"self-friendship {a!r}")
        self._adj.setdefault(a, set()).add(b)
        self._adj.setdefault(b, set()).add(a)

    def are_friends(self, a: str, b: str) -> bool:
        return b in self._adj.get(a, ())

    def friends_of(self, a: str) -> frozenset[str]:
        return frozenset(self._adj.get(a, ()))

    def neighbors(self, a: str) -> set[str]:
        # read-only view, callers must not mutate
        return self._adj.get(a, _EMPTY)

    def users(self):
        return self._adj.keys()

    def edges(self) -> list[tuple[str, str]]:
        """Each undirected edge once, as a sorted (a, b) with a < b."""
        return sorted((a, b) for a, nbrs in self._adj.items() for b in nbrs if a < b)

    def __len__(self):
        return sum(len(n) for n in self._adj.values()) // 2

    def __eq__(self, other):
        return isinstance(other, FriendshipStore) and self._adj == other._adj

    def __repr__(self):
        return f"FriendshipStore(users={len(self._adj)}, edges={len(self)})"


_EMPTY: set = set()


@dataclass(frozen=True, order=True)
class PropEdge:
    """Undirected edge, endpoints stored sorted (u < v); time is seconds since post creation."""

    u: str
    v: str
    type: str
    time: Optional[int] = None

    def __post_init__(self):
        if self.u == self.v:
            raise ValueError(f"self-loop on {self.u!r}")
        if self.u > self.v:
            u, v = self.v, self.u
            object.__setattr__(self, "u", u)
            object.__setattr__(self, "v", v)
        if self.type not in EDGE_TYPES:
            raise ValueError(f"unknown edge type {self.type!r}")
        if self.time is not None and self.time < 0:
            raise ValueError(f"negative edge time {self.time}")

    @property
    def pair(self) -> tuple[str, str]:
        return (self.u, self.v)


@dataclass(frozen=True)
class PropagationGraph:
    post_id: str
    seed_id: str
    vertices: frozenset
    edges: tuple  # PropEdge, sorted by endpoints
    horizon: Optional[int] = None  # minutes; None for the final graph

    def __post_init__(self):
        if self.seed_id not in self.vertices:
            raise ValueError("seed must be a vertex")
        seen = set()
        for e in self.edges:
            if e.pair in seen:
                raise ValueError(f"parallel edge {e.pair}")
            seen.add(e.pair)
            if e.u not in self.vertices or e.v not in self.vertices:
                raise ValueError(f"edge {e.pair} has an endpoint outside the vertex set")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_pairs(self) -> set[tuple[str, str]]:
        return {e.pair for e in self.edges}

    def degrees(self) -> dict[str, int]:
        deg = dict.fromkeys(self.vertices, 0)
        for e in self.edges:
            deg[e.u] += 1
            deg[e.v] += 1
        return deg


@dataclass(frozen=True)
class FeatureVector:
    schema: str  # "early-18" or "final-28"
    names: tuple
    values: tuple

    def __post_init__(self):
        expected = {"early-18": 18, "final-28": 28}.get(self.schema)
        if expected is None:
            raise ValueError(f"unknown schema {self.schema!r}")
        if len(self.names) != expected or len(self.values) != expected:
            raise ValueError(f"{self.schema} needs {expected} entries, got {len(self.values)}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("feature values must be finite")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))


@dataclass
class CascadeDataset:
    posts: list
    interactions: list
    friends: FriendshipStore

    def by_post(self) -> dict[str, list]:
        """Interactions grouped per post_id; posts without interactions map to []."""
        groups = {p.post_id: [] for p in self.posts}
        for it in self.interactions:
            groups.setdefault(it.post_id, []).append(it)
        return groups

    def label_counts(self) -> dict[str, int]:
        counts = dict.fromkeys(LABELS, 0)
        for p in self.posts:
            counts[p.label] += 1
        return counts


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


# ---------------------------------------------------------------- validation

def validate_dataset(posts, interactions, friends) -> ValidationReport:
    """Collect every consistency violation; never raises.

    ``friends`` may be a FriendshipStore (symmetric by construction) or a raw
    list of (user, friend) rows, in which case one-directional rows are
    reported as warnings and symmetrized.
    """
    report = ValidationReport()
    created = {}
    for p in posts:
        if p.post_id in created:
            report.violations.append(f"duplicate post_id {p.post_id}")
        created[p.post_id] = p.created_at

    for i, it in enumerate(interactions):
        if it.post_id not in created:
            report.violations.append(f"interaction {i} references unknown post {it.post_id}")
            continue
        if it.timestamp is not None and it.timestamp < created[it.post_id]:
            report.violations.append(
                f"interaction {i} precedes post: {it.user_id} {it.kind} on {it.post_id}")

    if not isinstance(friends, FriendshipStore):
        rows = [tuple(r) for r in friends]
        present = set(rows)
        one_way = []
        for a, b in rows:
            if a == b:
                report.violations.append(f"self-friendship row ({a},{b})")
            elif (b, a) not in present:
                one_way.append(f"({a},{b})")
        if one_way:
            shown = ", ".join(one_way[:3]) + (", ..." if len(one_way) > 3 else "")
            report.warnings.append(
                f"{len(one_way)} friendship rows have no reverse row and were symmetrized: {shown}")
    return report


# ---------------------------------------------------------------- file I/O

def _read_jsonl(path):
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, no, f"malformed JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise ParseError(path, no, "expected a JSON object")
            yield no, obj


def read_posts(path) -> list[PostRecord]:
    posts = []
    for no, obj in _read_jsonl(path):
        try:
            posts.append(PostRecord(str(obj["post_id"]), str(obj["page_id"]),
                                    obj["label"], int(obj["created_at"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(path, no, f"bad post record: {exc}") from None
    return posts


def read_interactions(path) -> list[InteractionRecord]:
    out = []
    for no, obj in _read_jsonl(path):
        try:
            ts = obj.get("timestamp")
            via = obj.get("via_user_id")
            out.append(InteractionRecord(
                str(obj["post_id"]), str(obj["user_id"]), obj["kind"],
                None if ts is None else int(ts),
                None if via is None else str(via)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(path, no, f"bad interaction record: {exc}") from None
    return out


def read_friendship_rows(path) -> list[tuple[str, str]]:
    path = Path(path)
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return rows
        if [h.strip() for h in header] != ["user_id", "friend_id"]:
            raise ParseError(path, 1, f"expected header user_id,friend_id, got {header}")
        for no, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(path, no, f"expected 2 columns, got {len(row)}")
            rows.append((row[0].strip(), row[1].strip()))
    return rows


def read_friendships(path) -> FriendshipStore:
    store = FriendshipStore()
    for a, b in read_friendship_rows(path):
        if a != b:
            store.add(a, b)
    return store


def load_dataset(posts_path, interactions_path, friendships_path):
    """Parse the three input files. Returns (dataset, validation report)."""
    posts = read_posts(posts_path)
    interactions = read_interactions(interactions_path)
    rows = read_friendship_rows(friendships_path)
    report = validate_dataset(posts, interactions, rows)
    for w in report.warnings:
        log.warning(w)
    friends = FriendshipStore((a, b) for a, b in rows if a != b)
    return CascadeDataset(posts, interactions, friends), report


def write_dataset(ds: CascadeDataset, out_dir) -> dict[str, Path]:
    """Write posts.jsonl / interactions.jsonl / friendships.csv, sorted for byte-stable output."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "posts": out_dir / "posts.jsonl",
        "interactions": out_dir / "interactions.jsonl",
        "friendships": out_dir / "friendships.csv",
    }
    with paths["posts"].open("w", encoding="utf-8") as fh:
        for p in sorted(ds.posts, key=lambda p: p.post_id):
            fh.write(json.dumps({"post_id": p.post_id, "page_id": p.page_id,
                                 "label": p.label, "created_at": p.created_at}) + "\n")
    with paths["interactions"].open("w", encoding="utf-8") as fh:
        for it in ds.interactions:
            fh.write(json.dumps({"post_id": it.post_id, "user_id": it.user_id, "kind": it.kind,
                                 "timestamp": it.timestamp, "via_user_id": it.via_user_id}) + "\n")
    with paths["friendships"].open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user_id", "friend_id"])
        # both directions, so the file is symmetric as written
        for a, b in ds.friends.edges():
            w.writerow([a, b])
            w.writerow([b, a])
    return paths
