import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cascadelab.model import (FriendshipStore, InteractionRecord, PostRecord, PropEdge,
                              PropagationGraph)

T0 = 1_600_000_000


def minutes(m):
    return T0 + 60 * m


@pytest.fixture
def via_scenario():
    """Seed s; v2 and v4 interact directly; v3 reshares via v2; v1 never interacts."""
    post = PostRecord("p", "s", "conspiracy", T0)
    inter = [
        InteractionRecord("p", "v2", "comment", minutes(10)),
        InteractionRecord("p", "v4", "comment", minutes(20)),
        InteractionRecord("p", "v3", "reshare", minutes(40), via_user_id="v2"),
    ]
    friends = FriendshipStore([("v1", "v2"), ("v2", "v3"), ("v2", "v4"), ("v1", "v4")])
    return post, inter, friends


def make_graph(n_vertices, pairs, seed_id="0", edge_type="friendship"):
    names = [str(i) for i in range(n_vertices)]
    edges = tuple(sorted(PropEdge(names[a], names[b], edge_type, None) for a, b in pairs))
    return PropagationGraph("g", seed_id, frozenset(names), edges)


def random_connected_pairs(n, extra, rng):
    """Random spanning tree on n vertices plus ``extra`` random extra edges."""
    pairs = set()
    for v in range(1, n):
        u = rng.randrange(v)
        pairs.add((u, v))
    for _ in range(extra):
        a, b = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if a != b:
            pairs.add((min(a, b), max(a, b)))
    return sorted(pairs)


def random_graph(rng, max_n=200):
    n = rng.randint(1, max_n)
    extra = rng.randint(0, 3 * n)
    pairs = random_connected_pairs(n, extra, rng)
    # shuffle labels so that vertex "0" (the seed) is not always the tree root
    perm = list(range(n))
    rng.shuffle(perm)
    return make_graph(n, [(min(perm[a], perm[b]), max(perm[a], perm[b])) for a, b in pairs])


@pytest.fixture
def rng():
    return random.Random(12345)
