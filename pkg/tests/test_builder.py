import random

import pytest
from hypothesis import given, settings, strategies as st

from cascadelab.builder import (CascadeIndex, InvalidStep, build_final_graph, build_snapshot,
                                dump_graph, parse_graph, snapshot_series)
from cascadelab.model import (FriendshipStore, InteractionRecord, PostRecord, PropEdge,
                              PropagationGraph, UnknownPost)
from cascadelab.synthgen import SpreadParams, gen_cascade, gen_friendship_graph

from conftest import T0, minutes
from oracles import bfs, graph_as_dicts, naive_graph


def test_via_scenario_structure(via_scenario):
    g = build_final_graph(*via_scenario)
    assert g.vertices == {"s", "v2", "v3", "v4"}
    edges = {e.pair: e.type for e in g.edges}
    assert edges == {("s", "v2"): "comment", ("s", "v4"): "comment",
                     ("v2", "v4"): "friendship", ("v2", "v3"): "reshare"}
    assert ("s", "v3") not in edges  # known provenance: no seed edge


def test_empty_cascade_is_seed_only():
    post = PostRecord("p", "s", "science", T0)
    g = build_final_graph(post, [], FriendshipStore())
    assert g.vertices == {"s"} and g.edges == ()


def test_star_of_direct_interactors():
    post = PostRecord("p", "s", "science", T0)
    inter = [InteractionRecord("p", u, "comment", minutes(i + 1)) for i, u in enumerate("abc")]
    g = build_final_graph(post, inter, FriendshipStore([("a", "x"), ("b", "y")]))
    assert g.n_vertices == 4 and g.n_edges == 3
    assert all(e.type != "friendship" for e in g.edges)


def test_unknown_post_rejected(via_scenario):
    post, inter, friends = via_scenario
    with pytest.raises(UnknownPost):
        build_final_graph(post, inter + [InteractionRecord("other", "x", "like")], friends)


def test_collapse_precedence_and_earliest_time():
    post = PostRecord("p", "s", "science", T0)
    inter = [InteractionRecord("p", "a", "like"),
             InteractionRecord("p", "a", "comment", minutes(50)),
             InteractionRecord("p", "a", "reshare", minutes(90)),
             InteractionRecord("p", "b", "like")]
    g = build_final_graph(post, inter, FriendshipStore([("a", "b")]))
    edges = {e.pair: (e.type, e.time) for e in g.edges}
    assert edges[("a", "s")] == ("reshare", 50 * 60)
    assert edges[("b", "s")] == ("like", None)
    # b only has an untimed like, so the friendship edge has no time
    assert edges[("a", "b")] == ("friendship", None)


def test_snapshot_time_filter_and_closed_boundary():
    post = PostRecord("p", "s", "science", T0)
    inter = [InteractionRecord("p", "a", "comment", minutes(10)),
             InteractionRecord("p", "b", "comment", minutes(45)),
             InteractionRecord("p", "c", "comment", minutes(60))]
    assert build_snapshot(post, inter, FriendshipStore(), 30).vertices == {"s", "a"}
    # exactly at delta is included
    assert build_snapshot(post, inter, FriendshipStore(), 60).vertices == {"s", "a", "b", "c"}


def test_snapshot_excludes_untimed_likes():
    post = PostRecord("p", "s", "science", T0)
    inter = [InteractionRecord("p", u, "like") for u in "abc"]
    snap = build_snapshot(post, inter, FriendshipStore(), 30)
    assert snap.vertices == {"s"} and snap.edges == ()
    assert build_final_graph(post, inter, FriendshipStore()).n_edges == 3


def test_snapshot_at_lifetime_equals_final(via_scenario):
    final = build_final_graph(*via_scenario)
    snap = build_snapshot(*via_scenario, 40)
    assert graph_as_dicts(snap) == graph_as_dicts(final)


@pytest.mark.parametrize("delta", [0, -30, 2.5])
def test_snapshot_rejects_bad_delta(via_scenario, delta):
    with pytest.raises(InvalidStep):
        build_snapshot(*via_scenario, delta)


def test_series_default_length(via_scenario):
    series = snapshot_series(*via_scenario)
    assert len(series) == 96
    assert [g.horizon for g in series[:3]] == [30, 60, 90]


@pytest.mark.parametrize("step,horizon", [(0, 2880), (-30, 2880), (7, 2880), (30, 0)])
def test_series_invalid_step(via_scenario, step, horizon):
    with pytest.raises(InvalidStep):
        snapshot_series(*via_scenario, step_minutes=step, horizon_minutes=horizon)


def test_saturated_series_is_constant():
    post = PostRecord("p", "s", "science", T0)
    inter = [InteractionRecord("p", u, "comment", minutes(i)) for i, u in enumerate("abcde")]
    series = snapshot_series(post, inter, FriendshipStore([("a", "b")]))
    first = graph_as_dicts(series[0])
    assert all(graph_as_dicts(g) == first for g in series)


def test_via_user_without_interaction_attached_to_seed(caplog):
    post = PostRecord("p", "s", "science", T0)
    inter = [InteractionRecord("p", "b", "reshare", minutes(5), via_user_id="ghost")]
    g = build_final_graph(post, inter, FriendshipStore())
    assert g.vertices == {"s", "b", "ghost"}
    assert {e.pair for e in g.edges} == {("b", "ghost"), ("ghost", "s")}
    assert "ghost" in caplog.text
    # the snapshot that admits b also admits its via-root, keeping it seed-connected
    snap = build_snapshot(post, inter, FriendshipStore(), 30)
    assert snap.vertices == {"s", "b", "ghost"}


def test_via_user_acting_later_is_pulled_forward():
    post = PostRecord("p", "s", "science", T0)
    inter = [InteractionRecord("p", "b", "reshare", minutes(5), via_user_id="a"),
             InteractionRecord("p", "a", "comment", minutes(100))]
    idx = CascadeIndex(post, inter, FriendshipStore())
    assert idx.warnings
    snap = idx.graph(30 * 60)
    assert _connected_to_seed(snap)


# ---------------------------------------------------------------- random cascades

def _random_cascade(seed):
    """Synthetic cascade with random spreading parameters on a small friendship graph."""
    r = random.Random(seed)
    friends = gen_friendship_graph(r.randint(20, 120), r.randint(1, 4), seed)
    params = SpreadParams(direct_rate=r.uniform(0.5, 20), decay=r.uniform(20, 600),
                          friend_prob=r.uniform(0, 0.3), via_prob=r.random(),
                          like_frac=r.uniform(0, 0.6), horizon=2880)
    post, inter = gen_cascade(friends, "seedpage", params, seed, created_at=T0)
    return post, inter, friends


def _connected_to_seed(g):
    adj = {v: set() for v in g.vertices}
    for e in g.edges:
        adj[e.u].add(e.v)
        adj[e.v].add(e.u)
    return set(bfs(adj, g.seed_id)) == set(g.vertices)


def check_series_against_rebuild(post, inter, friends):
    series = snapshot_series(post, inter, friends)
    prev = None
    for k, g in enumerate(series, 1):
        cutoff = 30 * k * 60
        assert graph_as_dicts(g) == naive_graph(post, inter, friends, cutoff)
        assert graph_as_dicts(g) == graph_as_dicts(build_snapshot(post, inter, friends, 30 * k))
        assert _connected_to_seed(g)
        if prev is not None:
            assert prev.vertices <= g.vertices
            assert prev.edge_pairs() <= g.edge_pairs()
        prev = g
    return series


@pytest.mark.parametrize("seed", range(40))
def test_incremental_series_matches_rebuild(seed):
    check_series_against_rebuild(*_random_cascade(seed))


@pytest.mark.parametrize("seed", range(20))
def test_final_graph_matches_naive_rules(seed):
    post, inter, friends = _random_cascade(seed)
    g = build_final_graph(post, inter, friends)
    assert graph_as_dicts(g) == naive_graph(post, inter, friends)
    assert _connected_to_seed(g)
    degrees = g.degrees()
    assert all(d >= 1 for v, d in degrees.items() if v != g.seed_id)


@pytest.mark.parametrize("seed", range(10))
def test_horizon_snapshot_equals_final_without_likes(seed):
    post, inter, friends = _random_cascade(seed)
    timed = [i for i in inter if i.timestamp is not None]
    # drop via references to users whose only interaction was an untimed like
    users = {i.user_id for i in timed}
    timed = [i if i.via_user_id in users or i.via_user_id is None else
             InteractionRecord(i.post_id, i.user_id, i.kind, i.timestamp) for i in timed]
    final = build_final_graph(post, timed, friends)
    assert graph_as_dicts(snapshot_series(post, timed, friends)[-1]) == graph_as_dicts(final)


@pytest.mark.parametrize("seed", range(10))
def test_builder_ignores_input_order(seed):
    post, inter, friends = _random_cascade(seed)
    shuffled = list(inter)
    random.Random(seed).shuffle(shuffled)
    assert build_final_graph(post, shuffled, friends) == build_final_graph(post, inter, friends)
    assert snapshot_series(post, shuffled, friends) == snapshot_series(post, inter, friends)


# ---------------------------------------------------------------- edge-list dump

ids = st.sampled_from([f"n{i}" for i in range(12)])
edge_types = st.sampled_from(["like", "comment", "reshare", "friendship"])
times = st.one_of(st.none(), st.integers(0, 10**6))


@st.composite
def graphs(draw):
    pairs = draw(st.sets(st.tuples(ids, ids).filter(lambda p: p[0] < p[1]), max_size=30))
    edges = tuple(sorted(PropEdge(u, v, draw(edge_types), draw(times)) for u, v in pairs))
    vertices = {"n0"} | {x for p in pairs for x in p}
    return PropagationGraph("post", "n0", frozenset(vertices), edges)


@settings(max_examples=200, deadline=None)
@given(graphs())
def test_dump_round_trip(g):
    back = parse_graph(dump_graph(g))
    assert back == g


def test_dump_format(via_scenario):
    text = dump_graph(build_final_graph(*via_scenario))
    lines = text.splitlines()
    assert lines[0] == "# p s 4"
    assert "v2,v3,reshare,2400" in lines
    assert len(lines) == 5
