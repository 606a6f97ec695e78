import io
import itertools

import pytest
from hypothesis import given, settings, strategies as st

from mopath import oracle
from mopath.graph import MultiGraph
from mopath.kpc import (OverlayEdge, OverlayError, build_overlay, build_overlay_edges, build_vertex_cover,
                        cover_stats, domination_prune, insert_nondominated, load_overlay, must_keep,
                        save_overlay, triangle_prune, validate_against)

V1, V2, V3, V4, V5 = range(5)


def saved(ov):
    buf = io.StringIO()
    save_overlay(ov, buf)
    return buf.getvalue()


def star(n_leaves=4):
    return MultiGraph.from_edges(n_leaves + 1, [(0, i, (1, 1)) for i in range(1, n_leaves + 1)])


# --- cover ---

def test_must_keep_incoming_path(chain):
    assert must_keep(chain, {V3, V4, V5}, V3, 3)


def test_must_keep_single_edge():
    g = MultiGraph.from_edges(2, [(0, 1, (1, 1))])
    assert not must_keep(g, {0, 1}, 0, 2)


def test_must_keep_isolated_vertex():
    g = MultiGraph.from_edges(3, [(1, 2, (1, 1))])
    for k in (2, 3, 5):
        assert not must_keep(g, {0, 1, 2}, 0, k)


def test_cover_of_chain(chain):
    assert build_vertex_cover(chain, 3) == [V3]


def test_cover_of_single_edge():
    g = MultiGraph.from_edges(2, [(0, 1, (1, 1))])
    assert build_vertex_cover(g, 2) == [1]


def test_cover_keeps_goals(chain):
    assert V1 in build_vertex_cover(chain.with_goals({V1}), 3)


def test_cover_rejects_small_k(chain):
    with pytest.raises(ValueError):
        build_vertex_cover(chain, 1)


def test_star_cover_depends_on_scan_order():
    g = star()
    ov, report = build_overlay(g, 2)
    assert ov.cover == (1, 2, 3, 4)
    assert report.cover_ratio == pytest.approx(4 / 5)
    assert build_vertex_cover(g, 2, order=[1, 2, 3, 4, 0]) == [0]


def test_cover_stats_ratio(chain):
    ov, _ = build_overlay(chain, 3)
    stats = cover_stats(chain, ov)
    assert stats["cover_ratio"] == pytest.approx(1 / 5)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 9), st.sampled_from([0.2, 0.35, 0.5]), st.integers(2, 5))
def test_cover_hits_every_k_path_and_is_minimal(seed, n, p, k):
    g = oracle.random_instance(seed, n, p, q=1)
    cover = set(build_vertex_cover(g, k))
    for path in oracle.enumerate_k_paths(g, k):
        assert cover & set(path)
    # greedy removal leaves no redundant vertex behind
    for v in cover:
        assert must_keep(g, cover, v, k)


# --- overlay edges ---

def test_chain_overlay_edges(chain):
    ov = build_overlay_edges(chain, [V1, V3, V5], k=3)
    got = {(ov.cover[e.source], ov.cover[e.target]): (e.cost, e.vertices) for e in ov.edges}
    assert got == {(V1, V3): ((2.0, 2.0), (V1, V2, V3)), (V3, V5): ((2.0, 2.0), (V3, V4, V5))}


def diamond_vw(direct=None):
    # v=0, a=1, b=2, w=3
    edges = [(0, 1, (1, 3)), (1, 3, (1, 3)), (0, 2, (3, 1)), (2, 3, (3, 1))]
    if direct:
        edges.append((0, 3, direct))
    return MultiGraph.from_edges(4, edges)


def test_incomparable_bundle_kept():
    ov = build_overlay_edges(diamond_vw(), [0, 3], k=3)
    assert sorted(e.cost for e in ov.bundle(0, 1)) == [(2.0, 6.0), (6.0, 2.0)]


def test_duplicate_cost_collapsed():
    ov = build_overlay_edges(diamond_vw((2, 6)), [0, 3], k=3)
    assert sorted(e.cost for e in ov.bundle(0, 1)) == [(2.0, 6.0), (6.0, 2.0)]


def test_insert_nondominated():
    bundle = []
    assert insert_nondominated(bundle, (2, 2), "a")
    assert not insert_nondominated(bundle, (2, 2), "b")
    assert insert_nondominated(bundle, (1, 3), "c")
    assert insert_nondominated(bundle, (1, 1), "d")
    assert bundle == [((1, 1), "d")]


def edge(cost):
    return OverlayEdge(0, 1, cost, (0, 1), (0,))


def test_exact_prune_removes_duplicate():
    kept = domination_prune([edge((2, 2)), edge((1, 3)), edge((2, 2))], "exact")
    assert [e.cost for e in kept] == [(2, 2), (1, 3)]


def test_fast_prune_is_incomplete():
    bundle = [edge(c) for c in [(1, 5), (5, 1), (3, 3), (4, 4)]]
    assert [e.cost for e in domination_prune(bundle, "exact")] == [(1, 5), (5, 1), (3, 3)]
    assert domination_prune(bundle, "fast") == bundle


def test_prune_singleton_and_bad_mode():
    assert domination_prune([edge((1, 1))], "exact") == [edge((1, 1))]
    assert domination_prune([edge((1, 1))], "fast") == [edge((1, 1))]
    with pytest.raises(ValueError):
        domination_prune([edge((1, 1))], "slow")


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5)), min_size=1, max_size=12))
def test_fast_screen_keeps_superset_of_exact(costs):
    bundle = [edge(c) for c in costs]
    exact = domination_prune(bundle, "exact")
    fast = domination_prune(bundle, "fast")
    assert all(any(e is f for f in fast) for e in exact)
    assert {e.cost for e in exact} == oracle._pairwise_front(costs)
    assert len(exact) == len(oracle._pairwise_front(costs))


# --- triangle pruning ---

def triangle(direct):
    g = MultiGraph.from_edges(3, [(0, 1, (1, 1)), (1, 2, (1, 1)), (0, 2, direct)])
    return triangle_prune(build_overlay_edges(g, [0, 1, 2], k=2))


def test_triangle_removes_dominated_edge():
    assert triangle((3, 3)).bundle(0, 2) == []


def test_triangle_keeps_incomparable_edge():
    assert [e.cost for e in triangle((2, 1)).bundle(0, 2)] == [(2.0, 1.0)]


def test_triangle_without_intermediate():
    g = MultiGraph.from_edges(2, [(0, 1, (1, 1)), (0, 1, (2, 0))])
    ov = build_overlay_edges(g, [0, 1], k=2)
    assert triangle_prune(ov) == ov


def test_triangle_with_zero_cycle_keeps_connectivity():
    g = MultiGraph.from_edges(3, [(0, 1, (0, 0)), (1, 0, (0, 0)), (0, 2, (1, 1)), (1, 2, (1, 1))])
    ov = triangle_prune(build_overlay_edges(g, [0, 1, 2], k=2))
    assert ov.bundle(0, 2) or ov.bundle(1, 2)
    assert ov.bundle(0, 2) or ov.bundle(0, 1)


# --- soundness and sequence bounds ---

def overlay_front(ov, a, b):
    """Pareto set of overlay-path costs between cover ids (brute force)."""
    costs = []

    def dfs(u, cost, seen):
        if u == b:
            costs.append(cost)
            return
        for w, ids in ov.out[u]:
            if w in seen:
                continue
            for i in ids:
                dfs(w, tuple(x + y for x, y in zip(cost, ov.edges[i].cost)), seen | {w})

    dfs(a, (0.0,) * ov.q, {a})
    return oracle._pairwise_front(costs)


@pytest.mark.parametrize("seed", range(25))
@pytest.mark.parametrize("triangle_on", [False, True])
def test_overlay_soundness(seed, triangle_on):
    g = oracle.random_instance(seed, 8, 0.3, q=2, weight_range=5)
    ov, _ = build_overlay(g, 3, triangle_on)
    validate_against(ov, g)
    for a, b in itertools.permutations(range(len(ov.cover)), 2):
        truth = oracle.enumerate_pareto(g, ov.cover[a], ov.cover[b])
        assert overlay_front(ov, a, b) == truth


def test_sequences_can_exceed_k_vertices():
    g = MultiGraph.from_edges(7, [(i, i + 1, (1, 1)) for i in range(6)])
    ov, _ = build_overlay(g, 3)
    assert ov.cover == (2, 5)
    assert [e.vertices for e in ov.edges] == [(2, 3, 4, 5)]
    for seed in range(30):
        h = oracle.random_instance(seed, 10, 0.25, q=1)
        ovh, _ = build_overlay(h, 3)
        assert all(len(e.vertices) <= ovh.k + 1 for e in ovh.edges)


# --- persistence ---

def test_overlay_roundtrip(diamond):
    ov, _ = build_overlay(diamond.with_goals({3}), 2)
    text = saved(ov)
    back = load_overlay(io.StringIO(text), diamond.with_goals({3}))
    assert back == ov
    assert saved(back) == text


def test_overlay_bad_magic(diamond):
    text = saved(build_overlay(diamond, 2)[0]).replace("kpc-overlay v1", "kpc-overlay v9", 1)
    with pytest.raises(OverlayError, match="magic|version"):
        load_overlay(io.StringIO(text))


def test_overlay_cost_mismatch(chain):
    ov = build_overlay_edges(chain, [V1, V3, V5], k=3)
    text = saved(ov).replace("e 1 3 2 2", "e 1 3 2 3", 1)
    assert text != saved(ov)
    with pytest.raises(OverlayError):
        load_overlay(io.StringIO(text), chain)


def test_overlay_graph_mismatch(chain, diamond):
    ov = build_overlay_edges(chain, [V1, V3, V5], k=3)
    with pytest.raises(OverlayError):
        load_overlay(io.StringIO(saved(ov)), diamond)


def test_negative_weights_rejected():
    g = MultiGraph.from_edges(2, [(0, 1, (1, -1))])
    with pytest.raises(ValueError):
        build_overlay(g, 2)
