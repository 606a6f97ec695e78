import pytest
from hypothesis import given, settings, strategies as st

from mopath import oracle
from mopath.graph import MultiGraph
from mopath.kpc import build_overlay, build_overlay_edges
from mopath.mls import (VARIANTS, Label, QueryError, TruncatedSet, accept_all, attach_goal, attach_source,
                        extract_path, graph_view, max_cost_hook, mls_run, overlay_view, query, t_discard_check,
                        tset_update)

S, A, B, G = range(4)
V1, V2, V3, V4, V5 = range(5)
DIAMOND_FRONT = {(2.0, 6.0), (5.0, 5.0), (6.0, 2.0)}


def tset(vectors, max_first):
    ts = TruncatedSet()
    ts.vectors = list(vectors)
    ts.max_first = max_first
    return ts


@pytest.fixture
def chain_view(chain):
    return overlay_view(chain, build_overlay_edges(chain, [V1, V3, V5], k=3))


@pytest.mark.parametrize("variant", VARIANTS)
def test_diamond_front(diamond, variant):
    ov, _ = build_overlay(diamond, 2)
    res = query(diamond, S, [G], variant, ov)
    assert res.cost_set(G) == DIAMOND_FRONT
    assert res.output_costs(G) == sorted(DIAMOND_FRONT)
    assert not res.unreachable


@pytest.mark.parametrize("variant", VARIANTS)
def test_goal_is_source(diamond, variant):
    ov, _ = build_overlay(diamond, 2)
    assert query(diamond, S, [S], variant, ov).cost_set(S) == {(0.0, 0.0)}


@pytest.mark.parametrize("variant", VARIANTS)
def test_unreachable_goal_is_flagged(diamond, variant):
    ov, _ = build_overlay(diamond, 2)
    res = query(diamond, G, [S, A], variant, ov)
    assert res.unreachable == {S, A}
    assert res.cost_set(S) == set()


def test_t_discard_examples():
    ts = tset([(3.0,)], 4.0)
    assert t_discard_check(ts, Label(0, (5.0, 3.0)))
    assert not t_discard_check(ts, Label(0, (3.0, 2.0)))
    assert not t_discard_check(TruncatedSet(), Label(0, (0.0, 0.0)))


def test_tset_update_examples():
    ts = tset([(3, 4), (4, 2)], 0)
    tset_update(ts, Label(0, (9, 3, 3)))
    assert sorted(ts.vectors) == [(3, 3), (4, 2)]
    assert ts.max_first == 9
    ts = tset([(3, 4), (4, 2)], 0)
    tset_update(ts, Label(0, (1, 2, 5)))
    assert sorted(ts.vectors) == [(2, 5), (3, 4), (4, 2)]
    ts = TruncatedSet()
    tset_update(ts, Label(0, (1, 7, 7)))
    assert ts.vectors == [(7, 7)]


def test_attach_source_on_chain(chain_view):
    view, sid = attach_source(chain_view, V2)
    assert view is not chain_view
    assert len(chain_view.out) == 3
    entries = [(view.vertex_of[w], b) for w, b in view.out[sid]]
    assert len(entries) == 1 and entries[0][0] == V3
    (eid, cost), = entries[0][1]
    assert cost == (1.0, 1.0) and view.expand_edge(eid) == ((V2, V3), (1,))


def test_attach_source_in_cover_is_identity(chain_view):
    view, sid = attach_source(chain_view, V3)
    assert view is chain_view and view.vertex_of[sid] == V3


def test_attach_isolated_source():
    g = MultiGraph.from_edges(3, [(1, 2, (1, 1))])
    ov, _ = build_overlay(g, 2)
    view, sid = attach_source(overlay_view(g, ov), 0)
    assert view.out[sid] == []
    assert query(g, 0, [1, 2], "t-kpc-mls", ov).unreachable == {1, 2}


def test_attach_goal_on_chain(chain_view):
    view, tid = attach_goal(chain_view, V4)
    sources = [(view.vertex_of[u], b) for u, targets in enumerate(view.out) for w, b in targets if w == tid]
    assert len(sources) == 1 and sources[0][0] == V3
    assert [c for _, c in sources[0][1]] == [(1.0, 1.0)]
    same, cid = attach_goal(chain_view, V5)
    assert same is chain_view and chain_view.vertex_of[cid] == V5


def test_goal_without_incoming_cover_path():
    g = MultiGraph.from_edges(4, [(0, 1, (1, 1)), (1, 2, (1, 1))])
    ov, _ = build_overlay(g, 3)
    res = query(g, 1, [3], "kpc-mls", ov)
    assert res.unreachable == {3}


def test_extract_path_diamond(diamond):
    res = query(diamond, S, [G])
    by_cost = {lab.cost: res.path(lab) for lab in res.pareto[G]}
    assert by_cost[(2.0, 6.0)].vertices == (S, A, G)
    for path in by_cost.values():
        assert path.verify(diamond)


def test_extract_path_root(diamond):
    res = query(diamond, S, [S])
    assert res.path(res.pareto[S][0]).vertices == (S,)


def test_extract_path_splices_overlay_edges(chain):
    ov = build_overlay_edges(chain, [V1, V3, V5], k=3)
    res = query(chain, V1, [V5], "t-kpc-mls", ov)
    path = res.path(res.pareto[V5][0])
    assert path.vertices == (V1, V2, V3, V4, V5)
    assert path.edge_ids == (0, 1, 2, 3)
    assert path.verify(chain)


def test_feasibility_hooks(diamond):
    assert accept_all(Label(0, (99.0, 99.0)))
    assert not max_cost_hook(0, 10)(Label(0, (11.0, 0.0)))
    res = query(diamond, S, [G], feasible=max_cost_hook(0, 5))
    assert res.cost_set(G) == {(2.0, 6.0), (5.0, 5.0)}


def test_query_errors(diamond):
    with pytest.raises(QueryError):
        query(diamond, 9, [G])
    with pytest.raises(QueryError):
        query(diamond, S, [9])
    with pytest.raises(QueryError):
        query(diamond, S, [G], "kpc-mls")
    with pytest.raises(QueryError):
        query(diamond, S, [G], "dijkstra")


def test_overlay_for_other_graph_rejected(diamond, chain):
    ov, _ = build_overlay(chain, 3)
    with pytest.raises(QueryError):
        query(diamond, S, [G], "kpc-mls", ov)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000), st.integers(3, 9), st.sampled_from([0.25, 0.45]), st.sampled_from([2, 3]))
def test_variants_match_oracle(seed, n, p, q):
    g = oracle.random_instance(seed, n, p, q)
    truth = oracle.enumerate_pareto_all(g, 0)
    ov, _ = build_overlay(g, 3)
    for variant in VARIANTS:
        res = query(g, 0, range(n), variant, ov, check=True)
        assert res.cost_sets() == truth
        for t in range(n):
            for lab in res.pareto[t]:
                assert res.path(lab).verify(g)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.booleans())
def test_bicriteria_fast_path_matches_generic_loop(seed, use_t):
    g = oracle.random_instance(seed, 10, 0.3, 2)
    view = graph_view(g)
    fast = mls_run(view, 0, use_t)
    slow = mls_run(view, 0, use_t, feasible=accept_all)
    assert [[lab.cost for lab in labs] for labs in fast.perm] == [[lab.cost for lab in labs] for labs in slow.perm]
    assert fast.stats.peak_labels == slow.stats.peak_labels


def test_perm_sets_are_lex_sorted_and_nondominated():
    g = oracle.random_instance(4, 12, 0.4, 3)
    state = mls_run(graph_view(g), 0, True, check=True)
    for labs in state.perm:
        costs = [lab.cost for lab in labs]
        assert costs == sorted(costs)
        assert set(costs) == oracle._pairwise_front(costs)
