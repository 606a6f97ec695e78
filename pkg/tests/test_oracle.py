import io

import pytest

from mopath import oracle
from mopath.graph import load_graph, save_graph


def test_diamond(diamond):
    assert oracle.enumerate_pareto(diamond, 0, 3) == {(2.0, 6.0), (5.0, 5.0), (6.0, 2.0)}
    assert oracle.enumerate_pareto(diamond, 3, 0) == set()
    assert oracle.enumerate_pareto(diamond, 1, 1) == {(0.0, 0.0)}


def test_k_paths_on_chain(chain):
    assert oracle.enumerate_k_paths(chain, 3) == [(0, 1, 2), (1, 2, 3), (2, 3, 4)]
    assert len(oracle.enumerate_k_paths(chain, 1)) == 5
    assert oracle.enumerate_k_paths(chain, 6) == []


def test_random_instance():
    assert oracle.random_instance(1, 6, 0.0).m == 0
    g = oracle.random_instance(7, 10, 0.3, 2, goals=3)
    assert g == oracle.random_instance(7, 10, 0.3, 2, goals=3)
    assert len(g.goals) == 3
    buf = io.StringIO()
    save_graph(g, buf)
    assert load_graph(io.StringIO(buf.getvalue())) == g


def test_size_limit():
    g = oracle.random_instance(0, 20, 0.1)
    with pytest.raises(oracle.OracleLimitError):
        oracle.enumerate_pareto(g, 0, 1)
