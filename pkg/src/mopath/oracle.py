"""Brute-force ground truth on small graphs.

Nothing here reuses the search or pruning code: Pareto sets come from
enumerating every simple path and filtering pairwise.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .graph import CriterionSpec, MultiGraph


class OracleLimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleLimits:
    max_vertices: int = 14
    max_paths: int = 2_000_000


DEFAULT_LIMITS = OracleLimits()


def _check_size(g: MultiGraph, limits: OracleLimits) -> None:
    if g.n > limits.max_vertices:
        raise OracleLimitError(f"graph has {g.n} vertices, oracle limit is {limits.max_vertices}")


def _pairwise_front(costs) -> set[tuple]:
    """Quadratic Pareto filter; duplicates collapse through the set."""
    unique = set(costs)
    front = set()
    for c in unique:
        if not any(o != c and all(x <= y for x, y in zip(o, c)) for o in unique):
            front.add(c)
    return front


def _enumerate_costs(g: MultiGraph, s: int, limits: OracleLimits) -> dict[int, list[tuple]]:
    """Cost of every simple path out of ``s``, keyed by end vertex."""
    found: dict[int, list[tuple]] = {s: [(0.0,) * g.q]}
    on_path = [False] * g.n
    on_path[s] = True
    count = 0

    def dfs(u: int, cost: tuple) -> None:
        nonlocal count
        for eid in g.out_edges[u]:
            _, w, c = g.edges[eid]
            if on_path[w]:
                continue
            count += 1
            if count > limits.max_paths:
                raise OracleLimitError(f"more than {limits.max_paths} simple paths")
            nc = tuple(a + b for a, b in zip(cost, c))
            found.setdefault(w, []).append(nc)
            on_path[w] = True
            dfs(w, nc)
            on_path[w] = False

    dfs(s, (0.0,) * g.q)
    return found


def enumerate_pareto(g: MultiGraph, s: int, t: int, limits: OracleLimits = DEFAULT_LIMITS) -> set[tuple]:
    _check_size(g, limits)
    return _pairwise_front(_enumerate_costs(g, s, limits).get(t, []))


def enumerate_pareto_all(g: MultiGraph, s: int, limits: OracleLimits = DEFAULT_LIMITS) -> dict[int, set[tuple]]:
    """Pareto set from ``s`` to every vertex (empty when unreachable)."""
    _check_size(g, limits)
    found = _enumerate_costs(g, s, limits)
    return {t: _pairwise_front(found.get(t, [])) for t in range(g.n)}


def enumerate_k_paths(g: MultiGraph, k: int, limits: OracleLimits = DEFAULT_LIMITS) -> list[tuple[int, ...]]:
    """Every simple path with exactly ``k`` vertices (parallel edges merged)."""
    _check_size(g, limits)
    succ = [sorted({g.edges[e][1] for e in g.out_edges[v]} - {v}) for v in range(g.n)]
    paths: list[tuple[int, ...]] = []
    stack: list[int] = []

    def dfs(u: int) -> None:
        stack.append(u)
        if len(stack) == k:
            paths.append(tuple(stack))
            if len(paths) > limits.max_paths:
                raise OracleLimitError(f"more than {limits.max_paths} paths")
        else:
            for w in succ[u]:
                if w not in stack:
                    dfs(w)
        stack.pop()

    if k >= 1:
        for v in range(g.n):
            dfs(v)
    return paths


def random_instance(seed: int, n: int, edge_prob: float, q: int = 2,
                    weight_range: int = 10, goals: int = 0) -> MultiGraph:
    """Seeded random digraph with integer weights in ``1..weight_range``.

    Each ordered pair ``(u, v)``, ``u != v``, gets an arc with probability
    ``edge_prob``; ``goals`` random vertices are marked as goals.
    """
    rng = random.Random(seed)
    edges = []
    for u in range(n):
        for v in range(n):
            if u != v and rng.random() < edge_prob:
                edges.append((u, v, tuple(float(rng.randint(1, weight_range)) for _ in range(q))))
    goal_set = frozenset(rng.sample(range(n), min(goals, n)))
    return MultiGraph(n, CriterionSpec.all_min(q), edges, goal_set)
