"""Directed multigraph with cost vectors, and the extended DIMACS text format.

File layout (1-based vertex ids)::

    c free-form comment
    p sp <n> <m> <q>
    d <min|max> ... (q entries, optional, default all min)
    a <u> <v> <c1> ... <cq>
    g <v>

Maximized criteria are negated on load so that everything downstream only
ever minimizes; :func:`save_graph` restores the original sign.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

from .dominance import CostVector


class GraphFormatError(ValueError):
    """Malformed graph or goal file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class CriterionSpec:
    count: int
    directions: tuple[str, ...]

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("criterion count must be >= 1")
        if len(self.directions) != self.count:
            raise ValueError("directions length must equal criterion count")
        for d in self.directions:
            if d not in ("min", "max"):
                raise ValueError(f"unknown criterion direction {d!r}")

    @classmethod
    def all_min(cls, q: int) -> CriterionSpec:
        return cls(q, ("min",) * q)

    @property
    def signs(self) -> tuple[float, ...]:
        return tuple(1.0 if d == "min" else -1.0 for d in self.directions)

    def decanonicalize(self, cost: Sequence[float]) -> CostVector:
        """Map an internal (all-min) vector back to the file's directions."""
        return tuple(c if d == "min" else -c for c, d in zip(cost, self.directions))

    canonicalize = decanonicalize  # negation is an involution


@dataclass
class MultiGraph:
    """Immutable-by-convention directed multigraph ``G = (V, E, I)``.

    ``edges[i]`` is ``(source, target, cost)``; costs are canonical.
    """

    n: int
    criteria: CriterionSpec
    edges: list[tuple[int, int, CostVector]] = field(default_factory=list)
    goals: frozenset[int] = frozenset()
    out_edges: list[list[int]] = field(init=False, repr=False)
    in_edges: list[list[int]] = field(init=False, repr=False)

    def __post_init__(self):
        q = self.criteria.count
        self.out_edges = [[] for _ in range(self.n)]
        self.in_edges = [[] for _ in range(self.n)]
        for eid, (u, v, cost) in enumerate(self.edges):
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge {eid} has vertex id out of range")
            if len(cost) != q:
                raise ValueError(f"edge {eid} has {len(cost)} criteria, expected {q}")
            self.out_edges[u].append(eid)
            self.in_edges[v].append(eid)
        self.goals = frozenset(self.goals)
        for g in self.goals:
            if not 0 <= g < self.n:
                raise ValueError(f"goal {g} out of range")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, Sequence[float]]],
                   q: int | None = None, goals: Iterable[int] = ()) -> MultiGraph:
        edge_list = [(int(u), int(v), tuple(float(c) for c in cost)) for u, v, cost in edges]
        if q is None:
            if not edge_list:
                raise ValueError("q is required for an edgeless graph")
            q = len(edge_list[0][2])
        return cls(n, CriterionSpec.all_min(q), edge_list, frozenset(goals))

    @property
    def q(self) -> int:
        return self.criteria.count

    @property
    def m(self) -> int:
        return len(self.edges)

    def with_costs(self, costs: Sequence[CostVector], criteria: CriterionSpec | None = None) -> MultiGraph:
        """Same structure and goals, new cost vectors (in edge-id order)."""
        if len(costs) != len(self.edges):
            raise ValueError("one cost vector per edge required")
        crit = criteria or CriterionSpec.all_min(len(costs[0]) if costs else self.q)
        edges = [(u, v, tuple(c)) for (u, v, _), c in zip(self.edges, costs)]
        return MultiGraph(self.n, crit, edges, self.goals)

    def with_goals(self, goals: Iterable[int]) -> MultiGraph:
        return MultiGraph(self.n, self.criteria, self.edges, frozenset(goals))

    def successors(self, v: int) -> list[int]:
        """Distinct out-neighbours of ``v`` excluding ``v`` itself."""
        seen = dict.fromkeys(self.edges[e][1] for e in self.out_edges[v])
        seen.pop(v, None)
        return list(seen)

    def predecessors(self, v: int) -> list[int]:
        seen = dict.fromkeys(self.edges[e][0] for e in self.in_edges[v])
        seen.pop(v, None)
        return list(seen)

    def has_negative_weights(self) -> bool:
        return any(c < 0 for _, _, cost in self.edges for c in cost)

    def checksum(self) -> str:
        """Structural digest: counts plus every edge in id order."""
        h = hashlib.sha256()
        h.update(f"{self.n} {self.m} {self.q}\n".encode())
        for u, v, cost in self.edges:
            h.update(f"{u} {v} {' '.join(map(repr, cost))}\n".encode())
        return h.hexdigest()[:16]

    def _key(self):
        return (self.n, self.criteria, self.edges, self.goals)

    def __eq__(self, other):
        if not isinstance(other, MultiGraph):
            return NotImplemented
        return self._key() == other._key()


@dataclass(frozen=True)
class Path:
    vertices: tuple[int, ...]
    edge_ids: tuple[int, ...]
    cost: CostVector

    def verify(self, g: MultiGraph) -> bool:
        """Check edge continuity and that ``cost`` is the summed edge cost."""
        if len(self.edge_ids) != len(self.vertices) - 1:
            return False
        total = (0.0,) * g.q
        for i, eid in enumerate(self.edge_ids):
            u, v, c = g.edges[eid]
            if (u, v) != (self.vertices[i], self.vertices[i + 1]):
                return False
            total = tuple([a + b for a, b in zip(total, c)])
        return total == tuple(self.cost)


def format_value(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _parse_float(tok: str, lineno: int) -> float:
    try:
        val = float(tok)
    except ValueError:
        raise GraphFormatError(f"bad weight {tok!r}", lineno) from None
    if not math.isfinite(val):
        raise GraphFormatError(f"non-finite weight {tok!r}", lineno)
    return val


def _parse_vertex(tok: str, n: int, lineno: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise GraphFormatError(f"bad vertex id {tok!r}", lineno) from None
    if not 1 <= v <= n:
        raise GraphFormatError(f"vertex id out of range: {v} (n={n})", lineno)
    return v - 1


def load_graph(stream: TextIO) -> MultiGraph:
    n = m = q = None
    directions: tuple[str, ...] | None = None
    raw_edges: list[tuple[int, int, CostVector]] = []
    goals: set[int] = set()
    for lineno, line in enumerate(stream, start=1):
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        tag = parts[0]
        if tag == "p":
            if n is not None:
                raise GraphFormatError("duplicate header", lineno)
            if len(parts) != 5 or parts[1] != "sp":
                raise GraphFormatError("malformed header, expected 'p sp <n> <m> <q>'", lineno)
            try:
                n, m, q = (int(x) for x in parts[2:])
            except ValueError:
                raise GraphFormatError("malformed header counts", lineno) from None
            if n < 0 or m < 0 or q < 1:
                raise GraphFormatError("malformed header counts", lineno)
            continue
        if n is None:
            raise GraphFormatError(f"{tag!r} line before header", lineno)
        if tag == "d":
            if len(parts) != q + 1 or any(d not in ("min", "max") for d in parts[1:]):
                raise GraphFormatError("direction line needs q entries of min|max", lineno)
            directions = tuple(parts[1:])
        elif tag == "a":
            if len(parts) != q + 3:
                raise GraphFormatError(f"arity mismatch: expected {q} weights, got {len(parts) - 3}", lineno)
            u = _parse_vertex(parts[1], n, lineno)
            v = _parse_vertex(parts[2], n, lineno)
            cost = tuple(_parse_float(t, lineno) for t in parts[3:])
            raw_edges.append((u, v, cost))
        elif tag == "g":
            if len(parts) != 2:
                raise GraphFormatError("goal line needs one vertex id", lineno)
            goals.add(_parse_vertex(parts[1], n, lineno))
        else:
            raise GraphFormatError(f"unknown line type {tag!r}", lineno)
    if n is None:
        raise GraphFormatError("missing header")
    if len(raw_edges) != m:
        raise GraphFormatError(f"header declares {m} arcs but {len(raw_edges)} found")
    crit = CriterionSpec(q, directions or ("min",) * q)
    if "max" in crit.directions:
        raw_edges = [(u, v, crit.canonicalize(c)) for u, v, c in raw_edges]
    return MultiGraph(n, crit, raw_edges, frozenset(goals))


def save_graph(g: MultiGraph, stream: TextIO) -> None:
    """Write ``g`` with arcs in edge id order, so ids survive a reload."""
    stream.write(f"p sp {g.n} {g.m} {g.q}\n")
    if "max" in g.criteria.directions:
        stream.write("d " + " ".join(g.criteria.directions) + "\n")
    for u, v, cost in g.edges:
        vals = " ".join(format_value(c) for c in g.criteria.decanonicalize(cost))
        stream.write(f"a {u + 1} {v + 1} {vals}\n")
    for goal in sorted(g.goals):
        stream.write(f"g {goal + 1}\n")


def load_goals(stream: TextIO, n: int) -> set[int]:
    """Goal file: one 1-based vertex id per line; blank and ``c`` lines skipped."""
    goals = set()
    for lineno, line in enumerate(stream, start=1):
        tok = line.strip()
        if not tok or tok.startswith("c"):
            continue
        goals.add(_parse_vertex(tok, n, lineno))
    return goals
