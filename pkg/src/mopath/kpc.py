"""k-Path-Cover preprocessing: cover vertex selection and the pruned overlay.

Path size is counted in vertices.  A set ``C`` is a k-path cover when every
simple path with ``k`` vertices contains a vertex of ``C``.  The cover is
built greedily: start from ``C = V`` and drop each non-goal vertex that no
cover-free ``k``-vertex path would pass through.

Overlay edges connect cover vertices that are joined by a path whose
interior avoids the cover.  Each edge keeps the original vertex and edge id
sequence so full paths can be recovered after a query.
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence, TextIO

from .dominance import CostVector, weak_dominates
from .graph import MultiGraph, format_value

DEFAULT_K = 32
MAGIC = "kpc-overlay v1"


class OverlayError(ValueError):
    """Overlay file could not be read or violates an overlay invariant."""


class OverlayEdge(NamedTuple):
    source: int  # cover id
    target: int  # cover id
    cost: CostVector
    vertices: tuple[int, ...]  # original vertex ids, endpoints included
    edge_ids: tuple[int, ...]  # original edge ids, len(vertices) - 1


@dataclass
class OverlayGraph:
    k: int
    q: int
    cover: tuple[int, ...]
    edges: list[OverlayEdge]
    goals: frozenset[int] = frozenset()
    graph_n: int = 0
    graph_m: int = 0
    graph_checksum: str = ""
    index: dict[int, int] = field(init=False, repr=False)
    out: list[list[tuple[int, tuple[int, ...]]]] = field(init=False, repr=False)

    def __post_init__(self):
        self.cover = tuple(self.cover)
        self.goals = frozenset(self.goals)
        self.index = {v: i for i, v in enumerate(self.cover)}
        self._build_adjacency()

    def _build_adjacency(self) -> None:
        bundles: list[dict[int, list[int]]] = [{} for _ in self.cover]
        for i, e in enumerate(self.edges):
            bundles[e.source].setdefault(e.target, []).append(i)
        self.out = [[(w, tuple(ids)) for w, ids in b.items()] for b in bundles]

    def bundle(self, u: int, w: int) -> list[OverlayEdge]:
        """Edges between two cover ids."""
        for target, ids in self.out[u]:
            if target == w:
                return [self.edges[i] for i in ids]
        return []

    def in_cover(self, v: int) -> bool:
        return v in self.index

    def matches(self, g: MultiGraph) -> bool:
        return (self.graph_n, self.graph_m, self.graph_checksum) == (g.n, g.m, g.checksum())

    def __eq__(self, other):
        if not isinstance(other, OverlayGraph):
            return NotImplemented
        return (self.k, self.q, self.cover, self.edges, self.goals,
                self.graph_n, self.graph_m, self.graph_checksum) == (
                other.k, other.q, other.cover, other.edges, other.goals,
                other.graph_n, other.graph_m, other.graph_checksum)


# --- vertex cover ---------------------------------------------------------

def _neighbour_lists(g: MultiGraph) -> tuple[list[list[int]], list[list[int]]]:
    return [g.successors(v) for v in range(g.n)], [g.predecessors(v) for v in range(g.n)]


def _longest_free(adj: list[list[int]], in_cover, v: int, limit: int, blocked: set[int]) -> int:
    """Vertex count of the longest simple path from ``v`` along ``adj`` whose
    other vertices are outside the cover and ``blocked``; stops at ``limit``."""
    best = 1
    on_path = set(blocked)
    on_path.add(v)

    def dfs(u: int, size: int) -> bool:
        nonlocal best
        if size > best:
            best = size
            if best >= limit:
                return True
        for w in adj[u]:
            if in_cover[w] or w in on_path:
                continue
            on_path.add(w)
            if dfs(w, size + 1):
                return True
            on_path.discard(w)
        return False

    dfs(v, 1)
    return best


def _outgoing_free_paths(succ: list[list[int]], in_cover, v: int, k: int):
    """All simple paths leaving ``v`` through non-cover vertices.

    Returns ``None`` as soon as one of them reaches ``k`` vertices.
    """
    paths: list[tuple[int, ...]] = []
    stack = [v]
    on_path = {v}

    def dfs(u: int) -> bool:
        paths.append(tuple(stack))
        if len(stack) >= k:
            return True
        for w in succ[u]:
            if in_cover[w] or w in on_path:
                continue
            stack.append(w)
            on_path.add(w)
            if dfs(w):
                return True
            stack.pop()
            on_path.discard(w)
        return False

    return None if dfs(v) else paths


def _must_keep(succ, pred, in_cover, v: int, k: int) -> bool:
    outgoing = _outgoing_free_paths(succ, in_cover, v, k)
    if outgoing is None:
        return True
    longest_in = _longest_free(pred, in_cover, v, k, set())
    outgoing.sort(key=len, reverse=True)
    if len(outgoing[0]) + longest_in - 1 < k:
        return False
    for po in outgoing:
        need = k - len(po) + 1
        if need > longest_in:
            # sorted by length: every remaining path needs even more
            return False
        if _longest_free(pred, in_cover, v, need, set(po[1:])) >= need:
            return True
    return False


def must_keep(g: MultiGraph, cover: Iterable[int], v: int, k: int) -> bool:
    """Whether removing ``v`` from ``cover`` would break the k-path property.

    True iff some simple path of exactly ``k`` vertices runs through ``v``
    with ``v`` as its only cover vertex.
    """
    in_cover = bytearray(g.n)
    for c in cover:
        in_cover[c] = 1
    succ, pred = _neighbour_lists(g)
    return _must_keep(succ, pred, in_cover, v, k)


def build_vertex_cover(g: MultiGraph, k: int = DEFAULT_K, order: Sequence[int] | None = None,
                       goals: Iterable[int] | None = None) -> list[int]:
    """Greedy k-path cover, scanning ``order`` (ascending ids by default).

    Goal vertices (``g.goals`` unless ``goals`` is given) are never removed.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    keep = frozenset(g.goals if goals is None else goals)
    succ, pred = _neighbour_lists(g)
    in_cover = bytearray(b"\x01") * g.n
    for v in (range(g.n) if order is None else order):
        if v in keep:
            continue
        if not _must_keep(succ, pred, in_cover, v, k):
            in_cover[v] = 0
    return [v for v in range(g.n) if in_cover[v]]


# --- overlay edges --------------------------------------------------------

def insert_nondominated(bundle: list, cost: CostVector, item) -> bool:
    """Online domination pruning for one ``(source, target)`` bundle.

    ``bundle`` holds ``(cost, item)`` pairs.  The new entry is discarded if
    an existing one weakly dominates it; entries it weakly dominates are
    dropped.  Returns whether it was inserted.
    """
    survivors = None
    for i, (c, _) in enumerate(bundle):
        if weak_dominates(c, cost):
            return False
        if weak_dominates(cost, c):
            if survivors is None:
                survivors = bundle[:i]
        elif survivors is not None:
            survivors.append(bundle[i])
    if survivors is not None:
        bundle[:] = survivors
    bundle.append((cost, item))
    return True


def domination_prune(bundle: Sequence[OverlayEdge], mode: str = "exact") -> list[OverlayEdge]:
    """Prune a bundle of parallel overlay edges.

    ``exact`` compares all pairs and keeps the first-seen of equal vectors.
    ``fast`` only compares against the per-criterion optimal edges
    (``q * |S|`` checks); it may leave dominated edges behind.
    """
    if mode == "exact":
        kept: list[OverlayEdge] = []
        for i, e in enumerate(bundle):
            dominated = False
            for j, f in enumerate(bundle):
                if i == j:
                    continue
                if weak_dominates(f.cost, e.cost) and (f.cost != e.cost or j < i):
                    dominated = True
                    break
            if not dominated:
                kept.append(e)
        return kept
    if mode == "fast":
        if not bundle:
            return []
        q = len(bundle[0].cost)
        best = {min(range(len(bundle)), key=lambda j: bundle[j].cost[i]) for i in range(q)}
        return [e for i, e in enumerate(bundle)
                if i in best or not any(weak_dominates(bundle[j].cost, e.cost) for j in best)]
    raise ValueError(f"unknown prune mode {mode!r}")


def _edges_from(g: MultiGraph, in_cover, v: int, prune: bool = True) -> dict[int, list]:
    """Forward DFS from cover vertex ``v``; one candidate per simple path that
    reaches another cover vertex through non-cover interiors."""
    out_edges, edges = g.out_edges, g.edges
    bundles: dict[int, list] = {}
    verts = [v]
    eids: list[int] = []
    on_path = {v}

    def dfs(u: int, cost: CostVector) -> None:
        for eid in out_edges[u]:
            _, w, c = edges[eid]
            if w in on_path:
                continue
            new_cost = tuple([a + b for a, b in zip(cost, c)])
            if in_cover[w]:
                item = (tuple(verts) + (w,), tuple(eids) + (eid,))
                if prune:
                    insert_nondominated(bundles.setdefault(w, []), new_cost, item)
                else:
                    bundles.setdefault(w, []).append((new_cost, item))
                continue
            verts.append(w)
            eids.append(eid)
            on_path.add(w)
            dfs(w, new_cost)
            verts.pop()
            eids.pop()
            on_path.discard(w)

    dfs(v, (0.0,) * g.q)
    return bundles


_worker_graph: MultiGraph | None = None
_worker_cover: bytearray | None = None


def _init_worker(g: MultiGraph, in_cover: bytearray) -> None:
    global _worker_graph, _worker_cover
    _worker_graph, _worker_cover = g, in_cover


def _edges_from_chunk(sources: list[int]) -> list[dict[int, list]]:
    return [_edges_from(_worker_graph, _worker_cover, v) for v in sources]


def default_workers() -> int:
    env = os.environ.get("MOPATH_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def build_overlay_edges(g: MultiGraph, cover: Iterable[int], k: int = DEFAULT_K,
                        workers: int | None = None, prune: bool = True) -> OverlayGraph:
    """Connect cover vertices by overlay edges.

    With ``prune`` (the default) each bundle is domination-pruned online as
    paths are found; without it every cover-free path is kept.
    """
    cover = sorted(set(cover))
    in_cover = bytearray(g.n)
    for c in cover:
        in_cover[c] = 1
    workers = default_workers() if workers is None else workers
    if workers > 1 and prune and len(cover) >= 4 * workers:
        size = -(-len(cover) // (4 * workers))
        chunks = [cover[i:i + size] for i in range(0, len(cover), size)]
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(g, in_cover)) as pool:
            per_source = [b for chunk in pool.map(_edges_from_chunk, chunks) for b in chunk]
    else:
        per_source = [_edges_from(g, in_cover, v, prune) for v in cover]
    index = {v: i for i, v in enumerate(cover)}
    edges = []
    for v, bundles in zip(cover, per_source):
        for w in sorted(bundles):
            for cost, (verts, eids) in bundles[w]:
                edges.append(OverlayEdge(index[v], index[w], cost, verts, eids))
    return OverlayGraph(k, g.q, tuple(cover), edges, frozenset(g.goals) & frozenset(cover),
                        g.n, g.m, g.checksum())


def triangle_prune(ov: OverlayGraph) -> OverlayGraph:
    """Drop ``(u, w)`` edges weakly dominated by some ``(u, v) + (v, w)`` route.

    Bundles are processed sequentially and removals take effect
    immediately, so every removed edge stays covered by a route of surviving
    edges even when zero-cost cycles are present.
    """
    out: list[dict[int, list[int]]] = [{} for _ in ov.cover]
    for u, targets in enumerate(ov.out):
        for w, ids in targets:
            out[u][w] = list(ids)
    cost = [e.cost for e in ov.edges]
    q = ov.q

    for u in range(len(ov.cover)):
        ou = out[u]
        for w in sorted(ou):
            if w == u or w not in ou:
                continue
            for v in sorted(ou):
                if v == w or v == u or v not in ou or w not in out[v]:
                    continue
                combos = [tuple([a + b for a, b in zip(cost[i], cost[j])])
                          for i in ou[v] for j in out[v][w]]
                best = [min(combos, key=lambda c, i=i: c[i]) for i in range(q)]
                remaining = []
                for e in ou[w]:
                    ce = cost[e]
                    if any(weak_dominates(b, ce) for b in best):
                        continue
                    if any(weak_dominates(c, ce) for c in combos):
                        continue
                    remaining.append(e)
                if remaining:
                    ou[w] = remaining
                else:
                    del ou[w]
                    break

    kept = [ov.edges[i] for u in range(len(ov.cover)) for w in out[u] for i in out[u][w]]
    kept.sort(key=lambda e: (e.source, e.target))
    return OverlayGraph(ov.k, ov.q, ov.cover, kept, ov.goals, ov.graph_n, ov.graph_m, ov.graph_checksum)


@dataclass
class BuildReport:
    cover_size: int
    vertex_count: int
    overlay_edges: int
    edge_count: int
    cover_seconds: float
    edges_seconds: float
    triangle_seconds: float

    @property
    def cover_ratio(self) -> float:
        return self.cover_size / self.vertex_count if self.vertex_count else 0.0

    @property
    def edge_ratio(self) -> float:
        return self.overlay_edges / self.edge_count if self.edge_count else 0.0

    @property
    def total_seconds(self) -> float:
        return self.cover_seconds + self.edges_seconds + self.triangle_seconds


def build_overlay(g: MultiGraph, k: int = DEFAULT_K, triangle: bool = True,
                  order: Sequence[int] | None = None,
                  workers: int | None = None) -> tuple[OverlayGraph, BuildReport]:
    """Full preprocessing pipeline: cover, overlay edges, triangle pruning."""
    if g.has_negative_weights():
        raise ValueError("overlay construction requires non-negative canonical weights")
    t0 = time.perf_counter()
    cover = build_vertex_cover(g, k, order)
    t1 = time.perf_counter()
    ov = build_overlay_edges(g, cover, k, workers)
    t2 = time.perf_counter()
    if triangle:
        ov = triangle_prune(ov)
    t3 = time.perf_counter()
    report = BuildReport(len(ov.cover), g.n, len(ov.edges), g.m, t1 - t0, t2 - t1, t3 - t2)
    return ov, report


def cover_stats(g: MultiGraph, ov: OverlayGraph, seconds: float | None = None) -> dict:
    return {
        "vertices": g.n,
        "edges": g.m,
        "cover": len(ov.cover),
        "overlay_edges": len(ov.edges),
        "cover_ratio": len(ov.cover) / g.n if g.n else 0.0,
        "edge_ratio": len(ov.edges) / g.m if g.m else 0.0,
        "seconds": seconds,
    }


# --- persistence ----------------------------------------------------------

def save_overlay(ov: OverlayGraph, stream: TextIO) -> None:
    stream.write(f"{MAGIC}\n")
    stream.write(f"k {ov.k}\n")
    stream.write(f"q {ov.q}\n")
    stream.write(f"graph {ov.graph_n} {ov.graph_m} {ov.graph_checksum or '-'}\n")
    stream.write(f"cover {len(ov.cover)}\n")
    for v in ov.cover:
        stream.write(f"{v + 1}\n")
    stream.write(f"goals {len(ov.goals)}\n")
    for v in sorted(ov.goals):
        stream.write(f"{v + 1}\n")
    stream.write(f"edges {len(ov.edges)}\n")
    for e in ov.edges:
        costs = " ".join(format_value(c) for c in e.cost)
        seq = " ".join(str(v + 1) for v in e.vertices)
        eids = " ".join(str(i + 1) for i in e.edge_ids)
        stream.write(f"e {ov.cover[e.source] + 1} {ov.cover[e.target] + 1} {costs} : {seq} | {eids}\n")


def _section(lines, lineno: int, name: str) -> tuple[int, int]:
    if lineno >= len(lines):
        raise OverlayError(f"unexpected end of file, expected '{name}'")
    parts = lines[lineno].split()
    if len(parts) != 2 or parts[0] != name:
        raise OverlayError(f"line {lineno + 1}: expected '{name} <count>'")
    try:
        return int(parts[1]), lineno + 1
    except ValueError:
        raise OverlayError(f"line {lineno + 1}: bad count") from None


def load_overlay(stream: TextIO, graph: MultiGraph | None = None) -> OverlayGraph:
    """Read an overlay file and validate it.

    With ``graph`` the checksum is compared and every edge's cost is
    recomputed from the original edge ids.
    """
    lines = [ln.rstrip("\n") for ln in stream]
    if not lines or lines[0].strip() != MAGIC:
        raise OverlayError(f"bad magic line, expected {MAGIC!r}")
    try:
        k = int(lines[1].split()[1]) if lines[1].startswith("k ") else None
        q = int(lines[2].split()[1]) if lines[2].startswith("q ") else None
        gparts = lines[3].split()
        if gparts[0] != "graph" or len(gparts) != 4:
            raise IndexError
        graph_n, graph_m = int(gparts[1]), int(gparts[2])
        checksum = "" if gparts[3] == "-" else gparts[3]
    except (IndexError, ValueError):
        raise OverlayError("malformed overlay header") from None
    if k is None or q is None:
        raise OverlayError("malformed overlay header")

    def vertex(tok: str, lineno: int) -> int:
        try:
            v = int(tok) - 1
        except ValueError:
            raise OverlayError(f"line {lineno + 1}: bad vertex id {tok!r}") from None
        if not 0 <= v < graph_n:
            raise OverlayError(f"line {lineno + 1}: vertex id out of range")
        return v

    count, pos = _section(lines, 4, "cover")
    cover = [vertex(lines[pos + i].strip(), pos + i) for i in range(count)]
    pos += count
    count, pos = _section(lines, pos, "goals")
    goals = [vertex(lines[pos + i].strip(), pos + i) for i in range(count)]
    pos += count
    count, pos = _section(lines, pos, "edges")
    index = {v: i for i, v in enumerate(cover)}
    if len(index) != len(cover) or list(cover) != sorted(cover):
        raise OverlayError("cover ids must be strictly ascending")
    missing = [g + 1 for g in goals if g not in index]
    if missing:
        raise OverlayError(f"goal(s) missing from cover: {missing}")

    edges = []
    for lineno in range(pos, pos + count):
        if lineno >= len(lines):
            raise OverlayError("unexpected end of file in edge section")
        line = lines[lineno]
        try:
            head, rest = line.split(":", 1)
            seq_part, eid_part = rest.split("|", 1)
            hp = head.split()
            if hp[0] != "e" or len(hp) != q + 3:
                raise ValueError
            u, w = vertex(hp[1], lineno), vertex(hp[2], lineno)
            cost = tuple(float(x) for x in hp[3:])
            verts = tuple(vertex(x, lineno) for x in seq_part.split())
            eids = tuple(int(x) - 1 for x in eid_part.split())
        except ValueError:
            raise OverlayError(f"line {lineno + 1}: malformed edge line") from None
        if u not in index or w not in index:
            raise OverlayError(f"line {lineno + 1}: edge endpoint not in cover")
        if len(verts) < 2 or verts[0] != u or verts[-1] != w:
            raise OverlayError(f"line {lineno + 1}: sequence endpoints do not match edge")
        if any(v in index for v in verts[1:-1]):
            raise OverlayError(f"line {lineno + 1}: sequence interior passes through the cover")
        if len(set(verts)) != len(verts):
            raise OverlayError(f"line {lineno + 1}: sequence is not a simple path")
        if len(verts) > k + 1:
            raise OverlayError(f"line {lineno + 1}: sequence longer than k + 1 vertices")
        if len(eids) != len(verts) - 1:
            raise OverlayError(f"line {lineno + 1}: edge id count does not match sequence")
        edges.append(OverlayEdge(index[u], index[w], cost, verts, eids))

    ov = OverlayGraph(k, q, tuple(cover), edges, frozenset(goals), graph_n, graph_m, checksum)
    for u, targets in enumerate(ov.out):
        for w, ids in targets:
            costs = [ov.edges[i].cost for i in ids]
            for a in range(len(costs)):
                for b in range(len(costs)):
                    if a != b and weak_dominates(costs[a], costs[b]):
                        raise OverlayError(
                            f"bundle {ov.cover[u] + 1}->{ov.cover[w] + 1} holds a dominated edge")
    if graph is not None:
        validate_against(ov, graph)
    return ov


def validate_against(ov: OverlayGraph, g: MultiGraph) -> None:
    if (ov.graph_n, ov.graph_m) != (g.n, g.m) or (ov.graph_checksum and ov.graph_checksum != g.checksum()):
        raise OverlayError("overlay was built for a different graph (checksum mismatch)")
    for i, e in enumerate(ov.edges):
        total = (0.0,) * g.q
        for j, eid in enumerate(e.edge_ids):
            if not 0 <= eid < g.m:
                raise OverlayError(f"overlay edge {i}: original edge id out of range")
            a, b, c = g.edges[eid]
            if (a, b) != (e.vertices[j], e.vertices[j + 1]):
                raise OverlayError(f"overlay edge {i}: edge ids do not follow the vertex sequence")
            total = tuple([x + y for x, y in zip(total, c)])
        if total != e.cost:
            raise OverlayError(f"overlay edge {i}: cost {e.cost} disagrees with sequence sum {total}")
