"""Multicriteria label-setting search (MLS) and its accelerated variants.

Four variants share one search loop:

* ``mls``        plain search on the original graph
* ``t-mls``      perm-set dominance replaced by truncated-vector discarding
* ``kpc-mls``    plain search on a k-path-cover overlay
* ``t-kpc-mls``  both

The search always pops the lexicographically smallest open label, so a
popped label is final.  Dominated open labels are flagged and skipped when
popped rather than removed from the heap.
"""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .dominance import CostVector, weak_dominates
from .graph import CriterionSpec, MultiGraph, Path
from .kpc import OverlayGraph, insert_nondominated

VARIANTS = ("mls", "t-mls", "kpc-mls", "t-kpc-mls")


class QueryError(ValueError):
    pass


class Label:
    __slots__ = ("vertex", "cost", "parent", "via_edge", "stamp", "invalidated")

    def __init__(self, vertex: int, cost: CostVector, parent: Label | None = None,
                 via_edge: int | None = None, stamp: int = 0):
        self.vertex = vertex
        self.cost = cost
        self.parent = parent
        self.via_edge = via_edge
        self.stamp = stamp
        self.invalidated = False

    def __repr__(self):
        return f"Label(v={self.vertex}, cost={self.cost})"


class TruncatedSet:
    """Non-dominated truncated cost vectors (first criterion dropped) of a
    vertex's permanent labels, plus the largest first criterion seen."""

    __slots__ = ("vectors", "max_first")

    def __init__(self):
        self.vectors: list[CostVector] = []
        self.max_first = -math.inf

    def __len__(self):
        return len(self.vectors)

    def discards(self, cost: Sequence[float]) -> bool:
        if self.max_first > cost[0]:
            return False
        tail = cost[1:]
        for vec in self.vectors:
            if weak_dominates(vec, tail):
                return True
        return False

    def update(self, cost: Sequence[float]) -> None:
        tail = tuple(cost[1:])
        vectors = self.vectors
        if not any(weak_dominates(vec, tail) for vec in vectors):
            self.vectors = [vec for vec in vectors if not weak_dominates(tail, vec)]
            self.vectors.append(tail)
        if cost[0] > self.max_first:
            self.max_first = cost[0]


def t_discard_check(ts: TruncatedSet, cand: Label) -> bool:
    return ts.discards(cand.cost)


def tset_update(ts: TruncatedSet, new_perm: Label) -> None:
    ts.update(new_perm.cost)


def accept_all(label: Label) -> bool:
    return True


def max_cost_hook(criterion: int, limit: float) -> Callable[[Label], bool]:
    """Feasibility hook rejecting labels whose ``criterion`` exceeds ``limit``."""
    def hook(label: Label) -> bool:
        return label.cost[criterion] <= limit
    return hook


# --- search views -----------------------------------------------------------

Bundle = tuple[tuple[int, CostVector], ...]


@dataclass
class SearchView:
    """Adjacency the search runs on: ``out[v]`` lists ``(w, bundle)`` where a
    bundle holds ``(edge id, cost)`` pairs for every parallel edge v -> w."""

    q: int
    out: list[list[tuple[int, Bundle]]]
    vertex_of: list[int]
    graph: MultiGraph
    overlay: OverlayGraph | None = None
    edge_seq: list[tuple[tuple[int, ...], tuple[int, ...]]] | None = None
    attached: dict[int, int] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.out)

    def view_id(self, v: int) -> int | None:
        if self.overlay is None:
            return v if 0 <= v < self.graph.n else None
        cid = self.overlay.index.get(v)
        return cid if cid is not None else self.attached.get(v)

    def expand_edge(self, eid: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Original vertex sequence and edge ids behind a view edge."""
        if self.edge_seq is None:
            u, v, _ = self.graph.edges[eid]
            return (u, v), (eid,)
        return self.edge_seq[eid]

    def copy(self) -> SearchView:
        return SearchView(self.q, list(self.out), list(self.vertex_of), self.graph, self.overlay,
                          None if self.edge_seq is None else list(self.edge_seq), dict(self.attached))


def graph_view(g: MultiGraph) -> SearchView:
    out = []
    edges = g.edges
    for v in range(g.n):
        grouped: dict[int, list] = {}
        for eid in g.out_edges[v]:
            _, w, cost = edges[eid]
            grouped.setdefault(w, []).append((eid, cost))
        out.append([(w, tuple(b)) for w, b in grouped.items()])
    return SearchView(g.q, out, list(range(g.n)), g)


def overlay_view(g: MultiGraph, ov: OverlayGraph) -> SearchView:
    if g.n != ov.graph_n or g.m != ov.graph_m or g.q != ov.q:
        raise QueryError("overlay does not belong to this graph")
    out = [[(w, tuple((i, ov.edges[i].cost) for i in ids)) for w, ids in targets]
           for targets in ov.out]
    seq = [(e.vertices, e.edge_ids) for e in ov.edges]
    return SearchView(g.q, out, list(ov.cover), g, ov, seq)


def _forward_sum(g: MultiGraph, eids: Iterable[int]) -> CostVector:
    total = (0.0,) * g.q
    for eid in eids:
        total = tuple([a + b for a, b in zip(total, g.edges[eid][2])])
    return total


def _new_vertex(view: SearchView, v: int) -> int:
    vid = len(view.out)
    view.out.append([])
    view.vertex_of.append(v)
    view.attached[v] = vid
    return vid


def _add_edges(view: SearchView, src: int, bundles: dict[int, list]) -> int:
    added = 0
    extra = []
    for target in sorted(bundles):
        entries = []
        for cost, (verts, eids) in bundles[target]:
            eid = len(view.edge_seq)
            view.edge_seq.append((verts, eids))
            entries.append((eid, cost))
        extra.append((target, tuple(entries)))
        added += len(entries)
    if extra:
        view.out[src] = view.out[src] + extra
    return added


def attach_source(view: SearchView, s: int, inplace: bool = False) -> tuple[SearchView, int]:
    """Connect a non-cover source to the overlay by forward DFS.

    Returns the augmented view and the source's view id.  The persisted
    overlay is never modified; ``view`` itself only when ``inplace``.
    """
    ov, g = view.overlay, view.graph
    if ov is None:
        raise QueryError("attach_source needs an overlay view")
    if not 0 <= s < g.n:
        raise QueryError(f"source {s} out of range")
    if s in ov.index:
        return view, ov.index[s]
    if not inplace:
        view = view.copy()
    sid = view.attached.get(s)
    if sid is None:
        sid = _new_vertex(view, s)
    index, attached = ov.index, view.attached
    bundles: dict[int, list] = {}
    verts, eids, on_path = [s], [], {s}

    def record(w: int, eid: int, cost: CostVector) -> None:
        target = index[w] if w in index else attached[w]
        insert_nondominated(bundles.setdefault(target, []), cost, (tuple(verts) + (w,), tuple(eids) + (eid,)))

    def dfs(u: int, cost: CostVector) -> None:
        for eid in g.out_edges[u]:
            _, w, c = g.edges[eid]
            if w in on_path:
                continue
            new_cost = tuple([a + b for a, b in zip(cost, c)])
            if w in index:
                record(w, eid, new_cost)
                continue
            if w in attached:
                record(w, eid, new_cost)
            verts.append(w)
            eids.append(eid)
            on_path.add(w)
            dfs(w, new_cost)
            verts.pop()
            eids.pop()
            on_path.discard(w)

    dfs(s, (0.0,) * g.q)
    _add_edges(view, sid, bundles)
    return view, sid


def attach_goal(view: SearchView, t: int, inplace: bool = False) -> tuple[SearchView, int]:
    """Connect a non-cover goal by backward DFS, adding cover -> goal edges."""
    ov, g = view.overlay, view.graph
    if ov is None:
        raise QueryError("attach_goal needs an overlay view")
    if not 0 <= t < g.n:
        raise QueryError(f"goal {t} out of range")
    if t in ov.index:
        return view, ov.index[t]
    if t in view.attached:
        return view, view.attached[t]
    if not inplace:
        view = view.copy()
    tid = _new_vertex(view, t)
    index = ov.index
    per_source: dict[int, dict[int, list]] = {}
    verts, eids, on_path = [t], [], {t}

    def dfs(u: int) -> None:
        for eid in g.in_edges[u]:
            w, _, _ = g.edges[eid]
            if w in on_path:
                continue
            if w in index:
                path_eids = (eid,) + tuple(reversed(eids))
                path_verts = (w,) + tuple(reversed(verts))
                insert_nondominated(per_source.setdefault(index[w], {}).setdefault(tid, []),
                                    _forward_sum(g, path_eids), (path_verts, path_eids))
                continue
            verts.append(w)
            eids.append(eid)
            on_path.add(w)
            dfs(w)
            verts.pop()
            eids.pop()
            on_path.discard(w)

    dfs(t)
    for src in sorted(per_source):
        _add_edges(view, src, per_source[src])
    return view, tid


# --- search -------------------------------------------------------------------

@dataclass
class QueryStats:
    pushed: int = 0
    popped: int = 0
    stale_pops: int = 0
    discarded: int = 0
    infeasible: int = 0
    invalidated: int = 0
    t_discarded: int = 0
    peak_labels: int = 0
    final_labels: int = 0
    shadow_checks: int = 0
    shadow_mismatches: int = 0
    tset_max_size: int = 0
    tset_size_violations: int = 0
    view_vertices: int = 0
    seconds: float = 0.0
    attach_seconds: float = 0.0


@dataclass
class SearchState:
    """Raw output of :func:`mls_run`, indexed by view vertex."""

    perm: list[list[Label]]
    tsets: list[TruncatedSet] | None
    stats: QueryStats


def _dominance_predicate(q: int) -> Callable[[CostVector, CostVector], bool]:
    if q == 1:
        return lambda a, b: a[0] <= b[0]
    if q == 2:
        return lambda a, b: a[0] <= b[0] and a[1] <= b[1]
    if q == 3:
        return lambda a, b: a[0] <= b[0] and a[1] <= b[1] and a[2] <= b[2]

    def wd(a, b):
        for x, y in zip(a, b):
            if x > y:
                return False
        return True
    return wd


def mls_run(view: SearchView, source: int, use_t_discard: bool = False,
            feasible: Callable[[Label], bool] | None = None, shadow: bool = False,
            check: bool = False) -> SearchState:
    """Label-setting search from view vertex ``source`` until the queue empties.

    ``shadow`` evaluates both the truncated-set test and the direct perm
    dominance test at every candidate and counts disagreements.  ``check``
    asserts the label-set invariants after every iteration (slow).
    """
    started = time.perf_counter()
    n, q = view.n, view.q
    if not 0 <= source < n:
        raise QueryError(f"source {source} not in view")
    if use_t_discard and q < 2:
        raise QueryError("truncated-vector discarding needs at least two criteria")
    if q == 2 and feasible is None and not shadow and not check:
        state = _run_bicriteria(view, source, use_t_discard)
        state.stats.seconds = time.perf_counter() - started
        return state
    wd = _dominance_predicate(q)
    wd_tail = _dominance_predicate(q - 1) if q >= 2 else None
    out = view.out
    perm: list[list[Label]] = [[] for _ in range(n)]
    perm_costs: list[list[CostVector]] = [[] for _ in range(n)]
    temp: list[list[Label]] = [[] for _ in range(n)]
    tsets = [TruncatedSet() for _ in range(n)] if (use_t_discard or shadow) and q >= 2 else None
    stats = QueryStats(view_vertices=n)

    root = Label(source, (0.0,) * q)
    temp[source].append(root)
    heap = [(root.cost, 0, root)]
    stamp = 1
    live = peak = 1
    pushed = popped = stale = discarded = invalidated = t_discarded = infeasible = 0
    heappush, heappop = heapq.heappush, heapq.heappop
    last_popped = None

    while heap:
        cost, _, label = heappop(heap)
        if label.invalidated:
            stale += 1
            continue
        popped += 1
        v = label.vertex
        temp[v].remove(label)
        perm[v].append(label)
        perm_costs[v].append(cost)
        if tsets is not None:
            tsets[v].update(cost)
        if check:
            _check_state(view, v, label, last_popped, perm, temp, tsets, stats, wd)
            last_popped = cost

        for w, bundle in out[v]:
            tw = temp[w]
            ts = tsets[w] if tsets is not None else None
            pw = perm_costs[w]
            for eid, ecost in bundle:
                if q == 2:
                    ncost = (cost[0] + ecost[0], cost[1] + ecost[1])
                else:
                    ncost = tuple([a + b for a, b in zip(cost, ecost)])
                cand = None
                if feasible is not None:
                    cand = Label(w, ncost, label, eid, stamp)
                    if not feasible(cand):
                        infeasible += 1
                        continue
                if shadow:
                    by_t = ts.discards(ncost) if ts is not None else None
                    by_perm = any(wd(p, ncost) for p in pw)
                    stats.shadow_checks += 1
                    if by_t is not None and by_t != by_perm:
                        stats.shadow_mismatches += 1
                    if by_perm if not use_t_discard else by_t:
                        if use_t_discard:
                            t_discarded += 1
                        discarded += 1
                        continue
                elif use_t_discard:
                    if ts.max_first <= ncost[0]:
                        hit = False
                        if q == 2:
                            vecs = ts.vectors
                            hit = bool(vecs) and vecs[0][0] <= ncost[1]
                        else:
                            tail = ncost[1:]
                            for vec in ts.vectors:
                                if wd_tail(vec, tail):
                                    hit = True
                                    break
                        if hit:
                            t_discarded += 1
                            discarded += 1
                            continue
                else:
                    hit = False
                    for p in pw:
                        if wd(p, ncost):
                            hit = True
                            break
                    if hit:
                        discarded += 1
                        continue

                dominated = False
                removed = False
                for c in tw:
                    cc = c.cost
                    if wd(cc, ncost):
                        dominated = True
                        break
                    if wd(ncost, cc):
                        c.invalidated = True
                        removed = True
                if dominated:
                    discarded += 1
                    continue
                if removed:
                    keep = [c for c in tw if not c.invalidated]
                    invalidated += len(tw) - len(keep)
                    live -= len(tw) - len(keep)
                    tw[:] = keep
                if cand is None:
                    cand = Label(w, ncost, label, eid, stamp)
                else:
                    cand.stamp = stamp
                tw.append(cand)
                heappush(heap, (ncost, stamp, cand))
                stamp += 1
                pushed += 1
                live += 1
                if live > peak:
                    peak = live

    stats.pushed = pushed
    stats.popped = popped
    stats.stale_pops = stale
    stats.discarded = discarded
    stats.invalidated = invalidated
    stats.t_discarded = t_discarded
    stats.infeasible = infeasible
    stats.peak_labels = peak
    stats.final_labels = sum(len(p) for p in perm)
    if tsets is not None:
        stats.tset_max_size = max((len(t) for t in tsets), default=0)
    stats.seconds = time.perf_counter() - started
    return SearchState(perm, tsets, stats)


def _run_bicriteria(view: SearchView, source: int, use_t_discard: bool) -> SearchState:
    """Same search as the generic loop, specialised to two criteria.

    Open labels are kept as ``[c0, c1, label]`` entries so the dominance
    scans unpack plain floats.  The truncated set of a bicriteria perm set
    is one scalar, the smallest second criterion, kept in ``tmin``.
    """
    n = view.n
    out = view.out
    inf = math.inf
    perm: list[list[Label]] = [[] for _ in range(n)]
    perm_costs: list[list[CostVector]] = [[] for _ in range(n)]
    temp: list[list] = [[] for _ in range(n)]
    tmin = [inf] * n
    maxfirst = [-inf] * n

    root = Label(source, (0.0, 0.0))
    temp[source].append((0.0, 0.0, root))
    heap = [((0.0, 0.0), 0, root)]
    stamp = 1
    live = peak = 1
    pushed = popped = stale = discarded = invalidated = t_discarded = 0
    heappush, heappop = heapq.heappush, heapq.heappop

    while heap:
        cost, _, label = heappop(heap)
        if label.invalidated:
            stale += 1
            continue
        popped += 1
        v = label.vertex
        tv = temp[v]
        for i, entry in enumerate(tv):
            if entry[2] is label:
                del tv[i]
                break
        perm[v].append(label)
        a0, a1 = cost
        if use_t_discard:
            # lex order makes a0 the new maximum and a1 the new minimum
            maxfirst[v] = a0
            tmin[v] = a1
        else:
            perm_costs[v].append(cost)

        for w, bundle in out[v]:
            tw = temp[w]
            for eid, ecost in bundle:
                n0 = a0 + ecost[0]
                n1 = a1 + ecost[1]
                if use_t_discard:
                    if maxfirst[w] <= n0 and tmin[w] <= n1:
                        t_discarded += 1
                        discarded += 1
                        continue
                else:
                    hit = False
                    for p0, p1 in perm_costs[w]:
                        if p0 <= n0 and p1 <= n1:
                            hit = True
                            break
                    if hit:
                        discarded += 1
                        continue
                dominated = False
                removed = 0
                for c0, c1, lab in tw:
                    if c0 <= n0 and c1 <= n1:
                        dominated = True
                        break
                    if n0 <= c0 and n1 <= c1:
                        lab.invalidated = True
                        removed += 1
                if dominated:
                    discarded += 1
                    continue
                if removed:
                    tw[:] = [e for e in tw if not e[2].invalidated]
                    invalidated += removed
                    live -= removed
                ncost = (n0, n1)
                cand = Label(w, ncost, label, eid, stamp)
                tw.append((n0, n1, cand))
                heappush(heap, (ncost, stamp, cand))
                stamp += 1
                pushed += 1
                live += 1
                if live > peak:
                    peak = live

    tsets = None
    if use_t_discard:
        tsets = []
        for v in range(n):
            ts = TruncatedSet()
            if perm[v]:
                ts.vectors = [(tmin[v],)]
                ts.max_first = maxfirst[v]
            tsets.append(ts)
    stats = QueryStats(pushed=pushed, popped=popped, stale_pops=stale, discarded=discarded,
                       invalidated=invalidated, t_discarded=t_discarded, peak_labels=peak,
                       final_labels=sum(len(p) for p in perm), view_vertices=n,
                       tset_max_size=1 if use_t_discard and popped else 0)
    return SearchState(perm, tsets, stats)


def _check_state(view, v, label, last_popped, perm, temp, tsets, stats, wd) -> None:
    cost = label.cost
    if last_popped is not None and cost < last_popped:
        raise AssertionError(f"popped {cost} after {last_popped}: lexicographic order broken")
    pv = perm[v]
    if len(pv) > 1 and not pv[-2].cost < cost:
        raise AssertionError(f"perm({v}) not strictly lex-sorted")
    for p in pv[:-1]:
        if wd(cost, p.cost):
            raise AssertionError(f"new permanent label at {v} dominates an older one")
    for t in temp[v]:
        if any(wd(p.cost, t.cost) for p in pv):
            raise AssertionError(f"temporary label at {v} dominated by a permanent one")
    if label.parent is not None and any(a < b for a, b in zip(cost, label.parent.cost)):
        raise AssertionError("label cheaper than its parent")
    if tsets is not None:
        ts = tsets[v]
        if view.q == 2 and len(ts) != 1:
            stats.tset_size_violations += 1
        tails = [p.cost[1:] for p in pv]
        for vec in ts.vectors:
            if vec not in tails:
                raise AssertionError("truncated vector without a permanent label")


def extract_path(label: Label, view: SearchView) -> Path:
    """Full original-graph path for a label, expanding overlay edges."""
    chain = []
    node = label
    while node.parent is not None:
        chain.append(node.via_edge)
        node = node.parent
    vertices = [view.vertex_of[node.vertex]]
    edge_ids: list[int] = []
    for eid in reversed(chain):
        verts, eids = view.expand_edge(eid)
        vertices.extend(verts[1:])
        edge_ids.extend(eids)
    return Path(tuple(vertices), tuple(edge_ids), label.cost)


# --- high level ---------------------------------------------------------------

@dataclass
class QueryResult:
    pareto: dict[int, list[Label]]
    unreachable: set[int]
    stats: QueryStats
    view: SearchView
    criteria: CriterionSpec
    variant: str = "mls"

    def cost_set(self, goal: int) -> set[CostVector]:
        """Canonical (all-min) Pareto costs at ``goal``."""
        return {lab.cost for lab in self.pareto[goal]}

    def cost_sets(self) -> dict[int, set[CostVector]]:
        return {g: self.cost_set(g) for g in self.pareto}

    def output_costs(self, goal: int) -> list[CostVector]:
        """Pareto costs at ``goal`` in the file's criterion directions, lex-sorted."""
        return [self.criteria.decanonicalize(lab.cost) for lab in self.pareto[goal]]

    def path(self, label: Label) -> Path:
        return extract_path(label, self.view)

    @property
    def pareto_total(self) -> int:
        return sum(len(v) for v in self.pareto.values())


def prepare_overlay_view(base: SearchView, source: int, goals: Iterable[int]) -> tuple[SearchView, int]:
    view = base.copy()
    for t in sorted(set(goals)):
        attach_goal(view, t, inplace=True)
    return attach_source(view, source, inplace=True)


def query(g: MultiGraph, source: int, goals: Iterable[int] | None = None, variant: str = "mls",
          overlay: OverlayGraph | None = None, feasible: Callable[[Label], bool] | None = None,
          shadow: bool = False, check: bool = False, base_view: SearchView | None = None) -> QueryResult:
    """Pareto sets from ``source`` to every goal (original vertex ids).

    ``goals`` defaults to the graph's goal set.  The kPC variants need
    ``overlay``; goals outside its cover are attached per query.
    ``base_view`` lets callers reuse a prebuilt :func:`graph_view` or
    :func:`overlay_view` across queries.
    """
    if variant not in VARIANTS:
        raise QueryError(f"unknown variant {variant!r}")
    if not 0 <= source < g.n:
        raise QueryError(f"source {source} out of range")
    goals = sorted(set(g.goals if goals is None else goals))
    for t in goals:
        if not 0 <= t < g.n:
            raise QueryError(f"goal {t} out of range")
    if g.has_negative_weights():
        raise QueryError("label-setting search requires non-negative canonical weights")
    use_t = variant.startswith("t-")
    attach_seconds = 0.0
    if "kpc" in variant:
        if overlay is None:
            raise QueryError(f"variant {variant} needs an overlay")
        started = time.perf_counter()
        base = base_view if base_view is not None else overlay_view(g, overlay)
        view, sid = prepare_overlay_view(base, source, goals)
        attach_seconds = time.perf_counter() - started
    else:
        view = base_view if base_view is not None else graph_view(g)
        sid = source
    state = mls_run(view, sid, use_t, feasible, shadow, check)
    state.stats.attach_seconds = attach_seconds
    state.stats.seconds += attach_seconds
    pareto = {}
    for t in goals:
        vid = view.view_id(t) if t != source else sid
        pareto[t] = list(state.perm[vid]) if vid is not None else []
    unreachable = {t for t, labs in pareto.items() if not labs}
    return QueryResult(pareto, unreachable, state.stats, view, g.criteria, variant)
