"""Road-like synthetic graphs for trend benchmarks.

A ``side x side`` lattice of intersections joined by two-way streets.  Each
street is subdivided into ``segment`` degree-two vertices, as road networks
are mostly chains between junctions.  Vertex ids follow a row-major sweep
of the embedding, loosely imitating spatially clustered map ids.
"""
from __future__ import annotations

import random

from .graph import CriterionSpec, MultiGraph


def road_grid(side: int, segment: int, seed: int = 0, drop: float = 0.0,
              time_range: tuple[int, int] = (1, 10)) -> MultiGraph:
    """Two-way subdivided grid with one integer travel time ``t`` per link.

    Both directions of a link share ``t``.  ``drop`` removes each street
    with that probability (intersections may become dead ends).  The single
    criterion is meant to be expanded with :mod:`mopath.criteria`.
    """
    rng = random.Random(seed)
    step = segment + 1
    coords: dict[tuple[int, int], None] = {}
    links: list[tuple[tuple[int, int], tuple[int, int]]] = []

    def street(a: tuple[int, int], b: tuple[int, int]) -> None:
        (ay, ax), (by, bx) = a, b
        dy, dx = (by - ay) // step, (bx - ax) // step
        pts = [(ay + i * dy, ax + i * dx) for i in range(step + 1)]
        for p in pts:
            coords.setdefault(p)
        links.extend(zip(pts, pts[1:]))

    for i in range(side):
        for j in range(side):
            coords.setdefault((i * step, j * step))
            if j + 1 < side and rng.random() >= drop:
                street((i * step, j * step), (i * step, (j + 1) * step))
            if i + 1 < side and rng.random() >= drop:
                street((i * step, j * step), ((i + 1) * step, j * step))

    ids = {p: k for k, p in enumerate(sorted(coords))}
    lo, hi = time_range
    edges = []
    for a, b in links:
        t = float(rng.randint(lo, hi))
        edges.append((ids[a], ids[b], (t,)))
        edges.append((ids[b], ids[a], (t,)))
    return MultiGraph(len(ids), CriterionSpec.all_min(1), edges)


def vertex_count(side: int, segment: int) -> int:
    """Vertices of an undropped :func:`road_grid`."""
    return side * side + 2 * side * (side - 1) * segment
