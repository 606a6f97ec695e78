"""Multicriteria one-to-many shortest paths on k-path-cover overlays."""
from .dominance import dominates, lex_compare, pareto_filter, weak_dominates
from .graph import CriterionSpec, MultiGraph, Path, load_graph, save_graph
from .kpc import OverlayGraph, build_overlay, load_overlay, save_overlay
from .mls import VARIANTS, QueryResult, query

__all__ = [
    "CriterionSpec", "MultiGraph", "OverlayGraph", "Path", "QueryResult", "VARIANTS",
    "build_overlay", "dominates", "lex_compare", "load_graph", "load_overlay", "pareto_filter",
    "query", "save_graph", "save_overlay", "weak_dominates",
]
