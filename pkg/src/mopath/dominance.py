"""Dominance and ordering primitives over cost vectors.

All vectors are canonical: every criterion is minimized.  Comparisons are
exact; there is no epsilon anywhere in this package.
"""
from __future__ import annotations

import enum
from typing import Iterable, Sequence

CostVector = tuple[float, ...]


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def _check_lengths(a: Sequence[float], b: Sequence[float]) -> None:
    if len(a) != len(b):
        raise ValueError(f"cost vector length mismatch: {len(a)} != {len(b)}")


def weak_dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff ``a[i] <= b[i]`` for every criterion."""
    _check_lengths(a, b)
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """Strict dominance: weakly dominates and differs somewhere."""
    _check_lengths(a, b)
    strict = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            strict = True
    return strict


def lex_compare(a: Sequence[float], b: Sequence[float]) -> Ordering:
    _check_lengths(a, b)
    for x, y in zip(a, b):
        if x < y:
            return Ordering.LESS
        if x > y:
            return Ordering.GREATER
    return Ordering.EQUAL


def add(a: Sequence[float], b: Sequence[float]) -> CostVector:
    return tuple([x + y for x, y in zip(a, b)])


def pareto_filter(vectors: Iterable[Sequence[float]]) -> set[CostVector]:
    """Return the non-dominated subset of ``vectors`` with duplicates collapsed.

    Sorting lexicographically first means a vector can only be weakly
    dominated by something that precedes it, so one pass suffices.
    """
    kept: list[CostVector] = []
    for vec in sorted({tuple(v) for v in vectors}):
        if not any(weak_dominates(k, vec) for k in kept):
            kept.append(vec)
    return set(kept)
