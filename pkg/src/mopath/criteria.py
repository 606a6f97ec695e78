"""Synthetic criteria schemes over an existing graph structure.

The first criterion of the input graph is the ground criterion ``t``.  Each
scheme keeps ``t`` and derives the remaining criteria per edge:

========  ===============================
2-C       t, t + c*t
2-U       t, r
3-C       t, t + c1*t, t + c2*t
3-U       t, r1, r2
t-inv     t, 1/t
========  ===============================

``r`` is a uniform integer in 0..50 and ``c`` a uniform real in
[-0.5, 0.5].  Every generated criterion gets its own draw.  Draws come from
:class:`random.Random` (MT19937) seeded with the scheme seed, consumed in
edge-id order, one draw per generated criterion.  Reals are rounded to six
decimals so that text round-trips are exact.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .graph import MultiGraph

SCHEMES = ("2-C", "2-U", "3-C", "3-U", "t-inv")
R_MAX = 50
C_HALF_WIDTH = 0.5
DECIMALS = 6


@dataclass(frozen=True)
class Scheme:
    name: str
    seed: int = 0

    def __post_init__(self):
        if self.name not in SCHEMES:
            raise ValueError(f"unknown scheme {self.name!r}; choose from {', '.join(SCHEMES)}")

    @property
    def criteria_count(self) -> int:
        return 3 if self.name.startswith("3") else 2


def correlated(t: float, c: float) -> float:
    return round(t + c * t, DECIMALS)


def generate(g: MultiGraph, scheme: Scheme) -> MultiGraph:
    rng = random.Random(scheme.seed)
    extra = scheme.criteria_count - 1
    costs = []
    for eid, (_, _, cost) in enumerate(g.edges):
        t = cost[0]
        if scheme.name == "t-inv":
            if t < 1:
                raise ValueError(f"scheme t-inv requires t >= 1; edge {eid} has t={t}")
            costs.append((t, round(1.0 / t, DECIMALS)))
        elif scheme.name.endswith("C"):
            draws = [rng.uniform(-C_HALF_WIDTH, C_HALF_WIDTH) for _ in range(extra)]
            costs.append((t, *(correlated(t, c) for c in draws)))
        else:
            costs.append((t, *(float(rng.randint(0, R_MAX)) for _ in range(extra))))
    return g.with_costs(costs)
