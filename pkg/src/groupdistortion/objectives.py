"""Group-fair cost objectives and distortion ratios."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Grouping, Instance, Objective


def _check(inst: Instance, grp: Grouping, x: int | None = None) -> None:
    grp.check_agents(inst.n)
    if x is not None and not 0 <= x < inst.m:
        raise IndexError(f"alternative index {x} out of range for m={inst.m}")


def group_costs(agent_alt: np.ndarray, grp: Grouping, obj: Objective) -> np.ndarray:
    """Cost of every alternative from an ``n x m`` agent-alternative block."""
    obj = Objective.parse(obj)
    if obj is Objective.MAX_OF_AVG:
        per_group = np.array([agent_alt[list(g)].mean(axis=0) for g in grp.groups])
        return per_group.max(axis=0)
    per_group = np.array([agent_alt[list(g)].max(axis=0) for g in grp.groups])
    return per_group.sum(axis=0) / grp.k


def max_of_avg(inst: Instance, grp: Grouping, x: int) -> float:
    """Largest average distance to ``x`` over the groups."""
    _check(inst, grp, x)
    col = inst.agent_alt[:, x]
    return float(max(col[list(g)].mean() for g in grp.groups))


def avg_of_max(inst: Instance, grp: Grouping, x: int) -> float:
    """Average over groups of the farthest member's distance to ``x``."""
    _check(inst, grp, x)
    col = inst.agent_alt[:, x]
    return float(sum(col[list(g)].max() for g in grp.groups) / grp.k)


def cost(inst: Instance, grp: Grouping, obj: Objective | str, x: int) -> float:
    obj = Objective.parse(obj)
    return max_of_avg(inst, grp, x) if obj is Objective.MAX_OF_AVG else avg_of_max(inst, grp, x)


@dataclass(frozen=True)
class CostProfile:
    costs: tuple[float, ...]
    argmin: tuple[int, ...]

    @property
    def best(self) -> int:
        return self.argmin[0]

    @property
    def min_cost(self) -> float:
        return self.costs[self.argmin[0]]


def cost_profile(inst: Instance, grp: Grouping, obj: Objective | str) -> CostProfile:
    _check(inst, grp)
    c = group_costs(inst.agent_alt, grp, Objective.parse(obj))
    lo = c.min()
    return CostProfile(tuple(float(v) for v in c), tuple(int(x) for x in np.flatnonzero(c == lo)))


def optimal_alternative(inst: Instance, grp: Grouping, obj: Objective | str) -> tuple[int, float]:
    """Exhaustive minimiser over all alternatives, lowest index on ties."""
    prof = cost_profile(inst, grp, obj)
    return prof.best, prof.min_cost


def ratio(winner_cost: float, opt_cost: float) -> float:
    """``winner_cost / opt_cost`` with 0/0 read as 1 and x/0 as infinity."""
    if opt_cost == 0:
        return 1.0 if winner_cost == 0 else math.inf
    return winner_cost / opt_cost


@dataclass(frozen=True)
class DistortionReport:
    winner: int
    winner_cost: float
    opt: int
    opt_cost: float
    ratio: float
    objective: Objective
    mechanism: str = ""
    costs: tuple[float, ...] = ()

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.ratio)


def distortion(
    inst: Instance, grp: Grouping, obj: Objective | str, winner: int, mechanism: str = ""
) -> DistortionReport:
    obj = Objective.parse(obj)
    _check(inst, grp, winner)
    prof = cost_profile(inst, grp, obj)
    wc = prof.costs[winner]
    return DistortionReport(
        winner=winner,
        winner_cost=wc,
        opt=prof.best,
        opt_cost=prof.min_cost,
        ratio=ratio(wc, prof.min_cost),
        objective=obj,
        mechanism=mechanism,
        costs=prof.costs,
    )
