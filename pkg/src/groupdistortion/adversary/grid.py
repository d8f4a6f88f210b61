"""Brute-force lower bound on worst-case distortion: all placements on a 1-D grid.

Independent of the LP auditor: nothing here solves an optimisation problem,
it just tries every placement of agents and alternatives on the grid points
``0, step, 2*step, ..., span`` that agrees with the profile.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from ..core import Grouping, Objective, OrdinalProfile

MAX_POINTS = 8
DEFAULT_BUDGET = 20_000_000
_CHUNK = 200_000


class GridBudgetExceeded(RuntimeError):
    pass


def _grid(step: float, span: float) -> np.ndarray:
    if step <= 0 or span <= 0:
        raise ValueError("grid step and span must be positive")
    count = int(math.floor(span / step + 1e-9)) + 1
    return np.arange(count) * step


def _consistent_positions(grid: np.ndarray, alt_pos: np.ndarray, ranking: np.ndarray) -> np.ndarray:
    d = np.abs(grid[:, None] - alt_pos[ranking][None, :])  # G x m, in ranking order
    ok = np.all(np.diff(d, axis=1) >= 0, axis=1)
    return grid[ok]


def _costs(dist: np.ndarray, grp: Grouping, obj: Objective) -> np.ndarray:
    """``dist`` is B x n x m; returns B x m costs."""
    if obj is Objective.MAX_OF_AVG:
        return np.stack([dist[:, list(g), :].mean(axis=1) for g in grp.groups], axis=1).max(axis=1)
    return np.stack([dist[:, list(g), :].max(axis=1) for g in grp.groups], axis=1).sum(axis=1) / grp.k


def grid_worst_metric(
    profile: OrdinalProfile,
    grp: Grouping,
    winner: int,
    obj: Objective | str,
    grid_step: float,
    span: float,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """Largest distortion of ``winner`` over grid placements consistent with ``profile``.

    Refuses (``GridBudgetExceeded``) when ``n + m`` exceeds 8 or the number of
    consistent placements exceeds ``budget``; it never samples.
    """
    obj = Objective.parse(obj)
    n, m = profile.n, profile.m
    grp.check_agents(n)
    if n + m > MAX_POINTS:
        raise GridBudgetExceeded(f"n + m = {n + m} exceeds the grid oracle limit of {MAX_POINTS} points")
    grid = _grid(grid_step, span)

    plans = []
    total = 0
    for alt_pos in itertools.product(grid, repeat=m):
        alt_pos = np.array(alt_pos)
        options = [_consistent_positions(grid, alt_pos, profile.rankings[i]) for i in range(n)]
        count = math.prod(len(o) for o in options)
        if count == 0:
            continue
        total += count
        if total > budget:
            raise GridBudgetExceeded(f"more than {budget} consistent grid placements; refusing to enumerate")
        plans.append((alt_pos, options))

    best = 1.0
    for alt_pos, options in plans:
        combos = itertools.product(*options)
        while True:
            chunk = np.array(list(itertools.islice(combos, _CHUNK)), dtype=float)
            if chunk.size == 0:
                break
            dist = np.abs(chunk[:, :, None] - alt_pos[None, None, :])  # B x n x m
            costs = _costs(dist, grp, obj)
            w = costs[:, winner]
            opt = costs.min(axis=1)
            if np.any((opt == 0) & (w > 0)):
                return math.inf
            pos = opt > 0
            if np.any(pos):
                best = max(best, float(np.max(w[pos] / opt[pos])))
    return best
