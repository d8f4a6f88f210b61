"""Worst-case metric completion of an ordinal profile via linear programming.

For a fixed winner ``w``, candidate optimum ``o`` and a choice of which terms
realise the max in ``cost(w)``, the largest ``cost(w)`` over metrics that are
consistent with the profile and satisfy ``cost(o) <= 1`` is an LP over the
pairwise distances. The distortion supremum is the maximum of these LP values
over all ``o`` and all choices (Max-of-Avg: the binding group; Avg-of-Max: the
farthest agent in each group).

When alternative-alternative distances are pinned the feasible set is no
longer a cone, so the ratio is linearised with a Charnes-Cooper scale
variable ``s``: distances are ``s * d`` and pinned entries become
``x_ab = s * D_ab``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .. import simplex
from ..core import Grouping, Instance, Objective, OrdinalProfile, validate_instance
from ..objectives import distortion

DEFAULT_MAX_POINTS = 25
DEFAULT_MAX_LPS = 5_000
WITNESS_TOL = 1e-6


class LPBudgetExceeded(RuntimeError):
    pass


class LPInfeasible(RuntimeError):
    """Raised if a metric LP turns out infeasible; cannot happen for valid profiles."""


@dataclass
class MetricLP:
    """One LP of the family: ``max c.x  s.t.  A x <= b, x >= 0``."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    n_pairs: int
    scale_var: int | None  # column of the Charnes-Cooper variable, if any
    o: int
    selection: tuple


@dataclass
class LPAudit:
    ratio: float
    witness: Instance | None
    o: int | None
    selection: tuple | None
    lps_solved: int

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.ratio)


class _PairIndex:
    def __init__(self, size: int):
        self.size = size
        idx = -np.ones((size, size), dtype=np.intp)
        iu = np.triu_indices(size, k=1)
        idx[iu] = np.arange(len(iu[0]))
        idx[(iu[1], iu[0])] = np.arange(len(iu[0]))
        self.idx = idx
        self.count = len(iu[0])

    def __call__(self, p: int, q: int) -> int:
        return int(self.idx[p, q])

    def to_matrix(self, x: np.ndarray) -> np.ndarray:
        d = np.zeros((self.size, self.size))
        iu = np.triu_indices(self.size, k=1)
        d[iu] = x[: self.count]
        return d + d.T


def _base_rows(profile: OrdinalProfile, pairs: _PairIndex) -> np.ndarray:
    """Triangle and ordinal-consistency rows (all with right-hand side 0)."""
    size = pairs.size
    tri = np.array(list(itertools.combinations(range(size), 3)), dtype=np.intp).reshape(-1, 3)
    nt = len(tri)
    rows = np.zeros((3 * nt, pairs.count))
    ar = np.arange(nt)
    p, q, r = tri[:, 0], tri[:, 1], tri[:, 2]
    ipq, ipr, iqr = pairs.idx[p, q], pairs.idx[p, r], pairs.idx[q, r]
    for t, (long, s1, s2) in enumerate(((ipq, ipr, iqr), (ipr, ipq, iqr), (iqr, ipq, ipr))):
        block = rows[t * nt : (t + 1) * nt]
        block[ar, long] = 1.0
        block[ar, s1] = -1.0
        block[ar, s2] = -1.0
    n, m = profile.n, profile.m
    ordr = np.zeros((n * (m - 1), pairs.count))
    rk = profile.rankings
    for i in range(n):
        for t in range(m - 1):
            ordr[i * (m - 1) + t, pairs(i, n + rk[i, t])] = 1.0
            ordr[i * (m - 1) + t, pairs(i, n + rk[i, t + 1])] = -1.0
    return np.vstack([rows, ordr])


def _selections(profile: OrdinalProfile, grp: Grouping, obj: Objective) -> list[tuple]:
    """Max-attaining choices for cost(w), one representative per symmetry class.

    Agents in the same group with the same ranking are interchangeable in the
    LP, and so are groups with the same size and multiset of rankings.
    """
    rk = [tuple(r) for r in profile.rankings.tolist()]
    if obj is Objective.MAX_OF_AVG:
        seen, out = set(), []
        for gi, g in enumerate(grp.groups):
            key = tuple(sorted(rk[i] for i in g))
            if key not in seen:
                seen.add(key)
                out.append((gi,))
        return out
    reps = []
    for g in grp.groups:
        by_rank: dict[tuple, int] = {}
        for i in g:
            by_rank.setdefault(rk[i], i)
        reps.append(list(by_rank.values()))
    return list(itertools.product(*reps))


def build_lp(
    profile: OrdinalProfile,
    grp: Grouping,
    winner: int,
    o: int,
    obj: Objective,
    selection: tuple,
    pinned: np.ndarray | None = None,
    base: np.ndarray | None = None,
) -> MetricLP:
    n, m = profile.n, profile.m
    pairs = _PairIndex(n + m)
    if base is None:
        base = _base_rows(profile, pairs)
    npair = pairs.count
    k = grp.k
    n_aux = k if obj is Objective.AVG_OF_MAX else 0
    scale_var = npair + n_aux if pinned is not None else None
    nv = npair + n_aux + (1 if pinned is not None else 0)

    blocks = [np.hstack([base, np.zeros((base.shape[0], nv - npair))])]
    rhs = [np.zeros(base.shape[0])]

    # cost(o) <= 1
    if obj is Objective.MAX_OF_AVG:
        norm = np.zeros((k, nv))
        for gi, g in enumerate(grp.groups):
            for i in g:
                norm[gi, pairs(i, n + o)] = 1.0 / len(g)
        blocks.append(norm)
        rhs.append(np.ones(k))
    else:
        link = np.zeros((n, nv))
        for gi, g in enumerate(grp.groups):
            for i in g:
                link[i, pairs(i, n + o)] = 1.0
                link[i, npair + gi] = -1.0
        total = np.zeros((1, nv))
        total[0, npair : npair + k] = 1.0 / k
        blocks += [link, total]
        rhs += [np.zeros(n), np.ones(1)]

    if pinned is not None:
        iu = np.triu_indices(m, k=1)
        pin = np.zeros((len(iu[0]), nv))
        for r, (a, b) in enumerate(zip(*iu)):
            pin[r, pairs(n + a, n + b)] = 1.0
            pin[r, scale_var] = -pinned[a, b]
        blocks += [pin, -pin]
        rhs += [np.zeros(len(pin)), np.zeros(len(pin))]

    c = np.zeros(nv)
    if obj is Objective.MAX_OF_AVG:
        (gi,) = selection
        g = grp.groups[gi]
        for i in g:
            c[pairs(i, n + winner)] += 1.0 / len(g)
    else:
        for i in selection:
            c[pairs(i, n + winner)] += 1.0 / k
    return MetricLP(c, np.vstack(blocks), np.concatenate(rhs), npair, scale_var, o, selection)


def _witness(x: np.ndarray, lp: MetricLP, n: int, m: int) -> Instance | None:
    pairs = _PairIndex(n + m)
    d = pairs.to_matrix(x)
    if lp.scale_var is not None:
        s = x[lp.scale_var]
        if s <= 1e-12:
            return None
        d = d / s
    return Instance(n, m, d)


def _check_pinned(pinned, m: int) -> np.ndarray:
    p = np.asarray(pinned, dtype=float)
    if p.shape != (m, m):
        raise ValueError(f"pinned alternative distances must be {m}x{m}")
    full = np.zeros((m + 1, m + 1))
    full[1:, 1:] = p
    full[0, 1:] = full[1:, 0] = p[0]
    if not validate_instance(Instance(1, m, full), 1e-9).ok:
        raise ValueError("pinned alternative distances are not a metric")
    return p


def lp_worst_metric(
    profile: OrdinalProfile,
    grp: Grouping,
    winner: int,
    obj: Objective | str,
    pinned_alt_dists=None,
    max_points: int = DEFAULT_MAX_POINTS,
    max_lps: int = DEFAULT_MAX_LPS,
) -> LPAudit:
    """Supremum of the winner's distortion over all metrics consistent with ``profile``.

    Parameters
    ----------
    profile, grp
        Ordinal profile and grouping of the agents.
    winner : int
        The alternative whose distortion is audited.
    obj : Objective
    pinned_alt_dists : (m, m) array, optional
        Alternative-alternative distances every admissible metric must reproduce.

    Returns
    -------
    LPAudit
        ``ratio`` (``inf`` when unbounded) and a witness instance whose metric
        attains it. The witness is checked to be a metric at 1e-6 and to
        reproduce the ratio within 1e-6 (relative for ratios above 1).
    """
    obj = Objective.parse(obj)
    n, m = profile.n, profile.m
    grp.check_agents(n)
    if not 0 <= winner < m:
        raise IndexError(f"winner {winner} out of range")
    if n + m > max_points:
        raise LPBudgetExceeded(f"n + m = {n + m} exceeds the LP budget of {max_points} points")
    pinned = None if pinned_alt_dists is None else _check_pinned(pinned_alt_dists, m)
    sels = _selections(profile, grp, obj)
    if len(sels) * (m - 1) > max_lps:
        raise LPBudgetExceeded(f"{len(sels) * (m - 1)} LPs exceed the budget of {max_lps}")

    pairs = _PairIndex(n + m)
    base = _base_rows(profile, pairs)
    best = LPAudit(1.0, None, None, None, 0)
    best_lp = best_x = None
    solved = 0
    for o in range(m):
        if o == winner:
            continue
        for sel in sels:
            lp = build_lp(profile, grp, winner, o, obj, sel, pinned, base)
            res = simplex.solve(lp.c, lp.A, lp.b)
            solved += 1
            if res.status == simplex.UNBOUNDED:
                wit = _witness(res.ray, lp, n, m)
                audit = LPAudit(math.inf, wit, o, sel, solved)
                if wit is not None:
                    _verify(wit, grp, obj, winner, math.inf)
                return audit
            if res.value > best.ratio + 1e-12:
                best = LPAudit(res.value, None, o, sel, solved)
                best_lp, best_x = lp, res.x
    best.lps_solved = solved
    if best_lp is None:
        # every consistent metric gives ratio 1; any consistent metric is a witness
        best.witness = _any_consistent_metric(profile, pinned)
    else:
        best.witness = _witness(best_x, best_lp, n, m)
        if best.witness is None:
            raise LPInfeasible("optimal LP point has zero scale; no finite witness")
    _verify(best.witness, grp, obj, winner, best.ratio)
    return best


def _any_consistent_metric(profile: OrdinalProfile, pinned) -> Instance:
    """Some metric consistent with the profile (and the pinned distances, if any)."""
    n, m = profile.n, profile.m
    if pinned is None:
        # alternatives pairwise 1 apart, agents at 1 + pos/(2m) from each alternative
        aa = 1.0 - np.eye(m)
        ax = 1.0 + profile.positions / (2.0 * m)
        d = np.zeros((n + m, n + m))
        d[n:, n:] = aa
        d[:n, n:] = ax
        d[n:, :n] = ax.T
        ag = np.min(ax[:, None, :] + ax[None, :, :], axis=2)
        np.fill_diagonal(ag, 0.0)
        d[:n, :n] = ag
        return Instance(n, m, d)
    # maximise the Charnes-Cooper scale s <= 1 over the consistent cone with pins
    pairs = _PairIndex(n + m)
    base = _base_rows(profile, pairs)
    nv = pairs.count + 1
    iu = np.triu_indices(m, k=1)
    pin = np.zeros((len(iu[0]), nv))
    for r, (a, b) in enumerate(zip(*iu)):
        pin[r, pairs(n + a, n + b)] = 1.0
        pin[r, -1] = -pinned[a, b]
    cap = np.zeros((1, nv))
    cap[0, -1] = 1.0
    A = np.vstack([np.hstack([base, np.zeros((len(base), 1))]), pin, -pin, cap])
    b = np.concatenate([np.zeros(len(base) + 2 * len(pin)), [1.0]])
    c = np.zeros(nv)
    c[-1] = 1.0
    res = simplex.solve(c, A, b)
    if res.status != simplex.OPTIMAL or res.value <= 1e-12:
        raise LPInfeasible("no metric is consistent with the profile and the pinned distances")
    return Instance(n, m, pairs.to_matrix(res.x) / res.x[-1])


def _verify(wit: Instance, grp: Grouping, obj: Objective, winner: int, claimed: float) -> None:
    res = validate_instance(wit, WITNESS_TOL)
    if not res.ok:
        worst = max(v.slack for v in res.violations)
        raise AssertionError(f"LP witness is not a metric (worst slack {worst:.3g})")
    got = distortion(wit, grp, obj, winner).ratio
    if math.isinf(claimed):
        if not math.isinf(got):
            raise AssertionError("unbounded LP ray does not give infinite distortion")
        return
    if abs(got - claimed) > WITNESS_TOL * max(1.0, claimed):
        raise AssertionError(f"witness ratio {got!r} differs from LP value {claimed!r}")
