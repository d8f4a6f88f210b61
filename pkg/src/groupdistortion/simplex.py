"""Dense tableau simplex for ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0``.

The origin is always feasible for this form, so a single phase suffices;
equality constraints are passed as pairs of opposite inequalities. Entering
and leaving variables follow Bland's smallest-index rule, which cannot cycle
on the heavily degenerate metric LPs built in :mod:`groupdistortion.adversary`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"


class SimplexError(RuntimeError):
    pass


@dataclass
class LPResult:
    status: str
    value: float
    x: np.ndarray
    ray: np.ndarray | None = None
    iterations: int = 0


def solve(c, A, b, *, tol: float = 1e-9, max_iter: int = 200_000) -> LPResult:
    """Maximise ``c @ x`` over ``{x >= 0 : A @ x <= b}``.

    Parameters
    ----------
    c : (nv,) array
    A : (nr, nv) array
    b : (nr,) array, all entries >= 0
    tol : float
        Pivot and reduced-cost tolerance.

    Returns
    -------
    LPResult
        ``status`` is ``"optimal"`` or ``"unbounded"``. For an unbounded
        problem ``x`` is the last basic solution and ``ray`` a direction
        ``r >= 0`` with ``A @ r <= 0`` and ``c @ r > 0``.
    """
    c = np.asarray(c, dtype=float)
    T = np.array(A, dtype=float)
    rhs = np.array(b, dtype=float)
    nr, nv = T.shape
    if c.shape != (nv,) or rhs.shape != (nr,):
        raise ValueError("inconsistent LP dimensions")
    if np.any(rhs < 0):
        raise ValueError("this solver needs b >= 0 so that the origin is feasible")

    # dictionary form: x_B = rhs - T x_N ;  z = z0 + red . x_N
    nonbasic = np.arange(nv)
    basic = np.arange(nv, nv + nr)
    red = c.copy()
    z0 = 0.0

    for it in range(max_iter):
        cand = np.flatnonzero(red > tol)
        if cand.size == 0:
            x = np.zeros(nv + nr)
            x[basic] = rhs
            return LPResult(OPTIMAL, z0, x[:nv].copy(), iterations=it)
        j = cand[np.argmin(nonbasic[cand])]
        col = T[:, j]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            ray = np.zeros(nv + nr)
            ray[nonbasic[j]] = 1.0
            ray[basic] = -col
            x = np.zeros(nv + nr)
            x[basic] = rhs
            return LPResult(UNBOUNDED, np.inf, x[:nv].copy(), ray=np.maximum(ray[:nv], 0.0), iterations=it)
        ratios = rhs[rows] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        r = ties[np.argmin(basic[ties])]

        p = T[r, j]
        prow = T[r] / p
        prow[j] = 1.0 / p
        rb = rhs[r] / p
        colj = T[:, j].copy()
        colj[r] = 0.0
        T -= np.outer(colj, prow)
        T[:, j] = -colj / p
        T[r] = prow
        rhs -= colj * rb
        rhs[r] = rb
        np.maximum(rhs, 0.0, out=rhs)  # clip round-off below zero

        cj = red[j]
        red -= cj * prow
        red[j] = -cj / p
        z0 += cj * rb

        basic[r], nonbasic[j] = nonbasic[j], basic[r]
    raise SimplexError(f"simplex did not terminate within {max_iter} pivots")
