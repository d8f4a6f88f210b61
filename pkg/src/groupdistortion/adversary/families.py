"""Lower-bound instance families on the line.

Every family places alternative ``a`` at index 0 and builds the layout so
that ``a`` ties with ``b`` on the statistic the matching mechanism looks at;
the lowest-index tie-break therefore picks ``a``, and the grouping is chosen
to make ``a`` as bad as possible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from ..core import Grouping, Instance, Objective
from ..objectives import distortion


@dataclass(frozen=True)
class LowerBoundInstance:
    inst: Instance
    grp: Grouping
    objective: Objective
    predicted_ratio: float
    family: str
    params: dict = field(default_factory=dict)
    adversarial_winner: int = 0
    exact_ratio: Fraction | None = None

    def measured_ratio(self) -> float:
        return distortion(self.inst, self.grp, self.objective, self.adversarial_winner).ratio


# explicit matrices beyond this many points would need more than ~1.2 GB
MAX_MATERIALIZED_POINTS = 12_000


class _Layout:
    """Accumulates agent positions group by group."""

    def __init__(self):
        self.positions: list[float] = []
        self.groups: list[list[int]] = []

    def group(self, *blocks: tuple[int, float]) -> None:
        members = []
        for count, pos in blocks:
            for _ in range(count):
                members.append(len(self.positions))
                self.positions.append(pos)
        self.groups.append(members)

    def build(self, alternatives) -> tuple[Instance, Grouping]:
        size = len(self.positions) + len(alternatives)
        if size > MAX_MATERIALIZED_POINTS:
            raise ValueError(
                f"instance would have {size} points; explicit distance matrices are limited to {MAX_MATERIALIZED_POINTS}"
            )
        return Instance.from_points(self.positions, alternatives), Grouping(self.groups)


def _need_int(name: str, value, low: int) -> int:
    if int(value) != value or value < low:
        raise ValueError(f"{name} must be an integer >= {low}, got {value!r}")
    return int(value)


def gen_full_maxavg(lam: int) -> LowerBoundInstance:
    """a@1, b@3; one group of lam agents at 4, lam groups of (one at 0, lam-1 at 2)."""
    lam = _need_int("lambda", lam, 2)
    lay = _Layout()
    lay.group((lam, 4.0))
    for _ in range(lam):
        lay.group((1, 0.0), (lam - 1, 2.0))
    inst, grp = lay.build([1.0, 3.0])
    exact = Fraction(3 * lam, lam + 2)
    return LowerBoundInstance(inst, grp, Objective.MAX_OF_AVG, float(exact), "full-maxavg", {"lambda": lam}, exact_ratio=exact)


def gen_full_avgmax_symmetric(lam: int) -> LowerBoundInstance:
    """Same points as :func:`gen_full_maxavg`, grouped so the winner ``a`` pays.

    The lam agents at 0 form one group; each other group holds one agent at 4
    and lam-1 agents at 2.
    """
    lam = _need_int("lambda", lam, 2)
    lay = _Layout()
    lay.group((lam, 0.0))
    for _ in range(lam):
        lay.group((1, 4.0), (lam - 1, 2.0))
    inst, grp = lay.build([1.0, 3.0])
    exact = Fraction(3 * lam + 1, lam + 3)
    return LowerBoundInstance(inst, grp, Objective.AVG_OF_MAX, float(exact), "full-avgmax-sym", {"lambda": lam}, exact_ratio=exact)


def gen_full_avgmax_asym(k: int) -> LowerBoundInstance:
    """a@0, b@1; k agents at each; one group of all k at 0 plus one at 1, then k-1 singletons at 1."""
    k = _need_int("k", k, 2)
    lay = _Layout()
    lay.group((k, 0.0), (1, 1.0))
    for _ in range(k - 1):
        lay.group((1, 1.0))
    inst, grp = lay.build([0.0, 1.0])
    exact = Fraction(k)
    return LowerBoundInstance(inst, grp, Objective.AVG_OF_MAX, float(exact), "full-avgmax-asym", {"k": k}, exact_ratio=exact)


def gen_ordinal_maxavg(lam: int) -> LowerBoundInstance:
    """a@0, b@2; lam b-voters at 2 + (lam+1)/(2 lam) in the first group.

    Each of the other lam groups has (lam+1)/2 agents at 1 (tied, ranking a
    first) and (lam-1)/2 agents at 2.
    """
    lam = _need_int("lambda", lam, 3)
    if lam % 2 == 0:
        raise ValueError(f"lambda must be odd, got {lam}")
    lay = _Layout()
    lay.group((lam, 2.0 + (lam + 1) / (2 * lam)))
    for _ in range(lam):
        lay.group(((lam + 1) // 2, 1.0), ((lam - 1) // 2, 2.0))
    inst, grp = lay.build([0.0, 2.0])
    exact = Fraction(5 * lam + 1, lam + 1)
    return LowerBoundInstance(inst, grp, Objective.MAX_OF_AVG, float(exact), "ord-maxavg", {"lambda": lam}, exact_ratio=exact)


def gen_ordinal_avgmax_symmetric(lam: int, eps: float = 0.1) -> LowerBoundInstance:
    """a@0, b@2; k = 2(lam-1) groups of size lam.

    lam groups hold lam-1 a-voters at 1 - eps/10 and one b-voter at 3; the
    remaining lam-2 groups hold lam b-voters at 2.
    """
    lam = _need_int("lambda", lam, 2)
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps!r}")
    near = 1.0 - eps / 10
    lay = _Layout()
    for _ in range(lam):
        lay.group((lam - 1, near), (1, 3.0))
    for _ in range(lam - 2):
        lay.group((lam, 2.0))
    inst, grp = lay.build([0.0, 2.0])
    # k*cost(a) = 3*lam + 2*(lam - 2) = 5*lam - 4 and k*cost(b) = lam*(1 + eps/10)
    predicted = (5 * lam - 4) / (lam * (1 + eps / 10))
    return LowerBoundInstance(inst, grp, Objective.AVG_OF_MAX, predicted, "ord-avgmax-sym", {"lambda": lam, "eps": eps})


def gen_ordinal_avgmax_asym(k: int) -> LowerBoundInstance:
    """a@0, b@2; first group is k agents at 1 plus one at 3, then k-1 singletons at 2."""
    k = _need_int("k", k, 2)
    lay = _Layout()
    lay.group((k, 1.0), (1, 3.0))
    for _ in range(k - 1):
        lay.group((1, 2.0))
    inst, grp = lay.build([0.0, 2.0])
    exact = Fraction(2 * k + 1)
    return LowerBoundInstance(inst, grp, Objective.AVG_OF_MAX, float(exact), "ord-avgmax-asym", {"k": k}, exact_ratio=exact)


FAMILIES: dict[str, tuple[Callable[..., LowerBoundInstance], tuple[str, ...]]] = {
    "full-maxavg": (gen_full_maxavg, ("lambda",)),
    "full-avgmax-sym": (gen_full_avgmax_symmetric, ("lambda",)),
    "full-avgmax-asym": (gen_full_avgmax_asym, ("k",)),
    "ord-maxavg": (gen_ordinal_maxavg, ("lambda",)),
    "ord-avgmax-sym": (gen_ordinal_avgmax_symmetric, ("lambda", "eps")),
    "ord-avgmax-asym": (gen_ordinal_avgmax_asym, ("k",)),
}

# mechanism whose tie the family exploits
FAMILY_MECHANISM = {
    "full-maxavg": "min-total",
    "full-avgmax-sym": "min-total",
    "full-avgmax-asym": "min-max",
    "ord-maxavg": "top-choice",
    "ord-avgmax-sym": "top-choice",
    "ord-avgmax-asym": "top-choice",
}

ORDINAL_FAMILIES = ("ord-maxavg", "ord-avgmax-sym", "ord-avgmax-asym")


def generate(family: str, **params) -> LowerBoundInstance:
    try:
        fn, names = FAMILIES[family]
    except KeyError:
        raise KeyError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}") from None
    args = [params[p] for p in names if p in params]
    return fn(*args)
