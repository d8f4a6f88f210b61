"""Winner-selection mechanisms, each restricted to its information class.

Every mechanism takes one of the input types below; a mechanism can only see
what its input type carries. All argmin/argmax ties go to the lowest
alternative index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .core import (
    DEFAULT_TOLERANCE,
    Grouping,
    Instance,
    OrdinalProfile,
    ordinal_profile_from_instance,
    validate_instance,
)
from .matching import domination_graph, has_perfect_matching


class NoMatchingAlternative(RuntimeError):
    """No alternative's domination graph has a perfect matching (a bug, never a valid outcome)."""


class MRequired2(ValueError):
    """A two-alternative mechanism was given m != 2."""


class InvalidAlternativeMetric(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FullInfo:
    """Agent-alternative distances only (no grouping)."""

    agent_alt: np.ndarray

    def __post_init__(self):
        a = np.array(self.agent_alt, dtype=float, copy=True)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 2:
            raise ValueError("agent_alt must be an n x m array with n >= 1, m >= 2")
        a.setflags(write=False)
        object.__setattr__(self, "agent_alt", a)

    @classmethod
    def from_instance(cls, inst: Instance) -> "FullInfo":
        return cls(inst.agent_alt)


@dataclass(frozen=True)
class Ordinal:
    profile: OrdinalProfile

    @classmethod
    def from_instance(cls, inst: Instance) -> "Ordinal":
        return cls(ordinal_profile_from_instance(inst))


@dataclass(frozen=True)
class GroupAwareOrdinal:
    profile: OrdinalProfile
    grouping: Grouping

    def __post_init__(self):
        self.grouping.check_agents(self.profile.n)

    @classmethod
    def from_instance(cls, inst: Instance, grp: Grouping) -> "GroupAwareOrdinal":
        return cls(ordinal_profile_from_instance(inst), grp)


@dataclass(frozen=True, eq=False)
class GroupAwareWithAltDistances:
    profile: OrdinalProfile
    grouping: Grouping
    alt_dist: np.ndarray

    def __post_init__(self):
        self.grouping.check_agents(self.profile.n)
        d = np.array(self.alt_dist, dtype=float, copy=True)
        if d.shape != (self.profile.m, self.profile.m):
            raise InvalidAlternativeMetric(f"alternative distances must be {self.profile.m}x{self.profile.m}, got {d.shape}")
        d.setflags(write=False)
        object.__setattr__(self, "alt_dist", d)

    @classmethod
    def from_instance(cls, inst: Instance, grp: Grouping) -> "GroupAwareWithAltDistances":
        return cls(ordinal_profile_from_instance(inst), grp, inst.alt_alt)


MechanismInput = Union[FullInfo, Ordinal, GroupAwareOrdinal, GroupAwareWithAltDistances]


def _expect(inp, kind):
    if not isinstance(inp, kind):
        raise TypeError(f"expected {kind.__name__} input, got {type(inp).__name__}")


def min_total_distance(inp: FullInfo) -> int:
    """Alternative with the smallest total distance from all agents."""
    _expect(inp, FullInfo)
    return int(np.argmin(inp.agent_alt.sum(axis=0)))


def min_max_distance(inp: FullInfo) -> int:
    """Alternative with the smallest distance to its farthest agent."""
    _expect(inp, FullInfo)
    return int(np.argmin(inp.agent_alt.max(axis=0)))


def matching_winner(inp: Ordinal) -> int:
    """First alternative (by index) whose domination graph has a perfect matching."""
    _expect(inp, Ordinal)
    profile = inp.profile
    for x in range(profile.m):
        if has_perfect_matching(domination_graph(profile, x))[0]:
            return x
    raise NoMatchingAlternative("no alternative admits a perfect matching in its domination graph")


def plurality_veto(inp: Ordinal, order: Sequence[int] | None = None) -> int:
    """PluralityVeto: plurality scores are vetoed down one agent at a time.

    Each alternative starts with its number of first-place votes; those with
    none are out from the start. Agents, in ``order`` (ascending index by
    default), each remove one point from their least-preferred alternative
    still holding points. An alternative is eliminated when its score reaches
    zero, and the last one eliminated wins.
    """
    _expect(inp, Ordinal)
    profile = inp.profile
    n = profile.n
    order = list(range(n)) if order is None else [int(i) for i in order]
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the agents")
    score = np.bincount(profile.tops, minlength=profile.m)
    winner = -1
    for i in order:
        # least preferred alternative with a positive score
        for x in profile.rankings[i][::-1]:
            if score[x] > 0:
                score[x] -= 1
                if score[x] == 0:
                    winner = int(x)
                break
    return winner


def top_choice_winner(inp: Ordinal) -> int:
    """Plurality winner; always the top choice of at least one agent."""
    _expect(inp, Ordinal)
    counts = np.bincount(inp.profile.tops, minlength=inp.profile.m)
    return int(np.argmax(counts))


def _two_alternatives(profile: OrdinalProfile) -> None:
    if profile.m != 2:
        raise MRequired2(f"this mechanism is defined for exactly two alternatives, got m={profile.m}")


def _first_votes(inp: GroupAwareOrdinal) -> list[np.ndarray]:
    tops = inp.profile.tops
    return [np.bincount(tops[list(g)], minlength=2) for g in inp.grouping.groups]


def group_proportional_majority(inp: GroupAwareOrdinal) -> int:
    """Alternative with the largest share of first-place votes inside some group (m = 2)."""
    _expect(inp, GroupAwareOrdinal)
    _two_alternatives(inp.profile)
    # compare shares as exact fractions via cross-multiplication
    best = [(0, 1), (0, 1)]
    for votes in _first_votes(inp):
        size = int(votes.sum())
        for x in (0, 1):
            num, den = best[x]
            if int(votes[x]) * den > num * size:
                best[x] = (int(votes[x]), size)
    (na, da), (nb, db) = best
    return 1 if nb * da > na * db else 0


def group_score(inp: GroupAwareOrdinal) -> int:
    """Two points per group unanimous for x, one per mixed group (m = 2)."""
    _expect(inp, GroupAwareOrdinal)
    _two_alternatives(inp.profile)
    score = [0, 0]
    for votes in _first_votes(inp):
        if votes[0] == 0:
            score[1] += 2
        elif votes[1] == 0:
            score[0] += 2
        else:
            score[0] += 1
            score[1] += 1
    return 1 if score[1] > score[0] else 0


def _check_alt_metric(inp: GroupAwareWithAltDistances, tol: float = DEFAULT_TOLERANCE) -> None:
    d = inp.alt_dist
    m = d.shape[0]
    # an m-point metric is an instance with one dummy agent at alternative 0
    full = np.zeros((m + 1, m + 1))
    full[1:, 1:] = d
    full[0, 1:] = full[1:, 0] = d[0]
    if not validate_instance(Instance(1, m, full), tol).ok:
        raise InvalidAlternativeMetric("alternative distances do not form a metric")


def _virtual_distances(inp: GroupAwareWithAltDistances) -> np.ndarray:
    """``n x m`` matrix of d(top(i), x)."""
    _expect(inp, GroupAwareWithAltDistances)
    _check_alt_metric(inp)
    return inp.alt_dist[inp.profile.tops]


def virtual_minimax_of_avg(inp: GroupAwareWithAltDistances) -> int:
    """Minimise the Max-of-Avg cost with every agent moved onto its top choice."""
    v = _virtual_distances(inp)
    cost = np.max([v[list(g)].mean(axis=0) for g in inp.grouping.groups], axis=0)
    return int(np.argmin(cost))


def virtual_miniavg_of_max(inp: GroupAwareWithAltDistances) -> int:
    """Minimise the Avg-of-Max cost with every agent moved onto its top choice."""
    v = _virtual_distances(inp)
    cost = np.sum([v[list(g)].max(axis=0) for g in inp.grouping.groups], axis=0) / inp.grouping.k
    return int(np.argmin(cost))


@dataclass(frozen=True)
class Mechanism:
    id: str
    input_type: type
    fn: Callable[..., int]
    two_alternatives_only: bool = False

    @property
    def group_aware(self) -> bool:
        return self.input_type in (GroupAwareOrdinal, GroupAwareWithAltDistances)

    def build_input(self, inst: Instance, grp: Grouping | None = None):
        if self.input_type is FullInfo:
            return FullInfo.from_instance(inst)
        if self.input_type is Ordinal:
            return Ordinal.from_instance(inst)
        if grp is None:
            raise ValueError(f"mechanism {self.id} needs a grouping")
        return self.input_type.from_instance(inst, grp)

    def __call__(self, inp) -> int:
        return self.fn(inp)

    def select(self, inst: Instance, grp: Grouping | None = None) -> int:
        """Run on a full instance, handing over only this mechanism's information."""
        return self.fn(self.build_input(inst, grp))


MECHANISMS: dict[str, Mechanism] = {
    m.id: m
    for m in [
        Mechanism("min-total", FullInfo, min_total_distance),
        Mechanism("min-max", FullInfo, min_max_distance),
        Mechanism("matching", Ordinal, matching_winner),
        Mechanism("plurality-veto", Ordinal, plurality_veto),
        Mechanism("top-choice", Ordinal, top_choice_winner),
        Mechanism("gpm", GroupAwareOrdinal, group_proportional_majority, two_alternatives_only=True),
        Mechanism("group-score", GroupAwareOrdinal, group_score, two_alternatives_only=True),
        Mechanism("virtual-mma", GroupAwareWithAltDistances, virtual_minimax_of_avg),
        Mechanism("virtual-vam", GroupAwareWithAltDistances, virtual_miniavg_of_max),
    ]
}


def get_mechanism(mech_id: str) -> Mechanism:
    try:
        return MECHANISMS[mech_id]
    except KeyError:
        raise KeyError(f"unknown mechanism {mech_id!r}; choose from {', '.join(MECHANISMS)}") from None
