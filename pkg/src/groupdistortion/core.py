"""Data model: metric instances, agent groupings, ordinal profiles and objectives.

Points are indexed agents first (``0..n-1``) and alternatives after them
(``n..n+m-1``), so a grouping refers to raw agent indices and alternative ``x``
lives at matrix row ``n + x``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import jsonschema
import numpy as np

DEFAULT_TOLERANCE = 1e-9


class InstanceError(ValueError):
    """Structural problem with an instance (shape, counts, non-finite entries)."""


class GroupingError(ValueError):
    """A grouping is not a partition of the agents into non-empty groups."""


class InstanceFormatError(ValueError):
    """An instance file could not be parsed; ``location`` says where."""

    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location


class Objective(enum.Enum):
    MAX_OF_AVG = "max-of-avg"
    AVG_OF_MAX = "avg-of-max"

    @classmethod
    def parse(cls, value: "Objective | str") -> "Objective":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"maxofavg": "max-of-avg", "avgofmax": "avg-of-max"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown objective {value!r}; expected max-of-avg or avg-of-max") from None

    def __str__(self) -> str:
        return self.value


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Instance:
    """Full distance matrix over agents and alternatives.

    Construction checks structure only (counts, shape, finiteness); metric
    axioms are checked by :func:`validate_instance`.
    """

    n: int
    m: int
    dist: np.ndarray

    def __post_init__(self):
        self._adopt(np.array(self.dist, dtype=float, copy=True))

    def _adopt(self, d: np.ndarray, check_finite: bool = True) -> None:
        """Check and take ownership of ``d`` (which must not be shared with the caller)."""
        if int(self.n) != self.n or self.n < 1:
            raise InstanceError(f"n must be a positive integer, got {self.n!r}")
        if int(self.m) != self.m or self.m < 2:
            raise InstanceError(f"m must be an integer >= 2, got {self.m!r}")
        size = self.n + self.m
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InstanceError(f"dist must be a square matrix, got shape {d.shape}")
        if d.shape[0] != size:
            raise InstanceError(f"dist has size {d.shape[0]} but n + m = {size}")
        if check_finite and not np.isfinite(d).all():
            raise InstanceError("dist contains non-finite entries")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "dist", _readonly(d))

    @classmethod
    def from_points(cls, agents, alternatives) -> "Instance":
        """Euclidean instance from coordinates; 1-D inputs are points on a line."""
        a = np.asarray(agents, dtype=float)
        b = np.asarray(alternatives, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
        if b.ndim == 1:
            b = b[:, None]
        pts = np.vstack([a, b])
        if not np.isfinite(pts).all():
            raise InstanceError("coordinates must be finite")
        if pts.shape[1] == 1:
            x = pts[:, 0]
            d = np.abs(x[:, None] - x[None, :])
        else:
            diff = pts[:, None, :] - pts[None, :, :]
            d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
            np.fill_diagonal(d, 0.0)
        inst = object.__new__(cls)
        object.__setattr__(inst, "n", len(a))
        object.__setattr__(inst, "m", len(b))
        # distances between finite points are finite
        inst._adopt(d, check_finite=False)
        return inst

    @property
    def size(self) -> int:
        return self.n + self.m

    @property
    def agent_alt(self) -> np.ndarray:
        """``n x m`` block of agent-to-alternative distances."""
        return self.dist[: self.n, self.n :]

    @property
    def alt_alt(self) -> np.ndarray:
        return self.dist[self.n :, self.n :]

    def alt(self, x: int) -> int:
        """Matrix index of alternative ``x``."""
        if not 0 <= x < self.m:
            raise IndexError(f"alternative index {x} out of range for m={self.m}")
        return self.n + x

    def scaled(self, c: float) -> "Instance":
        return Instance(self.n, self.m, self.dist * c)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return self.n == other.n and self.m == other.m and np.array_equal(self.dist, other.dist)

    def __hash__(self):
        return hash((self.n, self.m, self.dist.tobytes()))


@dataclass(frozen=True)
class Grouping:
    """Partition of agents ``0..n-1`` into ``k`` non-empty disjoint groups."""

    groups: tuple[tuple[int, ...], ...]

    def __init__(self, groups: Iterable[Iterable[int]]):
        gs = tuple(tuple(int(i) for i in g) for g in groups)
        object.__setattr__(self, "groups", gs)
        self._check()

    def _check(self):
        if not self.groups:
            raise GroupingError("a grouping needs at least one group")
        seen: set[int] = set()
        for gi, g in enumerate(self.groups):
            if not g:
                raise GroupingError(f"group {gi} is empty")
            for i in g:
                if i in seen:
                    raise GroupingError(f"agent {i} appears in more than one group (again in group {gi})")
                seen.add(i)
        n = len(seen)
        if seen != set(range(n)):
            missing = sorted(set(range(max(seen) + 1)) - seen)
            raise GroupingError(f"groups must cover agents 0..{n - 1} exactly; missing {missing}")

    @classmethod
    def singletons(cls, n: int) -> "Grouping":
        return cls([i] for i in range(n))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Grouping":
        """Build from per-agent group labels; groups ordered by first appearance."""
        order: dict[int, list[int]] = {}
        for i, lab in enumerate(labels):
            order.setdefault(int(lab), []).append(i)
        return cls(order.values())

    @property
    def n(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def k(self) -> int:
        return len(self.groups)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(g) for g in self.groups)

    @property
    def smallest(self) -> int:
        """Smallest group size (``mu``)."""
        return min(self.sizes)

    @property
    def symmetric(self) -> bool:
        return len(set(self.sizes)) == 1

    def labels(self) -> np.ndarray:
        lab = np.empty(self.n, dtype=np.intp)
        for gi, g in enumerate(self.groups):
            lab[list(g)] = gi
        return lab

    def check_agents(self, n: int) -> None:
        if self.n != n:
            raise GroupingError(f"grouping covers {self.n} agents but the instance has {n}")


@dataclass(frozen=True, eq=False)
class OrdinalProfile:
    """Strict rankings, most preferred first; ``rankings[i][0]`` is top(i)."""

    m: int
    rankings: np.ndarray
    positions: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        r = np.array(self.rankings, dtype=np.intp, copy=True)
        if r.ndim != 2 or r.shape[0] < 1:
            raise ValueError("rankings must be a non-empty 2-D array (agents x alternatives)")
        if r.shape[1] != self.m:
            raise ValueError(f"each ranking must list all {self.m} alternatives, got {r.shape[1]}")
        expected = np.arange(self.m)
        for i, row in enumerate(r):
            if not np.array_equal(np.sort(row), expected):
                raise ValueError(f"ranking of agent {i} is not a permutation of 0..{self.m - 1}: {row.tolist()}")
        pos = np.empty_like(r)
        rows = np.arange(r.shape[0])[:, None]
        pos[rows, r] = expected[None, :]
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "rankings", _readonly(r))
        object.__setattr__(self, "positions", _readonly(pos))

    @property
    def n(self) -> int:
        return self.rankings.shape[0]

    @property
    def tops(self) -> np.ndarray:
        return self.rankings[:, 0]

    def top(self, i: int) -> int:
        return int(self.rankings[i, 0])

    def rank_position(self, i: int, x: int) -> int:
        return int(self.positions[i, x])

    def prefers(self, i: int, x: int, y: int) -> bool:
        """Weak preference of agent ``i`` for ``x`` over ``y``."""
        return self.positions[i, x] <= self.positions[i, y]

    def __eq__(self, other):
        if not isinstance(other, OrdinalProfile):
            return NotImplemented
        return self.m == other.m and np.array_equal(self.rankings, other.rankings)

    def __hash__(self):
        return hash((self.m, self.rankings.tobytes()))


@dataclass(frozen=True)
class Violation:
    kind: str  # "diagonal" | "negative" | "symmetry" | "triangle"
    points: tuple[int, ...]
    slack: float


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _identical_rows(d: np.ndarray) -> list[list[int]]:
    """Classes of bit-identical rows, each listed in ascending index order."""
    # rows are bucketed by a fixed random projection, then compared exactly
    key = d @ np.random.default_rng(0).standard_normal(d.shape[1])
    order = np.argsort(key, kind="stable")
    classes: list[list[int]] = []
    start = 0
    while start < len(order):
        stop = start + 1
        while stop < len(order) and key[order[stop]] == key[order[start]]:
            stop += 1
        bucket: list[list[int]] = []
        for i in sorted(order[start:stop].tolist()):
            for cls in bucket:
                if np.array_equal(d[cls[0]], d[i]):
                    cls.append(i)
                    break
            else:
                bucket.append([i])
        classes.extend(bucket)
        start = stop
    return classes


def _triangle_violations(d: np.ndarray, tol: float, labels: np.ndarray) -> list[Violation]:
    """Triples ``(p, r, q)`` of distinct points with ``d(p,q) - d(p,r) - d(r,q) > tol``."""
    size = d.shape[0]
    out: list[Violation] = []
    chunk = max(1, 4_000_000 // max(1, size * size))
    idx = np.arange(size)
    for start in range(0, size, chunk):
        ps = idx[start : start + chunk]
        # slack[a, r, q] = d(p,q) - d(p,r) - d(r,q) for p = ps[a]
        slack = d[ps, None, :] - d[ps, :, None] - d[None, :, :]
        bad = slack > tol
        a_idx = np.arange(len(ps))
        bad[a_idx, ps, :] = False
        bad[a_idx, :, ps] = False
        bad[:, idx, idx] = False
        for a, r, q in zip(*np.nonzero(bad)):
            out.append(Violation("triangle", (int(labels[ps[a]]), int(labels[r]), int(labels[q])), float(slack[a, r, q])))
    return out


def validate_instance(inst: Instance, tol: float = DEFAULT_TOLERANCE) -> ValidationResult:
    """Check the metric axioms on ``inst.dist`` with absolute slack ``tol``.

    Every violation is returned: ``diagonal`` for ``d(p,p) != 0``, ``negative``
    for negative entries, ``symmetry`` for pairs ``p < q`` with
    ``d(p,q) != d(q,p)``, and ``triangle`` for ordered triples ``(p, r, q)``
    with ``d(p,q) > d(p,r) + d(r,q)``. Slack is the amount by which the axiom
    is exceeded.
    """
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    d = inst.dist
    size = d.shape[0]
    if d.shape != (inst.size, inst.size):
        raise InstanceError(f"dist has shape {d.shape}, expected {(inst.size, inst.size)}")
    out: list[Violation] = []
    for p in np.flatnonzero(np.abs(np.diag(d)) > tol):
        out.append(Violation("diagonal", (int(p),), float(abs(d[p, p]))))
    if d.min() < -tol:
        for p, q in zip(*np.nonzero(d < -tol)):
            out.append(Violation("negative", (int(p), int(q)), float(-d[p, q])))
    # blocked so the transpose is read in cache-sized tiles
    block = 1024
    for lo in range(0, size, block):
        hi = min(size, lo + block)
        asym = np.abs(d[lo:hi, lo:] - d[lo:, lo:hi].T)
        for a, b in zip(*np.nonzero(asym > tol)):
            p, q = lo + int(a), lo + int(b)
            if p < q:
                out.append(Violation("symmetry", (p, q), float(asym[a, b])))
    if out:
        # without symmetry and a zero diagonal, twin rows prove nothing; check every triple
        out.extend(_triangle_violations(d, tol, np.arange(size)))
        return ValidationResult(tuple(out))
    # colocated points have identical rows, and then every triangle through
    # them has the same slack as through their representative
    members = _identical_rows(d)
    reps = np.array([c[0] for c in members])
    reduced = d[np.ix_(reps, reps)]
    for v in _triangle_violations(reduced, tol, np.arange(len(reps))):
        P, R, Q = (members[c] for c in v.points)
        for p in P:
            for r in R:
                for q in Q:
                    out.append(Violation("triangle", (int(p), int(r), int(q)), v.slack))
    return ValidationResult(tuple(out))


def ordinal_profile_from_instance(inst: Instance) -> OrdinalProfile:
    """Rank alternatives by distance from each agent; equal distances go to the lower index."""
    d = inst.agent_alt
    # stable sort keeps ascending alternative index among equal distances
    rankings = np.argsort(d, axis=1, kind="stable")
    return OrdinalProfile(inst.m, rankings)


def is_consistent(profile: OrdinalProfile, inst: Instance, tol: float = 0.0) -> bool:
    """True when every agent's distances are non-decreasing along its ranking."""
    if profile.n != inst.n or profile.m != inst.m:
        return False
    d = np.take_along_axis(inst.agent_alt, profile.rankings, axis=1)
    return bool(np.all(np.diff(d, axis=1) >= -tol))


INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["n", "m", "dist"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "m": {"type": "integer", "minimum": 2},
        "dist": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "groups": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
    },
}


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps_instance(inst: Instance, grouping: Grouping | None = None) -> str:
    rows = ",\n    ".join("[" + ", ".join(_fmt(v) for v in row) + "]" for row in inst.dist)
    parts = [f'  "n": {inst.n}', f'  "m": {inst.m}', f'  "dist": [\n    {rows}\n  ]']
    if grouping is not None:
        parts.append(f'  "groups": {json.dumps([list(g) for g in grouping.groups])}')
    return "{\n" + ",\n".join(parts) + "\n}\n"


def save_instance(inst: Instance, path, grouping: Grouping | None = None) -> None:
    if grouping is not None:
        grouping.check_agents(inst.n)
    Path(path).write_text(dumps_instance(inst, grouping))


def loads_instance(text: str) -> tuple[Instance, Grouping | None]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"malformed JSON: {e.msg}", f"line {e.lineno} column {e.colno}") from None
    try:
        jsonschema.validate(doc, INSTANCE_SCHEMA)
    except jsonschema.ValidationError as e:
        loc = "$" + "".join(f"[{p!r}]" for p in e.absolute_path)
        raise InstanceFormatError(f"schema violation: {e.message}", loc) from None
    n, m, dist = doc["n"], doc["m"], doc["dist"]
    if len(dist) != n + m:
        raise InstanceFormatError(f"expected {n + m} rows, found {len(dist)}", "$['dist']")
    for r, row in enumerate(dist):
        if len(row) != n + m:
            raise InstanceFormatError(f"expected {n + m} columns, found {len(row)}", f"$['dist'][{r}]")
    try:
        inst = Instance(n, m, np.array(dist, dtype=float))
    except InstanceError as e:
        raise InstanceFormatError(str(e), "$['dist']") from None
    grouping = None
    if "groups" in doc:
        try:
            grouping = Grouping(doc["groups"])
            grouping.check_agents(n)
        except GroupingError as e:
            raise InstanceFormatError(f"grouping invariant violated: {e}", "$['groups']") from None
    return inst, grouping


def load_instance(path) -> tuple[Instance, Grouping | None]:
    """Read an instance file; returns the instance and its grouping (or None)."""
    return loads_instance(Path(path).read_text())
