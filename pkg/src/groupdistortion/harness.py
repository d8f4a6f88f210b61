"""Seeded random instances, experiment sweeps and the theorem-bound table.

Randomness comes from numpy's PCG64 bit generator. Each trial gets its own
stream, ``SeedSequence(seed, spawn_key=(trial,))``, so serial and parallel
runs produce the same rows.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .adversary.partitions import stirling2
from .core import Grouping, Instance, Objective, ordinal_profile_from_instance
from .matching import domination_graph, has_perfect_matching, lemma_distance_bound_holds
from .mechanisms import MECHANISMS, get_mechanism
from .objectives import distortion

log = logging.getLogger(__name__)

RNG_NAME = "numpy.PCG64/SeedSequence"
SCHEMA_VERSION = 1
CSV_COLUMNS = ["trial", "n", "m", "k", "sym", "mechanism", "objective", "winner", "winner_cost", "opt", "opt_cost", "ratio"]
RATIO_SLACK = 1e-9


class ConfigError(ValueError):
    pass


class InvariantViolation(AssertionError):
    """A theorem bound or internal consistency check failed."""


def make_rng(seed: int, trial: int | None = None) -> np.random.Generator:
    spawn_key = () if trial is None else (int(trial),)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=spawn_key)))


def random_partition(n: int, k: int, rng: np.random.Generator) -> Grouping:
    """Uniform over all partitions of ``n`` agents into exactly ``k`` non-empty groups."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    # walk down from the last element: it is alone with probability S(j-1,b-1)/S(j,b)
    moves = []
    blocks = k
    for j in range(n, 0, -1):
        p_alone = stirling2(j - 1, blocks - 1) / stirling2(j, blocks)
        if rng.random() < p_alone:
            moves.append(None)
            blocks -= 1
        else:
            moves.append(int(rng.integers(blocks)))
    groups: list[list[int]] = []
    for i, mv in enumerate(reversed(moves)):
        if mv is None:
            groups.append([i])
        else:
            groups[mv].append(i)
    return Grouping(groups)


def random_equal_partition(n: int, k: int, rng: np.random.Generator) -> Grouping:
    if k < 1 or n % k:
        raise ValueError(f"symmetric groups need k | n (n={n}, k={k})")
    perm = rng.permutation(n)
    lam = n // k
    return Grouping(sorted(perm[g * lam : (g + 1) * lam].tolist()) for g in range(k))


def gen_random_euclidean(
    n: int, m: int, k: int, dim: int, seed, symmetric: bool = False
) -> tuple[Instance, Grouping]:
    """Agents and alternatives uniform in ``[0, 1]^dim`` with a uniformly random grouping.

    ``seed`` is an integer or an existing ``numpy.random.Generator``.
    """
    if n < 1 or m < 2 or dim < 1:
        raise ValueError(f"need n >= 1, m >= 2, dim >= 1 (got n={n}, m={m}, dim={dim})")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if symmetric and n % k:
        raise ValueError(f"symmetric groups need k | n (n={n}, k={k})")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    agents = rng.random((n, dim))
    alts = rng.random((m, dim))
    grp = random_equal_partition(n, k, rng) if symmetric else random_partition(n, k, rng)
    return Instance.from_points(agents, alts), grp


def theorem_bound(mech_id: str, obj: Objective | str, grp: Grouping, m: int | None = None) -> float | None:
    """Proven distortion bound for a mechanism/objective pair on this grouping, or None."""
    obj = Objective.parse(obj)
    n, k, sym = grp.n, grp.k, grp.symmetric
    maxavg = obj is Objective.MAX_OF_AVG
    if mech_id == "min-total":
        if maxavg:
            return 3 - 2 * grp.smallest / n
        return 3.0 if sym else None
    if mech_id == "min-max":
        return None if maxavg else float(k)
    if mech_id in ("matching", "plurality-veto"):
        return 5.0 if maxavg or sym else None
    if mech_id == "top-choice":
        return None if maxavg else float(2 * k + 1)
    if mech_id == "gpm":
        return 3.0 if maxavg and m in (None, 2) else None
    if mech_id == "group-score":
        return 3.0 if not maxavg and m in (None, 2) else None
    if mech_id == "virtual-mma":
        return 3.0 if maxavg else None
    if mech_id == "virtual-vam":
        return None if maxavg else 3.0
    raise KeyError(mech_id)


def _has_guarantee(mech_id: str, obj: Objective, symmetric: bool) -> bool:
    # probe with a representative grouping of the requested symmetry
    probe = Grouping([[0, 1], [2, 3]]) if symmetric else Grouping([[0], [1, 2]])
    return theorem_bound(mech_id, obj, probe) is not None


def _parse_range(value, name: str) -> tuple[int, int]:
    if isinstance(value, int):
        lo = hi = value
    elif isinstance(value, str):
        parts = value.split(":")
        lo, hi = int(parts[0]), int(parts[-1])
    else:
        lo, hi = (int(v) for v in value)
    if lo > hi:
        raise ConfigError(f"{name} range is empty: {lo}..{hi}")
    return lo, hi


@dataclass
class ExperimentConfig:
    seed: int = 0
    trials: int = 100
    n: tuple[int, int] = (4, 12)
    m: tuple[int, int] = (2, 4)
    k: tuple[int, int] = (2, 3)
    dim: tuple[int, int] = (1, 2)
    symmetric_groups: bool = False
    mechanisms: list[str] = field(default_factory=lambda: ["min-total"])
    objectives: list[str] = field(default_factory=lambda: ["max-of-avg"])
    output: str | None = None
    exploratory: bool = False
    workers: int = 1

    def __post_init__(self):
        self.n = _parse_range(self.n, "n")
        self.m = _parse_range(self.m, "m")
        self.k = _parse_range(self.k, "k")
        self.dim = _parse_range(self.dim, "dim")
        self.objectives = [str(Objective.parse(o)) for o in self.objectives]
        self.validate()

    def validate(self) -> None:
        if self.trials < 0:
            raise ConfigError("trials must be nonnegative")
        if self.n[0] < 1 or self.m[0] < 2 or self.k[0] < 1 or self.dim[0] < 1:
            raise ConfigError("ranges need n >= 1, m >= 2, k >= 1, dim >= 1")
        if self.k[0] > self.n[1]:
            raise ConfigError("k <= n is impossible for the given ranges")
        if self.symmetric_groups and not self._symmetric_pairs():
            raise ConfigError("no (n, k) pair in range has k | n")
        for mech_id in self.mechanisms:
            mech = get_mechanism(mech_id)
            if mech.two_alternatives_only and self.m != (2, 2):
                raise ConfigError(f"{mech_id} is defined only for m = 2; set the m range to 2")
            for obj in self.objectives:
                if not self.exploratory and not _has_guarantee(mech_id, Objective.parse(obj), self.symmetric_groups):
                    raise ConfigError(
                        f"{mech_id} / {obj} has no proven bound for "
                        f"{'symmetric' if self.symmetric_groups else 'general'} groups; pass exploratory to run it anyway"
                    )

    def _symmetric_pairs(self) -> list[tuple[int, int]]:
        return [
            (n, k)
            for k in range(self.k[0], self.k[1] + 1)
            for n in range(max(self.n[0], k), self.n[1] + 1)
            if n % k == 0
        ]

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls(**json.loads(Path(path).read_text()))


@dataclass
class Row:
    trial: int
    n: int
    m: int
    k: int
    sym: bool
    mechanism: str
    objective: str
    winner: int
    winner_cost: float
    opt: int
    opt_cost: float
    ratio: float
    digest: str = ""
    bound: float | None = None


@dataclass
class ExperimentReport:
    rows: list[Row]
    summary: dict
    header: str

    def csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(self.header + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([
                r.trial, r.n, r.m, r.k, int(r.sym), r.mechanism, r.objective, r.winner,
                repr(r.winner_cost), r.opt, repr(r.opt_cost), repr(r.ratio),
            ])
        return buf.getvalue()


def instance_digest(inst: Instance, grp: Grouping) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(inst.dist).tobytes())
    h.update(json.dumps(grp.groups).encode())
    return h.hexdigest()[:16]


def draw_trial_instance(cfg: ExperimentConfig, trial: int) -> tuple[Instance, Grouping]:
    rng = make_rng(cfg.seed, trial)
    dim = int(rng.integers(cfg.dim[0], cfg.dim[1] + 1))
    m = int(rng.integers(cfg.m[0], cfg.m[1] + 1))
    if cfg.symmetric_groups:
        pairs = cfg._symmetric_pairs()
        n, k = pairs[int(rng.integers(len(pairs)))]
    else:
        k = int(rng.integers(cfg.k[0], min(cfg.k[1], cfg.n[1]) + 1))
        n = int(rng.integers(max(cfg.n[0], k), cfg.n[1] + 1))
    return gen_random_euclidean(n, m, k, dim, rng, symmetric=cfg.symmetric_groups)


def run_trial(cfg: ExperimentConfig, trial: int) -> list[Row]:
    inst, grp = draw_trial_instance(cfg, trial)
    digest = instance_digest(inst, grp)
    rows = []
    for mech_id in cfg.mechanisms:
        mech = MECHANISMS[mech_id]
        winner = mech.select(inst, grp)
        for obj in cfg.objectives:
            rep = distortion(inst, grp, obj, winner, mech_id)
            bound = theorem_bound(mech_id, obj, grp, inst.m)
            rows.append(Row(
                trial, inst.n, inst.m, grp.k, grp.symmetric, mech_id, obj, winner,
                rep.winner_cost, rep.opt, rep.opt_cost, rep.ratio, digest, bound,
            ))
    return rows


def _trial_or_raise(args) -> list[Row]:
    cfg, trial = args
    try:
        rows = run_trial(cfg, trial)
    except Exception as e:
        raise InvariantViolation(f"trial {trial} failed ({type(e).__name__}: {e}); replay with seed={cfg.seed} trial={trial}") from e
    for r in rows:
        if r.ratio < 1 - 1e-12:
            raise InvariantViolation(f"trial {trial}: ratio {r.ratio} < 1; replay with seed={cfg.seed} trial={trial}")
        if r.bound is not None and r.ratio > r.bound + RATIO_SLACK:
            raise InvariantViolation(
                f"trial {trial}: {r.mechanism}/{r.objective} ratio {r.ratio!r} exceeds bound {r.bound!r}; "
                f"replay with seed={cfg.seed} trial={trial}"
            )
    return rows


def summarize(rows: list[Row]) -> dict:
    out: dict = {}
    keys = sorted({(r.mechanism, r.objective) for r in rows})
    for mech_id, obj in keys:
        vals = np.array([r.ratio for r in rows if r.mechanism == mech_id and r.objective == obj])
        out[f"{mech_id}/{obj}"] = {
            "count": int(vals.size),
            "max": float(vals.max()),
            "mean": float(vals.mean()),
            "p95": float(np.percentile(vals, 95)),
        }
    return out


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run every trial, check each row against its theorem bound, and write outputs.

    Writes ``cfg.output`` (CSV) and a sibling ``.summary.json`` when an output
    path is set. A failing trial raises :class:`InvariantViolation` naming the
    seed and trial index needed to replay it.
    """
    jobs = [(cfg, t) for t in range(cfg.trials)]
    if cfg.workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            chunks = list(ex.map(_trial_or_raise, jobs, chunksize=max(1, cfg.trials // (4 * cfg.workers))))
    else:
        chunks = [_trial_or_raise(j) for j in jobs]
    rows = [r for chunk in chunks for r in chunk]
    header = f"#schema={SCHEMA_VERSION} rng={RNG_NAME} seed={cfg.seed}"
    report = ExperimentReport(rows, summarize(rows), header)
    if cfg.output:
        out = Path(cfg.output)
        out.write_text(report.csv_text())
        cfg_doc = {k: v for k, v in asdict(cfg).items() if k != "workers"}
        summary_doc = {"schema": SCHEMA_VERSION, "rng": RNG_NAME, "config": cfg_doc, "summary": report.summary}
        out.with_suffix(".summary.json").write_text(json.dumps(summary_doc, indent=2, sort_keys=True) + "\n")
        log.info("wrote %d rows to %s", len(rows), out)
    return report


@dataclass
class PropertyTally:
    checks: int = 0
    violations: int = 0
    worst_slack: float = -math.inf
    first_failure: str | None = None

    def record(self, value: float, bound: float, where: str) -> None:
        self.checks += 1
        slack = value - bound
        self.worst_slack = max(self.worst_slack, slack)
        if slack > RATIO_SLACK:
            self.violations += 1
            if self.first_failure is None:
                self.first_failure = f"{where}: {value!r} > {bound!r}"


UPPER_BOUND_PROPERTIES = (
    "min-total/max-of-avg <= 3-2mu/n",
    "min-total/avg-of-max <= 3 (symmetric)",
    "min-max/avg-of-max <= k",
    "matching/max-of-avg <= 5",
    "matching/avg-of-max <= 5 (symmetric)",
    "plurality-veto/max-of-avg <= 5",
    "plurality-veto/avg-of-max <= 5 (symmetric)",
    "top-choice/avg-of-max <= 2k+1",
    "lemma d(x,y) <= 4/n sum d(i,y)",
    "virtual-mma/max-of-avg <= 3",
    "virtual-vam/avg-of-max <= 3",
)


def upper_bound_suite(
    trials: int,
    seed: int,
    n_max: int = 30,
    m_max: int = 6,
    k_max: int = 5,
    dims: tuple[int, int] = (1, 3),
) -> dict[str, PropertyTally]:
    """Check every group-oblivious and virtual upper bound on random Euclidean instances.

    Odd trials use symmetric groupings so the symmetric-only bounds are
    exercised as often as the general ones.
    """
    tallies = {p: PropertyTally() for p in UPPER_BOUND_PROPERTIES}
    mx, am = Objective.MAX_OF_AVG, Objective.AVG_OF_MAX
    for t in range(trials):
        rng = make_rng(seed, t)
        dim = int(rng.integers(dims[0], dims[1] + 1))
        m = int(rng.integers(2, m_max + 1))
        k = int(rng.integers(2, k_max + 1))
        sym = t % 2 == 1
        if sym:
            n = k * int(rng.integers(1, n_max // k + 1))
        else:
            n = int(rng.integers(k, n_max + 1))
        inst, grp = gen_random_euclidean(n, m, k, dim, rng, symmetric=sym)
        where = f"seed={seed} trial={t}"
        winners = {mid: MECHANISMS[mid].select(inst, grp) for mid in
                   ("min-total", "min-max", "matching", "plurality-veto", "top-choice", "virtual-mma", "virtual-vam")}

        def ratio(mid, obj):
            return distortion(inst, grp, obj, winners[mid]).ratio

        tallies["min-total/max-of-avg <= 3-2mu/n"].record(ratio("min-total", mx), 3 - 2 * grp.smallest / n, where)
        if grp.symmetric:
            tallies["min-total/avg-of-max <= 3 (symmetric)"].record(ratio("min-total", am), 3.0, where)
        tallies["min-max/avg-of-max <= k"].record(ratio("min-max", am), float(grp.k), where)
        for mid in ("matching", "plurality-veto"):
            tallies[f"{mid}/max-of-avg <= 5"].record(ratio(mid, mx), 5.0, where)
            if grp.symmetric:
                tallies[f"{mid}/avg-of-max <= 5 (symmetric)"].record(ratio(mid, am), 5.0, where)
        tallies["top-choice/avg-of-max <= 2k+1"].record(ratio("top-choice", am), 2.0 * grp.k + 1, where)
        tallies["virtual-mma/max-of-avg <= 3"].record(ratio("virtual-mma", mx), 3.0, where)
        tallies["virtual-vam/avg-of-max <= 3"].record(ratio("virtual-vam", am), 3.0, where)

        profile = ordinal_profile_from_instance(inst)
        lemma = tallies["lemma d(x,y) <= 4/n sum d(i,y)"]
        pm = [x for x in range(m) if has_perfect_matching(domination_graph(profile, x))[0]]
        if not pm:
            raise InvariantViolation(f"{where}: no alternative has a perfect matching")
        for x in pm:
            for y in range(m):
                holds = lemma_distance_bound_holds(inst, grp, x, y)
                bound = 4.0 / n * float(inst.agent_alt[:, y].sum())
                lemma.record(float(inst.dist[inst.alt(x), inst.alt(y)]), bound, f"{where} x={x} y={y}")
                if not holds and lemma.violations == 0:
                    raise InvariantViolation(f"{where}: lemma check disagrees with direct evaluation")
    return tallies
