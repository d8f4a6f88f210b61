"""Command-line entry point.

Exit status is 0 on success, 1 on usage or input errors, and 2 when an
internal invariant (a theorem bound, a witness check) fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import harness
from .adversary import (
    FAMILIES,
    FAMILY_MECHANISM,
    EnumerationBudgetExceeded,
    GridBudgetExceeded,
    LPBudgetExceeded,
    generate,
    grid_worst_metric,
    lp_worst_metric,
    worst_grouping,
)
from .core import (
    DEFAULT_TOLERANCE,
    GroupingError,
    InstanceError,
    InstanceFormatError,
    Objective,
    load_instance,
    ordinal_profile_from_instance,
    save_instance,
    validate_instance,
)
from .mechanisms import MECHANISMS, GroupAwareWithAltDistances, get_mechanism
from .objectives import cost_profile, distortion

log = logging.getLogger("groupdistortion")

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2
OBJECTIVES = [o.value for o in Objective]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _objectives(args) -> list[Objective]:
    return [Objective.parse(args.objective)] if args.objective else list(Objective)


def _load(args, need_grouping: bool = True):
    if not args.input:
        raise UsageError("--input is required")
    inst, grp = load_instance(args.input)
    res = validate_instance(inst, args.tolerance)
    if not res.ok:
        v = res.violations[0]
        raise UsageError(f"{args.input}: not a metric at tolerance {args.tolerance} ({v.kind} at {v.points}, slack {v.slack:.3g})")
    if need_grouping and grp is None:
        raise UsageError(f"{args.input}: file has no grouping")
    return inst, grp


def cmd_gen(args) -> int:
    if not args.output:
        raise UsageError("--output is required")
    try:
        inst, grp = harness.gen_random_euclidean(args.n, args.m, args.k, args.dim, args.seed, args.symmetric)
    except ValueError as e:
        raise UsageError(str(e)) from e
    save_instance(inst, args.output, grp)
    print(f"wrote {args.output} (n={inst.n}, m={inst.m}, k={grp.k})")
    return EXIT_OK


def cmd_eval(args) -> int:
    inst, grp = _load(args)
    for obj in _objectives(args):
        prof = cost_profile(inst, grp, obj)
        costs = " ".join(f"{x}:{_fmt(c)}" for x, c in enumerate(prof.costs))
        print(f"{obj.value}: {costs} best={prof.best}")
    return EXIT_OK


def cmd_run(args) -> int:
    inst, grp = _load(args)
    mech = get_mechanism(args.mechanism)
    winner = mech.select(inst, grp)
    print(f"winner {winner}")
    for obj in _objectives(args):
        rep = distortion(inst, grp, obj, winner, mech.id)
        print(f"{obj.value}: cost={_fmt(rep.winner_cost)} opt={rep.opt} opt_cost={_fmt(rep.opt_cost)} ratio={_fmt(rep.ratio)}")
    return EXIT_OK


def cmd_lowerbound(args) -> int:
    params = {"lambda": args.lam, "k": args.k, "eps": args.eps}
    _, names = FAMILIES[args.family]
    missing = [p for p in names if p != "eps" and params[p] is None]
    if missing:
        raise UsageError(f"family {args.family} needs --{missing[0]}")
    try:
        lb = generate(args.family, **{p: params[p] for p in names if params[p] is not None})
    except ValueError as e:
        raise UsageError(str(e)) from e
    out = args.output or f"{args.family}.json"
    save_instance(lb.inst, out, lb.grp)

    measured = lb.measured_ratio()
    print(f"ratio {_fmt(measured)}")
    print(f"instance {out}")
    if abs(measured - lb.predicted_ratio) > args.tolerance * max(1.0, lb.predicted_ratio):
        print(f"measured ratio {measured!r} differs from closed form {lb.predicted_ratio!r}", file=sys.stderr)
        return EXIT_INVARIANT
    mech = MECHANISMS[FAMILY_MECHANISM[args.family]]
    chosen = mech.select(lb.inst, lb.grp)
    if chosen != lb.adversarial_winner:
        print(f"{mech.id} picks {chosen}, expected {lb.adversarial_winner}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_audit(args) -> int:
    inst, grp = _load(args, need_grouping=args.mode != "worst-grouping")
    if not args.mechanism:
        raise UsageError("--mechanism is required")
    if not args.objective:
        raise UsageError("--objective is required")
    mech = get_mechanism(args.mechanism)
    obj = Objective.parse(args.objective)
    out = args.output or str(Path(args.input).with_suffix("")) + f".{args.mode}.json"

    if args.mode == "worst-grouping":
        if args.k is None:
            raise UsageError("--k is required for worst-grouping")
        if mech.group_aware:
            raise UsageError("worst-grouping audits group-oblivious mechanisms only")
        winner = mech.select(inst)
        worst, r = worst_grouping(inst, args.k, obj, winner, symmetric_only=args.symmetric)
        save_instance(inst, out, worst)
        print(f"winner {winner}")
        print(f"ratio {_fmt(r)}")
        print(f"witness {out}")
        return EXIT_OK

    winner = mech.select(inst, grp)
    profile = ordinal_profile_from_instance(inst)
    if args.mode == "lp":
        pinned = inst.alt_alt if mech.input_type is GroupAwareWithAltDistances else None
        audit = lp_worst_metric(profile, grp, winner, obj, pinned_alt_dists=pinned)
        print(f"winner {winner}")
        print(f"ratio {_fmt(audit.ratio)}")
        if audit.witness is not None:
            save_instance(audit.witness, out, grp)
            print(f"witness {out}")
        return EXIT_OK

    r = grid_worst_metric(profile, grp, winner, obj, args.grid_step, args.span)
    print(f"winner {winner}")
    print(f"ratio {_fmt(r)}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    fields = {}
    if args.config:
        fields.update(json.loads(Path(args.config).read_text()))
    overrides = {
        "seed": args.seed, "trials": args.trials, "n": args.n, "m": args.m, "k": args.k, "dim": args.dim,
        "output": args.output, "workers": args.workers,
    }
    fields.update({key: v for key, v in overrides.items() if v is not None})
    if args.mechanism:
        fields["mechanisms"] = args.mechanism
    if args.objective:
        fields["objectives"] = [args.objective]
    if args.symmetric:
        fields["symmetric_groups"] = True
    if args.exploratory:
        fields["exploratory"] = True
    try:
        cfg = harness.ExperimentConfig(**fields)
    except (TypeError, ValueError, KeyError) as e:
        raise UsageError(f"bad sweep config: {e}") from e
    report = harness.run_experiment(cfg)
    print(f"rows {len(report.rows)}")
    for key, s in report.summary.items():
        print(f"{key}: max={_fmt(s['max'])} mean={_fmt(s['mean'])} p95={_fmt(s['p95'])}")
    if cfg.output:
        print(f"csv {cfg.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    shared.add_argument("--input")
    shared.add_argument("--output")
    shared.add_argument("--seed", type=int, default=None)
    shared.add_argument("--objective", choices=OBJECTIVES)
    shared.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    shared.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="groupdistortion", description="Distortion of voting mechanisms under group-fair objectives.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[shared], help="random Euclidean instance to a file")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--symmetric", action="store_true")
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("eval", parents=[shared], help="costs of every alternative")
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("run", parents=[shared], help="run one mechanism")
    r.add_argument("--mechanism", required=True, choices=list(MECHANISMS))
    r.set_defaults(func=cmd_run)

    lb = sub.add_parser("lowerbound", parents=[shared], help="build and check a lower-bound family")
    lb.add_argument("--family", required=True, choices=list(FAMILIES))
    lb.add_argument("--lambda", dest="lam", type=int)
    lb.add_argument("--k", type=int)
    lb.add_argument("--eps", type=float)
    lb.set_defaults(func=cmd_lowerbound)

    a = sub.add_parser("audit", parents=[shared], help="worst-case adversary for a mechanism")
    a.add_argument("--mechanism", choices=list(MECHANISMS))
    a.add_argument("--mode", required=True, choices=["worst-grouping", "lp", "grid"])
    a.add_argument("--k", type=int, help="number of groups (worst-grouping)")
    a.add_argument("--symmetric", action="store_true", help="equal-size groups only (worst-grouping)")
    a.add_argument("--grid-step", type=float, default=0.5)
    a.add_argument("--span", type=float, default=4.0)
    a.set_defaults(func=cmd_audit)

    s = sub.add_parser("sweep", parents=[shared], help="seeded experiment sweep to CSV")
    s.add_argument("--config", help="JSON file with ExperimentConfig fields")
    s.add_argument("--mechanism", action="append", choices=list(MECHANISMS))
    s.add_argument("--trials", type=int)
    s.add_argument("--n", help="range lo:hi")
    s.add_argument("--m", help="range lo:hi")
    s.add_argument("--k", help="range lo:hi")
    s.add_argument("--dim", help="range lo:hi")
    s.add_argument("--symmetric", action="store_true")
    s.add_argument("--exploratory", action="store_true")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "gen" and args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except UsageError as e:
        print(f"groupdistortion {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except InstanceFormatError as e:
        print(f"groupdistortion {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, InstanceError, GroupingError, KeyError, EnumerationBudgetExceeded, GridBudgetExceeded, LPBudgetExceeded) as e:
        print(f"groupdistortion {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (harness.InvariantViolation, AssertionError) as e:
        print(f"groupdistortion {args.command}: invariant failure: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as e:
        print(f"groupdistortion {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
