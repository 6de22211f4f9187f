"""Command-line entry point: ``ehbroadcast gen|solve|bench|sweep-bits``.

Exit codes: 0 success, 1 invalid input, 2 the demands cannot be met.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench
from .allocation import AllocationPolicy, NeverCompletes, allocate, allocate_cutoff
from .io import ScenarioFormatError, load_scenario, save_scenario, staircase_csv
from .model import ValidationError, merge_arrivals, validate
from .optimal import EmptyTimeline, Infeasible, Unfeasible, extend_schedule, min_completion_time
from .scenarios import GenParams, generate, baseline_params
from .switching import policy_from_name, simulate_switching

log = logging.getLogger("ehbroadcast")

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2


def _params(path) -> GenParams:
    if path is None:
        return baseline_params()
    try:
        return GenParams.load(path)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    except KeyError as exc:
        raise ScenarioFormatError(f"{path}: missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise ScenarioFormatError(f"{path}: {exc}") from exc


def parse_multiples(text: str) -> list:
    """``1..10`` (inclusive integer range) or a comma list like ``1,2,5``."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [float(x) if "." in x else int(x) for x in text.split(",") if x.strip()]


def cmd_gen(args) -> int:
    params = _params(args.params)
    if args.seed is not None:
        params = params.with_seed(args.seed)
    sc = generate(params, args.run, args.horizon)
    save_scenario(sc, args.out)
    log.info("wrote %s (%d arrivals)", args.out, sum(len(t.arrivals) for t in sc.transmitters))
    return EXIT_OK


def cmd_solve(args) -> int:
    sc = validate(load_scenario(args.scenario))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tl = merge_arrivals(sc)
    plan = min_completion_time(sc, tl)
    (out / "staircase.csv").write_text(staircase_csv(plan.staircase))

    meta = {
        "optimal_completion_s": plan.completion_time,
        "receiver_order": list(plan.ladder.receiver_ids),
        "cutoffs_mw": plan.cutoffs.tolist(),
        "levels_mw": plan.staircase.levels.tolist(),
        "breakpoints_s": plan.staircase.breakpoints.tolist(),
        "alloc": args.alloc,
    }
    if args.alloc == "optimal":
        sched = allocate_cutoff(plan)
        schedule = plan.staircase
    else:
        schedule = extend_schedule(plan.staircase, tl, max(sc.last_arrival_time(), plan.completion_time))
        sched = allocate(AllocationPolicy(args.alloc), schedule, plan.demands, plan.ladder, plan.bandwidth)
    meta["completion_s"] = sched.completion_time
    meta["finish_times_s"] = sched.finish_times.tolist()
    (out / "allocation.csv").write_text(sched.to_csv())

    if args.switch:
        ids = [t.id for t in sc.transmitters]
        pol = policy_from_name(args.switch, ids, seed=args.seed)
        swlog = simulate_switching(sc, schedule, sched.completion_time, pol, seed=args.seed)
        (out / "switching.csv").write_text(swlog.to_csv())
        meta["switch_policy"] = args.switch
        meta["switch_count"] = swlog.switch_count
    (out / "plan.json").write_text(json.dumps(meta, indent=1) + "\n")
    print(f"completion {sched.completion_time!r} s (optimal {plan.completion_time!r} s)")
    return EXIT_OK


def cmd_bench(args) -> int:
    params = _params(args.params)
    if args.table == 1:
        reports = bench.run_table1(params, args.runs, args.seed, jobs=args.jobs)
    else:
        reports = bench.run_table2(params, args.runs, args.seed, jobs=args.jobs)
    text = bench.reports_csv(reports)
    _emit(text, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    params = _params(args.params)
    base = tuple(float(x) for x in args.base.split(","))
    rows = bench.sweep_bits(params, parse_multiples(args.multiples), args.runs, args.seed,
                            base=base, jobs=args.jobs)
    _emit(bench.sweep_csv(rows), args.out)
    return EXIT_OK


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ehbroadcast", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random scenario file")
    g.add_argument("--params", help="generator parameter file (JSON); default: baseline setting")
    g.add_argument("--seed", type=int)
    g.add_argument("--run", type=int, default=0)
    g.add_argument("--horizon", type=float, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="optimal plan and one allocation for a scenario file")
    s.add_argument("--scenario", required=True)
    s.add_argument("--alloc", choices=["proposed", "optimal", "ep", "dr", "rdr"], default="proposed")
    s.add_argument("--switch", help="also simulate switching: proposed, em, ss, fo123, fo:1,3,2")
    s.add_argument("--seed", type=int, default=0, help="seed for stochastic switching")
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="Monte Carlo policy comparison")
    b.add_argument("--table", type=int, choices=[1, 2], required=True)
    b.add_argument("--runs", type=int, default=1000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--params")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    w = sub.add_parser("sweep-bits", help="relative deviation vs demand multiple")
    w.add_argument("--multiples", default="1..10")
    w.add_argument("--base", default="7e6,5e6,2e6", help="base demands in bits")
    w.add_argument("--runs", type=int, default=100)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--params")
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--out")
    w.set_defaults(func=cmd_sweep)
    return parser


def _exit_code(exc: BaseException):
    if isinstance(exc, bench.RunError):
        return _exit_code(exc.cause)
    if isinstance(exc, (ValidationError, ScenarioFormatError, FileNotFoundError)):
        return EXIT_INVALID
    if isinstance(exc, (Infeasible, Unfeasible, NeverCompletes, EmptyTimeline)):
        return EXIT_INFEASIBLE
    return None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except Exception as exc:
        code = _exit_code(exc)
        if code is None:
            raise
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
