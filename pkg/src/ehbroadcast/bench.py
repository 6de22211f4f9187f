"""Monte Carlo comparison of allocation and switching policies.

Run ``i`` of every benchmark uses the scenario generated from
``(seed, i)``, so all policies are compared on identical realisations.
Per-run results are collected in run order and reduced with exact
summation, which keeps reports byte-identical whatever the worker count.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .allocation import AllocationPolicy, NeverCompletes, allocate, allocate_cutoff, relative_deviation
from .model import ValidationError, Violation, merge_arrivals
from .optimal import Unfeasible, extend_schedule, min_completion_time
from .scenarios import GenParams, generate
from .switching import EnergyMinimum, FixedOrder, Proposed, Stochastic, simulate_switching

__all__ = [
    "BenchmarkReport",
    "RunError",
    "TABLE1_POLICIES",
    "table2_policies",
    "evaluate_allocations",
    "evaluate_switching",
    "run_table1",
    "run_table2",
    "sweep_bits",
    "reports_csv",
    "sweep_csv",
]

TABLE1_POLICIES = (AllocationPolicy.EP, AllocationPolicy.DR, AllocationPolicy.RDR, AllocationPolicy.PROPOSED)
_MAX_HORIZON = 1e6


class RunError(RuntimeError):
    def __init__(self, run_index: int, cause: BaseException):
        self.run_index = run_index
        self.cause = cause
        super().__init__(f"run {run_index}: {type(cause).__name__}: {cause}")


@dataclass(frozen=True)
class BenchmarkReport:
    policy: str
    runs: int
    mean: float
    stddev: float
    stderr: float
    seed: int

    @classmethod
    def from_samples(cls, policy: str, samples: Sequence[float], seed: int) -> "BenchmarkReport":
        n = len(samples)
        if n < 1:
            raise ValueError("need at least one run")
        mean = math.fsum(samples) / n
        sd = math.sqrt(math.fsum((x - mean) ** 2 for x in samples) / (n - 1)) if n > 1 else 0.0
        return cls(policy, n, mean, sd, sd / math.sqrt(n), seed)


def table2_policies(ids=(1, 2, 3)) -> dict:
    """Switching policies of the second table; FO orders follow ``ids``."""
    ids = tuple(ids)
    pols = {"Proposed": Proposed(), "EM": EnergyMinimum()}
    if len(ids) == 3:
        pols["FO" + "".join(map(str, ids))] = FixedOrder(ids)
        pols["FO" + "".join(map(str, (ids[0], ids[2], ids[1])))] = FixedOrder((ids[0], ids[2], ids[1]))
    else:
        pols["FO"] = FixedOrder(ids)
    pols["SS"] = Stochastic()
    return pols


def _initial_horizon(params: GenParams) -> float:
    return max(10.0, 20.0 * max(t.mean_gap_s for t in params.transmitters))


def _with_horizon(params: GenParams, run: int, body: Callable):
    """Call ``body(scenario, timeline)`` on ever longer horizons until the
    result only depends on arrivals that were actually generated.

    ``body`` returns ``(result, needed_until)``; it may raise NeverCompletes
    or Unfeasible when the stream was cut too short.
    """
    horizon = _initial_horizon(params)
    while True:
        sc = generate(params, run, horizon)
        tl = merge_arrivals(sc)
        last = float(tl.times[-1])
        try:
            result, needed = body(sc, tl)
            if needed < last:
                return result
        except (NeverCompletes, Unfeasible):
            pass
        horizon *= 2.0
        if horizon > _MAX_HORIZON:
            raise Unfeasible(f"demands not met within {_MAX_HORIZON:g} s of generated arrivals")


def evaluate_allocations(params: GenParams, run: int, policies=TABLE1_POLICIES) -> dict:
    """Optimal plan plus each allocation policy's completion for one run.

    Keys: ``optimal`` (T*), ``optimal_gap`` (finish spread under the
    cut-off split), and per policy ``<name>`` / ``<name>_gap``.
    """

    def body(sc, tl):
        plan = min_completion_time(sc, tl)
        if plan.completion_time >= float(tl.times[-1]):
            return None, plan.completion_time
        ext = extend_schedule(plan.staircase, tl, float(tl.times[-1]))
        out = {"optimal": plan.completion_time, "optimal_gap": allocate_cutoff(plan).finish_gap()}
        needed = plan.completion_time
        for pol in policies:
            pol = AllocationPolicy(pol)
            sched = allocate(pol, ext, plan.demands, plan.ladder, plan.bandwidth)
            out[pol.value] = sched.completion_time
            out[pol.value + "_gap"] = sched.finish_gap()
            needed = max(needed, sched.completion_time)
        return out, needed

    try:
        return _with_horizon(params, run, body)
    except Exception as exc:
        raise RunError(run, exc) from exc


def _ss_seed(seed: int, run: int) -> int:
    return int(np.random.SeedSequence([seed, run, 0x5353]).generate_state(1)[0])


def evaluate_switching(params: GenParams, run: int) -> dict:
    """Switch counts of every switching policy on the proposed allocation."""
    ids = tuple(t.id for t in params.transmitters)
    pols = table2_policies(ids)

    def body(sc, tl):
        plan = min_completion_time(sc, tl)
        if plan.completion_time >= float(tl.times[-1]):
            return None, plan.completion_time
        ext = extend_schedule(plan.staircase, tl, float(tl.times[-1]))
        te = allocate(AllocationPolicy.PROPOSED, ext, plan.demands, plan.ladder,
                      plan.bandwidth).completion_time
        out = {"T_e": te}
        for name, pol in pols.items():
            log = simulate_switching(sc, ext, te, pol, seed=_ss_seed(params.master_seed, run))
            out[name] = float(log.switch_count)
            out[name + "_work"] = log.working_time()
        return out, te

    try:
        return _with_horizon(params, run, body)
    except Exception as exc:
        raise RunError(run, exc) from exc


def _map_runs(fn, runs: int, jobs: int) -> list:
    if jobs <= 1:
        return [fn(i) for i in range(runs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, range(runs), chunksize=max(1, runs // (4 * jobs))))


def table1_runs(params: GenParams, runs: int, seed: int, jobs: int = 1) -> list:
    if runs < 1:
        raise ValueError("runs must be >= 1")
    return _map_runs(partial(evaluate_allocations, params.with_seed(seed)), runs, jobs)


def run_table1(params: GenParams, runs: int, seed: int, jobs: int = 1, records=None) -> list:
    """Mean completion time per allocation policy (EP, DR, RDR, Proposed)."""
    records = records if records is not None else table1_runs(params, runs, seed, jobs)
    names = {AllocationPolicy.EP: "EP", AllocationPolicy.DR: "DR", AllocationPolicy.RDR: "RDR",
             AllocationPolicy.PROPOSED: "Proposed"}
    reports = [BenchmarkReport.from_samples(names[p], [r[p.value] for r in records], seed)
               for p in TABLE1_POLICIES]
    reports.append(BenchmarkReport.from_samples("Optimal", [r["optimal"] for r in records], seed))
    return reports


def table2_runs(params: GenParams, runs: int, seed: int, jobs: int = 1) -> list:
    if runs < 1:
        raise ValueError("runs must be >= 1")
    return _map_runs(partial(evaluate_switching, params.with_seed(seed)), runs, jobs)


def run_table2(params: GenParams, runs: int, seed: int, jobs: int = 1, records=None) -> list:
    """Mean switch count per switching policy."""
    records = records if records is not None else table2_runs(params, runs, seed, jobs)
    names = table2_policies(tuple(t.id for t in params.transmitters))
    return [BenchmarkReport.from_samples(n, [r[n] for r in records], seed) for n in names]


def _deviation(params: GenParams, run: int) -> float:
    r = evaluate_allocations(params, run, policies=(AllocationPolicy.PROPOSED,))
    return relative_deviation(r["proposed"], r["optimal"])


def sweep_bits(params: GenParams, multiples: Sequence[float], runs: int, seed: int,
               base=(7e6, 5e6, 2e6), jobs: int = 1) -> list:
    """Mean relative deviation of proposed from optimal per demand multiple.

    Returns ``(multiple, mean, stderr)`` tuples.
    """
    if not multiples:
        raise ValueError("multiples must not be empty")
    bad = [Violation("NonPositiveDemand", f"multiple {k} gives non-positive demands")
           for k in multiples if not k > 0]
    if bad:
        raise ValidationError(bad)
    if runs < 1:
        raise ValueError("runs must be >= 1")
    out = []
    for k in multiples:
        p = params.with_seed(seed).with_demands([k * b for b in base])
        devs = _map_runs(partial(_deviation, p), runs, jobs)
        rep = BenchmarkReport.from_samples(str(k), devs, seed)
        out.append((k, rep.mean, rep.stderr))
    return out


def reports_csv(reports: Sequence[BenchmarkReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["policy", "runs", "mean", "stddev", "stderr", "seed"])
    for r in reports:
        w.writerow([r.policy, r.runs, repr(r.mean), repr(r.stddev), repr(r.stderr), r.seed])
    return buf.getvalue()


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["multiple", "mean_rel_dev", "stderr"])
    for k, mean, se in rows:
        w.writerow([k, repr(mean), repr(se)])
    return buf.getvalue()
