"""Per-receiver power allocation on top of a total-power schedule.

Policies:

* ``PROPOSED`` keeps rates proportional to the demands (``r_n / B_n`` equal
  across receivers still transmitting), so everyone finishes together.
* ``EP`` splits the power equally.
* ``DR`` splits power in proportion to the original demands.
* ``RDR`` splits power in proportion to the bits still owed at slot start.

A finished receiver drops out of the split.  The sweep opens a new slot at
every power breakpoint and every receiver completion.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .optimal import OptimalPlan, PowerStaircase
from .rates import NoiseLadder, cutoff_split, rates_of_split, split_from_leading_rate

__all__ = [
    "AllocationPolicy",
    "Slot",
    "AllocationSchedule",
    "NeverCompletes",
    "proportional_split",
    "allocate",
    "allocate_cutoff",
    "relative_deviation",
]

# completions inside a slot closer than this (s) are treated as simultaneous
FINISH_ATOL = 1e-9
# bits left below this fraction of the demand count as delivered
_DUST = 1e-12


class AllocationPolicy(str, enum.Enum):
    PROPOSED = "proposed"
    EP = "ep"
    DR = "dr"
    RDR = "rdr"


class NeverCompletes(RuntimeError):
    """The schedule ran out before every demand was served."""


@dataclass(frozen=True, eq=False)
class Slot:
    start: float
    end: float
    total: float
    powers: np.ndarray
    rates: np.ndarray

    @property
    def length(self) -> float:
        return self.end - self.start


@dataclass(frozen=True, eq=False)
class AllocationSchedule:
    """Slot-resolved split; per-receiver arrays are in ladder order."""

    slots: tuple
    finish_times: np.ndarray
    demands: np.ndarray
    ladder: NoiseLadder

    @property
    def completion_time(self) -> float:
        return float(np.max(self.finish_times))

    def delivered(self) -> np.ndarray:
        bits = np.zeros_like(self.demands)
        for s in self.slots:
            span = np.clip(np.minimum(self.finish_times, s.end) - s.start, 0.0, None)
            bits += s.rates * span
        return bits

    def finish_gap(self) -> float:
        return float(np.ptp(self.finish_times))

    def to_csv(self) -> str:
        n = len(self.demands)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["slot_start", "slot_end", "total_mw"]
            + [f"P_{i + 1}_mw" for i in range(n)]
            + [f"r_{i + 1}_bps" for i in range(n)]
        )
        for s in self.slots:
            w.writerow([repr(s.start), repr(s.end), repr(s.total)]
                       + [repr(float(p)) for p in s.powers]
                       + [repr(float(r)) for r in s.rates])
        return buf.getvalue()


def proportional_split(total_power: float, weights, ladder, bandwidth: float) -> np.ndarray:
    """Split ``total_power`` so every rate is proportional to its weight.

    Zero weights get zero power.  The common rate-per-weight is found by a
    bracketed root search on the (strictly increasing) power it costs.
    """
    weights = np.asarray(weights, dtype=float)
    nu = ladder.noise_mw if isinstance(ladder, NoiseLadder) else np.asarray(ladder, float)
    if total_power <= 0 or not np.any(weights > 0):
        return np.zeros_like(weights)
    active = weights > 0
    if np.count_nonzero(active) == 1:
        out = np.zeros_like(weights)
        out[active] = total_power
        return out

    def excess(x):
        return split_from_leading_rate(x, weights, nu, bandwidth).sum() - total_power

    # no receiver can beat its interference-free rate on the whole level
    ceiling = bandwidth * np.log2(1.0 + total_power / nu[active]) / weights[active]
    x = brentq(excess, 0.0, float(ceiling.min()), xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    split = split_from_leading_rate(x, weights, nu, bandwidth)
    # absorb rounding so the split sums to the level
    last = int(np.flatnonzero(active)[-1])
    split[last] += total_power - split.sum()
    return split


SplitRule = Callable[[float, np.ndarray, np.ndarray], np.ndarray]


def _policy_rule(policy: AllocationPolicy, demands, ladder, bandwidth) -> SplitRule:
    demands = np.asarray(demands, dtype=float)

    def proposed(level, active, remaining):
        return proportional_split(level, np.where(active, demands, 0.0), ladder, bandwidth)

    def equal(level, active, remaining):
        return np.where(active, level / np.count_nonzero(active), 0.0)

    def data_ratio(level, active, remaining):
        w = np.where(active, demands, 0.0)
        return level * w / w.sum()

    def remaining_ratio(level, active, remaining):
        w = np.where(active, remaining, 0.0)
        return level * w / w.sum()

    return {
        AllocationPolicy.PROPOSED: proposed,
        AllocationPolicy.EP: equal,
        AllocationPolicy.DR: data_ratio,
        AllocationPolicy.RDR: remaining_ratio,
    }[AllocationPolicy(policy)]


def _sweep(rule: SplitRule, schedule: PowerStaircase, demands, ladder, bandwidth) -> AllocationSchedule:
    demands = np.asarray(demands, dtype=float)
    remaining = demands.copy()
    active = remaining > 0
    finish = np.where(active, np.inf, 0.0)
    slots = []
    for a, b, level in schedule.epochs():
        t = a
        while t < b and active.any():
            powers = rule(level, active, remaining)
            rates = rates_of_split(powers, ladder, bandwidth)
            with np.errstate(divide="ignore", invalid="ignore"):
                eta = np.where(active & (rates > 0), remaining / rates, np.inf)
            first = float(eta.min())
            end = min(b, t + first)
            done = active & (t + eta <= end + FINISH_ATOL)
            span = end - t
            remaining = np.where(active, remaining - rates * span, remaining)
            # leftovers a rounding error away from zero also finish here
            done |= active & (remaining <= _DUST * demands)
            finish[done] = np.minimum(t + eta[done], max(end, t))
            remaining[done] = 0.0
            active &= ~done
            slots.append(Slot(t, end, level, powers, rates))
            if end == t and not done.any():
                break
            t = end
        if not active.any():
            break
    if active.any():
        raise NeverCompletes(
            f"schedule ends at {schedule.end:.6g} s with "
            f"{np.count_nonzero(active)} receiver(s) still owed bits"
        )
    return AllocationSchedule(tuple(slots), finish, demands, ladder)


def allocate(policy, schedule: PowerStaircase, demands, ladder: NoiseLadder, bandwidth: float) -> AllocationSchedule:
    """Run ``policy`` over ``schedule``; ``demands`` in ladder order."""
    rule = _policy_rule(AllocationPolicy(policy), demands, ladder, bandwidth)
    return _sweep(rule, schedule, demands, ladder, bandwidth)


def allocate_cutoff(plan: OptimalPlan) -> AllocationSchedule:
    """Slot view of the optimal cut-off split over the plan's staircase."""
    cut = plan.cutoffs

    def rule(level, active, remaining):
        return cutoff_split(level, cut)

    return _sweep(rule, plan.staircase, plan.demands, plan.ladder, plan.bandwidth)


def relative_deviation(proposed: float, optimal: float) -> float:
    if not optimal > 0:
        raise ValueError("optimal completion time must be positive")
    return (proposed - optimal) / optimal
