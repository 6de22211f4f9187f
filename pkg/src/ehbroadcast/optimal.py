"""Minimal completion time: the optimal total-power staircase and cut-off powers.

The staircase is the minimal-slope (taut) consumption curve under the
merged energy arrivals.  For a fixed horizon the cut-off powers are found
strongest receiver first; the completion time is then the smallest horizon
for which the weakest receiver's residual bits cover its demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .model import Scenario, Timeline, merge_arrivals, validate
from .rates import LN2, NoiseLadder, cutoff_split, order_receivers, rates_of_split

__all__ = [
    "PowerStaircase",
    "OptimalPlan",
    "EmptyTimeline",
    "Infeasible",
    "Unfeasible",
    "staircase",
    "departure_bits",
    "solve_cutoffs",
    "min_completion_time",
    "extend_schedule",
    "causality_slack",
]

T_RTOL = 1e-9
BITS_RTOL = 1e-10
# relative slope difference treated as a tie when picking the next breakpoint
_TIE_RTOL = 1e-12


class EmptyTimeline(ValueError):
    """No energy ever arrives, so nothing can be transmitted."""


class Infeasible(ValueError):
    """The horizon is too short for receiver ``position`` (ladder order)."""

    def __init__(self, position: int, message: str = ""):
        self.position = position
        super().__init__(message or f"horizon too short for ladder position {position}")


class Unfeasible(RuntimeError):
    """The energy stream runs out before the demands can be met."""


@dataclass(frozen=True, eq=False)
class PowerStaircase:
    """Piecewise-constant total power: ``levels[l]`` on ``(breakpoints[l], breakpoints[l+1])``.

    ``optimal_end`` marks where the minimal-slope part stops; anything after
    it was appended by :func:`extend_schedule`.
    """

    breakpoints: np.ndarray
    levels: np.ndarray
    optimal_end: Optional[float] = None

    @property
    def end(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def durations(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def __len__(self) -> int:
        return len(self.levels)

    def epochs(self):
        for l in range(len(self.levels)):
            yield float(self.breakpoints[l]), float(self.breakpoints[l + 1]), float(self.levels[l])

    def level_at(self, t: float) -> float:
        """Level governing ``(t, t + dt)``; zero outside the schedule."""
        if t < self.breakpoints[0] or t >= self.breakpoints[-1]:
            return 0.0
        l = int(np.searchsorted(self.breakpoints, t, side="right")) - 1
        return float(self.levels[l])

    def consumed(self, t: float) -> float:
        """Energy used over ``(0, t)``."""
        b = self.breakpoints
        spans = np.clip(np.minimum(b[1:], t) - b[:-1], 0.0, None)
        return float(np.dot(spans, self.levels))

    def total_energy(self) -> float:
        return float(np.dot(self.durations, self.levels))

    def is_increasing(self) -> bool:
        return bool(np.all(np.diff(self.levels) > 0))


@dataclass(frozen=True, eq=False)
class OptimalPlan:
    """Result of :func:`min_completion_time`; vectors are in ladder order."""

    completion_time: float
    staircase: PowerStaircase
    cutoffs: np.ndarray
    ladder: NoiseLadder
    bandwidth: float
    demands: np.ndarray
    delivered: np.ndarray = field(default=None)

    def bits_by(self, t: float) -> np.ndarray:
        """Per-receiver bits delivered by time ``t``."""
        s = self.staircase
        spans = np.clip(np.minimum(s.breakpoints[1:], t) - s.breakpoints[:-1], 0.0, None)
        split = cutoff_split(s.levels, self.cutoffs)
        rates = rates_of_split(split, self.ladder, self.bandwidth)
        return spans @ rates


def staircase(timeline: Timeline, horizon: float) -> PowerStaircase:
    """Minimal-slope total-power schedule over ``(0, horizon)``.

    Only arrivals strictly before ``horizon`` count.  From each anchor the
    next breakpoint is the arrival (or the horizon) that minimises the
    average power the energy gathered in between can sustain; ties go to
    the later candidate so levels strictly increase.
    """
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    tl = timeline.before(horizon)
    if tl.total_energy <= 0:
        raise EmptyTimeline("no energy arrives before the horizon")
    # candidate endpoints: each later arrival (energy gathered strictly before
    # it) and the horizon itself (everything gathered)
    t = np.append(tl.times, horizon)
    cum = np.concatenate(([0.0], np.cumsum(tl.amounts)))
    last = len(t) - 1

    anchors = [0]
    levels = []
    a = 0
    while a < last:
        slopes = (cum[a + 1:] - cum[a]) / (t[a + 1:] - t[a])
        best = slopes.min()
        tol = _TIE_RTOL * abs(best)
        w = a + 1 + int(np.flatnonzero(slopes <= best + tol)[-1])
        levels.append((cum[w] - cum[a]) / (t[w] - t[a]))
        anchors.append(w)
        a = w
    return PowerStaircase(t[anchors], np.array(levels), optimal_end=float(horizon))


def departure_bits(stairs: PowerStaircase, cutoffs, ladder, bandwidth: float) -> np.ndarray:
    """Bits each receiver (ladder order) gets when every epoch is split by cut-offs."""
    if len(stairs) == 0:
        return np.zeros(len(np.atleast_1d(cutoffs)) + 1)
    split = cutoff_split(stairs.levels, cutoffs)
    return stairs.durations @ rates_of_split(split, ladder, bandwidth)


def _receiver_bits(levels, durations, prior, pc, nu_k, bandwidth):
    """Bits of one receiver whose stronger neighbours take ``prior`` in total."""
    used = np.minimum(levels, prior)
    p = np.minimum(levels - used, pc)
    return float(durations @ np.log1p(p / (used + nu_k))) * bandwidth / LN2


def solve_cutoffs(stairs: PowerStaircase, demands, ladder, bandwidth: float) -> np.ndarray:
    """Cut-off powers so the N-1 strongest receivers get exactly their demands.

    ``demands`` is in ladder order; only its first N-1 entries are used.
    Raises :class:`Infeasible` naming the first receiver that cannot be served.
    """
    nu = ladder.noise_mw if isinstance(ladder, NoiseLadder) else np.asarray(ladder, float)
    demands = np.asarray(demands, dtype=float)
    levels, durations = stairs.levels, stairs.durations
    top = float(levels.max()) if levels.size else 0.0
    cut = np.zeros(max(len(nu) - 1, 0))
    prior = 0.0
    for k in range(len(cut)):
        room = top - prior
        target = demands[k]

        def gap(pc):
            return _receiver_bits(levels, durations, prior, pc, nu[k], bandwidth) - target

        if room <= 0 or gap(room) < 0:
            raise Infeasible(k)
        cut[k] = brentq(gap, 0.0, room, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        prior += cut[k]
    return cut


def _residual_bits(stairs, prior, nu_last, bandwidth):
    used = np.minimum(stairs.levels, prior)
    p = stairs.levels - used
    return float(stairs.durations @ np.log1p(p / (used + nu_last))) * bandwidth / LN2


def min_energy_bound(demands, nu, bandwidth: float) -> float:
    """Infimum energy (mJ) that can deliver ``demands`` given unlimited time."""
    return float(np.dot(demands, nu)) * LN2 / bandwidth


def min_completion_time(scenario: Scenario, timeline: Optional[Timeline] = None) -> OptimalPlan:
    """Smallest horizon whose staircase, split by cut-offs, meets every demand.

    Bisection on the horizon: feasibility means the cut-offs exist and the
    weakest receiver's leftover bits cover its demand.
    """
    validate(scenario)
    ladder = order_receivers(scenario)
    bw = scenario.channel.bandwidth_hz
    demands = ladder.to_ladder(scenario.demands)
    tl = timeline if timeline is not None else merge_arrivals(scenario)
    if tl.total_energy <= min_energy_bound(demands, ladder.noise_mw, bw):
        raise Unfeasible("total harvested energy cannot deliver the demands at any horizon")

    def feasible(T):
        try:
            stairs = staircase(tl, T)
        except EmptyTimeline:
            return False
        try:
            cut = solve_cutoffs(stairs, demands, ladder, bw)
        except Infeasible:
            return False
        return _residual_bits(stairs, float(cut.sum()), ladder.noise_mw[-1], bw) >= demands[-1]

    first = float(tl.times[np.flatnonzero(tl.amounts > 0)[0]])
    step = max(first, 1e-3)
    lo, hi = first, first + step
    while not feasible(hi):
        lo = hi
        step *= 2.0
        hi = first + step
        if step > 1e12:
            raise Unfeasible("no feasible horizon found below 1e12 s")
    while hi - lo > T_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid

    stairs = staircase(tl, hi)
    cut = solve_cutoffs(stairs, demands, ladder, bw)
    plan = OptimalPlan(hi, stairs, cut, ladder, bw, demands)
    delivered = plan.bits_by(hi)
    return OptimalPlan(hi, stairs, cut, ladder, bw, demands, delivered)


def extend_schedule(stairs: PowerStaircase, timeline: Timeline, beyond: float) -> PowerStaircase:
    """Append epochs after the staircase end up to ``beyond``.

    Each later arrival is spread evenly until the next arrival (or until
    ``beyond`` if none follows), so the battery runs dry exactly as new
    energy comes in.  Before the first later arrival the power is zero.
    """
    end = stairs.end
    if beyond <= end:
        return stairs
    times = timeline.times
    first = int(np.searchsorted(times, end, side="left"))
    bps = [end]
    lv = []
    if first == len(times) or times[first] > end:
        bps.append(min(float(times[first]), beyond) if first < len(times) else beyond)
        lv.append(0.0)
    for i in range(first, len(times)):
        t = float(times[i])
        if t >= beyond:
            break
        nxt = float(times[i + 1]) if i + 1 < len(times) else beyond
        bps.append(min(nxt, beyond))
        lv.append(float(timeline.amounts[i]) / (nxt - t))
    return PowerStaircase(
        np.concatenate((stairs.breakpoints, bps[1:])),
        np.concatenate((stairs.levels, lv)),
        optimal_end=stairs.optimal_end,
    )


def causality_slack(stairs: PowerStaircase, timeline: Timeline) -> np.ndarray:
    """Harvested-minus-consumed energy at every point where it can be tightest.

    The binding instants are just before each arrival and at every
    breakpoint; a schedule is causal iff all entries are >= 0.
    """
    points = np.union1d(timeline.times[timeline.times <= stairs.end], stairs.breakpoints)
    points = points[points > 0]
    cum = np.concatenate(([0.0], np.cumsum(timeline.amounts)))
    # energy strictly before each point
    harvested = cum[np.searchsorted(timeline.times, points, side="left")]
    consumed = np.array([stairs.consumed(p) for p in points])
    return harvested - consumed
