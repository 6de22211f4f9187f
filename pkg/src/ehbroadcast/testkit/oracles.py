"""Slow brute-force references for checking the solvers on tiny instances.

Nothing here imports the solver modules' numerics: rates are recomputed
from scratch and the search is a plain grid / dynamic program.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..optimal import PowerStaircase

__all__ = [
    "OracleConfig",
    "GridTooCoarse",
    "oracle_min_time_single_rx",
    "oracle_cutoff_two_rx",
    "random_feasible_schedules",
    "single_rx_bits",
]


class GridTooCoarse(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleConfig:
    time_steps: int = 400
    energy_levels: int = 20000
    # relative change allowed when the time grid is halved
    stability: float = 0.02
    scan_points: int = 2001
    refine_rounds: int = 6
    max_horizon: float = 1e6

    def __post_init__(self):
        if self.time_steps < 1 or self.energy_levels < 1:
            raise ValueError("grid sizes must be positive")


def _rate(p, nu, bandwidth):
    return bandwidth * np.log2(1.0 + np.asarray(p, dtype=float) / nu)


def _dp_bits(times, amounts, nu, bandwidth, horizon, steps, levels):
    """Best bits delivered by each grid time ``(k + 1) * horizon / steps``.

    State is cumulative energy used, on a grid of ``levels`` quanta.  One
    step adds ``m`` quanta for ``dt * rate(m * quantum / dt)`` bits.  Both
    that gain and the value function are concave in energy, so the max-plus
    step is an exact merge of their sorted increments, capped by what has
    arrived so far.
    """
    dt = horizon / steps
    total = float(np.sum(amounts[times < horizon]))
    if total <= 0:
        return np.zeros(steps)
    de = total / levels
    m = np.arange(levels + 1)
    step_gain = np.diff(dt * _rate(m * de / dt, nu, bandwidth))
    value_inc = np.zeros(0)
    best = np.empty(steps)
    for k in range(steps):
        avail = float(np.sum(amounts[times <= k * dt]))
        cap = min(levels, int(math.floor(avail / de + 1e-9)))
        merged = np.concatenate((value_inc, step_gain))
        value_inc = -np.sort(-merged, kind="stable")[:cap]
        best[k] = float(np.sum(value_inc))
    return best


def _first_crossing(best, demand, horizon):
    steps = len(best)
    dt = horizon / steps
    hit = np.flatnonzero(best >= demand)
    if hit.size == 0:
        return None
    k = int(hit[0])
    prev = best[k - 1] if k > 0 else 0.0
    frac = (demand - prev) / (best[k] - prev) if best[k] > prev else 1.0
    return (k + frac) * dt


def oracle_min_time_single_rx(timeline, demand: float, nu: float, bandwidth: float,
                              grid: OracleConfig = OracleConfig()) -> float:
    """Completion time for one receiver by dynamic programming on a grid.

    ``timeline`` is anything with ``times`` and ``amounts`` arrays (entry 0
    at t = 0).  Raises GridTooCoarse if halving the time step moves the
    answer by more than ``grid.stability``.
    """
    if demand <= 0:
        return 0.0
    times = np.asarray(timeline.times, dtype=float)
    amounts = np.asarray(timeline.amounts, dtype=float)

    horizon = max(1.0, 2.0 * float(times.max()))
    while True:
        best = _dp_bits(times, amounts, nu, bandwidth, horizon, 64, 2000)
        if best[-1] >= demand:
            break
        horizon *= 2.0
        if horizon > grid.max_horizon:
            raise GridTooCoarse("demand not reached within the search bound")

    def solve(steps, h):
        best = _dp_bits(times, amounts, nu, bandwidth, h, steps, grid.energy_levels)
        return _first_crossing(best, demand, h)

    coarse = solve(grid.time_steps // 4, horizon)
    h = 1.25 * (coarse if coarse is not None else horizon)
    t1 = solve(grid.time_steps // 2, h)
    t2 = solve(grid.time_steps, h)
    if t1 is None or t2 is None:
        t1, t2 = solve(grid.time_steps // 2, horizon), solve(grid.time_steps, horizon)
    if t1 is None or t2 is None or abs(t1 - t2) > grid.stability * t2:
        raise GridTooCoarse(f"time grid unstable: {t1} vs {t2}")
    return t2


def single_rx_bits(breakpoints, levels, nu: float, bandwidth: float) -> float:
    d = np.diff(np.asarray(breakpoints, dtype=float))
    return float(np.sum(d * _rate(levels, nu, bandwidth)))


def oracle_cutoff_two_rx(stairs, demand_1: float, noise, bandwidth: float,
                         grid: OracleConfig = OracleConfig()) -> float:
    """Cut-off power for the stronger of two receivers by grid scan + refinement."""
    levels = np.asarray(stairs.levels, dtype=float)
    d = np.diff(np.asarray(stairs.breakpoints, dtype=float))
    nu1 = float(np.asarray(noise, dtype=float).ravel()[0])
    if demand_1 <= 0:
        return 0.0

    def bits(pc):
        pc = np.atleast_1d(pc)[:, None]
        return np.sum(d * _rate(np.minimum(levels, pc), nu1, bandwidth), axis=1)

    lo, hi = 0.0, float(levels.max())
    for _ in range(grid.refine_rounds):
        pcs = np.linspace(lo, hi, grid.scan_points)
        b = bits(pcs)
        k = np.flatnonzero(b >= demand_1)
        if k.size == 0:
            return hi
        k = int(k[0])
        if k == 0:
            return pcs[0]
        lo, hi = pcs[k - 1], pcs[k]
    return 0.5 * (lo + hi)


def random_feasible_schedules(timeline, horizon: float, count: int, seed: int = 0,
                              anchor=None) -> list:
    """Random piecewise-constant total-power schedules that respect causality.

    Breakpoints are every arrival before ``horizon`` plus a few random
    instants; each segment spends a random share of what is in the battery.
    ``anchor`` (usually the optimal staircase) is returned first.
    """
    if count <= 0:
        return []
    rng = np.random.default_rng(seed)
    times = np.asarray(timeline.times, dtype=float)
    amounts = np.asarray(timeline.amounts, dtype=float)
    inside = times < horizon
    times, amounts = times[inside], amounts[inside]
    out = [anchor] if anchor is not None else []
    while len(out) < count:
        extra = rng.uniform(0.0, horizon, rng.integers(0, 6))
        bps = np.unique(np.concatenate((times, extra, [0.0, horizon])))
        bps = bps[(bps >= 0) & (bps <= horizon)]
        levels = np.empty(len(bps) - 1)
        used = 0.0
        greedy = rng.random() < 0.3
        for i in range(len(bps) - 1):
            avail = float(np.sum(amounts[times <= bps[i]]))
            room = max(avail - used, 0.0)
            share = 1.0 if (greedy and rng.random() < 0.7) else rng.random()
            levels[i] = share * room / (bps[i + 1] - bps[i])
            used += levels[i] * (bps[i + 1] - bps[i])
        out.append(PowerStaircase(bps, levels))
    return out[:count]
