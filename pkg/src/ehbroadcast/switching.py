"""Which transmitter is on the air: battery bookkeeping and switching policies.

The total power schedule is fixed beforehand; only one transmitter works at
a time and drains its own battery at the current level.  Energy that lands
on the worker keeps it going; when its battery hits zero another transmitter
is chosen by the policy.  Arrival times are known in advance, so a
transmitter is *full* once it has no arrival left before the deadline.
"""

from __future__ import annotations

import bisect
import csv
import io
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .model import Scenario
from .optimal import PowerStaircase

__all__ = [
    "Proposed",
    "EnergyMinimum",
    "FixedOrder",
    "Stochastic",
    "SwitchLog",
    "ScheduleGap",
    "EngineState",
    "classify_full",
    "choose_next",
    "simulate_switching",
    "count_switches",
    "policy_from_name",
]

# batteries at or below this are empty
EMPTY_MJ = 1e-12
# depletion this close to another event is treated as simultaneous with it
SNAP_S = 1e-9
# tolerated energy shortfall while idle under a positive level
GAP_MJ = 1e-6


@dataclass(frozen=True)
class Proposed:
    """Full transmitters first, else the fullest battery.

    Among full transmitters the lowest id wins unless ``full_preference``
    lists ids in another order.
    """

    full_preference: tuple = ()


@dataclass(frozen=True)
class EnergyMinimum:
    """Smallest battery first."""


@dataclass(frozen=True)
class FixedOrder:
    order: tuple

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(i) for i in self.order))


@dataclass(frozen=True)
class Stochastic:
    """Uniform over transmitters with energy, other than the current one."""

    seed: int = 0


class ScheduleGap(RuntimeError):
    """Positive power was demanded while every battery was empty."""


@dataclass
class EngineState:
    clock: float
    ids: tuple
    battery: np.ndarray
    arrival_times: list
    deadline: float
    worker: Optional[int] = None  # index into ids
    level: float = 0.0

    def candidates(self) -> list:
        return [i for i in range(len(self.ids)) if self.battery[i] > EMPTY_MJ]


@dataclass(frozen=True)
class SwitchLog:
    """Working segments ``(worker_id, start, end)``; ``None`` marks idle gaps."""

    segments: tuple
    switch_count: int = field(default=0)

    def working_time(self) -> float:
        return sum(e - s for w, s, e in self.segments if w is not None)

    def workers(self) -> list:
        return [w for w, _, _ in self.segments if w is not None]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["worker_id", "start_s", "end_s"])
        for wid, s, e in self.segments:
            w.writerow(["idle" if wid is None else wid, repr(s), repr(e)])
        return buf.getvalue()


def classify_full(arrival_times: Sequence[float], now: float, deadline: float) -> bool:
    """True iff no arrival falls in ``(now, deadline)``."""
    k = bisect.bisect_right(arrival_times, now)
    return k == len(arrival_times) or arrival_times[k] >= deadline


def choose_next(policy, state: EngineState, rng: Optional[np.random.Generator] = None) -> Optional[int]:
    """Index of the next worker, or ``None`` if nobody has energy."""
    cands = state.candidates()
    if not cands:
        return None
    ids = state.ids
    if isinstance(policy, Proposed):
        full = [i for i in cands if classify_full(state.arrival_times[i], state.clock, state.deadline)]
        if full:
            pref = {tid: k for k, tid in enumerate(policy.full_preference)}
            return min(full, key=lambda i: (pref.get(ids[i], len(pref)), ids[i]))
        return min(cands, key=lambda i: (-state.battery[i], ids[i]))
    if isinstance(policy, EnergyMinimum):
        return min(cands, key=lambda i: (state.battery[i], ids[i]))
    if isinstance(policy, FixedOrder):
        pos = {tid: k for k, tid in enumerate(policy.order)}
        if state.worker is None:
            start = 0
        else:
            start = pos[ids[state.worker]] + 1
        index = {tid: i for i, tid in enumerate(ids)}
        for step in range(len(policy.order)):
            i = index[policy.order[(start + step) % len(policy.order)]]
            if state.battery[i] > EMPTY_MJ:
                return i
        return None
    if isinstance(policy, Stochastic):
        others = [i for i in cands if i != state.worker] or cands
        return others[int(rng.integers(len(others)))]
    raise TypeError(f"unknown switching policy {policy!r}")


def count_switches(segments) -> int:
    """Changes of worker between consecutive working segments; idle gaps are skipped."""
    workers = [s[0] if isinstance(s, tuple) else s for s in segments]
    workers = [w for w in workers if w is not None]
    return sum(1 for a, b in zip(workers, workers[1:]) if a != b)


def simulate_switching(scenario: Scenario, schedule: PowerStaircase, deadline: float,
                       policy, seed=None) -> SwitchLog:
    """Replay ``schedule`` over ``(0, deadline]`` with one worker at a time."""
    txs = scenario.transmitters
    ids = tuple(t.id for t in txs)
    if isinstance(policy, FixedOrder) and sorted(policy.order) != sorted(ids):
        raise ValueError(f"fixed order {policy.order} is not a permutation of {ids}")
    arrival_times = [list(t.arrival_times) for t in txs]
    events = sorted(
        (a.time_s, i, a.amount_mj)
        for i, t in enumerate(txs)
        for a in t.arrivals
        if a.time_s < deadline
    )
    rng = None
    if isinstance(policy, Stochastic):
        rng = np.random.default_rng(policy.seed if seed is None else seed)

    bps = schedule.breakpoints
    state = EngineState(
        clock=0.0,
        ids=ids,
        battery=np.array([t.initial_energy_mj for t in txs], dtype=float),
        arrival_times=arrival_times,
        deadline=deadline,
    )
    segments = []
    seg_start = 0.0
    idle_deficit = 0.0
    ev = 0
    lvl = 0

    def close(end):
        if end > seg_start:
            wid = None if state.worker is None else ids[state.worker]
            if segments and segments[-1][0] == wid and segments[-1][2] == seg_start:
                segments[-1] = (wid, segments[-1][1], end)
            else:
                segments.append((wid, seg_start, end))

    state.worker = choose_next(policy, state, rng)
    t = 0.0
    while t < deadline:
        while lvl + 1 < len(bps) and bps[lvl + 1] <= t:
            lvl += 1
        level = float(schedule.levels[lvl]) if lvl < len(schedule.levels) and t >= bps[0] else 0.0
        state.level = level
        next_bp = float(bps[lvl + 1]) if lvl + 1 < len(bps) else np.inf
        next_arr = events[ev][0] if ev < len(events) else np.inf
        horizon = min(next_bp, next_arr, deadline)
        depleted = False
        if state.worker is not None and level > 0:
            t_dep = t + state.battery[state.worker] / level
            if t_dep < horizon - SNAP_S:
                horizon = t_dep
                depleted = True
            elif t_dep <= horizon + SNAP_S:
                depleted = True
        dt = horizon - t
        if state.worker is None:
            idle_deficit += level * dt
            if idle_deficit > GAP_MJ:
                raise ScheduleGap(f"level {level:.6g} mW with all batteries empty at t={t:.9g} s")
        elif depleted:
            state.battery[state.worker] = 0.0
        else:
            state.battery[state.worker] -= level * dt
            if state.battery[state.worker] < -1e-9:
                raise ScheduleGap(f"battery of TX{ids[state.worker]} went negative at t={horizon:.9g} s")
        t = horizon
        state.clock = t
        while ev < len(events) and events[ev][0] <= t:
            state.battery[events[ev][1]] += events[ev][2]
            ev += 1
        if t >= deadline:
            break
        if state.worker is not None and state.battery[state.worker] <= EMPTY_MJ:
            state.battery[state.worker] = max(state.battery[state.worker], 0.0)
            nxt = choose_next(policy, state, rng)
            if nxt != state.worker:
                close(t)
                seg_start = t
                state.worker = nxt
        elif state.worker is None:
            nxt = choose_next(policy, state, rng)
            if nxt is not None:
                close(t)
                seg_start = t
                state.worker = nxt
                idle_deficit = 0.0
    close(deadline)
    segs = tuple(segments)
    return SwitchLog(segs, count_switches(segs))


def policy_from_name(name: str, ids: Sequence[int] = (1, 2, 3), seed: int = 0):
    """Parse ``proposed``, ``em``, ``ss``, ``fo123``/``fo:1,3,2``."""
    key = name.strip().lower()
    if key == "proposed":
        return Proposed()
    if key == "em":
        return EnergyMinimum()
    if key == "ss":
        return Stochastic(seed)
    if key.startswith("fo:"):
        return FixedOrder(tuple(int(x) for x in key[3:].split(",")))
    if key.startswith("fo") and key[2:].isdigit():
        return FixedOrder(tuple(int(c) for c in key[2:]))
    if key == "fo":
        return FixedOrder(tuple(ids))
    raise ValueError(f"unknown switching policy {name!r}")
