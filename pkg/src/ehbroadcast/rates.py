"""Degraded AWGN broadcast channel: receiver ordering and the rate region.

Receivers are ranked by equivalent noise, strongest first.  A receiver sees
the powers of all stronger receivers as interference and decodes/cancels the
weaker ones, so with a power split ``P`` in ladder order

    r_n = B * log2(1 + P_n / (P_1 + ... + P_{n-1} + nu_n)).

Every function here accepts a split as the last axis of an array, so a whole
staircase of epochs can be evaluated at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Scenario

__all__ = [
    "NoiseLadder",
    "order_receivers",
    "rates_of_split",
    "split_from_leading_rate",
    "cutoff_split",
]

LN2 = np.log(2.0)


@dataclass(frozen=True, eq=False)
class NoiseLadder:
    """Equivalent noises sorted ascending, with the receiver id at each rung."""

    noise_mw: np.ndarray
    receiver_ids: tuple
    # order[k] = index into Scenario.receivers of ladder position k
    order: np.ndarray

    def __len__(self) -> int:
        return len(self.noise_mw)

    def to_ladder(self, per_receiver) -> np.ndarray:
        """Reorder a per-receiver vector (scenario order) into ladder order."""
        return np.asarray(per_receiver, dtype=float)[..., self.order]

    def to_scenario(self, per_position) -> np.ndarray:
        """Inverse of :meth:`to_ladder`."""
        per_position = np.asarray(per_position, dtype=float)
        out = np.empty_like(per_position)
        out[..., self.order] = per_position
        return out


def order_receivers(scenario: Scenario) -> NoiseLadder:
    nu = scenario.receiver_noise_mw()
    ids = np.array([r.id for r in scenario.receivers])
    # lexsort: last key is primary
    order = np.lexsort((ids, nu))
    return NoiseLadder(nu[order], tuple(int(i) for i in ids[order]), order)


def _noise(ladder) -> np.ndarray:
    return ladder.noise_mw if isinstance(ladder, NoiseLadder) else np.asarray(ladder, dtype=float)


def rates_of_split(split, ladder, bandwidth: float) -> np.ndarray:
    """Boundary rates (bits/s) of the region for a power split in ladder order."""
    p = np.asarray(split, dtype=float)
    interference = np.cumsum(p, axis=-1) - p
    return bandwidth * np.log1p(p / (interference + _noise(ladder))) / LN2


def split_from_leading_rate(r1: float, rate_ratios, ladder, bandwidth: float) -> np.ndarray:
    """Powers that achieve rates ``r_n = ratio_n * r1`` on the region boundary.

    The sum of the returned split is whatever those rates cost; no total
    power constraint is applied.
    """
    nu = _noise(ladder)
    rates = r1 * np.asarray(rate_ratios, dtype=float)
    factor = np.expm1(rates / bandwidth * LN2)
    p = np.empty_like(nu)
    acc = 0.0
    for n in range(nu.size):
        p[n] = factor[n] * (acc + nu[n])
        acc += p[n]
    return p


def cutoff_split(total_power, cutoffs) -> np.ndarray:
    """Strongest-first fill: receiver n takes at most ``cutoffs[n]``, the
    weakest receiver takes whatever is left.

    ``total_power`` may be an array of levels; the result then has one row
    per level.
    """
    total = np.asarray(total_power, dtype=float)[..., None]
    pc = np.asarray(cutoffs, dtype=float)
    taken_before = np.concatenate(([0.0], np.cumsum(pc)))
    head = np.clip(total - taken_before[:-1], 0.0, pc)
    tail = total - np.sum(head, axis=-1, keepdims=True)
    return np.concatenate((head, np.maximum(tail, 0.0)), axis=-1)
