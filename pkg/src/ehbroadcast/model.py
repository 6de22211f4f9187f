"""Domain types for the multi-transmitter energy-harvesting broadcast system.

Units are fixed across the package: seconds, mJ, mW (= mJ/s), bits, Hz.
Rates are bits/s.  Path losses are given in dB and stored as linear gains.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

__all__ = [
    "ChannelSpec",
    "EnergyArrival",
    "TransmitterProfile",
    "ReceiverDemand",
    "Scenario",
    "Timeline",
    "Violation",
    "ValidationError",
    "check",
    "validate",
    "merge_arrivals",
    "db_to_gain",
    "gain_to_db",
]

# Relative spread allowed between transmitters' equivalent noise to the same
# receiver before the scenario is rejected.
NOISE_RTOL = 1e-9


def db_to_gain(loss_db):
    """Convert a path loss in dB to a linear power gain."""
    return 10.0 ** (-np.asarray(loss_db, dtype=float) / 10.0)


def gain_to_db(gain):
    return -10.0 * np.log10(np.asarray(gain, dtype=float))


@dataclass(frozen=True)
class ChannelSpec:
    """Bandwidth plus per (transmitter, receiver) gain and noise PSD.

    ``path_gain[m][n]`` and ``noise_psd[m][n]`` (W/Hz) follow the order of
    ``Scenario.transmitters`` and ``Scenario.receivers``.
    """

    bandwidth_hz: float
    path_gain: tuple
    noise_psd: tuple

    @classmethod
    def from_db(cls, bandwidth_hz: float, path_loss_db, noise_psd) -> "ChannelSpec":
        gain = db_to_gain(path_loss_db)
        psd = np.asarray(noise_psd, dtype=float)
        return cls(float(bandwidth_hz), _freeze(gain), _freeze(psd))

    @property
    def gain_matrix(self) -> np.ndarray:
        return np.asarray(self.path_gain, dtype=float)

    @property
    def psd_matrix(self) -> np.ndarray:
        return np.asarray(self.noise_psd, dtype=float)

    def equivalent_noise_mw(self) -> np.ndarray:
        """Noise referred through the path gain, ``N * B / h``, in mW (M x N)."""
        return self.psd_matrix * self.bandwidth_hz / self.gain_matrix * 1e3


@dataclass(frozen=True)
class EnergyArrival:
    time_s: float
    amount_mj: float


@dataclass(frozen=True)
class TransmitterProfile:
    id: int
    initial_energy_mj: float
    arrivals: tuple = ()

    @property
    def arrival_times(self) -> np.ndarray:
        return np.array([a.time_s for a in self.arrivals], dtype=float)

    @property
    def arrival_amounts(self) -> np.ndarray:
        return np.array([a.amount_mj for a in self.arrivals], dtype=float)

    @classmethod
    def from_pairs(cls, id: int, initial_energy_mj: float, pairs) -> "TransmitterProfile":
        return cls(
            int(id),
            float(initial_energy_mj),
            tuple(EnergyArrival(float(t), float(e)) for t, e in pairs),
        )


@dataclass(frozen=True)
class ReceiverDemand:
    id: int
    bits: float


@dataclass(frozen=True)
class Scenario:
    """Transmitters, receivers and the channel between them.

    ``horizon_s`` is set when the arrival streams are only known up to some
    time (generated scenarios); ``None`` means the listed arrivals are all
    there is.  ``origin`` lets the generator extend a scenario it produced.
    """

    transmitters: tuple
    receivers: tuple
    channel: ChannelSpec
    horizon_s: Optional[float] = None
    origin: Any = field(default=None, compare=False, repr=False)

    @property
    def demands(self) -> np.ndarray:
        return np.array([r.bits for r in self.receivers], dtype=float)

    def receiver_noise_mw(self) -> np.ndarray:
        """Per-receiver equivalent noise (taken from the first transmitter)."""
        return self.channel.equivalent_noise_mw()[0]

    def last_arrival_time(self) -> float:
        last = 0.0
        for tx in self.transmitters:
            if tx.arrivals:
                last = max(last, tx.arrivals[-1].time_s)
        return last

    def with_demands(self, bits: Sequence[float]) -> "Scenario":
        receivers = tuple(ReceiverDemand(r.id, float(b)) for r, b in zip(self.receivers, bits))
        return Scenario(self.transmitters, receivers, self.channel, self.horizon_s, self.origin)


@dataclass(frozen=True, eq=False)
class Timeline:
    """Arrivals of the merged 'whole transmitter': entry 0 sits at t = 0."""

    times: np.ndarray
    amounts: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    @property
    def total_energy(self) -> float:
        return float(np.sum(self.amounts))

    def before(self, horizon: float) -> "Timeline":
        keep = self.times < horizon
        keep[0] = True
        return Timeline(self.times[keep], self.amounts[keep])

    def available(self, t: float) -> float:
        """Energy harvested at or before ``t``."""
        k = np.searchsorted(self.times, t, side="right")
        return float(np.sum(self.amounts[:k]))


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class ValidationError(ValueError):
    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))

    @property
    def codes(self) -> list:
        return [v.code for v in self.violations]


def check(scenario: Scenario) -> list:
    """Return every invariant violation found in ``scenario`` (empty if valid)."""
    out = []

    def bad(code, msg):
        out.append(Violation(code, msg))

    txs, rxs, ch = scenario.transmitters, scenario.receivers, scenario.channel
    if len(txs) < 1:
        bad("NoTransmitters", "at least one transmitter is required")
    if len(rxs) < 1:
        bad("NoReceivers", "at least one receiver is required")
    if len({t.id for t in txs}) != len(txs):
        bad("DuplicateId", "transmitter ids must be unique")
    if len({r.id for r in rxs}) != len(rxs):
        bad("DuplicateId", "receiver ids must be unique")

    for tx in txs:
        if not np.isfinite(tx.initial_energy_mj) or tx.initial_energy_mj < 0:
            bad("NegativeEnergy", f"TX{tx.id}: initial energy must be >= 0")
        times = tx.arrival_times
        amounts = tx.arrival_amounts
        if times.size:
            if not np.all(np.isfinite(times)) or np.any(times <= 0):
                bad("UnsortedArrivals", f"TX{tx.id}: arrival times must be finite and > 0")
            if np.any(np.diff(times) <= 0):
                bad("UnsortedArrivals", f"TX{tx.id}: arrival times must strictly increase")
            if not np.all(np.isfinite(amounts)) or np.any(amounts <= 0):
                bad("NonPositiveArrival", f"TX{tx.id}: arrival amounts must be > 0")

    for rx in rxs:
        if not np.isfinite(rx.bits) or rx.bits <= 0:
            bad("NonPositiveDemand", f"RX{rx.id}: demand must be > 0 bits, got {rx.bits}")

    if not (ch.bandwidth_hz > 0 and np.isfinite(ch.bandwidth_hz)):
        bad("BadChannel", "bandwidth_hz must be > 0")
    gain, psd = ch.gain_matrix, ch.psd_matrix
    shape = (len(txs), len(rxs))
    if gain.shape != shape or psd.shape != shape:
        bad("BadChannel", f"channel matrices must be {shape[0]}x{shape[1]}")
        return out
    if np.any(gain <= 0) or np.any(psd <= 0):
        bad("BadChannel", "path gains and noise PSDs must be > 0")
        return out

    nu = ch.equivalent_noise_mw()
    spread = np.ptp(nu, axis=0) / np.min(nu, axis=0)
    for n in np.flatnonzero(spread > NOISE_RTOL):
        bad(
            "NonUniformChannel",
            f"RX{rxs[n].id}: equivalent noise differs across transmitters "
            f"({', '.join(f'{v:.6g}' for v in nu[:, n])} mW)",
        )
    return out


def validate(scenario: Scenario) -> Scenario:
    """Return ``scenario`` unchanged, or raise ValidationError listing all problems."""
    problems = check(scenario)
    if problems:
        raise ValidationError(problems)
    return scenario


def merge_arrivals(scenario: Scenario) -> Timeline:
    """Merge every transmitter's arrivals into one chronological stream.

    Entry 0 holds the summed initial energies at t = 0; arrivals sharing an
    instant are summed into one entry.
    """
    times = [np.zeros(1)]
    amounts = [np.array([sum(tx.initial_energy_mj for tx in scenario.transmitters)])]
    for tx in scenario.transmitters:
        times.append(tx.arrival_times)
        amounts.append(tx.arrival_amounts)
    t = np.concatenate(times)
    e = np.concatenate(amounts)
    uniq, inverse = np.unique(t, return_inverse=True)
    summed = np.bincount(inverse, weights=e, minlength=uniq.size)
    return Timeline(uniq, summed)


def _freeze(a: np.ndarray) -> tuple:
    return tuple(tuple(float(x) for x in row) for row in np.atleast_2d(a))
