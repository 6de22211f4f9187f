"""Seeded generation of random harvesting scenarios.

Each transmitter draws i.i.d. exponential gaps (``mean_gap_s`` is the MEAN
gap, not a rate) and i.i.d. uniform amounts on ``(0, amount_max_mj]``.
Streams are a pure function of ``(master_seed, run_index, transmitter id)``
and are drawn in fixed-size blocks, so asking for a longer horizon only
appends arrivals and never changes the ones already produced.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Union

import numpy as np

from .model import ChannelSpec, ReceiverDemand, Scenario, TransmitterProfile

__all__ = ["TransmitterGen", "GenParams", "generate", "extend", "truncate", "baseline_params"]

_BLOCK = 512
# stream labels inside one transmitter's seed sequence
_GAPS, _AMOUNTS, _INITIAL = 0, 1, 2


@dataclass(frozen=True)
class TransmitterGen:
    id: int
    mean_gap_s: float
    amount_max_mj: float
    # "draw": one uniform draw at t = 0; "zero"; or a fixed number of mJ
    initial_energy: Union[str, float] = "draw"

    def __post_init__(self):
        if not self.mean_gap_s > 0:
            raise ValueError(f"TX{self.id}: mean_gap_s must be > 0")
        if not self.amount_max_mj > 0:
            raise ValueError(f"TX{self.id}: amount_max_mj must be > 0")
        if isinstance(self.initial_energy, str) and self.initial_energy not in ("draw", "zero"):
            raise ValueError(f"TX{self.id}: initial_energy must be 'draw', 'zero' or a number")


@dataclass(frozen=True)
class GenParams:
    transmitters: tuple
    demands_bits: tuple
    bandwidth_hz: float
    path_loss_db: tuple
    noise_psd: tuple
    master_seed: int = 0
    receiver_ids: tuple = field(default=())

    def channel(self) -> ChannelSpec:
        return ChannelSpec.from_db(self.bandwidth_hz, self.path_loss_db, self.noise_psd)

    def with_demands(self, bits) -> "GenParams":
        return replace(self, demands_bits=tuple(float(b) for b in bits))

    def with_seed(self, seed: int) -> "GenParams":
        return replace(self, master_seed=int(seed))

    def rx_ids(self) -> tuple:
        return self.receiver_ids or tuple(range(1, len(self.demands_bits) + 1))

    @classmethod
    def from_dict(cls, d: dict) -> "GenParams":
        txs = tuple(
            TransmitterGen(int(t["id"]), float(t["mean_gap_s"]), float(t["amount_max_mj"]),
                           t.get("initial_energy", "draw"))
            for t in d["transmitters"]
        )
        rxs = d["receivers"]
        ch = d["channel"]
        return cls(
            transmitters=txs,
            demands_bits=tuple(float(r["bits"]) for r in rxs),
            bandwidth_hz=float(d["bandwidth_hz"]),
            path_loss_db=tuple(tuple(float(x) for x in row) for row in ch["path_loss_db"]),
            noise_psd=tuple(tuple(float(x) for x in row) for row in ch["noise_psd"]),
            master_seed=int(d.get("master_seed", 0)),
            receiver_ids=tuple(int(r["id"]) for r in rxs),
        )

    def to_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "bandwidth_hz": self.bandwidth_hz,
            "transmitters": [
                {"id": t.id, "mean_gap_s": t.mean_gap_s, "amount_max_mj": t.amount_max_mj,
                 "initial_energy": t.initial_energy}
                for t in self.transmitters
            ],
            "receivers": [{"id": i, "bits": b} for i, b in zip(self.rx_ids(), self.demands_bits)],
            "channel": {"path_loss_db": [list(r) for r in self.path_loss_db],
                        "noise_psd": [list(r) for r in self.noise_psd]},
        }

    @classmethod
    def load(cls, path) -> "GenParams":
        return cls.from_dict(json.loads(Path(path).read_text()))


def baseline_params(demands_bits=(15e6, 10e6, 7e6), master_seed: int = 0,
                    initial_energy: Union[str, float] = "draw") -> GenParams:
    """Three transmitters, three receivers, 1 MHz, 100/101/102 dB, 1e-19 W/Hz.

    Mean gaps are 0.01/0.1/1 s and amounts are uniform up to 10/20/30 mJ.
    With a 1 mW equivalent noise on the strongest receiver these magnitudes
    give completion times of a few seconds for Mbit-scale demands.
    """
    gens = (
        TransmitterGen(1, 0.01, 10.0, initial_energy),
        TransmitterGen(2, 0.1, 20.0, initial_energy),
        TransmitterGen(3, 1.0, 30.0, initial_energy),
    )
    loss = tuple((100.0, 101.0, 102.0) for _ in gens)
    psd = tuple((1e-19,) * 3 for _ in gens)
    return GenParams(gens, tuple(float(b) for b in demands_bits), 1e6, loss, psd, master_seed, (1, 2, 3))


def _streams(params: GenParams, run_index: int, tx_id: int):
    seq = np.random.SeedSequence(entropy=params.master_seed, spawn_key=(run_index, tx_id))
    return [np.random.Generator(np.random.PCG64(s)) for s in seq.spawn(3)]


def _transmitter(params: GenParams, gen: TransmitterGen, run_index: int, horizon: float):
    rngs = _streams(params, run_index, gen.id)
    times, amounts = [], []
    clock = 0.0
    while clock < horizon:
        gaps = rngs[_GAPS].exponential(gen.mean_gap_s, _BLOCK)
        # 1 - U lies in (0, 1]: amounts are strictly positive
        amt = gen.amount_max_mj * (1.0 - rngs[_AMOUNTS].random(_BLOCK))
        t = clock + np.cumsum(gaps)
        times.append(t)
        amounts.append(amt)
        clock = float(t[-1])
    t = np.concatenate(times) if times else np.zeros(0)
    e = np.concatenate(amounts) if amounts else np.zeros(0)
    keep = t < horizon
    if gen.initial_energy == "draw":
        e0 = gen.amount_max_mj * (1.0 - rngs[_INITIAL].random())
    elif gen.initial_energy == "zero":
        e0 = 0.0
    else:
        e0 = float(gen.initial_energy)
    return TransmitterProfile.from_pairs(gen.id, e0, zip(t[keep], e[keep]))


def generate(params: GenParams, run_index: int, horizon_s: float) -> Scenario:
    """Scenario for run ``run_index`` with every arrival before ``horizon_s``."""
    if not horizon_s > 0:
        raise ValueError("horizon_s must be positive")
    txs = tuple(_transmitter(params, g, run_index, horizon_s) for g in params.transmitters)
    rxs = tuple(ReceiverDemand(i, b) for i, b in zip(params.rx_ids(), params.demands_bits))
    return Scenario(txs, rxs, params.channel(), horizon_s=float(horizon_s),
                    origin=(params, int(run_index)))


def extend(scenario: Scenario, new_horizon: float) -> Scenario:
    """Same streams, known up to ``new_horizon``."""
    if scenario.origin is None:
        raise ValueError("scenario was not produced by generate()")
    if scenario.horizon_s is not None and new_horizon < scenario.horizon_s:
        raise ValueError("new_horizon must not shrink the scenario")
    if new_horizon == scenario.horizon_s:
        return scenario
    params, run = scenario.origin
    return generate(params, run, new_horizon).with_demands(scenario.demands)


def truncate(scenario: Scenario, horizon: float) -> Scenario:
    """View of ``scenario`` keeping only arrivals before ``horizon``."""
    txs = tuple(
        TransmitterProfile(t.id, t.initial_energy_mj, tuple(a for a in t.arrivals if a.time_s < horizon))
        for t in scenario.transmitters
    )
    return Scenario(txs, scenario.receivers, scenario.channel, horizon_s=float(horizon),
                    origin=scenario.origin)
