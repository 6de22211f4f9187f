"""Scenario files (JSON) and CSV writers.

Scenario document::

    {
      "bandwidth_hz": 1e6,
      "horizon_s": null,                       # optional
      "transmitters": [{"id": 1, "initial_energy_mj": 1.0,
                        "arrivals": [[t_s, e_mj], ...]}, ...],
      "receivers": [{"id": 1, "bits": 1e6}, ...],
      "channel": {"path_loss_db": [[...per rx...], ...per tx...],
                  "noise_psd": [[...W/Hz...], ...]}
    }
"""

from __future__ import annotations

import json
from pathlib import Path

from .model import ChannelSpec, ReceiverDemand, Scenario, TransmitterProfile, gain_to_db

__all__ = ["ScenarioFormatError", "scenario_from_dict", "scenario_to_dict", "load_scenario",
           "save_scenario", "staircase_csv"]


class ScenarioFormatError(ValueError):
    pass


def _get(d, key, where):
    if not isinstance(d, dict):
        raise ScenarioFormatError(f"{where}: expected an object")
    if key not in d:
        raise ScenarioFormatError(f"{where}.{key}: missing field" if where else f"{key}: missing field")
    return d[key]


def _num(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioFormatError(f"{where}: expected a number, got {v!r}")
    return float(v)


def _matrix(v, where):
    if not isinstance(v, list) or not all(isinstance(r, list) for r in v):
        raise ScenarioFormatError(f"{where}: expected a list of lists")
    return [[_num(x, f"{where}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(v)]


def scenario_from_dict(d: dict) -> Scenario:
    bw = _num(_get(d, "bandwidth_hz", ""), "bandwidth_hz")
    txs = []
    for i, t in enumerate(_get(d, "transmitters", "")):
        where = f"transmitters[{i}]"
        pairs = []
        for j, a in enumerate(_get(t, "arrivals", where)):
            if not isinstance(a, list) or len(a) != 2:
                raise ScenarioFormatError(f"{where}.arrivals[{j}]: expected [t_s, e_mj]")
            pairs.append((_num(a[0], f"{where}.arrivals[{j}][0]"), _num(a[1], f"{where}.arrivals[{j}][1]")))
        txs.append(TransmitterProfile.from_pairs(
            int(_num(_get(t, "id", where), f"{where}.id")),
            _num(_get(t, "initial_energy_mj", where), f"{where}.initial_energy_mj"),
            pairs,
        ))
    rxs = []
    for i, r in enumerate(_get(d, "receivers", "")):
        where = f"receivers[{i}]"
        rxs.append(ReceiverDemand(int(_num(_get(r, "id", where), f"{where}.id")),
                                  _num(_get(r, "bits", where), f"{where}.bits")))
    ch = _get(d, "channel", "")
    loss = _matrix(_get(ch, "path_loss_db", "channel"), "channel.path_loss_db")
    psd = _matrix(_get(ch, "noise_psd", "channel"), "channel.noise_psd")
    horizon = d.get("horizon_s")
    return Scenario(tuple(txs), tuple(rxs), ChannelSpec.from_db(bw, loss, psd),
                    horizon_s=None if horizon is None else _num(horizon, "horizon_s"))


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "bandwidth_hz": s.channel.bandwidth_hz,
        "horizon_s": s.horizon_s,
        "transmitters": [
            {"id": t.id, "initial_energy_mj": t.initial_energy_mj,
             "arrivals": [[a.time_s, a.amount_mj] for a in t.arrivals]}
            for t in s.transmitters
        ],
        "receivers": [{"id": r.id, "bits": r.bits} for r in s.receivers],
        "channel": {
            "path_loss_db": gain_to_db(s.channel.gain_matrix).tolist(),
            "noise_psd": s.channel.psd_matrix.tolist(),
        },
    }


def load_scenario(path) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return scenario_from_dict(doc)
    except ScenarioFormatError as exc:
        raise ScenarioFormatError(f"{path}: {exc}") from exc


def save_scenario(s: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=1) + "\n")


def staircase_csv(stairs) -> str:
    lines = ["breakpoint_s,level_mw"]
    for a, _, level in stairs.epochs():
        lines.append(f"{a!r},{level!r}")
    lines.append(f"{stairs.end!r},")
    return "\n".join(lines) + "\n"
