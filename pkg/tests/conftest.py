import numpy as np
import pytest
from hypothesis import settings

from ehbroadcast.model import ChannelSpec, ReceiverDemand, Scenario, TransmitterProfile

# path loss / PSD pair giving an equivalent noise of exactly 1 mW at 1 MHz
UNIT_LOSS_DB = 90.0
UNIT_PSD = 1e-18

settings.register_profile("repro", derandomize=True)
settings.load_profile("repro")

ACCEPTANCE_LINES = []


def make_scenario(transmitters, demands, noise_mw=None, bandwidth=1e6):
    """Build a scenario from ``[(initial_mj, [(t, e), ...]), ...]``.

    ``noise_mw`` gives each receiver's equivalent noise (default 1 mW),
    identical for every transmitter.
    """
    n = len(demands)
    noise_mw = [1.0] * n if noise_mw is None else list(noise_mw)
    txs = tuple(TransmitterProfile.from_pairs(i + 1, e0, arr) for i, (e0, arr) in enumerate(transmitters))
    rxs = tuple(ReceiverDemand(j + 1, b) for j, b in enumerate(demands))
    loss = [[UNIT_LOSS_DB] * n for _ in txs]
    psd = [[UNIT_PSD * nu for nu in noise_mw] for _ in txs]
    return Scenario(txs, rxs, ChannelSpec.from_db(bandwidth, loss, psd))


@pytest.fixture
def scenario_factory():
    return make_scenario


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
