"""Test-support oracles (not part of the CLI)."""

from .oracles import (
    GridTooCoarse,
    OracleConfig,
    oracle_cutoff_two_rx,
    oracle_min_time_single_rx,
    random_feasible_schedules,
    single_rx_bits,
)
