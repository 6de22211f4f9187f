import math

import pytest

from ehbroadcast import bench
from ehbroadcast.model import ValidationError
from ehbroadcast.scenarios import GenParams, TransmitterGen, baseline_params


def test_report_statistics():
    r = bench.BenchmarkReport.from_samples("x", [1.0, 2.0, 3.0], 5)
    assert r.mean == 2.0 and r.stddev == 1.0
    assert r.stderr == pytest.approx(1 / math.sqrt(3))
    single = bench.BenchmarkReport.from_samples("x", [4.0], 5)
    assert single.stddev == 0.0 and single.runs == 1


def test_single_run_deterministic():
    p = baseline_params()
    a = bench.reports_csv(bench.run_table1(p, 1, 9))
    assert a == bench.reports_csv(bench.run_table1(p, 1, 9))
    assert a.splitlines()[1].endswith(",0.0,0.0,9")
    assert a.splitlines()[1].split(",")[1] == "1"


def test_every_policy_no_faster_than_optimal():
    rec = bench.evaluate_allocations(baseline_params(), 0)
    for pol in ("ep", "dr", "rdr", "proposed"):
        assert rec[pol] >= rec["optimal"] * (1 - 1e-9)


def test_zero_multiple_rejected():
    with pytest.raises(ValidationError):
        bench.sweep_bits(baseline_params(), [0, 1], 1, 0)


def test_single_transmitter_never_switches():
    gen = TransmitterGen(1, 0.05, 10.0)
    p = GenParams((gen,), (15e6, 10e6, 7e6), 1e6, ((100.0, 101.0, 102.0),), ((1e-19,) * 3,), 0)
    for rep in bench.run_table2(p, 3, 0):
        assert rep.mean == 0.0
    assert [r.policy for r in bench.run_table2(p, 1, 0)] == ["Proposed", "EM", "FO", "SS"]


def test_table2_policy_names():
    assert list(bench.table2_policies((1, 2, 3))) == ["Proposed", "EM", "FO123", "FO132", "SS"]


def test_parallel_matches_serial():
    p = baseline_params()
    assert bench.table1_runs(p, 6, 2, jobs=1) == bench.table1_runs(p, 6, 2, jobs=2)
