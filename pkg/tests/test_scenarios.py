import numpy as np
import pytest
from scipy import stats

from ehbroadcast.io import scenario_to_dict
from ehbroadcast.scenarios import GenParams, TransmitterGen, extend, generate, baseline_params, truncate


def as_dict(sc):
    return scenario_to_dict(sc)


def test_deterministic():
    p = baseline_params()
    assert as_dict(generate(p, 3, 5.0)) == as_dict(generate(p, 3, 5.0))
    assert as_dict(generate(p, 3, 5.0)) != as_dict(generate(p, 4, 5.0))
    assert as_dict(generate(p, 3, 5.0)) != as_dict(generate(p.with_seed(1), 3, 5.0))


def test_arrival_count_near_expectation():
    h = 10.79
    counts = [sum(len(t.arrivals) for t in generate(baseline_params(), r, h).transmitters) for r in range(20)]
    expected = h * (100 + 10 + 1)
    sigma = np.sqrt(expected / len(counts))
    assert abs(np.mean(counts) - expected) <= 3 * sigma
    assert abs(expected - 1198) < 1


def test_gap_mean_and_distribution():
    gen = TransmitterGen(1, 0.1, 20.0, "zero")
    p = GenParams((gen,), (1e6,), 1e6, ((100.0,),), ((1e-19,),), 7)
    sc = generate(p, 0, 1100.0)
    gaps = np.diff(np.concatenate(([0.0], sc.transmitters[0].arrival_times)))[:10000]
    assert len(gaps) == 10000
    assert abs(gaps.mean() - 0.1) <= 0.003
    assert stats.kstest(gaps, "expon", args=(0, 0.1)).pvalue > 1e-3
    amounts = sc.transmitters[0].arrival_amounts[:10000]
    assert amounts.min() > 0 and amounts.max() <= 20.0
    assert stats.kstest(amounts, "uniform", args=(0, 20.0)).pvalue > 1e-3


def test_extend_and_truncate():
    p = baseline_params()
    short = generate(p, 2, 3.0)
    assert extend(short, 3.0) is short
    longer = extend(short, 9.0)
    assert as_dict(truncate(longer, 3.0)) == as_dict(short)
    assert as_dict(extend(extend(short, 6.0), 9.0)) == as_dict(longer)
    with pytest.raises(ValueError):
        extend(longer, 1.0)


def test_initial_energy_modes():
    assert generate(baseline_params(initial_energy="zero"), 0, 1.0).transmitters[0].initial_energy_mj == 0
    assert generate(baseline_params(initial_energy=2.5), 0, 1.0).transmitters[2].initial_energy_mj == 2.5
    e0 = generate(baseline_params(), 0, 1.0).transmitters[1].initial_energy_mj
    assert 0 < e0 <= 20.0


def test_params_round_trip(tmp_path):
    p = baseline_params(master_seed=11)
    path = tmp_path / "p.json"
    import json
    path.write_text(json.dumps(p.to_dict()))
    assert GenParams.load(path) == p
