import itertools

import numpy as np
import pytest

from ehbroadcast.optimal import PowerStaircase
from ehbroadcast.switching import (
    EnergyMinimum,
    EngineState,
    FixedOrder,
    Proposed,
    ScheduleGap,
    Stochastic,
    choose_next,
    classify_full,
    count_switches,
    policy_from_name,
    simulate_switching,
)

from conftest import make_scenario


def flat(level, end):
    return PowerStaircase(np.array([0.0, end]), np.array([level]))


def state(batteries, arrivals=None, deadline=100.0, worker=None):
    arrivals = arrivals or [[] for _ in batteries]
    return EngineState(0.0, tuple(range(1, len(batteries) + 1)), np.array(batteries, float),
                       arrivals, deadline, worker)


def test_classify_full():
    assert classify_full([3, 7, 12], 8, 10)
    assert not classify_full([3, 7, 12], 5, 10)
    assert classify_full([], 0, 10)


def test_choose_next_rules():
    assert choose_next(Proposed(), state([5, 3, 4], [[50.0]] * 3)) == 0
    assert choose_next(EnergyMinimum(), state([5, 3, 4])) == 1
    assert choose_next(FixedOrder((1, 2, 3)), state([5, 0, 4], worker=0)) == 2
    assert choose_next(Proposed(), state([0, 0])) is None
    rng = np.random.default_rng(0)
    picks = {choose_next(Stochastic(), state([1, 1, 1], worker=1), rng) for _ in range(50)}
    assert picks == {0, 2}


def test_proposed_prefers_full_transmitter():
    # TX2 is full with 2 mJ, TX3 holds 1 mJ and gets 1 mJ more at 2.5 s
    sc = make_scenario([(0.0, []), (2.0, []), (1.0, [(2.5, 1.0)])], [1.0])
    st = EngineState(0.0, (1, 2, 3), np.array([0.0, 2.0, 1.0]), [[], [], [2.5]], 4.0)
    assert choose_next(Proposed(), st) == 1
    full_first = simulate_switching(sc, flat(1.0, 4.0), 4.0, Proposed())
    partial_first = simulate_switching(sc, flat(1.0, 4.0), 4.0, FixedOrder((3, 2, 1)))
    assert full_first.switch_count == 1
    assert partial_first.switch_count == 2
    assert full_first.working_time() == pytest.approx(4.0)


def test_single_transmitter_never_switches():
    sc = make_scenario([(1.0, [(1.0, 1.0), (2.0, 1.0)])], [1.0])
    for pol in (Proposed(), EnergyMinimum(), FixedOrder((1,)), Stochastic(3)):
        assert simulate_switching(sc, flat(1.0, 3.0), 3.0, pol).switch_count == 0


@pytest.mark.parametrize("energies", [(1.0, 2.0, 0.5), (1.0, 0.0, 3.0), (2.0, 2.0)])
def test_initial_only_switches_k_minus_one(energies):
    sc = make_scenario([(e, []) for e in energies], [1.0])
    total = sum(energies)
    k = sum(e > 0 for e in energies)
    ids = tuple(range(1, len(energies) + 1))
    for perm in itertools.permutations(ids):
        log = simulate_switching(sc, flat(1.0, total), total, Proposed(full_preference=perm))
        assert log.switch_count == k - 1


def test_count_switches():
    assert count_switches([1, 2, 1]) == 2
    assert count_switches([1, None, 1]) == 0
    assert count_switches([]) == 0


def test_idle_resume_not_a_switch():
    # TX1 empties at 1 s, the level drops to zero until 2 s, then TX1 recharges
    sc = make_scenario([(1.0, [(2.0, 1.0)])], [1.0])
    sched = PowerStaircase(np.array([0.0, 1.0, 2.0, 3.0]), np.array([1.0, 0.0, 1.0]))
    log = simulate_switching(sc, sched, 3.0, Proposed())
    assert log.switch_count == 0
    assert log.working_time() == pytest.approx(2.0)
    assert [w for w, _, _ in log.segments] == [1, None, 1]


def test_schedule_gap_detected():
    sc = make_scenario([(1.0, [])], [1.0])
    with pytest.raises(ScheduleGap):
        simulate_switching(sc, flat(1.0, 3.0), 3.0, Proposed())


def test_policy_names():
    assert policy_from_name("fo132") == FixedOrder((1, 3, 2))
    assert policy_from_name("fo:2,1") == FixedOrder((2, 1))
    assert isinstance(policy_from_name("em"), EnergyMinimum)
    assert policy_from_name("ss", seed=4) == Stochastic(4)
    with pytest.raises(ValueError):
        policy_from_name("xyz")


def test_switch_csv():
    sc = make_scenario([(1.0, []), (1.0, [])], [1.0])
    text = simulate_switching(sc, flat(1.0, 2.0), 2.0, Proposed()).to_csv()
    assert text.splitlines()[0] == "worker_id,start_s,end_s"
    assert len(text.splitlines()) == 3
