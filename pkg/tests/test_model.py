import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ehbroadcast.model import (
    ChannelSpec,
    ReceiverDemand,
    Scenario,
    TransmitterProfile,
    ValidationError,
    check,
    db_to_gain,
    merge_arrivals,
    validate,
)
from ehbroadcast.scenarios import generate, baseline_params

from conftest import make_scenario


def test_baseline_setting_is_valid():
    sc = generate(baseline_params(), 0, 5.0)
    assert validate(sc) is sc


def test_zero_demand_rejected():
    sc = make_scenario([(1.0, [])], [1e6, 0.0])
    with pytest.raises(ValidationError) as err:
        validate(sc)
    assert err.value.codes == ["NonPositiveDemand"]


def test_non_uniform_channel_rejected():
    ch = ChannelSpec.from_db(1e6, [[100.0], [101.0]], [[1e-19], [1e-19]])
    sc = Scenario(
        (TransmitterProfile(1, 1.0), TransmitterProfile(2, 1.0)),
        (ReceiverDemand(1, 10.0),),
        ch,
    )
    assert [v.code for v in check(sc)] == ["NonUniformChannel"]


def test_unsorted_arrivals_and_all_violations_listed():
    sc = make_scenario([(1.0, [(2.0, 1.0), (1.0, 1.0)])], [0.0])
    codes = set(check(sc))
    assert {v.code for v in codes} == {"UnsortedArrivals", "NonPositiveDemand"}


def test_db_conversion_baseline_noises():
    # 1e-19 W/Hz * 1 MHz through 100/101/102 dB -> 1e-3, 10^-2.9, 10^-2.8 W
    ch = ChannelSpec.from_db(1e6, [[100.0, 101.0, 102.0]], [[1e-19] * 3])
    np.testing.assert_allclose(ch.equivalent_noise_mw()[0], [1.0, 10 ** 0.1, 10 ** 0.2], rtol=1e-12)
    assert db_to_gain(10.0) == pytest.approx(0.1)


def test_merge_example():
    sc = make_scenario([(1.0, [(2.0, 2.0)]), (0.5, [(1.0, 3.0)])], [1.0])
    tl = merge_arrivals(sc)
    np.testing.assert_array_equal(tl.times, [0.0, 1.0, 2.0])
    np.testing.assert_array_equal(tl.amounts, [1.5, 3.0, 2.0])


def test_merge_single_transmitter_is_identity():
    sc = make_scenario([(0.7, [(1.0, 1.0), (3.0, 2.0)])], [1.0])
    tl = merge_arrivals(sc)
    np.testing.assert_array_equal(tl.times, [0.0, 1.0, 3.0])
    np.testing.assert_array_equal(tl.amounts, [0.7, 1.0, 2.0])


def test_merge_simultaneous_arrivals():
    sc = make_scenario([(0.0, [(1.0, 1.0)]), (0.0, [(1.0, 2.0)])], [1.0])
    tl = merge_arrivals(sc)
    np.testing.assert_array_equal(tl.times, [0.0, 1.0])
    np.testing.assert_array_equal(tl.amounts, [0.0, 3.0])


arrival_lists = st.lists(
    st.tuples(st.floats(0.01, 50.0), st.floats(0.001, 10.0)), max_size=8,
).map(lambda xs: sorted({round(t, 2): e for t, e in xs}.items()))


@given(st.lists(st.tuples(st.floats(0.0, 5.0), arrival_lists), min_size=1, max_size=4))
@settings(max_examples=60, deadline=None)
def test_merge_conserves_energy_and_is_order_invariant(txs):
    sc = make_scenario(txs, [1.0])
    tl = merge_arrivals(sc)
    total = sum(e0 for e0, _ in txs) + sum(e for _, arr in txs for _, e in arr)
    assert abs(tl.total_energy - total) <= 1e-12 * max(1.0, total)
    assert tl.times[0] == 0.0
    assert np.all(np.diff(tl.times) > 0)
    for perm in itertools.islice(itertools.permutations(txs), 6):
        other = merge_arrivals(make_scenario(list(perm), [1.0]))
        np.testing.assert_array_equal(other.times, tl.times)
        np.testing.assert_allclose(other.amounts, tl.amounts, rtol=0, atol=1e-12)
