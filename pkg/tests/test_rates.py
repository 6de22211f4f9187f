import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ehbroadcast.rates import cutoff_split, order_receivers, rates_of_split, split_from_leading_rate
from ehbroadcast.scenarios import generate, baseline_params

from conftest import make_scenario


def test_baseline_ladder():
    ladder = order_receivers(generate(baseline_params(), 0, 1.0))
    np.testing.assert_allclose(ladder.noise_mw, [1.0, 1.2589254117941673, 1.5848931924611136], rtol=1e-12)
    assert ladder.receiver_ids == (1, 2, 3)


def test_ladder_ties_by_id_and_sorting():
    assert order_receivers(make_scenario([(1.0, [])], [1, 1, 1])).receiver_ids == (1, 2, 3)
    ladder = order_receivers(make_scenario([(1.0, [])], [1, 1], noise_mw=[2.0, 1.0]))
    assert ladder.receiver_ids == (2, 1)
    np.testing.assert_array_equal(ladder.to_ladder([10.0, 20.0]), [20.0, 10.0])
    np.testing.assert_array_equal(ladder.to_scenario([20.0, 10.0]), [10.0, 20.0])


def test_rates_examples():
    np.testing.assert_allclose(rates_of_split([1, 0, 0], [1, 1, 1], 1e6), [1e6, 0, 0])
    np.testing.assert_allclose(rates_of_split([1, 2], [1, 1], 1e6), [1e6, 1e6], rtol=1e-14)


def test_rates_baseline_cutoff_split():
    nu = [1.0, 10 ** 0.1, 10 ** 0.2]
    p = [0.0888, 0.2354, 0.1470]
    expected = [
        1e6 * math.log2(1 + 0.0888 / nu[0]),
        1e6 * math.log2(1 + 0.2354 / (0.0888 + nu[1])),
        1e6 * math.log2(1 + 0.1470 / (0.0888 + 0.2354 + nu[2])),
    ]
    np.testing.assert_allclose(rates_of_split(p, nu, 1e6), expected, rtol=1e-12)
    np.testing.assert_allclose(expected, [122738.97195, 232248.95825, 107018.12652], rtol=1e-9)


def test_split_from_leading_rate_examples():
    np.testing.assert_array_equal(split_from_leading_rate(0.0, [1, 1, 1], [1, 2, 3], 1e6), [0, 0, 0])
    np.testing.assert_allclose(split_from_leading_rate(1e6, [1, 1], [1, 1], 1e6), [1.0, 2.0], rtol=1e-14)
    np.testing.assert_allclose(split_from_leading_rate(1e6, [1], [1], 1e6), [1.0], rtol=1e-14)


def test_cutoff_split_examples():
    pc = [0.0888, 0.2354]
    np.testing.assert_allclose(cutoff_split(0.05, pc), [0.05, 0, 0])
    np.testing.assert_allclose(cutoff_split(0.4712, pc), [0.0888, 0.2354, 0.1470], atol=1e-15)
    np.testing.assert_allclose(cutoff_split(0.2, pc), [0.0888, 0.1112, 0.0], atol=1e-15)


splits = st.lists(st.one_of(st.just(0.0), st.floats(1e-6, 100.0)), min_size=1, max_size=5)


@given(splits, st.floats(0.01, 10.0))
@settings(max_examples=100, deadline=None)
def test_sum_rate_telescopes_under_equal_noise(p, nu):
    r = rates_of_split(p, [nu] * len(p), 1e6)
    assert math.isclose(r.sum(), 1e6 * math.log2(1 + sum(p) / nu), rel_tol=1e-9, abs_tol=1e-6)


@given(splits.filter(lambda p: sum(p) > 0), st.lists(st.floats(0.01, 10.0), min_size=5, max_size=5))
@settings(max_examples=100, deadline=None)
def test_split_rate_round_trip(p, noises):
    nu = np.sort(noises[: len(p)])
    r = rates_of_split(p, nu, 1e6)
    lead = int(np.flatnonzero(r > 0)[0]) if np.any(r > 0) else 0
    # rates as multiples of the first positive one
    ratios = r / r[lead]
    back = split_from_leading_rate(r[lead], ratios, nu, 1e6)
    np.testing.assert_allclose(back, p, rtol=1e-9, atol=1e-12)


@given(splits, st.integers(0, 4), st.floats(0.0, 5.0))
@settings(max_examples=100, deadline=None)
def test_rate_monotone_in_own_power(p, k, bump):
    k = k % len(p)
    nu = np.linspace(1.0, 2.0, len(p))
    before = rates_of_split(p, nu, 1e6)[k]
    q = list(p)
    q[k] += bump
    assert rates_of_split(q, nu, 1e6)[k] >= before


@given(st.floats(0.0, 10.0), st.lists(st.floats(0.001, 5.0), min_size=1, max_size=4))
@settings(max_examples=100, deadline=None)
def test_cutoff_split_sums_and_caps(total, pc):
    s = cutoff_split(total, pc)
    assert math.isclose(s.sum(), total, rel_tol=1e-12, abs_tol=1e-12)
    assert np.all(s[:-1] <= np.asarray(pc) + 1e-15)
    assert np.all(s >= 0)
