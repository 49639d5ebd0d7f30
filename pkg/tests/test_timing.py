import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oracle_lab import timing as tim
from oracle_lab.errors import ContractError
from oracle_lab.signal import DataValue


def vals(*epochs):
    return [DataValue(0, e) for e in epochs]


def test_wait_space_slots():
    space = tim.WaitStrategySpace(1.0, 10)
    assert np.allclose(space.slots, np.arange(1, 11) / 10)
    with pytest.raises(ContractError):
        tim.WaitStrategySpace(1.0, 0)


def test_choose_wait_uniform():
    t = tim.init_timing_beliefs(3, 2, 10)
    assert t.shape == (3, 2, 10) and np.all(t == 0.1)
    slot, wait = tim.choose_wait(t, 0, 0, tim.WaitStrategySpace(0.8, 10))
    assert slot == 0 and wait == pytest.approx(0.08)


def test_choose_wait_hand_example():
    t = np.zeros((3, 1, 2))
    t[1, 0] = [0.2, 0.8]
    t[2, 0] = [0.4, 0.6]
    t[0, 0] = [9.0, 0.0]  # own row ignored
    assert tim.choose_wait(t, 0, 0, tim.WaitStrategySpace(1.0, 2)) == (1, 1.0)


def test_choose_wait_mismatch():
    with pytest.raises(ContractError):
        tim.choose_wait(np.zeros((3, 2, 4)), 0, 0, tim.WaitStrategySpace(1.0, 5))
    with pytest.raises(ContractError):
        tim.choose_wait(np.zeros((3, 2, 5)), 2, 0, tim.WaitStrategySpace(1.0, 5))


def test_choose_waits_matches_scalar(rng):
    t = rng.normal(size=(5, 4, 6))
    space = tim.WaitStrategySpace(0.7, 6)
    slots, waits = tim.choose_waits(t, 2, space)
    for j in range(4):
        assert (slots[j], waits[j]) == pytest.approx(tim.choose_wait(t, j, 2, space))


def test_update_consensus_reinforces_own_slot():
    n, m, k = 4, 2, 3
    t0 = tim.init_timing_beliefs(n, m, k)
    data = vals(7, 8)
    reps = vals(7, 7, 7, 7)
    t1 = tim.timopt_update(t0, [2, 0], data, reps, DataValue(0, 7), t=3, own_index=0)
    diff = t1 - t0
    assert np.allclose(diff[1:, 0, 2], 1.0)
    diff[1:, 0, 2] = 0
    assert np.all(diff == 0)


def test_adjustment_second_branch():
    reps = vals(*([4] * 7)) + vals(*range(100, 114))
    adj = tim.timing_adjustment(reps, None, 11)
    assert adj[0] == pytest.approx(-4 / 11)
    assert adj[10] == pytest.approx((1 - 11) / 11)


def test_update_negative_allowed():
    reps = vals(*([4] * 7)) + vals(*range(100, 114))
    t0 = tim.init_timing_beliefs(21, 1, 2)
    t1 = tim.timopt_update(t0, [1], vals(4), reps, None, 11, own_index=20)
    assert np.allclose(t1[:7, 0, 1], 0.5 - 4 / 11)
    assert np.allclose(t1[7:, 0, :], 0.5)


def test_update_no_match_unchanged():
    t0 = tim.init_timing_beliefs(3, 2, 4)
    t1 = tim.timopt_update(t0, [0, 1], vals(1, 2), vals(5, 6, 7), None, 2, 0)
    assert np.array_equal(t0, t1)


def test_update_length_mismatch():
    with pytest.raises(ContractError):
        tim.timopt_update(tim.init_timing_beliefs(3, 2, 4), [0], vals(1, 2), vals(1, 1, 1), None, 2, 0)


def test_update_omega():
    s = tim.update_omega(tim.RunningLatencyStats(), 0.5)
    assert s == tim.RunningLatencyStats(1, 0.5)
    assert tim.update_omega(s, 0.7).mean == pytest.approx(0.6)
    for _ in range(2000):
        s = tim.update_omega(s, 0.0)
    assert s.mean < 1e-3
    with pytest.raises(ContractError):
        tim.update_omega(s, -0.1)


@given(st.lists(st.integers(0, 8), min_size=21, max_size=21), st.booleans())
def test_adjustment_bounded_for_21_of_11(epochs, with_star):
    reps = vals(*epochs)
    star = reps[0] if with_star else None
    adj = tim.timing_adjustment(reps, star, 11)
    assert np.all(adj >= -1) and np.all(adj <= 1)


@given(hnp.arrays(float, (3, 2, 4), elements=st.floats(-50, 50, allow_nan=False)),
       st.sampled_from([2.0 ** e for e in range(-6, 7)]), st.integers(0, 1))
def test_choose_wait_scale_invariant(t, c, j):
    space = tim.WaitStrategySpace(1.0, 4)
    slot, wait = tim.choose_wait(t, j, 0, space)
    assert tim.choose_wait(t * c, j, 0, space)[0] == slot
    assert 0 < wait <= 1.0
