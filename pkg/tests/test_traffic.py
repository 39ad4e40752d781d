import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reslb.errors import RangeError
from reslb.radio import prb_capacity_mbps
from reslb.traffic import (PRBGrid, assign_demand, draw_arrivals, move_towards, prb_need,
                           round_robin, schedule_prbs, update_average_load)


def rr_loop(need, total):
    """Literal one-PRB-per-turn round robin."""
    alloc = [0] * len(need)
    left = total
    while left > 0 and any(a < n for a, n in zip(alloc, need)):
        for i, n in enumerate(need):
            if left == 0:
                break
            if alloc[i] < n:
                alloc[i] += 1
                left -= 1
    return alloc


@settings(max_examples=300)
@given(st.lists(st.integers(0, 60), max_size=25), st.integers(0, 300))
def test_round_robin_matches_loop(need, total):
    got = round_robin(np.array(need, dtype=np.int64), total)
    assert got.tolist() == rr_loop(need, total)
    assert got.sum() <= total
    assert np.all(got <= np.array(need, dtype=np.int64))


def test_arrivals():
    rng = np.random.default_rng(1)
    assert all(draw_arrivals(0, 1, rng) == 0 for _ in range(100))
    rng = np.random.default_rng(2)
    xs = [draw_arrivals(5, 1, rng) for _ in range(100_000)]
    assert np.mean(xs) == pytest.approx(5.0, abs=0.05)
    a = [draw_arrivals(2, 1, np.random.default_rng(7)) for _ in range(3)]
    assert len(set(a)) == 1
    with pytest.raises(RangeError):
        draw_arrivals(-1, 1, rng)


def test_demand_draws():
    rng = np.random.default_rng(3)
    assert assign_demand(rng, [[10, 1.0]]) == 10
    xs = np.array([assign_demand(rng, [[1, 0.5], [2, 0.5]]) for _ in range(100_000)])
    assert np.mean(xs == 1) == pytest.approx(0.5, abs=0.01)
    xs = [assign_demand(rng, [[1, 0.0], [2, 0.3], [3, 0.7], [4, 0.0]]) for _ in range(100_000)]
    assert 1 not in xs and 4 not in xs
    with pytest.raises(RangeError):
        assign_demand(rng, [[1, 0.5], [2, 0.4]])


def test_prb_need():
    cap = prb_capacity_mbps(15)
    assert prb_need(cap * 3, 15) == 3
    assert prb_need(cap * 3 + 1e-3, 15) == 4
    assert prb_need(5.0, 0) == 0


def test_schedule_prbs_examples():
    g = PRBGrid(100)
    schedule_prbs(g, [], [], [])
    assert g.instantaneous_utilization == 0.0
    cap = prb_capacity_mbps(15)
    schedule_prbs(g, [1], [cap * 100], [15])
    assert g.instantaneous_utilization == 1.0
    # two identical UEs each needing 40 on a 60-PRB grid
    g = PRBGrid(60)
    alloc = schedule_prbs(g, [5, 9], [cap * 40, cap * 40], [15, 15])
    assert abs(alloc[5] - alloc[9]) <= 1 and alloc[5] + alloc[9] == 60


def test_sliding_average():
    g = PRBGrid(10, window_s=4)
    g.instantaneous_utilization = 0.8
    assert update_average_load(g) == pytest.approx(0.8)
    g = PRBGrid(10, window_s=4)
    for _ in range(8):
        g.instantaneous_utilization = 0.5
        update_average_load(g)
    assert g.sliding_average_utilization == pytest.approx(0.5)
    g = PRBGrid(10, window_s=4)
    for k in range(9):
        g.instantaneous_utilization = float(k % 2)
        update_average_load(g)
    assert g.sliding_average_utilization == pytest.approx(0.5)
    with pytest.raises(RangeError):
        update_average_load(g, 0)


def test_release_updates_utilization():
    g = PRBGrid(10)
    g.allocated = {1: 4, 2: 2}
    g.instantaneous_utilization = 0.6
    assert g.release(1) == 4
    assert g.instantaneous_utilization == pytest.approx(0.2)
    assert g.release(99) == 0


def test_move_towards():
    pos = np.array([[0.0, 0.0], [0.0, 0.0], [5.0, 5.0]])
    tgt = np.array([[3.0, 4.0], [1.0, 0.0], [5.0, 5.0]])
    new, arrived = move_towards(pos, tgt, np.array([1.0, 2.0, 0.0]), 1)
    assert new[0] == pytest.approx([0.6, 0.8])
    assert new[1] == pytest.approx([1.0, 0.0])
    assert arrived.tolist() == [False, True, False]
