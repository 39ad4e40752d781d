"""Poisson UE arrivals, demand draws, waypoint movement and PRB scheduling."""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import RangeError
from .radio import prb_capacity_mbps


@dataclass
class Hotspot:
    x: float
    y: float
    radius_m: float
    weight: float


@dataclass
class TrafficParams:
    arrival_rate: float = 0.5
    speed_profiles: list = field(default_factory=lambda: [[0.0, 0.6], [1.4, 0.3], [8.0, 0.1]])
    demand_profile: list = field(default_factory=lambda: [[2.0, 0.5], [5.0, 0.3], [10.0, 0.2]])
    total_prbs: int = 273
    scs_khz: float = 30.0
    overhead: float = 0.14
    avg_window_s: int = 240
    hotspots: list = field(default_factory=list)  # list of Hotspot
    hotspot_fraction: float = 0.0


@dataclass
class UESession:
    id: int
    position: tuple
    target: tuple
    speed: float
    demand_mbps: float
    serving_cell: object = None  # cell id or None when detached
    ttt_state: dict = field(default_factory=dict)
    attach_time: float = 0.0
    last_radio: object = None


class PRBGrid:
    """One cell's PRB pool with an instantaneous and sliding-window load."""

    def __init__(self, total_prbs=273, window_s=240):
        self.total_prbs = int(total_prbs)
        self.window_s = int(window_s)
        self.allocated = {}
        self.instantaneous_utilization = 0.0
        self.sliding_average_utilization = 0.0
        self._history = deque(maxlen=self.window_s)

    def release(self, ue_id):
        n = self.allocated.pop(ue_id, 0)
        if n:
            self.instantaneous_utilization = sum(self.allocated.values()) / self.total_prbs
        return n


def draw_arrivals(rate_per_s, tick_s, rng):
    if rate_per_s < 0:
        raise RangeError("arrival rate must be non-negative", "arrival_rate")
    if rate_per_s == 0:
        return 0
    return int(rng.poisson(rate_per_s * tick_s))


def check_profile(profile, name="profile"):
    if not profile:
        raise RangeError(f"{name} is empty", name)
    probs = np.array([p for _, p in profile], dtype=float)
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
        raise RangeError(f"{name} probabilities must be >= 0 and sum to 1", name)
    return probs


def assign_demand(rng, profile):
    probs = check_profile(profile, "demand_profile")
    k = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
    k = min(k, len(profile) - 1)
    while probs[k] == 0:  # guards the float edge at cumsum == 1
        k -= 1
    return float(profile[k][0])


def prb_need(demand_mbps, cqi, scs_khz=30.0, overhead=0.14):
    """Whole PRBs needed to carry each demand; 0 for CQI 0 (unservable)."""
    demand = np.asarray(demand_mbps, dtype=float)
    cqi = np.asarray(cqi)
    cap = prb_capacity_mbps(cqi, scs_khz, overhead)
    with np.errstate(divide="ignore", invalid="ignore"):
        need = np.where(cqi > 0, np.ceil(demand / np.where(cap > 0, cap, 1.0) - 1e-9), 0)
    return need.astype(np.int64)


def round_robin(need, total):
    """Hand out PRBs one at a time in index order until needs or grid run out.

    Closed form of the loop: everyone gets ``min(need, L)`` for the largest
    water level ``L`` that fits, then the leftover PRBs go one each to the
    lowest-indexed UEs still wanting more.
    """
    need = np.asarray(need, dtype=np.int64)
    if need.sum() <= total:
        return need.copy()
    lo, hi = 0, int(need.max())
    while lo < hi:  # largest L with sum(min(need, L)) <= total
        mid = (lo + hi + 1) // 2
        if np.minimum(need, mid).sum() <= total:
            lo = mid
        else:
            hi = mid - 1
    alloc = np.minimum(need, lo)
    left = total - int(alloc.sum())
    wanting = np.flatnonzero(need > lo)[:left]
    alloc[wanting] += 1
    return alloc


def schedule_prbs(grid, ue_ids, demands, cqis, scs_khz=30.0, overhead=0.14):
    """Allocate ``grid`` to the attached UEs (ids ascending) by CQI-based need."""
    order = np.argsort(np.asarray(ue_ids), kind="stable")
    ids = np.asarray(ue_ids)[order]
    need = prb_need(np.asarray(demands)[order], np.asarray(cqis)[order], scs_khz, overhead)
    alloc = round_robin(need, grid.total_prbs) if len(ids) else np.zeros(0, np.int64)
    grid.allocated = {int(u): int(a) for u, a in zip(ids, alloc) if a}
    grid.instantaneous_utilization = float(alloc.sum()) / grid.total_prbs
    return grid.allocated


def update_average_load(grid, window_s=None):
    if window_s is not None and window_s < 1:
        raise RangeError("window must be >= 1 s", "avg_window_s")
    if window_s is not None and window_s != grid._history.maxlen:
        grid._history = deque(grid._history, maxlen=int(window_s))
    grid._history.append(grid.instantaneous_utilization)
    grid.sliding_average_utilization = sum(grid._history) / len(grid._history)
    return grid.sliding_average_utilization


def move_towards(pos, target, speed, tick_s):
    """Advance positions toward targets; returns (new_pos, arrived mask)."""
    delta = target - pos
    dist = np.hypot(delta[:, 0], delta[:, 1])
    step = speed * tick_s
    arrived = dist <= step
    frac = np.where(arrived, 1.0, step / np.where(dist > 0, dist, 1.0))
    return pos + delta * frac[:, None], arrived & (speed > 0)
