"""Energy-aware extension of proactive-reactive load balancing.

A renewable-powered cell gets a sustainability index in [-1, 1] built from
three terms:

* a logistic SoC bias centred between the critical and sufficient levels,
* a tanh term on the cell's net energy balance for the tick,
* a Gaussian attenuation that damps the response around mid-range SoC.

The index scales the load-balancing CIO bias toward that cell (negative
values invert it).  Independently, cells with low SoC and an energy deficit
are scheduled for power-saving checks that shed UEs to neighbors.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError
from .mobility import CIOTable, clamp_cio

DEFAULT_SOC_CAPS = ((0.10, 0.75), (0.20, 0.55), (0.30, 0.35), (0.40, 0.20))


@dataclass
class EnergyIndexParams:
    s_l: float = 0.2
    s_h: float = 0.4
    k_soc: float = 6.0
    beta: float = 0.5
    lam: float = 0.3
    mu: float = 0.35
    sigma_g: float = 0.12
    xi_floor: float = 1e-6
    t_interval_s: int = 60
    congestion_prb_threshold: float = 0.85
    congestion_neighbor_fraction: float = 0.60
    cap_reduction_factor: float = 0.75
    soc_caps: list = field(default_factory=lambda: [list(c) for c in DEFAULT_SOC_CAPS])
    power_saving: bool = True
    # Testing hook: pin every index to this value instead of computing it.
    force_index: object = None

    @property
    def m(self):
        return (self.s_h + self.s_l) / 2.0

    @property
    def r(self):
        return self.s_h - self.s_l


@dataclass
class EnergyIndex:
    b: float
    a: float
    z: float
    e: float


def logistic(x):
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    ex = math.exp(x)
    return ex / (1.0 + ex)


def soc_bias(s, p):
    return 2.0 * logistic(p.k_soc * (s - p.m) / p.r) - 1.0


def net_power_adaptation(e_g, e_c, xi, p):
    return p.beta * math.tanh((e_g - e_c) / xi)


def compute_xi(net_diffs, p):
    """Largest absolute net balance in the vector, floored at ``xi_floor``."""
    if len(net_diffs) == 0:
        return p.xi_floor
    return max(p.xi_floor, float(np.max(np.abs(net_diffs))))


def midrange_attenuation(s, p):
    return 1.0 - p.lam * math.exp(-(s - p.mu) ** 2 / (2.0 * p.sigma_g ** 2))


def psi(x):
    return min(1.0, max(-1.0, x))


def energy_index_components(s, e_g, e_c, xi, p):
    b = soc_bias(s, p)
    a = net_power_adaptation(e_g, e_c, xi, p)
    z = midrange_attenuation(s, p)
    return EnergyIndex(b, a, z, psi((b + a) * z))


def energy_index(s, e_g, e_c, xi, p):
    return energy_index_components(s, e_g, e_c, xi, p).e


def scale_cios(cio_table, res_cells, indices):
    """Multiply every bias pointing at a renewable cell by that cell's index.

    ``indices`` maps cell id -> index value (or EnergyIndex).  Pairs toward
    non-renewable cells are copied untouched.
    """
    res = set(res_cells)
    out = CIOTable(cio_table.cap_db)
    for (s, t), v in cio_table.values.items():
        if t in res:
            e = indices[t]
            e = e.e if isinstance(e, EnergyIndex) else e
            v = clamp_cio(v * e, cio_table.cap_db)
        if v != 0.0:
            out.values[(s, t)] = v
    return out


class PowerSavingSchedule:
    """Interval and half-interval lists for power-saving checks."""

    def __init__(self):
        self.interval_list = set()
        self.half_interval_list = set()
        self.deficit_since = {}  # first tick of the current s <= s_h & deficit run
        self.low_since = {}      # first tick of the current s <= m & deficit run

    def lists_of(self, cell):
        if cell in self.interval_list:
            return "interval"
        if cell in self.half_interval_list:
            return "half"
        return None

    def drop(self, cell):
        self.interval_list.discard(cell)
        self.half_interval_list.discard(cell)
        self.deficit_since.pop(cell, None)
        self.low_since.pop(cell, None)


def update_schedule(sched, cell, s, e_g, e_c, t, p, tick_s=1):
    """Advance one cell's schedule membership at tick ``t``.

    A condition counts as sustained for ``T`` once it held on ``T``
    consecutive ticks.  Returns the list name the cell ends up in, or None.
    """
    T = p.t_interval_s
    if not (s <= p.s_h and e_c > e_g):
        sched.drop(cell)
        return None
    sched.deficit_since.setdefault(cell, t)
    if s <= p.m:
        sched.low_since.setdefault(cell, t)
        if t - sched.low_since[cell] + tick_s >= T / 2:
            sched.interval_list.discard(cell)
            sched.half_interval_list.add(cell)
    else:
        sched.low_since.pop(cell, None)
        if t - sched.deficit_since[cell] + tick_s >= T:
            sched.half_interval_list.discard(cell)
            sched.interval_list.add(cell)
        elif cell in sched.half_interval_list:
            sched.half_interval_list.discard(cell)
    return sched.lists_of(cell)


def should_trigger(sched, cell, s, t, p):
    T = p.t_interval_s
    if s <= p.s_l:
        return True
    if cell in sched.interval_list and t % T == 0:
        return True
    return cell in sched.half_interval_list and t % (T // 2) == 0


def soc_cap(s, p):
    for limit, cap in p.soc_caps:
        if s <= limit:
            return cap
    return 0.0


def estimate_energy_reduction(s, e_g, e_c, congested_neighbor_fraction, p):
    """Fraction of consumption to shed: min(deficit ratio, SoC cap)."""
    if e_c <= 0:
        raise DomainError("consumed energy must be positive")
    delta = max(0.0, 1.0 - e_g / e_c)
    cap = soc_cap(s, p)
    if congested_neighbor_fraction > p.congestion_neighbor_fraction:
        cap *= p.cap_reduction_factor
    return min(delta, cap)


def congested_fraction(neighbor_utils, p):
    if len(neighbor_utils) == 0:
        return 0.0
    u = np.asarray(neighbor_utils, dtype=float)
    return float(np.mean(u > p.congestion_prb_threshold))


@dataclass
class PowerSavingResult:
    offloads: list            # (ue, target) in execution order
    cio_updates: list         # ((source, target), cio_db) for the power-saving layer
    target_wh: float
    released_wh: float

    @property
    def partial(self):
        return self.released_wh < self.target_wh * (1 - 1e-12)


def execute_power_saving(cell, gamma, e_c, ue_ids, prb_alloc, distances, rsrp,
                         live, total_prbs, delta_w, tick_s, cfg, bias_step_db=2.0):
    """Shed attached UEs until the load energy released covers gamma * e_c.

    ``rsrp`` is the UE x cell matrix of last measurements for the listed
    UEs and ``live`` marks cells able to take traffic.  UEs are taken in
    decreasing ``share_wh * distance`` order (largest load nearest the edge
    first, ties by id).  For every receiving neighbor the CIO back toward
    ``cell`` is pushed low enough, one step past the A3 margin, that the
    shed UEs do not immediately return.
    """
    target_wh = gamma * e_c
    if gamma <= 0 or len(ue_ids) == 0:
        return PowerSavingResult([], [], target_wh, 0.0)
    ue_ids = np.asarray(ue_ids)
    share_wh = np.asarray(prb_alloc, float) / total_prbs * delta_w * tick_s / 3600.0
    score = share_wh * np.asarray(distances, float)
    order = sorted(range(len(ue_ids)), key=lambda k: (-score[k], ue_ids[k]))
    cand = np.array(live, dtype=bool).copy()
    cand[cell] = False

    offloads, released, back = [], 0.0, {}
    for k in order:
        if released >= target_wh * (1 - 1e-12):
            break
        if share_wh[k] <= 0 or not cand.any():
            continue
        row = np.where(cand, rsrp[k], -np.inf)
        n = int(np.argmax(row))
        if not np.isfinite(row[n]):
            continue
        offloads.append((int(ue_ids[k]), n))
        released += share_wh[k]
        margin = rsrp[k][n] - rsrp[k][cell] + cfg.a3_offset_db + cfg.hysteresis_db
        back[n] = min(back.get(n, 0.0), margin)

    updates = [((n, cell), clamp_cio(min(0.0, m) - bias_step_db, cfg.cio_cap_db))
               for n, m in sorted(back.items())]
    return PowerSavingResult(offloads, updates, target_wh, released)
