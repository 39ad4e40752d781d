"""A1/A2/A3 measurement events, time-to-trigger and CIO-biased handover."""

from dataclasses import dataclass
import math

import numpy as np

from .errors import TargetUnavailable

CAUSES = ("A3", "PowerSaving", "Depletion")
IDLE, RUNNING, FIRED = "Idle", "Running", "Fired"


@dataclass
class EventConfig:
    a1_threshold_dbm: float = -100.0
    a2_threshold_dbm: float = -110.0
    a3_offset_db: float = 3.0
    hysteresis_db: float = 1.0
    ttt_s: float = 0.64
    measurement_gating: bool = True
    prohibit_s: float = 5.0
    cio_cap_db: float = 9.0

    def ttt_ticks(self, tick_s=1.0):
        # TTT below one tick still needs one full evaluation period
        return max(1, math.ceil(self.ttt_s / tick_s - 1e-9))


@dataclass(frozen=True)
class HandoverEvent:
    ue: int
    source: int
    target: int
    tick: int
    cause: str

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError("handover source and target must differ")
        if self.cause not in CAUSES:
            raise ValueError(f"unknown cause {self.cause!r}")


@dataclass(frozen=True)
class CIOUpdate:
    tick: int
    source: int
    target: int
    cio_db: float
    policy: str


class CIOTable:
    """Sparse (serving, neighbor) -> offset map; absent pairs mean 0 dB."""

    def __init__(self, cap_db=9.0, values=None):
        self.cap_db = cap_db
        self.values = dict(values or {})

    def get(self, source, target):
        return self.values.get((source, target), 0.0)

    def pairs_from(self, source):
        return {k: v for k, v in self.values.items() if k[0] == source}

    def to_matrix(self, n):
        m = np.zeros((n, n))
        for (s, t), v in self.values.items():
            m[s, t] = v
        return m

    def copy(self):
        return CIOTable(self.cap_db, self.values)

    def __eq__(self, other):
        return isinstance(other, CIOTable) and self.values == other.values

    def __repr__(self):
        return f"CIOTable(cap_db={self.cap_db}, values={self.values})"


def clamp_cio(value, cap_db):
    return min(max(value, -cap_db), cap_db)


def apply_cio_update(table, pair, new_cio_db, tick=0, policy="", log=None):
    """Store a clamped offset for ``pair``; zero removes the entry."""
    v = clamp_cio(float(new_cio_db), table.cap_db)
    if v == 0.0:
        table.values.pop(tuple(pair), None)
    else:
        table.values[tuple(pair)] = v
    if log is not None:
        log.append(CIOUpdate(tick, pair[0], pair[1], v, policy))
    return table


def a3_condition(serving_rsrp, neighbor_rsrp, cio_db, cfg):
    """Neighbor plus offset strictly better than serving plus margin."""
    return (np.asarray(neighbor_rsrp) + cio_db
            > np.asarray(serving_rsrp) + cfg.a3_offset_db + cfg.hysteresis_db)


def advance_ttt(elapsed, condition, ttt_ticks):
    """Vectorised TTT step over counters of consecutive true evaluations.

    Returns ``(new_elapsed, fired)``; a counter that fires is reset so the
    event is reported exactly once per run of true evaluations.
    """
    elapsed = np.where(condition, elapsed + 1, 0)
    fired = elapsed >= ttt_ticks
    return np.where(fired, 0, elapsed), fired


def tick_ttt(ue, neighbor, condition_now, cfg, tick_s=1.0):
    """Scalar TTT step on a UESession; returns Idle, (Running, n) or Fired."""
    el, fired = advance_ttt(np.array([ue.ttt_state.get(neighbor, 0)]),
                            np.array([bool(condition_now)]), cfg.ttt_ticks(tick_s))
    if fired[0]:
        ue.ttt_state.pop(neighbor, None)
        return FIRED
    if el[0] == 0:
        ue.ttt_state.pop(neighbor, None)
        return IDLE
    ue.ttt_state[neighbor] = int(el[0])
    return (RUNNING, int(el[0]) * tick_s)


def update_measurement_gate(measuring, serving_rsrp, cfg):
    """A2 (serving below threshold) opens neighbor reporting, A1 closes it."""
    if not cfg.measurement_gating:
        return np.ones_like(measuring, dtype=bool)
    start = serving_rsrp < cfg.a2_threshold_dbm
    stop = serving_rsrp > cfg.a1_threshold_dbm
    return (measuring | start) & ~stop


def pick_candidate(fired_cells, neighbor_rsrp, cio_db):
    """Highest biased RSRP among fired neighbors; ties go to the lowest id."""
    best, best_val = None, -np.inf
    for c in sorted(fired_cells):
        v = neighbor_rsrp[c] + cio_db[c]
        if v > best_val:
            best, best_val = c, v
    return best


def execute_handover(ue, target, cause, tick=0, outage=None, grids=None):
    """Move ``ue`` (a UESession) to ``target`` and return the event.

    ``outage`` maps cell id -> bool; ``grids`` maps cell id -> PRBGrid so the
    source allocation can be released in the same tick.
    """
    if outage is not None and outage.get(target, False):
        raise TargetUnavailable(f"cell {target} is in depletion outage")
    source = ue.serving_cell
    ev = HandoverEvent(ue.id, source, target, tick, cause)
    if grids is not None and source in grids:
        grids[source].release(ue.id)
    ue.serving_cell = target
    ue.ttt_state.clear()
    return ev
