"""Harvest, consumption and battery bookkeeping for renewable-powered cells."""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import RangeError

WH_PER_JOULE = 1.0 / 3600.0
HARVEST_KINDS = ("Solar", "Wind", "Trace")


@dataclass
class HarvestProfile:
    """Generator output over time.

    Solar is a half-sine between ``daylight_start_h`` and ``daylight_end_h``
    (hours of day; sim second 0 maps to ``start_hour`` of the scenario).
    Wind is ``peak_w * mean_fraction``.  Trace replays one watt sample per
    simulated second.  ``noise_sigma`` adds seeded multiplicative noise to
    Solar/Wind only.
    """
    kind: str = "Solar"
    peak_w: float = 0.0
    daylight_start_h: float = 6.0
    daylight_end_h: float = 18.0
    mean_fraction: float = 0.35
    noise_sigma: float = 0.0
    samples: list = field(default_factory=list)
    path: str = ""


@dataclass
class PowerModel:
    p0_w: float = 60.0
    delta_w: float = 240.0


@dataclass
class Battery:
    e_wh: float
    capacity_wh: float
    depleted: bool = False
    spilled_wh: float = 0.0
    deficit_wh: float = 0.0

    @property
    def soc(self):
        return self.e_wh / self.capacity_wh


def load_trace(path):
    """One watt sample per line; blank lines and ``#`` comments skipped."""
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                out.append(float(line))
    return out


def harvest_power_w(profile, t_s, start_hour=0.0, rng=None):
    if profile.kind == "Trace":
        idx = int(t_s)
        if idx >= len(profile.samples):
            raise RangeError(f"harvest trace exhausted at t={t_s}s "
                             f"({len(profile.samples)} samples)", "samples")
        return float(profile.samples[idx])
    if profile.kind == "Solar":
        hour = (start_hour + t_s / 3600.0) % 24.0
        lo, hi = profile.daylight_start_h, profile.daylight_end_h
        if not lo <= hour <= hi or hi <= lo:
            return 0.0
        w = profile.peak_w * math.sin(math.pi * (hour - lo) / (hi - lo))
    elif profile.kind == "Wind":
        w = profile.peak_w * profile.mean_fraction
    else:
        raise RangeError(f"unknown harvest kind {profile.kind!r}", "kind")
    if profile.noise_sigma > 0 and rng is not None:
        w *= max(0.0, 1.0 + profile.noise_sigma * rng.standard_normal())
    return max(0.0, w)


def harvested_energy_wh(profile, t_s, tick_s, rng=None, start_hour=0.0):
    if t_s < 0:
        raise RangeError("t must be non-negative", "t_s")
    return harvest_power_w(profile, t_s, start_hour, rng) * tick_s * WH_PER_JOULE


def consumed_energy_wh(pm, prb_utilization, tick_s):
    if not 0.0 <= prb_utilization <= 1.0:
        raise RangeError(f"utilization {prb_utilization} outside [0, 1]", "prb_utilization")
    return (pm.p0_w + pm.delta_w * prb_utilization) * tick_s * WH_PER_JOULE


def update_soc(b, e_g_wh, e_c_wh):
    """Apply one step of the stored-energy balance, clamped to [0, capacity].

    Overflow is booked in ``spilled_wh``, the unmet part of a drain in
    ``deficit_wh``; ``depleted`` is set when the floor is hit.
    """
    if e_g_wh < 0 or e_c_wh < 0:
        raise RangeError("energies must be non-negative")
    raw = b.e_wh + e_g_wh - e_c_wh
    spilled = max(0.0, raw - b.capacity_wh)
    deficit = max(0.0, -raw)
    e = min(max(raw, 0.0), b.capacity_wh)
    return Battery(e_wh=e, capacity_wh=b.capacity_wh,
                   depleted=raw <= 0.0 and e_c_wh > 0.0,
                   spilled_wh=b.spilled_wh + spilled,
                   deficit_wh=b.deficit_wh + deficit)


def handle_depletion(cell_id, depleted, serving, rsrp, live):
    """Directives for UEs stranded by a depleted cell.

    ``serving`` is the per-UE serving-cell array (-1 = detached), ``rsrp`` the
    UE x cell RSRP matrix from the last sampling and ``live`` a per-cell mask
    of cells able to serve.  Returns ``[(ue, target_or_None), ...]`` with None
    meaning the UE goes detached.
    """
    if not depleted:
        return []
    out = []
    ues = np.flatnonzero(np.asarray(serving) == cell_id)
    cand = np.array(live, dtype=bool).copy()
    cand[cell_id] = False
    for u in ues:
        if not cand.any():
            out.append((int(u), None))
            continue
        row = np.where(cand, rsrp[u], -np.inf)
        best = int(np.argmax(row))
        out.append((int(u), best if np.isfinite(row[best]) else None))
    return out
