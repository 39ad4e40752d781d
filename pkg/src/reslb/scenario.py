"""Scenario model: topology, energy, traffic and policy settings for one run.

Scenarios are JSON documents with the top-level keys ``sim``, ``cells``,
``traffic``, ``policy``, ``radio``, ``eprlb`` and ``prlb`` (see
docs/scenario_schema.md).  Unknown keys anywhere are rejected.
"""

from dataclasses import asdict, dataclass, field, fields
import json
import math
import os

from .energy import HARVEST_KINDS, HarvestProfile, PowerModel, load_trace
from .eprlb import EnergyIndexParams
from .errors import ParseError, RangeError, SchemaError
from .mobility import EventConfig
from .prlb import PRLBParams
from .radio import INTERFERENCE_MODELS, LOS_MODES, PropagationParams
from .traffic import Hotspot, TrafficParams

POLICIES = ("None", "PRLB", "EPRLB")
TOP_LEVEL_KEYS = ("sim", "cells", "traffic", "policy", "radio", "eprlb", "prlb")
CARRIER_BAND_GHZ = (3.4, 3.6)
DEFAULT_SECTORS = (0.0, 120.0, 240.0)
DEFAULT_BATTERY_WH = 200.0
DEFAULT_INITIAL_SOC = 0.55


@dataclass
class CellConfig:
    id: int
    position: list
    sectors: list = field(default_factory=lambda: list(DEFAULT_SECTORS))
    tx_power_dbm: float = 30.0
    carrier_ghz: float = 3.5
    is_res: bool = False
    battery_capacity_wh: object = None
    initial_soc: float = 1.0
    harvest: object = None
    analyzed: bool = False
    power_model: object = None  # per-cell PowerModel override


@dataclass
class SimParams:
    seed: int
    duration_s: int = 1140
    tick_s: int = 1
    bounds: list = field(default_factory=lambda: [-500.0, -500.0, 500.0, 500.0])
    start_hour: float = 19.0
    restart_soc: float = 0.05
    power_model: PowerModel = field(default_factory=PowerModel)
    harvest_profiles: dict = field(
        default_factory=lambda: {"solar": HarvestProfile(kind="Solar", peak_w=400.0)})


@dataclass
class Scenario:
    sim: SimParams
    cells: list
    traffic: TrafficParams = field(default_factory=TrafficParams)
    policy: str = "EPRLB"
    radio: PropagationParams = field(default_factory=PropagationParams)
    events: EventConfig = field(default_factory=EventConfig)
    eprlb: EnergyIndexParams = field(default_factory=EnergyIndexParams)
    prlb: PRLBParams = field(default_factory=PRLBParams)

    @property
    def seed(self):
        return self.sim.seed

    @property
    def tick(self):
        return self.sim.tick_s

    @property
    def sim_duration(self):
        return self.sim.duration_s

    @property
    def bounds(self):
        return self.sim.bounds

    @property
    def ue_arrival_rate(self):
        return self.traffic.arrival_rate

    @property
    def ue_speed_profiles(self):
        return self.traffic.speed_profiles

    @property
    def res_ids(self):
        return [c.id for c in self.cells if c.is_res]

    @property
    def analyzed_ids(self):
        return [c.id for c in self.cells if c.analyzed]

    def power_model_for(self, cell):
        return cell.power_model or self.sim.power_model


def normalize_policy(name):
    for p in POLICIES:
        if str(name).lower() == p.lower():
            return p
    raise RangeError(f"unknown policy {name!r}; valid: {', '.join(POLICIES)}", "policy")


# -- building from dicts ------------------------------------------------------

def _build(cls, data, where, required=(), nested=None):
    if not isinstance(data, dict):
        raise SchemaError(f"{where}: expected an object", [where])
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise SchemaError(f"{where}: unknown keys {unknown}",
                          [f"{where}.{k}" for k in unknown])
    missing = [k for k in required if k not in data]
    if missing:
        raise SchemaError(f"{where}: missing required fields {missing}",
                          [f"{where}.{k}" for k in missing])
    kwargs = dict(data)
    for key, fn in (nested or {}).items():
        if key in kwargs and kwargs[key] is not None:
            kwargs[key] = fn(kwargs[key], f"{where}.{key}")
    return cls(**kwargs)


def _harvest(data, where, base_dir):
    hp = _build(HarvestProfile, data, where)
    if hp.path and not hp.samples:
        path = hp.path if os.path.isabs(hp.path) else os.path.join(base_dir, hp.path)
        try:
            hp.samples = load_trace(path)
        except (OSError, ValueError) as exc:
            raise ParseError(f"{where}: cannot read trace {path}: {exc}") from exc
    return hp


def _power_model(data, where):
    return _build(PowerModel, data, where)


def _cells(data, where):
    if isinstance(data, dict) and set(data) == {"synth"}:
        spec = dict(data["synth"])
        return synth_grid_topology(**spec)
    if not isinstance(data, list):
        raise SchemaError(f"{where}: expected a list of cells", [where])
    return [_build(CellConfig, c, f"{where}[{i}]", required=("id", "position"),
                   nested={"power_model": _power_model})
            for i, c in enumerate(data)]


def scenario_from_dict(doc, base_dir="."):
    if not isinstance(doc, dict):
        raise SchemaError("scenario root must be an object", ["<root>"])
    unknown = sorted(set(doc) - set(TOP_LEVEL_KEYS))
    if unknown:
        raise SchemaError(f"unknown top-level keys {unknown}", unknown)
    missing = [k for k in ("sim", "cells") if k not in doc]
    if missing:
        raise SchemaError(f"missing required fields {missing}", missing)

    def profiles(d, where):
        if not isinstance(d, dict):
            raise SchemaError(f"{where}: expected an object", [where])
        return {k: _harvest(v, f"{where}.{k}", base_dir) for k, v in d.items()}

    sim = _build(SimParams, doc["sim"], "sim", required=("seed",),
                 nested={"power_model": _power_model, "harvest_profiles": profiles})
    cells = _cells(doc["cells"], "cells")
    traffic = _build(TrafficParams, doc.get("traffic", {}), "traffic", nested={
        "hotspots": lambda d, w: [_build(Hotspot, h, f"{w}[{i}]") for i, h in enumerate(d)]})
    radio_doc = dict(doc.get("radio", {}))
    events = _build(EventConfig, radio_doc.pop("events", {}), "radio.events")
    radio = _build(PropagationParams, radio_doc, "radio")
    eprlb = _build(EnergyIndexParams, doc.get("eprlb", {}), "eprlb")
    prlb = _build(PRLBParams, doc.get("prlb", {}), "prlb")
    return Scenario(sim=sim, cells=cells, traffic=traffic,
                    policy=normalize_policy(doc.get("policy", "EPRLB")),
                    radio=radio, events=events, eprlb=eprlb, prlb=prlb)


def read_scenario(path):
    """Read and build a scenario file without checking value ranges."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read scenario {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed scenario {path}: {exc}") from exc
    try:
        s = scenario_from_dict(doc, os.path.dirname(os.path.abspath(path)))
    except TypeError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    return s


def load_scenario(path):
    """Read, build and validate a scenario file."""
    s = read_scenario(path)
    problems = validate_scenario(s)
    if problems:
        raise RangeError("; ".join(problems), problems[0].split(":", 1)[0])
    return s


def scenario_to_dict(s):
    def clean(obj):
        d = asdict(obj)
        return d

    radio = clean(s.radio)
    radio["events"] = clean(s.events)
    sim = clean(s.sim)
    for hp in sim["harvest_profiles"].values():
        if hp["path"]:
            hp["samples"] = []
    cells = []
    for c in s.cells:
        d = asdict(c)
        if d["power_model"] is None:
            del d["power_model"]
        cells.append(d)
    return {
        "sim": sim,
        "cells": cells,
        "traffic": clean(s.traffic),
        "policy": s.policy,
        "radio": radio,
        "eprlb": clean(s.eprlb),
        "prlb": clean(s.prlb),
    }


def save_scenario(s, path):
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(s), fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- validation ---------------------------------------------------------------

def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def validate_scenario(s):
    """Return one ``"field: rule"`` string per violated invariant."""
    v = []
    sim, tr, rp, ev, ep, pp = s.sim, s.traffic, s.radio, s.events, s.eprlb, s.prlb

    if not _is_int(sim.seed):
        v.append("sim.seed: must be an explicit integer")
    if sim.tick_s != 1:
        v.append("sim.tick_s: tick must be 1 s")
    if not _is_int(sim.duration_s) or sim.duration_s < 1:
        v.append("sim.duration_s: must be an integer >= 1")
    b = sim.bounds
    if len(b) != 4 or not (b[0] < b[2] and b[1] < b[3]):
        v.append("sim.bounds: must be [xmin, ymin, xmax, ymax] with min < max")
    if not 0.0 <= sim.restart_soc <= 1.0:
        v.append("sim.restart_soc: must be in [0, 1]")
    for where, pm in [("sim.power_model", sim.power_model)] + [
            (f"cells[{i}].power_model", c.power_model)
            for i, c in enumerate(s.cells) if c.power_model is not None]:
        if pm.p0_w < 0 or pm.delta_w < 0:
            v.append(f"{where}: p0_w and delta_w must be >= 0")
    for k, hp in sim.harvest_profiles.items():
        if hp.kind not in HARVEST_KINDS:
            v.append(f"sim.harvest_profiles.{k}.kind: must be one of {HARVEST_KINDS}")
        if hp.peak_w < 0 or any(x < 0 for x in hp.samples):
            v.append(f"sim.harvest_profiles.{k}: samples and peak_w must be >= 0")
        if hp.kind == "Trace" and not hp.samples:
            v.append(f"sim.harvest_profiles.{k}.samples: Trace profile has no samples")

    if not s.cells:
        v.append("cells: at least one cell required")
    ids = [c.id for c in s.cells]
    if sorted(ids) != list(range(len(ids))):
        v.append("cells.id: ids must be the integers 0..n-1, each used once")
    for i, c in enumerate(s.cells):
        w = f"cells[{i}]"
        if len(c.position) != 2:
            v.append(f"{w}.position: must be [x, y]")
        if not c.sectors:
            v.append(f"{w}.sectors: at least one sector required")
        if not CARRIER_BAND_GHZ[0] <= c.carrier_ghz <= CARRIER_BAND_GHZ[1]:
            v.append(f"{w}.carrier_ghz: must lie in [3.4, 3.6] GHz")
        if not 0.0 <= c.initial_soc <= 1.0:
            v.append(f"{w}.initial_soc: must be in [0, 1]")
        if c.is_res:
            if c.battery_capacity_wh is None or not c.battery_capacity_wh > 0:
                v.append(f"{w}.battery_capacity_wh: RES cell needs capacity > 0")
            if c.harvest is None:
                v.append(f"{w}.harvest: RES cell needs a harvest profile")
            elif c.harvest not in sim.harvest_profiles:
                v.append(f"{w}.harvest: unknown profile {c.harvest!r}")

    if tr.arrival_rate < 0:
        v.append("traffic.arrival_rate: must be >= 0")
    for name in ("speed_profiles", "demand_profile"):
        prof = getattr(tr, name)
        probs = [p for _, p in prof] if prof else []
        if not prof or any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-9:
            v.append(f"traffic.{name}: probabilities must be >= 0 and sum to 1")
    if any(sp < 0 for sp, _ in tr.speed_profiles):
        v.append("traffic.speed_profiles: speeds must be >= 0")
    if any(d <= 0 for d, _ in tr.demand_profile):
        v.append("traffic.demand_profile: demands must be > 0")
    if not _is_int(tr.total_prbs) or tr.total_prbs < 1:
        v.append("traffic.total_prbs: must be a positive integer")
    if not _is_int(tr.avg_window_s) or tr.avg_window_s < 1:
        v.append("traffic.avg_window_s: must be an integer >= 1")
    if not 0.0 <= tr.hotspot_fraction <= 1.0:
        v.append("traffic.hotspot_fraction: must be in [0, 1]")
    if tr.hotspot_fraction > 0 and not tr.hotspots:
        v.append("traffic.hotspots: hotspot_fraction > 0 needs at least one hotspot")

    if rp.h_bs_m <= 0 or rp.h_ut_m <= 0:
        v.append("radio.h_bs_m/h_ut_m: heights must be positive")
    if rp.shadowing_sigma_los_db < 0 or rp.shadowing_sigma_nlos_db < 0 or rp.fading_sigma_db < 0:
        v.append("radio.shadowing_sigma: sigmas must be >= 0")
    if rp.los_mode not in LOS_MODES:
        v.append(f"radio.los_mode: must be one of {LOS_MODES}")
    if rp.interference_model not in INTERFERENCE_MODELS:
        v.append(f"radio.interference_model: must be one of {INTERFERENCE_MODELS}")
    if not 0.0 <= rp.interference_floor <= 1.0:
        v.append("radio.interference_floor: must be in [0, 1]")
    if not ev.a2_threshold_dbm < ev.a1_threshold_dbm:
        v.append("radio.events.a2_threshold_dbm: must be below a1_threshold_dbm")
    if ev.ttt_s <= 0:
        v.append("radio.events.ttt_s: must be positive")
    if ev.cio_cap_db <= 0:
        v.append("radio.events.cio_cap_db: must be positive")

    for name in ("proactive_prb_threshold", "reactive_avg_threshold"):
        if not 0.0 < getattr(pp, name) <= 1.0:
            v.append(f"prlb.{name}: must be in (0, 1]")
    if not _is_int(pp.reactive_period_s) or pp.reactive_period_s < 1:
        v.append("prlb.reactive_period_s: must be a whole number of ticks")
    if pp.bias_step_db <= 0 or pp.bias_cap_db < 0:
        v.append("prlb.bias_step_db/bias_cap_db: step must be > 0, cap >= 0")

    if not 0.0 < ep.s_l < ep.s_h < 1.0:
        v.append("eprlb.s_l/s_h: need 0 < s_l < s_h < 1")
    for name in ("beta", "lam"):
        if not 0.0 <= getattr(ep, name) <= 1.0:
            v.append(f"eprlb.{name}: must be in [0, 1]")
    if ep.sigma_g <= 0:
        v.append("eprlb.sigma_g: must be > 0")
    if ep.xi_floor <= 0:
        v.append("eprlb.xi_floor: must be > 0")
    if not _is_int(ep.t_interval_s) or ep.t_interval_s < 2 or ep.t_interval_s % 2:
        v.append("eprlb.t_interval_s: must be an even whole number of ticks")
    if ep.force_index is not None and not -1.0 <= ep.force_index <= 1.0:
        v.append("eprlb.force_index: must be in [-1, 1]")

    if s.policy not in POLICIES:
        v.append(f"policy: must be one of {POLICIES}")
    return v


# -- synthetic topology -------------------------------------------------------

_HEX_DIRS = ((1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1))


def _hex_spiral(n):
    out = [(0, 0)]
    k = 1
    while len(out) < n:
        q, r = -k, k  # start corner of ring k, then walk its six sides
        for dq, dr in _HEX_DIRS:
            for _ in range(k):
                out.append((q, r))
                q, r = q + dq, r + dr
        k += 1
    return out[:n]


def synth_grid_topology(n_cells, spacing, res_ids=(), n_analyzed=9,
                        battery_capacity_wh=DEFAULT_BATTERY_WH,
                        initial_soc=DEFAULT_INITIAL_SOC, harvest="solar"):
    """Cells on a hexagonal lattice, spiralling out from the origin.

    Cell ids follow the spiral, so the ``n_analyzed`` lowest ids form the
    central cluster.
    """
    if n_cells < 1:
        raise RangeError("n_cells must be >= 1", "n_cells")
    if spacing <= 0:
        raise RangeError("spacing must be > 0", "spacing")
    res = set(res_ids)
    bad = sorted(i for i in res if not 0 <= i < n_cells)
    if bad:
        raise RangeError(f"res_ids reference unknown cells {bad}", "res_ids")
    cells = []
    for i, (q, r) in enumerate(_hex_spiral(n_cells)):
        x = spacing * (q + r / 2.0)
        y = spacing * (r * math.sqrt(3.0) / 2.0)
        is_res = i in res
        cells.append(CellConfig(
            id=i, position=[round(x, 9) + 0.0, round(y, 9) + 0.0],
            is_res=is_res,
            battery_capacity_wh=battery_capacity_wh if is_res else None,
            initial_soc=initial_soc if is_res else 1.0,
            harvest=harvest if is_res else None,
            analyzed=i < n_analyzed))
    return cells


def default_scenario(seed=0, policy="EPRLB"):
    """17-cell hex cluster, 200 m spacing, 9 analyzed cells, 3 RES cells."""
    cells = synth_grid_topology(17, 200.0, res_ids=(2, 4, 6))
    return Scenario(sim=SimParams(seed=seed), cells=cells, policy=normalize_policy(policy))
