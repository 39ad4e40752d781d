"""Deterministic one-second-tick simulation of the small-cell cluster.

Each ``step`` runs these phases in order:

 1. harvest, consumption and battery update for every cell
 2. depletion outages and forced re-attachment
 3. UE movement and Poisson arrivals
 4. radio sampling (RSRP matrix)
 5. A1/A2 gating, A3 + TTT evaluation, handovers
 6. PRLB proactive check
 7. PRLB reactive check (period ticks only)
 8. ePRLB: energy indices, schedule, power saving
 9. PRB scheduling and load averages
10. metric capture

CIO changes made in phases 6-8 take effect in phase 5 of the next tick.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import copy
import hashlib
import zlib

import numpy as np

from . import eprlb as ep
from . import prlb
from .energy import Battery, consumed_energy_wh, handle_depletion, harvested_energy_wh, update_soc
from .errors import SimError
from .mobility import (CIOTable, HandoverEvent, a3_condition, advance_ttt, apply_cio_update,
                       pick_candidate, update_measurement_gate)
from .radio import (cqi_from_sinr, gain_matrix_db, los_probability, noise_dbm, path_loss_db,
                    serving_sinr_db)
from .scenario import normalize_policy, scenario_to_dict, validate_scenario
from .traffic import (PRBGrid, assign_demand, draw_arrivals, move_towards, prb_need, round_robin,
                      update_average_load)

RNG_STREAMS = ("arrivals", "demand", "mobility", "shadowing", "fading", "harvest")
CAUSE_INDEX = {"A3": 0, "PowerSaving": 1, "Depletion": 2, "Detach": 3}


def make_rng(seed, name):
    """Independent generator per subsystem, keyed by name rather than order."""
    ss = np.random.SeedSequence(seed, spawn_key=(zlib.crc32(name.encode()),))
    return np.random.Generator(np.random.PCG64(ss))


class TickLog:
    """Per-tick, per-cell metric arrays (rows = ticks, columns = cells)."""

    FIELDS = ("soc", "e_g_wh", "e_c_wh", "prb_inst", "prb_avg", "ue_count", "outage")

    def __init__(self, n_ticks, n_cells):
        self.t = np.zeros(n_ticks, dtype=np.int64)
        self.soc = np.zeros((n_ticks, n_cells))
        self.e_g_wh = np.zeros((n_ticks, n_cells))
        self.e_c_wh = np.zeros((n_ticks, n_cells))
        self.prb_inst = np.zeros((n_ticks, n_cells))
        self.prb_avg = np.zeros((n_ticks, n_cells))
        self.ue_count = np.zeros((n_ticks, n_cells), dtype=np.int64)
        self.outage = np.zeros((n_ticks, n_cells), dtype=bool)
        self.handovers = np.zeros((n_ticks, len(CAUSE_INDEX)), dtype=np.int64)
        self.n = 0

    def __len__(self):
        return self.n

    def trimmed(self):
        out = copy.copy(self)
        for name in self.FIELDS + ("t", "handovers"):
            setattr(out, name, getattr(self, name)[: self.n])
        return out

    def records(self):
        """Iterate TickRecord views."""
        for k in range(self.n):
            yield TickRecord(
                t=int(self.t[k]),
                **{f: getattr(self, f)[k].copy() for f in self.FIELDS},
                handovers={c: int(self.handovers[k, i]) for c, i in CAUSE_INDEX.items()})


@dataclass
class TickRecord:
    t: int
    soc: np.ndarray
    e_g_wh: np.ndarray
    e_c_wh: np.ndarray
    prb_inst: np.ndarray
    prb_avg: np.ndarray
    ue_count: np.ndarray
    outage: np.ndarray
    handovers: dict


@dataclass
class RunResult:
    policy: str
    seed: int
    ticks: TickLog
    events: list
    cio_log: list
    index_rows: list
    cio_digests: list
    res_ids: list
    analyzed_ids: list
    is_res: list
    ledger: dict
    digest: str
    config: dict = field(repr=False, default_factory=dict)


@dataclass
class RunFailure:
    policy: str
    seed: int
    error: str


class UEStore:
    """Structure-of-arrays UE state with amortised growth."""

    def __init__(self, n_cells, cap=256):
        self.n = 0
        self.n_cells = n_cells
        self._alloc(cap)

    def _alloc(self, cap):
        c = self.n_cells
        self.cap = cap
        self.pos = np.zeros((cap, 2))
        self.target = np.zeros((cap, 2))
        self.speed = np.zeros(cap)
        self.demand = np.zeros(cap)
        self.serving = np.full(cap, -1, dtype=np.int64)
        self.attach_time = np.zeros(cap)
        self.shadow_z = np.zeros((cap, c))
        self.los_u = np.zeros((cap, c))
        self.measuring = np.zeros(cap, dtype=bool)
        self.ttt = np.zeros((cap, c), dtype=np.int64)
        self.prohibit_until = np.zeros(cap, dtype=np.int64)
        self.rsrp = np.full((cap, c), -np.inf)
        self.cqi = np.zeros(cap, dtype=np.int64)
        self.alloc = np.zeros(cap, dtype=np.int64)

    ARRAYS = ("pos", "target", "speed", "demand", "serving", "attach_time", "shadow_z",
              "los_u", "measuring", "ttt", "prohibit_until", "rsrp", "cqi", "alloc")

    def grow(self, extra):
        if self.n + extra <= self.cap:
            return
        old = {k: getattr(self, k) for k in self.ARRAYS}
        new_cap = self.cap
        while new_cap < self.n + extra:
            new_cap *= 2
        self._alloc(new_cap)
        for k, arr in old.items():
            getattr(self, k)[: self.n] = arr[: self.n]


class SimState:
    """Everything that evolves during one run."""

    def __init__(self, scenario, seed=None, policy=None):
        s = scenario
        problems = validate_scenario(s)
        if problems:
            raise SimError("invalid scenario: " + "; ".join(problems))
        self.scenario = s
        self.seed = s.sim.seed if seed is None else int(seed)
        self.policy = normalize_policy(policy or s.policy)
        self.tick = s.sim.tick_s
        self.t = 0
        self.rng = {name: make_rng(self.seed, name) for name in RNG_STREAMS}

        cells = sorted(s.cells, key=lambda c: c.id)
        self.cells = cells
        C = self.n_cells = len(cells)
        self.pos = np.array([c.position for c in cells], dtype=float)
        self.tx = np.array([c.tx_power_dbm for c in cells], dtype=float)
        self.carrier = np.array([c.carrier_ghz for c in cells], dtype=float)
        self.is_res = np.array([c.is_res for c in cells], dtype=bool)
        self.res_ids = [c.id for c in cells if c.is_res]
        self.power_models = [s.power_model_for(c) for c in cells]
        self.harvest = [s.sim.harvest_profiles[c.harvest] if c.is_res else None for c in cells]
        self.batteries = {c.id: Battery(c.initial_soc * c.battery_capacity_wh,
                                        c.battery_capacity_wh)
                          for c in cells if c.is_res}
        self.initial_wh = {k: b.e_wh for k, b in self.batteries.items()}
        self.sum_g = np.zeros(C)
        self.sum_c = np.zeros(C)
        self.e_g = np.zeros(C)
        self.e_c = np.zeros(C)
        self.outage = np.zeros(C, dtype=bool)
        self.prev_util = np.zeros(C)

        d = np.hypot(*(self.pos[:, None, :] - self.pos[None, :, :]).transpose(2, 0, 1))
        self.neighbors = {c: [int(n) for n in np.flatnonzero(
            (d[c] <= s.prlb.neighbor_radius_m) & (np.arange(C) != c))] for c in range(C)}

        tr = s.traffic
        self.grids = [PRBGrid(tr.total_prbs, tr.avg_window_s) for _ in range(C)]
        self.ues = UEStore(C)
        self.noise_dbm = noise_dbm(s.radio)

        self.cio_prlb = CIOTable(s.events.cio_cap_db)
        self.cio_ps = CIOTable(s.events.cio_cap_db)
        self.cio_eff = np.zeros((C, C))
        self.scale = np.ones(C)
        self.schedule = ep.PowerSavingSchedule()

        self.events = []
        self.cio_log = []
        self.index_rows = []
        self.cio_digests = []
        self.log = TickLog(s.sim.duration_s, C)
        self._ho_counts = np.zeros(len(CAUSE_INDEX), dtype=np.int64)

    # -- helpers ---------------------------------------------------------------

    def live(self):
        return ~self.outage

    def soc(self, c):
        b = self.batteries.get(c)
        return b.soc if b is not None else 1.0

    def _handover(self, ue, target, cause):
        u = self.ues
        source = int(u.serving[ue])
        ev = HandoverEvent(int(ue), source, int(target), self.t, cause)
        if source >= 0:
            self.grids[source].release(int(ue))
        u.alloc[ue] = 0
        u.serving[ue] = target
        u.ttt[ue] = 0
        u.prohibit_until[ue] = self.t + int(round(self.scenario.events.prohibit_s / self.tick))
        self.events.append(ev)
        self._ho_counts[CAUSE_INDEX[cause]] += 1

    def _detach(self, ue):
        u = self.ues
        source = int(u.serving[ue])
        if source >= 0:
            self.grids[source].release(int(ue))
        u.serving[ue] = -1
        u.alloc[ue] = 0
        u.ttt[ue] = 0
        self._ho_counts[CAUSE_INDEX["Detach"]] += 1

    # -- phases ----------------------------------------------------------------

    def phase_energy(self):
        s = self.scenario
        newly_depleted = []
        for c in range(self.n_cells):
            util = 0.0 if self.outage[c] else self.grids[c].instantaneous_utilization
            e_c = 0.0 if self.outage[c] else consumed_energy_wh(self.power_models[c], util, self.tick)
            e_g = 0.0
            if self.is_res[c]:
                e_g = harvested_energy_wh(self.harvest[c], self.t - self.tick, self.tick,
                                          self.rng["harvest"], s.sim.start_hour)
                b = update_soc(self.batteries[c], e_g, e_c)
                self.batteries[c] = b
                if b.depleted and not self.outage[c]:
                    newly_depleted.append(c)
                elif self.outage[c] and b.soc >= s.sim.restart_soc and b.e_wh > 0:
                    self.outage[c] = False
            self.e_g[c], self.e_c[c] = e_g, e_c
            self.sum_g[c] += e_g
            self.sum_c[c] += e_c
        return newly_depleted

    def phase_depletion(self, newly_depleted):
        for c in newly_depleted:
            self.outage[c] = True
            self.schedule.drop(c)
        for c in newly_depleted:
            for ue, target in handle_depletion(c, True, self.ues.serving[: self.ues.n],
                                               self.ues.rsrp[: self.ues.n], self.live()):
                if target is None:
                    self._detach(ue)
                else:
                    self._handover(ue, target, "Depletion")
            self.grids[c].allocated = {}
            self.grids[c].instantaneous_utilization = 0.0

    def phase_mobility(self):
        s, u = self.scenario, self.ues
        tr = s.traffic
        x0, y0, x1, y1 = s.sim.bounds
        n = u.n
        if n:
            u.pos[:n], arrived = move_towards(u.pos[:n], u.target[:n], u.speed[:n], self.tick)
            idx = np.flatnonzero(arrived)
            if len(idx):
                u.target[idx] = self.rng["mobility"].uniform((x0, y0), (x1, y1), size=(len(idx), 2))

        k = draw_arrivals(tr.arrival_rate, self.tick, self.rng["arrivals"])
        if not k:
            return
        u.grow(k)
        ra, rm, rd, rs = (self.rng[x] for x in ("arrivals", "mobility", "demand", "shadowing"))
        for _ in range(k):
            i = u.n
            if tr.hotspots and ra.random() < tr.hotspot_fraction:
                w = np.array([h.weight for h in tr.hotspots], dtype=float)
                h = tr.hotspots[int(np.searchsorted(np.cumsum(w / w.sum()), ra.random(), "right"))
                                if len(w) > 1 else 0]
                rad = h.radius_m * np.sqrt(ra.random())
                ang = 2 * np.pi * ra.random()
                p = (h.x + rad * np.cos(ang), h.y + rad * np.sin(ang))
                p = (min(max(p[0], x0), x1), min(max(p[1], y0), y1))
            else:
                p = tuple(ra.uniform((x0, y0), (x1, y1)))
            u.pos[i] = p
            probs = np.array([q for _, q in tr.speed_profiles], dtype=float)
            j = min(int(np.searchsorted(np.cumsum(probs), rm.random(), "right")), len(probs) - 1)
            u.speed[i] = tr.speed_profiles[j][0]
            u.target[i] = rm.uniform((x0, y0), (x1, y1))
            u.demand[i] = assign_demand(rd, tr.demand_profile)
            u.shadow_z[i] = rs.standard_normal(self.n_cells)
            u.los_u[i] = rs.random(self.n_cells)
            u.serving[i] = -1
            u.attach_time[i] = self.t
            u.n += 1

    def phase_radio(self):
        s, u = self.scenario, self.ues
        n = u.n
        if not n:
            return
        rp = s.radio
        dx = u.pos[:n, None, 0] - self.pos[None, :, 0]
        dy = u.pos[:n, None, 1] - self.pos[None, :, 1]
        d2 = np.hypot(dx, dy)
        d3 = np.sqrt(d2 ** 2 + (rp.h_bs_m - rp.h_ut_m) ** 2)
        if rp.los_mode == "AlwaysLOS":
            los = np.ones_like(d2, dtype=bool)
        else:
            los = u.los_u[:n] < los_probability(d2)
        pl = path_loss_db(np.maximum(d3, 1.0), self.carrier[None, :], los, rp)
        gain = gain_matrix_db(dx, dy, [c.sectors for c in self.cells], rp)
        sigma = np.where(los, rp.shadowing_sigma_los_db, rp.shadowing_sigma_nlos_db)
        rsrp = self.tx[None, :] + gain - pl - u.shadow_z[:n] * sigma
        if rp.fading_sigma_db > 0:
            rsrp = rsrp + rp.fading_sigma_db * self.rng["fading"].standard_normal(rsrp.shape)
        rsrp[:, self.outage] = -np.inf
        u.rsrp[:n] = rsrp
        self._d2 = d2

    def phase_events(self):
        s, u = self.scenario, self.ues
        n = u.n
        if not n:
            return
        cfg = s.events
        live = self.live()
        rsrp = u.rsrp[:n]
        # cell selection for detached and newly arrived UEs (no CIO in idle mode)
        if live.any():
            for i in np.flatnonzero(u.serving[:n] < 0):
                best = int(np.argmax(rsrp[i]))
                if np.isfinite(rsrp[i, best]):
                    u.serving[i] = best
                    u.ttt[i] = 0
                    u.measuring[i] = False

        att = np.flatnonzero(u.serving[:n] >= 0)
        if not len(att):
            return
        serv = u.serving[att]
        serv_rsrp = rsrp[att, serv]
        u.measuring[att] = update_measurement_gate(u.measuring[att], serv_rsrp, cfg)
        cio = self.cio_eff[serv]  # rows: offsets from each UE's serving cell
        cond = a3_condition(serv_rsrp[:, None], rsrp[att], cio, cfg)
        cond &= live[None, :]
        cond[np.arange(len(att)), serv] = False
        cond &= u.measuring[att][:, None]
        cond &= (u.prohibit_until[att] <= self.t)[:, None]
        new_ttt, fired = advance_ttt(u.ttt[att], cond, cfg.ttt_ticks(self.tick))
        u.ttt[att] = new_ttt
        for k in np.flatnonzero(fired.any(axis=1)):
            i = att[k]
            target = pick_candidate(np.flatnonzero(fired[k]).tolist(), rsrp[i], cio[k])
            self._handover(i, target, "A3")

    def phase_prlb_proactive(self):
        p = self.scenario.prlb
        live = self.live()
        util = [g.instantaneous_utilization for g in self.grids]
        for c in range(self.n_cells):
            nl = {n: util[n] for n in self.neighbors[c] if live[n]}
            avg = self.grids[c].sliding_average_utilization
            for pair, v in prlb.proactive_check(c, util[c], nl, self.cio_prlb, p, average=avg):
                apply_cio_update(self.cio_prlb, pair, v, self.t, "PRLB", self.cio_log)

    def phase_prlb_reactive(self):
        p = self.scenario.prlb
        if self.t % p.reactive_period_s:
            return
        live = self.live()
        avgs = {c: self.grids[c].sliding_average_utilization for c in range(self.n_cells)}
        nbrs = {c: [n for n in self.neighbors[c] if live[n]] for c in range(self.n_cells)}
        for pair, v in prlb.reactive_check(self.t, avgs, nbrs, self.cio_prlb, p):
            apply_cio_update(self.cio_prlb, pair, v, self.t, "PRLB", self.cio_log)

    def phase_eprlb(self):
        s, u = self.scenario, self.ues
        p = s.eprlb
        cfg = s.events
        res = self.res_ids
        if not res:
            return
        xi = ep.compute_xi([self.e_g[c] - self.e_c[c] for c in res], p)
        live = self.live()
        util = np.array([g.instantaneous_utilization for g in self.grids])
        for c in res:
            soc = self.soc(c)
            idx = ep.energy_index_components(soc, self.e_g[c], self.e_c[c], xi, p)
            self.scale[c] = idx.e if p.force_index is None else float(p.force_index)
            gamma = float("nan")
            before = self.schedule.lists_of(c)
            if not self.outage[c]:
                after = ep.update_schedule(self.schedule, c, soc, self.e_g[c], self.e_c[c],
                                           self.t, p, self.tick)
                if before is not None and after is None:
                    for (a, b) in sorted(self.cio_ps.values):
                        if b == c:
                            apply_cio_update(self.cio_ps, (a, b), 0.0, self.t, "EPRLB", self.cio_log)
                if (p.power_saving and ep.should_trigger(self.schedule, c, soc, self.t, p)
                        and self.e_c[c] > 0):
                    nb = [n for n in self.neighbors[c] if live[n]]
                    frac = ep.congested_fraction(util[nb], p)
                    gamma = ep.estimate_energy_reduction(soc, self.e_g[c], self.e_c[c], frac, p)
                    self._power_saving(c, gamma)
            self.index_rows.append((self.t, c, soc, idx.b, idx.a, idx.z, self.scale[c], gamma))

    def _power_saving(self, c, gamma):
        s, u = self.scenario, self.ues
        n = u.n
        ues = np.flatnonzero(u.serving[:n] == c)
        if gamma <= 0 or not len(ues):
            return
        alloc = np.array([self.grids[c].allocated.get(int(i), 0) for i in ues])
        res = ep.execute_power_saving(
            c, gamma, self.e_c[c], ues, alloc, self._d2[ues, c], u.rsrp[ues],
            self.live(), self.grids[c].total_prbs, self.power_models[c].delta_w, self.tick,
            s.events, s.prlb.bias_step_db)
        for ue, target in res.offloads:
            self._handover(ue, target, "PowerSaving")
        for pair, v in res.cio_updates:
            v = min(v, self.cio_ps.get(*pair))
            if v != self.cio_ps.get(*pair):
                apply_cio_update(self.cio_ps, pair, v, self.t, "EPRLB", self.cio_log)

    def refresh_effective_cio(self):
        C = self.n_cells
        if self.policy == "None":
            self.cio_eff = np.zeros((C, C))
            return
        m = self.cio_prlb.to_matrix(C)
        if self.policy == "EPRLB":
            m = m * self.scale[None, :] + self.cio_ps.to_matrix(C)
            cap = self.scenario.events.cio_cap_db
            m = np.clip(m, -cap, cap)
        self.cio_eff = m

    def phase_schedule(self):
        s, u = self.scenario, self.ues
        n = u.n
        tr = s.traffic
        serving = u.serving[:n]
        if n:
            activity = None
            if s.radio.interference_model == "LoadCoupled":
                activity = np.maximum(self.prev_util, s.radio.interference_floor)
            sinr = serving_sinr_db(u.rsrp[:n], serving, self.noise_dbm, activity)
            u.cqi[:n] = np.where(serving >= 0, cqi_from_sinr(np.maximum(sinr, -1e9)), 0)
        need = prb_need(u.demand[:n], u.cqi[:n], tr.scs_khz, tr.overhead)
        alloc = np.where(serving >= 0, need, 0)
        order = np.argsort(serving, kind="stable")  # ids ascending within each cell
        bounds = np.searchsorted(serving[order], np.arange(self.n_cells + 1))
        for c in range(self.n_cells):
            g = self.grids[c]
            ids = order[bounds[c]:bounds[c + 1]]
            if self.outage[c]:
                alloc[ids] = 0
            elif need[ids].sum() > g.total_prbs:
                alloc[ids] = round_robin(need[ids], g.total_prbs)
            a = alloc[ids]
            g.allocated = {int(i): int(x) for i, x in zip(ids[a > 0], a[a > 0])}
            g.instantaneous_utilization = float(a.sum()) / g.total_prbs
            update_average_load(g)
        u.alloc[:n] = alloc

    def phase_record(self):
        lg, k = self.log, self.log.n
        lg.t[k] = self.t
        for c in range(self.n_cells):
            lg.soc[k, c] = self.soc(c)
        lg.e_g_wh[k] = self.e_g
        lg.e_c_wh[k] = self.e_c
        lg.prb_inst[k] = [g.instantaneous_utilization for g in self.grids]
        self.prev_util = lg.prb_inst[k].copy()
        lg.prb_avg[k] = [g.sliding_average_utilization for g in self.grids]
        lg.ue_count[k] = np.bincount(self.ues.serving[: self.ues.n] + 1,
                                     minlength=self.n_cells + 1)[1:]
        lg.outage[k] = self.outage
        lg.handovers[k] = self._ho_counts
        self._ho_counts = np.zeros(len(CAUSE_INDEX), dtype=np.int64)
        self.cio_digests.append(hashlib.sha1(self.cio_eff.tobytes()).hexdigest()[:16])
        lg.n += 1


def step(state):
    """Advance ``state`` by one tick in place and return it."""
    state.t += state.tick
    depleted = state.phase_energy()
    state.phase_depletion(depleted)
    state.phase_mobility()
    state.phase_radio()
    state.phase_events()
    if state.policy in ("PRLB", "EPRLB"):
        state.phase_prlb_proactive()
        state.phase_prlb_reactive()
    if state.policy == "EPRLB":
        state.phase_eprlb()
    state.refresh_effective_cio()
    state.phase_schedule()
    state.phase_record()
    return state


def _digest(state, ticks):
    h = hashlib.sha256()
    for name in TickLog.FIELDS + ("t", "handovers"):
        h.update(np.ascontiguousarray(getattr(ticks, name)).tobytes())
    for ev in state.events:
        h.update(f"{ev.tick},{ev.ue},{ev.source},{ev.target},{ev.cause};".encode())
    for up in state.cio_log:
        h.update(f"{up.tick},{up.source},{up.target},{up.cio_db!r},{up.policy};".encode())
    u = state.ues
    for arr in (u.pos[: u.n], u.serving[: u.n], u.demand[: u.n], state.cio_eff):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


def run(scenario, seed=None, policy=None):
    """Execute a full run; ``seed``/``policy`` override the scenario's."""
    state = SimState(scenario, seed, policy)
    n_steps = scenario.sim.duration_s // scenario.sim.tick_s
    try:
        for _ in range(n_steps):
            step(state)
    except SimError:
        raise
    except Exception as exc:
        raise SimError(f"run failed at t={state.t} (policy={state.policy}, "
                       f"seed={state.seed}): {exc!r}") from exc
    ticks = state.log.trimmed()
    ledger = {c: {"initial_wh": state.initial_wh[c],
                  "harvested_wh": float(state.sum_g[c]),
                  "consumed_wh": float(state.sum_c[c]),
                  "spilled_wh": b.spilled_wh,
                  "deficit_wh": b.deficit_wh,
                  "final_wh": b.e_wh}
              for c, b in state.batteries.items()}
    return RunResult(
        policy=state.policy, seed=state.seed, ticks=ticks, events=state.events,
        cio_log=state.cio_log, index_rows=state.index_rows, cio_digests=state.cio_digests,
        res_ids=list(state.res_ids), analyzed_ids=scenario.analyzed_ids,
        is_res=[bool(x) for x in state.is_res], ledger=ledger,
        digest=_digest(state, ticks), config=scenario_to_dict(scenario))


def _run_one(args):
    scenario, seed, policy = args
    try:
        return run(scenario, seed, policy)
    except Exception as exc:  # reported per run, siblings keep going
        return RunFailure(normalize_policy(policy), seed, f"{type(exc).__name__}: {exc}")


def run_batch(scenario, seeds, policies, workers=1):
    """All seed x policy runs, in input order (seed-major)."""
    seeds, policies = list(seeds), list(policies)
    if not seeds or not policies:
        raise ValueError("run_batch needs at least one seed and one policy")
    jobs = [(scenario, sd, normalize_policy(p)) for sd in seeds for p in policies]
    if workers <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def with_policy(scenario, policy):
    return replace(scenario, policy=normalize_policy(policy))
