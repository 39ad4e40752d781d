import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from reslb.eprlb import (EnergyIndex, EnergyIndexParams, PowerSavingSchedule, compute_xi,
                         congested_fraction, energy_index, energy_index_components,
                         estimate_energy_reduction, execute_power_saving, midrange_attenuation,
                         net_power_adaptation, psi, scale_cios, should_trigger, soc_bias,
                         update_schedule)
from reslb.errors import DomainError
from reslb.mobility import CIOTable, EventConfig

P = EnergyIndexParams()
mp.mp.dps = 40


def mp_index(s, diff_over_xi, p=P):
    s = mp.mpf(s)
    m, r = mp.mpf(p.s_h + p.s_l) / 2, mp.mpf(p.s_h - p.s_l)
    b = 2 / (1 + mp.e ** (-p.k_soc * (s - m) / r)) - 1
    a = p.beta * mp.tanh(diff_over_xi)
    z = 1 - p.lam * mp.e ** (-(s - p.mu) ** 2 / (2 * mp.mpf(p.sigma_g) ** 2))
    return b, a, z, max(-1, min(1, (b + a) * z))


def test_golden_values_against_high_precision():
    b, a, z, e = mp_index(0.2, 0)
    assert soc_bias(0.2, P) == pytest.approx(float(b), abs=1e-12)
    assert soc_bias(0.2, P) == pytest.approx(-0.905148, abs=1e-6)
    assert net_power_adaptation(1.5, 1.0, 0.5, P) == pytest.approx(float(P.beta * mp.tanh(1)), abs=1e-12)
    assert net_power_adaptation(1.5, 1.0, 0.5, P) == pytest.approx(0.380797, abs=1e-6)
    assert midrange_attenuation(0.35, P) == 0.7
    assert energy_index(0.2, 1.0, 1.0, 1.0, P) == pytest.approx(float(e), abs=1e-12)
    assert energy_index(0.2, 1.0, 1.0, 1.0, P) == pytest.approx(-0.780826, abs=1e-6)
    assert midrange_attenuation(0.2, P) == pytest.approx(0.862650, abs=1e-6)
    assert midrange_attenuation(0.95, P) == pytest.approx(0.999999, abs=1e-6)
    assert psi(1.7) == 1.0 and psi(-1.7) == -1.0


def test_simple_identities():
    assert soc_bias(P.m, P) == 0.0
    assert net_power_adaptation(2.0, 2.0, 1.0, P) == 0.0
    assert compute_xi([0.1, -0.4, 0.2], P) == 0.4
    assert compute_xi([0, 0], P) == P.xi_floor
    assert compute_xi([], P) == P.xi_floor


@given(st.floats(0, 0.1))
def test_symmetries(d):
    assert soc_bias(P.m + d, P) == pytest.approx(-soc_bias(P.m - d, P), abs=1e-12)
    assert midrange_attenuation(P.mu + d, P) == pytest.approx(midrange_attenuation(P.mu - d, P), abs=1e-12)


@given(st.floats(0, 1), st.floats(0, 10), st.floats(0, 10), st.floats(1e-6, 10))
def test_component_bounds(s, g, c, xi):
    idx = energy_index_components(s, g, c, xi, P)
    assert -1 < idx.b < 1
    assert abs(idx.a) <= P.beta
    assert 1 - P.lam <= idx.z <= 1
    assert -1 <= idx.e <= 1


def test_index_matches_oracle_on_grid():
    for s in np.linspace(0, 1, 21):
        for q in (-3, -1, -0.2, 0, 0.5, 2):
            e = energy_index(s, 1.0 + q, 1.0, 1.0, P)
            assert e == pytest.approx(float(mp_index(s, q)[3]), abs=1e-12)


def test_scale_cios():
    t = CIOTable(values={(0, 3): 4.0, (0, 1): 4.0, (1, 3): -2.0})
    out = scale_cios(t, [3], {3: -0.78})
    assert out.get(0, 3) == pytest.approx(-3.12)
    assert out.get(0, 1) == 4.0
    assert out.get(1, 3) == pytest.approx(1.56)
    assert scale_cios(t, [3], {3: 0.0}).get(0, 3) == 0.0
    assert scale_cios(t, [3], {3: EnergyIndex(0, 0, 1, 1.0)}) == t


def test_gamma_examples():
    assert estimate_energy_reduction(0.08, 0, 10, 0.0, P) == 0.75
    assert estimate_energy_reduction(0.25, 8, 10, 0.0, P) == pytest.approx(0.2)
    assert estimate_energy_reduction(0.15, 2, 10, 0.7, P) == pytest.approx(0.4125)
    assert estimate_energy_reduction(0.45, 0, 10, 0.0, P) == 0.0
    with pytest.raises(DomainError):
        estimate_energy_reduction(0.1, 1, 0, 0.0, P)


def test_congested_fraction():
    assert congested_fraction([0.9, 0.9, 0.1], P) == pytest.approx(2 / 3)
    assert congested_fraction([], P) == 0.0


def test_schedule_examples():
    T = P.t_interval_s
    sc = PowerSavingSchedule()
    for t in range(1, T):
        assert update_schedule(sc, 0, 0.35, 0.0, 1.0, t, P) is None
    assert update_schedule(sc, 0, 0.35, 0.0, 1.0, T, P) == "interval"
    # dropping below the mid-point moves it after T/2 sustained ticks
    for t in range(T + 1, T + T // 2):
        assert update_schedule(sc, 0, 0.25, 0.0, 1.0, t, P) == "interval"
    assert update_schedule(sc, 0, 0.25, 0.0, 1.0, T + T // 2, P) == "half"
    # surplus removes it on the next evaluation
    assert update_schedule(sc, 0, 0.25, 2.0, 1.0, T + T // 2 + 1, P) is None
    assert sc.lists_of(0) is None


def test_trigger_gates():
    sc = PowerSavingSchedule()
    assert should_trigger(sc, 0, 0.15, 17, P)
    sc.interval_list.add(1)
    assert should_trigger(sc, 1, 0.35, 60, P) and not should_trigger(sc, 1, 0.35, 61, P)
    sc.half_interval_list.add(2)
    assert should_trigger(sc, 2, 0.25, 30, P) and not should_trigger(sc, 2, 0.25, 31, P)
    assert not should_trigger(sc, 3, 0.25, 60, P)


CFG = EventConfig()


def _ps(gamma, alloc, live=(True, True, True), dist=None):
    n = len(alloc)
    ids = np.arange(10, 10 + n)
    dist = dist if dist is not None else np.full(n, 100.0)
    rsrp = np.tile([-60.0, -70.0, -75.0], (n, 1))
    # e_c such that each PRB-share is a clean fraction of consumption
    return execute_power_saving(0, gamma, 1.0, ids, alloc, dist, rsrp, np.array(live), 100,
                                360.0, 1, CFG)


def test_power_saving_stop_rule():
    # one UE holding 10 of 100 PRBs at 360 W load slope releases 0.01 Wh per tick
    r = _ps(0.01, [10, 10, 10])
    assert len(r.offloads) == 1 and r.released_wh == pytest.approx(0.01) and not r.partial
    r = _ps(0.0100001, [10, 10, 10])
    assert len(r.offloads) == 2
    r = _ps(0.0, [10, 10])
    assert r.offloads == [] and r.cio_updates == []


def test_power_saving_order_and_cio():
    r = _ps(0.01, [10, 10, 10], dist=np.array([50.0, 150.0, 100.0]))
    assert r.offloads == [(11, 1)]  # furthest of equal loads goes first
    (pair, v), = r.cio_updates
    assert pair == (1, 0) and v < 0
    # UE returns from 1 to 0 once -60 + cio > -70 + 3 + 1, i.e. cio > -6; one step past
    assert v == -8.0


def test_power_saving_no_targets():
    r = _ps(0.5, [10, 10], live=(True, False, False))
    assert r.offloads == [] and r.partial
