import numpy as np
import pytest

from reslb.errors import TargetUnavailable
from reslb.mobility import (FIRED, IDLE, RUNNING, CIOTable, EventConfig, a3_condition,
                            advance_ttt, apply_cio_update, execute_handover, pick_candidate,
                            tick_ttt, update_measurement_gate)
from reslb.traffic import PRBGrid, UESession


def ue():
    return UESession(1, (0, 0), (0, 0), 0.0, 1.0, serving_cell=0)


def test_a3_examples():
    cfg = EventConfig(a3_offset_db=3, hysteresis_db=0)
    assert not a3_condition(-95, -92, 0, cfg)
    assert a3_condition(-95, -91, 0, cfg)
    assert a3_condition(-95, -95, 6, EventConfig(a3_offset_db=3, hysteresis_db=1))


def test_ttt_rounds_up_to_whole_ticks():
    assert EventConfig(ttt_s=0.64).ttt_ticks(1.0) == 1
    assert EventConfig(ttt_s=3.0).ttt_ticks(1.0) == 3
    assert EventConfig(ttt_s=2.5).ttt_ticks(1.0) == 3


def test_ttt_sequences():
    cfg = EventConfig(ttt_s=3)
    u = ue()
    assert tick_ttt(u, 2, True, cfg) == (RUNNING, 1)
    assert tick_ttt(u, 2, True, cfg) == (RUNNING, 2)
    assert tick_ttt(u, 2, True, cfg) == FIRED
    u = ue()
    tick_ttt(u, 2, True, cfg)
    tick_ttt(u, 2, True, cfg)
    assert tick_ttt(u, 2, False, cfg) == IDLE
    u = ue()
    out = [tick_ttt(u, 2, k % 2 == 0, cfg) for k in range(20)]
    assert FIRED not in out


def test_advance_ttt_vector():
    el = np.array([0, 1, 2])
    el, fired = advance_ttt(el, np.array([True, False, True]), 3)
    assert el.tolist() == [1, 0, 0] and fired.tolist() == [False, False, True]


def test_measurement_gate():
    cfg = EventConfig(a1_threshold_dbm=-100, a2_threshold_dbm=-110)
    m = update_measurement_gate(np.array([False, False, True, True]),
                                np.array([-115, -105, -105, -95.0]), cfg)
    assert m.tolist() == [True, False, True, False]
    assert update_measurement_gate(np.array([False]), np.array([-50.0]),
                                   EventConfig(measurement_gating=False)).tolist() == [True]


def test_pick_candidate_ties_lowest_id():
    rsrp = np.array([-80, -70, -72, -70.0])
    cio = np.array([0, 0, 2, 0.0])
    assert pick_candidate([3, 1, 2], rsrp, cio) == 1


def test_execute_handover():
    g = {0: PRBGrid(10), 1: PRBGrid(10)}
    g[0].allocated = {1: 5}
    g[0].instantaneous_utilization = 0.5
    u = ue()
    ev = execute_handover(u, 1, "A3", tick=4, grids=g)
    assert (ev.source, ev.target, ev.cause, u.serving_cell) == (0, 1, "A3", 1)
    assert g[0].allocated == {} and g[0].instantaneous_utilization == 0
    assert execute_handover(u, 0, "PowerSaving").cause == "PowerSaving"
    with pytest.raises(TargetUnavailable):
        execute_handover(u, 1, "A3", outage={1: True})


def test_cio_table_updates():
    t = CIOTable(9.0)
    log = []
    apply_cio_update(t, (0, 1), 12, 3, "PRLB", log)
    assert t.get(0, 1) == 9.0 and log[0].cio_db == 9.0
    apply_cio_update(t, (0, 1), -4)
    assert t.get(0, 1) == -4
    apply_cio_update(t, (0, 1), 0)
    assert (0, 1) not in t.values and t == CIOTable(9.0)
    apply_cio_update(t, (2, 1), -20)
    assert t.to_matrix(3)[2, 1] == -9.0
