import os
import types

import numpy as np
import pytest
from hypothesis import given, strategies as st

from reslb.engine import TickLog, run
from reslb.errors import IoError, PairingError, RangeError
from reslb.metrics import (TICKS_HEADER, aggregated_prb_index, emit, mean_soc_trace,
                           policy_comparison, prb_index_split, read_ticks_csv)


def log_with(soc, prb):
    soc, prb = np.asarray(soc, float), np.asarray(prb, float)
    lg = TickLog(*soc.shape)
    lg.soc[:], lg.prb_inst[:] = soc, prb
    lg.t[:] = np.arange(1, soc.shape[0] + 1)
    lg.n = soc.shape[0]
    return lg


def test_mean_soc_trace():
    lg = log_with([[0.3, 0.5], [0.3, 0.5], [0.3, 0.5]], np.zeros((3, 2)))
    assert mean_soc_trace(lg, [0]).tolist() == [0.3] * 3
    assert mean_soc_trace(lg, [0, 1]) == pytest.approx([0.4] * 3)
    with pytest.raises(RangeError):
        mean_soc_trace(lg, [5])
    with pytest.raises(RangeError):
        mean_soc_trace(lg, [])


def test_mean_soc_excluding_outage():
    lg = log_with([[0.0, 0.5], [0.0, 0.0]], np.zeros((2, 2)))
    lg.outage[:, 0] = True
    lg.outage[1, 1] = True
    out = mean_soc_trace(lg, [0, 1], include_outage=False)
    assert out[0] == 0.5 and np.isnan(out[1])


def test_prb_index():
    assert aggregated_prb_index(log_with(np.ones((4, 3)), np.zeros((4, 3))), [0, 1, 2]).tolist() == [0] * 4
    assert aggregated_prb_index(log_with(np.ones((4, 3)), np.ones((4, 3))), [0, 2]).tolist() == [1] * 4


@given(st.lists(st.floats(0, 1), min_size=5, max_size=5))
def test_subset_means_recombine(row):
    lg = log_with(np.ones((1, 5)), [row])
    sp = prb_index_split(lg, range(5), [True, False, True, False, False])
    assert (2 * sp["res"][0] + 3 * sp["non_res"][0]) / 5 == pytest.approx(sp["all"][0], abs=1e-12)


@pytest.fixture(scope="module")
def runs(request):
    sc = request.getfixturevalue("short_desk")
    return {p: [run(sc, s, p) for s in (0, 1)] for p in ("None", "PRLB", "EPRLB")}


def test_policy_comparison(runs):
    s = policy_comparison(runs)
    assert set(s["policies"]) == {"None", "PRLB", "EPRLB"}
    assert s["deltas_vs_baseline"]["None"]["final_mean_soc_pp"] == 0
    assert sorted(s["final_mean_soc_ordering"]) == ["EPRLB", "None", "PRLB"]
    one = policy_comparison({"None": runs["None"][:1], "PRLB": runs["PRLB"][:1]})
    assert one["policies"]["PRLB"]["final_mean_soc"]["std"] == 0
    with pytest.raises(PairingError):
        policy_comparison({"None": runs["None"], "PRLB": runs["PRLB"][:1]})


def test_self_comparison_zero_delta(runs):
    s = policy_comparison({"None": runs["PRLB"]}, baseline="None")
    d = s["deltas_vs_baseline"]["None"]
    assert d["final_mean_soc_pp"] == 0 and d["final_mean_soc_rel_pct"] == 0


def test_emit_round_trip_and_bytes(runs, tmp_path):
    r = runs["EPRLB"][0]
    a, b = tmp_path / "a", tmp_path / "b"
    emit(r, a, dump_indices=True)
    emit(r, b, dump_indices=True)
    for name in ("ticks.csv", "events.csv", "cio_updates.csv", "summary.json", "indices.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    rows = read_ticks_csv(a / "ticks.csv")
    n_cells = r.ticks.soc.shape[1]
    assert len(rows) == len(r.ticks) * n_cells
    assert (a / "ticks.csv").read_text().splitlines()[0] == ",".join(TICKS_HEADER)
    for k in (0, 57, len(rows) - 1):
        row = rows[k]
        t, c = row["t"] - 1, row["cell_id"]
        assert row["soc"] == r.ticks.soc[t, c]
        assert row["prb_inst"] == r.ticks.prb_inst[t, c]
        assert row["ue_count"] == r.ticks.ue_count[t, c]
        assert row["is_res"] == r.is_res[c]


def test_emit_unwritable(runs, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(IoError) as e:
        emit(runs["None"][0], os.path.join(blocker, "sub"))
    assert str(blocker) in str(e.value)
