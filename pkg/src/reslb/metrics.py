"""Figures of merit and file output for simulation runs.

Files written by :func:`emit`:

``ticks.csv``        ``t,cell_id,is_res,soc,e_g_wh,e_c_wh,prb_inst,prb_avg,ue_count,outage``
``events.csv``       ``t,ue_id,source,target,cause``
``cio_updates.csv``  ``t,source,target,cio_db,policy``
``indices.csv``      ``t,cell_id,soc,b,a,z,e,gamma`` (optional)
``summary.json``     run summary (see :func:`run_summary`)

Grid-powered cells report SoC 1.0.
"""

import csv
import json
import math
import os
from collections import defaultdict

import numpy as np

from .errors import IoError, PairingError, RangeError

TICKS_HEADER = ["t", "cell_id", "is_res", "soc", "e_g_wh", "e_c_wh",
                "prb_inst", "prb_avg", "ue_count", "outage"]
EVENTS_HEADER = ["t", "ue_id", "source", "target", "cause"]
CIO_HEADER = ["t", "source", "target", "cio_db", "policy"]
INDICES_HEADER = ["t", "cell_id", "soc", "b", "a", "z", "e", "gamma"]
HANDOVER_CAUSES = ("A3", "PowerSaving", "Depletion", "Detach")


def _log(x):
    """Accept a RunResult or its TickLog."""
    return x.ticks if hasattr(x, "ticks") and hasattr(x, "policy") else x


def _check_ids(ticks, ids):
    ids = list(ids)
    if not ids:
        raise RangeError("cell id list must be non-empty", "cell_ids")
    n = ticks.soc.shape[1]
    bad = [i for i in ids if not 0 <= i < n]
    if bad:
        raise RangeError(f"unknown cell ids {bad}", "cell_ids")
    return ids


def mean_soc_trace(ticks, res_cell_ids, include_outage=True):
    """Per-tick mean SoC over the listed cells.

    With ``include_outage=False`` cells in outage are left out of each
    tick's mean (NaN when every listed cell is out).
    """
    ticks = _log(ticks)
    ids = _check_ids(ticks, res_cell_ids)
    soc = ticks.soc[:, ids]
    if include_outage:
        return soc.mean(axis=1)
    live = ~ticks.outage[:, ids]
    cnt = live.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(cnt > 0, (soc * live).sum(axis=1) / np.maximum(cnt, 1), np.nan)


def aggregated_prb_index(ticks, cell_ids):
    """Per-tick mean instantaneous PRB utilization over the listed cells."""
    ticks = _log(ticks)
    ids = _check_ids(ticks, cell_ids)
    return ticks.prb_inst[:, ids].mean(axis=1)


def prb_index_split(ticks, cell_ids, is_res):
    """Aggregated index for the listed cells and their RES / non-RES parts."""
    ticks = _log(ticks)
    ids = _check_ids(ticks, cell_ids)
    res = [c for c in ids if is_res[c]]
    non = [c for c in ids if not is_res[c]]
    out = {"all": aggregated_prb_index(ticks, ids)}
    out["res"] = aggregated_prb_index(ticks, res) if res else None
    out["non_res"] = aggregated_prb_index(ticks, non) if non else None
    return out


def low_soc_mask(ticks, res_cell_ids, s_h=0.4):
    """Ticks at which at least one listed cell has SoC <= s_h."""
    ticks = _log(ticks)
    ids = _check_ids(ticks, res_cell_ids)
    return (ticks.soc[:, ids] <= s_h).any(axis=1)


def _mean_or_nan(x):
    x = np.asarray(x, dtype=float)
    return float(x.mean()) if x.size else float("nan")


def run_summary(result, s_h=0.4):
    t = result.ticks
    res = result.res_ids
    analyzed = result.analyzed_ids or list(range(t.soc.shape[1]))
    out = {
        "policy": result.policy,
        "seed": result.seed,
        "digest": result.digest,
        "ticks": len(t),
        "handovers": {c: int(t.handovers[:, i].sum()) for i, c in enumerate(HANDOVER_CAUSES)},
        "mean_prb_index": float(aggregated_prb_index(t, analyzed).mean()),
    }
    split = prb_index_split(t, analyzed, result.is_res)
    out["mean_prb_index_res"] = float(split["res"].mean()) if split["res"] is not None else None
    out["mean_prb_index_non_res"] = (float(split["non_res"].mean())
                                     if split["non_res"] is not None else None)
    if res:
        mask = low_soc_mask(t, res, s_h)
        out["final_mean_soc"] = float(mean_soc_trace(t, res)[-1])
        out["final_mean_soc_excl_outage"] = float(mean_soc_trace(t, res, False)[-1])
        out["low_soc_ticks"] = int(mask.sum())
        out["res_prb_index_low_soc"] = _mean_or_nan(aggregated_prb_index(t, res)[mask])
        out["ledger"] = {str(k): v for k, v in result.ledger.items()}
    if result.config:
        out["config"] = result.config
    return out


def _stats(values):
    a = np.asarray(values, dtype=float)
    return {"mean": float(np.mean(a)), "std": float(np.std(a)),
            "per_seed": [float(x) for x in a]}


def policy_comparison(results, baseline="None", s_h=0.4):
    """Summarise paired runs per policy and their deltas against ``baseline``.

    ``results`` is either a list of RunResult or a mapping policy -> list.
    SoC deltas are given both in percentage points and in relative percent.
    """
    groups = defaultdict(list)
    if isinstance(results, dict):
        for p, rs in results.items():
            groups[p].extend(rs)
    else:
        for r in results:
            groups[r.policy].append(r)
    seed_sets = {p: sorted(r.seed for r in rs) for p, rs in groups.items()}
    if len({tuple(v) for v in seed_sets.values()}) > 1:
        raise PairingError(f"seed sets differ across policies: {seed_sets}")

    policies = {}
    for p in sorted(groups, key=lambda k: ("None", "PRLB", "EPRLB").index(k)
                    if k in ("None", "PRLB", "EPRLB") else 9):
        rs = sorted(groups[p], key=lambda r: r.seed)
        sums = [run_summary(r, s_h) for r in rs]
        entry = {
            "seeds": [r.seed for r in rs],
            "mean_prb_index": _stats([s["mean_prb_index"] for s in sums]),
            "handovers_mean": {c: float(np.mean([s["handovers"][c] for s in sums]))
                               for c in HANDOVER_CAUSES},
        }
        if sums and "final_mean_soc" in sums[0]:
            entry["final_mean_soc"] = _stats([s["final_mean_soc"] for s in sums])
            entry["final_mean_soc_excl_outage"] = _stats(
                [s["final_mean_soc_excl_outage"] for s in sums])
            entry["mean_prb_index_res"] = _stats([s["mean_prb_index_res"] for s in sums])
            entry["mean_prb_index_non_res"] = _stats([s["mean_prb_index_non_res"] for s in sums])
            entry["res_prb_index_low_soc"] = _stats([s["res_prb_index_low_soc"] for s in sums])
        policies[p] = entry

    deltas = {}
    if baseline in policies and "final_mean_soc" in policies[baseline]:
        base = policies[baseline]["final_mean_soc"]["mean"]
        for p, e in policies.items():
            v = e["final_mean_soc"]["mean"]
            deltas[p] = {
                "final_mean_soc_pp": 100.0 * (v - base),
                "final_mean_soc_rel_pct": 100.0 * (v - base) / base if base else float("nan"),
                "mean_prb_index_diff": e["mean_prb_index"]["mean"]
                - policies[baseline]["mean_prb_index"]["mean"],
            }
    ordering = sorted((p for p in policies if "final_mean_soc" in policies[p]),
                      key=lambda p: -policies[p]["final_mean_soc"]["mean"])
    return {"baseline": baseline, "policies": policies, "deltas_vs_baseline": deltas,
            "final_mean_soc_ordering": ordering}


# -- output ----------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serialisable: {type(o)}")


def _clean_json(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean_json(v) for v in obj]
    return obj


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_clean_json(obj), fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _ensure_dir(out_dir):
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output directory {out_dir}: {exc.strerror}") from exc
    if not os.access(out_dir, os.W_OK):
        raise IoError(f"output directory {out_dir} is not writable")


def tick_rows(result):
    t = result.ticks
    n_cells = t.soc.shape[1]
    for k in range(len(t)):
        for c in range(n_cells):
            yield (t.t[k], c, result.is_res[c], t.soc[k, c], t.e_g_wh[k, c], t.e_c_wh[k, c],
                   t.prb_inst[k, c], t.prb_avg[k, c], t.ue_count[k, c], t.outage[k, c])


def emit(result, out_dir, dump_indices=False):
    """Write one run's CSV files and summary.json; returns the paths."""
    _ensure_dir(out_dir)
    paths = {name: os.path.join(out_dir, name) for name in
             ("ticks.csv", "events.csv", "cio_updates.csv", "summary.json")}
    try:
        _write_csv(paths["ticks.csv"], TICKS_HEADER, tick_rows(result))
        _write_csv(paths["events.csv"], EVENTS_HEADER,
                   ((e.tick, e.ue, e.source, e.target, e.cause) for e in result.events))
        _write_csv(paths["cio_updates.csv"], CIO_HEADER,
                   ((u.tick, u.source, u.target, u.cio_db, u.policy) for u in result.cio_log))
        write_json(paths["summary.json"], run_summary(result))
        if dump_indices:
            paths["indices.csv"] = os.path.join(out_dir, "indices.csv")
            _write_csv(paths["indices.csv"], INDICES_HEADER,
                       (("" if isinstance(v, float) and math.isnan(v) else v for v in row)
                        for row in result.index_rows))
    except OSError as exc:
        raise IoError(f"cannot write to {out_dir}: {exc.strerror}") from exc
    return paths


def emit_summary(summary, out_dir, name="summary.json"):
    _ensure_dir(out_dir)
    path = os.path.join(out_dir, name)
    try:
        write_json(path, summary)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def read_ticks_csv(path):
    """Parse ticks.csv back into typed rows (dicts)."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append({
                "t": int(row["t"]), "cell_id": int(row["cell_id"]),
                "is_res": row["is_res"] == "1", "soc": float(row["soc"]),
                "e_g_wh": float(row["e_g_wh"]), "e_c_wh": float(row["e_c_wh"]),
                "prb_inst": float(row["prb_inst"]), "prb_avg": float(row["prb_avg"]),
                "ue_count": int(row["ue_count"]), "outage": row["outage"] == "1",
            })
    return out
