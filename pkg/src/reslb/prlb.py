"""Proactive-reactive load balancing baseline.

Both checks see loads and the neighbor map only; nothing here reads battery
or harvest state.  Updates are returned as ``((source, target), cio_db)``
pairs for the caller to apply to the PRLB bias layer.
"""

from dataclasses import dataclass


@dataclass
class PRLBParams:
    proactive_prb_threshold: float = 0.98
    reactive_avg_threshold: float = 0.65
    reactive_period_s: int = 240
    bias_step_db: float = 2.0
    bias_cap_db: float = 6.0
    neighbor_radius_m: float = 250.0


def _raise_toward_lighter(cell, load, neighbor_loads, table, params):
    out = []
    for n in sorted(neighbor_loads):
        if neighbor_loads[n] < load:
            cur = table.get(cell, n)
            new = min(cur + params.bias_step_db, params.bias_cap_db)
            if new != cur:
                out.append(((cell, n), new))
    return out


def _decay(cell, table, params):
    out = []
    for (s, t), cur in sorted(table.pairs_from(cell).items()):
        step = min(params.bias_step_db, abs(cur))
        out.append(((s, t), cur - step if cur > 0 else cur + step))
    return out


def proactive_check(cell, utilization, neighbor_utilization, table, params, average=None):
    """Instantaneous-load trigger for one cell.

    Above the threshold every less-loaded neighbor gets one more bias step.
    Otherwise the cell's outgoing biases decay by one step, unless its
    sliding average still sits above the reactive threshold (the reactive
    trigger owns those biases until the average recovers).
    """
    if utilization > params.proactive_prb_threshold:
        return _raise_toward_lighter(cell, utilization, neighbor_utilization, table, params)
    if average is not None and average > params.reactive_avg_threshold:
        return []
    return _decay(cell, table, params)


def reactive_check(t_s, averages, neighbors, table, params):
    """Periodic average-load trigger over all cells.

    ``averages`` maps cell -> sliding-average utilization and ``neighbors``
    maps cell -> iterable of neighbor ids.
    """
    if t_s % params.reactive_period_s != 0:
        return []
    out = []
    for c in sorted(averages):
        if averages[c] > params.reactive_avg_threshold:
            nl = {n: averages[n] for n in neighbors.get(c, ())}
            out.extend(_raise_toward_lighter(c, averages[c], nl, table, params))
    return out
