"""UMi street-canyon propagation, sector antennas, SINR and CQI mapping.

Path loss follows 3GPP TR 38.901 Table 7.4.1-1 (UMi Street Canyon).  All
functions accept numpy arrays as well as scalars so the engine can evaluate
every UE/cell link in one call.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import RangeError

SPEED_OF_LIGHT = 3.0e8
EFFECTIVE_ENV_HEIGHT_M = 1.0
THERMAL_NOISE_DBM_HZ = -174.0

# Minimum SINR (dB) needed for CQI 1..15, 4-bit CQI table 1 (TS 38.214 5.2.2.1-2).
CQI_SINR_THRESHOLDS_DB = np.array([
    -6.7, -4.7, -2.3, 0.2, 2.4, 4.3, 5.9, 8.1,
    10.3, 11.7, 14.1, 16.3, 18.7, 21.0, 22.7,
])

# Spectral efficiency (bits per resource element) for CQI 0..15.
CQI_EFFICIENCY = np.array([
    0.0, 0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766,
    1.9141, 2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547,
])

LOS_MODES = ("AlwaysLOS", "DistanceProbability")
INTERFERENCE_MODELS = ("FullLoad", "LoadCoupled")


@dataclass
class PropagationParams:
    h_bs_m: float = 10.0
    h_ut_m: float = 1.5
    shadowing_sigma_los_db: float = 4.0
    shadowing_sigma_nlos_db: float = 7.82
    noise_figure_db: float = 9.0
    bandwidth_hz: float = 98.28e6  # 273 PRBs x 12 subcarriers x 30 kHz
    los_mode: str = "AlwaysLOS"
    fading_sigma_db: float = 0.0
    antenna_gain_dbi: float = 8.0
    beamwidth_3db_deg: float = 65.0
    front_to_back_db: float = 30.0
    # LoadCoupled weights each interferer by its last PRB utilization
    interference_model: str = "FullLoad"
    interference_floor: float = 0.1


@dataclass
class RadioSample:
    """One UE's measurement snapshot."""
    rsrp_dbm: dict = field(default_factory=dict)
    sinr_db: float = 0.0
    cqi: int = 0


def breakpoint_distance_m(carrier_ghz, p):
    h_bs = p.h_bs_m - EFFECTIVE_ENV_HEIGHT_M
    h_ut = p.h_ut_m - EFFECTIVE_ENV_HEIGHT_M
    return 4.0 * h_bs * h_ut * carrier_ghz * 1e9 / SPEED_OF_LIGHT


def path_loss_db(distance_3d_m, carrier_ghz, los, p):
    """UMi street-canyon path loss in dB.

    ``los`` may be a boolean array broadcastable against ``distance_3d_m``.
    NLOS links take ``max(PL_LOS, PL'_NLOS)``.
    """
    d = np.asarray(distance_3d_m, dtype=float)
    if np.any(d < 1.0):
        raise RangeError("distance_3d_m below 1 m model floor", "distance_3d_m")
    carrier_ghz = np.asarray(carrier_ghz, dtype=float)
    if np.any(carrier_ghz <= 0.5) or np.any(carrier_ghz >= 100.0):
        raise RangeError(f"carrier {carrier_ghz} GHz outside (0.5, 100)", "carrier_ghz")
    fc_term = 20.0 * np.log10(carrier_ghz)
    d_bp = breakpoint_distance_m(carrier_ghz, p)
    pl1 = 32.4 + 21.0 * np.log10(d) + fc_term
    pl2 = (32.4 + 40.0 * np.log10(d) + fc_term
           - 9.5 * np.log10(d_bp ** 2 + (p.h_bs_m - p.h_ut_m) ** 2))
    pl_los = np.where(d <= d_bp, pl1, pl2)
    pl_nlos = (35.3 * np.log10(d) + 22.4 + 21.3 * np.log10(carrier_ghz)
               - 0.3 * (p.h_ut_m - 1.5))
    out = np.where(los, pl_los, np.maximum(pl_los, pl_nlos))
    return float(out) if out.ndim == 0 else out


def los_probability(distance_2d_m):
    """UMi street-canyon LOS probability (TR 38.901 Table 7.4.2-1)."""
    d = np.maximum(np.asarray(distance_2d_m, dtype=float), 1e-9)
    p = np.where(d <= 18.0, 1.0, 18.0 / d + np.exp(-d / 36.0) * (1.0 - 18.0 / d))
    return float(p) if p.ndim == 0 else p


def sector_gain_db(offset_deg, p):
    """Parabolic horizontal pattern relative to boresight, plus boresight gain."""
    off = (np.asarray(offset_deg, dtype=float) + 180.0) % 360.0 - 180.0
    att = np.minimum(12.0 * (off / p.beamwidth_3db_deg) ** 2, p.front_to_back_db)
    return p.antenna_gain_dbi - att


def cell_gain_db(dx, dy, azimuths_deg, p):
    """Best-sector gain toward points offset (dx, dy) from a site."""
    bearing = np.degrees(np.arctan2(dx, dy))  # clockwise from north
    gains = [sector_gain_db(bearing - az, p) for az in azimuths_deg]
    return np.max(gains, axis=0)


def gain_matrix_db(dx, dy, sectors_per_cell, p):
    """UE x cell best-sector gains; ``dx``/``dy`` are UE-minus-site offsets."""
    bearing = np.degrees(np.arctan2(dx, dy))
    first = list(sectors_per_cell[0])
    if all(list(s) == first for s in sectors_per_cell):
        return np.max([sector_gain_db(bearing - az, p) for az in first], axis=0)
    out = np.empty_like(bearing)
    for c, sectors in enumerate(sectors_per_cell):
        out[:, c] = np.max([sector_gain_db(bearing[:, c] - az, p) for az in sectors], axis=0)
    return out


def rsrp_dbm(tx_power_dbm, antenna_gain_db, path_loss_db, shadowing_db):
    return tx_power_dbm + antenna_gain_db - path_loss_db - shadowing_db


def noise_dbm(p):
    return THERMAL_NOISE_DBM_HZ + 10.0 * np.log10(p.bandwidth_hz) + p.noise_figure_db


def dbm_to_mw(x):
    return np.power(10.0, np.asarray(x, dtype=float) / 10.0)


def sinr_db(serving_rsrp_dbm, interferer_rsrp_dbm, noise_dbm):
    s = dbm_to_mw(serving_rsrp_dbm)
    i = float(np.sum(dbm_to_mw(list(interferer_rsrp_dbm)))) if len(interferer_rsrp_dbm) else 0.0
    n = dbm_to_mw(noise_dbm)
    return float(10.0 * np.log10(s / (i + n)))


def serving_sinr_db(rsrp, serving, noise, activity=None):
    """SINR of each UE toward its serving cell from a UE x cell RSRP matrix.

    ``activity`` optionally scales each cell's interference contribution.
    Rows with ``serving < 0`` get -inf.
    """
    lin = dbm_to_mw(rsrp)
    n = lin.shape[0]
    att = serving >= 0
    idx = np.maximum(serving, 0)
    sig = np.where(att, lin[np.arange(n), idx], 0.0)
    weighted = lin if activity is None else lin * activity[None, :]
    own = np.where(att, weighted[np.arange(n), idx], 0.0)
    interf = weighted.sum(axis=1) - own
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(np.where(att, sig, 1e-300) / (interf + dbm_to_mw(noise)))
    return np.where(att, out, -np.inf)


def cqi_from_sinr(sinr):
    """Highest CQI whose SINR threshold is met; works elementwise on arrays."""
    cqi = np.searchsorted(CQI_SINR_THRESHOLDS_DB, sinr, side="right")
    return int(cqi) if np.ndim(cqi) == 0 else cqi.astype(np.int64)


def prb_capacity_mbps(cqi, scs_khz=30.0, overhead=0.14):
    """Downlink throughput of one PRB for a full second at the given CQI.

    12 subcarriers x 14 symbols per slot, ``scs_khz / 15`` slots per ms.
    """
    slots_per_s = 1000.0 * scs_khz / 15.0
    re_per_s = 12 * 14 * slots_per_s * (1.0 - overhead)
    return CQI_EFFICIENCY[np.asarray(cqi, dtype=np.int64)] * re_per_s / 1e6
