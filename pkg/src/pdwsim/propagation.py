"""Free-space propagation: path loss, delay, angle of arrival, gains, noise."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    SPEED_OF_LIGHT_M_PER_US,
    Pdw,
    normalize_angle,
    normalize_angle_array,
)
from .emitters import FREQ_ENVELOPE_MHZ, PW_ENVELOPE_US, TxBatch, TxPulse

# Pulse dropped before detection (outside the receiver field of view).
BLOCKED = object()

# Emitters never sit on top of the receiver; clamp avoids the d -> 0
# singularity of the free-space law.
MIN_DISTANCE_M = 1.0

# Rotating-emitter antenna pattern: raised-cosine main lobe over a constant
# sidelobe floor.
SCAN_MAINLOBE_PEAK_DB = 12.0
SCAN_SIDELOBE_FLOOR_DB = -18.0


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean Gaussian measurement noise per PDW field.

    All sigmas zero is the exact noise-disabled mode.
    """

    sigma_toa_us: float = 0.0
    sigma_freq_mhz: float = 0.0
    sigma_pw_fraction: float = 0.0
    sigma_aoa_deg: float = 0.0
    sigma_amp_db: float = 0.0

    def __post_init__(self):
        for name, v in self.__dict__.items():
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")

    @property
    def disabled(self) -> bool:
        return all(v == 0.0 for v in self.__dict__.values())


@dataclass(frozen=True)
class RxGeometry:
    position_m: tuple = (0.0, 0.0)
    orientation_deg: float = 0.0
    fov_deg: float = 360.0
    mainlobe_gain_db: float = 10.0


@dataclass(frozen=True)
class ScanPattern:
    """Rotating emitter antenna: periodic illumination of the receiver."""

    rotation_period_s: float
    beamwidth_deg: float


def path_loss_db(distance_m, freq_mhz):
    """Free-space path loss: 20 log10(d_km) + 20 log10(f_MHz) + 32.44."""
    d = np.asarray(distance_m, dtype=np.float64)
    f = np.asarray(freq_mhz, dtype=np.float64)
    if np.any(d <= 0):
        raise ValueError("distance_m must be > 0")
    if np.any(f <= 0):
        raise ValueError("freq_mhz must be > 0")
    loss = 20.0 * np.log10(d / 1000.0) + 20.0 * np.log10(f) + 32.44
    return float(loss) if loss.ndim == 0 else loss


def true_aoa(rx_pos, emitter_pos) -> float:
    """Bearing of the emitter from the receiver; 0 deg = +x, CCW positive."""
    dx = emitter_pos[0] - rx_pos[0]
    dy = emitter_pos[1] - rx_pos[1]
    if dx == 0.0 and dy == 0.0:
        raise ValueError("emitter and receiver positions coincide")
    return normalize_angle(math.degrees(math.atan2(dy, dx)))


def rx_gain_db(orientation_deg: float, aoa_deg: float, fov_deg: float,
               mainlobe_gain_db: float):
    """Receiver antenna gain, or BLOCKED when outside the field of view."""
    if not 0.0 < fov_deg <= 360.0:
        raise ValueError("fov_deg must lie in (0, 360]")
    if fov_deg == 360.0:
        return mainlobe_gain_db
    offset = abs(normalize_angle(aoa_deg - orientation_deg))
    if offset <= fov_deg / 2.0:
        return mainlobe_gain_db
    return BLOCKED


def emitter_scan_gain_db(tx_time_us, scan: ScanPattern | None,
                         bearing_to_rx_deg: float):
    """Gain of a rotating emitter antenna toward the receiver at tx time."""
    if scan is None:
        return np.zeros_like(np.asarray(tx_time_us, dtype=np.float64))
    t_s = np.asarray(tx_time_us, dtype=np.float64) * 1e-6
    boresight = np.fmod(360.0 * t_s / scan.rotation_period_s, 360.0)
    offset = np.abs(normalize_angle_array(bearing_to_rx_deg - boresight))
    half = scan.beamwidth_deg / 2.0
    lobe = SCAN_SIDELOBE_FLOOR_DB + (SCAN_MAINLOBE_PEAK_DB - SCAN_SIDELOBE_FLOOR_DB) \
        * 0.5 * (1.0 + np.cos(np.pi * offset / half))
    return np.where(offset <= half, lobe, SCAN_SIDELOBE_FLOOR_DB)


def received_batch(tx: TxBatch, emitter_pos, rx: RxGeometry, noise: NoiseModel,
                   rng: np.random.Generator, scan: ScanPattern | None = None):
    """Propagate one emitter's schedule to the receiver.

    Returns (toa, freq, pw, aoa, amp, visible) arrays over all tx pulses;
    `visible` is False where the receiver field of view blocks the pulse.
    Noise is drawn for every pulse regardless of visibility so that draws
    stay aligned across configuration changes.
    """
    n = len(tx)
    dx = emitter_pos[0] - rx.position_m[0]
    dy = emitter_pos[1] - rx.position_m[1]
    dist = max(math.hypot(dx, dy), MIN_DISTANCE_M)
    aoa0 = true_aoa(rx.position_m, emitter_pos)
    delay_us = dist / SPEED_OF_LIGHT_M_PER_US

    gain = rx_gain_db(rx.orientation_deg, aoa0, rx.fov_deg, rx.mainlobe_gain_db)
    if gain is BLOCKED:
        visible = np.zeros(n, dtype=bool)
        gain_db = 0.0
    else:
        visible = np.ones(n, dtype=bool)
        gain_db = gain

    bearing_back = normalize_angle(aoa0 + 180.0)  # emitter -> receiver bearing
    scan_gain = emitter_scan_gain_db(tx.tx_time_us, scan, bearing_back)

    loss = path_loss_db(dist, tx.tx_freq_mhz)
    toa = tx.tx_time_us + delay_us
    freq = tx.tx_freq_mhz.copy()
    pw = tx.pw_us.copy()
    aoa = np.full(n, aoa0, dtype=np.float64)
    amp = tx.tx_power_dbm - loss + gain_db + scan_gain

    if not noise.disabled:
        toa = toa + rng.normal(0.0, 1.0, n) * noise.sigma_toa_us
        freq = freq + rng.normal(0.0, 1.0, n) * noise.sigma_freq_mhz
        pw = pw * (1.0 + rng.normal(0.0, 1.0, n) * noise.sigma_pw_fraction)
        aoa = aoa + rng.normal(0.0, 1.0, n) * noise.sigma_aoa_deg
        amp = amp + rng.normal(0.0, 1.0, n) * noise.sigma_amp_db
        freq = np.clip(freq, *FREQ_ENVELOPE_MHZ)
        pw = np.clip(pw, *PW_ENVELOPE_US)
        aoa = normalize_angle_array(aoa)

    return toa, freq, pw, aoa, amp, visible


def received_pdw(tx: TxPulse, emitter_pos, rx: RxGeometry, noise: NoiseModel,
                 rng: np.random.Generator, scan: ScanPattern | None = None):
    """Propagate a single pulse; returns a Pdw or BLOCKED."""
    batch = TxBatch(
        tx_time_us=np.array([tx.tx_time_us]),
        tx_freq_mhz=np.array([tx.tx_freq_mhz]),
        pw_us=np.array([tx.pw_us]),
        tx_power_dbm=np.array([tx.tx_power_dbm]),
        emitter_id=tx.emitter_id,
    )
    toa, freq, pw, aoa, amp, visible = received_batch(
        batch, emitter_pos, rx, noise, rng, scan=scan)
    if not visible[0]:
        return BLOCKED
    return Pdw(toa_us=float(toa[0]), freq_mhz=float(freq[0]), pw_us=float(pw[0]),
               aoa_deg=float(aoa[0]), amp_db=float(amp[0]))
