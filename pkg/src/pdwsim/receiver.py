"""Stare/scan receiver semantics: dwells, band filtering, detection, merging."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import ConfigurationError, LabeledPulseTrain, Seed
from .emitters import EmitterSpec, TxBatch
from .propagation import NoiseModel, RxGeometry, ScanPattern, received_batch

BAND_STEP_MHZ = 500.0
BAND_HALF_WIDTH_MHZ = 250.0
BAND_CENTRES_MHZ = tuple(float(c) for c in range(500, 18001, 500))  # 36 bands


@dataclass(frozen=True)
class DwellSchedule:
    """Cyclic sweep plan: ordered (centre_mhz, dwell_us) entries."""

    entries: tuple

    def __post_init__(self):
        if not self.entries:
            raise ConfigurationError("dwell schedule must have at least one entry")
        for centre, dwell in self.entries:
            if centre not in BAND_CENTRES_MHZ:
                raise ConfigurationError(
                    f"dwell centre {centre} is not a 500 MHz step in [500, 18000]")
            if dwell <= 0:
                raise ConfigurationError(f"dwell time must be > 0, got {dwell}")

    @property
    def cycle_us(self) -> float:
        return float(sum(d for _, d in self.entries))

    def starts_us(self) -> np.ndarray:
        dwells = np.array([d for _, d in self.entries], dtype=np.float64)
        return np.concatenate(([0.0], np.cumsum(dwells)[:-1]))


@dataclass(frozen=True)
class ReceiverSpec:
    mode: str = "stare"  # "stare" or "scan"
    schedule: Optional[DwellSchedule] = None
    position_m: tuple = (0.0, 0.0)
    orientation_deg: float = 0.0
    mainlobe_gain_db: float = 10.0
    fov_deg: float = 360.0
    noise_floor_db: float = -100.0
    collection_us: float = 10_000_000.0
    detection_threshold_db: float = 3.0  # relative to the noise floor
    detection_slope_db: float = 2.0

    def __post_init__(self):
        if self.mode not in ("stare", "scan"):
            raise ConfigurationError(f"unknown receiver mode {self.mode!r}")
        if self.mode == "scan" and self.schedule is None:
            raise ConfigurationError("scan mode requires a dwell schedule")
        if self.collection_us <= 0:
            raise ConfigurationError("collection_us must be > 0")
        if not math.isfinite(self.noise_floor_db):
            raise ConfigurationError("noise_floor_db must be finite")

    def geometry(self) -> RxGeometry:
        return RxGeometry(position_m=self.position_m,
                          orientation_deg=self.orientation_deg,
                          fov_deg=self.fov_deg,
                          mainlobe_gain_db=self.mainlobe_gain_db)


def dwell_at(schedule: DwellSchedule, toa_us: float) -> float:
    """Centre frequency of the dwell containing toa_us (boundaries open left)."""
    return float(dwell_at_array(schedule, np.asarray([toa_us]))[0])


def dwell_at_array(schedule: DwellSchedule, toa_us: np.ndarray) -> np.ndarray:
    centres = np.array([c for c, _ in schedule.entries], dtype=np.float64)
    starts = schedule.starts_us()
    t = np.mod(np.asarray(toa_us, dtype=np.float64), schedule.cycle_us)
    idx = np.searchsorted(starts, t, side="right") - 1
    return centres[idx]


def in_band(freq_mhz, centre_mhz):
    """Band membership; the +250 MHz edge belongs to the lower-centred band."""
    delta = np.asarray(freq_mhz, dtype=np.float64) - np.asarray(centre_mhz, dtype=np.float64)
    ok = (delta > -BAND_HALF_WIDTH_MHZ) & (delta <= BAND_HALF_WIDTH_MHZ)
    return bool(ok) if ok.ndim == 0 else ok


def detection_probability(snr_db, threshold_db: float = 3.0, slope_db: float = 2.0):
    """Logistic probability of detecting a pulse at the given SNR.

    threshold_db = -inf forces always-detect (p == 1 exactly).
    """
    if slope_db <= 0:
        raise ConfigurationError(f"slope_db must be > 0, got {slope_db}")
    snr = np.asarray(snr_db, dtype=np.float64)
    with np.errstate(over="ignore"):
        p = 1.0 / (1.0 + np.exp(-(snr - threshold_db) / slope_db))
    return float(p) if p.ndim == 0 else p


def receive(streams: Sequence[TxBatch], specs: Sequence[EmitterSpec],
            rx: ReceiverSpec, noise: NoiseModel, seed: Seed,
            meta: Optional[dict] = None) -> LabeledPulseTrain:
    """Propagate, filter, detect, and merge per-emitter schedules.

    One detection uniform is drawn per propagated pulse regardless of
    band/FOV outcome, so detection decisions stay aligned across
    configuration changes under a shared seed.
    """
    spec_by_id = {s.emitter_id: s for s in specs}
    geom = rx.geometry()

    toas, freqs, pws, aoas, amps, labels, seqs = [], [], [], [], [], [], []
    for batch in streams:
        spec = spec_by_id[batch.emitter_id]
        n = len(batch)
        if n == 0:
            continue
        scan = None
        if spec.tx_type.rotation_period_s is not None:
            scan = ScanPattern(rotation_period_s=spec.tx_type.rotation_period_s,
                               beamwidth_deg=spec.tx_type.beamwidth_deg)
        rng_noise = seed.child("noise", batch.emitter_id).generator()
        toa, freq, pw, aoa, amp, keep = received_batch(
            batch, spec.position_m, geom, noise, rng_noise, scan=scan)

        if rx.mode == "scan":
            centres = dwell_at_array(rx.schedule, toa)
            keep = keep & in_band(freq, centres)

        u = seed.child("detect", batch.emitter_id).generator().random(n)
        p = detection_probability(amp - rx.noise_floor_db,
                                  rx.detection_threshold_db, rx.detection_slope_db)
        keep = keep & (u < p)

        if not np.any(keep):
            continue
        seq = np.arange(n, dtype=np.int64)[keep]
        toas.append(toa[keep]); freqs.append(freq[keep]); pws.append(pw[keep])
        aoas.append(aoa[keep]); amps.append(amp[keep])
        labels.append(np.full(keep.sum(), batch.emitter_id, dtype=np.uint32))
        seqs.append(seq)

    meta = dict(meta or {})
    meta.setdefault("mode", rx.mode)
    meta.setdefault("collection_us", rx.collection_us)
    if not toas:
        return LabeledPulseTrain.empty(meta=meta)

    toa = np.concatenate(toas); freq = np.concatenate(freqs)
    pw = np.concatenate(pws); aoa = np.concatenate(aoas)
    amp = np.concatenate(amps); lab = np.concatenate(labels)
    seq = np.concatenate(seqs)

    order = np.lexsort((seq, lab, toa))  # tie-break: toa, emitter_id, sequence
    return LabeledPulseTrain(
        toa_us=toa[order], freq_mhz=freq[order], pw_us=pw[order],
        aoa_deg=aoa[order], amp_db=amp[order], labels=lab[order], meta=meta)


def merge_streams(per_emitter: Sequence[LabeledPulseTrain],
                  meta: Optional[dict] = None) -> LabeledPulseTrain:
    """K-way merge of per-emitter trains, stable under (toa, label, seq).

    Each input must already be sorted by toa; violations raise ValueError.
    """
    for s in per_emitter:
        if len(s) > 1 and np.any(np.diff(s.toa_us) < 0):
            raise ValueError("merge_streams input stream is not sorted by toa")

    def stream_iter(s: LabeledPulseTrain):
        for i in range(len(s)):
            yield (float(s.toa_us[i]), int(s.labels[i]), i, s)

    merged = heapq.merge(*(stream_iter(s) for s in per_emitter),
                         key=lambda rec: rec[:3])
    n_total = sum(len(s) for s in per_emitter)
    toa = np.empty(n_total); freq = np.empty(n_total); pw = np.empty(n_total)
    aoa = np.empty(n_total); amp = np.empty(n_total)
    lab = np.empty(n_total, dtype=np.uint32)
    for j, (_, label, i, s) in enumerate(merged):
        toa[j] = s.toa_us[i]; freq[j] = s.freq_mhz[i]; pw[j] = s.pw_us[i]
        aoa[j] = s.aoa_deg[i]; amp[j] = s.amp_db[i]; lab[j] = label
    return LabeledPulseTrain(toa_us=toa, freq_mhz=freq, pw_us=pw, aoa_deg=aoa,
                             amp_db=amp, labels=lab, meta=dict(meta or {}))
