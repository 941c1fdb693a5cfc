"""Emitter-side simulation: operating modes and transmitted pulse schedules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .core import ConfigurationError, Seed

# Envelopes observed across the published per-field statistics; the generated
# catalogue is constrained to stay inside them.
PW_ENVELOPE_US = (0.007, 368.522)
FREQ_ENVELOPE_MHZ = (500.0, 18000.0)
CATALOGUE_SIZE = 68


@dataclass(frozen=True)
class ConstantPri:
    pri_us: float
    freq_mhz: float = 1000.0
    pw_program: tuple = (1.0,)

    def validate(self):
        if self.pri_us <= 0:
            raise ConfigurationError(f"pri_us must be > 0, got {self.pri_us}")
        _validate_pw_program(self.pw_program)


@dataclass(frozen=True)
class StaggeredPri:
    levels: tuple
    freq_mhz: float = 1000.0
    pw_program: tuple = (1.0,)

    def validate(self):
        if len(self.levels) < 2:
            raise ConfigurationError("StaggeredPri needs at least 2 levels")
        if any(v <= 0 for v in self.levels):
            raise ConfigurationError("all stagger levels must be > 0")
        _validate_pw_program(self.pw_program)


@dataclass(frozen=True)
class JitteredPri:
    mean_pri_us: float
    jitter_fraction: float
    freq_mhz: float = 1000.0
    pw_program: tuple = (1.0,)

    def validate(self):
        if self.mean_pri_us <= 0:
            raise ConfigurationError("mean_pri_us must be > 0")
        if not 0.0 <= self.jitter_fraction < 0.5:
            raise ConfigurationError("jitter_fraction must lie in [0, 0.5)")
        _validate_pw_program(self.pw_program)


@dataclass(frozen=True)
class FreqHopping:
    channels: tuple
    hop_every_n_pulses: int
    base: Union[ConstantPri, StaggeredPri, JitteredPri]
    pw_program: tuple = (1.0,)

    def validate(self):
        if len(self.channels) < 1 or any(f <= 0 for f in self.channels):
            raise ConfigurationError("hopping channels must be positive frequencies")
        if self.hop_every_n_pulses < 1:
            raise ConfigurationError("hop_every_n_pulses must be >= 1")
        self.base.validate()
        _validate_pw_program(self.pw_program)


OperatingMode = Union[ConstantPri, StaggeredPri, JitteredPri, FreqHopping]


def _validate_pw_program(pw_program) -> None:
    if len(pw_program) < 1 or any(w <= 0 for w in pw_program):
        raise ConfigurationError("pulse-width program must be non-empty and positive")


@dataclass(frozen=True)
class TransmitterType:
    """One catalogue entry: physical envelope of a transmitter family."""

    type_id: int
    freq_min_mhz: float
    freq_max_mhz: float
    pw_min_us: float
    pw_max_us: float
    tx_power_dbm: float
    pri_min_us: float
    pri_max_us: float
    allowed_modes: tuple  # subset of {"constant", "staggered", "jittered", "hopping"}
    rotation_period_s: Optional[float] = None
    beamwidth_deg: Optional[float] = None


@dataclass(frozen=True)
class EmitterSpec:
    emitter_id: int
    tx_type: TransmitterType
    position_m: tuple  # (x_m, y_m)
    mode: OperatingMode
    start_time_us: float = 0.0


@dataclass(frozen=True)
class TxPulse:
    tx_time_us: float
    tx_freq_mhz: float
    pw_us: float
    tx_power_dbm: float
    emitter_id: int


@dataclass
class TxBatch:
    """Column-wise transmitted pulse schedule for one emitter."""

    tx_time_us: np.ndarray
    tx_freq_mhz: np.ndarray
    pw_us: np.ndarray
    tx_power_dbm: np.ndarray
    emitter_id: int

    def __len__(self) -> int:
        return len(self.tx_time_us)

    def pulse(self, i: int) -> TxPulse:
        return TxPulse(
            tx_time_us=float(self.tx_time_us[i]),
            tx_freq_mhz=float(self.tx_freq_mhz[i]),
            pw_us=float(self.pw_us[i]),
            tx_power_dbm=float(self.tx_power_dbm[i]),
            emitter_id=self.emitter_id,
        )


def next_interval(mode: OperatingMode, pulse_index: int, rng: np.random.Generator) -> float:
    """Interval between pulse `pulse_index` and the next one, in us."""
    if isinstance(mode, FreqHopping):
        return next_interval(mode.base, pulse_index, rng)
    if isinstance(mode, ConstantPri):
        return mode.pri_us
    if isinstance(mode, StaggeredPri):
        return mode.levels[pulse_index % len(mode.levels)]
    if isinstance(mode, JitteredPri):
        u = rng.uniform(-mode.jitter_fraction, mode.jitter_fraction)
        return mode.mean_pri_us * (1.0 + u)
    raise ConfigurationError(f"unknown operating mode: {mode!r}")


def pulse_frequency(mode: OperatingMode, pulse_index: int) -> float:
    if isinstance(mode, FreqHopping):
        hop = (pulse_index // mode.hop_every_n_pulses) % len(mode.channels)
        return mode.channels[hop]
    return mode.freq_mhz


def _tx_times(mode: OperatingMode, start_us: float, duration_us: float,
              rng: np.random.Generator) -> np.ndarray:
    """Pulse emission times in [start, duration), first pulse at start."""
    pri_mode = mode.base if isinstance(mode, FreqHopping) else mode
    if start_us >= duration_us:
        return np.zeros(0, dtype=np.float64)

    if isinstance(pri_mode, ConstantPri):
        n = int(math.ceil((duration_us - start_us) / pri_mode.pri_us))
        times = start_us + pri_mode.pri_us * np.arange(max(n, 1), dtype=np.float64)
        return times[times < duration_us]

    if isinstance(pri_mode, StaggeredPri):
        levels = np.asarray(pri_mode.levels, dtype=np.float64)
        cycle = levels.sum()
        n_cycles = int(math.ceil((duration_us - start_us) / cycle)) + 1
        intervals = np.tile(levels, n_cycles)
        times = start_us + np.concatenate(([0.0], np.cumsum(intervals)))
        return times[times < duration_us]

    if isinstance(pri_mode, JitteredPri):
        min_iv = pri_mode.mean_pri_us * (1.0 - pri_mode.jitter_fraction)
        chunks = [np.array([start_us])]
        t = start_us
        while t < duration_us:
            n = int(math.ceil((duration_us - t) / min_iv)) + 1
            u = rng.uniform(-pri_mode.jitter_fraction, pri_mode.jitter_fraction, size=n)
            iv = pri_mode.mean_pri_us * (1.0 + u)
            times = t + np.cumsum(iv)
            chunks.append(times)
            t = times[-1]
        times = np.concatenate(chunks)
        return times[times < duration_us]

    raise ConfigurationError(f"unknown operating mode: {pri_mode!r}")


def emit_pulses(spec: EmitterSpec, duration_us: float, rng: np.random.Generator) -> TxBatch:
    """Generate one emitter's transmit schedule over [0, duration_us)."""
    if duration_us <= 0:
        raise ConfigurationError("duration_us must be > 0")
    spec.mode.validate()

    times = _tx_times(spec.mode, spec.start_time_us, duration_us, rng)
    n = len(times)
    idx = np.arange(n)

    if isinstance(spec.mode, FreqHopping):
        channels = np.asarray(spec.mode.channels, dtype=np.float64)
        freqs = channels[(idx // spec.mode.hop_every_n_pulses) % len(channels)]
    else:
        freqs = np.full(n, spec.mode.freq_mhz, dtype=np.float64)

    pw_prog = np.asarray(spec.mode.pw_program, dtype=np.float64)
    pws = pw_prog[idx % len(pw_prog)]

    power = np.full(n, spec.tx_type.tx_power_dbm, dtype=np.float64)
    return TxBatch(tx_time_us=times, tx_freq_mhz=freqs, pw_us=pws,
                   tx_power_dbm=power, emitter_id=spec.emitter_id)


def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def sample_catalogue(seed: Seed) -> list:
    """Deterministically sample the fixed catalogue of 68 transmitter types."""
    rng = seed.child("catalogue", 0).generator()
    types = []
    for type_id in range(CATALOGUE_SIZE):
        width = _log_uniform(rng, 50.0, 4000.0)
        f_lo = rng.uniform(FREQ_ENVELOPE_MHZ[0], FREQ_ENVELOPE_MHZ[1] - width)
        f_hi = f_lo + width

        pw_lo = _log_uniform(rng, PW_ENVELOPE_US[0], 10.0)
        pw_hi = min(pw_lo * _log_uniform(rng, 1.5, 50.0), PW_ENVELOPE_US[1])

        pri_lo = _log_uniform(rng, 50.0, 2000.0)
        pri_hi = min(pri_lo * _log_uniform(rng, 2.0, 20.0), 50000.0)

        # Power tracks the band centre so edge-of-arena SNR sits near the
        # detection threshold regardless of frequency.
        f_centre = 0.5 * (f_lo + f_hi)
        power = 20.0 * math.log10(f_centre) - 28.5 + rng.uniform(-10.0, 20.0)

        modes = ["constant"]
        if rng.random() < 0.6:
            modes.append("staggered")
        if rng.random() < 0.6:
            modes.append("jittered")
        if rng.random() < 0.5:
            modes.append("hopping")

        if rng.random() < 0.4:
            rotation = rng.uniform(1.0, 10.0)
            beamwidth = rng.uniform(2.0, 10.0)
        else:
            rotation = None
            beamwidth = None

        types.append(TransmitterType(
            type_id=type_id,
            freq_min_mhz=f_lo, freq_max_mhz=f_hi,
            pw_min_us=pw_lo, pw_max_us=pw_hi,
            tx_power_dbm=power,
            pri_min_us=pri_lo, pri_max_us=pri_hi,
            allowed_modes=tuple(modes),
            rotation_period_s=rotation,
            beamwidth_deg=beamwidth,
        ))
    return types
