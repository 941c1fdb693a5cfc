"""Shared domain types, unit conventions, and deterministic seeding.

Units used everywhere in this package:
    time of arrival     microseconds (us)
    frequency           MHz
    pulse width         microseconds (us)
    angle of arrival    degrees in [-180, +180]
    amplitude           dB
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np

SPEED_OF_LIGHT_M_PER_US = 299.792458


class ConfigurationError(ValueError):
    """Raised when a spec/config object violates its own invariants."""


def normalize_angle(deg: float) -> float:
    """Wrap an angle into [-180, +180] degrees.

    +180 and -180 are both preserved as given; any other input is reduced
    modulo 360 into the interval.
    """
    if not math.isfinite(deg):
        raise ValueError(f"angle must be finite, got {deg!r}")
    r = math.fmod(deg, 360.0)
    if r > 180.0:
        r -= 360.0
    elif r < -180.0:
        r += 360.0
    return r


def normalize_angle_array(deg: np.ndarray) -> np.ndarray:
    """Vectorized :func:`normalize_angle`."""
    r = np.fmod(deg, 360.0)
    r = np.where(r > 180.0, r - 360.0, r)
    r = np.where(r < -180.0, r + 360.0, r)
    return r


@dataclass(frozen=True)
class Pdw:
    """One received pulse descriptor word."""

    toa_us: float
    freq_mhz: float
    pw_us: float
    aoa_deg: float
    amp_db: float

    def __post_init__(self):
        if self.pw_us <= 0:
            raise ValueError(f"pw_us must be > 0, got {self.pw_us}")
        if self.freq_mhz <= 0:
            raise ValueError(f"freq_mhz must be > 0, got {self.freq_mhz}")
        if not -180.0 <= self.aoa_deg <= 180.0:
            raise ValueError(f"aoa_deg out of [-180, 180]: {self.aoa_deg}")


@dataclass
class LabeledPulseTrain:
    """Time-ordered PDW sequence with ground-truth emitter identifiers.

    Stored column-wise as float64 / uint32 arrays for throughput; use
    :meth:`pulse` for a scalar view of one record.
    """

    toa_us: np.ndarray
    freq_mhz: np.ndarray
    pw_us: np.ndarray
    aoa_deg: np.ndarray
    amp_db: np.ndarray
    labels: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.toa_us)
        cols = (self.freq_mhz, self.pw_us, self.aoa_deg, self.amp_db, self.labels)
        if any(len(c) != n for c in cols):
            raise ValueError("all columns must have equal length")
        if n > 1 and np.any(np.diff(self.toa_us) < 0):
            raise ValueError("pulses must be sorted by non-decreasing toa_us")

    def __len__(self) -> int:
        return len(self.toa_us)

    def pulse(self, i: int) -> Pdw:
        return Pdw(
            toa_us=float(self.toa_us[i]),
            freq_mhz=float(self.freq_mhz[i]),
            pw_us=float(self.pw_us[i]),
            aoa_deg=float(self.aoa_deg[i]),
            amp_db=float(self.amp_db[i]),
        )

    def slice(self, start: int, stop: int) -> "LabeledPulseTrain":
        return LabeledPulseTrain(
            toa_us=self.toa_us[start:stop],
            freq_mhz=self.freq_mhz[start:stop],
            pw_us=self.pw_us[start:stop],
            aoa_deg=self.aoa_deg[start:stop],
            amp_db=self.amp_db[start:stop],
            labels=self.labels[start:stop],
            meta=dict(self.meta),
        )

    def take(self, idx: np.ndarray) -> "LabeledPulseTrain":
        return LabeledPulseTrain(
            toa_us=self.toa_us[idx],
            freq_mhz=self.freq_mhz[idx],
            pw_us=self.pw_us[idx],
            aoa_deg=self.aoa_deg[idx],
            amp_db=self.amp_db[idx],
            labels=self.labels[idx],
            meta=dict(self.meta),
        )

    @staticmethod
    def empty(meta: dict | None = None) -> "LabeledPulseTrain":
        z = np.zeros(0, dtype=np.float64)
        return LabeledPulseTrain(
            toa_us=z, freq_mhz=z.copy(), pw_us=z.copy(), aoa_deg=z.copy(),
            amp_db=z.copy(), labels=np.zeros(0, dtype=np.uint32),
            meta=dict(meta or {}),
        )


@dataclass(frozen=True)
class Seed:
    """Hierarchical seed: a master value plus a derivation path.

    Children derived with the same (scope, index) pair are identical on
    every platform; distinct pairs give statistically independent streams
    (the stream key is a SHA-256 digest of master + path).
    """

    master_seed: int
    path: tuple = ()

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def child(self, scope: str, index: int) -> "Seed":
        return replace(self, path=self.path + ((scope, int(index)),))

    def key_bytes(self) -> bytes:
        h = hashlib.sha256()
        h.update(self.master_seed.to_bytes(8, "little"))
        for scope, index in self.path:
            h.update(scope.encode("utf-8"))
            h.update(b"\x00")
            h.update(int(index).to_bytes(8, "little", signed=True))
        return h.digest()

    def generator(self) -> np.random.Generator:
        """Counter-based (Philox) generator keyed by this seed."""
        key = int.from_bytes(self.key_bytes()[:16], "little")
        return np.random.Generator(np.random.Philox(key=key))


def derive_seed(master: Seed, scope: str, index: int) -> Seed:
    return master.child(scope, index)
