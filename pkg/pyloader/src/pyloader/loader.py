"""Standalone reader/writer for the pulse train file format.

Byte layout (little-endian):
    0-3    magic "TSRD"
    4-5    version (u16) == 1
    6-7    flags (u16), bit0 = labels present
    8-15   record count (u64)
    then   per record: toa_us, freq_mhz, pw_us, aoa_deg, amp_db (f64 each),
           followed by emitter_id (u32) when labels are present

A `<path>.meta` sidecar, when present, holds `key = value` metadata lines.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

MAGIC = b"TSRD"
VERSION = 1
FLAG_LABELS = 0x0001
_HEADER = struct.Struct("<4sHHQ")

_LABELED = np.dtype([("toa_us", "<f8"), ("freq_mhz", "<f8"), ("pw_us", "<f8"),
                     ("aoa_deg", "<f8"), ("amp_db", "<f8"), ("emitter_id", "<u4")])
_UNLABELED = np.dtype([("toa_us", "<f8"), ("freq_mhz", "<f8"), ("pw_us", "<f8"),
                       ("aoa_deg", "<f8"), ("amp_db", "<f8")])


class TrainFormatError(ValueError):
    """Malformed train file; the message names the offending byte offset."""


@dataclass
class LoadedTrain:
    """Columnar view of one pulse train plus sidecar metadata."""

    toa_us: np.ndarray
    freq_mhz: np.ndarray
    pw_us: np.ndarray
    aoa_deg: np.ndarray
    amp_db: np.ndarray
    labels: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.toa_us)
        cols = [self.freq_mhz, self.pw_us, self.aoa_deg, self.amp_db]
        if self.labels is not None:
            cols.append(self.labels)
        if any(len(c) != n for c in cols):
            raise ValueError("column lengths differ")
        if n > 1 and np.any(np.diff(self.toa_us) < 0):
            raise ValueError("toa column must be non-decreasing")

    def __len__(self) -> int:
        return len(self.toa_us)

    def slice(self, start: int, stop: int) -> "LoadedTrain":
        return LoadedTrain(
            toa_us=self.toa_us[start:stop], freq_mhz=self.freq_mhz[start:stop],
            pw_us=self.pw_us[start:stop], aoa_deg=self.aoa_deg[start:stop],
            amp_db=self.amp_db[start:stop],
            labels=None if self.labels is None else self.labels[start:stop],
            meta=self.meta)


def _read_meta(path) -> dict:
    sidecar = Path(str(path) + ".meta")
    meta = {}
    if sidecar.exists():
        for line in sidecar.read_text().splitlines():
            if "=" in line:
                key, value = line.split("=", 1)
                meta[key.strip()] = value.strip()
    return meta


def load(path) -> LoadedTrain:
    """Decode a train file; raises TrainFormatError on any malformation."""
    path = str(path)
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise TrainFormatError(f"{path}: truncated header at byte offset {len(raw)}")
    magic, version, flags, count = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise TrainFormatError(f"{path}: bad magic at byte offset 0: {magic!r}")
    if version != VERSION:
        raise TrainFormatError(f"{path}: unsupported version {version} at byte offset 4")
    labeled = bool(flags & FLAG_LABELS)
    dtype = _LABELED if labeled else _UNLABELED
    expected = _HEADER.size + count * dtype.itemsize
    if len(raw) < expected:
        raise TrainFormatError(
            f"{path}: truncated record data at byte offset {len(raw)}")
    if len(raw) > expected:
        raise TrainFormatError(f"{path}: trailing bytes at byte offset {expected}")
    data = np.frombuffer(raw, dtype=dtype, count=count, offset=_HEADER.size)
    return LoadedTrain(
        toa_us=data["toa_us"].copy(), freq_mhz=data["freq_mhz"].copy(),
        pw_us=data["pw_us"].copy(), aoa_deg=data["aoa_deg"].copy(),
        amp_db=data["amp_db"].copy(),
        labels=data["emitter_id"].copy() if labeled else None,
        meta=_read_meta(path))


def iter_windows(train: LoadedTrain, count: Optional[int] = None,
                 duration_us: Optional[float] = None) -> Iterator[LoadedTrain]:
    """Yield window slices by fixed pulse count or fixed time span.

    Count windows are consecutive chunks (last may be short). Duration
    windows are half-open bins [k*span, (k+1)*span); empty bins are skipped.
    """
    if (count is None) == (duration_us is None):
        raise ValueError("specify exactly one of count or duration_us")
    n = len(train)
    if count is not None:
        if count < 1:
            raise ValueError("count must be >= 1")
        for start in range(0, n, count):
            yield train.slice(start, min(start + count, n))
        return
    if duration_us <= 0:
        raise ValueError("duration_us must be > 0")
    bins = np.floor_divide(train.toa_us, duration_us).astype(np.int64)
    start = 0
    while start < n:
        stop = int(np.searchsorted(bins, bins[start], side="right"))
        yield train.slice(start, stop)
        start = stop


def save_predictions(train: LoadedTrain, labels, path) -> None:
    """Write the train's PDW columns with predicted labels as a labeled file."""
    labels = np.asarray(labels)
    if len(labels) != len(train):
        raise ValueError(
            f"labels length {len(labels)} != train length {len(train)}")
    records = np.empty(len(train), dtype=_LABELED)
    records["toa_us"] = train.toa_us
    records["freq_mhz"] = train.freq_mhz
    records["pw_us"] = train.pw_us
    records["aoa_deg"] = train.aoa_deg
    records["amp_db"] = train.amp_db
    records["emitter_id"] = labels.astype(np.uint32)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, FLAG_LABELS, len(train)))
        fh.write(records.tobytes())
