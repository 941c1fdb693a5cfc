"""Bit-exact train file persistence, windowing, and dataset statistics.

File layout (little-endian throughout):
    bytes 0-3    magic "TSRD"
    bytes 4-5    format version (u16), currently 1
    bytes 6-7    flags (u16), bit0 = labels present
    bytes 8-15   record count (u64)
    records      toa_us, freq_mhz, pw_us, aoa_deg, amp_db as f64,
                 then emitter_id as u32 when labels are present

A plain-text sidecar at <path>.meta carries key = value metadata
(seed, mode, collection_us, num_emitters, schedule for scan trains).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Union

import numpy as np

from .core import LabeledPulseTrain

MAGIC = b"TSRD"
FORMAT_VERSION = 1
FLAG_LABELS = 0x0001
HEADER = struct.Struct("<4sHHQ")
assert HEADER.size == 16

LABELED_DTYPE = np.dtype([
    ("toa_us", "<f8"), ("freq_mhz", "<f8"), ("pw_us", "<f8"),
    ("aoa_deg", "<f8"), ("amp_db", "<f8"), ("emitter_id", "<u4"),
])
UNLABELED_DTYPE = np.dtype([
    ("toa_us", "<f8"), ("freq_mhz", "<f8"), ("pw_us", "<f8"),
    ("aoa_deg", "<f8"), ("amp_db", "<f8"),
])

DEFAULT_CHUNK_RECORDS = 1 << 16


class FormatError(ValueError):
    """Malformed train file; message carries the offending byte offset."""


def _records(train: LabeledPulseTrain, labels: bool, start: int, stop: int) -> np.ndarray:
    dtype = LABELED_DTYPE if labels else UNLABELED_DTYPE
    out = np.empty(stop - start, dtype=dtype)
    out["toa_us"] = train.toa_us[start:stop]
    out["freq_mhz"] = train.freq_mhz[start:stop]
    out["pw_us"] = train.pw_us[start:stop]
    out["aoa_deg"] = train.aoa_deg[start:stop]
    out["amp_db"] = train.amp_db[start:stop]
    if labels:
        out["emitter_id"] = train.labels[start:stop]
    return out


def write_train(train: LabeledPulseTrain, path, labels: bool = True) -> int:
    """Write a train file; streaming, bounded memory. Returns bytes written."""
    n = len(train)
    flags = FLAG_LABELS if labels else 0
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, FORMAT_VERSION, flags, n))
        for start in range(0, n, DEFAULT_CHUNK_RECORDS):
            stop = min(start + DEFAULT_CHUNK_RECORDS, n)
            fh.write(_records(train, labels, start, stop).tobytes())
    dtype = LABELED_DTYPE if labels else UNLABELED_DTYPE
    return HEADER.size + n * dtype.itemsize


def _read_header(fh, path):
    raw = fh.read(HEADER.size)
    if len(raw) < HEADER.size:
        raise FormatError(f"{path}: truncated header at byte offset {len(raw)}")
    magic, version, flags, count = HEADER.unpack(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic at byte offset 0: {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {version} at byte offset 4")
    return flags, count


def iter_chunks(path, chunk_records: int = DEFAULT_CHUNK_RECORDS) -> Iterator[np.ndarray]:
    """Stream a train file as structured-array chunks (bounded memory)."""
    path = str(path)
    with open(path, "rb") as fh:
        flags, count = _read_header(fh, path)
        dtype = LABELED_DTYPE if flags & FLAG_LABELS else UNLABELED_DTYPE
        remaining = count
        offset = HEADER.size
        while remaining > 0:
            take = min(chunk_records, remaining)
            raw = fh.read(take * dtype.itemsize)
            if len(raw) != take * dtype.itemsize:
                raise FormatError(
                    f"{path}: truncated record data at byte offset {offset + len(raw)}")
            yield np.frombuffer(raw, dtype=dtype)
            remaining -= take
            offset += take * dtype.itemsize
        if fh.read(1):
            raise FormatError(f"{path}: trailing bytes at byte offset {offset}")


def read_sidecar(path) -> dict:
    meta_path = Path(str(path) + ".meta")
    meta = {}
    if meta_path.exists():
        for line in meta_path.read_text().splitlines():
            if "=" in line:
                key, value = line.split("=", 1)
                meta[key.strip()] = value.strip()
    return meta


def write_sidecar(train: LabeledPulseTrain, path) -> None:
    keys = ("seed", "mode", "collection_us", "num_emitters", "schedule")
    lines = [f"{k} = {train.meta[k]}" for k in keys if k in train.meta]
    Path(str(path) + ".meta").write_text("\n".join(lines) + "\n")


def read_train(path) -> LabeledPulseTrain:
    chunks = list(iter_chunks(path))
    meta = read_sidecar(path)
    if not chunks:
        t = LabeledPulseTrain.empty(meta=meta)
        return t
    data = np.concatenate(chunks)
    labeled = "emitter_id" in data.dtype.names
    return LabeledPulseTrain(
        toa_us=data["toa_us"].copy(), freq_mhz=data["freq_mhz"].copy(),
        pw_us=data["pw_us"].copy(), aoa_deg=data["aoa_deg"].copy(),
        amp_db=data["amp_db"].copy(),
        labels=data["emitter_id"].copy() if labeled
        else np.zeros(len(data), dtype=np.uint32),
        meta=meta)


def export_csv(train: LabeledPulseTrain, path) -> None:
    """Human-inspection CSV; the binary format stays canonical."""
    with open(path, "w", newline="\n") as fh:
        fh.write("toa_us,freq_mhz,pw_us,aoa_deg,amp_db,emitter_id\n")
        for i in range(len(train)):
            fh.write(f"{float(train.toa_us[i])!r},{float(train.freq_mhz[i])!r},"
                     f"{float(train.pw_us[i])!r},{float(train.aoa_deg[i])!r},"
                     f"{float(train.amp_db[i])!r},{int(train.labels[i])}\n")


# ---------------------------------------------------------------------------
# Windowing


@dataclass(frozen=True)
class FixedCount:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("window count must be >= 1")


@dataclass(frozen=True)
class FixedDuration:
    span_us: float

    def __post_init__(self):
        if self.span_us <= 0:
            raise ValueError("window span must be > 0")


WindowPolicy = Union[FixedCount, FixedDuration]


def window(train: LabeledPulseTrain, policy: WindowPolicy):
    """Partition a sorted train into (window, index) pairs.

    FixedCount chunks consecutively (last chunk may be short); FixedDuration
    bins into half-open [k*span, (k+1)*span) intervals, skipping empty bins.
    Concatenating the windows reproduces the train.
    """
    n = len(train)
    out = []
    if isinstance(policy, FixedCount):
        for w, start in enumerate(range(0, n, policy.n)):
            out.append((train.slice(start, min(start + policy.n, n)), w))
        return out
    span = policy.span_us
    bins = np.floor_divide(train.toa_us, span).astype(np.int64)
    start = 0
    while start < n:
        k = bins[start]
        stop = int(np.searchsorted(bins, k, side="right"))
        out.append((train.slice(start, stop), int(k)))
        start = stop
    return out


# ---------------------------------------------------------------------------
# Statistics


@dataclass
class FieldStats:
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    min: float = float("inf")
    max: float = float("-inf")

    def update(self, values: np.ndarray) -> None:
        if len(values) == 0:
            return
        n_b = len(values)
        mean_b = float(values.mean())
        m2_b = float(((values - mean_b) ** 2).sum())
        # Chan et al. parallel merge of (count, mean, M2)
        delta = mean_b - self.mean
        n = self.count + n_b
        self.mean += delta * n_b / n
        self.m2 += m2_b + delta * delta * self.count * n_b / n
        self.count = n
        self.min = min(self.min, float(values.min()))
        self.max = max(self.max, float(values.max()))

    @property
    def std(self) -> float:
        return (self.m2 / self.count) ** 0.5 if self.count else float("nan")

    def as_dict(self) -> dict:
        return {"count": self.count, "mean": self.mean, "std": self.std,
                "min": self.min, "max": self.max}


FIELD_NAMES = ("toa_us", "freq_mhz", "pw_us", "aoa_deg", "amp_db")


@dataclass
class SplitStats:
    train_count: int = 0
    pulse_counts: list = field(default_factory=list)
    emitter_counts: list = field(default_factory=list)
    dominant_shares: list = field(default_factory=list)
    emitter_shares: list = field(default_factory=list)
    fields: dict = field(default_factory=lambda: {f: FieldStats() for f in FIELD_NAMES})

    def add_train(self, path) -> None:
        counts = {}
        n = 0
        for chunk in iter_chunks(path):
            n += len(chunk)
            for f in FIELD_NAMES:
                self.fields[f].update(chunk[f])
            if "emitter_id" in chunk.dtype.names:
                labels, c = np.unique(chunk["emitter_id"], return_counts=True)
                for lab, cnt in zip(labels, c):
                    counts[int(lab)] = counts.get(int(lab), 0) + int(cnt)
        self.train_count += 1
        self.pulse_counts.append(n)
        meta = read_sidecar(path)
        if "num_emitters" in meta:
            self.emitter_counts.append(int(meta["num_emitters"]))
        else:
            self.emitter_counts.append(len(counts))
        if n > 0 and counts:
            shares = np.array(sorted(counts.values()), dtype=np.float64) / n
            self.dominant_shares.append(float(shares[-1]))
            self.emitter_shares.extend(shares.tolist())

    def summary(self) -> dict:
        pc = np.array(self.pulse_counts) if self.pulse_counts else np.zeros(0)
        ec = np.array(self.emitter_counts) if self.emitter_counts else np.zeros(0)
        out = {
            "train_count": self.train_count,
            "total_pulses": int(pc.sum()),
            "max_pulses": int(pc.max()) if len(pc) else 0,
            "min_pulses": int(pc.min()) if len(pc) else 0,
            "mean_pulses": float(pc.mean()) if len(pc) else 0.0,
            "max_emitters": int(ec.max()) if len(ec) else 0,
            "min_emitters": int(ec.min()) if len(ec) else 0,
            "mean_emitters": float(ec.mean()) if len(ec) else 0.0,
            "fields": {f: s.as_dict() for f, s in self.fields.items()},
        }
        if self.dominant_shares:
            out["max_dominant_share"] = float(max(self.dominant_shares))
            out["median_emitter_share"] = float(np.median(self.emitter_shares))
        return out


def list_split_files(dataset_dir) -> dict:
    """Map split name -> sorted train file paths under a dataset directory."""
    dataset_dir = Path(dataset_dir)
    manifest_path = dataset_dir / "manifest.json"
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())
        return {
            split: [dataset_dir / rec["file"] for rec in recs]
            for split, recs in manifest["splits"].items()
        }
    splits = {}
    for sub in sorted(p for p in dataset_dir.iterdir() if p.is_dir()):
        files = sorted(sub.glob("*.bin"))
        if files:
            splits[sub.name] = files
    if not splits:
        files = sorted(dataset_dir.glob("*.bin"))
        if files:
            splits["all"] = files
    return splits


def compute_stats(dataset_dir) -> dict:
    """Single streaming pass over a dataset directory; per-split and overall."""
    splits = list_split_files(dataset_dir)
    missing = [str(p) for files in splits.values() for p in files if not Path(p).exists()]
    if missing:
        raise FileNotFoundError("missing train files: " + ", ".join(missing))
    overall = SplitStats()
    report = {}
    for split, files in splits.items():
        stats = SplitStats()
        for path in files:
            stats.add_train(path)
            overall.add_train(path)
        report[split] = stats.summary()
    report["overall"] = overall.summary()
    return report


def export_histograms_csv(dataset_dir, path, bins: int = 60) -> None:
    """Fixed-range per-field histograms plus emitter counts, as one CSV."""
    ranges = {
        "toa_us": (0.0, None), "freq_mhz": (500.0, 18000.0),
        "pw_us": (0.0, 370.0), "aoa_deg": (-180.0, 180.0),
        "amp_db": (-220.0, 100.0),
    }
    splits = list_split_files(dataset_dir)
    # First pass bounds for the open-ended toa range.
    toa_max = 1.0
    hists = {f: np.zeros(bins, dtype=np.int64) for f in FIELD_NAMES}
    emitter_counts = []
    for files in splits.values():
        for p in files:
            meta = read_sidecar(p)
            if "collection_us" in meta:
                toa_max = max(toa_max, float(meta["collection_us"]))
            if "num_emitters" in meta:
                emitter_counts.append(int(meta["num_emitters"]))
    edges = {}
    for f in FIELD_NAMES:
        lo, hi = ranges[f]
        edges[f] = np.linspace(lo, hi if hi is not None else toa_max * 1.01, bins + 1)
    for files in splits.values():
        for p in files:
            for chunk in iter_chunks(p):
                for f in FIELD_NAMES:
                    h, _ = np.histogram(chunk[f], bins=edges[f])
                    hists[f] += h
    with open(path, "w", newline="\n") as fh:
        fh.write("field,bin_lo,bin_hi,count\n")
        for f in FIELD_NAMES:
            for i in range(bins):
                fh.write(f"{f},{edges[f][i]!r},{edges[f][i + 1]!r},{hists[f][i]}\n")
        if emitter_counts:
            ec = np.array(emitter_counts)
            h, e = np.histogram(ec, bins=np.arange(0, ec.max() + 2))
            for i, c in enumerate(h):
                fh.write(f"num_emitters,{e[i]},{e[i + 1]},{c}\n")
