import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdwsim.core import LabeledPulseTrain, Seed
from pdwsim.dataset_io import (
    FixedCount,
    FixedDuration,
    FormatError,
    HEADER,
    compute_stats,
    export_csv,
    iter_chunks,
    read_train,
    window,
    write_train,
    write_sidecar,
)


def random_train(n, seed=0, meta=None):
    rng = Seed(seed).child("io", 0).generator()
    toa = np.sort(rng.uniform(0, 1e6, n))
    return LabeledPulseTrain(
        toa_us=toa,
        freq_mhz=rng.uniform(500, 18000, n),
        pw_us=rng.uniform(0.01, 300, n),
        aoa_deg=rng.uniform(-180, 180, n),
        amp_db=rng.uniform(-200, 90, n),
        labels=rng.integers(0, 8, n).astype(np.uint32),
        meta=dict(meta or {}),
    )


def test_empty_train_is_header_only(tmp_path):
    path = tmp_path / "empty.bin"
    n = write_train(LabeledPulseTrain.empty(), path)
    assert n == 16 == path.stat().st_size == HEADER.size


def test_single_pulse_roundtrip_bitwise(tmp_path):
    t = random_train(1, seed=5)
    path = tmp_path / "one.bin"
    write_train(t, path)
    r = read_train(path)
    for f in ("toa_us", "freq_mhz", "pw_us", "aoa_deg", "amp_db"):
        assert getattr(t, f).tobytes() == getattr(r, f).tobytes()
    assert np.array_equal(t.labels, r.labels)


def test_write_read_write_byte_identical(tmp_path):
    t = random_train(100_000, seed=6)
    p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
    write_train(t, p1)
    write_train(read_train(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_unlabeled_roundtrip(tmp_path):
    t = random_train(50, seed=2)
    path = tmp_path / "u.bin"
    n = write_train(t, path, labels=False)
    assert n == 16 + 50 * 40
    r = read_train(path)
    assert np.array_equal(r.toa_us, t.toa_us)
    assert np.all(r.labels == 0)


def test_sidecar_roundtrip(tmp_path):
    t = random_train(3, seed=3, meta={"seed": "1/train/0", "mode": "scan",
                                      "collection_us": 100000.0,
                                      "num_emitters": 4, "schedule": "500:1.0"})
    path = tmp_path / "m.bin"
    write_train(t, path)
    write_sidecar(t, path)
    meta = read_train(path).meta
    assert meta["mode"] == "scan"
    assert meta["num_emitters"] == "4"
    assert meta["schedule"] == "500:1.0"


def test_bad_magic_reports_offset(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOPE" + bytes(12))
    with pytest.raises(FormatError, match="byte offset 0"):
        read_train(path)


def test_truncated_file_reports_offset(tmp_path):
    t = random_train(4, seed=9)
    path = tmp_path / "t.bin"
    write_train(t, path)
    data = path.read_bytes()
    path.write_bytes(data[:-10])
    with pytest.raises(FormatError, match="truncated record data"):
        read_train(path)


def test_trailing_bytes_rejected(tmp_path):
    t = random_train(4, seed=9)
    path = tmp_path / "t.bin"
    write_train(t, path)
    path.write_bytes(path.read_bytes() + b"x")
    with pytest.raises(FormatError, match="trailing bytes"):
        read_train(path)


def test_bad_version_rejected(tmp_path):
    path = tmp_path / "v.bin"
    path.write_bytes(HEADER.pack(b"TSRD", 9, 1, 0))
    with pytest.raises(FormatError, match="version 9"):
        read_train(path)


def test_iter_chunks_bounded(tmp_path):
    t = random_train(1000, seed=4)
    path = tmp_path / "c.bin"
    write_train(t, path)
    chunks = list(iter_chunks(path, chunk_records=300))
    assert [len(c) for c in chunks] == [300, 300, 300, 100]


def test_window_fixed_count_sizes():
    t = random_train(10, seed=1)
    wins = window(t, FixedCount(4))
    assert [len(w) for w, _ in wins] == [4, 4, 2]
    assert [i for _, i in wins] == [0, 1, 2]


def test_window_fixed_duration_bins():
    t = random_train(3, seed=1)
    t.toa_us = np.array([0.0, 5.0, 10.0])
    wins = window(t, FixedDuration(10.0))
    assert [len(w) for w, _ in wins] == [2, 1]
    assert [i for _, i in wins] == [0, 1]
    assert np.array_equal(wins[1][0].toa_us, [10.0])


def test_window_skips_empty_duration_bins():
    t = random_train(2, seed=1)
    t.toa_us = np.array([1.0, 95.0])
    wins = window(t, FixedDuration(10.0))
    assert [i for _, i in wins] == [0, 9]


@settings(max_examples=25, deadline=None)
@given(n=st.integers(min_value=0, max_value=300),
       count=st.integers(min_value=1, max_value=50))
def test_window_count_is_partition(n, count):
    t = random_train(n, seed=8)
    wins = window(t, FixedCount(count))
    if n == 0:
        assert wins == []
        return
    toas = np.concatenate([w.toa_us for w, _ in wins])
    labs = np.concatenate([w.labels for w, _ in wins])
    assert np.array_equal(toas, t.toa_us)
    assert np.array_equal(labs, t.labels)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(min_value=1, max_value=300),
       span=st.floats(min_value=10.0, max_value=1e6))
def test_window_duration_is_partition(n, span):
    t = random_train(n, seed=8)
    wins = window(t, FixedDuration(span))
    toas = np.concatenate([w.toa_us for w, _ in wins])
    assert np.array_equal(toas, t.toa_us)
    for w, k in wins:
        assert np.all(w.toa_us >= k * span)
        assert np.all(w.toa_us < (k + 1) * span)


def write_dataset(tmp_path, trains):
    d = tmp_path / "ds" / "train"
    d.mkdir(parents=True)
    for i, t in enumerate(trains):
        write_train(t, d / f"train_{i:05d}.bin")
    return tmp_path / "ds"


def test_compute_stats_counts(tmp_path):
    ds = write_dataset(tmp_path, [random_train(3, seed=1), random_train(5, seed=2)])
    report = compute_stats(ds)
    s = report["train"]
    assert s["train_count"] == 2
    assert s["total_pulses"] == 8
    assert s["mean_pulses"] == 4.0
    assert s["max_pulses"] == 5 and s["min_pulses"] == 3
    assert report["overall"]["total_pulses"] == 8


def test_compute_stats_degenerate_amplitude(tmp_path):
    t = random_train(10, seed=3)
    t.amp_db = np.full(10, -50.0)
    ds = write_dataset(tmp_path, [t])
    f = compute_stats(ds)["train"]["fields"]["amp_db"]
    assert f["std"] == 0.0 and f["min"] == f["max"] == -50.0


def test_compute_stats_matches_numpy_oracle(tmp_path):
    trains = [random_train(n, seed=n) for n in (37, 111, 260)]
    ds = write_dataset(tmp_path, trains)
    f = compute_stats(ds)["train"]["fields"]["freq_mhz"]
    allv = np.concatenate([t.freq_mhz for t in trains])
    assert f["mean"] == pytest.approx(allv.mean(), rel=1e-12)
    assert f["std"] == pytest.approx(allv.std(), rel=1e-9)
    assert f["min"] == allv.min() and f["max"] == allv.max()


def test_compute_stats_missing_file(tmp_path):
    ds = write_dataset(tmp_path, [random_train(3, seed=1)])
    import json
    (ds / "manifest.json").write_text(json.dumps(
        {"splits": {"train": [{"file": "train/missing.bin"}]}}))
    with pytest.raises(FileNotFoundError, match="missing.bin"):
        compute_stats(ds)


def test_export_csv(tmp_path):
    t = random_train(4, seed=1)
    path = tmp_path / "t.csv"
    export_csv(t, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "toa_us,freq_mhz,pw_us,aoa_deg,amp_db,emitter_id"
    assert len(lines) == 5
    assert float(lines[1].split(",")[0]) == t.toa_us[0]
