"""Acceptance gate: one test per criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s` for the per-criterion lines.
"""

import math
import time

import numpy as np
import pytest

from pdwsim.core import LabeledPulseTrain, Seed
from pdwsim.dataset_io import compute_stats, read_train, write_train
from pdwsim.emitters import (
    ConstantPri,
    EmitterSpec,
    StaggeredPri,
    emit_pulses,
    sample_catalogue,
)
from pdwsim.metrics import baseline_deinterleave, v_measure
from pdwsim.propagation import SPEED_OF_LIGHT_M_PER_US, NoiseModel, received_pdw, RxGeometry
from pdwsim.emitters import TxPulse
from pdwsim.receiver import (
    ReceiverSpec,
    dwell_at_array,
    in_band,
    merge_streams,
    receive,
)
from pdwsim.scenario import ScenarioConfig, generate_dataset
from tests.test_metrics import brute_force_v

NO_NOISE = NoiseModel()
ALWAYS = float("-inf")


def _ok(name):
    print(f"\nACCEPTANCE PASS: {name}")


def plain_type(tx_type):
    return type(tx_type)(**{**tx_type.__dict__,
                            "rotation_period_s": None, "beamwidth_deg": None})


def const_emitter(i, pri=1000.0, freq=1000.0, pos=(10_000.0, 0.0), start=0.0,
                  mode=None):
    tx_type = plain_type(sample_catalogue(Seed(7))[0])
    return EmitterSpec(emitter_id=i, tx_type=tx_type, position_m=pos,
                       mode=mode or ConstantPri(pri, freq_mhz=freq),
                       start_time_us=start)


def run_pipeline(specs, rx, seed=11, noise=NO_NOISE):
    streams = [emit_pulses(s, rx.collection_us,
                           Seed(seed).child("emitter", s.emitter_id).generator())
               for s in specs]
    return receive(streams, specs, rx, noise, Seed(seed))


def test_metric_oracle():
    start = time.time()
    rng = Seed(101).child("acc", 0).generator()
    for _ in range(1000):
        n = int(rng.integers(1, 13))
        truth = rng.integers(0, 4, n).tolist()
        pred = rng.integers(0, 4, n).tolist()
        r = v_measure(truth, pred)
        h, c, v = brute_force_v(truth, pred)
        assert abs(r["homogeneity"] - h) <= 1e-12
        assert abs(r["completeness"] - c) <= 1e-12
        assert abs(r["v"] - v) <= 1e-12
    assert v_measure([0, 0, 1, 1], [0, 0, 1, 2])["v"] == pytest.approx(0.8, abs=1e-15)
    elapsed = time.time() - start
    assert elapsed < 5.0
    _ok(f"metric oracle (1000 instances, {elapsed:.2f}s)")


def test_merge_oracle():
    start = time.time()
    rng = Seed(102).child("acc", 0).generator()

    def tiebreak_key(train):
        # per-emitter sequence number within the already-merged train
        seq = np.zeros(len(train), dtype=np.int64)
        seen = {}
        for i, lab in enumerate(train.labels):
            seq[i] = seen.get(int(lab), 0)
            seen[int(lab)] = seq[i] + 1
        return seq

    # half the scenarios exercise merge_streams on synthetic streams
    for _ in range(50):
        k = int(rng.integers(1, 11))
        streams = []
        recs = []
        for lab in range(k):
            n = int(rng.integers(0, 10_001))
            toas = np.sort(rng.integers(0, 2000, n).astype(np.float64))
            streams.append(LabeledPulseTrain(
                toa_us=toas, freq_mhz=np.full(n, 1000.0), pw_us=np.full(n, 1.0),
                aoa_deg=np.zeros(n), amp_db=np.full(n, -50.0),
                labels=np.full(n, lab, dtype=np.uint32)))
            recs.extend((float(t), lab, i) for i, t in enumerate(toas))
        merged = merge_streams(streams)
        recs.sort()
        assert np.array_equal(merged.toa_us, [r[0] for r in recs])
        assert np.array_equal(merged.labels, [r[1] for r in recs])

    # half exercise receive() against a full-sort oracle built independently
    rx = ReceiverSpec(mode="stare", collection_us=100_000.0,
                      detection_threshold_db=ALWAYS)
    for s in range(50):
        k = int(rng.integers(1, 11))
        specs = []
        recs = []
        for lab in range(k):
            pri = float(rng.choice([10.0, 20.0, 40.0, 1000.0]))
            pos = (float(rng.uniform(1e3, 1e5)), float(rng.uniform(-1e4, 1e4)))
            spec = const_emitter(lab, pri=pri, pos=pos,
                                 start=float(rng.integers(0, 50)))
            specs.append(spec)
            delay = math.hypot(*pos) / SPEED_OF_LIGHT_M_PER_US
            n = int(math.ceil((rx.collection_us - spec.start_time_us) / pri))
            toas = spec.start_time_us + pri * np.arange(n) + delay
            recs.extend((float(t), lab, i) for i, t in enumerate(toas)
                        if spec.start_time_us + pri * i < rx.collection_us)
        train = run_pipeline(specs, rx, seed=s)
        recs.sort()
        assert len(train) == len(recs)
        assert np.array_equal(train.toa_us, [r[0] for r in recs])
        assert np.array_equal(train.labels, [r[1] for r in recs])
        assert np.array_equal(tiebreak_key(train), [r[2] for r in recs])

    elapsed = time.time() - start
    assert elapsed < 30.0
    _ok(f"merge oracle (100 scenarios, {elapsed:.2f}s)")


def test_path_loss_law():
    geom = RxGeometry(mainlobe_gain_db=0.0)
    rng = Seed(0).generator()
    tx = TxPulse(0.0, 1000.0, 1.0, 0.0, 0)
    for d in (10.0, 123.0, 5_000.0, 90_000.0):
        a1 = received_pdw(tx, (d, 0.0), geom, NO_NOISE, rng).amp_db
        a2 = received_pdw(tx, (2 * d, 0.0), geom, NO_NOISE, rng).amp_db
        assert abs((a1 - a2) - 20.0 * math.log10(2.0)) < 1e-9
    _ok("path-loss law (doubling distance costs 6.0206 dB)")


def test_scan_band_invariant(tmp_path):
    start = time.time()
    config = ScenarioConfig.desk_scale(
        mode="scan", collection_us=10_000_000.0, trains_per_split=(20, 0, 0))
    generate_dataset(config, 2025, tmp_path)
    total = 0
    from pdwsim.scenario import sample_dwell_schedule
    for i, path in enumerate(sorted((tmp_path / "train").glob("*.bin"))):
        train = read_train(path)
        total += len(train)
        if len(train) == 0:
            continue
        sched = sample_dwell_schedule(config, Seed(2025).child("train", i))
        centres = dwell_at_array(sched, train.toa_us)
        assert np.all(in_band(train.freq_mhz, centres))
    elapsed = time.time() - start
    assert total >= 100_000, f"only {total} pulses generated"
    assert elapsed < 10.0
    _ok(f"scan band invariant ({total} pulses, 100% in band, {elapsed:.2f}s)")


def test_pri_fidelity():
    rx = ReceiverSpec(mode="stare", collection_us=1_000_000.0,
                      detection_threshold_db=ALWAYS)
    train = run_pipeline([const_emitter(0, pri=1000.0)], rx)
    diffs = np.diff(train.toa_us)
    assert np.all(np.abs(diffs - 1000.0) < 1e-9)

    levels = (1300.0, 700.0, 2100.0)
    train = run_pipeline([const_emitter(0, mode=StaggeredPri(levels, 1000.0))], rx)
    diffs = np.diff(train.toa_us)
    period = len(levels)
    assert np.all(np.abs(diffs[period:] - diffs[:-period]) < 1e-9)
    # the stagger is not degenerate: adjacent intervals differ
    assert np.max(np.abs(diffs[1:] - diffs[:-1])) > 1.0
    _ok("PRI fidelity (constant within 1e-9 us; stagger period preserved)")


def test_envelope_check(tmp_path):
    emitter_counts = []
    for mode in ("stare", "scan"):
        config = ScenarioConfig.desk_scale(mode=mode, trains_per_split=(50, 0, 0))
        out = tmp_path / mode
        manifest = generate_dataset(config, 31337 if mode == "stare" else 31338, out)
        stats = compute_stats(out)["train"]
        f = stats["fields"]
        if stats["total_pulses"]:
            assert -180.0 <= f["aoa_deg"]["min"] and f["aoa_deg"]["max"] <= 180.0
            assert 500.0 <= f["freq_mhz"]["min"] and f["freq_mhz"]["max"] <= 18000.0
            assert 0.007 <= f["pw_us"]["min"] and f["pw_us"]["max"] <= 368.522
            assert -212.082 <= f["amp_db"]["min"] and f["amp_db"]["max"] <= 92.950
        emitter_counts += [r["num_emitters"] for r in manifest["splits"]["train"]]

    counts = np.array(emitter_counts)
    assert counts.min() >= 0 and counts.max() <= 100
    # flatness below 80 in decade bins: no bin deviating > 3x from uniform
    hist, _ = np.histogram(counts[counts < 80], bins=np.arange(0, 81, 10))
    expected = len(counts) * (10.0 / 90.5)  # uniform mass of one decade bin
    assert np.all(hist <= 3.0 * expected), hist
    assert np.all(hist >= expected / 3.0), hist
    _ok(f"envelope check (100 trains, emitter decade bins {hist.tolist()})")


def test_reproducibility(tmp_path):
    import hashlib

    def tree_hash(root):
        h = hashlib.sha256()
        for p in sorted(root.rglob("*")):
            if p.is_file():
                h.update(str(p.relative_to(root)).encode())
                h.update(p.read_bytes())
        return h.hexdigest()

    config = ScenarioConfig.desk_scale(trains_per_split=(3, 1, 1))
    generate_dataset(config, 77, tmp_path / "a")
    generate_dataset(config, 77, tmp_path / "b")
    generate_dataset(config, 78, tmp_path / "c")
    assert tree_hash(tmp_path / "a") == tree_hash(tmp_path / "b")
    assert tree_hash(tmp_path / "a") != tree_hash(tmp_path / "c")
    _ok("reproducibility (same seed byte-identical, different seed differs)")


def test_throughput(tmp_path):
    cat = sample_catalogue(Seed(7))
    rx = ReceiverSpec(mode="stare", collection_us=10_000_000.0,
                      detection_threshold_db=ALWAYS)
    noise = NoiseModel(0.05, 2.0, 0.02, 1.5, 1.5)
    specs = [const_emitter(i, pri=100.0 + i, freq=1000.0 + 10 * i,
                           pos=(10_000.0 + i, 0.0)) for i in range(12)]
    start = time.time()
    train = run_pipeline(specs, rx, noise=noise)
    write_train(train, tmp_path / "tp.bin")
    elapsed = time.time() - start
    assert len(train) >= 1_000_000
    assert elapsed < 10.0
    _ok(f"throughput ({len(train)} pulses generated+written in {elapsed:.2f}s)")


def test_end_to_end_harness():
    rx = ReceiverSpec(mode="stare", collection_us=100_000.0,
                      detection_threshold_db=ALWAYS)
    # well separated in frequency and AoA, zero noise
    separated = [
        const_emitter(0, pri=1000.0, freq=1000.0, pos=(10_000.0, 0.0)),
        const_emitter(1, pri=1300.0, freq=1200.0, pos=(0.0, 10_000.0)),
    ]
    train = run_pipeline(separated, rx)
    pred = baseline_deinterleave(train)
    assert v_measure(train.labels, pred)["v"] == 1.0

    identical = [
        const_emitter(0, pri=1000.0, freq=1000.0, pos=(10_000.0, 0.0)),
        const_emitter(1, pri=1300.0, freq=1000.0, pos=(10_000.0, 0.0),
                      start=13.0),
    ]
    train = run_pipeline(identical, rx)
    pred = baseline_deinterleave(train)
    assert v_measure(train.labels, pred)["v"] < 1.0
    _ok("end-to-end harness (baseline v=1 separated, v<1 identical emitters)")
