"""Randomized scenario sampling and dataset-scale generation."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .core import LabeledPulseTrain, Seed
from .dataset_io import write_sidecar, write_train
from .emitters import (
    CATALOGUE_SIZE,
    ConstantPri,
    EmitterSpec,
    FreqHopping,
    JitteredPri,
    StaggeredPri,
    emit_pulses,
    sample_catalogue,
)
from .propagation import NoiseModel
from .receiver import BAND_CENTRES_MHZ, DwellSchedule, ReceiverSpec, receive

SPLIT_NAMES = ("train", "validation", "test")


@dataclass(frozen=True)
class ScenarioConfig:
    max_emitters: int = 100
    test_max_emitters: int = 110
    collection_us: float = 10_000_000.0
    mode: str = "stare"
    arena_radius_m: float = 200_000.0
    min_distance_m: float = 100.0
    orientation_deg: float = 0.0
    fov_deg: float = 360.0
    mainlobe_gain_db: float = 10.0
    noise_floor_db: float = -100.0
    detection_threshold_db: float = 3.0
    detection_slope_db: float = 2.0
    noise: NoiseModel = field(default_factory=lambda: NoiseModel(
        sigma_toa_us=0.05, sigma_freq_mhz=2.0, sigma_pw_fraction=0.02,
        sigma_aoa_deg=1.5, sigma_amp_db=1.5))
    trains_per_split: tuple = (2500, 250, 250)
    tail_start: int = 80  # emitter counts above this tail off linearly
    catalogue_seed: int = 7
    dwell_min_us: float = 5_000.0
    dwell_max_us: float = 100_000.0

    def __post_init__(self):
        if self.max_emitters < 0 or self.test_max_emitters < 0:
            raise ValueError("emitter caps must be >= 0")
        if self.arena_radius_m <= self.min_distance_m:
            raise ValueError("arena radius must exceed the minimum distance")

    @staticmethod
    def desk_scale(**overrides) -> "ScenarioConfig":
        """Small configuration for tests and local experiments."""
        defaults = dict(collection_us=100_000.0, trains_per_split=(8, 2, 2))
        defaults.update(overrides)
        return ScenarioConfig(**defaults)


@dataclass
class Scenario:
    seed: Seed
    receiver: ReceiverSpec
    emitters: list

    def __post_init__(self):
        ids = [e.emitter_id for e in self.emitters]
        if ids != list(range(len(ids))):
            raise ValueError("emitter ids must be dense 0..K-1")


def _emitter_count_weights(max_emitters: int, tail_start: int) -> np.ndarray:
    k = np.arange(max_emitters + 1, dtype=np.float64)
    w = np.ones_like(k)
    if max_emitters > tail_start:
        tail = k > tail_start
        w[tail] = (max_emitters + 1 - k[tail]) / (max_emitters + 1 - tail_start)
    return w / w.sum()


def _log_uniform(rng, lo, hi):
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def _sample_mode(rng: np.random.Generator, tx_type) -> object:
    pw_range = (tx_type.pw_min_us, tx_type.pw_max_us)
    if rng.random() < 0.7:
        pw_program = (_log_uniform(rng, *pw_range),)
    else:
        n_pw = int(rng.integers(2, 5))
        pw_program = tuple(_log_uniform(rng, *pw_range) for _ in range(n_pw))

    freq = rng.uniform(tx_type.freq_min_mhz, tx_type.freq_max_mhz)
    pri_range = (tx_type.pri_min_us, tx_type.pri_max_us)

    def sample_pri_pattern(kind: str):
        if kind == "constant":
            return ConstantPri(_log_uniform(rng, *pri_range), freq, pw_program)
        if kind == "staggered":
            n_lev = int(rng.integers(2, 6))
            levels = tuple(_log_uniform(rng, *pri_range) for _ in range(n_lev))
            return StaggeredPri(levels, freq, pw_program)
        if kind == "jittered":
            return JitteredPri(_log_uniform(rng, *pri_range),
                               rng.uniform(0.01, 0.3), freq, pw_program)
        raise ValueError(kind)

    kind = tx_type.allowed_modes[int(rng.integers(len(tx_type.allowed_modes)))]
    if kind != "hopping":
        return sample_pri_pattern(kind)

    n_ch = int(rng.integers(2, 9))
    channels = tuple(rng.uniform(tx_type.freq_min_mhz, tx_type.freq_max_mhz)
                     for _ in range(n_ch))
    hop_every = int(rng.integers(1, 5))
    base_kind = ("constant", "staggered", "jittered")[int(rng.integers(3))]
    return FreqHopping(channels, hop_every, sample_pri_pattern(base_kind), pw_program)


def sample_dwell_schedule(config: ScenarioConfig, seed: Seed) -> DwellSchedule:
    """Seeded random permutation of all 36 bands with log-uniform dwells."""
    rng = seed.child("schedule", 0).generator()
    centres = rng.permutation(np.asarray(BAND_CENTRES_MHZ))
    entries = tuple(
        (float(c), _log_uniform(rng, config.dwell_min_us, config.dwell_max_us))
        for c in centres)
    return DwellSchedule(entries=entries)


def sample_scenario(config: ScenarioConfig, seed: Seed,
                    catalogue: Optional[list] = None,
                    max_emitters: Optional[int] = None) -> Scenario:
    if catalogue is None:
        catalogue = sample_catalogue(Seed(config.catalogue_seed))
    cap = config.max_emitters if max_emitters is None else max_emitters

    rng = seed.child("scenario", 0).generator()
    weights = _emitter_count_weights(cap, config.tail_start)
    k = int(rng.choice(cap + 1, p=weights)) if cap > 0 else 0

    schedule = None
    if config.mode == "scan":
        schedule = sample_dwell_schedule(config, seed)
    receiver = ReceiverSpec(
        mode=config.mode, schedule=schedule,
        orientation_deg=config.orientation_deg, fov_deg=config.fov_deg,
        mainlobe_gain_db=config.mainlobe_gain_db,
        noise_floor_db=config.noise_floor_db,
        collection_us=config.collection_us,
        detection_threshold_db=config.detection_threshold_db,
        detection_slope_db=config.detection_slope_db)

    emitters = []
    for i in range(k):
        tx_type = catalogue[int(rng.integers(CATALOGUE_SIZE))]
        # Uniform over the annulus between the minimum distance and the arena edge.
        r = math.sqrt(rng.uniform(config.min_distance_m ** 2,
                                  config.arena_radius_m ** 2))
        theta = rng.uniform(-math.pi, math.pi)
        pos = (r * math.cos(theta), r * math.sin(theta))
        mode = _sample_mode(rng, tx_type)
        start = rng.uniform(0.0, config.collection_us)
        emitters.append(EmitterSpec(emitter_id=i, tx_type=tx_type,
                                    position_m=pos, mode=mode,
                                    start_time_us=start))
    return Scenario(seed=seed, receiver=receiver, emitters=emitters)


def simulate_scenario(scenario: Scenario, noise: NoiseModel) -> LabeledPulseTrain:
    """Run the full emitter -> propagation -> receiver pipeline for one train."""
    streams = []
    for spec in scenario.emitters:
        rng = scenario.seed.child("emitter", spec.emitter_id).generator()
        streams.append(emit_pulses(spec, scenario.receiver.collection_us, rng))
    meta = {
        "mode": scenario.receiver.mode,
        "collection_us": scenario.receiver.collection_us,
        "num_emitters": len(scenario.emitters),
    }
    if scenario.receiver.schedule is not None:
        meta["schedule"] = ";".join(
            f"{c:.0f}:{d!r}" for c, d in scenario.receiver.schedule.entries)
    return receive(streams, scenario.emitters, scenario.receiver, noise,
                   scenario.seed, meta=meta)


def _generate_one(args):
    config, master_seed, split, index, out_path = args
    seed = Seed(master_seed).child(split, index)
    cap = config.test_max_emitters if split == "test" else config.max_emitters
    scenario = sample_scenario(config, seed, max_emitters=cap)
    train = simulate_scenario(scenario, config.noise)
    train.meta["seed"] = f"{master_seed}/{split}/{index}"
    n_bytes = write_train(train, out_path)
    write_sidecar(train, out_path)
    return {
        "file": os.path.relpath(out_path, os.path.dirname(os.path.dirname(out_path))),
        "split": split,
        "index": index,
        "num_emitters": len(scenario.emitters),
        "num_pulses": len(train),
        "bytes": n_bytes,
    }


def generate_dataset(config: ScenarioConfig, master_seed: int, out_dir,
                     threads: int = 1) -> dict:
    """Generate all splits under out_dir and return the manifest (also written)."""
    out_dir = Path(out_dir)
    jobs = []
    for split, count in zip(SPLIT_NAMES, config.trains_per_split):
        split_dir = out_dir / split
        if count > 0:
            split_dir.mkdir(parents=True, exist_ok=True)
        for t in range(count):
            jobs.append((config, master_seed, split, t,
                         str(split_dir / f"train_{t:05d}.bin")))

    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_generate_one, jobs))
    else:
        records = [_generate_one(j) for j in jobs]

    manifest = {
        "master_seed": master_seed,
        "mode": config.mode,
        "collection_us": config.collection_us,
        "max_emitters": config.max_emitters,
        "test_max_emitters": config.test_max_emitters,
        "catalogue_seed": config.catalogue_seed,
        "splits": {
            split: [r for r in records if r["split"] == split]
            for split, count in zip(SPLIT_NAMES, config.trains_per_split)
            if count > 0
        },
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
