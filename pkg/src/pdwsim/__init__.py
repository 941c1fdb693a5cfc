"""Synthetic interleaved radar pulse train generation and deinterleaving benchmark."""

from .core import LabeledPulseTrain, Pdw, Seed, derive_seed, normalize_angle
from .dataset_io import (
    FixedCount,
    FixedDuration,
    compute_stats,
    read_train,
    window,
    write_train,
)
from .emitters import (
    ConstantPri,
    EmitterSpec,
    FreqHopping,
    JitteredPri,
    StaggeredPri,
    TransmitterType,
    TxPulse,
    emit_pulses,
    next_interval,
    sample_catalogue,
)
from .metrics import baseline_deinterleave, contingency, score_dataset, v_measure
from .propagation import BLOCKED, NoiseModel, path_loss_db, received_pdw, rx_gain_db, true_aoa
from .receiver import (
    DwellSchedule,
    ReceiverSpec,
    detection_probability,
    dwell_at,
    in_band,
    merge_streams,
    receive,
)
from .scenario import Scenario, ScenarioConfig, generate_dataset, sample_scenario, simulate_scenario

__version__ = "0.1.0"
