"""Deinterleaving evaluation: contingency counts, V-measure, dataset scoring."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import LabeledPulseTrain
from .dataset_io import FixedCount, FixedDuration, WindowPolicy, read_train, window


@dataclass
class Contingency:
    """Joint counts of true class x predicted cluster."""

    counts: np.ndarray  # shape (n_classes, n_clusters)
    class_totals: np.ndarray
    cluster_totals: np.ndarray
    n: int


def contingency(truth: Sequence[int], pred: Sequence[int]) -> Contingency:
    truth = np.asarray(truth)
    pred = np.asarray(pred)
    if truth.shape != pred.shape:
        raise ValueError(f"label length mismatch: {truth.shape} vs {pred.shape}")
    _, ti = np.unique(truth, return_inverse=True)
    _, pi = np.unique(pred, return_inverse=True)
    n_c = ti.max() + 1 if len(ti) else 0
    n_k = pi.max() + 1 if len(pi) else 0
    counts = np.zeros((n_c, n_k), dtype=np.int64)
    np.add.at(counts, (ti, pi), 1)
    return Contingency(counts=counts,
                       class_totals=counts.sum(axis=1),
                       cluster_totals=counts.sum(axis=0),
                       n=len(truth))


def _entropy(totals: np.ndarray, n: int) -> float:
    p = totals[totals > 0] / n
    return float(-(p * np.log(p)).sum())


def _conditional_entropy(counts: np.ndarray, cond_totals: np.ndarray, n: int) -> float:
    # H(rows | cols) with cond_totals the column marginals
    nz = counts > 0
    c = counts[nz].astype(np.float64)
    col = np.broadcast_to(cond_totals, counts.shape)[nz].astype(np.float64)
    return float(-(c / n * np.log(c / col)).sum())


def v_measure(truth: Sequence[int], pred: Sequence[int]) -> dict:
    """Homogeneity, completeness, and their harmonic mean (natural-log entropies).

    Degenerate conventions: h = 1 when the truth has a single class,
    c = 1 when the prediction has a single cluster, v = 0 when h + c = 0.
    """
    ct = contingency(truth, pred)
    if ct.n == 0:
        raise ValueError("v_measure requires at least one sample")
    h_c = _entropy(ct.class_totals, ct.n)
    h_k = _entropy(ct.cluster_totals, ct.n)
    h_c_given_k = _conditional_entropy(ct.counts, ct.cluster_totals, ct.n)
    h_k_given_c = _conditional_entropy(ct.counts.T, ct.class_totals, ct.n)
    h = 1.0 if h_c == 0.0 else 1.0 - h_c_given_k / h_c
    c = 1.0 if h_k == 0.0 else 1.0 - h_k_given_c / h_k
    v = 0.0 if h + c == 0.0 else 2.0 * h * c / (h + c)
    return {"homogeneity": h, "completeness": c, "v": v}


@dataclass
class MetricReport:
    per_window: list = field(default_factory=list)  # (file, window_index, v)

    @property
    def num_windows(self) -> int:
        return len(self.per_window)

    @property
    def median_v(self) -> Optional[float]:
        if not self.per_window:
            return None
        return float(np.median([v for _, _, v in self.per_window]))

    def per_train_median(self) -> Optional[float]:
        if not self.per_window:
            return None
        by_file = {}
        for f, _, v in self.per_window:
            by_file.setdefault(f, []).append(v)
        return float(np.median([np.median(vs) for vs in by_file.values()]))


def score_train(truth: LabeledPulseTrain, pred_labels: np.ndarray,
                policy: WindowPolicy, name: str = "", report: MetricReport | None = None
                ) -> MetricReport:
    if len(pred_labels) != len(truth):
        raise ValueError(
            f"{name}: prediction length {len(pred_labels)} != truth length {len(truth)}")
    report = report if report is not None else MetricReport()
    offset = 0
    for win, w_idx in window(truth, policy):
        n = len(win)
        if n == 0:
            continue
        res = v_measure(win.labels, pred_labels[offset:offset + n])
        report.per_window.append((name, w_idx, res["v"]))
        offset += n
    return report


def score_dataset(truth_dir, pred_dir, policy: WindowPolicy) -> MetricReport:
    """Score a prediction directory against a truth directory, window by window.

    Files are paired by relative path; every truth file must have a prediction
    of identical length, with windowing applied to the truth ToAs on both sides.
    """
    truth_dir, pred_dir = Path(truth_dir), Path(pred_dir)
    truth_files = sorted(p for p in truth_dir.rglob("*.bin"))
    if not truth_files:
        raise ValueError(f"no train files under {truth_dir}")
    report = MetricReport()
    for tf in truth_files:
        rel = tf.relative_to(truth_dir)
        pf = pred_dir / rel
        if not pf.exists():
            raise ValueError(f"missing prediction file for {rel}: {pf}")
        truth = read_train(tf)
        pred = read_train(pf)
        if len(pred) != len(truth):
            raise ValueError(
                f"{rel}: prediction has {len(pred)} records, truth has {len(truth)}")
        score_train(truth, pred.labels, policy, name=str(rel), report=report)
    return report


# Baseline grid-cell quantization steps for (frequency, AoA, log10 pulse width).
BASELINE_FREQ_STEP_MHZ = 50.0
BASELINE_AOA_STEP_DEG = 5.0
BASELINE_LOG_PW_STEP = 0.2


def baseline_deinterleave(train: LabeledPulseTrain) -> np.ndarray:
    """Trivial grid clustering over (frequency, AoA, log pulse width).

    Deterministic sanity-check baseline: one cluster per occupied cell.
    """
    if len(train) == 0:
        return np.zeros(0, dtype=np.uint32)
    cells = np.stack([
        np.floor(train.freq_mhz / BASELINE_FREQ_STEP_MHZ),
        np.floor(train.aoa_deg / BASELINE_AOA_STEP_DEG),
        np.floor(np.log10(train.pw_us) / BASELINE_LOG_PW_STEP),
    ], axis=1)
    _, labels = np.unique(cells, axis=0, return_inverse=True)
    return labels.astype(np.uint32)
