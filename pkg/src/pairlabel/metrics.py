"""The eight multi-label quality criteria (all reported as losses)."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import ArgumentError, UndefinedMetricError


@dataclass(frozen=True)
class PredictionSet:
    """Soft supports, binarized predictions and ground truth for M instances."""

    supports: np.ndarray
    binarized: np.ndarray
    truth: np.ndarray

    def __post_init__(self):
        supports = np.asarray(self.supports, dtype=float)
        binarized = np.asarray(self.binarized, dtype=np.int8)
        truth = np.asarray(self.truth, dtype=np.int8)
        if not (supports.shape == binarized.shape == truth.shape) or supports.ndim != 2:
            raise ArgumentError("supports, binarized and truth must share an (M, L) shape")
        if not np.isin(binarized, (0, 1)).all() or not np.isin(truth, (0, 1)).all():
            raise ArgumentError("binarized and truth must be 0/1 matrices")
        object.__setattr__(self, "supports", supports)
        object.__setattr__(self, "binarized", binarized)
        object.__setattr__(self, "truth", truth)


@dataclass(frozen=True)
class MetricReport:
    """All eight criteria for one evaluation run."""

    hamming: float
    zero_one: float
    example_f1_loss: float
    ranking_loss: float
    macro_fdr: float
    macro_fnr: float
    macro_f1_loss: float
    micro_f1_loss: float

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


METRIC_NAMES = tuple(f.name for f in fields(MetricReport))


def hamming_loss(p: PredictionSet) -> float:
    return float((p.binarized != p.truth).mean())


def zero_one_loss(p: PredictionSet) -> float:
    return float((p.binarized != p.truth).any(axis=1).mean())


def example_f1_loss(p: PredictionSet) -> float:
    """1 - mean instance F1; empty truth and prediction count as perfect."""
    inter = (p.binarized & p.truth).sum(axis=1)
    sizes = p.binarized.sum(axis=1) + p.truth.sum(axis=1)
    f1 = np.where(sizes == 0, 1.0, 2.0 * inter / np.maximum(sizes, 1))
    return float(1.0 - f1.mean())


def ranking_loss(p: PredictionSet) -> float:
    """Fraction of misordered (relevant, irrelevant) support pairs, ties 0.5.

    Instances lacking either a relevant or an irrelevant label are skipped;
    if all are skipped the metric is undefined.
    """
    losses = []
    for i in range(p.truth.shape[0]):
        rel = p.truth[i] == 1
        if not rel.any() or rel.all():
            continue
        s_rel = p.supports[i, rel][:, None]
        s_irr = p.supports[i, ~rel][None, :]
        bad = (s_rel < s_irr).sum() + 0.5 * (s_rel == s_irr).sum()
        losses.append(bad / (s_rel.size * s_irr.size))
    if not losses:
        raise UndefinedMetricError("no instance has both relevant and irrelevant labels")
    return float(np.mean(losses))


def _label_counts(p: PredictionSet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    tp = ((p.binarized == 1) & (p.truth == 1)).sum(axis=0)
    fp = ((p.binarized == 1) & (p.truth == 0)).sum(axis=0)
    fn = ((p.binarized == 0) & (p.truth == 1)).sum(axis=0)
    return tp, fp, fn


def macro_fdr(p: PredictionSet) -> float:
    """Mean per-label (1 - precision); precision is 1 when nothing is predicted."""
    tp, fp, _ = _label_counts(p)
    precision = np.where(tp + fp == 0, 1.0, tp / np.maximum(tp + fp, 1))
    return float(1.0 - precision.mean())


def macro_fnr(p: PredictionSet) -> float:
    """Mean per-label (1 - recall); recall is 1 when the label never occurs."""
    tp, _, fn = _label_counts(p)
    recall = np.where(tp + fn == 0, 1.0, tp / np.maximum(tp + fn, 1))
    return float(1.0 - recall.mean())


def macro_f1_loss(p: PredictionSet) -> float:
    tp, fp, fn = _label_counts(p)
    denom = 2 * tp + fp + fn
    f1 = np.where(denom == 0, 1.0, 2.0 * tp / np.maximum(denom, 1))
    return float(1.0 - f1.mean())


def micro_f1_loss(p: PredictionSet) -> float:
    tp, fp, fn = _label_counts(p)
    denom = 2 * tp.sum() + fp.sum() + fn.sum()
    f1 = 1.0 if denom == 0 else 2.0 * tp.sum() / denom
    return float(1.0 - f1)


def evaluate_all(p: PredictionSet) -> MetricReport:
    return MetricReport(
        hamming=hamming_loss(p),
        zero_one=zero_one_loss(p),
        example_f1_loss=example_f1_loss(p),
        ranking_loss=ranking_loss(p),
        macro_fdr=macro_fdr(p),
        macro_fnr=macro_fnr(p),
        macro_f1_loss=macro_f1_loss(p),
        micro_f1_loss=micro_f1_loss(p),
    )
