"""Pairwise decomposition, weighted aggregation, thresholding and SCut."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import MultiLabelDataset
from .errors import ArgumentError, PairlabelError
from .learners import BinaryModel, BinaryProblem, LearnerSpec, constant_model, fit_learner
from .seeds import derive_seed


@dataclass(frozen=True)
class PairIndex:
    """Position m of a label pair (first, second), first < second (0-based)."""

    m: int
    first: int
    second: int


def enumerate_pairs(n_labels: int) -> list[PairIndex]:
    """All label pairs in lexicographic order; length L(L-1)/2."""
    if n_labels < 2:
        raise ArgumentError("need at least 2 labels to enumerate pairs")
    pairs = []
    m = 0
    for i in range(n_labels - 1):
        for j in range(i + 1, n_labels):
            pairs.append(PairIndex(m=m, first=i, second=j))
            m += 1
    return pairs


def build_pair_problem(ds: MultiLabelDataset, pair: PairIndex) -> BinaryProblem | None:
    """Filter to instances carrying exactly one of the pair's labels.

    Target is 1 iff the first label is set. Returns None when no instance
    qualifies (the caller substitutes a constant model).
    """
    y1 = ds.labels[:, pair.first]
    y2 = ds.labels[:, pair.second]
    keep = (y1 + y2) == 1
    if not keep.any():
        return None
    return BinaryProblem(features=ds.features[keep], targets=y1[keep])


def train_lpw(
    train: MultiLabelDataset, learner: LearnerSpec, seed: int = 0
) -> list[tuple[PairIndex, BinaryModel]]:
    """One fitted binary model per label pair.

    Pairs with no eligible instances get a constant (0.5, 0.5) model, so
    the ensemble always holds L(L-1)/2 members.
    """
    fitted = []
    for pair in enumerate_pairs(train.n_labels):
        problem = build_pair_problem(train, pair)
        if problem is None:
            model = constant_model(train.n_features, 0.5)
        else:
            try:
                model = fit_learner(learner, problem, seed=derive_seed(seed, "pair", pair.m))
            except PairlabelError as exc:
                raise type(exc)(
                    f"pair ({pair.first},{pair.second}): {exc}"
                ) from exc
        fitted.append((pair, model))
    return fitted


def aggregate_supports(
    pair_outputs: np.ndarray,
    weights: np.ndarray,
    pairs: list[PairIndex],
    n_labels: int,
) -> np.ndarray:
    """Weighted average of pair supports per label.

    ``pair_outputs`` is (P, 2): columns are the supports for the pair's
    first and second label. A label whose weight sum is zero falls back to
    the unweighted mean of its pair supports.
    """
    pair_outputs = np.asarray(pair_outputs, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if pair_outputs.shape != (len(pairs), 2):
        raise ArgumentError("pair_outputs must be a (P, 2) matrix")
    if weights.shape != (len(pairs),):
        raise ArgumentError("one weight per pair classifier required")
    if not np.isfinite(weights).all() or (weights < 0).any():
        raise ArgumentError("weights must be finite and nonnegative")

    supports = np.zeros(n_labels)
    for i in range(n_labels):
        vals, ws = [], []
        for p, pair in enumerate(pairs):
            if pair.first == i:
                vals.append(pair_outputs[p, 0])
                ws.append(weights[p])
            elif pair.second == i:
                vals.append(pair_outputs[p, 1])
                ws.append(weights[p])
        vals = np.asarray(vals)
        ws = np.asarray(ws)
        wsum = ws.sum()
        supports[i] = vals.mean() if wsum == 0 else float(vals @ ws / wsum)
    return supports


def apply_thresholds(supports: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Binarize supports with strict per-label thresholds (d > theta)."""
    supports = np.asarray(supports, dtype=float)
    thresholds = np.asarray(thresholds, dtype=float)
    if supports.shape[-1] != thresholds.shape[0]:
        raise ArgumentError("supports/thresholds length mismatch")
    return (supports > thresholds).astype(np.int8)


def _binary_f1(pred: np.ndarray, truth: np.ndarray) -> float:
    tp = int((pred & truth).sum())
    denom = 2 * tp + int((pred & ~truth).sum()) + int((~pred & truth).sum())
    return 1.0 if denom == 0 else 2.0 * tp / denom


def scut_candidates(column: np.ndarray) -> np.ndarray:
    """Threshold candidates: 0, 1 and midpoints of consecutive unique supports."""
    uniq = np.unique(column)
    mids = (uniq[:-1] + uniq[1:]) / 2.0
    return np.unique(np.concatenate([[0.0], mids, [1.0]]))


def scut_fit(val_supports: np.ndarray, val_truth: np.ndarray) -> np.ndarray:
    """Per-label threshold maximizing validation F1 (ties: smallest threshold)."""
    val_supports = np.asarray(val_supports, dtype=float)
    val_truth = np.asarray(val_truth).astype(bool)
    if val_supports.shape != val_truth.shape:
        raise ArgumentError("supports/truth shape mismatch")
    if val_supports.shape[0] < 1:
        raise ArgumentError("need at least one validation instance")
    n_labels = val_supports.shape[1]
    thresholds = np.zeros(n_labels)
    for j in range(n_labels):
        col = val_supports[:, j]
        truth = val_truth[:, j]
        best_f1, best_theta = -1.0, 0.0
        for theta in scut_candidates(col):
            f1 = _binary_f1(col > theta, truth)
            if f1 > best_f1 + 1e-15:
                best_f1, best_theta = f1, theta
        thresholds[j] = best_theta
    return thresholds
