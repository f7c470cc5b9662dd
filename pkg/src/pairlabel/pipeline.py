"""End-to-end fitted model: split, standardize, train pairs, correct, threshold.

The batch helpers here are vectorized equivalents of the per-query
functions in :mod:`correction` and :mod:`weighting`; the test suite checks
they agree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .correction import build_class_subsets, build_decision_regions, rrc_probability
from .data import MultiLabelDataset, apply_scaler, fit_scaler, split_train_validation
from .ensemble import PairIndex, enumerate_pairs, apply_thresholds, scut_fit, train_lpw
from .errors import ArgumentError, EstimationError
from .learners import BinaryModel, LearnerSpec, model_from_json, model_to_json
from .seeds import derive_seed
from .weighting import WEIGHT_FLOOR

MODES = ("plain", "fcm", "weighted_fcm")
ALGORITHM_MODES = {1: "plain", 2: "fcm", 3: "weighted_fcm"}


@dataclass(frozen=True)
class CorrectionState:
    """Validation-set artifacts saved with the model for inference."""

    validation_features: np.ndarray  # standardized (M, d)
    validation_labels: np.ndarray  # (M, L)
    subset_first: np.ndarray  # bool (P, M)
    subset_second: np.ndarray  # bool (P, M)
    region_mu_first: np.ndarray  # (P, M)
    beta: float
    gamma: float
    rrc_mode: str


@dataclass(frozen=True)
class LpwModel:
    """A trained pairwise ensemble with thresholds and optional correction."""

    mode: str
    pairs: tuple[PairIndex, ...]
    models: tuple[BinaryModel, ...]
    thresholds: np.ndarray
    scaler_mean: np.ndarray
    scaler_std: np.ndarray
    n_labels: int
    seed: int
    correction: CorrectionState | None = None


def _sq_distances(queries: np.ndarray, points: np.ndarray) -> np.ndarray:
    diff = queries[:, None, :] - points[None, :, :]
    return (diff * diff).sum(axis=2)


def _pair_raw_first(models, queries: np.ndarray) -> np.ndarray:
    """Support for each pair's first label: a (P, Q) matrix."""
    return np.stack([m.predict_soft_batch(queries)[:, 0] for m in models])


def _rrc_matrix(raw_first: np.ndarray, mode: str, seed: int, tag: str) -> np.ndarray:
    if mode == "soft":
        return raw_first
    out = np.empty_like(raw_first)
    for p in range(raw_first.shape[0]):
        for q in range(raw_first.shape[1]):
            d1 = float(raw_first[p, q])
            out[p, q] = rrc_probability(
                (d1, 1.0 - d1), mode=mode, seed=derive_seed(seed, tag, p, q)
            )
    return out


def _confusions(
    mu_n: np.ndarray,
    subset_first: np.ndarray,
    subset_second: np.ndarray,
    region_mu_first: np.ndarray,
) -> np.ndarray:
    """Batched confusion matrices, shape (P, Q, 2, 2); rows true, cols response."""
    denom = mu_n.sum(axis=1)  # (Q,)
    if (denom <= 0.0).any():
        raise EstimationError("empty fuzzy neighborhood for some query")
    mu1 = region_mu_first
    mu2 = 1.0 - mu1
    s1 = subset_first.astype(float)
    s2 = subset_second.astype(float)
    # cell[s, h] per (pair, query) via (Q, M) x (M,) products
    e = np.empty((mu1.shape[0], mu_n.shape[0], 2, 2))
    for p in range(mu1.shape[0]):
        e[p, :, 0, 0] = mu_n @ (s1[p] * mu1[p])
        e[p, :, 0, 1] = mu_n @ (s1[p] * mu2[p])
        e[p, :, 1, 0] = mu_n @ (s2[p] * mu1[p])
        e[p, :, 1, 1] = mu_n @ (s2[p] * mu2[p])
    return e / denom[None, :, None, None]


def _corrected_first(p_first: np.ndarray, eps: np.ndarray, smoothing: float = 1e-6) -> np.ndarray:
    """Corrected support for the first label per (pair, query)."""
    smoothed = eps + smoothing
    cond = smoothed / smoothed.sum(axis=2, keepdims=True)  # normalize over true class
    return p_first * cond[:, :, 0, 0] + (1.0 - p_first) * cond[:, :, 0, 1]


def _nmi_weights(eps: np.ndarray, gamma: float, floor: float = WEIGHT_FLOOR) -> np.ndarray:
    """Vectorized normalized-mutual-information weights, shape (P, Q)."""
    if gamma == 0.0:
        return np.ones(eps.shape[:2])
    total = eps.sum(axis=(2, 3))
    safe_total = np.where(total > 0.0, total, 1.0)
    p = eps / safe_total[:, :, None, None]
    f = p.sum(axis=3)  # true-class marginal (P, Q, 2)
    g = p.sum(axis=2)  # response marginal
    prod = f[:, :, :, None] * g[:, :, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(prod > 0.0, p / np.where(prod > 0.0, prod, 1.0), 1.0)
        icm = np.where(p > 0.0, p * np.log2(np.where(ratio > 0.0, ratio, 1.0)), 0.0).sum(
            axis=(2, 3)
        )
        hcm = -np.where(p > 0.0, p * np.log2(np.where(p > 0.0, p, 1.0)), 0.0).sum(axis=(2, 3))
    ok = (total > 0.0) & (hcm > 0.0)
    weights = np.full(eps.shape[:2], floor)
    weights[ok] = np.clip((np.clip(icm[ok], 0.0, None) / hcm[ok]) ** gamma, floor, 1.0)
    return weights


def _aggregate_batch(
    first_supports: np.ndarray, weights: np.ndarray, pairs, n_labels: int
) -> np.ndarray:
    """Weighted per-label aggregation for all queries at once -> (Q, L)."""
    n_queries = first_supports.shape[1]
    supports = np.zeros((n_queries, n_labels))
    for i in range(n_labels):
        idx1 = [p for p, pair in enumerate(pairs) if pair.first == i]
        idx2 = [p for p, pair in enumerate(pairs) if pair.second == i]
        vals = np.concatenate([first_supports[idx1], 1.0 - first_supports[idx2]])
        ws = np.concatenate([weights[idx1], weights[idx2]])
        wsum = ws.sum(axis=0)
        weighted = (vals * ws).sum(axis=0)
        with np.errstate(invalid="ignore"):
            supports[:, i] = np.where(
                wsum > 0.0, weighted / np.where(wsum > 0.0, wsum, 1.0), vals.mean(axis=0)
            )
    return supports


def _model_supports(
    model: LpwModel, queries_std: np.ndarray, exclude_self: bool = False
) -> np.ndarray:
    raw = _pair_raw_first(model.models, queries_std)
    if model.mode == "plain":
        return _aggregate_batch(raw, np.ones_like(raw), model.pairs, model.n_labels)
    corr = model.correction
    p_first = _rrc_matrix(raw, corr.rrc_mode, model.seed, "query")
    mu_n = np.exp(-corr.beta * _sq_distances(queries_std, corr.validation_features))
    if exclude_self:
        # queries are the validation instances themselves: drop each query's
        # own membership so its true label cannot leak into its estimate
        np.fill_diagonal(mu_n, 0.0)
    eps = _confusions(mu_n, corr.subset_first, corr.subset_second, corr.region_mu_first)
    corrected = _corrected_first(p_first, eps)
    if model.mode == "weighted_fcm":
        weights = _nmi_weights(eps, corr.gamma)
    else:
        weights = np.ones_like(corrected)
    return _aggregate_batch(corrected, weights, model.pairs, model.n_labels)


def fit_pipeline(
    train: MultiLabelDataset,
    mode: str,
    learner: LearnerSpec,
    t: float = 0.6,
    seed: int = 0,
    beta: float = 1.0,
    gamma: float = 0.25,
    rrc_mode: str = "soft",
) -> LpwModel:
    """Fit the full pipeline on a training portion.

    Splits train/validation at ratio ``t``, z-scores features on the
    training part, trains one model per label pair, builds the correction
    structures on the validation part (for the corrected modes) and fits
    SCut thresholds on the validation outputs of the complete pipeline.
    """
    if mode not in MODES:
        raise ArgumentError(f"unknown mode '{mode}'")
    split = split_train_validation(train, t, derive_seed(seed, "split"))
    mean, std = fit_scaler(split.train.features)
    train_std = MultiLabelDataset(
        apply_scaler(split.train.features, mean, std),
        split.train.labels,
        train.feature_names,
        train.label_names,
    )
    fitted = train_lpw(train_std, learner, seed=derive_seed(seed, "lpw"))
    pairs = tuple(p for p, _ in fitted)
    models = tuple(m for _, m in fitted)
    val_std = apply_scaler(split.validation.features, mean, std)

    correction = None
    if mode != "plain":
        subsets = [build_class_subsets(split.validation, p) for p in pairs]
        regions = [
            build_decision_regions(
                models[p.m], val_std, mode=rrc_mode, seed=derive_seed(seed, "region", p.m)
            )
            for p in pairs
        ]
        correction = CorrectionState(
            validation_features=val_std,
            validation_labels=split.validation.labels,
            subset_first=np.stack([s.first for s in subsets]),
            subset_second=np.stack([s.second for s in subsets]),
            region_mu_first=np.stack([r.mu_first for r in regions]),
            beta=float(beta),
            gamma=float(gamma),
            rrc_mode=rrc_mode,
        )

    model = LpwModel(
        mode=mode,
        pairs=pairs,
        models=models,
        thresholds=np.zeros(train.n_labels),
        scaler_mean=mean,
        scaler_std=std,
        n_labels=train.n_labels,
        seed=seed,
        correction=correction,
    )
    val_supports = _model_supports(model, val_std, exclude_self=(mode != "plain"))
    thresholds = scut_fit(val_supports, split.validation.labels)
    return LpwModel(
        mode=mode,
        pairs=pairs,
        models=models,
        thresholds=thresholds,
        scaler_mean=mean,
        scaler_std=std,
        n_labels=train.n_labels,
        seed=seed,
        correction=correction,
    )


def predict_supports(model: LpwModel, features: np.ndarray) -> np.ndarray:
    """Per-label soft supports for raw (unstandardized) query features."""
    queries = apply_scaler(features, model.scaler_mean, model.scaler_std)
    return _model_supports(model, queries)


def predict(model: LpwModel, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(supports, binarized) for raw query features."""
    supports = predict_supports(model, features)
    return supports, apply_thresholds(supports, model.thresholds)


def model_to_json_doc(model: LpwModel) -> str:
    """Serialize a fitted pipeline, correction state included."""
    doc = {
        "mode": model.mode,
        "n_labels": model.n_labels,
        "seed": model.seed,
        "thresholds": model.thresholds.tolist(),
        "scaler_mean": model.scaler_mean.tolist(),
        "scaler_std": model.scaler_std.tolist(),
        "pairs": [[p.m, p.first, p.second] for p in model.pairs],
        "models": [json.loads(model_to_json(m)) for m in model.models],
        "correction": None,
    }
    if model.correction is not None:
        c = model.correction
        doc["correction"] = {
            "validation_features": c.validation_features.tolist(),
            "validation_labels": c.validation_labels.astype(int).tolist(),
            "subset_first": c.subset_first.astype(int).tolist(),
            "subset_second": c.subset_second.astype(int).tolist(),
            "region_mu_first": c.region_mu_first.tolist(),
            "beta": c.beta,
            "gamma": c.gamma,
            "rrc_mode": c.rrc_mode,
        }
    return json.dumps(doc)


def model_from_json_doc(text: str) -> LpwModel:
    doc = json.loads(text)
    correction = None
    if doc["correction"] is not None:
        c = doc["correction"]
        correction = CorrectionState(
            validation_features=np.asarray(c["validation_features"]),
            validation_labels=np.asarray(c["validation_labels"], dtype=np.int8),
            subset_first=np.asarray(c["subset_first"], dtype=bool),
            subset_second=np.asarray(c["subset_second"], dtype=bool),
            region_mu_first=np.asarray(c["region_mu_first"]),
            beta=c["beta"],
            gamma=c["gamma"],
            rrc_mode=c["rrc_mode"],
        )
    return LpwModel(
        mode=doc["mode"],
        pairs=tuple(PairIndex(*p) for p in doc["pairs"]),
        models=tuple(model_from_json(json.dumps(m)) for m in doc["models"]),
        thresholds=np.asarray(doc["thresholds"]),
        scaler_mean=np.asarray(doc["scaler_mean"]),
        scaler_std=np.asarray(doc["scaler_std"]),
        n_labels=doc["n_labels"],
        seed=doc["seed"],
        correction=correction,
    )
