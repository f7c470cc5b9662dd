"""Information-theoretic competence weight from a local confusion matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, EstimationError

WEIGHT_FLOOR = 1e-6


@dataclass(frozen=True)
class WeightConfig:
    """Weighting exponent and the floor guarding degenerate matrices."""

    gamma: float
    weight_floor: float = WEIGHT_FLOOR

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ArgumentError("gamma must lie in [0, 1)")
        if self.weight_floor <= 0.0:
            raise ArgumentError("weight_floor must be positive")


def normalize_joint(eps: np.ndarray) -> np.ndarray:
    """Rescale confusion-matrix cells into a joint distribution."""
    eps = np.asarray(eps, dtype=float)
    if eps.shape != (2, 2) or (eps < 0).any():
        raise ArgumentError("expected a nonnegative 2x2 matrix")
    total = eps.sum()
    if total <= 0.0:
        raise EstimationError("all-zero confusion matrix has no joint distribution")
    return eps / total


def _check_distribution(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (2, 2) or (p < 0).any() or abs(p.sum() - 1.0) > 1e-9:
        raise ArgumentError("expected a 2x2 probability distribution")
    return p


def marginals(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row (true class) and column (response) marginals of a joint 2x2."""
    p = _check_distribution(p)
    return p.sum(axis=1), p.sum(axis=0)


def mutual_information(p: np.ndarray) -> float:
    """Mutual information in bits; zero cells contribute nothing."""
    p = _check_distribution(p)
    f, g = p.sum(axis=1), p.sum(axis=0)
    total = 0.0
    for u in range(2):
        for v in range(2):
            if p[u, v] > 0.0 and f[u] > 0.0 and g[v] > 0.0:
                total += p[u, v] * math.log2(p[u, v] / (f[u] * g[v]))
    return total


def joint_entropy(p: np.ndarray) -> float:
    """Joint entropy in bits with the 0*log(0) = 0 convention."""
    p = _check_distribution(p)
    return float(-sum(c * math.log2(c) for c in p.ravel() if c > 0.0))


def nmi_weight(eps: np.ndarray, cfg: WeightConfig) -> float:
    """Competence weight: normalized mutual information raised to gamma.

    Degenerate matrices (all zero, or zero joint entropy) get the floor
    weight; gamma = 0 yields uniform weights.
    """
    eps = np.asarray(eps, dtype=float)
    if cfg.gamma == 0.0:
        return 1.0
    if eps.sum() <= 0.0:
        return cfg.weight_floor
    p = normalize_joint(eps)
    hcm = joint_entropy(p)
    if hcm <= 0.0:
        return cfg.weight_floor
    icm = max(mutual_information(p), 0.0)
    return float(min(max((icm / hcm) ** cfg.gamma, cfg.weight_floor), 1.0))
