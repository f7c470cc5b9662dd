"""Local fuzzy-confusion-matrix correction of pair classifier outputs.

The correction models each deterministic pair classifier as a randomized
reference classifier, estimates a 2x2 confusion matrix locally around the
query from fuzzy validation-set structures, and recomputes the class
posterior from that matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import MultiLabelDataset
from .ensemble import PairIndex
from .errors import ArgumentError, EstimationError
from .learners import BinaryModel
from .seeds import derive_seed

RRC_MC_DRAWS = 100_000
POSTERIOR_SMOOTHING = 1e-6


@dataclass(frozen=True)
class ClassSubset:
    """Crisp membership of validation instances in the two pair classes."""

    first: np.ndarray  # bool (M,): carries the pair's first label only
    second: np.ndarray  # bool (M,): carries the pair's second label only


@dataclass(frozen=True)
class DecisionRegion:
    """Soft per-instance class memberships of the randomized classifier."""

    mu_first: np.ndarray  # (M,) P(response = first label | x)

    @property
    def mu_second(self) -> np.ndarray:
        return 1.0 - self.mu_first


@dataclass(frozen=True)
class Neighborhood:
    """Gaussian-potential memberships of validation instances around a query."""

    memberships: np.ndarray
    beta: float


def rrc_probability(d: tuple[float, float], mode: str = "beta_mc", seed: int = 0) -> float:
    """Probability that the randomized classifier picks the first class.

    ``beta_mc`` draws per-class supports from Beta distributions with shape
    sum 2 and means equal to the soft supports, estimating P(draw1 > draw2)
    by seeded Monte Carlo. ``soft`` returns d1 directly.
    """
    d1, d2 = float(d[0]), float(d[1])
    if abs(d1 + d2 - 1.0) > 1e-9 or not 0.0 <= d1 <= 1.0:
        raise ArgumentError(f"supports must be a normalized pair, got ({d1}, {d2})")
    if mode == "soft":
        return d1
    if mode != "beta_mc":
        raise ArgumentError(f"unknown rrc mode '{mode}'")
    if d1 == 0.0:
        return 0.0
    if d1 == 1.0:
        return 1.0
    rng = np.random.default_rng(seed)
    a, b = 2.0 * d1, 2.0 * (1.0 - d1)
    draws1 = rng.beta(a, b, RRC_MC_DRAWS)
    draws2 = rng.beta(b, a, RRC_MC_DRAWS)
    return float(np.mean(draws1 > draws2))


def build_class_subsets(validation: MultiLabelDataset, pair: PairIndex) -> ClassSubset:
    """Validation rows carrying exactly one of the pair's labels, by class."""
    y1 = validation.labels[:, pair.first].astype(bool)
    y2 = validation.labels[:, pair.second].astype(bool)
    eligible = y1 ^ y2
    return ClassSubset(first=eligible & y1, second=eligible & y2)


def build_decision_regions(
    model: BinaryModel,
    validation_features: np.ndarray,
    mode: str = "beta_mc",
    seed: int = 0,
) -> DecisionRegion:
    """Randomized-classifier class memberships over the validation set."""
    outputs = model.predict_soft_batch(validation_features)
    if mode == "soft":
        mu = outputs[:, 0].copy()
    else:
        mu = np.array(
            [
                rrc_probability(tuple(outputs[k]), mode=mode, seed=derive_seed(seed, "rrc", k))
                for k in range(outputs.shape[0])
            ]
        )
    return DecisionRegion(mu_first=mu)


def neighborhood(z: np.ndarray, validation_features: np.ndarray, beta: float) -> Neighborhood:
    """Gaussian potential memberships exp(-beta * dist^2) around ``z``.

    Both ``z`` and the validation features must be standardized with the
    same training statistics.
    """
    if beta <= 0:
        raise ArgumentError("beta must be positive")
    z = np.asarray(z, dtype=float)
    feats = np.asarray(validation_features, dtype=float)
    sq = ((feats - z) ** 2).sum(axis=1)
    return Neighborhood(memberships=np.exp(-beta * sq), beta=float(beta))


def fuzzy_cardinality(memberships) -> float:
    """Sigma-count of a fuzzy set: the sum of its membership degrees."""
    mu = np.asarray(memberships, dtype=float)
    if mu.size and ((mu < 0).any() or (mu > 1).any()):
        raise ArgumentError("memberships must lie in [0, 1]")
    return float(mu.sum())


def estimate_confusion(
    subsets: ClassSubset, regions: DecisionRegion, nbhd: Neighborhood
) -> np.ndarray:
    """Local 2x2 fuzzy confusion matrix, rows = true class, cols = response.

    Fuzzy intersection uses the product t-norm; each cell is the sigma-count
    of (class subset) * (decision region) * (neighborhood), divided by the
    sigma-count of the whole neighborhood.
    """
    mu_n = nbhd.memberships
    if not (len(mu_n) == len(regions.mu_first) == len(subsets.first)):
        raise ArgumentError("fuzzy structures must share the validation index set")
    denom = mu_n.sum()
    if denom <= 0.0:
        raise EstimationError("empty fuzzy neighborhood")
    s1 = subsets.first.astype(float)
    s2 = subsets.second.astype(float)
    mu1 = regions.mu_first
    mu2 = regions.mu_second
    eps = np.array(
        [
            [(s1 * mu1 * mu_n).sum(), (s1 * mu2 * mu_n).sum()],
            [(s2 * mu1 * mu_n).sum(), (s2 * mu2 * mu_n).sum()],
        ]
    )
    return eps / denom


def conditional_posterior(eps: np.ndarray) -> np.ndarray:
    """Column-stochastic P(true class | response) from a confusion matrix.

    Every cell is smoothed additively before column normalization, so empty
    response columns degrade to (0.5, 0.5).
    """
    eps = np.asarray(eps, dtype=float)
    if eps.shape != (2, 2):
        raise ArgumentError("confusion matrix must be 2x2")
    smoothed = eps + POSTERIOR_SMOOTHING
    return smoothed / smoothed.sum(axis=0, keepdims=True)


def corrected_supports(p_first: float, cond: np.ndarray) -> tuple[float, float]:
    """Corrected class posterior: mix the conditionals by the response law."""
    cond = np.asarray(cond, dtype=float)
    if not 0.0 <= p_first <= 1.0:
        raise ArgumentError("p_first must lie in [0, 1]")
    if cond.shape != (2, 2) or (cond < 0).any() or np.abs(cond.sum(axis=0) - 1.0).max() > 1e-9:
        raise ArgumentError("cond must be a column-stochastic 2x2 matrix")
    response = np.array([p_first, 1.0 - p_first])
    post = cond @ response
    return float(post[0]), float(post[1])
