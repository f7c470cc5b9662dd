"""Statistical comparison battery: Wilcoxon, Holm, Friedman, Nemenyi, Spearman."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc, stdtr

from .errors import (
    ArgumentError,
    InsufficientDataError,
    UndefinedCorrelationError,
)

EXACT_WILCOXON_LIMIT = 25


@dataclass(frozen=True)
class ResultTable:
    """One metric's values over datasets (rows) x algorithms (columns)."""

    values: np.ndarray
    dataset_names: tuple[str, ...]
    algorithm_names: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 2 or values.shape[1] < 2:
            raise ArgumentError("result table needs >= 2 datasets and >= 2 algorithms")
        if not np.isfinite(values).all():
            raise ArgumentError("result table must have no missing entries")
        if values.shape != (len(self.dataset_names), len(self.algorithm_names)):
            raise ArgumentError("table names do not match its shape")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dataset_names", tuple(self.dataset_names))
        object.__setattr__(self, "algorithm_names", tuple(self.algorithm_names))


def _rankdata(values: np.ndarray) -> np.ndarray:
    """Average ranks (1-based) with ties sharing the mean rank."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _signed_rank_distribution(doubled_ranks: list[int]) -> list[int]:
    """Counts of each doubled positive-rank sum over all sign assignments."""
    total = sum(doubled_ranks)
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in doubled_ranks:
        nxt = counts[:]
        for s in range(total - r + 1):
            if counts[s]:
                nxt[s + r] += counts[s]
        counts = nxt
    return counts


def wilcoxon_signed_rank(a, b) -> tuple[float, float]:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped; tied magnitudes share average ranks. The
    p-value is exact (dynamic program over rank sums) for up to 25 nonzero
    differences, and a continuity-corrected normal approximation beyond.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ArgumentError("paired samples must be equal-length vectors")
    diffs = a - b
    diffs = diffs[diffs != 0]
    n = len(diffs)
    if n < 5:
        raise InsufficientDataError(f"need >= 5 nonzero differences, got {n}")
    ranks = _rankdata(np.abs(diffs))
    w_plus = float(ranks[diffs > 0].sum())
    w_minus = float(ranks.sum()) - w_plus
    w = min(w_plus, w_minus)

    if n <= EXACT_WILCOXON_LIMIT:
        doubled = [int(round(2 * r)) for r in ranks]
        counts = _signed_rank_distribution(doubled)
        target = int(round(2 * w_plus))
        le = sum(counts[: target + 1])
        ge = sum(counts[target:])
        p = min(1.0, 2 * min(le, ge) / 2**n)
    else:
        ties = np.unique(np.abs(diffs), return_counts=True)[1]
        mean = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float(((ties**3 - ties) / 48.0).sum())
        z = (abs(w_plus - mean) - 0.5) / math.sqrt(var)
        p = min(1.0, math.erfc(z / math.sqrt(2.0)))
    return w, p


def holm_adjust(pvals) -> list[float]:
    """Step-down Holm adjustment, returned in the input order."""
    pvals = list(pvals)
    if any(not 0.0 <= p <= 1.0 for p in pvals):
        raise ArgumentError("p-values must lie in [0, 1]")
    k = len(pvals)
    order = sorted(range(k), key=lambda i: pvals[i])
    adjusted = [0.0] * k
    running = 0.0
    for rank, idx in enumerate(order):
        running = max(running, min(1.0, (k - rank) * pvals[idx]))
        adjusted[idx] = running
    return adjusted


def _row_ranks(values: np.ndarray, smaller_is_better: bool) -> np.ndarray:
    signed = values if smaller_is_better else -values
    return np.vstack([_rankdata(row) for row in signed])


def average_ranks(table: ResultTable, smaller_is_better: bool = True) -> np.ndarray:
    """Mean per-dataset rank of each algorithm (rank 1 = best)."""
    return _row_ranks(table.values, smaller_is_better).mean(axis=0)


def friedman_test(table: ResultTable, smaller_is_better: bool = True) -> tuple[float, float]:
    """Friedman chi-square over average ranks, p from k-1 df chi-square."""
    n, k = table.values.shape
    mean_ranks = average_ranks(table, smaller_is_better)
    chi2 = 12.0 * n / (k * (k + 1)) * float((mean_ranks**2).sum() - k * (k + 1) ** 2 / 4.0)
    chi2 = max(chi2, 0.0)
    p = float(gammaincc((k - 1) / 2.0, chi2 / 2.0))
    return chi2, p


# Studentized-range-derived constants q_{alpha,k} for the Nemenyi test.
_NEMENYI_Q = {
    0.05: {2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850, 7: 2.949, 8: 3.031, 9: 3.102, 10: 3.164},
    0.10: {2: 1.645, 3: 2.052, 4: 2.291, 5: 2.459, 6: 2.589, 7: 2.693, 8: 2.780, 9: 2.855, 10: 2.920},
}


def nemenyi_cd(k: int, n: int, alpha: float = 0.05) -> float:
    """Critical average-rank difference for k algorithms over n datasets."""
    if alpha not in _NEMENYI_Q:
        raise ArgumentError(f"alpha must be one of {sorted(_NEMENYI_Q)}")
    if k < 2 or k > 10:
        raise ArgumentError("q constants are embedded for 2 <= k <= 10 only")
    if n < 2:
        raise ArgumentError("need n >= 2 datasets")
    return _NEMENYI_Q[alpha][k] * math.sqrt(k * (k + 1) / (6.0 * n))


def spearman_rho(x, y) -> tuple[float, float]:
    """Spearman rank correlation with a two-tailed t-test p-value."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 4:
        raise ArgumentError("need equal-length vectors with n >= 4")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise UndefinedCorrelationError("correlation undefined for constant input")
    rx = _rankdata(x)
    ry = _rankdata(y)
    rho = float(np.corrcoef(rx, ry)[0, 1])
    rho = max(-1.0, min(1.0, rho))
    n = len(x)
    if abs(rho) >= 1.0:
        return rho, 0.0
    tstat = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    p = 2.0 * float(stdtr(n - 2, -abs(tstat)))
    return rho, p
