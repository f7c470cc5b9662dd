"""Cross-validated experiment execution and hyperparameter grid search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import MultiLabelDataset, apply_scaler, kfold_indices
from .ensemble import scut_fit, apply_thresholds
from .errors import ArgumentError, PairlabelError
from .learners import LearnerSpec
from .metrics import MetricReport, PredictionSet, evaluate_all, macro_f1_loss
from .pipeline import (
    ALGORITHM_MODES,
    LpwModel,
    _aggregate_batch,
    _confusions,
    _corrected_first,
    _nmi_weights,
    _pair_raw_first,
    _rrc_matrix,
    _sq_distances,
    fit_pipeline,
    predict,
)
from .seeds import derive_seed

DEFAULT_BETAS = tuple(float(b) for b in range(1, 11))
DEFAULT_GAMMAS = tuple(2.0 ** -k for k in range(7, 0, -1))
DEFAULT_FOLDS = 10
DEFAULT_SPLIT = 0.6
INNER_FOLDS = 3


@dataclass(frozen=True)
class TuneChoice:
    """Grid-search winner with its internal-CV macro-F1 loss."""

    beta: float
    gamma: float | None
    objective: float


@dataclass(frozen=True)
class FoldOutcome:
    fold: int
    report: MetricReport
    tune: TuneChoice | None


def _tuning_scores(
    train: MultiLabelDataset,
    algorithm: int,
    learner: LearnerSpec,
    seed: int,
    betas,
    gammas,
    t: float,
    rrc_mode: str,
):
    """Mean internal-CV macro-F1 loss per grid point.

    Pair models, decision regions and pairwise distances are built once per
    internal fold and shared across the beta/gamma grid.
    """
    n = train.n_instances
    if n < 2 * INNER_FOLDS:
        raise ArgumentError(f"too few instances ({n}) for {INNER_FOLDS}-fold tuning")
    folds = kfold_indices(n, INNER_FOLDS, derive_seed(seed, "inner-folds"))
    grid = [(b, None) for b in betas] if algorithm == 2 else [
        (b, g) for b in betas for g in gammas
    ]
    scores = {point: 0.0 for point in grid}

    for f, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(np.arange(n), test_idx)
        inner_train = train.subset(train_idx)
        inner_test = train.subset(test_idx)
        base = fit_pipeline(
            inner_train,
            mode="fcm",
            learner=learner,
            t=t,
            seed=derive_seed(seed, "inner", f),
            beta=1.0,
            rrc_mode=rrc_mode,
        )
        corr = base.correction
        val_std = corr.validation_features
        val_labels = corr.validation_labels
        test_std = apply_scaler(inner_test.features, base.scaler_mean, base.scaler_std)

        raw_val = _pair_raw_first(base.models, val_std)
        raw_test = _pair_raw_first(base.models, test_std)
        p_val = _rrc_matrix(raw_val, rrc_mode, base.seed, "query")
        p_test = _rrc_matrix(raw_test, rrc_mode, base.seed, "query")
        sq_val = _sq_distances(val_std, val_std)
        sq_test = _sq_distances(test_std, val_std)

        for beta in betas:
            mu_val = np.exp(-beta * sq_val)
            np.fill_diagonal(mu_val, 0.0)  # SCut on validation: no self-leakage
            eps_val = _confusions(
                mu_val, corr.subset_first, corr.subset_second, corr.region_mu_first
            )
            eps_test = _confusions(
                np.exp(-beta * sq_test), corr.subset_first, corr.subset_second, corr.region_mu_first
            )
            corrected_val = _corrected_first(p_val, eps_val)
            corrected_test = _corrected_first(p_test, eps_test)
            if algorithm == 2:
                gamma_list = [None]
            else:
                gamma_list = list(gammas)
            for gamma in gamma_list:
                if gamma is None:
                    w_val = np.ones_like(corrected_val)
                    w_test = np.ones_like(corrected_test)
                else:
                    w_val = _nmi_weights(eps_val, gamma)
                    w_test = _nmi_weights(eps_test, gamma)
                sup_val = _aggregate_batch(corrected_val, w_val, base.pairs, base.n_labels)
                sup_test = _aggregate_batch(corrected_test, w_test, base.pairs, base.n_labels)
                thresholds = scut_fit(sup_val, val_labels)
                pred = apply_thresholds(sup_test, thresholds)
                loss = macro_f1_loss(
                    PredictionSet(supports=sup_test, binarized=pred, truth=inner_test.labels)
                )
                scores[(beta, gamma)] += loss / len(folds)
    return scores


def grid_search(
    train: MultiLabelDataset,
    algorithm: int,
    learner: LearnerSpec,
    seed: int = 0,
    betas=DEFAULT_BETAS,
    gammas=DEFAULT_GAMMAS,
    t: float = DEFAULT_SPLIT,
    rrc_mode: str = "soft",
) -> TuneChoice:
    """Pick (beta[, gamma]) minimizing internal 3-fold CV macro-F1 loss.

    Ties break toward the smaller beta, then the smaller gamma.
    """
    if algorithm not in (2, 3):
        raise ArgumentError("grid search applies to the corrected algorithms (2, 3)")
    scores = _tuning_scores(train, algorithm, learner, seed, betas, gammas, t, rrc_mode)
    best_point, best_score = None, np.inf
    for beta in betas:
        for gamma in ([None] if algorithm == 2 else list(gammas)):
            s = scores[(beta, gamma)]
            if s < best_score - 1e-15:
                best_point, best_score = (beta, gamma), s
    return TuneChoice(beta=best_point[0], gamma=best_point[1], objective=best_score)


def fit_algorithm(
    train: MultiLabelDataset,
    algorithm: int,
    learner: LearnerSpec,
    seed: int,
    betas=DEFAULT_BETAS,
    gammas=DEFAULT_GAMMAS,
    t: float = DEFAULT_SPLIT,
    rrc_mode: str = "soft",
) -> tuple[LpwModel, TuneChoice | None]:
    """Tune (where applicable) and fit one of the three algorithms."""
    if algorithm not in ALGORITHM_MODES:
        raise ArgumentError(f"unknown algorithm {algorithm}")
    tune = None
    beta, gamma = 1.0, 0.0
    if algorithm >= 2:
        tune = grid_search(
            train, algorithm, learner, seed=derive_seed(seed, "tune"),
            betas=betas, gammas=gammas, t=t, rrc_mode=rrc_mode,
        )
        beta = tune.beta
        gamma = tune.gamma if tune.gamma is not None else 0.0
    model = fit_pipeline(
        train,
        mode=ALGORITHM_MODES[algorithm],
        learner=learner,
        t=t,
        seed=derive_seed(seed, "fit"),
        beta=beta,
        gamma=gamma,
        rrc_mode=rrc_mode,
    )
    return model, tune


def run_experiment_detailed(
    ds: MultiLabelDataset,
    algorithm: int,
    learner: LearnerSpec,
    folds: int = DEFAULT_FOLDS,
    t: float = DEFAULT_SPLIT,
    seed: int = 0,
    betas=DEFAULT_BETAS,
    gammas=DEFAULT_GAMMAS,
    rrc_mode: str = "soft",
) -> list[FoldOutcome]:
    """k-fold cross-validated evaluation of one algorithm on one dataset."""
    if folds < 2:
        raise ArgumentError("folds must be >= 2")
    fold_sets = kfold_indices(ds.n_instances, folds, derive_seed(seed, "folds"))
    outcomes = []
    for f, test_idx in enumerate(fold_sets):
        train_idx = np.setdiff1d(np.arange(ds.n_instances), test_idx)
        train_ds = ds.subset(train_idx)
        test_ds = ds.subset(test_idx)
        try:
            model, tune = fit_algorithm(
                train_ds, algorithm, learner, seed=derive_seed(seed, "fold", f),
                betas=betas, gammas=gammas, t=t, rrc_mode=rrc_mode,
            )
            supports, binarized = predict(model, test_ds.features)
            report = evaluate_all(
                PredictionSet(supports=supports, binarized=binarized, truth=test_ds.labels)
            )
        except PairlabelError as exc:
            raise type(exc)(f"fold {f}: {exc}") from exc
        outcomes.append(FoldOutcome(fold=f, report=report, tune=tune))
    return outcomes


def run_experiment(
    ds: MultiLabelDataset,
    algorithm: int,
    learner: LearnerSpec,
    folds: int = DEFAULT_FOLDS,
    t: float = DEFAULT_SPLIT,
    seed: int = 0,
    betas=DEFAULT_BETAS,
    gammas=DEFAULT_GAMMAS,
    rrc_mode: str = "soft",
) -> list[MetricReport]:
    outcomes = run_experiment_detailed(
        ds, algorithm, learner, folds=folds, t=t, seed=seed,
        betas=betas, gammas=gammas, rrc_mode=rrc_mode,
    )
    return [o.report for o in outcomes]
