"""Cross-validated experiment runner and the beta/gamma grid search."""

import numpy as np
import pytest

from pairlabel.data import generate_synthetic
from pairlabel.errors import ArgumentError
from pairlabel.experiment import (
    DEFAULT_BETAS,
    DEFAULT_GAMMAS,
    TuneChoice,
    _tuning_scores,
    fit_algorithm,
    grid_search,
    run_experiment,
    run_experiment_detailed,
)
from pairlabel.learners import LearnerSpec
from pairlabel.metrics import METRIC_NAMES

SMALL_BETAS = (1.0, 4.0)
SMALL_GAMMAS = (0.125, 0.5)


@pytest.fixture(scope="module")
def dataset():
    return generate_synthetic(90, 3, 4, 0.2, seed=8)


def test_default_grid_sizes():
    assert len(DEFAULT_BETAS) == 10
    assert DEFAULT_BETAS[0] == 1.0 and DEFAULT_BETAS[-1] == 10.0
    assert len(DEFAULT_GAMMAS) == 7
    assert DEFAULT_GAMMAS[0] == 2.0**-7 and DEFAULT_GAMMAS[-1] == 0.5
    assert len(DEFAULT_BETAS) * len(DEFAULT_GAMMAS) == 70


def test_grid_search_argmin_contract(dataset):
    learner = LearnerSpec("stump")
    scores = _tuning_scores(
        dataset, 3, learner, 5, SMALL_BETAS, SMALL_GAMMAS, 0.6, "soft"
    )
    assert set(scores) == {(b, g) for b in SMALL_BETAS for g in SMALL_GAMMAS}
    choice = grid_search(
        dataset, 3, learner, seed=5, betas=SMALL_BETAS, gammas=SMALL_GAMMAS
    )
    assert choice.objective == pytest.approx(min(scores.values()))
    assert scores[(choice.beta, choice.gamma)] == pytest.approx(choice.objective)
    # ties break toward the earliest grid point
    for (b, g), s in scores.items():
        if s < choice.objective - 1e-15:
            pytest.fail("grid search missed a better point")


def test_grid_search_algorithm_two_has_no_gamma(dataset):
    choice = grid_search(
        dataset, 2, LearnerSpec("stump"), seed=5, betas=SMALL_BETAS, gammas=SMALL_GAMMAS
    )
    assert choice.gamma is None
    assert choice.beta in SMALL_BETAS


def test_grid_search_deterministic(dataset):
    kwargs = dict(seed=7, betas=SMALL_BETAS, gammas=SMALL_GAMMAS)
    a = grid_search(dataset, 3, LearnerSpec("stump"), **kwargs)
    b = grid_search(dataset, 3, LearnerSpec("stump"), **kwargs)
    assert a == b


def test_grid_search_rejects_plain_algorithm(dataset):
    with pytest.raises(ArgumentError):
        grid_search(dataset, 1, LearnerSpec("stump"))


def test_fit_algorithm_uses_tuned_point(dataset):
    model, tune = fit_algorithm(
        dataset, 2, LearnerSpec("stump"), seed=2, betas=SMALL_BETAS, gammas=SMALL_GAMMAS
    )
    assert isinstance(tune, TuneChoice)
    assert model.correction.beta == tune.beta
    assert model.correction.gamma == 0.0

    model, tune = fit_algorithm(
        dataset, 1, LearnerSpec("stump"), seed=2, betas=SMALL_BETAS, gammas=SMALL_GAMMAS
    )
    assert tune is None
    assert model.correction is None


def test_run_experiment_shapes_and_determinism(dataset):
    reports = run_experiment(
        dataset, 1, LearnerSpec("stump"), folds=3, seed=4,
        betas=SMALL_BETAS, gammas=SMALL_GAMMAS,
    )
    assert len(reports) == 3
    for report in reports:
        values = report.as_dict()
        assert set(values) == set(METRIC_NAMES)
        assert all(0.0 <= values[name] <= 1.0 for name in METRIC_NAMES)
    again = run_experiment(
        dataset, 1, LearnerSpec("stump"), folds=3, seed=4,
        betas=SMALL_BETAS, gammas=SMALL_GAMMAS,
    )
    assert [r.as_dict() for r in again] == [r.as_dict() for r in reports]


def test_run_experiment_detailed_tune_per_fold(dataset):
    outcomes = run_experiment_detailed(
        dataset, 2, LearnerSpec("stump"), folds=2, seed=4,
        betas=SMALL_BETAS, gammas=SMALL_GAMMAS,
    )
    assert [o.fold for o in outcomes] == [0, 1]
    for o in outcomes:
        assert o.tune is not None
        assert o.tune.beta in SMALL_BETAS
        assert o.tune.gamma is None


def test_plain_algorithm_ignores_grid(dataset):
    a = run_experiment(
        dataset, 1, LearnerSpec("stump"), folds=2, seed=6,
        betas=(1.0,), gammas=(0.25,),
    )
    b = run_experiment(
        dataset, 1, LearnerSpec("stump"), folds=2, seed=6,
        betas=SMALL_BETAS, gammas=SMALL_GAMMAS,
    )
    assert [r.as_dict() for r in a] == [r.as_dict() for r in b]


def test_run_experiment_validates_folds(dataset):
    with pytest.raises(ArgumentError):
        run_experiment(dataset, 1, LearnerSpec("stump"), folds=1)


def test_tuning_rejects_tiny_training_sets():
    tiny = generate_synthetic(30, 2, 3, 0.2, seed=3).subset(np.arange(5))
    with pytest.raises(ArgumentError):
        _tuning_scores(tiny, 2, LearnerSpec("stump"), 0, (1.0,), (0.25,), 0.6, "soft")
