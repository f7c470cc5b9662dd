"""In-house two-class soft-output learners.

All learners emit a normalized support pair (d1, d2) with d1 + d2 = 1,
where d1 backs the hypothesis "target = 1".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError

_VAR_FLOOR = 1e-9
_NEAR_CERTAIN = 1e-6


@dataclass(frozen=True)
class BinaryProblem:
    """A two-class training problem with 0/1 targets."""

    features: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        targs = np.asarray(self.targets, dtype=np.int8)
        if feats.ndim != 2:
            raise ArgumentError("features must be a 2-d matrix")
        if feats.shape[0] < 1:
            raise ArgumentError("problem needs at least one instance")
        if feats.shape[1] < 1:
            raise ArgumentError("problem needs at least one feature")
        if targs.shape != (feats.shape[0],):
            raise ArgumentError("targets must be a vector matching features")
        if not np.isin(targs, (0, 1)).all():
            raise ArgumentError("targets must be 0/1")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "targets", targs)

    @property
    def n_instances(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class BinaryModel:
    """A fitted two-class learner with an opaque parameter dict."""

    kind: str
    n_features: int
    params: dict = field(repr=False)
    class_prior: tuple[float, float] = (0.5, 0.5)

    def predict_soft(self, x) -> tuple[float, float]:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_features,):
            raise ArgumentError(
                f"expected feature vector of length {self.n_features}, got {x.shape}"
            )
        d = self.predict_soft_batch(x[None, :])[0]
        return float(d[0]), float(d[1])

    def predict_soft_batch(self, features) -> np.ndarray:
        """Support pairs for a (n, d) query matrix; returns an (n, 2) array."""
        x = np.asarray(features, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise ArgumentError(
                f"expected (n, {self.n_features}) query matrix, got {x.shape}"
            )
        d1 = _PREDICTORS[self.kind](self.params, x)
        d1 = np.clip(d1, 0.0, 1.0)
        return np.column_stack([d1, 1.0 - d1])


def _predict_constant(params, x):
    return np.full(x.shape[0], params["d1"])


def _predict_naive_bayes(params, x):
    means = np.asarray(params["means"])  # (2, d), row 0 = class "target 1"
    variances = np.asarray(params["variances"])
    log_prior = np.asarray(params["log_prior"])
    ll = -0.5 * (
        np.log(2.0 * np.pi * variances).sum(axis=1)
        + (((x[:, None, :] - means) ** 2) / variances).sum(axis=2)
    ) + log_prior  # (n, 2)
    ll -= ll.max(axis=1, keepdims=True)
    post = np.exp(ll)
    return post[:, 0] / post.sum(axis=1)


def _predict_voted_perceptron(params, x):
    weights = np.asarray(params["weights"])  # (k, d+1), bias last
    counts = np.asarray(params["counts"], dtype=float)
    xb = np.column_stack([x, np.ones(x.shape[0])])
    votes = np.sign(xb @ weights.T) @ counts
    margin = votes / counts.sum()
    return 1.0 / (1.0 + np.exp(-margin))


def _predict_decision_stump(params, x):
    feature = params["feature"]
    if feature < 0:
        return np.full(x.shape[0], params["left"][0])
    left = x[:, feature] <= params["threshold"]
    return np.where(left, params["left"][0], params["right"][0])


_PREDICTORS = {
    "constant": _predict_constant,
    "naive_bayes": _predict_naive_bayes,
    "voted_perceptron": _predict_voted_perceptron,
    "decision_stump": _predict_decision_stump,
}


def constant_model(n_features: int, d1: float) -> BinaryModel:
    return BinaryModel(
        kind="constant",
        n_features=n_features,
        params={"d1": float(d1)},
        class_prior=(float(d1), float(1.0 - d1)),
    )


def _prior(p: BinaryProblem) -> tuple[float, float]:
    p1 = float(p.targets.mean())
    return p1, 1.0 - p1


def fit_naive_bayes(p: BinaryProblem) -> BinaryModel:
    """Gaussian naive Bayes with a per-feature variance floor.

    A single-class problem yields a constant near-certain model so that
    downstream ensemble training never aborts.
    """
    pos = p.targets == 1
    n1, n0 = int(pos.sum()), int((~pos).sum())
    if n0 == 0:
        return constant_model(p.n_features, 1.0 - _NEAR_CERTAIN)
    if n1 == 0:
        return constant_model(p.n_features, _NEAR_CERTAIN)
    means = np.stack([p.features[pos].mean(axis=0), p.features[~pos].mean(axis=0)])
    variances = np.maximum(
        np.stack([p.features[pos].var(axis=0), p.features[~pos].var(axis=0)]),
        _VAR_FLOOR,
    )
    prior = _prior(p)
    return BinaryModel(
        kind="naive_bayes",
        n_features=p.n_features,
        params={
            "means": means,
            "variances": variances,
            "log_prior": np.log([prior[0], prior[1]]),
        },
        class_prior=prior,
    )


def fit_voted_perceptron(p: BinaryProblem, epochs: int = 10, seed: int = 0) -> BinaryModel:
    """Voted perceptron; soft output is a logistic squash of the mean vote.

    The per-epoch shuffle order is fixed by ``seed``, making the fit
    deterministic.
    """
    if epochs < 1:
        raise ArgumentError("epochs must be >= 1")
    rng = np.random.default_rng(seed)
    xb = np.column_stack([p.features, np.ones(p.n_instances)])
    y = np.where(p.targets == 1, 1.0, -1.0)
    w = np.zeros(xb.shape[1])
    c = 0
    weights, counts = [], []
    for _ in range(epochs):
        for i in rng.permutation(p.n_instances):
            if y[i] * (w @ xb[i]) <= 0:
                if c > 0:
                    weights.append(w.copy())
                    counts.append(c)
                w = w + y[i] * xb[i]
                c = 1
            else:
                c += 1
    weights.append(w.copy())
    counts.append(max(c, 1))
    prior = _prior(p)
    return BinaryModel(
        kind="voted_perceptron",
        n_features=p.n_features,
        params={"weights": np.asarray(weights), "counts": np.asarray(counts)},
        class_prior=prior,
    )


def _gini(n1: float, n0: float) -> float:
    n = n1 + n0
    if n == 0:
        return 0.0
    return 1.0 - (n1 * n1 + n0 * n0) / (n * n)


def fit_decision_stump(p: BinaryProblem) -> BinaryModel:
    """Single-split stump minimizing weighted Gini impurity.

    Leaf supports are Laplace-smoothed class frequencies (c+1)/(n+2).
    With no useful split (all features constant) the stump degenerates to
    the smoothed prior.
    """
    n = p.n_instances
    n1_total = int((p.targets == 1).sum())
    best_imp = _gini(n1_total, n - n1_total)
    best = (-1, 0.0)  # (feature, threshold); -1 means no split
    for f in range(p.n_features):
        order = np.argsort(p.features[:, f], kind="stable")
        xs = p.features[order, f]
        ys = p.targets[order]
        cum1 = np.cumsum(ys == 1)
        # split after position i (0-based) iff xs[i] < xs[i+1]
        for i in np.nonzero(np.diff(xs) > 0)[0]:
            nl = i + 1
            l1 = int(cum1[i])
            imp = (
                nl * _gini(l1, nl - l1) + (n - nl) * _gini(n1_total - l1, n - nl - (n1_total - l1))
            ) / n
            if imp < best_imp - 1e-15:
                best_imp = imp
                best = (f, float((xs[i] + xs[i + 1]) / 2.0))

    prior = _prior(p)
    feature, threshold = best
    if feature < 0:
        leaf = ((n1_total + 1) / (n + 2), (n - n1_total + 1) / (n + 2))
        params = {"feature": -1, "threshold": 0.0, "left": leaf, "right": leaf}
    else:
        mask = p.features[:, feature] <= threshold
        nl, l1 = int(mask.sum()), int((p.targets[mask] == 1).sum())
        nr, r1 = n - nl, n1_total - l1
        params = {
            "feature": feature,
            "threshold": threshold,
            "left": ((l1 + 1) / (nl + 2), (nl - l1 + 1) / (nl + 2)),
            "right": ((r1 + 1) / (nr + 2), (nr - r1 + 1) / (nr + 2)),
        }
    return BinaryModel(
        kind="decision_stump", n_features=p.n_features, params=params, class_prior=prior
    )


@dataclass(frozen=True)
class LearnerSpec:
    """Which base learner to fit inside the pairwise ensemble."""

    kind: str  # "naive_bayes" | "voted_perceptron" | "decision_stump"
    epochs: int = 10

    _ALIASES = {
        "nb": "naive_bayes",
        "vp": "voted_perceptron",
        "stump": "decision_stump",
    }

    def __post_init__(self):
        kind = self._ALIASES.get(self.kind, self.kind)
        if kind not in ("naive_bayes", "voted_perceptron", "decision_stump"):
            raise ArgumentError(f"unknown learner kind '{self.kind}'")
        object.__setattr__(self, "kind", kind)


def fit_learner(spec: LearnerSpec, p: BinaryProblem, seed: int = 0) -> BinaryModel:
    if spec.kind == "naive_bayes":
        return fit_naive_bayes(p)
    if spec.kind == "voted_perceptron":
        return fit_voted_perceptron(p, epochs=spec.epochs, seed=seed)
    return fit_decision_stump(p)


def model_to_json(model: BinaryModel) -> str:
    """Serialize a fitted model (kind tag plus parameter arrays)."""
    params = {
        k: (v.tolist() if isinstance(v, np.ndarray) else v)
        for k, v in model.params.items()
    }
    return json.dumps(
        {
            "kind": model.kind,
            "n_features": model.n_features,
            "params": params,
            "class_prior": list(model.class_prior),
        }
    )


def model_from_json(text: str) -> BinaryModel:
    obj = json.loads(text)
    params = dict(obj["params"])
    for key in ("means", "variances", "log_prior", "weights", "counts"):
        if key in params:
            params[key] = np.asarray(params[key])
    for key in ("left", "right"):
        if key in params:
            params[key] = tuple(params[key])
    return BinaryModel(
        kind=obj["kind"],
        n_features=obj["n_features"],
        params=params,
        class_prior=tuple(obj["class_prior"]),
    )
