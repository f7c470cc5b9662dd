"""Release gate: one test per acceptance criterion.

Each test prints a single PASS/FAIL line (outside pytest's capture) so the
full gate status is visible in one screen of output, then asserts.
"""

import itertools
import json
import time

import numpy as np
import pytest

from pairlabel.cli import EXIT_OK, main
from pairlabel.correction import (
    ClassSubset,
    DecisionRegion,
    Neighborhood,
    corrected_supports,
    estimate_confusion,
    rrc_probability,
)
from pairlabel.data import generate_synthetic
from pairlabel.ensemble import scut_candidates, scut_fit
from pairlabel.experiment import run_experiment
from pairlabel.learners import LearnerSpec
from pairlabel.metrics import METRIC_NAMES, PredictionSet, evaluate_all
from pairlabel.stattests import holm_adjust, spearman_rho, wilcoxon_signed_rank
from pairlabel.weighting import WeightConfig, joint_entropy, mutual_information, nmi_weight


def _announce(capsys, number, ok, detail):
    with capsys.disabled():
        status = "PASS" if ok else "FAIL"
        print(f"ACCEPTANCE {number}: {status} - {detail}")
    assert ok, detail


def _confusion_oracle(first, second, mu_first, mu_n):
    eps = np.zeros((2, 2))
    subsets = (first, second)
    regions = (mu_first, 1.0 - mu_first)
    denom = 0.0
    for k in range(len(mu_n)):
        denom += mu_n[k]
    for s in range(2):
        for h in range(2):
            cell = 0.0
            for k in range(len(mu_n)):
                if subsets[s][k]:
                    cell += regions[h][k] * mu_n[k]
            eps[s, h] = cell / denom
    return eps


def test_criterion_1_confusion_matches_triple_loop(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 51))
        eligible = rng.random(n) < 0.8
        first = eligible & (rng.random(n) < 0.5)
        second = eligible & ~first
        mu_first = rng.random(n)
        mu_n = rng.random(n) * 0.999 + 0.001
        got = estimate_confusion(
            ClassSubset(first=first, second=second),
            DecisionRegion(mu_first=mu_first),
            Neighborhood(memberships=mu_n, beta=1.0),
        )
        want = _confusion_oracle(first, second, mu_first, mu_n)
        worst = max(worst, float(np.abs(got - want).max()))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 5.0
    _announce(
        capsys, 1,
        ok,
        f"local confusion estimate vs naive oracle, 200 cases: max |diff| = {worst:.3g}, "
        f"{elapsed:.2f}s",
    )


def test_criterion_2_correction_algebra(capsys):
    start = time.perf_counter()
    identity_ok = True
    flip_ok = True
    for p in np.linspace(0.0, 1.0, 21):
        d1, d2 = corrected_supports(float(p), np.eye(2))
        identity_ok &= d1 == p and d2 == 1.0 - p
        d1, d2 = corrected_supports(float(p), np.array([[0.0, 1.0], [1.0, 0.0]]))
        flip_ok &= d1 == 1.0 - p and d2 == p
    elapsed = time.perf_counter() - start
    ok = identity_ok and flip_ok and elapsed < 1.0
    _announce(
        capsys, 2,
        ok,
        f"identity conditional keeps supports ({identity_ok}), anti-diagonal flips them "
        f"({flip_ok}), {elapsed:.2f}s",
    )


def test_criterion_3_nmi_bounds(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(103)
    cfg = WeightConfig(gamma=0.5)
    bounds_ok = True
    for _ in range(10_000):
        p = rng.random((2, 2))
        p /= p.sum()
        icm = mutual_information(p)
        hcm = joint_entropy(p)
        w = nmi_weight(p, cfg)
        bounds_ok &= -1e-12 <= icm <= hcm + 1e-12 and 1e-6 <= w <= 1.0
    product_ok = True
    for _ in range(500):
        f = rng.dirichlet([1.0, 1.0])
        g = rng.dirichlet([1.0, 1.0])
        product_ok &= mutual_information(np.outer(f, g)) < 1e-12
    elapsed = time.perf_counter() - start
    ok = bounds_ok and product_ok and elapsed < 2.0
    _announce(
        capsys, 3,
        ok,
        f"10^4 joints: 0 <= ICM <= HCM and w in [1e-6, 1] ({bounds_ok}); "
        f"product joints ICM < 1e-12 ({product_ok}), {elapsed:.2f}s",
    )


def test_criterion_4_rrc_sanity(capsys):
    start = time.perf_counter()
    mid = rrc_probability((0.5, 0.5), mode="beta_mc", seed=1234)
    mid_ok = abs(mid - 0.5) <= 2e-3
    grid = np.linspace(0.0, 1.0, 101)
    values = [
        rrc_probability((float(d), float(1.0 - d)), mode="beta_mc", seed=1234 + i)
        for i, d in enumerate(grid)
    ]
    monotone_ok = all(b >= a - 2e-3 for a, b in zip(values, values[1:]))
    endpoint_ok = values[0] == 0.0 and values[-1] == 1.0
    elapsed = time.perf_counter() - start
    ok = mid_ok and monotone_ok and endpoint_ok and elapsed < 10.0
    _announce(
        capsys, 4,
        ok,
        f"randomized-reference probability: value at 0.5 = {mid:.4f} ({mid_ok}), monotone over "
        f"101 points ({monotone_ok}), exact endpoints ({endpoint_ok}), {elapsed:.2f}s",
    )


def _f1(col, truth, theta):
    pred = col > theta
    tp = int((pred & truth).sum())
    denom = 2 * tp + int((pred & ~truth).sum()) + int((~pred & truth).sum())
    return 1.0 if denom == 0 else 2.0 * tp / denom


def test_criterion_5_scut_optimality(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(105)
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(2, 40))
        n_labels = int(rng.integers(1, 5))
        supports = rng.random((m, n_labels))
        if rng.random() < 0.3:  # force tied support values
            supports = np.round(supports, 1)
        truth = rng.random((m, n_labels)) < 0.4
        thresholds = scut_fit(supports, truth.astype(int))
        for j in range(n_labels):
            achieved = _f1(supports[:, j], truth[:, j], thresholds[j])
            best = max(
                _f1(supports[:, j], truth[:, j], theta)
                for theta in scut_candidates(supports[:, j])
            )
            worst = max(worst, best - achieved)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 10.0
    _announce(
        capsys, 5,
        ok,
        f"threshold calibration vs exhaustive candidate search, 100 blocks: "
        f"max F1 shortfall = {worst:.3g}, {elapsed:.2f}s",
    )


def _metric_oracle(supports, binarized, truth):
    m, n_labels = truth.shape
    out = {}
    out["hamming"] = float((binarized != truth).mean())
    out["zero_one"] = float((binarized != truth).any(axis=1).mean())
    acc = 0.0
    for i in range(m):
        inter = int((binarized[i] & truth[i]).sum())
        size = int(binarized[i].sum() + truth[i].sum())
        acc += 1.0 if size == 0 else 2.0 * inter / size
    out["example_f1_loss"] = 1.0 - acc / m
    terms = []
    for i in range(m):
        rel = np.flatnonzero(truth[i] == 1)
        irr = np.flatnonzero(truth[i] == 0)
        if len(rel) == 0 or len(irr) == 0:
            continue
        bad = 0.0
        for a in rel:
            for b in irr:
                if supports[i, a] < supports[i, b]:
                    bad += 1.0
                elif supports[i, a] == supports[i, b]:
                    bad += 0.5
        terms.append(bad / (len(rel) * len(irr)))
    out["ranking_loss"] = sum(terms) / len(terms)
    prec, rec, f1 = [], [], []
    tp_all = fp_all = fn_all = 0
    for j in range(n_labels):
        tp = int((binarized[:, j] & truth[:, j]).sum())
        fp = int((binarized[:, j] & ~truth[:, j].astype(bool)).sum())
        fn = int((~binarized[:, j].astype(bool) & truth[:, j].astype(bool)).sum())
        tp_all, fp_all, fn_all = tp_all + tp, fp_all + fp, fn_all + fn
        prec.append(1.0 if tp + fp == 0 else tp / (tp + fp))
        rec.append(1.0 if tp + fn == 0 else tp / (tp + fn))
        f1.append(1.0 if 2 * tp + fp + fn == 0 else 2 * tp / (2 * tp + fp + fn))
    out["macro_fdr"] = 1.0 - sum(prec) / n_labels
    out["macro_fnr"] = 1.0 - sum(rec) / n_labels
    out["macro_f1_loss"] = 1.0 - sum(f1) / n_labels
    denom = 2 * tp_all + fp_all + fn_all
    out["micro_f1_loss"] = 1.0 - (1.0 if denom == 0 else 2 * tp_all / denom)
    return out


def test_criterion_6_metric_oracles(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(106)
    worst = 0.0
    for _ in range(500):
        m = int(rng.integers(1, 31))
        n_labels = int(rng.integers(2, 9))
        truth = (rng.random((m, n_labels)) < 0.4).astype(int)
        truth[0, 0], truth[0, 1] = 1, 0  # keep ranking loss defined
        binarized = (rng.random((m, n_labels)) < 0.5).astype(int)
        supports = rng.random((m, n_labels))
        if rng.random() < 0.3:  # force tied supports
            supports = np.round(supports, 1)
        report = evaluate_all(
            PredictionSet(supports=supports, binarized=binarized, truth=truth)
        ).as_dict()
        oracle = _metric_oracle(supports, binarized, truth)
        worst = max(worst, max(abs(report[k] - oracle[k]) for k in METRIC_NAMES))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 5.0
    _announce(
        capsys, 6,
        ok,
        f"all eight criteria vs brute-force oracle, 500 draws: max |diff| = {worst:.3g}, "
        f"{elapsed:.2f}s",
    )


def _enumerated_wilcoxon_p(diffs):
    mags = np.abs(diffs)
    order = np.argsort(mags, kind="stable")
    ranks = np.empty(len(diffs))
    i = 0
    while i < len(diffs):
        j = i
        while j + 1 < len(diffs) and mags[order[j + 1]] == mags[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    observed = ranks[diffs > 0].sum()
    sums = [
        sum(r for r, s in zip(ranks, signs) if s)
        for signs in itertools.product([False, True], repeat=len(diffs))
    ]
    le = sum(1 for s in sums if s <= observed + 1e-9)
    ge = sum(1 for s in sums if s >= observed - 1e-9)
    return min(1.0, 2.0 * min(le, ge) / len(sums))


def test_criterion_7_statistical_tests(capsys):
    start = time.perf_counter()
    a = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    _, p = wilcoxon_signed_rank(a + 0.5, a)
    wilcoxon_ok = p == 0.0625
    rng = np.random.default_rng(107)
    dp_ok = True
    for n in range(5, 13):
        for _ in range(3):
            diffs = rng.standard_normal(n)
            if rng.random() < 0.5:
                diffs[1] = -diffs[0]
            _, exact = wilcoxon_signed_rank(diffs, np.zeros(n))
            dp_ok &= abs(exact - _enumerated_wilcoxon_p(diffs)) <= 1e-12
    holm_ok = holm_adjust([0.01, 0.04, 0.03]) == pytest.approx([0.03, 0.06, 0.06])
    rho, _ = spearman_rho([1, 2, 3, 4, 5], [1, 3, 2, 5, 4])
    spearman_ok = abs(rho - 0.8) <= 1e-12
    elapsed = time.perf_counter() - start
    ok = wilcoxon_ok and dp_ok and holm_ok and spearman_ok and elapsed < 10.0
    _announce(
        capsys, 7,
        ok,
        f"Wilcoxon n=5 p=0.0625 ({wilcoxon_ok}), DP vs enumeration n<=12 ({dp_ok}), "
        f"Holm example ({holm_ok}), Spearman rho=0.8 ({spearman_ok}), {elapsed:.2f}s",
    )


ORDERING_CONFIG = {"n": 600, "L": 5, "d": 10, "noise": 0.3, "seed": 1234, "folds": 5}


@pytest.fixture(scope="module")
def ordering_losses():
    ds = generate_synthetic(
        ORDERING_CONFIG["n"],
        ORDERING_CONFIG["L"],
        ORDERING_CONFIG["d"],
        ORDERING_CONFIG["noise"],
        seed=ORDERING_CONFIG["seed"],
    )
    losses = {}
    for algorithm in (1, 2, 3):
        reports = run_experiment(
            ds,
            algorithm,
            LearnerSpec("stump"),
            folds=ORDERING_CONFIG["folds"],
            seed=ORDERING_CONFIG["seed"],
        )
        losses[algorithm] = float(np.mean([r.macro_f1_loss for r in reports]))
    return losses


def test_criterion_8_end_to_end_ordering(capsys, ordering_losses):
    start = time.perf_counter()
    l1, l2, l3 = (ordering_losses[a] for a in (1, 2, 3))
    a_ok = l2 <= l1 + 0.01
    b_ok = l3 <= l2 + 0.01
    c_ok = l3 <= l1 - 0.005
    elapsed = time.perf_counter() - start
    ok = a_ok and b_ok and c_ok
    _announce(
        capsys, 8,
        ok,
        f"macro-F1 loss ordering on the bundled synthetic problem: "
        f"alg1={l1:.4f} alg2={l2:.4f} alg3={l3:.4f}; corrected not worse than plain "
        f"({a_ok}), weighted not worse than corrected ({b_ok}), weighted strictly beats "
        f"plain ({c_ok}), {elapsed:.2f}s",
    )


def test_criterion_9_reproducible_runs(capsys, tmp_path):
    start = time.perf_counter()
    config = {
        "synthetic": {k: ORDERING_CONFIG[k] for k in ("n", "L", "d", "noise")},
        "seed": ORDERING_CONFIG["seed"],
        "folds": ORDERING_CONFIG["folds"],
        "learner": "stump",
    }
    outputs = []
    for name in ("first", "second"):
        run_config = dict(config, out=str(tmp_path / name))
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(run_config))
        code = main(["run", "--config", str(path)])
        assert code == EXIT_OK
        outputs.append((tmp_path / name / "metrics.csv").read_bytes())
    identical = outputs[0] == outputs[1]
    elapsed = time.perf_counter() - start
    ok = identical and elapsed < 120.0
    _announce(
        capsys, 9,
        ok,
        f"two identically configured runs produce byte-identical metrics.csv "
        f"({identical}), {elapsed:.2f}s",
    )
