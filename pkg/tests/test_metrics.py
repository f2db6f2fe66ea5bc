"""Weighted metrics, ROC/AUC, kappa, and Pearson against oracles."""

import numpy as np
import pytest

from neopain.errors import ContractError
from neopain.metrics import (kappa, pearson, roc_auc, roc_points,
                             scored_report, weighted_metrics)
from oracles import brute_force_auc, cohen_kappa_oracle, confusion_metrics

P, N = "pain", "no-pain"


def test_all_correct_is_ones():
    r = weighted_metrics([P, N, P], [P, N, P])
    assert r.accuracy == r.precision == r.recall == r.f1 == 1.0


def test_hand_worked_case():
    # truths [P,P,N,N], predictions [P,N,N,N]
    r = weighted_metrics([P, P, N, N], [P, N, N, N])
    assert r.accuracy == 0.75
    assert r.per_class[P]["recall"] == 0.5
    acc, wp, wr, wf1, _ = confusion_metrics([P, P, N, N], [P, N, N, N])
    assert r.precision == pytest.approx(wp)
    assert r.recall == pytest.approx(wr)
    assert r.f1 == pytest.approx(wf1)


def test_single_class_predictions_recall_is_prevalence():
    y = [P, P, P, N, N, P]
    r = weighted_metrics(y, [P] * 6)
    assert r.recall == pytest.approx(4 / 6)


def test_weighted_recall_equals_accuracy_binary():
    rng = np.random.default_rng(5)
    for _ in range(25):
        n = int(rng.integers(2, 40))
        y = [P if v else N for v in rng.integers(0, 2, n)]
        yh = [P if v else N for v in rng.integers(0, 2, n)]
        r = weighted_metrics(y, yh)
        assert r.recall == pytest.approx(r.accuracy)


def test_weighted_metrics_match_oracle_random():
    rng = np.random.default_rng(17)
    for _ in range(100):
        n = int(rng.integers(2, 60))
        y = [P if v else N for v in rng.integers(0, 2, n)]
        yh = [P if v else N for v in rng.integers(0, 2, n)]
        r = weighted_metrics(y, yh)
        acc, wp, wr, wf1, _ = confusion_metrics(y, yh)
        assert r.accuracy == pytest.approx(acc)
        assert r.precision == pytest.approx(wp)
        assert r.recall == pytest.approx(wr)
        assert r.f1 == pytest.approx(wf1)


def test_validation_errors():
    with pytest.raises(ContractError):
        weighted_metrics([], [])
    with pytest.raises(ContractError):
        weighted_metrics([P], [P, N])
    with pytest.raises(ContractError):
        weighted_metrics([P, "weird"], [P, P])


def test_roc_perfect_and_chance():
    _, auc = roc_auc([P, P, N, N], [0.9, 0.8, 0.2, 0.1])
    assert auc == pytest.approx(1.0)
    _, auc = roc_auc([P, N, P, N], [0.5, 0.5, 0.5, 0.5])
    assert auc == pytest.approx(0.5)


def test_roc_worked_quarter_case():
    _, auc = roc_auc([P, N, P, N], [0.9, 0.8, 0.4, 0.2])
    assert auc == pytest.approx(0.75)


def test_roc_single_class_rejected():
    with pytest.raises(ContractError):
        roc_points([P, P], [0.1, 0.9])


def test_roc_endpoints_and_monotone():
    rng = np.random.default_rng(3)
    y = [P if v else N for v in rng.integers(0, 2, 30)]
    y[0], y[1] = P, N
    s = rng.random(30)
    pts = roc_points(y, s)
    assert pts[0][:2] == (0.0, 0.0) and pts[-1][:2] == (1.0, 1.0)
    fprs = [p[0] for p in pts]
    tprs = [p[1] for p in pts]
    assert fprs == sorted(fprs) and tprs == sorted(tprs)
    assert pts[0][2] == float("inf") and pts[-1][2] == float("-inf")


def test_trapezoid_auc_equals_pair_statistic():
    rng = np.random.default_rng(29)
    for trial in range(30):
        n = int(rng.integers(4, 200))
        y = [P if v else N for v in rng.integers(0, 2, n)]
        y[0], y[1] = P, N  # both classes guaranteed
        # duplicate scores exercise the tie handling
        s = np.round(rng.random(n), 2 if trial % 3 else 1)
        _, auc = roc_auc(y, s)
        assert abs(auc - brute_force_auc(y, s, P)) < 1e-9


def test_kappa_identical_and_worked_case():
    assert kappa([P, N, P], [P, N, P]) == 1.0
    a, b = [P, P, N, N], [P, N, N, N]
    assert kappa(a, b) == pytest.approx(cohen_kappa_oracle(a, b))


def test_kappa_independent_marginals_is_zero():
    # constructed so po == pe: agreement exactly at chance level
    a = [P, P, N, N]
    b = [P, N, P, N]
    assert kappa(a, b) == pytest.approx(0.0)


def test_kappa_random_against_oracle():
    rng = np.random.default_rng(41)
    for _ in range(50):
        n = int(rng.integers(2, 30))
        a = [P if v else N for v in rng.integers(0, 2, n)]
        b = [P if v else N for v in rng.integers(0, 2, n)]
        expect = cohen_kappa_oracle(a, b)
        if np.isnan(expect):
            with pytest.raises(ContractError):
                kappa(a, b)
        else:
            assert kappa(a, b) == pytest.approx(expect)
            assert kappa(a, b) <= 1.0


def test_kappa_degenerate_chance_agreement():
    # pe == 1 only when both sides are constant on the same class, which
    # forces po == 1 as well: defined as perfect agreement
    assert kappa([P, P], [P, P]) == 1.0
    # constant but opposite labelings have pe == 0, not the degenerate case
    assert kappa([P, P], [N, N]) == pytest.approx(0.0)


def test_pearson_basic():
    x = [1.0, 2.0, 3.0, 4.0]
    assert pearson(x, [2 * v + 1 for v in x]) == pytest.approx(1.0)
    assert pearson(x, [-v for v in x]) == pytest.approx(-1.0)
    assert pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5)


def test_pearson_errors():
    with pytest.raises(ContractError):
        pearson([1.0], [2.0])
    with pytest.raises(ContractError):
        pearson([1.0, 1.0], [0.0, 1.0])


def test_scored_report_includes_auc_only_with_scores():
    y, yh = [P, N, P, N], [P, N, N, N]
    assert weighted_metrics(y, yh).auc is None
    r = scored_report(y, yh, [0.9, 0.2, 0.6, 0.4])
    assert r.auc is not None
    assert r.roc_points
    d = r.to_dict()
    assert set(d) == {"n", "tp", "fp", "tn", "fn", "accuracy", "precision",
                      "recall", "f1", "tpr", "fpr", "auc"}
