"""Classification metrics: weighted summaries, ROC/AUC, agreement statistics.

The binary label convention follows the fusion module: the positive class is
"pain". Weighted metrics average per-class values by class support, so for
binary problems weighted recall equals plain accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from neopain.errors import ContractError
from neopain.fusion import NO_PAIN, PAIN


@dataclass
class EvalReport:
    """Metric bundle for one evaluated prediction set."""

    n: int
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    tpr: float
    fpr: float
    auc: float | None = None
    roc_points: list[tuple[float, float, float]] = field(default_factory=list)
    per_class: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "n": self.n, "tp": self.tp, "fp": self.fp,
            "tn": self.tn, "fn": self.fn,
            "accuracy": round(self.accuracy, 6),
            "precision": round(self.precision, 6),
            "recall": round(self.recall, 6),
            "f1": round(self.f1, 6),
            "tpr": round(self.tpr, 6),
            "fpr": round(self.fpr, 6),
            "auc": None if self.auc is None else round(self.auc, 6),
        }
        return out


def _validate_labels(y_true, y_pred):
    if len(y_true) == 0:
        raise ContractError("empty label set")
    if len(y_true) != len(y_pred):
        raise ContractError(f"length mismatch: {len(y_true)} vs {len(y_pred)}")
    bad = set(y_true) | set(y_pred)
    if bad - {PAIN, NO_PAIN}:
        raise ContractError(f"unknown labels: {sorted(bad - {PAIN, NO_PAIN})}")


def weighted_metrics(y_true, y_pred) -> EvalReport:
    """Support-weighted precision/recall/F1 plus pain-class rates."""
    _validate_labels(y_true, y_pred)
    n = len(y_true)
    per_class = {}
    w_prec = w_rec = w_f1 = 0.0
    for cls in (NO_PAIN, PAIN):
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == cls and p == cls)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != cls and p == cls)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == cls and p != cls)
        support = sum(1 for t in y_true if t == cls)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        per_class[cls] = {"precision": prec, "recall": rec, "f1": f1,
                          "support": support}
        w_prec += prec * support / n
        w_rec += rec * support / n
        w_f1 += f1 * support / n
    tp = sum(1 for t, p in zip(y_true, y_pred) if t == PAIN and p == PAIN)
    fp = sum(1 for t, p in zip(y_true, y_pred) if t == NO_PAIN and p == PAIN)
    tn = sum(1 for t, p in zip(y_true, y_pred) if t == NO_PAIN and p == NO_PAIN)
    fn = sum(1 for t, p in zip(y_true, y_pred) if t == PAIN and p == NO_PAIN)
    accuracy = (tp + tn) / n
    tpr = tp / (tp + fn) if tp + fn else 0.0
    fpr = fp / (fp + tn) if fp + tn else 0.0
    return EvalReport(n=n, tp=tp, fp=fp, tn=tn, fn=fn, accuracy=accuracy,
                      precision=w_prec, recall=w_rec, f1=w_f1,
                      tpr=tpr, fpr=fpr, per_class=per_class)


def roc_points(y_true, scores) -> list[tuple[float, float, float]]:
    """(fpr, tpr, threshold) triples for thresholds at score midpoints.

    Thresholds sweep from +inf down through the midpoints between distinct
    scores to -inf; a sample is called pain when score >= threshold.
    """
    _validate_labels(y_true, y_true)
    scores = np.asarray(scores, dtype=np.float64)
    pos = np.array([t == PAIN for t in y_true])
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ContractError("ROC needs both classes present")
    uniq = np.unique(scores)
    thresholds = np.concatenate([[np.inf], (uniq[1:] + uniq[:-1]) / 2.0, [-np.inf]])
    points = []
    for thr in sorted(thresholds, reverse=True):  # descending thr: fpr ascends
        called = scores >= thr
        tp = int(np.sum(called & pos))
        fp = int(np.sum(called & ~pos))
        points.append((fp / n_neg, tp / n_pos, float(thr)))
    return points


def roc_auc(y_true, scores) -> tuple[list[tuple[float, float, float]], float]:
    """ROC sweep plus trapezoid area (equals the Mann-Whitney statistic)."""
    points = roc_points(y_true, scores)
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    auc = float(np.trapezoid(ys, xs))
    return points, auc


def kappa(labels_a, labels_b) -> float:
    """Cohen's kappa; the po == pe == 1 degenerate case is defined as 1.0."""
    if len(labels_a) != len(labels_b) or len(labels_a) == 0:
        raise ContractError("kappa needs two equal-length non-empty label lists")
    n = len(labels_a)
    classes = sorted(set(labels_a) | set(labels_b))
    po = sum(1 for a, b in zip(labels_a, labels_b) if a == b) / n
    pe = sum(
        (sum(1 for a in labels_a if a == c) / n)
        * (sum(1 for b in labels_b if b == c) / n)
        for c in classes
    )
    if pe >= 1.0 - 1e-15:
        if po >= 1.0 - 1e-15:
            return 1.0
        raise ContractError("kappa undefined: chance agreement is 1 but po < 1")
    return (po - pe) / (1.0 - pe)


def pearson(x, y) -> float:
    """Sample correlation coefficient."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) != len(y) or len(x) < 2:
        raise ContractError("pearson needs two equal-length vectors, length >= 2")
    xd = x - x.mean()
    yd = y - y.mean()
    denom = np.sqrt(np.sum(xd**2) * np.sum(yd**2))
    if denom == 0.0:
        raise ContractError("pearson undefined for zero-variance input")
    return float(np.clip(np.sum(xd * yd) / denom, -1.0, 1.0))


def scored_report(y_true, y_pred, scores=None) -> EvalReport:
    """Full report; AUC/ROC included when scores are given and both classes
    appear, left as None otherwise."""
    report = weighted_metrics(y_true, y_pred)
    if scores is not None:
        labels = set(y_true)
        if PAIN in labels and NO_PAIN in labels:
            report.roc_points, report.auc = roc_auc(y_true, scores)
    return report
