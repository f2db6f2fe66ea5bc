"""Training losses: value plus gradient w.r.t. the prediction."""

from __future__ import annotations

import numpy as np

from neopain.errors import NumericsError

_EPS = 1e-12


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error over all elements."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    diff = pred - target
    n = diff.size
    loss = float(np.mean(diff * diff))
    if not np.isfinite(loss):
        raise NumericsError("mse loss is not finite")
    return loss, 2.0 * diff / n


def bce_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Binary cross-entropy on probabilities (targets may be soft in [0,1])."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    p = np.clip(pred, _EPS, 1.0 - _EPS)
    n = p.size
    loss = float(-np.mean(target * np.log(p) + (1.0 - target) * np.log(1.0 - p)))
    if not np.isfinite(loss):
        raise NumericsError("bce loss is not finite")
    grad = (p - target) / (p * (1.0 - p)) / n
    # gradient w.r.t. the unclipped prediction is zero where clipping engaged
    grad = np.where((pred > _EPS) & (pred < 1.0 - _EPS), grad, 0.0)
    return loss, grad


LOSSES = {"mse": mse_loss, "bce": bce_loss}
