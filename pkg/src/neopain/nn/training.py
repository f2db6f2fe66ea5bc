"""Shared training loops: Adam, minibatches, early stopping on validation loss.

Two entry points mirror the two training levels of the pipeline:
``fit_batched`` for image networks (minibatch training) and ``fit_sequences``
for the temporal heads (one sequence per update).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from neopain.errors import ContractError
from neopain.nn.adam import Adam
from neopain.nn.losses import LOSSES
from neopain.seeding import rng_for


@dataclass
class FitResult:
    epochs_run: int
    best_epoch: int
    best_val_loss: float
    curve: list[tuple[int, float, float]] = field(default_factory=list)

    def write_curve(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_loss", "val_loss"])
            for row in self.curve:
                writer.writerow([row[0], f"{row[1]:.8f}", f"{row[2]:.8f}"])


def _split_validation(n: int, val_fraction: float, seed: int):
    if n < 2:
        raise ContractError(f"need at least 2 samples to train, got {n}")
    order = rng_for(seed, "valsplit").permutation(n)
    n_val = max(1, int(round(n * val_fraction)))
    n_val = min(n_val, n - 1)
    return order[n_val:], order[:n_val]


class _EarlyStopper:
    def __init__(self, patience: int, min_delta: float):
        self.patience = patience
        self.min_delta = min_delta
        self.best = np.inf
        self.best_epoch = -1
        self.stale = 0

    def update(self, epoch: int, val_loss: float) -> bool:
        """Record this epoch; return True when training should stop."""
        if val_loss < self.best - self.min_delta:
            self.best = val_loss
            self.best_epoch = epoch
            self.stale = 0
            return False
        self.stale += 1
        return self.stale >= self.patience


def fit_batched(
    model,
    x: np.ndarray,
    y: np.ndarray,
    *,
    loss: str = "mse",
    lr: float = 1e-4,
    batch_size: int = 16,
    max_epochs: int = 100,
    patience: int = 10,
    min_delta: float = 1e-4,
    val_fraction: float = 0.2,
    seed: int = 0,
) -> FitResult:
    """Train ``model`` on samples ``x`` (first axis) with scalar targets ``y``.

    Validation samples are split off by a seeded permutation; the parameters
    from the best validation epoch are restored at the end.
    """
    loss_fn = LOSSES[loss]
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    train_idx, val_idx = _split_validation(len(x), val_fraction, seed)
    optimizer = Adam(model.param_tensors(), lr=lr)
    stopper = _EarlyStopper(patience, min_delta)
    result = FitResult(epochs_run=0, best_epoch=-1, best_val_loss=np.inf)
    best_state = None

    def eval_loss(idx) -> float:
        total = 0.0
        for start in range(0, len(idx), batch_size):
            sel = idx[start : start + batch_size]
            pred = model.forward(x[sel], training=False).reshape(-1)
            value, _ = loss_fn(pred, y[sel])
            total += value * len(sel)
        return total / len(idx)

    for epoch in range(max_epochs):
        order = rng_for(seed, "shuffle", epoch).permutation(train_idx)
        train_total = 0.0
        for start in range(0, len(order), batch_size):
            sel = order[start : start + batch_size]
            pred = model.forward(x[sel], training=True)
            value, dpred = loss_fn(pred.reshape(-1), y[sel])
            model.backward(dpred.reshape(pred.shape))
            optimizer.step()
            train_total += value * len(sel)
        train_loss = train_total / len(order)
        val_loss = eval_loss(val_idx)
        result.curve.append((epoch, train_loss, val_loss))
        result.epochs_run = epoch + 1
        if val_loss < stopper.best - stopper.min_delta:
            best_state = {k: v.copy() for k, v in model.state_dict().items()}
        if stopper.update(epoch, val_loss):
            break
    if best_state is not None:
        model.load_state_dict(best_state)
    result.best_epoch = stopper.best_epoch
    result.best_val_loss = float(stopper.best)
    return result


def fit_sequences(
    model,
    sequences: list[np.ndarray],
    y: np.ndarray,
    *,
    loss: str = "bce",
    lr: float = 1e-4,
    max_epochs: int = 100,
    patience: int = 10,
    min_delta: float = 1e-4,
    val_fraction: float = 0.2,
    seed: int = 0,
) -> FitResult:
    """Train a sequence classifier one sequence at a time (batch size 1)."""
    loss_fn = LOSSES[loss]
    y = np.asarray(y, dtype=np.float64)
    train_idx, val_idx = _split_validation(len(sequences), val_fraction, seed)
    optimizer = Adam(model.param_tensors(), lr=lr)
    stopper = _EarlyStopper(patience, min_delta)
    result = FitResult(epochs_run=0, best_epoch=-1, best_val_loss=np.inf)
    best_state = None

    def eval_loss(idx) -> float:
        total = 0.0
        for i in idx:
            pred = model.forward(sequences[i], training=False).reshape(-1)
            value, _ = loss_fn(pred, y[i : i + 1])
            total += value
        return total / len(idx)

    for epoch in range(max_epochs):
        order = rng_for(seed, "shuffle", epoch).permutation(train_idx)
        train_total = 0.0
        for i in order:
            pred = model.forward(sequences[i], training=True)
            value, dpred = loss_fn(pred.reshape(-1), y[i : i + 1])
            model.backward(dpred.reshape(pred.shape))
            optimizer.step()
            train_total += value
        train_loss = train_total / len(order)
        val_loss = eval_loss(val_idx)
        result.curve.append((epoch, train_loss, val_loss))
        result.epochs_run = epoch + 1
        if val_loss < stopper.best - stopper.min_delta:
            best_state = {k: v.copy() for k, v in model.state_dict().items()}
        if stopper.update(epoch, val_loss):
            break
    if best_state is not None:
        model.load_state_dict(best_state)
    result.best_epoch = stopper.best_epoch
    result.best_val_loss = float(stopper.best)
    return result
