"""Elementwise activation functions and their derivatives.

Known names: relu, sigmoid, tanh, hard_sigmoid, linear.
hard_sigmoid follows the piecewise-linear convention clamp(0.2*x + 0.5, 0, 1).
"""

from __future__ import annotations

import numpy as np

from neopain.errors import ContractError

ACTIVATION_NAMES = ("relu", "sigmoid", "tanh", "hard_sigmoid", "linear")


def _relu(x):
    return np.maximum(x, 0.0)


def _sigmoid(x):
    # split by sign for numerical stability at large |x|
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _hard_sigmoid(x):
    return np.clip(0.2 * x + 0.5, 0.0, 1.0)


_FORWARD = {
    "relu": _relu,
    "sigmoid": lambda x: _sigmoid(np.asarray(x, dtype=np.float64)),
    "tanh": np.tanh,
    "hard_sigmoid": _hard_sigmoid,
    "linear": lambda x: x,
}


def activation_apply(name: str, x):
    """Apply the named activation to a scalar or array."""
    if name not in _FORWARD:
        raise ContractError(
            f"unknown activation {name!r}; expected one of {ACTIVATION_NAMES}"
        )
    arr = np.asarray(x, dtype=np.float64)
    out = _FORWARD[name](arr)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def activation_grad(name: str, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Derivative dy/dx of the named activation, given input x and output y."""
    if name == "relu":
        return (x > 0.0).astype(np.float64)
    if name == "sigmoid":
        return y * (1.0 - y)
    if name == "tanh":
        return 1.0 - y * y
    if name == "hard_sigmoid":
        return np.where((x > -2.5) & (x < 2.5), 0.2, 0.0)
    if name == "linear":
        return np.ones_like(x)
    raise ContractError(
        f"unknown activation {name!r}; expected one of {ACTIVATION_NAMES}"
    )
