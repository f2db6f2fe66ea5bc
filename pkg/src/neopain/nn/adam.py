"""Adam optimizer with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from neopain.errors import ContractError
from neopain.nn.tensor import Tensor


@dataclass
class AdamState:
    """Per-parameter optimizer state."""

    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    m: np.ndarray | None = field(default=None, repr=False)
    v: np.ndarray | None = field(default=None, repr=False)

    def init_for(self, param: Tensor) -> None:
        self.m = np.zeros_like(param.data)
        self.v = np.zeros_like(param.data)


def adam_update(param: Tensor, state: AdamState) -> Tensor:
    """One Adam step on ``param`` in place; consumes (zeroes) its gradient."""
    if state.lr <= 0:
        raise ContractError(f"learning rate must be positive, got {state.lr}")
    if param.grad is None:
        raise ContractError(f"adam_update: parameter {param.name!r} has no gradient")
    if state.m is None or state.m.shape != param.data.shape:
        state.init_for(param)
    g = param.grad
    state.step += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * g
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * (g * g)
    m_hat = state.m / (1.0 - state.beta1**state.step)
    v_hat = state.v / (1.0 - state.beta2**state.step)
    param.data = param.data - state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
    param.zero_grad()
    return param


class Adam:
    """Convenience wrapper holding one ``AdamState`` per parameter."""

    def __init__(self, params: list[Tensor], lr: float = 1e-4, beta1: float = 0.9,
                 beta2: float = 0.999, epsilon: float = 1e-8):
        if lr <= 0:
            raise ContractError(f"learning rate must be positive, got {lr}")
        self.params = list(params)
        self.states = [AdamState(lr=lr, beta1=beta1, beta2=beta2, epsilon=epsilon)
                       for _ in self.params]

    def step(self) -> None:
        for param, state in zip(self.params, self.states):
            if param.grad is not None:
                adam_update(param, state)
