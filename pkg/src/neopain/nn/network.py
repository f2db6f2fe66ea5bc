"""Sequential container for the fixed layer set."""

from __future__ import annotations

import numpy as np

from neopain.nn.layers import Layer
from neopain.nn.tensor import Tensor


class Sequential:
    """Runs layers in order; backward runs them in reverse.

    A single instance is stateful across forward/backward (per-layer caches),
    so training one instance is single-threaded by design. Forward-only use on
    fixed weights is side-effect free apart from the caches.
    """

    def __init__(self, layers: list[Layer] | None = None):
        self.layers: list[Layer] = list(layers) if layers else []

    def add(self, layer: Layer) -> "Sequential":
        self.layers.append(layer)
        return self

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        out = x
        for layer in self.layers:
            out = layer.forward(out, training=training)
        return out

    __call__ = forward

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        g = grad_out
        for layer in reversed(self.layers):
            g = layer.backward(g)
        return g

    def params(self) -> list[tuple[str, Tensor]]:
        out = []
        for i, layer in enumerate(self.layers):
            for pname, tensor in layer.params():
                out.append((f"{i}.{layer.name}/{pname}", tensor))
        return out

    def param_tensors(self) -> list[Tensor]:
        return [t for _, t in self.params()]

    def parameter_count(self) -> int:
        return sum(t.numel() for t in self.param_tensors())

    def zero_grads(self) -> None:
        for t in self.param_tensors():
            t.zero_grad()

    def reset_dropout(self) -> None:
        for layer in self.layers:
            if hasattr(layer, "reset_rng"):
                layer.reset_rng()

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: t.data for name, t in self.params()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        own = dict(self.params())
        if set(own) != set(state):
            missing = sorted(set(own) ^ set(state))
            raise KeyError(f"state dict mismatch, differing keys: {missing}")
        for name, tensor in own.items():
            arr = np.asarray(state[name], dtype=np.float64)
            if arr.shape != tensor.data.shape:
                raise ValueError(
                    f"shape mismatch for {name}: {arr.shape} vs {tensor.data.shape}"
                )
            tensor.data = arr.copy()
