"""Dense tensor with an attached gradient slot."""

from __future__ import annotations

import numpy as np

from neopain.errors import NumericsError


class Tensor:
    """An n-dimensional float64 array plus an optional gradient of equal shape.

    Used for every trainable parameter in the kernel. Activations flowing
    between layers are plain float64 ``ndarray``s; wrapping them would buy
    nothing since only parameters accumulate gradients here.
    """

    __slots__ = ("data", "grad", "name")

    def __init__(self, data, name: str = ""):
        arr = np.asarray(data, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise NumericsError(f"tensor {name!r} contains non-finite values")
        self.data = arr
        self.grad: np.ndarray | None = None
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def numel(self) -> int:
        return int(self.data.size)

    def ensure_grad(self) -> np.ndarray:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        return self.grad

    def accumulate_grad(self, g: np.ndarray) -> None:
        self.ensure_grad()
        self.grad += g

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(name={self.name!r}, shape={self.data.shape})"


def check_finite(arr: np.ndarray, what: str) -> np.ndarray:
    """Raise ``NumericsError`` if ``arr`` has NaN or Inf entries."""
    if not np.all(np.isfinite(arr)):
        raise NumericsError(f"{what} contains non-finite values")
    return arr
