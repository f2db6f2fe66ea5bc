"""Forward/backward layer implementations.

Conventions:
  * conv/pool inputs are (C, H, W) or batched (N, C, H, W)
  * dense inputs are (d,) or batched (N, d)
  * every layer caches what its backward pass needs; calling ``backward``
    before ``forward`` raises ``StateError``
  * weights are Glorot-uniform initialised from a per-layer seed
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import as_strided

from neopain.errors import ContractError, StateError
from neopain.nn.activations import ACTIVATION_NAMES, activation_apply, activation_grad
from neopain.nn.tensor import Tensor


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(np.float64)


class Layer:
    """Base class: a differentiable op with optional trainable parameters."""

    name = "layer"

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> list[tuple[str, Tensor]]:
        return []

    def param_tensors(self) -> list[Tensor]:
        return [t for _, t in self.params()]

    def _require_cache(self, cache, op: str):
        if cache is None:
            raise StateError(f"{op}: backward called before forward on {self.name}")
        return cache


class Dense(Layer):
    """Fully connected layer: y = x @ W + b."""

    name = "dense"

    def __init__(self, in_dim: int, units: int, seed: int = 0):
        if in_dim <= 0 or units <= 0:
            raise ContractError(f"dense dims must be positive, got {in_dim}x{units}")
        rng = np.random.default_rng(seed)
        self.in_dim = in_dim
        self.units = units
        self.W = Tensor(glorot_uniform(rng, (in_dim, units), in_dim, units), "W")
        self.b = Tensor(np.zeros(units), "b")
        self._cache = None

    def params(self):
        return [("W", self.W), ("b", self.b)]

    def forward(self, x, training=False):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim not in (1, 2) or x.shape[-1] != self.in_dim:
            raise ContractError(
                f"dense expects (..., {self.in_dim}) input, got shape {x.shape}"
            )
        self._cache = x
        return x @ self.W.data + self.b.data

    def backward(self, grad_out):
        x = self._require_cache(self._cache, "dense")
        grad_out = np.asarray(grad_out, dtype=np.float64)
        if x.ndim == 1:
            self.W.accumulate_grad(np.outer(x, grad_out))
            self.b.accumulate_grad(grad_out)
        else:
            self.W.accumulate_grad(x.T @ grad_out)
            self.b.accumulate_grad(grad_out.sum(axis=0))
        return grad_out @ self.W.data.T


class Conv2D(Layer):
    """2-D convolution via im2col. Padding is 'same', 'valid', or an integer."""

    name = "conv2d"

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel: int = 3,
        stride: int = 1,
        padding: str | int = "same",
        seed: int = 0,
    ):
        if kernel < 1 or stride < 1:
            raise ContractError(f"bad conv2d kernel/stride {kernel}/{stride}")
        if padding == "same":
            if kernel % 2 == 0:
                raise ContractError("'same' padding needs an odd kernel size")
            pad = (kernel - 1) // 2
        elif padding == "valid":
            pad = 0
        else:
            pad = int(padding)
            if pad < 0:
                raise ContractError(f"negative padding {pad}")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.stride = stride
        self.pad = pad
        rng = np.random.default_rng(seed)
        fan_in = in_channels * kernel * kernel
        fan_out = out_channels * kernel * kernel
        self.W = Tensor(
            glorot_uniform(rng, (out_channels, in_channels, kernel, kernel), fan_in, fan_out),
            "W",
        )
        self.b = Tensor(np.zeros(out_channels), "b")
        self._cache = None

    def params(self):
        return [("W", self.W), ("b", self.b)]

    @staticmethod
    def out_size(in_size: int, pad: int, kernel: int, stride: int) -> int:
        return (in_size + 2 * pad - kernel) // stride + 1

    def _check_input(self, x):
        if x.ndim == 3:
            x = x[None]
            squeeze = True
        elif x.ndim == 4:
            squeeze = False
        else:
            raise ContractError(
                f"conv2d expects (C,H,W) or (N,C,H,W) input, got shape {x.shape}"
            )
        if x.shape[1] != self.in_channels:
            raise ContractError(
                f"conv2d expects {self.in_channels} input channels, got {x.shape[1]}"
            )
        k = self.kernel
        if x.shape[2] + 2 * self.pad < k or x.shape[3] + 2 * self.pad < k:
            raise ContractError(
                f"conv2d kernel {k}x{k} larger than padded input {x.shape[2:]}"
            )
        return x, squeeze

    def _im2col(self, xp, oh, ow):
        n, c = xp.shape[:2]
        k, s = self.kernel, self.stride
        sn, sc, sh, sw = xp.strides
        windows = as_strided(
            xp,
            shape=(n, c, k, k, oh, ow),
            strides=(sn, sc, sh, sw, sh * s, sw * s),
        )
        return np.ascontiguousarray(windows).reshape(n, c * k * k, oh * ow)

    def forward(self, x, training=False):
        x = np.asarray(x, dtype=np.float64)
        x4, squeeze = self._check_input(x)
        p = self.pad
        xp = np.pad(x4, ((0, 0), (0, 0), (p, p), (p, p))) if p else x4
        oh = self.out_size(x4.shape[2], p, self.kernel, self.stride)
        ow = self.out_size(x4.shape[3], p, self.kernel, self.stride)
        cols = self._im2col(xp, oh, ow)
        w2 = self.W.data.reshape(self.out_channels, -1)
        out = np.matmul(w2, cols) + self.b.data[:, None]
        out = out.reshape(x4.shape[0], self.out_channels, oh, ow)
        self._cache = (cols, x4.shape, squeeze)
        return out[0] if squeeze else out

    def backward(self, grad_out):
        cols, x_shape, squeeze = self._require_cache(self._cache, "conv2d")
        g = np.asarray(grad_out, dtype=np.float64)
        if squeeze:
            g = g[None]
        n, _, oh, ow = g.shape
        k, s, p = self.kernel, self.stride, self.pad
        g2 = g.reshape(n, self.out_channels, oh * ow)
        self.W.accumulate_grad(
            np.einsum("nol,nkl->ok", g2, cols).reshape(self.W.data.shape)
        )
        self.b.accumulate_grad(g2.sum(axis=(0, 2)))
        w2 = self.W.data.reshape(self.out_channels, -1)
        dcols = np.matmul(w2.T, g2)  # (n, c*k*k, oh*ow)
        dwin = dcols.reshape(n, x_shape[1], k, k, oh, ow)
        hp, wp = x_shape[2] + 2 * p, x_shape[3] + 2 * p
        dxp = np.zeros((n, x_shape[1], hp, wp))
        for i in range(k):
            for j in range(k):
                dxp[:, :, i : i + s * oh : s, j : j + s * ow : s] += dwin[:, :, i, j]
        dx = dxp[:, :, p : p + x_shape[2], p : p + x_shape[3]] if p else dxp
        return dx[0] if squeeze else dx


class MaxPool2D(Layer):
    """Max pooling, default 2x2 window with stride 2, no padding."""

    name = "maxpool2d"

    def __init__(self, pool: int = 2, stride: int | None = None):
        if pool < 1:
            raise ContractError(f"bad pool size {pool}")
        self.pool = pool
        self.stride = stride or pool
        self._cache = None

    def forward(self, x, training=False):
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 3
        if squeeze:
            x = x[None]
        if x.ndim != 4:
            raise ContractError(
                f"maxpool2d expects (C,H,W) or (N,C,H,W) input, got shape {x.shape}"
            )
        n, c, h, w = x.shape
        k, s = self.pool, self.stride
        if h < k or w < k:
            raise ContractError(f"maxpool2d window {k} larger than input {h}x{w}")
        oh = (h - k) // s + 1
        ow = (w - k) // s + 1
        sn, sc, sh, sw = x.strides
        windows = as_strided(
            x, shape=(n, c, oh, ow, k, k), strides=(sn, sc, sh * s, sw * s, sh, sw)
        )
        flat = windows.reshape(n, c, oh, ow, k * k)
        idx = flat.argmax(axis=-1)
        out = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
        self._cache = (idx, (n, c, h, w), squeeze, oh, ow)
        return out[0] if squeeze else out

    def backward(self, grad_out):
        idx, x_shape, squeeze, oh, ow = self._require_cache(self._cache, "maxpool2d")
        g = np.asarray(grad_out, dtype=np.float64)
        if squeeze:
            g = g[None]
        n, c, h, w = x_shape
        k, s = self.pool, self.stride
        dx = np.zeros(x_shape)
        # scatter each window position back to the argmax cell
        for pos in range(k * k):
            mask = idx == pos
            if not mask.any():
                continue
            di, dj = divmod(pos, k)
            contrib = np.where(mask, g, 0.0)
            dx[:, :, di : di + s * oh : s, dj : dj + s * ow : s] += contrib
        return dx[0] if squeeze else dx


class Activation(Layer):
    """Elementwise activation layer."""

    name = "activation"

    def __init__(self, activation: str):
        if activation not in ACTIVATION_NAMES:
            raise ContractError(
                f"unknown activation {activation!r}; expected one of {ACTIVATION_NAMES}"
            )
        self.activation = activation
        self._cache = None

    def forward(self, x, training=False):
        x = np.asarray(x, dtype=np.float64)
        y = activation_apply(self.activation, x)
        y = np.asarray(y, dtype=np.float64)
        self._cache = (x, y)
        return y

    def backward(self, grad_out):
        x, y = self._require_cache(self._cache, "activation")
        return np.asarray(grad_out) * activation_grad(self.activation, x, y)


class Dropout(Layer):
    """Inverted dropout: scales kept units by 1/(1-rate) at training time.

    With ``training=False`` the input is returned untouched (exact identity).
    Masks come from a private generator seeded at construction, so a fixed
    seed reproduces the identical mask sequence.
    """

    name = "dropout"

    def __init__(self, rate: float, seed: int = 0):
        if not 0.0 <= rate < 1.0:
            raise ContractError(f"dropout rate must be in [0,1), got {rate}")
        self.rate = rate
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self._cache = None

    def reset_rng(self) -> None:
        self.rng = np.random.default_rng(self.seed)

    def forward(self, x, training=False):
        x = np.asarray(x, dtype=np.float64)
        if not training or self.rate == 0.0:
            self._cache = None
            self._identity = True
            return x
        keep = 1.0 - self.rate
        mask = (self.rng.random(x.shape) < keep).astype(np.float64) / keep
        self._cache = mask
        self._identity = False
        return x * mask

    def backward(self, grad_out):
        if getattr(self, "_identity", None) is None:
            raise StateError("dropout: backward called before forward")
        g = np.asarray(grad_out, dtype=np.float64)
        if self._identity:
            return g
        return g * self._cache


class Flatten(Layer):
    """(C,H,W) -> (C*H*W,) in row-major order; batched input keeps axis 0."""

    name = "flatten"

    def __init__(self):
        self._cache = None

    def forward(self, x, training=False):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 3:
            self._cache = x.shape
            return x.reshape(-1)
        if x.ndim == 4:
            self._cache = x.shape
            return x.reshape(x.shape[0], -1)
        raise ContractError(f"flatten expects 3-D or 4-D input, got shape {x.shape}")

    def backward(self, grad_out):
        shape = self._require_cache(self._cache, "flatten")
        return np.asarray(grad_out, dtype=np.float64).reshape(shape)


@dataclass
class LayerSpec:
    """Declarative description of one layer, usable to build it.

    ``kind`` is one of conv2d, maxpool2d, dense, dropout, activation, flatten;
    ``params`` hold the kind-specific options and ``seed`` fixes the weight
    init (and dropout mask stream).
    """

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def build(self) -> Layer:
        return build_layer(self)


def build_layer(spec: LayerSpec) -> Layer:
    kind = spec.kind
    p = dict(spec.params)
    if kind == "conv2d":
        return Conv2D(seed=spec.seed, **p)
    if kind == "maxpool2d":
        return MaxPool2D(**p)
    if kind == "dense":
        return Dense(seed=spec.seed, **p)
    if kind == "dropout":
        if not 0.0 <= p.get("rate", 0.0) < 1.0:
            raise ContractError(f"dropout rate must be in [0,1), got {p.get('rate')}")
        return Dropout(seed=spec.seed, **p)
    if kind == "activation":
        return Activation(**p)
    if kind == "flatten":
        return Flatten()
    raise ContractError(f"unknown layer kind {kind!r}")
