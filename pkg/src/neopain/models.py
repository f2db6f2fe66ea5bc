"""Per-indicator deep models.

Three spatial networks share a small conv trunk (3x3 kernels, width doubling
per block, 2x2 pooling):

* face   — two-stream trunk + bilinear pooling + FC(64) head
* body   — single trunk + Dense(512) head, linear score output
* sound  — single trunk + Dense(512) head, sigmoid output on spectrogram images

Face and body additionally feed per-frame penultimate features to the
temporal stack in :mod:`neopain.temporal`; sound is spatial-only.
"""

from __future__ import annotations

import numpy as np

from neopain.errors import ContractError, DataError
from neopain.nn import (
    Activation,
    Conv2D,
    Dense,
    Dropout,
    Flatten,
    MaxPool2D,
    Sequential,
)
from neopain.nn.checkpoint import load_checkpoint, save_checkpoint
from neopain.nn.training import FitResult, fit_batched
from neopain.seeding import derive_seed

INDICATORS = ("face", "body", "sound")
SCORE_RANGES = {"face": (0, 1), "body": (0, 1), "sound": (0, 2)}

# gradient of sign(u)*sqrt(|u|) is clipped near u=0 where it diverges
_SQRT_GRAD_FLOOR = 1e-6
_NORM_FLOOR = 1e-12


def bilinear_pool(fx: np.ndarray, fy: np.ndarray) -> np.ndarray:
    """Sum over spatial locations of the outer product of channel vectors.

    Accepts (C, H, W) maps or (C, L) location matrices; returns the pooled
    matrix flattened row-major to length C_x * C_y.
    """
    fx = np.asarray(fx, dtype=np.float64)
    fy = np.asarray(fy, dtype=np.float64)
    if fx.ndim == 3:
        fx = fx.reshape(fx.shape[0], -1)
    if fy.ndim == 3:
        fy = fy.reshape(fy.shape[0], -1)
    if fx.ndim != 2 or fy.ndim != 2:
        raise ContractError("bilinear_pool expects (C,L) or (C,H,W) maps")
    if fx.shape[1] != fy.shape[1]:
        raise ContractError(
            f"streams disagree on spatial locations: {fx.shape[1]} vs {fy.shape[1]}"
        )
    return (fx @ fy.T).reshape(-1)


def signed_sqrt(u: np.ndarray) -> np.ndarray:
    """Elementwise sign(u) * sqrt(|u|)."""
    u = np.asarray(u, dtype=np.float64)
    return np.sign(u) * np.sqrt(np.abs(u))


def l2_normalize(v: np.ndarray) -> np.ndarray:
    """v / max(||v||, 1e-12); the zero vector maps to itself."""
    v = np.asarray(v, dtype=np.float64)
    return v / max(np.linalg.norm(v), _NORM_FLOOR)


class BilinearPooling:
    """Batched pool -> signed sqrt -> L2 normalization with backward pass."""

    def __init__(self):
        self._cache = None

    def forward(self, fx: np.ndarray, fy: np.ndarray) -> np.ndarray:
        if fx.ndim != 4 or fy.ndim != 4:
            raise ContractError("expected batched (N, C, H, W) feature maps")
        if fx.shape[0] != fy.shape[0] or fx.shape[2:] != fy.shape[2:]:
            raise ContractError(
                f"stream shapes incompatible: {fx.shape} vs {fy.shape}"
            )
        n, c1 = fx.shape[:2]
        c2 = fy.shape[1]
        fxl = fx.reshape(n, c1, -1)
        fyl = fy.reshape(n, c2, -1)
        u = np.einsum("ncl,ndl->ncd", fxl, fyl).reshape(n, c1 * c2)
        s = np.sign(u) * np.sqrt(np.abs(u))
        norms = np.maximum(np.linalg.norm(s, axis=1, keepdims=True), _NORM_FLOOR)
        z = s / norms
        self._cache = (fx.shape, fy.shape, fxl, fyl, u, s, norms)
        return z

    def backward(self, dz: np.ndarray):
        if self._cache is None:
            raise ContractError("bilinear backward called before forward")
        fx_shape, fy_shape, fxl, fyl, u, s, norms = self._cache
        n, c1 = fx_shape[:2]
        c2 = fy_shape[1]
        # through the row-wise normalization z = s / ||s||
        dot = np.sum(dz * s, axis=1, keepdims=True)
        ds = dz / norms - s * dot / norms**3
        # through signed sqrt: d/du = 0.5 / sqrt(|u|), clipped at the origin
        du = ds * 0.5 / np.maximum(np.sqrt(np.abs(u)), _SQRT_GRAD_FLOOR)
        du = du.reshape(n, c1, c2)
        dfx = np.einsum("ncd,ndl->ncl", du, fyl).reshape(fx_shape)
        dfy = np.einsum("ncd,ncl->ndl", du, fxl).reshape(fy_shape)
        return dfx, dfy


def build_conv_trunk(in_channels: int, blocks=((2, 8), (2, 16)), seed: int = 0,
                     flatten: bool = True) -> Sequential:
    """Conv feature extractor: per block, n 3x3 same-padded convs then 2x2 pool.

    ``blocks`` is a sequence of (conv_count, width) pairs; the default is the
    4-conv/2-pool miniature. The deep 13-conv variant is expressible as
    ((2, 64), (2, 128), (3, 256), (3, 512), (3, 512)).
    """
    layers = []
    prev = in_channels
    for b, (count, width) in enumerate(blocks):
        for i in range(count):
            layers.append(Conv2D(prev, width, 3, padding="same",
                                 seed=derive_seed(seed, "conv", b, i)))
            layers.append(Activation("relu"))
            prev = width
        layers.append(MaxPool2D(2))
    if flatten:
        layers.append(Flatten())
    return Sequential(layers)


def trunk_output_shape(in_size: int, blocks=((2, 8), (2, 16))):
    """(channels, height, width) of the trunk output for square inputs."""
    size = in_size
    for _ in blocks:
        size //= 2
    return blocks[-1][1], size, size


def _dense_head_layers(feature_dim: int, units: int, dropout: float, seed: int):
    """Two FC+dropout blocks (the part shared by both head variants)."""
    return [
        Dense(feature_dim, units, seed=derive_seed(seed, "head", 0)),
        Activation("relu"),
        Dropout(dropout, seed=derive_seed(seed, "headdrop", 0)),
        Dense(units, units, seed=derive_seed(seed, "head", 1)),
        Activation("relu"),
        Dropout(dropout, seed=derive_seed(seed, "headdrop", 1)),
    ]


def build_vgg_head(feature_dim: int, variant: str = "vgg",
                   output: str = "linear", seed: int = 0) -> Sequential:
    """Dense classifier head over flattened or pooled features.

    variant "vgg": Dense(512) x2 with dropout 0.5, then Dense(1).
    variant "bilinear": FC(64) x2 with dropout 0.5, then Dense(1).
    ``output`` selects the final activation (linear or sigmoid).
    """
    if feature_dim <= 0:
        raise ContractError(f"feature_dim must be positive, got {feature_dim}")
    if variant not in ("vgg", "bilinear"):
        raise ContractError(f"unknown head variant {variant!r}")
    units = 512 if variant == "vgg" else 64
    layers = _dense_head_layers(feature_dim, units, 0.5, seed)
    layers.append(Dense(units, 1, seed=derive_seed(seed, "head", 2)))
    if output == "sigmoid":
        layers.append(Activation("sigmoid"))
    elif output != "linear":
        raise ContractError(f"unsupported output activation {output!r}")
    return Sequential(layers)


class VggStyleNet:
    """Single-stream conv network with the Dense(512) head.

    ``features()`` taps the activations feeding the final 1-unit dense layer;
    that 512-vector is what the temporal stack consumes per frame.
    """

    def __init__(self, in_channels: int = 1, in_size: int = 32,
                 blocks=((2, 8), (2, 16)), head_units: int = 512,
                 output: str = "linear", seed: int = 0):
        self.in_channels = in_channels
        self.in_size = in_size
        self.output = output
        self.feature_dim = head_units
        self.trunk = build_conv_trunk(in_channels, blocks,
                                      seed=derive_seed(seed, "trunk"))
        c, h, w = trunk_output_shape(in_size, blocks)
        self.mid = Sequential(_dense_head_layers(c * h * w, head_units, 0.5,
                                                 derive_seed(seed, "mid")))
        out_layers = [Dense(head_units, 1, seed=derive_seed(seed, "out"))]
        if output == "sigmoid":
            out_layers.append(Activation("sigmoid"))
        self.out = Sequential(out_layers)

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        h = self.trunk.forward(x, training=training)
        f = self.mid.forward(h, training=training)
        return self.out.forward(f, training=training)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        g = self.out.backward(grad_out)
        g = self.mid.backward(g)
        return self.trunk.backward(g)

    def features(self, x: np.ndarray) -> np.ndarray:
        """Penultimate activations (inference mode), shape (N, feature_dim)."""
        return self.mid.forward(self.trunk.forward(x))

    def params(self):
        out = []
        for prefix, net in (("trunk", self.trunk), ("mid", self.mid),
                            ("out", self.out)):
            out.extend((f"{prefix}.{k}", t) for k, t in net.params())
        return out

    def param_tensors(self):
        return [t for _, t in self.params()]

    def parameter_count(self) -> int:
        return sum(t.numel() for t in self.param_tensors())

    def state_dict(self):
        return {k: t.data for k, t in self.params()}

    def load_state_dict(self, state):
        own = dict(self.params())
        if set(own) != set(state):
            raise KeyError(f"state mismatch: {sorted(set(own) ^ set(state))}")
        for k, t in own.items():
            arr = np.asarray(state[k], dtype=np.float64)
            if arr.shape != t.data.shape:
                raise ValueError(f"shape mismatch for {k}")
            t.data = arr.copy()

    def reset_dropout(self):
        for net in (self.trunk, self.mid, self.out):
            net.reset_dropout()


class BilinearNet:
    """Two-stream conv network with bilinear pooling and the FC(64) head.

    Both streams see the same input image; their feature maps are combined by
    location-wise outer products, sum-pooled, signed-square-rooted, and
    L2-normalized before the dense head. ``features()`` taps the second FC(64)
    activations.
    """

    def __init__(self, in_channels: int = 1, in_size: int = 32,
                 blocks=((2, 8), (2, 16)), head_units: int = 64,
                 seed: int = 0):
        self.in_channels = in_channels
        self.in_size = in_size
        self.output = "linear"
        self.feature_dim = head_units
        self.trunk_x = build_conv_trunk(in_channels, blocks, flatten=False,
                                        seed=derive_seed(seed, "streamx"))
        self.trunk_y = build_conv_trunk(in_channels, blocks, flatten=False,
                                        seed=derive_seed(seed, "streamy"))
        c, _, _ = trunk_output_shape(in_size, blocks)
        self.pool = BilinearPooling()
        self.mid = Sequential(_dense_head_layers(c * c, head_units, 0.5,
                                                 derive_seed(seed, "mid")))
        self.out = Sequential([Dense(head_units, 1, seed=derive_seed(seed, "out"))])

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        fx = self.trunk_x.forward(x, training=training)
        fy = self.trunk_y.forward(x, training=training)
        z = self.pool.forward(fx, fy)
        f = self.mid.forward(z, training=training)
        return self.out.forward(f, training=training)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        g = self.out.backward(grad_out)
        g = self.mid.backward(g)
        dfx, dfy = self.pool.backward(g)
        dx = self.trunk_x.backward(dfx)
        dy = self.trunk_y.backward(dfy)
        return dx + dy

    def features(self, x: np.ndarray) -> np.ndarray:
        fx = self.trunk_x.forward(x)
        fy = self.trunk_y.forward(x)
        return self.mid.forward(self.pool.forward(fx, fy))

    def params(self):
        out = []
        for prefix, net in (("streamx", self.trunk_x), ("streamy", self.trunk_y),
                            ("mid", self.mid), ("out", self.out)):
            out.extend((f"{prefix}.{k}", t) for k, t in net.params())
        return out

    param_tensors = VggStyleNet.param_tensors
    parameter_count = VggStyleNet.parameter_count
    state_dict = VggStyleNet.state_dict
    load_state_dict = VggStyleNet.load_state_dict

    def reset_dropout(self):
        for net in (self.trunk_x, self.trunk_y, self.mid, self.out):
            net.reset_dropout()


def build_spatial_net(indicator: str, in_channels: int = 1, in_size: int = 32,
                      blocks=((2, 8), (2, 16)), seed: int = 0):
    """The per-indicator spatial network: face bilinear, body/sound VGG-style."""
    if indicator == "face":
        return BilinearNet(in_channels, in_size, blocks, seed=seed)
    if indicator == "body":
        return VggStyleNet(in_channels, in_size, blocks, output="linear", seed=seed)
    if indicator == "sound":
        return VggStyleNet(in_channels, in_size, blocks, output="sigmoid", seed=seed)
    raise ContractError(f"unknown indicator {indicator!r}")


def validate_scores(indicator: str, scores, sample_ids) -> np.ndarray:
    """Check per-sample indicator scores against the scale ranges."""
    lo, hi = SCORE_RANGES[indicator]
    scores = np.asarray(scores, dtype=np.float64)
    for sid, s in zip(sample_ids, scores):
        if not float(s).is_integer() or not lo <= s <= hi:
            raise DataError(
                f"sample {sid}: {indicator} score {s} outside {{{lo}..{hi}}}"
            )
    return scores


def spatial_targets(indicator: str, scores: np.ndarray) -> tuple[np.ndarray, str]:
    """Training targets and loss for level-1 spatial training.

    Face/body regress the raw 0/1 score with MSE through the linear output;
    sound maps 0/1/2 to a soft probability score/2 trained with BCE.
    """
    if indicator == "sound":
        return scores / 2.0, "bce"
    return scores.astype(np.float64), "mse"


def train_spatial(net, images: np.ndarray, targets: np.ndarray, *, loss: str,
                  lr: float = 1e-4, batch_size: int = 16, max_epochs: int = 100,
                  patience: int = 10, min_delta: float = 1e-4,
                  seed: int = 0) -> FitResult:
    """Level-1 training of a spatial network on (image, target score) pairs."""
    net.reset_dropout()
    return fit_batched(net, images, targets, loss=loss, lr=lr,
                       batch_size=batch_size, max_epochs=max_epochs,
                       patience=patience, min_delta=min_delta, seed=seed)


def save_net(path, net) -> None:
    save_checkpoint(path, {k: t.data for k, t in net.params()})


def load_net(path, net):
    net.load_state_dict(load_checkpoint(path))
    return net
