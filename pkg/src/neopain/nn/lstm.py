"""LSTM layer for single sequences (the temporal nets train with batch size 1).

Gate layout in the fused weight matrices is [input | forget | output | candidate].
Gates use a hard-sigmoid activation and the candidate/output squash is tanh,
so every hidden-state component stays in [-1, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from neopain.errors import ContractError
from neopain.nn.activations import activation_apply, activation_grad
from neopain.nn.layers import Layer, glorot_uniform
from neopain.nn.tensor import Tensor


@dataclass
class LstmState:
    """Recurrent state: hidden vector h and cell vector c."""

    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, units: int) -> "LstmState":
        return cls(h=np.zeros(units), c=np.zeros(units))


class LSTM(Layer):
    """Single-sequence LSTM.

    Input is (T, input_dim); output is the per-step hidden sequence (T, units)
    when ``return_sequences`` is set, else the final hidden state (units,).
    ``dropout`` is input-connection dropout, applied per step at training time
    with a fresh mask each step.
    """

    name = "lstm"

    def __init__(
        self,
        input_dim: int,
        units: int,
        dropout: float = 0.0,
        return_sequences: bool = False,
        gate_activation: str = "hard_sigmoid",
        cell_activation: str = "tanh",
        seed: int = 0,
    ):
        if units <= 0 or input_dim <= 0:
            raise ContractError(f"lstm dims must be positive, got {input_dim}x{units}")
        if not 0.0 <= dropout < 1.0:
            raise ContractError(f"lstm dropout must be in [0,1), got {dropout}")
        self.input_dim = input_dim
        self.units = units
        self.dropout = dropout
        self.return_sequences = return_sequences
        self.gate_activation = gate_activation
        self.cell_activation = cell_activation
        self.seed = seed
        rng = np.random.default_rng(seed)
        u = units
        self.W_x = Tensor(
            glorot_uniform(rng, (input_dim, 4 * u), input_dim, 4 * u), "W_x"
        )
        self.W_h = Tensor(glorot_uniform(rng, (u, 4 * u), u, 4 * u), "W_h")
        b = np.zeros(4 * u)
        b[u : 2 * u] = 1.0  # forget-gate bias starts open
        self.b = Tensor(b, "b")
        self.rng = np.random.default_rng(seed)
        self._cache = None

    def params(self):
        return [("W_x", self.W_x), ("W_h", self.W_h), ("b", self.b)]

    def reset_rng(self) -> None:
        self.rng = np.random.default_rng(self.seed)

    def _gates(self, z: np.ndarray):
        u = self.units
        sig = activation_apply(self.gate_activation, z[: 3 * u])
        g = activation_apply(self.cell_activation, z[3 * u :])
        return sig[:u], sig[u : 2 * u], sig[2 * u : 3 * u], g

    def step(self, x_t: np.ndarray, state: LstmState) -> LstmState:
        """One recurrence step (no dropout, no caching); returns the new state."""
        x_t = np.asarray(x_t, dtype=np.float64)
        if x_t.shape != (self.input_dim,):
            raise ContractError(
                f"lstm step expects input of shape ({self.input_dim},), got {x_t.shape}"
            )
        if state.h.shape != (self.units,):
            raise ContractError(
                f"lstm state has {state.h.shape} hidden, expected ({self.units},)"
            )
        z = x_t @ self.W_x.data + state.h @ self.W_h.data + self.b.data
        i, f, o, g = self._gates(z)
        c = f * state.c + i * g
        h = o * activation_apply(self.cell_activation, c)
        return LstmState(h=h, c=c)

    def forward(self, x, training=False):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ContractError(
                f"lstm expects (T, {self.input_dim}) input, got shape {x.shape}"
            )
        steps, u = x.shape[0], self.units
        if training and self.dropout > 0.0:
            keep = 1.0 - self.dropout
            mask = (self.rng.random(x.shape) < keep).astype(np.float64) / keep
        else:
            mask = None
        xm = x * mask if mask is not None else x
        xw = xm @ self.W_x.data  # (T, 4u), hoisted out of the recurrence

        h = np.zeros(u)
        c = np.zeros(u)
        zs = np.empty((steps, 4 * u))
        gate_i = np.empty((steps, u))
        gate_f = np.empty((steps, u))
        gate_o = np.empty((steps, u))
        cand = np.empty((steps, u))
        cells = np.empty((steps, u))
        tanh_c = np.empty((steps, u))
        h_prev = np.empty((steps, u))
        hs = np.empty((steps, u))
        for t in range(steps):
            h_prev[t] = h
            z = xw[t] + h @ self.W_h.data + self.b.data
            i, f, o, g = self._gates(z)
            c_prev = c
            c = f * c_prev + i * g
            tc = activation_apply(self.cell_activation, c)
            h = gate_o_h = o * tc
            zs[t] = z
            gate_i[t], gate_f[t], gate_o[t], cand[t] = i, f, o, g
            cells[t] = c
            tanh_c[t] = tc
            hs[t] = gate_o_h
        self._cache = (xm, mask, zs, gate_i, gate_f, gate_o, cand, cells, tanh_c, h_prev)
        return hs if self.return_sequences else hs[-1]

    def backward(self, grad_out):
        cache = self._require_cache(self._cache, "lstm")
        xm, mask, zs, gate_i, gate_f, gate_o, cand, cells, tanh_c, h_prev = cache
        steps, u = xm.shape[0], self.units
        g_out = np.asarray(grad_out, dtype=np.float64)
        if self.return_sequences:
            if g_out.shape != (steps, u):
                raise ContractError(
                    f"lstm upstream grad shape {g_out.shape}, expected {(steps, u)}"
                )
            dh_seq = g_out
        else:
            if g_out.shape != (u,):
                raise ContractError(
                    f"lstm upstream grad shape {g_out.shape}, expected {(u,)}"
                )
            dh_seq = np.zeros((steps, u))
            dh_seq[-1] = g_out

        dz_all = np.empty((steps, 4 * u))
        dh_next = np.zeros(u)
        dc_next = np.zeros(u)
        w_h = self.W_h.data
        for t in range(steps - 1, -1, -1):
            dh = dh_seq[t] + dh_next
            do = dh * tanh_c[t]
            dc = dh * gate_o[t] * activation_grad(
                self.cell_activation, cells[t], tanh_c[t]
            ) + dc_next
            c_prev = cells[t - 1] if t > 0 else np.zeros(u)
            df = dc * c_prev
            di = dc * cand[t]
            dg = dc * gate_i[t]
            z = zs[t]
            dz = np.empty(4 * u)
            gate_part = np.concatenate([di, df, do])
            dz[: 3 * u] = gate_part * activation_grad(
                self.gate_activation, z[: 3 * u],
                np.concatenate([gate_i[t], gate_f[t], gate_o[t]]),
            )
            dz[3 * u :] = dg * activation_grad(
                self.cell_activation, z[3 * u :], cand[t]
            )
            dz_all[t] = dz
            dh_next = dz @ w_h.T
            dc_next = dc * gate_f[t]

        self.W_x.accumulate_grad(xm.T @ dz_all)
        self.W_h.accumulate_grad(h_prev.T @ dz_all)
        self.b.accumulate_grad(dz_all.sum(axis=0))
        dx = dz_all @ self.W_x.data.T
        if mask is not None:
            dx = dx * mask
        return dx
