"""Temporal classification head: stacked LSTMs over per-frame feature sequences.

The stack is fixed: LSTM(16, dropout 0.2, per-step outputs) -> LSTM(16,
dropout 0.2, final state) -> Dense(16, relu) -> Dropout(0.3) -> Dense(16,
relu) -> Dropout(0.3) -> Dense(1, sigmoid). Input is a (steps, feature_dim)
sequence; output is a pain probability.
"""

from __future__ import annotations

import numpy as np

from neopain.errors import ContractError
from neopain.nn import LSTM, Activation, Dense, Dropout, Sequential
from neopain.nn.training import FitResult, fit_sequences
from neopain.seeding import derive_seed

LSTM_UNITS = 16
DENSE_UNITS = 16
LSTM_DROPOUT = 0.2
DENSE_DROPOUT = 0.3


def build_temporal_head(feature_dim: int, seed: int = 0) -> Sequential:
    """Construct the two-LSTM classification stack for ``feature_dim`` inputs."""
    if feature_dim <= 0:
        raise ContractError(f"feature_dim must be positive, got {feature_dim}")
    s = lambda tag: derive_seed(seed, "temporal", tag)
    return Sequential([
        LSTM(feature_dim, LSTM_UNITS, dropout=LSTM_DROPOUT,
             return_sequences=True, seed=s("lstm0")),
        LSTM(LSTM_UNITS, LSTM_UNITS, dropout=LSTM_DROPOUT,
             return_sequences=False, seed=s("lstm1")),
        Dense(LSTM_UNITS, DENSE_UNITS, seed=s("fc0")),
        Activation("relu"),
        Dropout(DENSE_DROPOUT, seed=s("drop0")),
        Dense(DENSE_UNITS, DENSE_UNITS, seed=s("fc1")),
        Activation("relu"),
        Dropout(DENSE_DROPOUT, seed=s("drop1")),
        Dense(DENSE_UNITS, 1, seed=s("fc2")),
        Activation("sigmoid"),
    ])


def temporal_parameter_count(feature_dim: int) -> int:
    """Closed-form parameter count of the stack for a given input width."""
    u = LSTM_UNITS
    lstm0 = 4 * u * (feature_dim + u + 1)
    lstm1 = 4 * u * (u + u + 1)
    dense = 2 * (u * DENSE_UNITS + DENSE_UNITS) + (DENSE_UNITS + 1)
    return lstm0 + lstm1 + dense


class TemporalClassifier:
    """Sequence -> pain-probability model around the fixed LSTM stack."""

    def __init__(self, feature_dim: int, sequence_length: int = 32, seed: int = 0):
        self.feature_dim = feature_dim
        self.sequence_length = sequence_length
        self.seed = seed
        self.net = build_temporal_head(feature_dim, seed=seed)

    def _check_sequence(self, seq: np.ndarray) -> np.ndarray:
        seq = np.asarray(seq, dtype=np.float64)
        if seq.ndim != 2 or seq.shape[1] != self.feature_dim:
            raise ContractError(
                f"sequence must be (steps, {self.feature_dim}), got {seq.shape}"
            )
        if seq.shape[0] != self.sequence_length:
            raise ContractError(
                f"sequence length {seq.shape[0]} != expected {self.sequence_length}"
            )
        return seq

    def forward(self, seq: np.ndarray, training: bool = False) -> np.ndarray:
        return self.net.forward(self._check_sequence(seq), training=training)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        return self.net.backward(grad_out)

    def predict_proba(self, seq: np.ndarray) -> float:
        """Pain probability for one sequence (inference mode)."""
        return float(self.forward(seq, training=False).reshape(()))

    def fit(self, sequences: list[np.ndarray], labels: np.ndarray,
            **kwargs) -> FitResult:
        """Train with batch size 1 over (sequence, binary label) pairs."""
        checked = [self._check_sequence(s) for s in sequences]
        labels = np.asarray(labels, dtype=np.float64)
        if set(np.unique(labels)) - {0.0, 1.0}:
            raise ContractError("temporal labels must be binary 0/1")
        self.net.reset_dropout()
        return fit_sequences(self.net, checked, labels, loss="bce",
                             seed=kwargs.pop("seed", self.seed), **kwargs)

    def param_tensors(self):
        return self.net.param_tensors()

    def state_dict(self):
        return self.net.state_dict()

    def load_state_dict(self, state):
        self.net.load_state_dict(state)
