"""Minimal dense-tensor neural network kernel.

Forward/backward passes for the fixed layer set used by the pain pipelines
(conv2d, maxpool2d, dense, dropout, activation, LSTM), the Adam optimizer,
and a versioned weight-checkpoint format. 64-bit floats throughout.
"""

from neopain.nn.activations import activation_apply
from neopain.nn.adam import Adam, AdamState, adam_update
from neopain.nn.checkpoint import load_checkpoint, save_checkpoint
from neopain.nn.layers import (
    Activation,
    Conv2D,
    Dense,
    Dropout,
    Flatten,
    Layer,
    MaxPool2D,
)
from neopain.nn.lstm import LSTM
from neopain.nn.network import Sequential
from neopain.nn.tensor import Tensor
from neopain.nn.training import FitResult, fit_batched, fit_sequences

__all__ = [
    "Activation",
    "Adam",
    "AdamState",
    "Conv2D",
    "Dense",
    "Dropout",
    "Flatten",
    "LSTM",
    "Layer",
    "MaxPool2D",
    "Sequential",
    "Tensor",
    "activation_apply",
    "adam_update",
    "FitResult",
    "fit_batched",
    "fit_sequences",
    "load_checkpoint",
    "save_checkpoint",
]
