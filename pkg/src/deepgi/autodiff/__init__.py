"""Reverse-mode autodiff on float32 numpy arrays.

Tensors record the ops that produced them; ``backward`` on a scalar loss
fills in gradients. Coverage is exactly what the image-to-image networks
need: elementwise ops, losses, 2D convolutions, batch norm, and Adam.
"""

from .tensor import (
    Tensor,
    backward,
    add,
    mul,
    scale,
    tsum,
    tmean,
    concat,
    activation,
    leaky_relu,
    relu,
    tanh,
    sigmoid,
    dropout,
    l1_loss,
    bce_loss,
    BCE_EPS,
)
from .conv import conv2d, conv_transpose2d
from .norm import RunningStats, batch_norm2d
from .optim import AdamState, adam_step, Adam
from .gradcheck import max_rel_error

__all__ = [
    "Tensor",
    "backward",
    "add",
    "mul",
    "scale",
    "tsum",
    "tmean",
    "concat",
    "activation",
    "leaky_relu",
    "relu",
    "tanh",
    "sigmoid",
    "dropout",
    "l1_loss",
    "bce_loss",
    "BCE_EPS",
    "conv2d",
    "conv_transpose2d",
    "RunningStats",
    "batch_norm2d",
    "AdamState",
    "adam_step",
    "Adam",
    "max_rel_error",
]
