"""Batch normalization over N,H,W per channel, with running statistics."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, make_op, _send

__all__ = ["RunningStats", "batch_norm2d"]


class RunningStats:
    """Exponential moving estimates of per-channel mean and variance.

    Updated in place by train-mode batch_norm2d and read by eval mode, so
    a freshly built network can run inference only after some training (or
    after loading a checkpoint that carries these buffers).
    """

    __slots__ = ("mean", "var")

    def __init__(self, channels: int):
        self.mean = np.zeros(channels, dtype=np.float32)
        self.var = np.ones(channels, dtype=np.float32)


def batch_norm2d(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running: RunningStats,
    training: bool,
    momentum: float = 0.1,
    eps: float = 1e-5,
) -> Tensor:
    """Normalize each channel to zero mean / unit variance, then scale+shift.

    Train mode uses batch statistics (biased variance) and folds them into
    ``running`` with the given momentum; eval mode normalizes by the running
    estimates. Differentiable w.r.t. x, gamma, beta in both modes.
    """
    if eps <= 0.0:
        raise ValueError(f"batch_norm2d: eps must be > 0, got {eps}")
    if x.data.ndim != 4:
        raise ValueError(f"batch_norm2d: input must be 4D (N,C,H,W), got shape {x.data.shape}")
    c = x.data.shape[1]
    if gamma.data.shape != (c,) or beta.data.shape != (c,):
        raise ValueError(
            f"batch_norm2d: gamma/beta must have shape ({c},), "
            f"got {gamma.data.shape} and {beta.data.shape}"
        )

    gview = gamma.data.reshape(1, c, 1, 1)
    if training:
        # accumulate batch statistics in float64: per-channel means gather
        # thousands of terms, and float32 partial sums shift whole channels
        mu = x.data.mean(axis=(0, 2, 3), dtype=np.float64).astype(np.float32)
        var = x.data.var(axis=(0, 2, 3), dtype=np.float64).astype(np.float32)
        m = np.float32(momentum)
        running.mean[:] = (1.0 - m) * running.mean + m * mu
        running.var[:] = (1.0 - m) * running.var + m * var
    else:
        mu = running.mean
        var = running.var
    inv_std = (1.0 / np.sqrt(var + np.float32(eps))).reshape(1, c, 1, 1).astype(np.float32)
    xhat = (x.data - mu.reshape(1, c, 1, 1)) * inv_std
    out_data = gview * xhat + beta.data.reshape(1, c, 1, 1)

    def bwd(g: np.ndarray) -> None:
        if training:
            # batch stats depend on x, so recentre the gradient per channel
            gxh = g * gview
            mean_g = gxh.mean(axis=(0, 2, 3), keepdims=True, dtype=np.float64)
            mean_gx = (gxh * xhat).mean(axis=(0, 2, 3), keepdims=True, dtype=np.float64)
            _send(x, (inv_std * (gxh - mean_g - xhat * mean_gx)).astype(np.float32))
        else:
            _send(x, (g * gview * inv_std).astype(np.float32))
        _send(gamma, (g * xhat).sum(axis=(0, 2, 3), dtype=np.float32))
        _send(beta, g.sum(axis=(0, 2, 3), dtype=np.float32))

    return make_op(out_data, (x, gamma, beta), bwd)
