"""2D convolution and transposed convolution with full backward support.

Both ops share three numpy kernels. The forward pass is a correlation done
as one matmul per kernel offset (k*k small matmuls instead of one giant
im2col buffer). The input gradient is computed as a stride-1 correlation of
the stride-dilated output gradient against the channel-transposed, spatially
flipped weight, and the weight gradient is one matmul per kernel offset
against the padded input. conv_transpose2d is the adjoint of conv2d, so it
reuses the same kernels with the roles of input and gradient exchanged.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, make_op, _send

__all__ = ["conv2d", "conv_transpose2d"]


def _pad_hw(x: np.ndarray, pad: int) -> np.ndarray:
    if pad == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))


def _corr2d(x: np.ndarray, w: np.ndarray, stride: int, pad: int) -> np.ndarray:
    """Plain correlation: x (N,Ci,H,W), w (Co,Ci,kh,kw) -> (N,Co,H',W')."""
    n, ci, h, wd = x.shape
    co, _, kh, kw = w.shape
    ho = (h + 2 * pad - kh) // stride + 1
    wo = (wd + 2 * pad - kw) // stride + 1
    xp = _pad_hw(x, pad)
    out = np.zeros((n, ho, wo, co), dtype=np.float32)
    flat = out.reshape(-1, co)
    for i in range(kh):
        for j in range(kw):
            patch = xp[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride]
            cols = patch.transpose(0, 2, 3, 1).reshape(-1, ci)
            flat += cols @ w[:, :, i, j].T
    return out.transpose(0, 3, 1, 2)


def _dilate_hw(x: np.ndarray, stride: int) -> np.ndarray:
    """Insert stride-1 zeros between spatial samples."""
    if stride == 1:
        return x
    n, c, h, w = x.shape
    out = np.zeros((n, c, (h - 1) * stride + 1, (w - 1) * stride + 1), dtype=np.float32)
    out[:, :, ::stride, ::stride] = x
    return out


def _corr2d_bwd_input(
    g: np.ndarray, w: np.ndarray, stride: int, pad: int, x_shape: tuple[int, ...]
) -> np.ndarray:
    """Adjoint of _corr2d in its input argument.

    g (N,Co,H',W'), w (Co,Ci,kh,kw) -> (N,Ci,H,W). Dilate g by the stride,
    then run a stride-1 correlation against the flipped transposed weight.
    The dilated buffer is padded by k-1-pad on the left and additionally by
    the stride remainder (H+2p-k) mod s on the right, so trailing input
    rows/cols the forward pass still reached keep their gradient. Negative
    amounts (pad > k-1) crop instead.
    """
    kh, kw = w.shape[2], w.shape[3]
    wf = np.ascontiguousarray(w.transpose(1, 0, 2, 3)[:, :, ::-1, ::-1])
    gd = _dilate_hw(g, stride)
    rh = (x_shape[2] + 2 * pad - kh) % stride
    rw = (x_shape[3] + 2 * pad - kw) % stride
    lh, lw = kh - 1 - pad, kw - 1 - pad
    pads = []
    for lo, hi, axis_len in ((lh, lh + rh, gd.shape[2]), (lw, lw + rw, gd.shape[3])):
        if lo < 0 or hi < 0:
            a = slice(max(-lo, 0), axis_len - max(-hi, 0))
            pads.append((a, max(lo, 0), max(hi, 0)))
        else:
            pads.append((slice(None), lo, hi))
    (sh, plh, phh), (sw, plw, phw) = pads
    gd = gd[:, :, sh, sw]
    gd = np.pad(gd, ((0, 0), (0, 0), (plh, phh), (plw, phw)))
    return _corr2d(gd, wf, 1, 0)


def _corr2d_bwd_weight(
    g: np.ndarray, x: np.ndarray, stride: int, pad: int, kh: int, kw: int
) -> np.ndarray:
    """Adjoint of _corr2d in its weight argument.

    g (N,A,H',W'), x (N,B,H,W) -> (A,B,kh,kw): for each kernel offset the
    weight gradient is the g-by-patch contraction over batch and space.
    """
    n, a, ho, wo = g.shape
    b = x.shape[1]
    xp = _pad_hw(x, pad)
    gm = np.ascontiguousarray(g.transpose(1, 0, 2, 3)).reshape(a, -1)
    gw = np.empty((a, b, kh, kw), dtype=np.float32)
    for i in range(kh):
        for j in range(kw):
            patch = xp[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride]
            cols = np.ascontiguousarray(patch.transpose(1, 0, 2, 3)).reshape(b, -1)
            gw[:, :, i, j] = gm @ cols.T
    return gw


def _check_conv_args(op: str, x: Tensor, w: Tensor, b: Tensor | None, stride: int, pad: int) -> None:
    if x.data.ndim != 4:
        raise ValueError(f"{op}: input must be 4D (N,C,H,W), got shape {x.data.shape}")
    if w.data.ndim != 4:
        raise ValueError(f"{op}: weight must be 4D, got shape {w.data.shape}")
    if stride < 1:
        raise ValueError(f"{op}: stride must be >= 1, got {stride}")
    if pad < 0:
        raise ValueError(f"{op}: pad must be >= 0, got {pad}")
    if b is not None and b.data.ndim != 1:
        raise ValueError(f"{op}: bias must be 1D, got shape {b.data.shape}")


def conv2d(x: Tensor, w: Tensor, b: Tensor | None = None, stride: int = 1, pad: int = 0) -> Tensor:
    """Correlate x (N,Cin,H,W) with w (Cout,Cin,k,k); H' = (H+2p-k)//s + 1."""
    _check_conv_args("conv2d", x, w, b, stride, pad)
    if x.data.shape[1] != w.data.shape[1]:
        raise ValueError(
            f"conv2d: input has {x.data.shape[1]} channels but weight expects {w.data.shape[1]}"
        )
    co, _, kh, kw = w.data.shape
    if x.data.shape[2] + 2 * pad < kh or x.data.shape[3] + 2 * pad < kw:
        raise ValueError(
            f"conv2d: kernel {kh}x{kw} exceeds padded input "
            f"{x.data.shape[2] + 2 * pad}x{x.data.shape[3] + 2 * pad}"
        )
    if b is not None and b.data.shape[0] != co:
        raise ValueError(f"conv2d: bias has {b.data.shape[0]} channels, weight produces {co}")

    out_data = _corr2d(x.data, w.data, stride, pad)
    if b is not None:
        out_data = out_data + b.data.reshape(1, -1, 1, 1)
    x_shape, w_data, x_data = x.data.shape, w.data, x.data
    parents = (x, w) if b is None else (x, w, b)

    def bwd(g: np.ndarray) -> None:
        _send(x, _corr2d_bwd_input(g, w_data, stride, pad, x_shape))
        _send(w, _corr2d_bwd_weight(g, x_data, stride, pad, kh, kw))
        if b is not None:
            _send(b, g.sum(axis=(0, 2, 3)))

    return make_op(out_data, parents, bwd)


def conv_transpose2d(
    x: Tensor, w: Tensor, b: Tensor | None = None, stride: int = 1, pad: int = 0
) -> Tensor:
    """Adjoint of conv2d: x (N,Cin,H,W), w (Cin,Cout,k,k); H' = (H-1)s - 2p + k.

    Forward runs conv2d's input-gradient kernel, so with shared weights the
    two ops form an exact adjoint pair.
    """
    _check_conv_args("conv_transpose2d", x, w, b, stride, pad)
    if x.data.shape[1] != w.data.shape[0]:
        raise ValueError(
            f"conv_transpose2d: input has {x.data.shape[1]} channels "
            f"but weight expects {w.data.shape[0]}"
        )
    ci, co, kh, kw = w.data.shape
    n, _, h, wd = x.data.shape
    ho = (h - 1) * stride - 2 * pad + kh
    wo = (wd - 1) * stride - 2 * pad + kw
    if ho < 1 or wo < 1:
        raise ValueError(f"conv_transpose2d: output size {ho}x{wo} is empty")
    if b is not None and b.data.shape[0] != co:
        raise ValueError(
            f"conv_transpose2d: bias has {b.data.shape[0]} channels, weight produces {co}"
        )

    out_shape = (n, co, ho, wo)
    out_data = _corr2d_bwd_input(x.data, w.data, stride, pad, out_shape)
    if b is not None:
        out_data = out_data + b.data.reshape(1, -1, 1, 1)
    w_data, x_data = w.data, x.data
    parents = (x, w) if b is None else (x, w, b)

    def bwd(g: np.ndarray) -> None:
        _send(x, _corr2d(g, w_data, stride, pad))
        _send(w, _corr2d_bwd_weight(x_data, g, stride, pad, kh, kw))
        if b is not None:
            _send(b, g.sum(axis=(0, 2, 3)))

    return make_op(out_data, parents, bwd)
