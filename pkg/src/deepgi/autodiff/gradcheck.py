"""Central finite-difference checking for backward implementations."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .tensor import Tensor, backward, mul, tsum

__all__ = ["max_rel_error"]


def max_rel_error(
    build: Callable[[], Tensor],
    wrt: Tensor,
    rng: np.random.Generator,
    h: float = 1e-3,
) -> float:
    """Compare the analytic gradient of a random projection against FD.

    ``build`` must rebuild the op graph from its captured input tensors on
    every call (it runs 2 per element). The output is projected onto a fixed
    random direction so every element of ``wrt`` gets an O(1) gradient, and
    the projection is summed in float64 to keep the difference quotient
    clean. Returns max |analytic - numeric| over the gradient's magnitude.
    """
    y = build()
    # magnitudes in [0.5, 1.5] with random signs: a near-zero probe weight
    # would push gradients under float32 difference-quotient resolution
    w = (
        rng.uniform(0.5, 1.5, size=y.data.shape)
        * rng.choice([-1.0, 1.0], size=y.data.shape)
    ).astype(np.float32)
    w64 = w.astype(np.float64)

    wrt.zero_grad()
    backward(tsum(mul(y, Tensor(w))))
    if wrt.grad is None:
        raise ValueError("max_rel_error: wrt received no gradient; is requires_grad set?")
    analytic = wrt.grad.astype(np.float64).reshape(-1)

    def project() -> float:
        return float(np.sum(build().data.astype(np.float64) * w64))

    flat = wrt.data.reshape(-1)
    numeric = np.empty(flat.size, dtype=np.float64)
    for i in range(flat.size):
        orig = flat[i]
        hi = np.float32(orig + h)
        lo = np.float32(orig - h)
        flat[i] = hi
        fp = project()
        flat[i] = lo
        fm = project()
        flat[i] = orig
        numeric[i] = (fp - fm) / (float(hi) - float(lo))

    scale = max(np.abs(analytic).max(), np.abs(numeric).max(), 1e-8)
    return float(np.abs(analytic - numeric).max() / scale)
