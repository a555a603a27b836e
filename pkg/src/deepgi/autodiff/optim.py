"""Adam optimizer with bias correction."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor

__all__ = ["AdamState", "adam_step", "Adam"]


class AdamState:
    """First/second moment buffers for a parameter list, plus the step count."""

    __slots__ = ("m", "v", "step_count")

    def __init__(self, params: list[Tensor]):
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]
        self.step_count = 0


def adam_step(
    params: list[Tensor],
    grads: list[np.ndarray | None],
    state: AdamState,
    lr: float,
    beta1: float = 0.5,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One in-place Adam update. Parameters with a None gradient are skipped."""
    if lr <= 0.0:
        raise ValueError(f"adam_step: lr must be > 0, got {lr}")
    if not 0.0 <= beta1 < 1.0 or not 0.0 <= beta2 < 1.0:
        raise ValueError(f"adam_step: betas must be in [0, 1), got {beta1}, {beta2}")
    if eps <= 0.0:
        raise ValueError(f"adam_step: eps must be > 0, got {eps}")
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError(
            f"adam_step: got {len(params)} params, {len(grads)} grads, "
            f"{len(state.m)} state slots"
        )
    state.step_count += 1
    t = state.step_count
    c1 = np.float32(1.0 / (1.0 - beta1**t))
    c2 = np.float32(1.0 / (1.0 - beta2**t))
    b1, b2 = np.float32(beta1), np.float32(beta2)
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if g is None:
            continue
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p.data -= np.float32(lr) * (m * c1) / (np.sqrt(v * c2) + np.float32(eps))


class Adam:
    """Owns the moment state for a fixed parameter list."""

    def __init__(
        self,
        params: list[Tensor],
        lr: float = 2e-4,
        beta1: float = 0.5,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        if lr <= 0.0:
            raise ValueError(f"Adam: lr must be > 0, got {lr}")
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state = AdamState(self.params)

    @property
    def step_count(self) -> int:
        return self.state.step_count

    def step(self) -> None:
        grads = [p.grad for p in self.params]
        adam_step(self.params, grads, self.state, self.lr, self.beta1, self.beta2, self.eps)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None
