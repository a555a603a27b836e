"""Dense float32 tensors with reverse-mode automatic differentiation.

Every operation builds a node in an acyclic graph; ``backward`` on a scalar
walks the graph in reverse topological order and accumulates gradients into
the leaves. Only the operations the GI networks need are provided.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

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
]

BCE_EPS = 1e-7  # probability clamp so log never sees 0 or 1


class Tensor:
    """A float32 array plus an optional gradient and a link to its producer."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data, dtype=np.float32)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward_fn: Callable[[np.ndarray], None] | None = None
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad}{tag})"

    def detach(self) -> "Tensor":
        """A graph-free view of the same data."""
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = g.astype(np.float32, copy=True)
        else:
            self.grad += g

    def backward(self) -> None:
        backward(self)

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])


def make_op(
    out_data: np.ndarray,
    parents: Sequence[Tensor],
    backward_fn: Callable[[np.ndarray], None],
) -> Tensor:
    """Wrap an op result, recording the edge only if some parent needs grad."""
    out = Tensor(out_data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward_fn = backward_fn
    return out


def _send(parent: Tensor, g: np.ndarray) -> None:
    if parent.requires_grad:
        parent.accumulate_grad(g)


def _topo_order(root: Tensor) -> list[Tensor]:
    # iterative DFS; graphs from deep nets would overflow the recursion limit
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited:
                stack.append((p, False))
    return order


def backward(loss: Tensor) -> None:
    """Populate ``grad`` on every tensor that ``loss`` depends on.

    Leaf gradients accumulate across calls until cleared; gradients held by
    intermediate nodes are transient per call.
    """
    if loss.data.size != 1:
        raise ValueError(f"backward needs a scalar loss, got shape {loss.data.shape}")
    if not loss.requires_grad:
        return
    order = _topo_order(loss)
    loss.accumulate_grad(np.ones_like(loss.data))
    for node in reversed(order):
        if node._backward_fn is not None and node.grad is not None:
            node._backward_fn(node.grad)
    for node in order:
        if node._backward_fn is not None:
            node.grad = None


def _check_same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.data.shape != b.data.shape:
        raise ValueError(f"{op}: shape mismatch {a.data.shape} vs {b.data.shape}")


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape("add", a, b)
    out_data = a.data + b.data

    def bwd(g: np.ndarray) -> None:
        _send(a, g)
        _send(b, g)

    return make_op(out_data, (a, b), bwd)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape("mul", a, b)
    out_data = a.data * b.data

    def bwd(g: np.ndarray) -> None:
        _send(a, g * b.data)
        _send(b, g * a.data)

    return make_op(out_data, (a, b), bwd)


def scale(a: Tensor, c: float) -> Tensor:
    c32 = np.float32(c)
    out_data = a.data * c32

    def bwd(g: np.ndarray) -> None:
        _send(a, g * c32)

    return make_op(out_data, (a,), bwd)


def tsum(a: Tensor) -> Tensor:
    out_data = np.asarray(a.data.sum(), dtype=np.float32)

    def bwd(g: np.ndarray) -> None:
        _send(a, np.broadcast_to(g, a.data.shape).astype(np.float32))

    return make_op(out_data, (a,), bwd)


def tmean(a: Tensor) -> Tensor:
    out_data = np.asarray(a.data.mean(), dtype=np.float32)
    inv_n = np.float32(1.0 / a.data.size)

    def bwd(g: np.ndarray) -> None:
        _send(a, np.broadcast_to(g * inv_n, a.data.shape).astype(np.float32))

    return make_op(out_data, (a,), bwd)


def concat(parts: Iterable[Tensor], axis: int = 1) -> Tensor:
    parts = list(parts)
    if not parts:
        raise ValueError("concat: empty input list")
    out_data = np.concatenate([p.data for p in parts], axis=axis)
    sizes = [p.data.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def bwd(g: np.ndarray) -> None:
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(lo, hi)
            _send(p, g[tuple(idx)])

    return make_op(out_data, parts, bwd)


# ---------------------------------------------------------------------------
# activations


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    s = np.float32(slope)
    neg = x.data < 0
    out_data = np.where(neg, x.data * s, x.data)

    def bwd(g: np.ndarray) -> None:
        _send(x, np.where(neg, g * s, g))

    return make_op(out_data, (x,), bwd)


def relu(x: Tensor) -> Tensor:
    pos = x.data > 0
    out_data = np.where(pos, x.data, np.float32(0.0))

    def bwd(g: np.ndarray) -> None:
        _send(x, np.where(pos, g, np.float32(0.0)))

    return make_op(out_data, (x,), bwd)


def tanh(x: Tensor) -> Tensor:
    out_data = np.tanh(x.data)

    def bwd(g: np.ndarray) -> None:
        _send(x, g * (1.0 - out_data * out_data))

    return make_op(out_data, (x,), bwd)


def sigmoid(x: Tensor) -> Tensor:
    out_data = 1.0 / (1.0 + np.exp(-x.data, dtype=np.float32))

    def bwd(g: np.ndarray) -> None:
        _send(x, g * out_data * (1.0 - out_data))

    return make_op(out_data, (x,), bwd)


_ACTIVATIONS: dict[str, Callable[..., Tensor]] = {
    "leaky_relu": leaky_relu,
    "relu": lambda x, slope=0.0: relu(x),
    "tanh": lambda x, slope=0.0: tanh(x),
    "sigmoid": lambda x, slope=0.0: sigmoid(x),
}


def activation(x: Tensor, kind: str, slope: float = 0.2) -> Tensor:
    """Elementwise nonlinearity: leaky_relu | relu | tanh | sigmoid."""
    try:
        fn = _ACTIVATIONS[kind]
    except KeyError:
        raise ValueError(f"activation: unknown kind {kind!r}") from None
    return fn(x, slope=slope)


# ---------------------------------------------------------------------------
# dropout and losses


def dropout(x: Tensor, p: float, training: bool, rng: np.random.Generator | None = None) -> Tensor:
    """Inverted dropout: zero with probability p, scale survivors by 1/(1-p).

    Eval mode (and p=0) is the identity, so inference never rescales.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout: p must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return scale(x, 1.0)
    if rng is None:
        raise ValueError("dropout: training mode needs an rng for the mask")
    keep = np.float32(1.0 - p)
    mask = (rng.random(x.data.shape) >= p).astype(np.float32) / keep
    out_data = x.data * mask

    def bwd(g: np.ndarray) -> None:
        _send(x, g * mask)

    return make_op(out_data, (x,), bwd)


def l1_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Mean absolute difference; differentiable w.r.t. pred."""
    _check_same_shape("l1_loss", pred, target)
    diff = pred.data - target.data
    out_data = np.asarray(np.abs(diff).mean(), dtype=np.float32)
    inv_n = np.float32(1.0 / diff.size)

    def bwd(g: np.ndarray) -> None:
        _send(pred, g * np.sign(diff) * inv_n)
        _send(target, -g * np.sign(diff) * inv_n)

    return make_op(out_data, (pred, target), bwd)


def bce_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Mean binary cross-entropy with the prediction clamped away from {0,1}."""
    _check_same_shape("bce_loss", pred, target)
    p = np.clip(pred.data, BCE_EPS, 1.0 - BCE_EPS)
    t = target.data
    out_data = np.asarray(
        -(t * np.log(p) + (1.0 - t) * np.log1p(-p)).mean(), dtype=np.float32
    )
    inv_n = np.float32(1.0 / p.size)
    inside = (pred.data > BCE_EPS) & (pred.data < 1.0 - BCE_EPS)

    def bwd(g: np.ndarray) -> None:
        gp = (p - t) / (p * (1.0 - p)) * inv_n
        _send(pred, g * np.where(inside, gp, np.float32(0.0)))

    return make_op(out_data, (pred, target), bwd)
