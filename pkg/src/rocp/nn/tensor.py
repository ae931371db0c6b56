"""Tape-based reverse-mode differentiation over float64 numpy arrays.

Every differentiable operation is a method on :class:`Tape`.  A tape created
with ``record=False`` computes the same forward values but keeps no graph,
which is how target networks and acting are evaluated.
"""
from __future__ import annotations

from collections import Counter
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import expit


class NumericError(ArithmeticError):
    """A non-finite value appeared where finite values are required."""


class ShapeError(ValueError):
    pass


class TapeError(RuntimeError):
    pass


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "is_leaf")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self.is_leaf = True

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"


class Node(NamedTuple):
    out: Tensor
    inputs: tuple
    backward: Callable


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def check_finite(x: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(x)):
        raise NumericError(f"non-finite values in {what}")


class Tape:
    """Ordered record of primitive operations.

    ``counts`` tallies recurrent work (``rnn_forward`` and ``bptt``) so that
    agents can report how many unrolls an update performed.
    """

    def __init__(self, record: bool = True):
        self.record = record
        self.nodes: list[Node] = []
        self.counts: Counter = Counter()

    def __len__(self) -> int:
        return len(self.nodes)

    def const(self, data) -> Tensor:
        return Tensor(data)

    def detach(self, x: Tensor) -> Tensor:
        return Tensor(x.data)

    def apply(self, data: np.ndarray, inputs: Sequence[Tensor], backward: Callable) -> Tensor:
        """Wrap ``data`` as the output of an operation on ``inputs``.

        ``backward(g)`` must return one gradient (or None) per input.
        """
        inputs = tuple(inputs)
        needs = self.record and any(t.requires_grad for t in inputs)
        out = Tensor(data, requires_grad=needs)
        out.is_leaf = False
        if needs:
            self.nodes.append(Node(out, inputs, backward))
        return out

    # -- dense ----------------------------------------------------------

    def linear(self, x: Tensor, W: Tensor, b: Tensor) -> Tensor:
        """``x @ W.T + b`` over the last axis; leading axes are batch."""
        if W.ndim != 2 or b.shape != (W.shape[0],) or x.shape[-1] != W.shape[1]:
            raise ShapeError(f"linear: x{x.shape} W{W.shape} b{b.shape}")
        lead = x.shape[:-1]
        x2 = x.data.reshape(-1, W.shape[1])
        y = x2 @ W.data.T + b.data

        def backward(g):
            g2 = g.reshape(-1, W.shape[0])
            dx = (g2 @ W.data).reshape(x.shape) if x.requires_grad else None
            return dx, g2.T @ x2, g2.sum(axis=0)

        return self.apply(y.reshape(lead + (W.shape[0],)), (x, W, b), backward)

    # -- elementwise ----------------------------------------------------

    def add(self, a: Tensor, b: Tensor) -> Tensor:
        return self.apply(a.data + b.data, (a, b),
                          lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))

    def sub(self, a: Tensor, b: Tensor) -> Tensor:
        return self.apply(a.data - b.data, (a, b),
                          lambda g: (_unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)))

    def mul(self, a: Tensor, b: Tensor) -> Tensor:
        return self.apply(a.data * b.data, (a, b),
                          lambda g: (_unbroadcast(g * b.data, a.shape),
                                     _unbroadcast(g * a.data, b.shape)))

    def scale(self, a: Tensor, c: float) -> Tensor:
        return self.apply(a.data * c, (a,), lambda g: (g * c,))

    def shift(self, a: Tensor, c) -> Tensor:
        return self.apply(a.data + c, (a,), lambda g: (g,))

    def neg(self, a: Tensor) -> Tensor:
        return self.apply(-a.data, (a,), lambda g: (-g,))

    def square(self, a: Tensor) -> Tensor:
        return self.apply(a.data * a.data, (a,), lambda g: (2.0 * g * a.data,))

    def relu(self, a: Tensor) -> Tensor:
        pos = a.data > 0
        return self.apply(np.where(pos, a.data, 0.0), (a,), lambda g: (g * pos,))

    def tanh(self, a: Tensor) -> Tensor:
        y = np.tanh(a.data)
        return self.apply(y, (a,), lambda g: (g * (1.0 - y * y),))

    def sigmoid(self, a: Tensor) -> Tensor:
        y = expit(a.data)
        return self.apply(y, (a,), lambda g: (g * y * (1.0 - y),))

    def exp(self, a: Tensor) -> Tensor:
        y = np.exp(a.data)
        return self.apply(y, (a,), lambda g: (g * y,))

    def log(self, a: Tensor) -> Tensor:
        return self.apply(np.log(a.data), (a,), lambda g: (g / a.data,))

    def clip(self, a: Tensor, lo: float, hi: float) -> Tensor:
        # zero gradient outside [lo, hi], like a hard clamp
        inside = (a.data >= lo) & (a.data <= hi)
        return self.apply(np.clip(a.data, lo, hi), (a,), lambda g: (g * inside,))

    def minimum(self, a: Tensor, b: Tensor) -> Tensor:
        take_a = a.data <= b.data
        return self.apply(np.minimum(a.data, b.data), (a, b),
                          lambda g: (_unbroadcast(g * take_a, a.shape),
                                     _unbroadcast(g * ~take_a, b.shape)))

    # -- structural -----------------------------------------------------

    def sum(self, a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
        y = a.data.sum(axis=axis, keepdims=keepdims)

        def backward(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, a.shape).copy(),)

        return self.apply(y, (a,), backward)

    def mean(self, a: Tensor) -> Tensor:
        return self.scale(self.sum(a), 1.0 / a.data.size)

    def concat(self, xs: Sequence[Tensor], axis: int = -1) -> Tensor:
        xs = tuple(xs)
        y = np.concatenate([x.data for x in xs], axis=axis)
        splits = np.cumsum([x.shape[axis] for x in xs])[:-1]
        return self.apply(y, xs, lambda g: tuple(np.split(g, splits, axis=axis)))

    def index(self, a: Tensor, key) -> Tensor:
        """Basic slicing ``a[key]`` (no fancy indexing)."""

        def backward(g):
            full = np.zeros_like(a.data)
            full[key] = g
            return (full,)

        return self.apply(a.data[key], (a,), backward)

    def reshape(self, a: Tensor, shape) -> Tensor:
        return self.apply(a.data.reshape(shape), (a,), lambda g: (g.reshape(a.shape),))


def backward(tape: Tape, loss: Tensor, loss_grad=None) -> None:
    """Reverse pass from ``loss``; accumulates into leaf ``.grad`` arrays.

    Intermediate gradients live only for the duration of this pass, so a
    tape can be swept several times from different losses.
    """
    if not tape.nodes:
        raise TapeError("backward called on an empty tape")
    seed = np.ones_like(loss.data) if loss_grad is None else np.broadcast_to(
        np.asarray(loss_grad, dtype=np.float64), loss.shape).copy()
    if loss.is_leaf:
        _accumulate(loss, seed)
        return
    pending = {id(loss): seed}
    for node in reversed(tape.nodes):
        g = pending.pop(id(node.out), None)
        if g is None:
            continue
        for t, gi in zip(node.inputs, node.backward(g)):
            if gi is None or not t.requires_grad:
                continue
            if t.is_leaf:
                _accumulate(t, gi)
            else:
                k = id(t)
                pending[k] = pending[k] + gi if k in pending else gi


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = np.array(g, dtype=np.float64).reshape(t.shape)
    else:
        t.grad += g.reshape(t.shape)


def linear_forward(x: Tensor, W: Tensor, b: Tensor, tape: Tape) -> Tensor:
    return tape.linear(x, W, b)
