"""Minimal reverse-mode autodiff over numpy float64 arrays.

A :class:`Var` records the operation that produced it; calling
:func:`backward` on a scalar walks the tape in reverse topological order.
Broadcasting is supported; gradients are summed back to the operand shape.
Heavy recurrent layers register fused primitives (see layers.py) so the
tape stays short.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Var", "as_var", "backward", "concat", "stack", "softmax"]


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` down to `shape` (inverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Var:
    __slots__ = ("data", "grad", "parents", "vjp")

    def __init__(self, data, parents=(), vjp=None):
        self.data = np.asarray(data, dtype=float)
        self.grad = None
        self.parents = parents
        self.vjp = vjp  # callable(out_grad) -> tuple of parent grads

    @property
    def shape(self):
        return self.data.shape

    def __float__(self):
        return float(self.data)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = as_var(other)
        return Var(
            self.data + other.data,
            (self, other),
            lambda g: (_unbroadcast(g, self.shape), _unbroadcast(g, other.shape)),
        )

    __radd__ = __add__

    def __neg__(self):
        return Var(-self.data, (self,), lambda g: (-g,))

    def __sub__(self, other):
        return self + (-as_var(other))

    def __rsub__(self, other):
        return as_var(other) + (-self)

    def __mul__(self, other):
        other = as_var(other)
        return Var(
            self.data * other.data,
            (self, other),
            lambda g: (
                _unbroadcast(g * other.data, self.shape),
                _unbroadcast(g * self.data, other.shape),
            ),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_var(other)
        return Var(
            self.data / other.data,
            (self, other),
            lambda g: (
                _unbroadcast(g / other.data, self.shape),
                _unbroadcast(-g * self.data / other.data**2, other.shape),
            ),
        )

    def __matmul__(self, other):
        other = as_var(other)
        a, b = self.data, other.data
        return Var(
            a @ b,
            (self, other),
            lambda g: (g @ b.swapaxes(-1, -2), a.swapaxes(-1, -2) @ g),
        )

    def __getitem__(self, idx):
        def vjp(g):
            out = np.zeros_like(self.data)
            np.add.at(out, idx, g)
            return (out,)

        return Var(self.data[idx], (self,), vjp)

    # -- elementwise --------------------------------------------------------

    def exp(self):
        out = np.exp(self.data)
        return Var(out, (self,), lambda g: (g * out,))

    def log(self):
        return Var(np.log(self.data), (self,), lambda g: (g / self.data,))

    def tanh(self):
        out = np.tanh(self.data)
        return Var(out, (self,), lambda g: (g * (1 - out**2),))

    def sigmoid(self):
        out = 1.0 / (1.0 + np.exp(-self.data))
        return Var(out, (self,), lambda g: (g * out * (1 - out),))

    def square(self):
        return Var(self.data**2, (self,), lambda g: (2 * g * self.data,))

    # -- reductions & shape -------------------------------------------------

    def sum(self, axis=None, keepdims=False):
        def vjp(g):
            if axis is None:
                return (np.broadcast_to(g, self.shape).copy(),)
            g_arr = np.asarray(g)
            if not keepdims:
                g_arr = np.expand_dims(g_arr, axis)
            return (np.broadcast_to(g_arr, self.shape).copy(),)

        return Var(self.data.sum(axis=axis, keepdims=keepdims), (self,), vjp)

    def mean(self, axis=None, keepdims=False):
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def reshape(self, *shape):
        return Var(
            self.data.reshape(*shape), (self,), lambda g: (g.reshape(self.shape),)
        )

    def swapaxes(self, a, b):
        return Var(self.data.swapaxes(a, b), (self,), lambda g: (g.swapaxes(a, b),))


def as_var(x) -> Var:
    return x if isinstance(x, Var) else Var(x)


def concat(vars_, axis=0) -> Var:
    vars_ = [as_var(v) for v in vars_]
    sizes = [v.data.shape[axis] for v in vars_]
    splits = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=axis))

    return Var(np.concatenate([v.data for v in vars_], axis=axis), tuple(vars_), vjp)


def stack(vars_, axis=0) -> Var:
    vars_ = [as_var(v) for v in vars_]

    def vjp(g):
        return tuple(np.moveaxis(g, axis, 0))

    return Var(np.stack([v.data for v in vars_], axis=axis), tuple(vars_), vjp)


def softmax(x: Var, axis=-1) -> Var:
    shifted = x - np.max(x.data, axis=axis, keepdims=True)
    e = shifted.exp()
    return e / e.sum(axis=axis, keepdims=True)


def backward(loss: Var) -> None:
    """Accumulate gradients of a scalar `loss` into every tape leaf."""
    if loss.data.size != 1:
        raise ValueError("backward requires a scalar loss")
    if not np.isfinite(loss.data):
        raise FloatingPointError("loss is non-finite; cannot differentiate")

    order = []
    seen = set()
    stack_ = [(loss, False)]
    while stack_:
        node, expanded = stack_.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack_.append((node, True))
        for p in node.parents:
            if id(p) not in seen:
                stack_.append((p, False))

    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node.grad is None or node.vjp is None:
            continue
        grads = node.vjp(node.grad)
        for parent, g in zip(node.parents, grads):
            if g is None:
                continue
            if parent.grad is None:
                parent.grad = np.zeros_like(parent.data)
            parent.grad += g
