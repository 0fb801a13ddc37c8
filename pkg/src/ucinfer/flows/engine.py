"""Minimal reverse-mode automatic differentiation over numpy arrays.

Just enough machinery to train the flows in double precision: a Tensor that
records its parents and a backward closure per operation, plus the handful
of ops the conditioner networks and transforms need. Gradients accumulate
into ``.grad`` buffers after calling ``backward()`` on a scalar result.

Reductions rely on numpy's pairwise summation, so gradient evaluation is
deterministic for fixed inputs and shapes.
"""

from __future__ import annotations

import contextlib

import numpy as np

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable graph construction inside the block (inference paths)."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` along the axes numpy broadcast over."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=float)
        self.grad = None
        self.requires_grad = requires_grad and _grad_enabled
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, grad={self.requires_grad})"

    # -- graph management ---------------------------------------------------

    def zero_grad(self):
        self.grad = None

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar tensor")
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if id(node) in seen:
                continue
            if expanded:
                seen.add(id(node))
                order.append(node)
            else:
                stack.append((node, True))
                for parent in node._parents:
                    if id(parent) not in seen:
                        stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- operator sugar -----------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __sub__(self, other):
        return add(self, mul(other, -1.0) if isinstance(other, Tensor) else -np.asarray(other, float))

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            return mul(self, reciprocal(other))
        return mul(self, 1.0 / np.asarray(other, float))

    def __rtruediv__(self, other):
        return mul(reciprocal(self), other)

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self):
        return mul(tsum(self), 1.0 / self.data.size)


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _make(data, parents, backward) -> Tensor:
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _accumulate(tensor: Tensor, grad: np.ndarray) -> None:
    if not tensor.requires_grad:
        return
    grad = _unbroadcast(np.asarray(grad, float), tensor.data.shape)
    if tensor.grad is None:
        tensor.grad = grad.copy()
    else:
        tensor.grad += grad


# ---------------------------------------------------------------------------
# primitive operations

def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    data = a.data + b.data

    def backward(g):
        _accumulate(a, g)
        _accumulate(b, g)

    return _make(data, (a, b), backward)


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    data = a.data * b.data

    def backward(g):
        _accumulate(a, g * b.data)
        _accumulate(b, g * a.data)

    return _make(data, (a, b), backward)


def reciprocal(a):
    a = as_tensor(a)
    data = 1.0 / a.data

    def backward(g):
        _accumulate(a, -g * data * data)

    return _make(data, (a,), backward)


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    data = a.data @ b.data

    def backward(g):
        _accumulate(a, g @ b.data.T)
        _accumulate(b, a.data.T @ g)

    return _make(data, (a, b), backward)


def relu(a):
    a = as_tensor(a)
    mask = a.data > 0
    data = np.where(mask, a.data, 0.0)

    def backward(g):
        _accumulate(a, g * mask)

    return _make(data, (a,), backward)


def exp(a):
    a = as_tensor(a)
    data = np.exp(a.data)

    def backward(g):
        _accumulate(a, g * data)

    return _make(data, (a,), backward)


def log(a):
    a = as_tensor(a)
    data = np.log(a.data)

    def backward(g):
        _accumulate(a, g / a.data)

    return _make(data, (a,), backward)


def square(a):
    a = as_tensor(a)
    data = a.data * a.data

    def backward(g):
        _accumulate(a, 2.0 * g * a.data)

    return _make(data, (a,), backward)


def clip(a, low: float, high: float):
    """Clamp values; gradient passes only through the interior."""
    a = as_tensor(a)
    data = np.clip(a.data, low, high)
    interior = (a.data > low) & (a.data < high)

    def backward(g):
        _accumulate(a, g * interior)

    return _make(data, (a,), backward)


def tsum(a, axis=None, keepdims=False):
    a = as_tensor(a)
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        g = np.asarray(g, float)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        _accumulate(a, np.broadcast_to(g, a.data.shape))

    return _make(data, (a,), backward)


def softplus(a):
    a = as_tensor(a)
    data = np.logaddexp(0.0, a.data)

    def backward(g):
        _accumulate(a, g / (1.0 + np.exp(-a.data)))

    return _make(data, (a,), backward)


def softmax(a, axis: int = -1):
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    data = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        inner = (g * data).sum(axis=axis, keepdims=True)
        _accumulate(a, data * (g - inner))

    return _make(data, (a,), backward)


def cumsum(a, axis: int = -1):
    a = as_tensor(a)
    data = np.cumsum(a.data, axis=axis)

    def backward(g):
        flipped = np.flip(np.asarray(g, float), axis=axis)
        _accumulate(a, np.flip(np.cumsum(flipped, axis=axis), axis=axis))

    return _make(data, (a,), backward)


def take_columns(a, index: np.ndarray):
    """Select columns of a 2-D tensor: out[:, i] = a[:, index[i]]."""
    a = as_tensor(a)
    index = np.asarray(index, dtype=int)
    data = a.data[:, index]

    def backward(g):
        buf = np.zeros_like(a.data)
        np.add.at(buf, (slice(None), index), np.asarray(g, float))
        _accumulate(a, buf)

    return _make(data, (a,), backward)


def gather_last(a, index: np.ndarray):
    """take_along_axis on the last axis; ``index`` has the output shape."""
    a = as_tensor(a)
    index = np.asarray(index, dtype=int)
    data = np.take_along_axis(a.data, index, axis=-1)

    def backward(g):
        buf = np.zeros_like(a.data)
        np.add.at(
            buf,
            tuple(np.indices(index.shape)[:-1]) + (index,),
            np.asarray(g, float),
        )
        _accumulate(a, buf)

    return _make(data, (a,), backward)


def stack_last(tensors):
    """Stack scalars-per-position tensors along a new last axis."""
    tensors = [as_tensor(t) for t in tensors]
    data = np.stack([t.data for t in tensors], axis=-1)

    def backward(g):
        g = np.asarray(g, float)
        for i, t in enumerate(tensors):
            _accumulate(t, g[..., i])

    return _make(data, tuple(tensors), backward)
