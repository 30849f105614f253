"""Minimal reverse-mode automatic differentiation over numpy arrays.

Nodes carry monotonically increasing ids, so the construction order is a
topological order of the graph and backward() can sweep ids in reverse.
All arithmetic is float64.
"""

from __future__ import annotations

import itertools

import numpy as np

from .exceptions import NonScalarRoot

_ids = itertools.count()


class Tensor:
    __slots__ = ("data", "grad", "_backward", "_prev", "id", "requires_grad")

    def __init__(self, data, prev=(), requires_grad=True):
        self.data = np.asarray(data, dtype=float)
        self.grad = np.zeros_like(self.data)
        self._backward = None
        self._prev = tuple(prev)
        self.id = next(_ids)
        self.requires_grad = requires_grad

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, id={self.id})"

    @property
    def shape(self):
        return self.data.shape

    # ---- graph construction helpers -------------------------------------

    @staticmethod
    def _wrap(other) -> "Tensor":
        return other if isinstance(other, Tensor) else Tensor(other, requires_grad=False)

    @staticmethod
    def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
        """Sum a broadcast gradient back down to the operand's shape."""
        while grad.ndim > len(shape):
            grad = grad.sum(axis=0)
        for axis, size in enumerate(shape):
            if size == 1 and grad.shape[axis] != 1:
                grad = grad.sum(axis=axis, keepdims=True)
        return grad.reshape(shape)

    # ---- arithmetic ------------------------------------------------------

    def __add__(self, other):
        other = self._wrap(other)
        out = Tensor(self.data + other.data, (self, other))

        def _backward():
            self.grad += self._unbroadcast(out.grad, self.data.shape)
            other.grad += self._unbroadcast(out.grad, other.data.shape)
        out._backward = _backward
        return out

    __radd__ = __add__

    def __mul__(self, other):
        other = self._wrap(other)
        out = Tensor(self.data * other.data, (self, other))

        def _backward():
            self.grad += self._unbroadcast(out.grad * other.data, self.data.shape)
            other.grad += self._unbroadcast(out.grad * self.data, other.data.shape)
        out._backward = _backward
        return out

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return self._wrap(other) + (-self)

    def __truediv__(self, other):
        other = self._wrap(other)
        out = Tensor(self.data / other.data, (self, other))

        def _backward():
            self.grad += self._unbroadcast(out.grad / other.data, self.data.shape)
            other.grad += self._unbroadcast(
                -out.grad * self.data / other.data ** 2, other.data.shape)
        out._backward = _backward
        return out

    def __rtruediv__(self, other):
        return self._wrap(other) / self

    def __pow__(self, exponent: float):
        out = Tensor(self.data ** exponent, (self,))

        def _backward():
            self.grad += out.grad * exponent * self.data ** (exponent - 1)
        out._backward = _backward
        return out

    def __matmul__(self, other):
        other = self._wrap(other)
        out = Tensor(self.data @ other.data, (self, other))

        def _backward():
            self.grad += out.grad @ other.data.T
            other.grad += self.data.T @ out.grad
        out._backward = _backward
        return out

    # ---- elementwise functions ------------------------------------------

    def exp(self):
        out = Tensor(np.exp(self.data), (self,))

        def _backward():
            self.grad += out.grad * out.data
        out._backward = _backward
        return out

    def log(self):
        out = Tensor(np.log(self.data), (self,))

        def _backward():
            self.grad += out.grad / self.data
        out._backward = _backward
        return out

    def sqrt(self):
        out = Tensor(np.sqrt(self.data), (self,))

        def _backward():
            self.grad += out.grad * 0.5 / out.data
        out._backward = _backward
        return out

    def abs(self):
        out = Tensor(np.abs(self.data), (self,))

        def _backward():
            self.grad += out.grad * np.sign(self.data)
        out._backward = _backward
        return out

    def clamp(self, lo: float, hi: float):
        out = Tensor(np.clip(self.data, lo, hi), (self,))

        def _backward():
            inside = (self.data >= lo) & (self.data <= hi)
            self.grad += out.grad * inside
        out._backward = _backward
        return out

    def relu(self):
        out = Tensor(np.maximum(self.data, 0.0), (self,))

        def _backward():
            self.grad += out.grad * (self.data > 0)
        out._backward = _backward
        return out

    def leaky_relu(self, slope: float = 0.2):
        out = Tensor(np.where(self.data > 0, self.data, slope * self.data), (self,))

        def _backward():
            self.grad += out.grad * np.where(self.data > 0, 1.0, slope)
        out._backward = _backward
        return out

    def sigmoid(self):
        out = Tensor(1.0 / (1.0 + np.exp(-self.data)), (self,))

        def _backward():
            self.grad += out.grad * out.data * (1.0 - out.data)
        out._backward = _backward
        return out

    def tanh(self):
        out = Tensor(np.tanh(self.data), (self,))

        def _backward():
            self.grad += out.grad * (1.0 - out.data ** 2)
        out._backward = _backward
        return out

    # ---- reductions and shaping -----------------------------------------

    def sum(self, axis=None, keepdims=False):
        out = Tensor(self.data.sum(axis=axis, keepdims=keepdims), (self,))

        def _backward():
            grad = out.grad
            if axis is not None and not keepdims:
                grad = np.expand_dims(grad, axis)
            self.grad += np.broadcast_to(grad, self.data.shape)
        out._backward = _backward
        return out

    def mean(self, axis=None, keepdims=False):
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def cols(self, start: int, stop: int):
        """Column slice of a 2-D tensor."""
        out = Tensor(self.data[:, start:stop], (self,))

        def _backward():
            self.grad[:, start:stop] += out.grad
        out._backward = _backward
        return out

    @staticmethod
    def hcat(parts: list["Tensor"]) -> "Tensor":
        out = Tensor(np.concatenate([p.data for p in parts], axis=1), tuple(parts))
        widths = [p.data.shape[1] for p in parts]

        def _backward():
            offset = 0
            for p, w in zip(parts, widths):
                p.grad += out.grad[:, offset:offset + w]
                offset += w
        out._backward = _backward
        return out

    def softmax_rows(self):
        """Row-wise softmax of a 2-D tensor (shift by a detached row max)."""
        shifted = self - self.data.max(axis=1, keepdims=True)
        e = shifted.exp()
        return e / e.sum(axis=1, keepdims=True)

    # ---- backward --------------------------------------------------------

    def backward(self):
        if self.data.size != 1:
            raise NonScalarRoot(f"backward root has shape {self.data.shape}")
        order = []
        seen = set()
        stack = [self]
        while stack:
            node = stack.pop()
            if node.id in seen:
                continue
            seen.add(node.id)
            order.append(node)
            stack.extend(node._prev)
        order.sort(key=lambda n: n.id, reverse=True)
        self.grad = np.ones_like(self.data)
        for node in order:
            if node._backward is not None:
                node._backward()

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)


def constant(data) -> Tensor:
    """Leaf treated as data, not a parameter (no gradient consumers)."""
    return Tensor(data, requires_grad=False)
