import numpy as np
import pytest

from tabsynbench.autodiff import Tensor


def finite_difference_grad(fn, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function of an array."""
    grad = np.zeros_like(x, dtype=float)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        plus = x.copy()
        minus = x.copy()
        plus[idx] += h
        minus[idx] -= h
        grad[idx] = (fn(plus) - fn(minus)) / (2 * h)
        it.iternext()
    return grad


def analytic_grad(fn, x: np.ndarray) -> np.ndarray:
    t = Tensor(x.copy())
    out = fn(t)
    out.backward()
    return t.grad


def assert_grad_close(fn_tensor, fn_value, x: np.ndarray,
                      rel: float = 1e-4, tiny_abs: float = 1e-6):
    """Check reverse-mode against central differences elementwise.

    Elements with |analytic| < 1e-8 are compared absolutely.
    """
    analytic = analytic_grad(fn_tensor, x)
    numeric = finite_difference_grad(fn_value, x)
    for a, n in zip(analytic.ravel(), numeric.ravel()):
        if abs(a) < 1e-8:
            assert abs(a - n) < tiny_abs, (a, n)
        else:
            assert abs(a - n) / max(abs(a), abs(n)) < rel, (a, n)
