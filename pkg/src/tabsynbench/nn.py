"""Multilayer perceptrons and the Adam optimizer on top of the autodiff graph."""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor
from .exceptions import DimensionMismatch, ShapeMismatch

ACTIVATIONS = ("relu", "leaky_relu", "sigmoid", "tanh", "identity")


def _apply_activation(x: Tensor, name: str) -> Tensor:
    if name == "relu":
        return x.relu()
    if name == "leaky_relu":
        return x.leaky_relu(0.2)
    if name == "sigmoid":
        return x.sigmoid()
    if name == "tanh":
        return x.tanh()
    if name == "identity":
        return x
    raise ValueError(f"unknown activation {name!r}")


class Mlp:
    """Fully connected network; each layer is (weight, bias, activation name)."""

    def __init__(self, layers: list[tuple[Tensor, Tensor, str]]):
        for i in range(len(layers) - 1):
            if layers[i][0].shape[1] != layers[i + 1][0].shape[0]:
                raise DimensionMismatch(
                    f"layer {i} out={layers[i][0].shape[1]} != "
                    f"layer {i + 1} in={layers[i + 1][0].shape[0]}"
                )
        self.layers = layers

    @property
    def in_dim(self) -> int:
        return self.layers[0][0].shape[0]

    @property
    def out_dim(self) -> int:
        return self.layers[-1][0].shape[1]

    def parameters(self) -> list[Tensor]:
        params = []
        for w, b, _ in self.layers:
            params.extend([w, b])
        return params

    def forward(self, x: Tensor) -> Tensor:
        if x.shape[1] != self.in_dim:
            raise DimensionMismatch(f"input width {x.shape[1]} != {self.in_dim}")
        for w, b, act in self.layers:
            x = _apply_activation(x @ w + b, act)
        return x

    def forward_numpy(self, x: np.ndarray) -> np.ndarray:
        """Inference-only forward pass without building a graph."""
        for w, b, act in self.layers:
            x = x @ w.data + b.data
            if act == "relu":
                x = np.maximum(x, 0.0)
            elif act == "leaky_relu":
                x = np.where(x > 0, x, 0.2 * x)
            elif act == "sigmoid":
                x = 1.0 / (1.0 + np.exp(-x))
            elif act == "tanh":
                x = np.tanh(x)
        return x

    def snapshot(self) -> list[np.ndarray]:
        return [p.data.copy() for p in self.parameters()]

    def load_snapshot(self, arrays: list[np.ndarray]) -> None:
        params = self.parameters()
        if len(arrays) != len(params):
            raise ShapeMismatch("snapshot length mismatch")
        for p, a in zip(params, arrays):
            if p.data.shape != a.shape:
                raise ShapeMismatch(f"snapshot shape {a.shape} != {p.data.shape}")
            p.data = np.array(a, dtype=float)


def init_mlp(dims: list[int], activations: list[str], seed: int) -> Mlp:
    """Kaiming-uniform weights W ~ U(-sqrt(6/in), +sqrt(6/in)), zero biases."""
    if len(activations) != len(dims) - 1:
        raise DimensionMismatch("need one activation per layer")
    rng = np.random.default_rng(seed)
    layers = []
    for d_in, d_out, act in zip(dims[:-1], dims[1:], activations):
        bound = np.sqrt(6.0 / d_in)
        w = Tensor(rng.uniform(-bound, bound, size=(d_in, d_out)))
        b = Tensor(np.zeros(d_out))
        layers.append((w, b, act))
    return Mlp(layers)


class Adam:
    """Bias-corrected Adam; weight decay added to the gradient before moments."""

    def __init__(self, params: list[Tensor], lr: float = 2e-4,
                 beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8, weight_decay: float = 1e-5):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        self.step_count += 1
        t = self.step_count
        for i, p in enumerate(self.params):
            if p.grad.shape != p.data.shape:
                raise ShapeMismatch("gradient/parameter shape mismatch")
            g = p.grad + self.weight_decay * p.data
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g ** 2
            m_hat = self.m[i] / (1.0 - self.beta1 ** t)
            v_hat = self.v[i] / (1.0 - self.beta2 ** t)
            p.data = p.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
