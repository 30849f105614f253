"""Small synthetic tables with known structure, for tests and demo runs."""

from __future__ import annotations

import numpy as np

from .tabular import (
    CLASSIFICATION,
    REGRESSION,
    ColumnSpec,
    Table,
    TableSchema,
)


def make_correlated_table(n: int = 1000, seed: int = 0) -> Table:
    """Three correlated continuous columns plus an imbalanced binary label.

    x2 and x3 are noisy linear functions of x1, and the label is biased
    toward 'yes' for large x1 with a roughly 80/20 marginal.
    """
    rng = np.random.default_rng(seed)
    x1 = rng.uniform(0.0, 1.0, size=n)
    x2 = 0.8 * x1 + 0.2 * rng.uniform(0.0, 1.0, size=n)
    x3 = 1.0 - 0.7 * x1 + 0.15 * rng.normal(0.0, 1.0, size=n)
    labels = np.where(rng.uniform(size=n) < 0.15 + 0.25 * x1, "yes", "no")

    cols = (
        ColumnSpec("x1", "continuous", observed_min=float(x1.min()),
                   observed_max=float(x1.max())),
        ColumnSpec("x2", "continuous", observed_min=float(x2.min()),
                   observed_max=float(x2.max())),
        ColumnSpec("x3", "continuous", observed_min=float(x3.min()),
                   observed_max=float(x3.max())),
        ColumnSpec("label", "categorical", ("no", "yes")),
    )
    schema = TableSchema(cols, target_index=3, task=CLASSIFICATION)
    rows = tuple(
        (float(a), float(b), float(c), str(l))
        for a, b, c, l in zip(x1, x2, x3, labels)
    )
    return Table(schema, rows)


def make_blobs_table(n: int = 200, seed: int = 0) -> Table:
    """Two well-separated Gaussian blobs; linearly separable classification."""
    rng = np.random.default_rng(seed)
    half = n // 2
    a = rng.normal(0.0, 0.5, size=(half, 2))
    b = rng.normal(4.0, 0.5, size=(n - half, 2))
    points = np.vstack([a, b])
    labels = ["a"] * half + ["b"] * (n - half)
    order = rng.permutation(n)
    points = points[order]
    labels = [labels[i] for i in order]
    cols = (
        ColumnSpec("f1", "continuous", observed_min=float(points[:, 0].min()),
                   observed_max=float(points[:, 0].max())),
        ColumnSpec("f2", "continuous", observed_min=float(points[:, 1].min()),
                   observed_max=float(points[:, 1].max())),
        ColumnSpec("label", "categorical", ("a", "b")),
    )
    schema = TableSchema(cols, target_index=2, task=CLASSIFICATION)
    rows = tuple((float(p[0]), float(p[1]), l) for p, l in zip(points, labels))
    return Table(schema, rows)


def make_linear_regression_table(n: int = 200, seed: int = 0,
                                 noise: float = 0.0) -> Table:
    """y = 2x + 1 (+ optional noise)."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=n)
    y = 2.0 * x + 1.0 + noise * rng.normal(size=n)
    cols = (
        ColumnSpec("x", "continuous", observed_min=float(x.min()),
                   observed_max=float(x.max())),
        ColumnSpec("y", "continuous", observed_min=float(y.min()),
                   observed_max=float(y.max())),
    )
    schema = TableSchema(cols, target_index=1, task=REGRESSION)
    rows = tuple((float(a), float(b)) for a, b in zip(x, y))
    return Table(schema, rows)
