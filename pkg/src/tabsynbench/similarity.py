"""Statistical similarity between a real table and a synthetic table.

Per-column distances: KL divergence (histogram/category based), chi-square
goodness of fit, two-sample Kolmogorov-Smirnov, and the diagonal scatter
metric over category frequencies and continuous means. Pairwise structure:
Pearson correlation (continuous pairs) and Cramer's V (categorical pairs).
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import special, stats

from .exceptions import (
    EmptyColumn,
    KindMismatch,
    NotCategorical,
    NotContinuous,
    SchemaMismatch,
)
from .tabular import Table

KL_BINS = 20


def _require_same_schema(real: Table, synth: Table) -> None:
    if real.schema.names != synth.schema.names or any(
            a.kind != b.kind for a, b in
            zip(real.schema.columns, synth.schema.columns)):
        raise SchemaMismatch("tables have different schemas")


def _category_counts(values: list, categories) -> np.ndarray:
    index = {c: i for i, c in enumerate(categories)}
    counts = np.zeros(len(categories))
    for v in values:
        counts[index[v]] += 1
    return counts


def kl_divergence(real_col, synth_col, *, categorical: bool,
                  categories=None, bins: int = KL_BINS) -> float:
    """KL(real || synth) over category or shared-histogram frequencies.

    Add-1 smoothing on both count vectors keeps the value finite when the
    synthetic side misses support.
    """
    if categorical:
        p_counts = _category_counts(real_col, categories)
        q_counts = _category_counts(synth_col, categories)
    else:
        if bins < 2:
            raise ValueError("need bins >= 2")
        real_col = np.asarray(real_col, dtype=float)
        synth_col = np.asarray(synth_col, dtype=float)
        lo = min(real_col.min(), synth_col.min())
        hi = max(real_col.max(), synth_col.max())
        if lo == hi:
            hi = lo + 1.0
        edges = np.linspace(lo, hi, bins + 1)
        p_counts, _ = np.histogram(real_col, bins=edges)
        q_counts, _ = np.histogram(synth_col, bins=edges)
    p = (p_counts + 1.0) / (p_counts + 1.0).sum()
    q = (q_counts + 1.0) / (q_counts + 1.0).sum()
    return float(np.sum(p * np.log(p / q)))


def kl_divergence_columns(real: Table, synth: Table, index: int,
                          bins: int = KL_BINS) -> float:
    spec_r = real.schema.columns[index]
    spec_s = synth.schema.columns[index]
    if spec_r.kind != spec_s.kind:
        raise KindMismatch(f"column {index}: kinds differ")
    if spec_r.is_categorical:
        return kl_divergence(real.column(index), synth.column(index),
                             categorical=True, categories=spec_r.categories)
    return kl_divergence(real.continuous_column(index),
                         synth.continuous_column(index),
                         categorical=False, bins=bins)


def chi_square(real_col, synth_col, categories) -> tuple[float, float]:
    """Goodness of fit of synthetic category counts against real frequencies."""
    observed = _category_counts(synth_col, categories)
    real_counts = _category_counts(real_col, categories)
    expected = real_counts / real_counts.sum() * observed.sum()
    mask = expected > 0
    k = int(mask.sum())
    if k <= 1:
        return 0.0, 1.0
    stat = float(np.sum((observed[mask] - expected[mask]) ** 2 / expected[mask]))
    return stat, float(stats.chi2.sf(stat, k - 1))


def chi_square_columns(real: Table, synth: Table, index: int) -> tuple[float, float]:
    spec = real.schema.columns[index]
    if not spec.is_categorical or not synth.schema.columns[index].is_categorical:
        raise NotCategorical(f"column {index} is not categorical in both tables")
    return chi_square(real.column(index), synth.column(index), spec.categories)


def ks_statistic(real_col, synth_col) -> tuple[float, float]:
    """Exact two-sample KS statistic; asymptotic Kolmogorov p-value."""
    x = np.sort(np.asarray(real_col, dtype=float))
    y = np.sort(np.asarray(synth_col, dtype=float))
    n, m = len(x), len(y)
    if n == 0 or m == 0:
        raise EmptyColumn("KS needs non-empty columns")
    grid = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, grid, side="right") / n
    cdf_y = np.searchsorted(y, grid, side="right") / m
    d = float(np.max(np.abs(cdf_x - cdf_y)))
    effective = n * m / (n + m)
    p = float(special.kolmogorov(math.sqrt(effective) * d))
    return d, min(max(p, 0.0), 1.0)


def ks_columns(real: Table, synth: Table, index: int) -> tuple[float, float]:
    if real.schema.columns[index].is_categorical:
        raise NotContinuous(f"column {index} is categorical")
    return ks_statistic(real.continuous_column(index),
                        synth.continuous_column(index))


def _scatter_points(real: Table, synth: Table) -> list[tuple[float, float]]:
    """(real, synth) summary points: category frequencies and scaled means."""
    points = []
    for i, spec in enumerate(real.schema.columns):
        if spec.is_categorical:
            p = _category_counts(real.column(i), spec.categories)
            q = _category_counts(synth.column(i), spec.categories)
            p = p / p.sum()
            q = q / q.sum()
            points.extend(zip(p.tolist(), q.tolist()))
        else:
            span = spec.observed_max - spec.observed_min
            if span == 0:
                points.append((0.0, 0.0))
                continue
            rx = (real.continuous_column(i).mean() - spec.observed_min) / span
            sx = (synth.continuous_column(i).mean() - spec.observed_min) / span
            points.append((float(rx), float(sx)))
    return points


def dwp(real: Table, synth: Table, distance: str = "perpendicular") -> float:
    """Mean distance of summary scatter points from the diagonal y = x."""
    _require_same_schema(real, synth)
    points = _scatter_points(real, synth)
    gaps = [abs(x - y) for x, y in points]
    if distance == "perpendicular":
        gaps = [g / math.sqrt(2.0) for g in gaps]
    elif distance != "vertical":
        raise ValueError(f"unknown distance {distance!r}")
    return float(np.mean(gaps))


def pearson_corr_matrix(t: Table) -> tuple[np.ndarray, list[str]]:
    """Correlation over continuous columns; constant columns correlate as 0."""
    idx = [i for i, c in enumerate(t.schema.columns) if not c.is_categorical]
    names = [t.schema.columns[i].name for i in idx]
    k = len(idx)
    corr = np.eye(k)
    cols = [t.continuous_column(i) for i in idx]
    stds = [c.std() for c in cols]
    degenerate = [s == 0 for s in stds]
    if any(degenerate):
        warnings.warn("constant continuous column; correlations set to 0")
    for a in range(k):
        for b in range(a + 1, k):
            if degenerate[a] or degenerate[b]:
                r = 0.0
            else:
                r = float(np.corrcoef(cols[a], cols[b])[0, 1])
            corr[a, b] = corr[b, a] = r
    return corr, names


def cramers_v(col_a: list, col_b: list, cats_a, cats_b) -> float:
    table = np.zeros((len(cats_a), len(cats_b)))
    ia = {c: i for i, c in enumerate(cats_a)}
    ib = {c: i for i, c in enumerate(cats_b)}
    for a, b in zip(col_a, col_b):
        table[ia[a], ib[b]] += 1
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    r, c = table.shape
    if min(r, c) <= 1:
        return 0.0
    n = table.sum()
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / n
    chi2 = float(np.sum((table - expected) ** 2 / expected))
    return float(math.sqrt(chi2 / (n * (min(r, c) - 1))))


def cramers_v_matrix(t: Table) -> tuple[np.ndarray, list[str]]:
    idx = [i for i, c in enumerate(t.schema.columns) if c.is_categorical]
    names = [t.schema.columns[i].name for i in idx]
    k = len(idx)
    v = np.eye(k)
    for a in range(k):
        for b in range(a + 1, k):
            value = cramers_v(t.column(idx[a]), t.column(idx[b]),
                              t.schema.columns[idx[a]].categories,
                              t.schema.columns[idx[b]].categories)
            v[a, b] = v[b, a] = value
    return v, names


def correlation_diff_score(real: Table, synth: Table) -> float:
    """Mean |real - synth| over off-diagonal Pearson and Cramer's V entries."""
    _require_same_schema(real, synth)
    diffs = []
    n_cont = sum(1 for c in real.schema.columns if not c.is_categorical)
    if n_cont >= 2:
        pr, _ = pearson_corr_matrix(real)
        ps, _ = pearson_corr_matrix(synth)
        mask = ~np.eye(pr.shape[0], dtype=bool)
        diffs.extend(np.abs(pr - ps)[mask].tolist())
    n_cat = sum(1 for c in real.schema.columns if c.is_categorical)
    if n_cat >= 2:
        vr, _ = cramers_v_matrix(real)
        vs, _ = cramers_v_matrix(synth)
        mask = ~np.eye(vr.shape[0], dtype=bool)
        diffs.extend(np.abs(vr - vs)[mask].tolist())
    if not diffs:
        return 0.0
    return float(np.mean(diffs))


def similarity_suite(real: Table, synth: Table) -> dict[str, float]:
    """Long-format metric map: per-column distances plus the pairwise score."""
    _require_same_schema(real, synth)
    out: dict[str, float] = {}
    for i, spec in enumerate(real.schema.columns):
        out[f"kl:{spec.name}"] = kl_divergence_columns(real, synth, i)
        if spec.is_categorical:
            stat, _ = chi_square_columns(real, synth, i)
            out[f"chi_square_stat:{spec.name}"] = stat
        else:
            stat, _ = ks_columns(real, synth, i)
            out[f"ks_stat:{spec.name}"] = stat
    out["dwp"] = dwp(real, synth)
    out["correlation_diff"] = correlation_diff_score(real, synth)
    return out
