import math

import numpy as np
import pytest

from tabsynbench import exceptions as exc
from tabsynbench.similarity import (
    chi_square,
    correlation_diff_score,
    cramers_v,
    cramers_v_matrix,
    dwp,
    kl_divergence,
    ks_statistic,
    pearson_corr_matrix,
    similarity_suite,
)
from tabsynbench.tabular import ColumnSpec, Table, TableSchema
from tabsynbench.toy import make_correlated_table


def cat_table(*columns):
    specs = tuple(
        ColumnSpec(f"c{i}", "categorical", tuple(sorted(set(col))))
        for i, col in enumerate(columns))
    return Table(TableSchema(specs), tuple(zip(*columns)))


def cont_table(*columns):
    specs = tuple(
        ColumnSpec(f"v{i}", "continuous",
                   observed_min=float(min(col)), observed_max=float(max(col)))
        for i, col in enumerate(columns))
    return Table(TableSchema(specs),
                 tuple(tuple(float(x) for x in row) for row in zip(*columns)))


class TestKl:
    def test_identical_distributions(self):
        col = ["a"] * 50 + ["b"] * 50
        assert kl_divergence(col, list(col), categorical=True,
                             categories=("a", "b")) == pytest.approx(0.0)

    def test_hand_value_two_categories(self):
        # counts large enough that add-1 smoothing barely moves frequencies
        n = 1_000_000
        real = ["a"] * (n // 2) + ["b"] * (n // 2)
        synth = ["a"] * int(n * 0.9) + ["b"] * int(n * 0.1)
        value = kl_divergence(real, synth, categorical=True,
                              categories=("a", "b"))
        expected = 0.5 * math.log(0.5 / 0.9) + 0.5 * math.log(0.5 / 0.1)
        assert value == pytest.approx(expected, abs=1e-4)
        assert expected == pytest.approx(0.5108, abs=1e-4)

    def test_zero_count_category_finite(self):
        value = kl_divergence(["a"] * 5 + ["b"] * 5, ["a"] * 10,
                              categorical=True, categories=("a", "b"))
        assert np.isfinite(value)

    def test_non_negative(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            a = rng.normal(size=30)
            b = rng.normal(loc=rng.normal(), size=40)
            assert kl_divergence(a, b, categorical=False) >= 0.0


class TestChiSquare:
    def test_proportional_counts(self):
        real = ["a"] * 60 + ["b"] * 40
        synth = ["a"] * 30 + ["b"] * 20
        stat, p = chi_square(real, synth, ("a", "b"))
        assert stat == pytest.approx(0.0)
        assert p == pytest.approx(1.0)

    def test_hand_value(self):
        # O = (90, 10) against E = (50, 50)
        real = ["a"] * 50 + ["b"] * 50
        synth = ["a"] * 90 + ["b"] * 10
        stat, p = chi_square(real, synth, ("a", "b"))
        assert stat == pytest.approx(64.0)
        assert 0.0 <= p < 1e-10

    def test_single_category(self):
        stat, p = chi_square(["a"] * 5, ["a"] * 7, ("a",))
        assert (stat, p) == (0.0, 1.0)


class TestKs:
    def test_identical(self):
        d, _ = ks_statistic([1, 2, 3, 4], [1, 2, 3, 4])
        assert d == 0.0

    def test_disjoint_supports(self):
        d, p = ks_statistic([1, 2, 3, 4], [5, 6, 7, 8])
        assert d == 1.0
        assert p < 0.2

    def test_half_overlap(self):
        d, _ = ks_statistic([1, 2, 3, 4], [3, 4, 5, 6])
        assert d == pytest.approx(0.5)

    def test_empty_column(self):
        with pytest.raises(exc.EmptyColumn):
            ks_statistic([], [1.0])

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            n = int(rng.integers(1, 51))
            m = int(rng.integers(1, 51))
            x = np.round(rng.normal(size=n), 1)  # rounding forces ties
            y = np.round(rng.normal(size=m), 1)
            d, _ = ks_statistic(x, y)
            gaps = [abs((x <= v).mean() - (y <= v).mean())
                    for v in np.concatenate([x, y])]
            assert d == pytest.approx(max(gaps), abs=1e-12)


class TestDwp:
    def test_self_is_zero(self):
        t = make_correlated_table(100, 0)
        assert dwp(t, t) == 0.0

    def test_single_point_distance(self):
        real = cat_table(["a"] * 3 + ["b"] * 7)
        synth = cat_table(["a"] * 7 + ["b"] * 3)
        # points (0.3, 0.7) and (0.7, 0.3), each 0.4/sqrt(2) off the diagonal
        assert dwp(real, synth) == pytest.approx(0.4 / math.sqrt(2))

    def test_vertical_variant(self):
        real = cat_table(["a"] * 3 + ["b"] * 7)
        synth = cat_table(["a"] * 7 + ["b"] * 3)
        assert dwp(real, synth, distance="vertical") == pytest.approx(0.4)

    def test_symmetry(self):
        a = make_correlated_table(80, 1)
        b = make_correlated_table(80, 2)
        b = Table(a.schema, b.rows)  # identical schema for both directions
        assert dwp(a, b) == pytest.approx(dwp(b, a))

    def test_schema_mismatch(self):
        t = make_correlated_table(10, 0)
        other = cat_table(["a", "b"])
        with pytest.raises(exc.SchemaMismatch):
            dwp(t, other)


class TestPearson:
    def test_self_correlation_one(self):
        t = cont_table([1, 2, 3], [1, 2, 3])
        corr, names = pearson_corr_matrix(t)
        assert names == ["v0", "v1"]
        assert corr[0, 1] == pytest.approx(1.0)

    def test_anticorrelation(self):
        t = cont_table([1, 2, 3], [-1, -2, -3])
        corr, _ = pearson_corr_matrix(t)
        assert corr[0, 1] == pytest.approx(-1.0)

    def test_hand_value(self):
        t = cont_table([1, 2, 3], [2, 4, 7])
        corr, _ = pearson_corr_matrix(t)
        assert corr[0, 1] == pytest.approx(0.9934, abs=1e-4)

    def test_constant_column_flagged_zero(self):
        t = cont_table([1, 2, 3], [5, 5, 5])
        with pytest.warns(UserWarning):
            corr, _ = pearson_corr_matrix(t)
        assert corr[0, 1] == 0.0
        assert corr[0, 0] == 1.0


class TestCramersV:
    def test_exact_copy(self):
        col = ["x"] * 10 + ["y"] * 10
        t = cat_table(col, list(col))
        v, _ = cramers_v_matrix(t)
        assert v[0, 1] == pytest.approx(1.0)

    def test_perfect_2x2(self):
        a = ["x"] * 10 + ["y"] * 10
        b = ["p"] * 10 + ["q"] * 10
        assert cramers_v(a, b, ("x", "y"), ("p", "q")) == pytest.approx(1.0)

    def test_independent_columns_near_zero(self):
        rng = np.random.default_rng(2)
        a = rng.choice(["x", "y"], size=10_000).tolist()
        b = rng.choice(["p", "q", "r"], size=10_000).tolist()
        assert cramers_v(a, b, ("x", "y"), ("p", "q", "r")) <= 0.1

    def test_single_effective_category(self):
        assert cramers_v(["x"] * 5, ["p", "q", "p", "q", "p"],
                         ("x", "y"), ("p", "q")) == 0.0

    def test_range_and_symmetry(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a = rng.choice(["x", "y", "z"], size=60).tolist()
            b = rng.choice(["p", "q"], size=60).tolist()
            v1 = cramers_v(a, b, ("x", "y", "z"), ("p", "q"))
            v2 = cramers_v(b, a, ("p", "q"), ("x", "y", "z"))
            assert 0.0 <= v1 <= 1.0 + 1e-12
            assert v1 == pytest.approx(v2)


class TestCorrelationDiff:
    def test_self_is_zero(self):
        t = make_correlated_table(100, 0)
        assert correlation_diff_score(t, t) == 0.0

    def test_single_pair(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=200)
        real = cont_table(x, 0.9 * x + 0.1 * rng.normal(size=200))
        synth_cols = (rng.normal(size=200), rng.normal(size=200))
        synth = Table(real.schema, tuple(
            (float(a), float(b)) for a, b in zip(*synth_cols)))
        r_real = np.corrcoef(*[real.continuous_column(i) for i in (0, 1)])[0, 1]
        r_synth = np.corrcoef(*[synth.continuous_column(i) for i in (0, 1)])[0, 1]
        assert correlation_diff_score(real, synth) == pytest.approx(
            abs(r_real - r_synth))

    def test_range(self):
        rng = np.random.default_rng(5)
        for seed in range(10):
            a = make_correlated_table(60, seed)
            b = Table(a.schema, make_correlated_table(60, seed + 100).rows)
            assert 0.0 <= correlation_diff_score(a, b) <= 2.0


class TestSuite:
    def test_self_similarity_ideal_values(self):
        t = make_correlated_table(150, 0)
        suite = similarity_suite(t, t)
        for key, value in suite.items():
            assert value == pytest.approx(0.0, abs=1e-12), key

    def test_sample_size_monotone_sanity(self):
        wins = 0
        for seed in range(5):
            rng_small = make_correlated_table(100, 1000 + seed)
            small = Table(rng_small.schema,
                          make_correlated_table(100, 2000 + seed).rows)
            big_a = make_correlated_table(10_000, 1000 + seed)
            big_b = Table(big_a.schema,
                          make_correlated_table(10_000, 2000 + seed).rows)
            if dwp(big_a, big_b) <= dwp(rng_small, small):
                wins += 1
        assert wins >= 4
