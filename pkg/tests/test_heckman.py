from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats
from scipy.stats import wasserstein_distance

from interlaced.errors import DomainError
from interlaced.gc_cones import interlaces
from interlaced.heckman import (
    branching_measure_A, convergence_report, coordinate_w1, interlacing_weights, is_monotone,
    projected_radial_law_A, w1_to_uniform, weyl_dim_unitary,
)


def count_gt_patterns(lam):
    """Brute-force count of integral Gelfand-Tsetlin patterns with top row ``lam``."""
    if len(lam) == 1:
        return 1
    return sum(count_gt_patterns(list(b)) for b in interlacing_weights(lam))


class TestWeylDimension:
    def test_examples(self):
        assert weyl_dim_unitary([7]) == 1
        assert weyl_dim_unitary([-3], 1) == 1
        assert weyl_dim_unitary([2, 1, 0]) == 8
        for n in range(8):
            assert weyl_dim_unitary([n, 0]) == n + 1

    def test_against_pattern_count(self):
        for lam in ([2, 1, 0], [3, 3, 1], [4, 2, 1, 0], [2, 2, 0, -1]):
            assert weyl_dim_unitary(lam) == count_gt_patterns(lam)

    def test_bad_weights(self):
        with pytest.raises(DomainError):
            weyl_dim_unitary([0, 1])
        with pytest.raises(DomainError):
            weyl_dim_unitary([1.5, 0])
        with pytest.raises(DomainError):
            weyl_dim_unitary([1, 0], 3)


class TestBranching:
    def test_u2(self):
        for n in (1, 4, 9):
            mu = branching_measure_A([n, 0], 1 / n)
            assert np.allclose(np.sort(mu.locations[:, 0]), np.arange(n + 1) / n)
            assert np.allclose(mu.weights, 1 / (n + 1))

    def test_zero_weight(self):
        mu = branching_measure_A([0, 0, 0], 0.5)
        assert len(mu) == 1 and np.all(mu.locations == 0) and mu.weights[0] == 1

    def test_u3_exact_sum(self):
        mu = branching_measure_A([2, 1, 0], 1.0)
        assert sum(mu.exact_weights) == Fraction(1)
        assert len(mu) == 4

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(-4, 6), min_size=2, max_size=4))
    def test_exact_sums_and_interlacing(self, raw):
        lam = sorted(raw, reverse=True)
        eps = 0.25
        mu = branching_measure_A(lam, eps)
        assert sum(mu.exact_weights) == 1
        assert np.all(mu.weights >= 0)
        for loc in mu.locations:
            assert interlaces(eps * np.array(lam, dtype=float), loc, tol=1e-12)


class TestProjectedLaw:
    def test_scalar(self, rng):
        s = projected_radial_law_A([2.0, 2.0, 2.0], 100, rng)
        assert np.allclose(s, 2.0, atol=1e-12)

    def test_u2_uniform(self, rng):
        s = projected_radial_law_A([1.0, 0.0], 100000, rng)
        assert stats.kstest(s[:, 0], "uniform").pvalue > 0.01

    def test_u3_interlacing(self, rng):
        x = np.array([1.0, 0.0, -1.0])
        s = projected_radial_law_A(x, 20000, rng)
        assert all(interlaces(x, row, tol=1e-10) for row in s)

    def test_decreasing_required(self, rng):
        with pytest.raises(DomainError):
            projected_radial_law_A([0.0, 1.0], 10, rng)


class TestConvergence:
    def test_grid_vs_uniform_exact(self):
        for n in (1, 2, 5, 10, 50):
            mu = branching_measure_A([n, 0], 1 / n)
            d = w1_to_uniform(mu.locations[:, 0], mu.weights)
            assert d <= 1 / n
            # independent check against a fine midpoint quantile grid of Uniform[0, 1]
            grid = (np.arange(200000) + 0.5) / 200000
            ref = wasserstein_distance(mu.locations[:, 0], grid, u_weights=mu.weights)
            assert d == pytest.approx(ref, abs=1e-5)

    def test_w1_to_uniform_point_mass(self):
        assert w1_to_uniform([0.5], [1.0]) == pytest.approx(0.25)
        assert w1_to_uniform([0.0], [1.0]) == pytest.approx(0.5)

    def test_constant_zero_sequence(self, rng):
        rows = convergence_report([[0, 0, 0]] * 3, [1.0, 0.5, 0.25], [0.0, 0.0, 0.0], 1000, rng)
        assert all(r["w1"] == 0 for r in rows)

    def test_coordinate_w1_of_own_atoms(self):
        # a sample reproducing the atoms in proportion to their weights is at distance 0
        mu = branching_measure_A([2, 0], 1.0)
        assert coordinate_w1(mu, mu.locations) == pytest.approx(0.0, abs=1e-15)

    def test_u3_sequence_decreases(self, rng):
        ns = [5, 10, 20, 40]
        lams = [[2 * n, n, 0] for n in ns]
        rows = convergence_report(lams, [1 / n for n in ns], [2.0, 1.0, 0.0], 100000, rng)
        assert is_monotone(rows, 3.0)
        assert rows[-1]["w1"] < rows[0]["w1"]

    def test_mismatched_lengths(self, rng):
        with pytest.raises(DomainError):
            convergence_report([[1, 0]], [1.0, 0.5], [1.0, 0.0], 10, rng)
