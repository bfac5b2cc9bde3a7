from math import factorial

import numpy as np
import pytest

from interlaced.classes import MatrixClass
from interlaced.errors import ConfigError, DomainError, SingularityError
from interlaced.eynard_mehta import (
    ChainSpec, convolve, em_kernel, em_one_point, em_trace, gram_matrix, indicator, indicator_chain,
    phi_chain, transported_psi,
)
from interlaced.kernels import gaussian_psi, gaussian_spec, kernel_biorthogonal, transition_term
from interlaced.numerics import integrate

PTS = [0.1, 0.7, 1.3, 1.9, 2.5]


@pytest.fixture(scope="module")
def chain_b2():
    return indicator_chain(2, gaussian_psi(MatrixClass("B", 2)))


@pytest.fixture(scope="module")
def chain_b1():
    return indicator_chain(1, gaussian_psi(MatrixClass("B", 1)))


class TestConvolve:
    def test_indicators(self):
        h = convolve(indicator, indicator, upper=10.0)
        assert h(0.5, 2.0) == pytest.approx(1.5, abs=1e-8)
        assert h(2.0, 0.5) == pytest.approx(0.0, abs=1e-8)

    def test_exponential(self):
        e = lambda x, y: np.exp(-x - y)  # noqa: E731
        h = convolve(e, e)
        for x, y in [(0.0, 0.0), (0.3, 1.2), (2.0, 0.5)]:
            assert h(x, y) == pytest.approx(np.exp(-x - y) / 2, abs=1e-8)

    def test_zero(self):
        assert convolve(indicator, lambda x, y: 0.0 * x)(0.2, 1.0) == 0.0


class TestChain:
    def test_r_ge_s(self, chain_b2):
        assert phi_chain(chain_b2, 2, 2, 0.1, 0.5) == 0
        assert phi_chain(chain_b2, 3, 1, 0.1, 0.5) == 0

    def test_single_step(self, chain_b2):
        assert phi_chain(chain_b2, 1, 2, 0.1, 0.5) == 1.0
        assert phi_chain(chain_b2, 1, 2, 0.5, 0.1) == 0.0

    @pytest.mark.parametrize("r,s", [(1, 3), (1, 4), (2, 4)])
    def test_indicator_chain_closed_form(self, chain_b2, r, s):
        for x, y in [(0.2, 1.5), (0.5, 0.9), (1.0, 0.4)]:
            m = s - r - 1
            ref = (y - x) ** m / factorial(m) if y >= x else 0.0
            assert phi_chain(chain_b2, r, s, x, y) == pytest.approx(ref, abs=1e-7)

    def test_matches_transition_term(self, chain_b2):
        B2 = MatrixClass("B", 2)
        for r in range(1, 5):
            for s in range(r + 1, 5):
                for x in PTS:
                    for y in PTS:
                        a = -phi_chain(chain_b2, r, s, x, y)
                        b = transition_term(B2, 2, r, s, x, y)
                        assert abs(a - b) <= 1e-7

    def test_transported(self, chain_b2):
        psi = chain_b2.psi
        x = np.array(PTS)
        assert np.array_equal(transported_psi(chain_b2, 4, 1, x), psi[0](x))
        for k in (1, 2):
            assert np.allclose(transported_psi(chain_b2, 3, k, x), psi[k - 1].iterated(1, x), atol=1e-8)
            assert np.allclose(transported_psi(chain_b2, 1, k, x), psi[k - 1].iterated(3, x), atol=1e-8)

    def test_zero_psi(self):
        zero = lambda x: 0.0 * np.asarray(x)  # noqa: E731
        spec = ChainSpec(1, (indicator, indicator), (zero,))
        assert np.all(transported_psi(spec, 1, 1, np.array(PTS)) == 0)
        with pytest.raises(SingularityError):
            gram_matrix(spec)

    def test_bad_inputs(self, chain_b2):
        with pytest.raises(ConfigError):
            ChainSpec(2, (indicator,) * 3, (lambda x: x,) * 2)
        with pytest.raises(DomainError):
            transported_psi(chain_b2, 5, 1, 0.3)
        with pytest.raises(DomainError):
            transported_psi(chain_b2, 2, 3, 0.3)
        with pytest.raises(DomainError):
            chain_b2.transported(2, 1, 9.5)


class TestGram:
    def test_n1_positive(self, chain_b1):
        g = gram_matrix(chain_b1)
        psi = chain_b1.psi[0]
        ref = integrate(lambda t: t * float(psi(np.float64(t))), (0.0, np.inf))
        assert g.matrix[0, 0] > 0
        assert g.matrix[0, 0] == pytest.approx(ref, rel=1e-7)

    def test_inverse(self, chain_b2):
        g = gram_matrix(chain_b2)
        assert np.all(np.isfinite(g.matrix))
        assert np.max(np.abs(g.matrix @ g.inverse - np.eye(2))) <= 1e-8

    def test_diagonal_case(self):
        # narrow smooth transitions keep row l near anchor l; psi_j sits at anchor j
        var = 0.04
        step = lambda x, y: np.exp(-(np.asarray(y) - np.asarray(x)) ** 2 / (2 * var))  # noqa: E731
        psi = tuple(lambda x, c=c: np.exp(-(np.asarray(x) - c) ** 2 / (2 * var)) for c in (1.5, 5.5))
        spec = ChainSpec(2, (step,) * 4, psi, anchors=(1.5, 5.5))
        g = gram_matrix(spec)
        M = g.matrix
        assert abs(M[0, 1]) <= 1e-12 * M[0, 0] and abs(M[1, 0]) <= 1e-12 * M[1, 1]
        assert np.allclose(np.diag(g.inverse), 1 / np.diag(M), rtol=1e-8)


class TestKernel:
    def test_top_level_has_no_transition(self, chain_b2):
        g = gram_matrix(chain_b2)
        x, y = 0.7, 1.3
        expect = sum(float(chain_b2.psi[k](x)) * g.inverse[k, l] * float(chain_b2.row_function(l + 1, 4, y))
                     for k in range(2) for l in range(2))
        assert em_kernel(chain_b2, (4, x), (4, y)) == pytest.approx(expect, abs=1e-12)

    def test_matches_class_b(self, chain_b2):
        spec = gaussian_spec("B", 2)
        diff = 0.0
        for r in range(1, 5):
            for s in range(1, 5):
                for y in PTS:
                    for z in PTS:
                        diff = max(diff, abs(em_kernel(chain_b2, (r, y), (s, z))
                                             - kernel_biorthogonal(spec, (r, y), (s, z))))
        assert diff <= 1e-5

    def test_traces(self, chain_b2):
        for r in range(1, 5):
            assert abs(em_trace(chain_b2, r) - (r + 1) // 2) <= 1e-4

    def test_nonnegative(self, chain_b2):
        g = np.linspace(0, 8, 161)
        for r in range(1, 5):
            assert em_one_point(chain_b2, r, g).min() >= -1e-7
