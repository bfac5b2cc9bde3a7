import numpy as np
import pytest
from scipy import stats

from interlaced.classes import MatrixClass
from interlaced.ensembles import (
    StructuredHermitian, canonical_representative, haar_element, sample_fixed_orbit,
    sample_gaussian, sample_gaussian_batch, sample_sumC, sample_sumC_process, sumC_terms,
    symplectic_form,
)
from interlaced.errors import DomainError, StructuralError
from interlaced.minors import radial_part

CLASSES = [MatrixClass(t, n) for t in "ABCD" for n in (1, 2, 3)]


def random_chamber(cls, rng):
    v = np.sort(rng.uniform(0, 3, cls.rank))[::-1]
    if cls.tag == "A":
        v = v - 1.5
    if cls.tag == "D" and rng.random() < 0.5:
        v[-1] = -v[-1]
    return v


class TestGaussian:
    @pytest.mark.parametrize("cls", CLASSES, ids=str)
    def test_invariants(self, cls, rng):
        for _ in range(20):
            M = sample_gaussian(cls, rng)
            assert M.violation(1e-10) is None

    def test_bd_diagonal_zero(self, rng):
        for tag in "BD":
            H = sample_gaussian_batch(MatrixClass(tag, 2), 100, rng)
            assert np.all(np.diagonal(H, axis1=1, axis2=2) == 0)
            assert np.all(H.real == 0)

    def test_a1_variance(self, rng):
        h = sample_gaussian_batch(MatrixClass("A", 1), 200000, rng)[:, 0, 0].real
        assert abs(h.var() - 0.5) < 5 * 0.5 * np.sqrt(2 / len(h))
        assert stats.kstest(h, stats.norm(scale=np.sqrt(0.5)).cdf).pvalue > 0.01

    # E[Tr H^2] = (number of real coordinates) / (2 t) for the Gaussian exp(-t Tr H^2)
    @pytest.mark.parametrize("cls,expected", [(MatrixClass("A", 2), 2.0), (MatrixClass("B", 2), 10.0),
                                              (MatrixClass("C", 2), 10.0), (MatrixClass("D", 2), 6.0)],
                             ids=str)
    def test_trace_square_mean(self, cls, expected, rng):
        H = sample_gaussian_batch(cls, 200000, rng)
        tr = np.einsum("nij,nji->n", H, H).real
        se = tr.std() / np.sqrt(len(tr))
        assert abs(tr.mean() - expected) < 4 * se

    def test_conjugation_invariance(self, rng):
        cls = MatrixClass("A", 2)
        H = sample_gaussian_batch(cls, 100000, rng)
        U = np.array([haar_element("U", 2, rng) for _ in range(2000)])
        K = U[np.arange(len(H)) % len(U)]
        H2 = K @ H @ np.conj(np.swapaxes(K, 1, 2))
        a = np.linalg.eigvalsh(H).ravel()
        b = np.linalg.eigvalsh(H2).ravel()
        edges = np.linspace(-3, 3, 25)
        ca, _ = np.histogram(a, edges)
        cb, _ = np.histogram(b, edges)
        se = np.sqrt(ca + cb + 1)
        assert np.all(np.abs(ca - cb) <= 3 * se + 1)


class TestHaar:
    @pytest.mark.parametrize("group,dim", [("U", 1), ("U", 4), ("SO", 2), ("SO", 5), ("Sp", 1), ("Sp", 3)])
    def test_unitary(self, group, dim, rng):
        for _ in range(20):
            U = haar_element(group, dim, rng)
            assert np.max(np.abs(U.conj().T @ U - np.eye(len(U)))) <= 1e-12
            if group == "SO":
                assert abs(np.linalg.det(U) - 1) <= 1e-10
                assert np.all(np.isreal(U))
            if group == "Sp":
                J = symplectic_form(dim)
                assert np.max(np.abs(U.T @ J @ U - J)) <= 1e-12

    def test_unknown_group(self, rng):
        with pytest.raises(DomainError):
            haar_element("G2", 2, rng)

    def test_u11_uniform_on_sphere(self, rng):
        # |U_11|^2 ~ Beta(1, m-1) under Haar measure on U(m)
        v = np.array([abs(haar_element("U", 3, rng)[0, 0]) ** 2 for _ in range(5000)])
        assert stats.kstest(v, stats.beta(1, 2).cdf).pvalue > 0.01


class TestFixedOrbit:
    def test_zero(self, rng):
        for tag in "ABCD":
            H = sample_fixed_orbit(MatrixClass(tag, 2), np.zeros(2), rng)
            assert np.allclose(H.entries, 0)

    def test_eigenvalues_a(self, rng):
        lam = np.array([2.0, 0.5, -1.0])
        H = sample_fixed_orbit(MatrixClass("A", 3), lam, rng)
        assert np.allclose(np.linalg.eigvalsh(H.entries)[::-1], lam, atol=1e-9)

    def test_outside_chamber(self, rng):
        with pytest.raises(DomainError):
            sample_fixed_orbit(MatrixClass("B", 2), [1.0, -0.5], rng)
        with pytest.raises(DomainError):
            sample_fixed_orbit(MatrixClass("A", 2), [0.0, 1.0], rng)

    @pytest.mark.parametrize("cls", CLASSES, ids=str)
    def test_round_trip(self, cls, rng):
        for _ in range(100):
            lam = random_chamber(cls, rng)
            H = sample_fixed_orbit(cls, lam, rng)
            assert H.violation(1e-10) is None
            assert np.max(np.abs(radial_part(H).values - lam)) <= 1e-8

    def test_canonical_d(self):
        H = canonical_representative(MatrixClass("D", 2), [2.0, -1.0]).entries
        assert H[1, 0] == 2j and H[0, 1] == -2j and H[3, 2] == -1j


class TestStructured:
    def test_wrong_shape(self):
        with pytest.raises(StructuralError):
            StructuredHermitian(MatrixClass("B", 1), np.zeros((2, 2)))

    def test_check_c(self):
        H = np.diag([1.0, 2.0])
        with pytest.raises(StructuralError):
            StructuredHermitian(MatrixClass("C", 1), H).check()
        StructuredHermitian(MatrixClass("C", 1), np.diag([1.0, -1.0])).check()


class TestSumC:
    def test_single_term_eigenvalue(self, rng):
        for _ in range(50):
            x = rng.standard_normal(1) + 1j * rng.standard_normal(1)
            y = rng.standard_normal(1) + 1j * rng.standard_normal(1)
            M = sumC_terms(x, y)
            w = np.linalg.eigvalsh(M)
            expected = abs(x[0]) ** 2 + abs(y[0]) ** 2
            assert np.allclose(w, [-expected, expected], atol=1e-12)

    def test_gamma_law(self, rng):
        vals = np.array([sample_sumC(1, 1, rng)[1][0] for _ in range(100000)])
        assert stats.kstest(vals, stats.gamma(2).cdf).pvalue > 0.01

    @pytest.mark.parametrize("n,k", [(1, 3), (2, 1), (3, 4)])
    def test_invariants(self, n, k, rng):
        M, spectra = sample_sumC_process(n, k, rng)
        assert M.violation(1e-10) is None
        assert len(spectra) == k
        assert all(len(s) == n and np.all(s >= 0) for s in spectra)
        w = np.linalg.eigvalsh(M.entries)
        assert np.allclose(np.sort(w), np.sort(-w), atol=1e-10)

    def test_bad_args(self, rng):
        with pytest.raises(DomainError):
            sample_sumC(0, 1, rng)
