"""Random matrix samplers on the classical Hermitian classes.

Gaussian measures ``exp(-t Tr H^2)``, Haar-conjugated fixed orbits and the
symplectic Laguerre-type sums ``M_k``.

Gaussian coordinate variances
-----------------------------
All Gaussian samples start from a full Hermitian matrix ``G`` with density
proportional to ``exp(-t Tr G^2)``: real diagonal entries of variance
``1/(2t)``, real and imaginary parts of off-diagonal entries of variance
``1/(4t)``. ``Tr G^2`` is the squared Frobenius norm, so the orthogonal
projection of ``G`` onto a real-linear subspace ``H_nu`` is Gaussian with
density ``exp(-t Tr H^2)`` with respect to Lebesgue measure on ``H_nu``.

==== ====== ===================================== ==============================
tag  t      projection                            free coordinates
==== ====== ===================================== ==============================
A    1      identity                              diag var 1/2, Re/Im var 1/4
B, D 1/2    ``(G - G^T)/2 = i Im G``              ``Im G_jk`` (j<k), var 1/2
C    1/2    ``(G + J G^T J)/2``                   fixed space of ``H -> J H^T J``
==== ====== ===================================== ==============================

For C the map ``H -> J H^T J`` is a Frobenius isometric involution of the
Hermitian matrices whose fixed space is ``{H : H^T J + J H = 0}``.
"""

from dataclasses import dataclass

import numpy as np

from .classes import MatrixClass, as_class, chamber_violation
from .errors import DomainError, StructuralError

GAUSSIAN_RATE = {"A": 1.0, "B": 0.5, "C": 0.5, "D": 0.5}


def symplectic_form(n):
    """``J`` with ``J[2i, 2i-1] = -J[2i-1, 2i] = 1`` (1-based), size ``2n``."""
    J = np.zeros((2 * n, 2 * n))
    for i in range(n):
        J[2 * i + 1, 2 * i] = 1.0
        J[2 * i, 2 * i + 1] = -1.0
    return J


@dataclass(frozen=True)
class StructuredHermitian:
    """Hermitian matrix in ``H_nu = i g_nu`` together with its class tag."""

    cls: MatrixClass
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        d = self.cls.ambient_dim
        if entries.shape != (d, d):
            raise StructuralError(f"{self.cls} needs a {d}x{d} matrix, got {entries.shape}")
        object.__setattr__(self, "entries", entries)

    def violation(self, tol=1e-12):
        """First violated class invariant, or None."""
        H = self.entries
        if H.size == 0:
            return None
        scale = max(1.0, np.max(np.abs(H)))
        if np.max(np.abs(H - H.conj().T)) > tol * scale:
            return "not Hermitian"
        tag = self.cls.tag
        if tag in ("B", "D") and np.max(np.abs(H + H.T)) > tol * scale:
            return "not imaginary antisymmetric"
        if tag == "C":
            J = symplectic_form(self.cls.rank)
            if np.max(np.abs(H.T @ J + J @ H)) > tol * scale:
                return "H^T J + J H != 0"
        return None

    def check(self, tol=1e-12):
        msg = self.violation(tol)
        if msg is not None:
            raise StructuralError(f"{self.cls} invariant violated: {msg}")
        return self


# ---------------------------------------------------------------------------
# Haar measure
# ---------------------------------------------------------------------------

def _phase_fix(Q, R):
    d = np.diagonal(R, axis1=-2, axis2=-1)
    ph = d / np.where(np.abs(d) == 0, 1.0, np.abs(d))
    return Q * ph[..., None, :]


def haar_unitary(m, rng):
    """Haar-distributed element of U(m) (QR of complex Ginibre, phases fixed)."""
    Z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    return _phase_fix(Q, R)


def haar_special_orthogonal(m, rng):
    """Haar-distributed element of SO(m)."""
    Z = rng.standard_normal((m, m))
    Q, R = np.linalg.qr(Z)
    Q = _phase_fix(Q, R).real
    if m and np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def haar_symplectic(n, rng):
    """Haar-distributed element of ``Sp(n) = {M in U(2n) : M^T J M = J}``.

    Columns ``2i-1, 2i`` of a quaternionic Ginibre matrix are related by the
    antiunitary map ``v -> J conj(v)``; complex Gram-Schmidt preserves that
    relation, so the phase-fixed QR factor lies in ``Sp(n)``.
    """
    p = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Z = np.zeros((2 * n, 2 * n), dtype=complex)
    Z[0::2, 0::2] = p
    Z[0::2, 1::2] = q
    Z[1::2, 0::2] = -q.conj()
    Z[1::2, 1::2] = p.conj()
    Q, R = np.linalg.qr(Z)
    return _phase_fix(Q, R)


def haar_element(group, dim, rng):
    """Haar element of ``group`` in {"U", "SO", "Sp"}.

    ``dim`` is the matrix size for U and SO and the rank ``n`` for Sp.
    """
    key = str(group).upper()
    if key == "U":
        return haar_unitary(dim, rng)
    if key == "SO":
        return haar_special_orthogonal(dim, rng)
    if key == "SP":
        return haar_symplectic(dim, rng)
    raise DomainError(f"unknown group {group!r}")


def group_of_class(cls):
    """(group, dim) pair of the compact group ``G_nu`` acting on ``H_nu``."""
    cls = as_class(cls)
    if cls.tag == "A":
        return "U", cls.rank
    if cls.tag == "C":
        return "Sp", cls.rank
    return "SO", cls.ambient_dim


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def project_to_class(cls, G):
    """Orthogonal projection of Hermitian matrices (stacked on the last two axes) onto ``H_nu``."""
    tag = cls.tag
    if tag == "A":
        return G
    if tag in ("B", "D"):
        return 1j * G.imag
    J = symplectic_form(cls.rank)
    return 0.5 * (G + J @ np.swapaxes(G, -1, -2) @ J)


def sample_gaussian_batch(cls, size, rng):
    """``size`` independent Gaussian matrices of the class, shape ``(size, d, d)``."""
    cls = as_class(cls)
    d = cls.ambient_dim
    t = GAUSSIAN_RATE[cls.tag]
    X = rng.standard_normal((size, d, d)) + 1j * rng.standard_normal((size, d, d))
    G = 0.5 * (X + np.conj(np.swapaxes(X, -1, -2))) * np.sqrt(1.0 / (2.0 * t))
    return project_to_class(cls, G)


def sample_gaussian(cls, rng):
    """Matrix of ``H_nu`` with density proportional to ``exp(-t_nu Tr H^2)``.

    ``t_a = 1`` and ``t_b = t_c = t_d = 1/2``.
    """
    cls = as_class(cls)
    return StructuredHermitian(cls, sample_gaussian_batch(cls, 1, rng)[0])


def canonical_representative(cls, lam):
    """Chamber representative with radial part ``lam``.

    A: ``diag(lam)``. D: ``D(x)`` with ``D[2k, 2k-1] = -D[2k-1, 2k] = i x_k``.
    B: ``D(x)`` padded by a zero last row and column. C: blocks
    ``diag(x_k, -x_k)``, which satisfy ``H^T J + J H = 0``.
    """
    cls = as_class(cls)
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (cls.rank,):
        raise DomainError(f"{cls} needs a radial vector of length {cls.rank}")
    d = cls.ambient_dim
    H = np.zeros((d, d), dtype=complex)
    if cls.tag == "A":
        H[np.diag_indices(d)] = lam
    elif cls.tag == "C":
        H[np.arange(0, d, 2), np.arange(0, d, 2)] = lam
        H[np.arange(1, d, 2), np.arange(1, d, 2)] = -lam
    else:
        for k, x in enumerate(lam):
            H[2 * k + 1, 2 * k] = 1j * x
            H[2 * k, 2 * k + 1] = -1j * x
    return StructuredHermitian(cls, H)


def sample_fixed_orbit(cls, lam, rng):
    """``k Lambda(lam) k^*`` with ``k`` Haar in ``G_nu``."""
    cls = as_class(cls)
    msg = chamber_violation(cls, lam)
    if msg is not None:
        raise DomainError(f"radial vector {list(lam)} outside the closed {cls.tag} chamber: {msg}")
    base = canonical_representative(cls, lam).entries
    k = haar_element(*group_of_class(cls), rng)
    H = k @ base @ k.conj().T
    H = 0.5 * (H + H.conj().T)
    if cls.tag in ("B", "D"):
        H = 1j * H.imag
    return StructuredHermitian(cls, H)


def _s_block(a, b):
    return np.array([[a, -b], [np.conj(b), np.conj(a)]])


def _r_block(a, b):
    return np.array([[a, b], [np.conj(b), -np.conj(a)]])


def sumC_terms(x, y):
    """``S(x, y) R(x, y)^*`` for vectors ``x, y`` of ``C^n``."""
    S = np.vstack([_s_block(a, b) for a, b in zip(x, y)])
    R = np.vstack([_r_block(a, b) for a, b in zip(x, y)])
    return S @ R.conj().T


def sample_sumC_process(n, k, rng):
    """Partial sums ``M_1, ..., M_k`` and their positive spectra.

    ``X_i, Y_i`` have independent standard complex Gaussian components with
    density proportional to ``exp(-|z|^2)``. Returns ``(M_k, [Lambda^(1), ..., Lambda^(k)])``.
    """
    if n < 1 or k < 1:
        raise DomainError("n and k must be positive")
    cls = MatrixClass("C", n)
    M = np.zeros((2 * n, 2 * n), dtype=complex)
    spectra = []
    for _ in range(k):
        x = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
        y = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
        M = M + sumC_terms(x, y)
        Hs = 0.5 * (M + M.conj().T)
        # spectrum is symmetric; rank deficiency (k < n) leaves round-off zeros
        spectra.append(np.abs(np.linalg.eigvalsh(Hs)[::-1][:n]))
    return StructuredHermitian(cls, M), spectra


def sample_sumC(n, k, rng):
    """``M_k`` (class C, rank n) and its decreasing positive eigenvalues."""
    M, spectra = sample_sumC_process(n, k, rng)
    return M, spectra[-1]
