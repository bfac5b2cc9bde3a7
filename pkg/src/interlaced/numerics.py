"""Foundational numerical routines.

Hermitian spectra, Pfaffians, adaptive quadrature, normalised Hermite
functions, the discriminant-like polynomials ``Delta`` of each class with
their exact partial derivatives, and the iterated tail integrals of weight
functions.
"""

from dataclasses import dataclass, field
from math import factorial, comb, sqrt, pi
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P
from scipy import integrate as _spi
from scipy import special

from .classes import MatrixClass
from .errors import DomainError, NumericError, StructuralError

QUAD_EPSREL = 1e-9
QUAD_EPSABS = 1e-13

WHOLE_LINE = (-np.inf, np.inf)
HALF_LINE = (0.0, np.inf)
UNIT_INTERVAL = (0.0, 1.0)

_DOMAINS = {
    "whole": WHOLE_LINE,
    "wholeline": WHOLE_LINE,
    "half": HALF_LINE,
    "positivehalfline": HALF_LINE,
    "unit": UNIT_INTERVAL,
    "unitinterval": UNIT_INTERVAL,
}


# ---------------------------------------------------------------------------
# spectra and Pfaffians
# ---------------------------------------------------------------------------

def hermitian_eigenvalues(H, tol=1e-10):
    """Eigenvalues of a Hermitian matrix in decreasing order.

    Raises :class:`StructuralError` if ``H`` departs from Hermitian symmetry
    by more than ``tol`` in max-norm.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise StructuralError(f"expected a square matrix, got shape {H.shape}")
    if H.size == 0:
        return np.zeros(0)
    asym = np.max(np.abs(H - H.conj().T))
    if asym > tol:
        raise StructuralError(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
    Hs = 0.5 * (H + H.conj().T)
    w, Q = np.linalg.eigh(Hs)
    norm = np.linalg.norm(Hs, 2) if Hs.size else 0.0
    resid = np.linalg.norm(Hs - (Q * w) @ Q.conj().T, 2)
    if resid > 1e-8 * max(norm, np.finfo(float).tiny):
        raise NumericError("eigen-decomposition residual too large", w, resid)
    return w[::-1].copy()


def _check_antisymmetric(A, tol):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise StructuralError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] % 2:
        raise StructuralError("Pfaffian needs an even-dimensional matrix")
    if A.size and np.max(np.abs(A + A.T)) > tol * max(1.0, np.max(np.abs(A))):
        raise StructuralError("matrix is not antisymmetric")
    return 0.5 * (A - A.T)


def _pfaffian_factors(A):
    """Householder reduction of a real antisymmetric matrix.

    Returns ``(sign, pivots)`` with ``Pf(A) = sign * prod(pivots)``.
    """
    A = A.copy()
    m = A.shape[0]
    sign = 1.0
    pivots = []
    for k in range(0, m - 1, 2):
        x = A[k + 1:, k].copy()
        if x.size > 1 and np.any(x[1:] != 0.0):
            alpha = -np.copysign(np.linalg.norm(x), x[0])
            v = x
            v[0] -= alpha
            v /= np.linalg.norm(v)
            # conjugate the trailing block by the reflection I - 2 v v^T
            sub = A[k + 1:, k + 1:]
            sub -= 2.0 * np.outer(v, v @ sub)
            sub -= 2.0 * np.outer(sub @ v, v)
            A[k + 1:, k] = 0.0
            A[k, k + 1:] = 0.0
            A[k + 1, k] = alpha
            A[k, k + 1] = -alpha
            sign = -sign
        pivots.append(A[k, k + 1])
    return sign, np.array(pivots)


def pfaffian(A, tol=1e-10):
    """Pfaffian of an even-dimensional real antisymmetric matrix."""
    A = _check_antisymmetric(A, tol)
    if A.shape[0] == 0:
        return 1.0
    sign, piv = _pfaffian_factors(A)
    return float(sign * np.prod(piv))


def pfaffian_sign(A, tol=1e-10, singular_tol=1e-12):
    """Sign (+1, -1 or 0) of the Pfaffian, via Householder reduction.

    The matrix counts as singular, and 0 is returned, when some reduced pivot
    is below ``singular_tol`` times the matrix norm.
    """
    A = _check_antisymmetric(A, tol)
    if A.shape[0] == 0:
        return 1
    sign, piv = _pfaffian_factors(A)
    scale = max(np.max(np.abs(A)), np.finfo(float).tiny)
    if np.min(np.abs(piv)) <= singular_tol * scale:
        return 0
    return int(sign * np.prod(np.sign(piv)))


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def _resolve_domain(domain):
    if isinstance(domain, str):
        key = domain.replace("_", "").replace("-", "").lower()
        if key not in _DOMAINS:
            raise DomainError(f"unknown domain descriptor {domain!r}")
        return _DOMAINS[key]
    a, b = domain
    return float(a), float(b)


def integrate(f, domain, epsrel=QUAD_EPSREL, epsabs=QUAD_EPSABS, points=(), limit=200):
    """Adaptive quadrature of a scalar function over an interval.

    ``domain`` is ``(a, b)`` (either end may be infinite) or one of the
    descriptors ``"whole"``, ``"half"``, ``"unit"``. Interior ``points`` at
    which the integrand has kinks split the interval. Raises
    :class:`NumericError` with the achieved error estimate when the target
    ``max(epsabs, epsrel * |value|)`` is not met.
    """
    a, b = _resolve_domain(domain)
    if a == b:
        return 0.0
    if a > b:
        return -integrate(f, (b, a), epsrel, epsabs, points, limit)
    cuts = sorted({float(p) for p in points if a < p < b})
    edges = [a, *cuts, b]
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        out = _spi.quad(f, lo, hi, epsabs=epsabs / len(edges), epsrel=epsrel, limit=limit,
                        full_output=1)
        val, e = out[0], out[1]
        total += val
        err += e
    if not np.isfinite(total):
        raise NumericError("quadrature produced a non-finite value", total, err)
    if err > max(epsabs, epsrel * abs(total)) * 10.0:
        raise NumericError("adaptive quadrature did not converge", total, err)
    return total


# ---------------------------------------------------------------------------
# Hermite functions
# ---------------------------------------------------------------------------

def hermite_normalized(i, x):
    """Hermite polynomial ``h_i`` orthonormal for the weight ``exp(-x^2)``.

    Uses the three-term recurrence
    ``h_{k+1} = sqrt(2/(k+1)) x h_k - sqrt(k/(k+1)) h_{k-1}``.
    Works elementwise on arrays.
    """
    if i < 0:
        raise DomainError("Hermite index must be nonnegative")
    x = np.asarray(x, dtype=float)
    h_prev = np.zeros_like(x)
    h = np.full_like(x, pi ** -0.25)
    for k in range(i):
        h_prev, h = h, sqrt(2.0 / (k + 1)) * x * h - sqrt(k / (k + 1)) * h_prev
    return h if h.ndim else float(h)


def hermite_polynomial(i):
    """Monomial-basis :class:`~numpy.polynomial.Polynomial` equal to ``h_i``."""
    prev = np.zeros(1)
    cur = np.array([pi ** -0.25])
    for k in range(i):
        nxt = sqrt(2.0 / (k + 1)) * P.polymulx(cur)
        nxt[: len(prev)] -= sqrt(k / (k + 1)) * prev
        prev, cur = cur, nxt
    return Polynomial(cur)


# ---------------------------------------------------------------------------
# Delta polynomials
# ---------------------------------------------------------------------------

def _tag(cls):
    return cls.tag if isinstance(cls, MatrixClass) else str(cls).upper()


def delta(cls, x):
    """``Delta_nu(x)``: the Vandermonde-type product attached to the class.

    A: prod_{i<j} (x_i - x_j); B, C: prod_i x_i prod_{i<j} (x_i^2 - x_j^2);
    D: prod_{i<j} (x_i^2 - x_j^2).
    """
    tag = _tag(cls)
    x = np.asarray(x, dtype=float)
    n = len(x)
    out = 1.0
    if tag in ("B", "C"):
        for xi in x:
            out *= xi
    for i in range(n):
        for j in range(i + 1, n):
            if tag == "A":
                out *= x[i] - x[j]
            else:
                out *= x[i] * x[i] - x[j] * x[j]
    return float(out)


@dataclass(frozen=True)
class SlotPolynomial:
    """A multivariate polynomial viewed as univariate in one slot.

    ``coefficients`` are in ascending powers of the distinguished variable;
    ``parameters`` holds the fixed values of the other variables (the entry
    at ``slot`` itself is unused).
    """

    coefficients: np.ndarray
    slot: int
    parameters: tuple = ()

    def __post_init__(self):
        c = P.polytrim(np.asarray(self.coefficients, dtype=float), 0)
        object.__setattr__(self, "coefficients", c)

    @property
    def degree(self):
        c = self.coefficients
        if len(c) == 1 and c[0] == 0.0:
            return -1
        return len(c) - 1

    def deriv(self, m=1):
        if m == 0:
            return self
        if m > self.degree:
            return SlotPolynomial(np.zeros(1), self.slot, self.parameters)
        return SlotPolynomial(P.polyder(self.coefficients, m), self.slot, self.parameters)

    def __call__(self, t):
        return P.polyval(t, self.coefficients)


def delta_slot_polynomial(cls, k, x):
    """Expand ``Delta_nu`` as a polynomial in the 1-based slot ``k``."""
    tag = _tag(cls)
    x = np.asarray(x, dtype=float)
    n = len(x)
    if not 1 <= k <= n:
        raise DomainError(f"slot {k} out of range 1..{n}")
    kk = k - 1
    const = 1.0
    coeffs = np.array([1.0])
    if tag in ("B", "C"):
        coeffs = np.array([0.0, 1.0])
        for i in range(n):
            if i != kk:
                const *= x[i]
    for i in range(n):
        for j in range(i + 1, n):
            if kk not in (i, j):
                const *= (x[i] - x[j]) if tag == "A" else (x[i] ** 2 - x[j] ** 2)
            elif tag == "A":
                # (x_k - x_j) for j > k, (x_i - x_k) for i < k
                lin = [-x[j], 1.0] if i == kk else [x[i], -1.0]
                coeffs = P.polymul(coeffs, lin)
            else:
                quad = [-x[j] ** 2, 0.0, 1.0] if i == kk else [x[i] ** 2, 0.0, -1.0]
                coeffs = P.polymul(coeffs, quad)
    return SlotPolynomial(const * np.asarray(coeffs), k, tuple(x))


def delta_partial(cls, k, order, x):
    """``order``-th partial derivative of ``Delta_nu`` in slot ``k`` at ``x``."""
    if order < 0:
        raise DomainError("derivative order must be nonnegative")
    if order == 0:
        if not 1 <= k <= len(x):
            raise DomainError(f"slot {k} out of range 1..{len(x)}")
        return delta(cls, x)
    poly = delta_slot_polynomial(cls, k, x)
    return float(poly.deriv(order)(x[k - 1]))


# ---------------------------------------------------------------------------
# weight functions and iterated tail integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightFunction:
    """A measurable weight ``psi`` on a real interval.

    ``func`` must accept numpy arrays. Outside ``support`` the weight is zero.
    ``breakpoints`` lists interior points where ``func`` is not smooth.
    """

    func: Callable
    support: tuple = WHOLE_LINE
    breakpoints: tuple = ()
    finite_moments: bool = True
    name: str = field(default="psi", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "support", _resolve_domain(self.support))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x >= lo) & (x <= hi)
        out = np.zeros(x.shape)
        if np.any(inside):
            out[inside] = self.func(x[inside])
        return out if out.ndim else float(out)

    def iterated(self, i, y):
        """``[psi]^{-i}(y)``; see :func:`iterated_integral`."""
        if i == 0:
            return self(y)
        lo, hi = self.support
        a = max(float(y), lo)
        if a >= hi:
            return 0.0
        c = 1.0 / factorial(i - 1)
        if i == 1:
            g = self.func
        else:
            def g(x):
                return c * (x - y) ** (i - 1) * self.func(x)
        return integrate(lambda t: float(g(np.float64(t))), (a, hi), points=self.breakpoints)

    def moment(self, m):
        """``int x^m psi(x) dx`` over the support."""
        return integrate(lambda t: t ** m * float(self.func(np.float64(t))), self.support,
                         points=self.breakpoints)


class MonomialGaussianWeight(WeightFunction):
    """``x^power * exp(-rate x^2)`` restricted to the whole or half line.

    Tail integrals have a closed form through the incomplete Gaussian
    moments ``J_q(a) = int_a^inf x^q exp(-rate x^2) dx``.
    """

    def __init__(self, power, support=WHOLE_LINE, rate=1.0):
        p, c = int(power), float(rate)
        object.__setattr__(self, "power", p)
        object.__setattr__(self, "rate", c)
        object.__setattr__(self, "func", lambda x: x ** p * np.exp(-c * x * x))
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "breakpoints", ())
        object.__setattr__(self, "finite_moments", True)
        object.__setattr__(self, "name", f"x^{p} exp(-{c:g} x^2)")
        self.__post_init__()
        if self.support not in (WHOLE_LINE, HALF_LINE):
            raise DomainError("MonomialGaussianWeight supports the whole or half line only")

    def _tail_moments(self, a, qmax):
        c = self.rate
        e = np.exp(-c * a * a)
        J = [None] * (qmax + 1)
        J[0] = 0.5 * sqrt(pi / c) * special.erfc(sqrt(c) * a)
        if qmax >= 1:
            J[1] = e / (2 * c)
        for q in range(2, qmax + 1):
            J[q] = a ** (q - 1) * e / (2 * c) + (q - 1) / (2 * c) * J[q - 2]
        return J

    def moment(self, m):
        q = self.power + m
        full = special.gamma((q + 1) / 2) * self.rate ** (-(q + 1) / 2)
        if self.support == HALF_LINE:
            return 0.5 * full
        return 0.0 if q % 2 else full

    def iterated(self, i, y):
        """Closed form of ``[psi]^{-i}(y)``; accepts arrays."""
        if i == 0:
            return self(y)
        y = np.asarray(y, dtype=float)
        a = np.maximum(y, self.support[0])
        p = self.power
        J = self._tail_moments(a, p + i - 1)
        total = np.zeros(y.shape)
        for j in range(i):
            total = total + comb(i - 1, j) * (-y) ** (i - 1 - j) * J[p + j]
        total = total / factorial(i - 1)
        return total if total.ndim else float(total)


def iterated_integral(psi, i, y):
    """Iterated tail integral ``[psi]^{-i}(y)``.

    ``[psi]^0 = psi`` and, for ``i > 0``,
    ``[psi]^{-i}(y) = int_y^inf (x - y)^{i-1} / (i-1)! psi(x) dx``.
    """
    if i < 0:
        raise DomainError("iteration order must be nonnegative")
    return psi.iterated(int(i), y)
