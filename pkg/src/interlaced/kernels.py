"""Correlation kernels of the interlaced point processes ``xi_nu``.

Levels ``r`` run over ``1..L`` with ``L = n`` (A, C), ``2n`` (B) and
``2n - 1`` (D). For B, C and D the process lives on the half line and every
kernel here is set to zero when ``y < 0`` or ``z < 0``.

The integrals ``int d^m Delta / dx_k^m (..., z, ...) prod_{i != k} psi_i``
are polynomials in ``z``. By default they are computed exactly from the
monomial expansion of ``Delta_nu`` and the moments of the ``psi_i``
(``method="moments"``); ``method="nested"`` evaluates them literally by
nested adaptive quadrature and is kept as an independent check for n <= 3.
"""

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from math import factorial, sqrt, pi
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P

from .classes import MatrixClass, as_class
from .errors import ConfigError, DomainError, NumericError, StructuralError
from .numerics import (
    HALF_LINE, WHOLE_LINE, MonomialGaussianWeight, WeightFunction, delta, delta_partial,
    hermite_normalized, hermite_polynomial, integrate,
)

BIORTHOGONALITY_TOL = 1e-8
NESTED_MAX_RANK = 3


# ---------------------------------------------------------------------------
# level bookkeeping and the transition part
# ---------------------------------------------------------------------------

def phi_level(cls, n=None, r=None):
    """Number of tail integrations ``phi_nu(r)`` attached to level ``r``.

    ``phi_a = n - r``, ``phi_c = 2(n - r)``, ``phi_b = 2n - r``, ``phi_d = 2n - r - 1``.
    """
    cls = as_class(cls, n)
    cls.check_level(r)
    n = cls.rank
    return {"A": n - r, "C": 2 * (n - r), "B": 2 * n - r, "D": 2 * n - r - 1}[cls.tag]


def transition_term(cls, n, r, s, y, z):
    """``-(z - y)^(m-1) / (m-1)! 1_{y<z}`` for ``s > r``, else 0.

    ``m = phi(r) - phi(s)``. At ``y == z`` the value is ``-1`` when ``m = 1``
    (left limit) and 0 otherwise. Broadcasts over ``y`` and ``z``.
    """
    cls = as_class(cls, n)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    shape = np.broadcast(y, z).shape
    if s <= r:
        cls.check_level(r)
        cls.check_level(s)
        out = np.zeros(shape)
        return out if out.ndim else 0.0
    m = phi_level(cls, r=r) - phi_level(cls, r=s)
    if m <= 0:
        raise StructuralError(f"phi({r}) - phi({s}) = {m} <= 0 for s > r")
    d = z - y
    if m == 1:
        out = np.where(d >= 0, -1.0, 0.0)
    else:
        out = np.where(d > 0, -np.maximum(d, 0.0) ** (m - 1) / factorial(m - 1), 0.0)
    out = np.broadcast_to(out, shape).astype(float)
    return out if out.ndim else float(out)


def _mask_half_line(cls, value, *points):
    if cls.tag == "A":
        return value
    keep = np.ones(np.shape(value), dtype=bool)
    for t in points:
        keep &= np.asarray(t) >= 0
    out = np.where(keep, value, 0.0)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# monomial expansion of Delta
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def delta_terms(tag, n):
    """Exact monomial expansion ``{exponents: integer coefficient}`` of ``Delta_nu``."""
    terms = {(0,) * n: 1}

    def times(factor):
        out = {}
        for e1, c1 in terms.items():
            for e2, c2 in factor.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return {e: c for e, c in out.items() if c}

    def mono(i, p):
        e = [0] * n
        e[i] = p
        return tuple(e)

    if tag in ("B", "C"):
        for i in range(n):
            terms = times({mono(i, 1): 1})
    p = 1 if tag == "A" else 2
    for i in range(n):
        for j in range(i + 1, n):
            terms = times({mono(i, p): 1, mono(j, p): -1})
    return terms


# ---------------------------------------------------------------------------
# kernel specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelSpec:
    """Data defining a correlation kernel.

    Exactly one of ``psi`` (a tuple of ``n`` :class:`WeightFunction`) and
    ``atoms`` (a fixed radial vector) drives the measure. ``chi``, when
    given, is a tuple of ``n`` functions with a ``deriv(m)`` method (numpy
    polynomials qualify) that must be biorthogonal to ``psi``.
    """

    cls: MatrixClass
    psi: Optional[tuple] = None
    chi: Optional[tuple] = None
    atoms: Optional[np.ndarray] = None
    method: str = "moments"
    name: str = field(default="", compare=False)

    def __post_init__(self):
        n = self.cls.rank
        if (self.psi is None) == (self.atoms is None):
            raise ConfigError("exactly one of psi and atoms must be given", "psi")
        if self.psi is not None:
            object.__setattr__(self, "psi", tuple(self.psi))
            if len(self.psi) != n:
                raise ConfigError(f"{self.cls} needs {n} psi functions, got {len(self.psi)}", "psi")
            if self.cls.tag != "A" and any(w.support[0] < 0 for w in self.psi):
                raise ConfigError("psi must vanish on the negative half line for B, C, D", "psi")
        if self.atoms is not None:
            a = np.asarray(self.atoms, dtype=float)
            if a.shape != (n,):
                raise ConfigError(f"{self.cls} needs {n} atoms", "atoms")
            object.__setattr__(self, "atoms", a)
        if self.chi is not None:
            object.__setattr__(self, "chi", tuple(self.chi))
            if len(self.chi) != n:
                raise ConfigError(f"{self.cls} needs {n} chi functions", "chi")
        if self.method not in ("moments", "nested"):
            raise ConfigError(f"unknown method {self.method!r}", "method")
        if self.method == "nested" and n > NESTED_MAX_RANK:
            raise ConfigError(f"nested quadrature is limited to n <= {NESTED_MAX_RANK}", "method")

    @property
    def n(self):
        return self.cls.rank

    @cached_property
    def moments(self):
        """``mu[i][m] = int x^m psi_{i+1}``, for every power occurring in ``Delta``."""
        deg = max(max(e) for e in delta_terms(self.cls.tag, self.n))
        return np.array([[w.moment(m) for m in range(deg + 1)] for w in self.psi])

    @cached_property
    def alpha(self):
        """``alpha_nu`` with ``1 / alpha = int Delta(x) prod psi_i(x_i) dx``."""
        if self.atoms is not None:
            inv = delta(self.cls, _atom_locations(self.cls, self.atoms))
        elif self.method == "moments":
            mu = self.moments
            inv = sum(c * np.prod([mu[i, e] for i, e in enumerate(ex)])
                      for ex, c in delta_terms(self.cls.tag, self.n).items())
        else:
            inv = _nested(lambda xs: delta(self.cls, xs), list(self.psi))
        if inv == 0 or not np.isfinite(inv):
            raise DomainError(f"degenerate measure: 1/alpha = {inv}")
        return 1.0 / inv

    @cached_property
    def slot_polynomials(self):
        """``P_k(z) = int Delta(x_1, .., z, .., x_n) prod_{i != k} psi_i(x_i)`` for the moment method."""
        mu = self.moments
        out = []
        for k in range(self.n):
            coef = np.zeros(mu.shape[1])
            for ex, c in delta_terms(self.cls.tag, self.n).items():
                coef[ex[k]] += c * np.prod([mu[i, e] for i, e in enumerate(ex) if i != k])
            out.append(Polynomial(coef))
        return tuple(out)

    def slot_integral(self, k, order, z):
        """``int d^order Delta / dx_k^order (.., z, ..) prod_{i != k} psi_i`` (0-based ``k``)."""
        if self.method == "moments":
            return self.slot_polynomials[k].deriv(order)(np.asarray(z, dtype=float))
        return np.vectorize(lambda t: self._nested_slot(k, order, float(t)))(z)

    @lru_cache(maxsize=4096)
    def _nested_slot(self, k, order, z):
        others = [w for i, w in enumerate(self.psi) if i != k]

        def integrand(xs):
            x = list(xs)
            x.insert(k, z)
            return delta_partial(self.cls, k + 1, order, np.array(x))

        return _nested(integrand, others)

    def __hash__(self):
        return id(self)


def _nested(func, weights, prefix=()):
    """``int func(x) prod w_i(x_i) dx`` by nested adaptive quadrature."""
    if not weights:
        return func(prefix)
    w = weights[0]
    rest = weights[1:]

    def g(t):
        return float(w.func(np.float64(t))) * _nested(func, rest, prefix + (t,))

    return integrate(g, w.support, epsrel=1e-10, epsabs=1e-11, points=w.breakpoints)


def _atom_locations(cls, lam):
    lam = np.asarray(lam, dtype=float)
    return lam if cls.tag == "A" else np.abs(lam)


def iterated(psi, i, y):
    """``[psi]^{-i}`` evaluated on an array."""
    if isinstance(psi, MonomialGaussianWeight) or i == 0:
        return psi.iterated(i, y)
    y = np.asarray(y, dtype=float)
    out = np.vectorize(lambda t: psi.iterated(i, float(t)))(y)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# kernels (ii) and (iii)
# ---------------------------------------------------------------------------

def kernel_generic(spec, p, q):
    """Kernel from the ``psi`` family and ``Delta_nu``; ``p = (r, y)``, ``q = (s, z)``."""
    if spec.psi is None:
        raise ConfigError("kernel_generic needs a psi family", "psi")
    (r, y), (s, z) = p, q
    cls = spec.cls
    a, b = phi_level(cls, r=r), phi_level(cls, r=s)
    total = transition_term(cls, spec.n, r, s, y, z)
    for k, w in enumerate(spec.psi):
        total = total + spec.alpha * iterated(w, a, y) * spec.slot_integral(k, b, z)
    return _mask_half_line(cls, total, y, z)


def check_biorthogonal(spec, tol=BIORTHOGONALITY_TOL):
    """Max deviation of ``int chi_i psi_j`` from the identity, by quadrature."""
    if spec.chi is None:
        raise ConfigError("spec has no chi family", "chi")
    n = spec.n
    G = np.empty((n, n))
    for i, c in enumerate(spec.chi):
        for j, w in enumerate(spec.psi):
            G[i, j] = integrate(lambda t: float(c(t)) * float(w.func(np.float64(t))), w.support,
                                points=w.breakpoints, epsabs=1e-12, epsrel=1e-12)
    err = float(np.max(np.abs(G - np.eye(n))))
    if err > tol:
        raise NumericError("chi and psi are not biorthogonal", G, err)
    return err


def kernel_biorthogonal(spec, p, q):
    """Kernel from a biorthogonal pair: transition + ``sum_k [psi_k]^{-phi(r)}(y) chi_k^{(phi(s))}(z)``."""
    if spec.chi is None:
        raise ConfigError("kernel_biorthogonal needs a chi family", "chi")
    (r, y), (s, z) = p, q
    cls = spec.cls
    a, b = phi_level(cls, r=r), phi_level(cls, r=s)
    total = transition_term(cls, spec.n, r, s, y, z)
    zz = np.asarray(z, dtype=float)
    for w, c in zip(spec.psi, spec.chi):
        total = total + iterated(w, a, y) * c.deriv(b)(zz)
    return _mask_half_line(cls, total, y, z)


# ---------------------------------------------------------------------------
# Gaussian specs
# ---------------------------------------------------------------------------

def gaussian_psi(cls):
    cls = as_class(cls)
    n = cls.rank
    if cls.tag == "A":
        return tuple(MonomialGaussianWeight(i, WHOLE_LINE) for i in range(n))
    if cls.tag == "D":
        return tuple(MonomialGaussianWeight(2 * i, HALF_LINE) for i in range(n))
    return tuple(MonomialGaussianWeight(2 * i + 1, HALF_LINE) for i in range(n))


def gaussian_chi_degrees(cls):
    cls = as_class(cls)
    n = cls.rank
    return {"A": [i for i in range(n)], "D": [2 * i for i in range(n)]}.get(
        cls.tag, [2 * i + 1 for i in range(n)])


def gaussian_spec(cls, n=None, method="moments"):
    """Spec of the Gaussian ensemble ``exp(-t_nu Tr H^2)`` with its biorthogonal family.

    The Hermite polynomials ``h_d`` of the listed degrees span the right
    space but are only triangular against the ``psi``: ``G_ij = int h_{d_i} psi_j``
    is upper triangular with zeros below the diagonal, not diagonal. The
    ``chi`` are therefore ``G^{-1}`` applied to the Hermite family, which
    reduces to a rescaling only in the lowest case.
    """
    cls = as_class(cls, n)
    if cls.rank < 1:
        raise DomainError("n must be at least 1")
    psi = gaussian_psi(cls)
    herm = [hermite_polynomial(d) for d in gaussian_chi_degrees(cls)]
    G = np.array([[sum(c * w.moment(m) for m, c in enumerate(h.coef)) for w in psi] for h in herm])
    C = np.linalg.inv(G)
    chi = tuple(sum((C[i, l] * herm[l] for l in range(cls.rank)), Polynomial([0.0]))
                for i in range(cls.rank))
    # exact moment check; check_biorthogonal offers an independent quadrature check
    B = np.array([[sum(c * w.moment(m) for m, c in enumerate(ch.coef)) for w in psi] for ch in chi])
    err = float(np.max(np.abs(B - np.eye(cls.rank))))
    if err > BIORTHOGONALITY_TOL:
        raise NumericError("Gaussian chi family failed biorthogonality", B, err)
    return KernelSpec(cls, psi=psi, chi=chi, method=method, name=f"gaussian-{cls}")


def weight_spec(cls, psi, n=None, chi=None, method="moments"):
    """Spec from user-supplied ``psi`` (e.g. Laguerre or Jacobi weights)."""
    return KernelSpec(as_class(cls, n), psi=tuple(psi), chi=chi, method=method)


def laguerre_psi(n, alpha, beta):
    """``x^(i-1) x^alpha exp(-beta x) 1_{x>0}``, ``i = 1..n``."""
    return tuple(WeightFunction(lambda x, i=i: x ** (i + alpha) * np.exp(-beta * x), HALF_LINE,
                                name=f"laguerre{i}") for i in range(n))


def jacobi_psi(n, alpha, beta):
    """``x^(i-1) x^alpha (1-x)^beta 1_{0<x<1}``, ``i = 1..n``."""
    return tuple(WeightFunction(lambda x, i=i: x ** (i + alpha) * (1 - x) ** beta, (0.0, 1.0),
                                name=f"jacobi{i}") for i in range(n))


# ---------------------------------------------------------------------------
# deterministic radial part
# ---------------------------------------------------------------------------

def _atom_check(cls, lam):
    cls = as_class(cls)
    a = _atom_locations(cls, lam)
    if a.shape != (cls.rank,):
        raise DomainError(f"{cls} needs a radial vector of length {cls.rank}")
    d = delta(cls, a)
    if d == 0:
        raise DomainError(f"degenerate atomic measure: Delta(|lambda|) = 0 for {list(lam)}")
    return a, 1.0 / d


def _atom_tail(a, i, y):
    """``[delta_a]^{-i}(y) = (a - y)^(i-1) / (i-1)! 1_{y<a}`` for ``i >= 1``."""
    y = np.asarray(y, dtype=float)
    return np.where(y < a, np.maximum(a - y, 0.0) ** (i - 1) / factorial(i - 1), 0.0)


def _atom_slot(cls, a, k, order, z):
    z = np.asarray(z, dtype=float)

    def one(t):
        x = a.copy()
        x[k] = t
        return delta_partial(cls, k + 1, order, x)

    out = np.vectorize(one)(z)
    return out if out.ndim else float(out)


def kernel_deterministic(cls, n, lam, p, q):
    """Continuous part of the kernel when the radial part is fixed to ``lam``.

    The ``psi_k`` become atoms at ``|lambda_k|`` (at ``lambda_k`` for A).
    When ``phi(r) = 0`` the ``y``-dependence is purely atomic; that part is
    reported by :func:`deterministic_atoms` and the value here is the
    transition term alone.
    """
    cls = as_class(cls, n)
    a, alpha = _atom_check(cls, lam)
    (r, y), (s, z) = p, q
    i, m = phi_level(cls, r=r), phi_level(cls, r=s)
    total = transition_term(cls, cls.rank, r, s, y, z)
    if i > 0:
        for k in range(cls.rank):
            total = total + alpha * _atom_tail(a[k], i, y) * _atom_slot(cls, a, k, m, z)
    return _mask_half_line(cls, total, y, z)


def deterministic_atoms(cls, n, lam, r, q):
    """Atomic part in ``y`` at level ``r``: list of ``(location, weight(z))``.

    Empty unless ``phi(r) = 0``; then ``R((r, dy), (s, z)) = sum_k w_k(z) delta_{a_k}(dy)``.
    """
    cls = as_class(cls, n)
    a, alpha = _atom_check(cls, lam)
    s, z = q
    if phi_level(cls, r=r) > 0:
        return []
    m = phi_level(cls, r=s)
    return [(float(a[k]), alpha * _atom_slot(cls, a, k, m, z)) for k in range(cls.rank)]


def deterministic_spec(cls, lam, n=None):
    cls = as_class(cls, n)
    _atom_check(cls, lam)
    return KernelSpec(cls, atoms=np.asarray(lam, dtype=float))


# ---------------------------------------------------------------------------
# the semi-infinite antisymmetric Gaussian kernel
# ---------------------------------------------------------------------------

_TAIL = MonomialGaussianWeight(0, WHOLE_LINE)


def gaussian_tail(q, y):
    """``int_y^inf (x - y)^q / q! exp(-x^2) dx``."""
    return _TAIL.iterated(q + 1, y)


def kernel_corollary(p, q, variant="literal"):
    """Kernel of the positive minor eigenvalues of an infinite antisymmetric Gaussian matrix.

    ``variant="literal"`` evaluates the three sums exactly as stated: the
    second sum runs over ``i = 0 .. [(r+1)/2] ^ [(s+1)/2]``. ``variant="reconciled"``
    drops the ``i = 0`` summand and doubles the second and third sums, the
    two changes needed to reproduce the finite-``n`` class B kernel of
    :func:`gaussian_spec` (which uses the half-line normalisation
    ``int_0^inf h_j h_k exp(-x^2) = delta_jk / 2`` for ``j + k`` even).
    """
    if variant not in ("literal", "reconciled"):
        raise DomainError(f"unknown variant {variant!r}")
    (r, y), (s, z) = p, q
    if r < 1 or s < 1:
        raise DomainError("levels start at 1")
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if r < s:
        d = z - y
        first = np.where(d > 0, -np.maximum(d, 0.0) ** (s - r - 1) / factorial(s - r - 1), 0.0)
        if s - r == 1:
            first = np.where(d >= 0, -1.0, 0.0)
    else:
        first = np.zeros(np.broadcast(y, z).shape)
    lo = 0 if variant == "literal" else 1
    scale = 1.0 if variant == "literal" else 2.0
    second = 0.0
    for i in range(lo, min((r + 1) // 2, (s + 1) // 2) + 1):
        c = sqrt(2.0 ** r * factorial(r - 2 * i + 1)) / sqrt(2.0 ** s * factorial(s - 2 * i + 1))
        second = second + c * hermite_normalized(s - 2 * i + 1, z) * hermite_normalized(
            r - 2 * i + 1, y) * np.exp(-y * y)
    third = 0.0
    for i in range((r + 1) // 2 + 1, (s + 1) // 2 + 1):
        j = s - 2 * i + 1
        third = third + hermite_normalized(j, z) / sqrt(2.0 ** j * factorial(j) * sqrt(pi)) \
            * gaussian_tail(2 * i - r - 2, y)
    out = first + scale * (second + third)
    out = np.where((y >= 0) & (z >= 0), out, 0.0)
    return out if np.ndim(out) else float(out)


def reconcile_corollary(n=3, levels=(1, 2), grid=None, tol=1e-5):
    """Compare both corollary variants with the finite-``n`` class B Gaussian kernel.

    Returns a dict with the max pointwise differences on ``grid`` over all
    level pairs, the gauge-invariant differences (diagonal values and the
    products ``R(p, q) R(q, p)``) and whether each variant agrees within ``tol``.
    The level-1 reference density ``(2/sqrt(pi)) exp(-y^2)`` is included.
    """
    if grid is None:
        grid = np.linspace(0.05, 2.5, 9)
    grid = np.asarray(grid, dtype=float)
    spec = gaussian_spec("B", n)
    Y, Z = np.meshgrid(grid, grid, indexing="ij")
    report = {"n": n, "levels": list(levels), "tolerance": tol}
    for variant in ("literal", "reconciled"):
        point = gauge = 0.0
        for r in levels:
            for s in levels:
                ref = kernel_biorthogonal(spec, (r, Y), (s, Z))
                got = kernel_corollary((r, Y), (s, Z), variant)
                point = max(point, float(np.max(np.abs(ref - got))))
                ref_t = kernel_biorthogonal(spec, (s, Z), (r, Y))
                got_t = kernel_corollary((s, Z), (r, Y), variant)
                gauge = max(gauge, float(np.max(np.abs(ref * ref_t - got * got_t))))
        density = np.max(np.abs(kernel_corollary((1, grid), (1, grid), variant)
                                - 2.0 / sqrt(pi) * np.exp(-grid ** 2)))
        report[variant] = {
            "max_pointwise_diff": point,
            "max_gauge_invariant_diff": gauge,
            "level1_density_diff": float(density),
            "agrees": bool(max(point, gauge) <= tol),
        }
    return report


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------

def trace_range(cls, L=9.0):
    cls = as_class(cls)
    return (-L, L) if cls.tag == "A" else (0.0, L)


def level_trace(kernel, cls, r, L=9.0, points=()):
    """``int R((r, y), (r, y)) dy`` over a finite window.

    ``kernel(p, q)`` is any two-point kernel callable. The window is finite
    on purpose: with monomial ``psi`` the individual summands grow
    polynomially and only cancel in the sum, so the tails are numerically
    meaningless beyond ``|y| ~ 10`` while the true integrand is negligible there.
    """
    lo, hi = trace_range(cls, L)
    return integrate(lambda t: float(kernel((r, t), (r, t))), (lo, hi), points=points,
                     epsabs=1e-11, epsrel=1e-10)
