"""Eynard-Mehta construction for interlaced configurations of odd orthogonal type.

Levels run over ``1..2n`` with ``ceil(r/2)`` points at level ``r``. The
transition functions ``phi_0, ..., phi_{2n-1}`` map level ``r`` to level
``r + 1``; level 0 consists of the fixed anchors ``a_1, ..., a_n``, with
``phi_{2l-2}(a_l, .)`` feeding level ``2l - 1``. Every ``phi_r(x, y)`` must
accept broadcasting numpy arrays.

One-variable functions (the transported ``psi`` and the row functions
``phi_{2l-2} * phi^{(2l-1, s)}(a_l, .)``) are tabulated on a uniform grid of
``[0, L]`` and interpolated by cubic splines; each tabulated integral is a
composite Gauss-Legendre rule split at ``z = x``, where indicator-type
transition functions have their kink. The grid is refined until tabulated
values move by less than ``tol``. Two-variable chains ``phi^{(r, s)}`` are
evaluated by nested adaptive quadrature.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError, DomainError, NumericError, SingularityError
from .numerics import integrate

DEFAULT_CUTOFF = 8.0
GRID_TOL = 1e-8
CONDITION_LIMIT = 1e12


def indicator(x, y):
    """``1_{y >= x}``."""
    return (np.asarray(y) >= np.asarray(x)).astype(float)


def convolve(f, g, upper=np.inf, epsabs=1e-10):
    """``(f * g)(x, y) = int_0^upper f(x, z) g(z, y) dz`` as a callable.

    The integral is split at ``z = x`` and ``z = y``.
    """

    def h(x, y):
        x, y = float(x), float(y)
        return integrate(lambda z: float(f(x, z) * g(z, y)), (0.0, upper), points=(x, y),
                         epsabs=epsabs, epsrel=1e-10)

    return h


def _gauss_panels(panels, order):
    """Composite Gauss-Legendre nodes and weights on ``[0, 1]``."""
    u, w = np.polynomial.legendre.leggauss(order)
    u, w = 0.5 * (u + 1.0), 0.5 * w
    edges = np.linspace(0.0, 1.0, panels + 1)
    h = np.diff(edges)
    nodes = (edges[:-1, None] + h[:, None] * u[None, :]).ravel()
    weights = (h[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class ChainSpec:
    """Inputs of the construction.

    ``phis`` holds ``phi_0, ..., phi_{2n-1}``; ``psi`` holds ``psi_1..psi_n``
    (vectorised callables on the half line); ``anchors`` the ``n`` fixed
    points, zero by default.
    """

    n: int
    phis: tuple
    psi: tuple
    anchors: tuple = None
    cutoff: float = DEFAULT_CUTOFF
    tol: float = GRID_TOL
    start_nodes: int = 200
    max_nodes: int = 6400
    name: str = field(default="", compare=False)

    def __post_init__(self):
        n = self.n
        if n < 1:
            raise ConfigError("n must be at least 1", "n")
        if len(self.phis) != 2 * n:
            raise ConfigError(f"need phi_0..phi_{2 * n - 1} ({2 * n} functions), got {len(self.phis)}",
                              "phis")
        if len(self.psi) != n:
            raise ConfigError(f"need {n} psi functions, got {len(self.psi)}", "psi")
        anchors = (0.0,) * n if self.anchors is None else tuple(float(a) for a in self.anchors)
        if len(anchors) != n:
            raise ConfigError(f"need {n} anchors", "anchors")
        object.__setattr__(self, "phis", tuple(self.phis))
        object.__setattr__(self, "psi", tuple(self.psi))
        object.__setattr__(self, "anchors", anchors)

    def __hash__(self):
        return id(self)

    @property
    def num_levels(self):
        return 2 * self.n

    def check_level(self, r):
        if not 1 <= r <= 2 * self.n:
            raise DomainError(f"level {r} out of range 1..{2 * self.n}")

    # -- tabulation ---------------------------------------------------------

    def _tabulate(self, nodes, panels, order):
        n, L = self.n, self.cutoff
        x = np.linspace(0.0, L, nodes)
        u, w = _gauss_panels(panels, order)
        # left part [0, x_i] and right part [x_i, L] for every grid node
        zl = x[:, None] * u[None, :]
        wl = x[:, None] * w[None, :]
        zr = x[:, None] + (L - x[:, None]) * u[None, :]
        wr = (L - x[:, None]) * w[None, :]

        def forward(phi, f):
            # int phi(x_i, z) f(z) dz
            return (phi(x[:, None], zl) * f(zl) * wl).sum(1) + (phi(x[:, None], zr) * f(zr) * wr).sum(1)

        def backward(f, phi):
            # int f(z) phi(z, x_i) dz
            return (f(zl) * phi(zl, x[:, None]) * wl).sum(1) + (f(zr) * phi(zr, x[:, None]) * wr).sum(1)

        transported = {}
        for k in range(n):
            f = self.psi[k]
            transported[(2 * n, k)] = np.asarray(f(x), dtype=float)
            for r in range(2 * n - 1, 0, -1):
                spline = CubicSpline(x, transported[(r + 1, k)])
                transported[(r, k)] = forward(self.phis[r], spline)
        rows = {}
        for l in range(1, n + 1):
            a = self.anchors[l - 1]
            rows[(l, 2 * l - 1)] = np.asarray(self.phis[2 * l - 2](a, x), dtype=float)
            for t in range(2 * l - 1, 2 * n):
                spline = CubicSpline(x, rows[(l, t)])
                rows[(l, t + 1)] = backward(spline, self.phis[t])
        return x, transported, rows

    @cached_property
    def tables(self):
        """Converged grid, transported psi and row function tables."""
        nodes, panels, order = self.start_nodes, 16, 8
        prev = self._tabulate(nodes, panels, order)
        while True:
            nodes, panels = 2 * nodes - 1, 2 * panels
            cur = self._tabulate(nodes, panels, order)
            change = 0.0
            for key in prev[1]:
                change = max(change, np.max(np.abs(cur[1][key][::2] - prev[1][key])))
            for key in prev[2]:
                scale = max(1.0, np.max(np.abs(prev[2][key])))
                change = max(change, np.max(np.abs(cur[2][key][::2] - prev[2][key])) / scale)
            if change < self.tol:
                return cur
            if nodes > self.max_nodes:
                raise NumericError("tabulation did not converge", None, change)
            prev = cur

    @cached_property
    def splines(self):
        x, transported, rows = self.tables
        return ({key: CubicSpline(x, v) for key, v in transported.items()},
                {key: CubicSpline(x, v) for key, v in rows.items()})

    def _check_points(self, *pts):
        for p in pts:
            p = np.asarray(p)
            if np.any(p < 0) or np.any(p > self.cutoff):
                raise DomainError(f"points must lie in [0, {self.cutoff}]")

    def transported(self, r, k, x):
        """Tabulated ``psi^r_{r-k}`` for 1-based ``k``."""
        self._check_points(x)
        return self.splines[0][(r, k - 1)](x)

    def row_function(self, l, s, y):
        """``phi_{2l-2} * phi^{(2l-1, s)}(a_l, y)``; zero when ``s < 2l - 1``."""
        self._check_points(y)
        if s < 2 * l - 1:
            return np.zeros(np.shape(y))
        return self.splines[1][(l, s)](y)


def indicator_chain(n, psi, anchors=None, **kw):
    """Chain with ``phi_r(x, y) = 1_{y >= x}`` for every ``r``."""
    return ChainSpec(n, (indicator,) * (2 * n), tuple(psi), anchors, **kw)


def phi_chain(spec, r, s, x, y):
    """``phi^{(r, s)}(x, y) = (phi_r * ... * phi_{s-1})(x, y)``, zero unless ``r < s``."""
    if r >= s:
        return 0.0
    if s == r + 1:
        return float(spec.phis[r](x, y))
    inner = lambda z, t: phi_chain(spec, r + 1, s, z, t)  # noqa: E731
    return convolve(spec.phis[r], inner, upper=spec.cutoff)(x, y)


def transported_psi(spec, r, k, x):
    """``psi^r_{r-k}(x) = int phi^{(r, 2n)}(x, y) psi_k(y) dy`` (``psi_k`` itself at ``r = 2n``)."""
    spec.check_level(r)
    if not 1 <= k <= spec.n:
        raise DomainError(f"k = {k} out of range 1..{spec.n}")
    if r == 2 * spec.n:
        return spec.psi[k - 1](np.asarray(x, dtype=float))
    return spec.transported(r, k, x)


@dataclass(frozen=True)
class GramMatrix:
    matrix: np.ndarray
    inverse: np.ndarray
    condition: float


def gram_matrix(spec):
    """``M_ij = int phi_{2i-2} * phi^{(2i-1, 2n)}(a_i, x) psi_j(x) dx`` and its inverse."""
    cache = spec.__dict__.get("_gram")
    if cache is not None:
        return cache
    x, _, rows = spec.tables
    n = spec.n
    M = np.empty((n, n))
    for i in range(1, n + 1):
        g = spec.splines[1][(i, 2 * n)]
        for j in range(n):
            M[i - 1, j] = integrate(lambda t: float(g(t) * spec.psi[j](np.float64(t))),
                                    (0.0, spec.cutoff), epsabs=1e-13, epsrel=1e-11)
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularityError("Gram matrix is numerically singular", M, cond)
    out = GramMatrix(M, np.linalg.inv(M), cond)
    spec.__dict__["_gram"] = out
    return out


def em_kernel(spec, p, q):
    """``K((r, x), (s, y)) = -phi^{(r,s)}(x, y) + sum_k psi^r_{r-k}(x) sum_{l <= [(s+1)/2]} (M^-1)_kl row_l^s(y)``."""
    (r, x), (s, y) = p, q
    spec.check_level(r)
    spec.check_level(s)
    Minv = gram_matrix(spec).inverse
    total = -phi_chain(spec, r, s, x, y) if r < s else 0.0
    for k in range(1, spec.n + 1):
        tk = transported_psi(spec, r, k, x)
        for l in range(1, (s + 1) // 2 + 1):
            total = total + tk * Minv[k - 1, l - 1] * spec.row_function(l, s, y)
    return float(total) if np.ndim(total) == 0 else total


def em_one_point(spec, r, x):
    """``K((r, x), (r, x))``, vectorised in ``x``."""
    return em_kernel(spec, (r, np.asarray(x, dtype=float)), (r, np.asarray(x, dtype=float)))


def em_trace(spec, r):
    """``int_0^L K((r, x), (r, x)) dx``."""
    return integrate(lambda t: float(em_one_point(spec, r, t)), (0.0, spec.cutoff),
                     epsabs=1e-10, epsrel=1e-10)
