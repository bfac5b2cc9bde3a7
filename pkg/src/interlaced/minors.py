"""Main minors, radial parts, minor sequences and interlaced point configurations."""

from dataclasses import dataclass

import numpy as np

from .classes import MatrixClass, as_class, chamber_violation, in_closed_chamber  # noqa: F401
from .ensembles import StructuredHermitian
from .errors import DomainError, StructuralError
from .numerics import hermitian_eigenvalues, pfaffian_sign


@dataclass(frozen=True)
class RadialPart:
    cls: MatrixClass
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))


@dataclass(frozen=True)
class MinorSequence:
    """Radial parts of the main minors at the orders prescribed for the class.

    A: orders 1..n; B: 2..2n+1; C: 2, 4, ..., 2n; D: 2..2n.
    """

    cls: MatrixClass
    orders: tuple
    parts: tuple

    def __getitem__(self, order):
        try:
            return self.parts[self.orders.index(order)]
        except ValueError:
            raise KeyError(order) from None

    def as_levels(self):
        """Gelfand-Cetlin levels ``x^(1), x^(2), ...`` matching this sequence.

        For A, B and D level ``i`` is the ``i``-th entry; for C the odd
        levels are absent and the list is indexed by even level ``2i``.
        """
        return [p.values for p in self.parts]


@dataclass(frozen=True)
class PointConfiguration:
    """Finite set of points ``(level, location)``."""

    points: tuple

    def at_level(self, r):
        return np.array([y for (lev, y) in self.points if lev == r])

    def level_counts(self):
        counts = {}
        for lev, _ in self.points:
            counts[lev] = counts.get(lev, 0) + 1
        return counts


def minor_orders(cls):
    cls = as_class(cls)
    n = cls.rank
    if cls.tag == "A":
        return tuple(range(1, n + 1))
    if cls.tag == "B":
        return tuple(range(2, 2 * n + 2))
    if cls.tag == "C":
        return tuple(range(2, 2 * n + 1, 2))
    return tuple(range(2, 2 * n + 1))


def minor_class(cls, m):
    """Class of the main minor of order ``m`` of a matrix of class ``cls``."""
    cls = as_class(cls)
    if not 1 <= m <= cls.ambient_dim:
        raise DomainError(f"minor order {m} out of range 1..{cls.ambient_dim}")
    if cls.tag == "A":
        return MatrixClass("A", m)
    if cls.tag == "C":
        if m % 2:
            raise DomainError("odd-order minors of class C matrices have no classical type")
        return MatrixClass("C", m // 2)
    return MatrixClass("B", (m - 1) // 2) if m % 2 else MatrixClass("D", m // 2)


def main_minor(M, m):
    """Top-left ``m x m`` block of ``M``, tagged with its inherited class."""
    return StructuredHermitian(minor_class(M.cls, m), M.entries[:m, :m])


def radial_part(M, tol=1e-10):
    """Radial part of a class-tagged Hermitian matrix.

    A: decreasing eigenvalues. B, C: decreasing positive eigenvalues. D:
    decreasing moduli with the last entry signed so that the orbit meets the
    closed chamber at ``D(x)``; since ``Pf(A_x) = (-1)^n prod x_k`` for the
    representative and the Pfaffian is invariant under SO(2n), the sign is
    ``(-1)^n sign Pf(-i M)``.
    """
    msg = M.violation(tol)
    if msg is not None:
        raise StructuralError(f"{M.cls} invariant violated: {msg}")
    cls = M.cls
    n = cls.rank
    if n == 0:
        return RadialPart(cls, np.zeros(0))
    w = hermitian_eigenvalues(M.entries, tol=tol * max(1.0, np.max(np.abs(M.entries))))
    if cls.tag == "A":
        return RadialPart(cls, w)
    v = np.abs(w[:n])
    if cls.tag == "D":
        s = pfaffian_sign((-1j * M.entries).real)
        if s == 0:
            s = 1
        v[-1] *= (-1) ** n * s
    return RadialPart(cls, v)


def minor_sequence(M):
    cls = M.cls
    orders = minor_orders(cls)
    parts = tuple(radial_part(main_minor(M, m)) for m in orders)
    return MinorSequence(cls, orders, parts)


def to_point_configuration(seq):
    """Point configuration ``xi_nu`` built from a minor sequence.

    A: ``(i, Lambda^(i)_j)``; B: ``(i, |Lambda^(i+1)_j|)``, i = 1..2n;
    C: ``(i, Lambda^(2i)_j)``, i = 1..n; D: ``(i, |Lambda^(i+1)_j|)``, i = 1..2n-1.
    """
    cls = seq.cls
    pts = []
    for level in cls.levels():
        if cls.tag == "A":
            vals = seq[level].values
        elif cls.tag == "C":
            vals = seq[2 * level].values
        else:
            vals = np.abs(seq[level + 1].values)
        pts.extend((level, float(y)) for y in vals)
    return PointConfiguration(tuple(pts))


# ---------------------------------------------------------------------------
# batched path used by the Monte Carlo verifier
# ---------------------------------------------------------------------------

def level_minor_order(cls, r):
    """Order of the main minor whose spectrum gives level ``r`` of ``xi_nu``."""
    cls = as_class(cls)
    cls.check_level(r)
    return {"A": r, "B": r + 1, "C": 2 * r, "D": r + 1}[cls.tag]


def point_levels_from_matrices(cls, H):
    """Level locations of ``xi_nu`` for a stack of matrices ``H`` of shape (N, d, d).

    Returns ``{level: array (N, count)}`` with locations decreasing along the
    last axis. Only moduli are needed for B, C and D, so no Pfaffian is taken.
    """
    cls = as_class(cls)
    out = {}
    for r in cls.levels():
        m = level_minor_order(cls, r)
        sub = H[:, :m, :m]
        w = np.linalg.eigvalsh(sub)[:, ::-1]
        out[r] = np.abs(w[:, : cls.level_count(r)]) if cls.tag != "A" else w
    return out
