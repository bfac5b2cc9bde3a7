"""Gelfand-Cetlin cones of types A/B/C/D and uniform sampling on them.

Level ``k`` of a pattern is stored at ``levels[k - 1]``; the top (first)
line is the last level: ``x^(n)`` for A, ``x^(2n)`` for B and C and
``x^(2n-1)`` for D. Level ``k`` has length ``k`` for A and ``ceil(k/2)``
otherwise.

For B and D the last coordinate of every odd level is sign-free and the
interlacing is imposed on moduli. A D pattern extends to a B pattern
(some ``x^(2n)`` with ``x^(2n) >= |x^(2n-1)|``) exactly when its top line
satisfies ``x_1 >= ... >= x_{n-1} >= |x_n|``: take ``x^(2n) = |x^(2n-1)|``.
So GC_d membership is the B-type interlacing of the given levels plus that
chamber condition on the top line.
"""

from dataclasses import dataclass

import numpy as np

from .classes import MatrixClass, as_class, chamber_violation
from .errors import DomainError

SLACK = 1e-10
BURN_IN = 50
THIN = 5


@dataclass(frozen=True)
class GCPattern:
    cls: MatrixClass
    levels: tuple

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(np.asarray(v, dtype=float) for v in self.levels))

    @property
    def top(self):
        return self.levels[-1]

    def level(self, k):
        return self.levels[k - 1]

    def coordinates(self):
        return np.concatenate(self.levels) if self.levels else np.zeros(0)


# ---------------------------------------------------------------------------
# layout
# ---------------------------------------------------------------------------

def num_pattern_levels(cls):
    cls = as_class(cls)
    n = cls.rank
    return {"A": n, "B": 2 * n, "C": 2 * n, "D": 2 * n - 1}[cls.tag]


def level_length(cls, k):
    cls = as_class(cls)
    return k if cls.tag == "A" else (k + 1) // 2


def signed_slot(cls, k):
    """1-based slot of level ``k`` whose sign is free, or None."""
    cls = as_class(cls)
    if cls.tag in ("B", "D") and k % 2 == 1:
        return (k + 1) // 2
    return None


def _modulus(cls, k, x):
    j = signed_slot(cls, k)
    if j is None:
        return x
    x = np.array(x, dtype=float, copy=True)
    x[..., j - 1] = np.abs(x[..., j - 1])
    return x


def interlaces(x, y, tol=0.0):
    """``x >= y`` in the interlacing order: x_1 >= y_1 >= x_2 >= ... (weak).

    ``y`` has the length of ``x`` or one less.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(y) not in (len(x), len(x) - 1):
        raise DomainError(f"cannot interlace lengths {len(x)} and {len(y)}")
    return _first_interlace_violation(x, y, tol) is None


def _first_interlace_violation(x, y, tol):
    for i in range(len(y)):
        if x[i] < y[i] - tol:
            return f"x_{i + 1} >= y_{i + 1}"
        if i + 1 < len(x) and y[i] < x[i + 1] - tol:
            return f"y_{i + 1} >= x_{i + 2}"
    return None


def validate(pattern, tol=SLACK):
    """Check cone membership. Returns ``(ok, first_violation_or_None)``."""
    cls = pattern.cls
    L = num_pattern_levels(cls)
    if len(pattern.levels) != L:
        raise DomainError(f"{cls} patterns have {L} levels, got {len(pattern.levels)}")
    for k, x in enumerate(pattern.levels, start=1):
        if x.shape != (level_length(cls, k),):
            raise DomainError(f"level {k} of a {cls} pattern must have length {level_length(cls, k)}")
    if cls.tag != "A":
        for k, x in enumerate(pattern.levels, start=1):
            j = signed_slot(cls, k)
            body = np.delete(x, j - 1) if j is not None else x
            if np.any(body < -tol):
                return False, f"level {k}: negative coordinate"
    if cls.tag == "D":
        msg = chamber_violation("D", pattern.top, tol)
        if msg is not None:
            return False, f"top line outside the D chamber ({msg})"
    for k in range(2, L + 1):
        upper = _modulus(cls, k, pattern.level(k))
        lower = _modulus(cls, k - 1, pattern.level(k - 1))
        msg = _first_interlace_violation(upper, lower, tol)
        if msg is not None:
            return False, f"levels {k}/{k - 1}: {msg}"
    return True, None


# ---------------------------------------------------------------------------
# coordinate ranges (vectorised over leading axes)
# ---------------------------------------------------------------------------

def _bounds(cls, levels, k, j):
    """Bounds ``lo <= t <= hi`` on the modulus (or value) of ``x^(k)_j``."""
    shape = levels[0].shape[:-1]
    lo = np.full(shape, -np.inf)
    hi = np.full(shape, np.inf)
    if cls.tag != "A":
        lo[...] = 0.0
    if k >= 2:
        lower = _modulus(cls, k - 1, levels[k - 2])
        if j <= lower.shape[-1]:
            lo = np.maximum(lo, lower[..., j - 1])
        if 2 <= j <= lower.shape[-1] + 1:
            hi = np.minimum(hi, lower[..., j - 2])
    if k < len(levels):
        upper = _modulus(cls, k + 1, levels[k])
        hi = np.minimum(hi, upper[..., j - 1])
        if j + 1 <= upper.shape[-1]:
            lo = np.maximum(lo, upper[..., j])
    # collapse ranges that are empty only through round-off
    hi = np.maximum(hi, lo)
    return lo, hi


def coordinate_range(pattern, level, slot):
    """Admissible values of ``x^(level)_slot`` with every other coordinate fixed.

    Returns a list of closed intervals: one interval, or two mirror-image
    intervals for a sign-free coordinate whose modulus is bounded below.
    """
    cls = pattern.cls
    L = num_pattern_levels(cls)
    if not 1 <= level < L:
        raise DomainError(f"level {level} is not a free level (top line is level {L})")
    if not 1 <= slot <= level_length(cls, level):
        raise DomainError(f"slot {slot} out of range for level {level}")
    lo, hi = _bounds(cls, pattern.levels, level, slot)
    lo, hi = float(lo), float(hi)
    if signed_slot(cls, level) == slot:
        if lo <= 0.0:
            return [(-hi, hi)]
        return [(-hi, -lo), (lo, hi)]
    return [(lo, hi)]


# ---------------------------------------------------------------------------
# Gibbs sampler
# ---------------------------------------------------------------------------

def initial_levels(cls, lam):
    """Pattern with every level the leading truncation of ``lam``."""
    cls = as_class(cls)
    lam = np.asarray(lam, dtype=float)
    L = num_pattern_levels(cls)
    return [lam[: level_length(cls, k)].copy() for k in range(1, L + 1)]


def _check_top(cls, lam):
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (cls.rank,):
        raise DomainError(f"{cls} needs a top line of length {cls.rank}")
    msg = chamber_violation(cls, lam)
    if msg is not None:
        raise DomainError(f"top line {list(lam)} outside the closed {cls.tag} chamber: {msg}")
    return lam


def free_coordinates(cls):
    """Systematic-scan order of the free (level, slot) pairs."""
    cls = as_class(cls)
    L = num_pattern_levels(cls)
    return [(k, j) for k in range(1, L) for j in range(1, level_length(cls, k) + 1)]


def _sweep(cls, levels, order, rng):
    shape = levels[0].shape[:-1]
    for k, j in order:
        lo, hi = _bounds(cls, levels, k, j)
        t = lo + (hi - lo) * rng.random(shape)
        if signed_slot(cls, k) == j:
            t = np.where(rng.random(shape) < 0.5, -t, t)
        levels[k - 1][..., j - 1] = t


def sample_uniform_batch(cls, lam, count, sweeps, rng):
    """Run ``count`` independent Gibbs chains for ``sweeps`` sweeps each.

    Every coordinate is redrawn uniformly on its full conditional support,
    so the uniform law on ``GC_nu(lam)`` is stationary. Returns a list of
    arrays, level ``k`` at index ``k - 1`` with shape ``(count, len_k)``.
    """
    cls = as_class(cls)
    lam = _check_top(cls, lam)
    if sweeps < 1:
        raise DomainError("sweeps must be at least 1")
    levels = [np.tile(v, (count, 1)) for v in initial_levels(cls, lam)]
    order = free_coordinates(cls)
    for _ in range(sweeps):
        _sweep(cls, levels, order, rng)
    return levels


def sample_uniform(cls, lam, sweeps, rng):
    """One Gibbs chain started at the truncation pattern, after ``sweeps`` sweeps."""
    cls = as_class(cls)
    levels = sample_uniform_batch(cls, lam, 1, sweeps, rng)
    return GCPattern(cls, tuple(v[0] for v in levels))


def gibbs_chain(cls, lam, num_samples, rng, burn_in=BURN_IN, thin=THIN):
    """Thinned samples from a single chain, as GCPatterns."""
    cls = as_class(cls)
    lam = _check_top(cls, lam)
    levels = [v[None, :].copy() for v in initial_levels(cls, lam)]
    order = free_coordinates(cls)
    for _ in range(burn_in):
        _sweep(cls, levels, order, rng)
    out = []
    for _ in range(num_samples):
        for _ in range(thin):
            _sweep(cls, levels, order, rng)
        out.append(GCPattern(cls, tuple(v[0].copy() for v in levels)))
    return out


def project_c(pattern):
    """Even levels ``(x^(2), x^(4), ..., x^(2n))`` of a class C pattern."""
    if pattern.cls.tag != "C":
        raise DomainError("project_c applies to class C patterns only")
    return [pattern.level(k) for k in range(2, len(pattern.levels) + 1, 2)]


def pattern_from_minor_sequence(seq):
    """Read a minor sequence as a Gelfand-Cetlin pattern (A, B, D only).

    The minor of order ``i + 1`` gives level ``i`` for B and D; the order
    ``i`` minor gives level ``i`` for A.
    """
    if seq.cls.tag == "C":
        raise DomainError("class C minor sequences only determine the even levels")
    return GCPattern(seq.cls, tuple(p.values for p in seq.parts))
