"""Type A check of the semiclassical limit of branching measures.

For ``U(m) > U(m-1)`` the restriction of the irreducible module with highest
weight ``lambda`` contains each ``beta`` interlacing ``lambda`` exactly once.
The measure ``mu = sum_beta dim(beta) / dim(lambda) delta_{eps beta}``
should approach the law of the spectrum of the ``(m-1)``-minor of
``U diag(x) U^*`` with ``U`` Haar, when ``eps lambda -> x``.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np
from scipy.stats import wasserstein_distance

from .ensembles import _phase_fix
from .errors import DomainError, NumericError

WEIGHT_SUM_TOL = 1e-9


def _integer_weight(lam):
    out = []
    for v in lam:
        if int(v) != v:
            raise DomainError(f"highest weight must be integral, got {list(lam)}")
        out.append(int(v))
    for i in range(len(out) - 1):
        if out[i] < out[i + 1]:
            raise DomainError(f"highest weight must be weakly decreasing, got {out}")
    return out


def weyl_dim_unitary(lam, m=None):
    """Dimension of the irreducible ``U(m)`` module with highest weight ``lam``."""
    lam = _integer_weight(lam)
    if m is not None and len(lam) != m:
        raise DomainError(f"U({m}) weights have length {m}, got {len(lam)}")
    m = len(lam)
    d = Fraction(1)
    for i in range(m):
        for j in range(i + 1, m):
            d *= Fraction(lam[i] - lam[j] + j - i, j - i)
    assert d.denominator == 1
    return int(d)


def interlacing_weights(lam):
    """All integer ``beta`` with ``lam_1 >= beta_1 >= lam_2 >= ... >= beta_{m-1} >= lam_m``."""
    lam = _integer_weight(lam)
    ranges = [range(lam[i + 1], lam[i] + 1) for i in range(len(lam) - 1)]
    return [tuple(b) for b in product(*ranges)]


@dataclass(frozen=True)
class DiscreteMeasure:
    """Atoms ``locations[i]`` (rows) with ``weights[i]``; exact weights kept when known."""

    locations: np.ndarray
    weights: np.ndarray
    exact_weights: tuple = ()

    def __len__(self):
        return len(self.weights)


def branching_measure_A(lam, epsilon):
    """Scaled branching measure of ``U(m) > U(m-1)`` for highest weight ``lam``."""
    lam = _integer_weight(lam)
    if len(lam) < 2:
        raise DomainError("need m >= 2")
    betas = interlacing_weights(lam)
    dim = weyl_dim_unitary(lam)
    exact = tuple(Fraction(weyl_dim_unitary(b), dim) for b in betas)
    total = sum(exact)
    if total != 1:
        raise NumericError("branching weights do not sum to one", float(total), abs(float(total) - 1))
    w = np.array([float(f) for f in exact])
    if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise NumericError("branching weights do not sum to one", w.sum(), abs(w.sum() - 1.0))
    return DiscreteMeasure(epsilon * np.array(betas, dtype=float).reshape(len(betas), -1), w, exact)


def projected_radial_law_A(x, samples, rng, chunk=20000):
    """Spectra of the ``(m-1)``-minor of ``U diag(x) U^*``, ``U`` Haar; shape ``(samples, m-1)``."""
    x = np.asarray(x, dtype=float)
    if np.any(np.diff(x) > 0):
        raise DomainError("x must be weakly decreasing")
    m = len(x)
    out = np.empty((samples, m - 1))
    done = 0
    while done < samples:
        b = min(chunk, samples - done)
        Z = (rng.standard_normal((b, m, m)) + 1j * rng.standard_normal((b, m, m))) / np.sqrt(2)
        Q, R = np.linalg.qr(Z)
        U = _phase_fix(Q, R)
        # top-left block of U diag(x) U^* only needs the first m-1 rows of U
        V = U[:, : m - 1, :]
        H = (V * x[None, None, :]) @ np.conj(np.swapaxes(V, -1, -2))
        out[done:done + b] = np.linalg.eigvalsh(H)[:, ::-1]
        done += b
    return out


def coordinate_w1(measure, sample):
    """Sum over coordinates of the 1-D Wasserstein-1 distances between marginals."""
    sample = np.asarray(sample, dtype=float)
    return float(sum(
        wasserstein_distance(measure.locations[:, j], sample[:, j], u_weights=measure.weights)
        for j in range(sample.shape[1])))


def w1_to_uniform(locations, weights):
    """Exact ``W1`` between a discrete measure on [0, 1] and Uniform[0, 1].

    ``W1 = int_0^1 |F(t) - t| dt`` with ``F`` the step distribution function.
    """
    order = np.argsort(locations)
    a = np.asarray(locations, dtype=float)[order]
    w = np.asarray(weights, dtype=float)[order]
    if a.size and (a[0] < 0 or a[-1] > 1):
        raise DomainError("atoms must lie in [0, 1]")
    edges = np.concatenate([[0.0], a, [1.0]])
    levels = np.concatenate([[0.0], np.cumsum(w)])

    def piece(c, lo, hi):
        # int_lo^hi |c - t| dt
        if hi <= lo:
            return 0.0
        if c <= lo:
            return 0.5 * ((hi - c) ** 2 - (lo - c) ** 2)
        if c >= hi:
            return 0.5 * ((c - lo) ** 2 - (c - hi) ** 2)
        return 0.5 * ((c - lo) ** 2 + (hi - c) ** 2)

    return float(sum(piece(c, lo, hi) for c, lo, hi in zip(levels, edges[:-1], edges[1:])))


def _bootstrap_se(measure, sample, reps, rng):
    vals = [coordinate_w1(measure, sample[rng.integers(0, len(sample), len(sample))])
            for _ in range(reps)]
    return float(np.std(vals, ddof=1))


def convergence_report(lambda_sequence, epsilon_sequence, x, samples, rng, bootstrap=20):
    """W1 distances between each scaled branching measure and one Monte Carlo sample.

    The same Monte Carlo sample is used for every row so the trend in ``n``
    is not blurred by independent noise. Returns a list of dict rows with
    ``n`` (row index), ``epsilon``, ``w1`` and a bootstrap standard error.
    """
    if len(lambda_sequence) != len(epsilon_sequence):
        raise DomainError("lambda and epsilon sequences differ in length")
    sample = projected_radial_law_A(x, samples, rng)
    rows = []
    for lam, eps in zip(lambda_sequence, epsilon_sequence):
        mu = branching_measure_A(lam, eps)
        d = coordinate_w1(mu, sample)
        se = _bootstrap_se(mu, sample, bootstrap, rng) if bootstrap and d > 0 else 0.0
        rows.append({"lambda": list(_integer_weight(lam)), "epsilon": float(eps), "w1": d, "stderr": se})
    return rows


def is_monotone(rows, sigmas=3.0):
    """Distances non-increasing up to ``sigmas`` combined standard errors."""
    for a, b in zip(rows[:-1], rows[1:]):
        if b["w1"] > a["w1"] + sigmas * np.hypot(a["stderr"], b["stderr"]):
            return False
    return True
