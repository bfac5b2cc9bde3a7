"""Monte Carlo check that minor-process configurations are determinantal.

A query is a list of windows ``(level, center, width)``. Its estimator is
the mean over samples of ``prod_i N_i``, where ``N_i`` counts the points of
the sample at level ``r_i`` inside window ``i``. For windows that are
pairwise disjoint as subsets of ``levels x R`` the expectation of that
product is exactly ``int_{W_1 x ... x W_k} rho_k``, which is what
:func:`predict_correlation` computes from the kernel. The standard error is
the sample standard deviation of the product over ``sqrt(N)``.
"""

from dataclasses import dataclass, field, asdict
from math import isfinite

import numpy as np

from .classes import as_class
from .ensembles import sample_gaussian_batch
from .errors import DomainError
from .kernels import gaussian_spec, kernel_biorthogonal, trace_range
from .minors import PointConfiguration, point_levels_from_matrices
from .numerics import integrate

PREDICT_EPSABS = 1e-9
PREDICT_EPSREL = 1e-8
DEFAULT_WIDTH = 0.2
MIN_DENSITY = 0.05
Z_LIMIT = 3.0
ACCEPT_FRACTION = 0.95


@dataclass(frozen=True)
class Window:
    level: int
    center: float
    width: float

    @property
    def bounds(self):
        if not isfinite(self.width):
            return (-np.inf, np.inf)
        h = 0.5 * self.width
        return (self.center - h, self.center + h)


@dataclass(frozen=True)
class CorrelationQuery:
    windows: tuple

    def __post_init__(self):
        ws = tuple(w if isinstance(w, Window) else Window(int(w[0]), float(w[1]), float(w[2]))
                   for w in self.windows)
        object.__setattr__(self, "windows", ws)
        if not ws:
            raise DomainError("a query needs at least one window")
        for w in ws:
            if not w.width >= 0:
                raise DomainError(f"window width must be nonnegative, got {w.width}")
        for i in range(len(ws)):
            for j in range(i + 1, len(ws)):
                a, b = ws[i], ws[j]
                if a.level != b.level:
                    continue
                (a0, a1), (b0, b1) = a.bounds, b.bounds
                if a0 < b1 and b0 < a1:
                    raise DomainError(f"windows {i} and {j} overlap at level {a.level}")

    @property
    def order(self):
        return len(self.windows)

    def as_list(self):
        return [[w.level, w.center, w.width] for w in self.windows]


def _as_query(q):
    return q if isinstance(q, CorrelationQuery) else CorrelationQuery(tuple(q))


# ---------------------------------------------------------------------------
# estimation
# ---------------------------------------------------------------------------

def _level_counts(levels, w):
    lo, hi = w.bounds
    arr = levels.get(w.level)
    if arr is None:
        return None
    return ((arr >= lo) & (arr <= hi)).sum(axis=1)


def _as_level_arrays(samples):
    if isinstance(samples, dict):
        return samples, None
    return None, list(samples)


def query_statistics(levels, query):
    """Per-sample products of window counts and the indicator of any window holding 2+ points."""
    n = len(next(iter(levels.values())))
    prod = np.ones(n)
    multi = np.zeros(n, dtype=bool)
    for w in query.windows:
        c = _level_counts(levels, w)
        if c is None:
            return np.zeros(n), multi
        if w.width == 0:
            c = np.zeros(n)
        prod = prod * c
        multi |= c >= 2
    return prod, multi


def estimate_correlation(samples, query):
    """``(estimate, stderr)`` of ``E prod_i N(W_i)``.

    ``samples`` is a list of :class:`PointConfiguration` or a dict
    ``{level: array (N, count)}`` of level locations.
    """
    query = _as_query(query)
    levels, configs = _as_level_arrays(samples)
    if configs is not None:
        if not configs:
            raise DomainError("no samples")
        vals = []
        for cfg in configs:
            p = 1.0
            for w in query.windows:
                lo, hi = w.bounds
                pts = cfg.at_level(w.level) if isinstance(cfg, PointConfiguration) else cfg[w.level]
                p *= 0.0 if w.width == 0 else float(np.sum((np.asarray(pts) >= lo) & (np.asarray(pts) <= hi)))
            vals.append(p)
        vals = np.asarray(vals)
    else:
        vals, _ = query_statistics(levels, query)
    N = len(vals)
    se = float(np.std(vals, ddof=1) / np.sqrt(N)) if N > 1 else float("inf")
    return float(np.mean(vals)), se


# ---------------------------------------------------------------------------
# prediction
# ---------------------------------------------------------------------------

def _gauss_rule(a, b, cuts, panel=0.5, order=20):
    """Composite Gauss-Legendre nodes on ``[a, b]`` split at ``cuts``."""
    u, w = np.polynomial.legendre.leggauss(order)
    edges = sorted({a, b, *[c for c in cuts if a < c < b]})
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = max(1, int(np.ceil((hi - lo) / panel)))
        e = np.linspace(lo, hi, m + 1)
        for p0, p1 in zip(e[:-1], e[1:]):
            nodes.append(0.5 * (p1 - p0) * u + 0.5 * (p1 + p0))
            weights.append(0.5 * (p1 - p0) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def predict_correlation(kernel, query, cls=None, cutoff=9.0, vectorized=True):
    """``int_{W_1 x ... x W_k} det[R(p_i, p_j)] dy`` by quadrature.

    ``kernel(p, q)`` evaluates ``R``; with ``vectorized`` it must broadcast
    over array locations. Outer variables use adaptive quadrature, the
    innermost one a composite Gauss-Legendre rule (exact to rounding for
    the smooth pieces here). Every integral is split at the outer
    variables, where the transition part of ``R`` jumps. Infinite window
    ends are cut at ``trace_range(cls, cutoff)``.
    """
    query = _as_query(query)
    lo_cut, hi_cut = trace_range(cls, cutoff) if cls is not None else (-cutoff, cutoff)
    windows = query.windows
    if any(w.width == 0 for w in windows):
        return 0.0
    bounds = [(max(w.bounds[0], lo_cut), min(w.bounds[1], hi_cut)) for w in windows]
    if any(b <= a for a, b in bounds):
        return 0.0
    k = len(windows)

    def rho(ys, t):
        # determinant with the last location running over the array t
        pts = [(w.level, y) for w, y in zip(windows, ys)] + [(windows[-1].level, t)]
        A = np.empty((k, k, len(t)))
        for i, p in enumerate(pts):
            for j, q in enumerate(pts):
                A[i, j] = np.broadcast_to(kernel(p, q), t.shape)
        return np.linalg.det(np.moveaxis(A, -1, 0))

    def rho_scalar(ys, t):
        return np.array([rho_loop(ys + (float(v),)) for v in t])

    def rho_loop(ys):
        pts = [(w.level, y) for w, y in zip(windows, ys)]
        A = np.array([[float(kernel(p, q)) for q in pts] for p in pts])
        return float(np.linalg.det(A))

    inner = rho if vectorized else rho_scalar

    def nested(i, ys):
        a, b = bounds[i]
        if i == k - 1:
            t, w = _gauss_rule(a, b, ys)
            return float(np.dot(inner(ys, t), w))
        return integrate(lambda v: nested(i + 1, ys + (v,)), (a, b), points=ys,
                         epsabs=PREDICT_EPSABS, epsrel=PREDICT_EPSREL)

    return nested(0, ())


# ---------------------------------------------------------------------------
# sampling pipeline and reports
# ---------------------------------------------------------------------------

def sample_levels(cls, count, rng):
    """Level locations of ``count`` Gaussian minor-process samples."""
    cls = as_class(cls)
    return point_levels_from_matrices(cls, sample_gaussian_batch(cls, count, rng))


@dataclass
class QueryResult:
    windows: list
    estimate: float
    stderr: float
    predicted: float
    z: float
    multi_hit: float


@dataclass
class ComparisonReport:
    cls: str
    n: int
    sample_count: int
    seed: object
    results: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    z_limit: float = Z_LIMIT
    accept_fraction: float = ACCEPT_FRACTION

    @property
    def max_abs_z(self):
        return max((abs(r.z) for r in self.results), default=0.0)

    @property
    def fraction_within(self):
        if not self.results:
            return 0.0
        return sum(abs(r.z) <= self.z_limit for r in self.results) / len(self.results)

    @property
    def accepted(self):
        return self.fraction_within >= self.accept_fraction

    def to_dict(self):
        return {
            "class": self.cls,
            "n": self.n,
            "sampleCount": self.sample_count,
            "seed": self.seed,
            "tolerances": self.tolerances,
            "maxAbsZ": self.max_abs_z,
            "zLimit": self.z_limit,
            "acceptFraction": self.accept_fraction,
            "fractionWithin": self.fraction_within,
            "accepted": self.accepted,
            "queries": [asdict(r) for r in self.results],
        }


def _z(est, se, pred):
    diff = est - pred
    if se > 0:
        return diff / se
    return 0.0 if abs(diff) <= 1e-6 else float("inf") * np.sign(diff)


def compare(cls, n, sample_count, queries, seed=0, kernel=None, chunk=50000, workers=1,
            z_limit=Z_LIMIT, accept_fraction=ACCEPT_FRACTION):
    """Sample, estimate every query, predict it from the kernel and report.

    Samples are drawn in chunks from independent streams spawned from
    ``seed`` and reduced on the fly, so memory stays bounded. ``workers > 1``
    distributes chunks over processes; the result does not depend on it.
    """
    cls = as_class(cls, n)
    queries = [_as_query(q) for q in queries]
    if not queries:
        raise DomainError("query set is empty")
    if kernel is None:
        spec = gaussian_spec(cls)
        kernel = lambda p, q: kernel_biorthogonal(spec, p, q)  # noqa: E731
    sizes = [min(chunk, sample_count - i) for i in range(0, sample_count, chunk)]
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(cls.tag, cls.rank, size, s, queries) for size, s in zip(sizes, seeds)]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_chunk_sums, jobs))
    else:
        parts = [_chunk_sums(j) for j in jobs]
    sums = np.sum([p for p in parts], axis=0) if parts else np.zeros((len(queries), 3))
    report = ComparisonReport(str(cls), cls.rank, sample_count, seed,
                              tolerances={"predictEpsabs": PREDICT_EPSABS,
                                          "predictEpsrel": PREDICT_EPSREL},
                              z_limit=z_limit, accept_fraction=accept_fraction)
    N = sample_count
    for q, (s1, s2, m) in zip(queries, sums):
        mean = s1 / N if N else 0.0
        var = (s2 - N * mean * mean) / (N - 1) if N > 1 else 0.0
        se = float(np.sqrt(max(var, 0.0) / N)) if N else float("inf")
        pred = predict_correlation(kernel, q, cls)
        report.results.append(QueryResult(q.as_list(), float(mean), se, float(pred),
                                          float(_z(mean, se, pred)), float(m / N) if N else 0.0))
    return report


def _chunk_sums(job):
    tag, n, size, seed, queries = job
    rng = np.random.default_rng(seed)
    levels = sample_levels(as_class(tag, n), size, rng)
    out = np.zeros((len(queries), 3))
    for i, q in enumerate(queries):
        prod, multi = query_statistics(levels, q)
        out[i] = (prod.sum(), (prod * prod).sum(), multi.sum())
    return out


def default_queries(cls, n=None, kernel=None, count=20, width=DEFAULT_WIDTH, grid_step=0.05):
    """Deterministic query set over every level.

    Half are one-window queries, the rest pairs: two disjoint windows on a
    level holding at least two points, or overlapping windows on
    neighbouring levels. Windows sit where the one-point density is at least
    ``MIN_DENSITY`` over the whole window, and a pair is kept only when its
    mean predicted two-point density is at least ``MIN_DENSITY`` too.
    """
    cls = as_class(cls, n)
    if kernel is None:
        spec = gaussian_spec(cls)
        kernel = lambda p, q: kernel_biorthogonal(spec, p, q)  # noqa: E731
    lo = -4.0 if cls.tag == "A" else 0.0
    grid = np.round(np.arange(lo, 4.0 + 1e-12, grid_step), 10)
    good = {}
    for r in cls.levels():
        dens = np.asarray(kernel((r, grid), (r, grid)), dtype=float)
        ok = dens >= MIN_DENSITY
        half = int(np.ceil(0.5 * width / grid_step))
        inner = np.array([ok[max(i - half, 0):i + half + 1].all() and i - half >= 0
                          and i + half < len(grid) for i in range(len(grid))])
        good[r] = grid[inner]
    levels = [r for r in cls.levels() if good[r].size]
    if not levels:
        raise DomainError("no level has a one-point density above the threshold")

    def spread(c, m):
        return [float(c[int(round(x))]) for x in np.linspace(0, len(c) - 1, m + 2)[1:-1]]

    pairs = []
    multi = [r for r in levels if cls.level_count(r) >= 2]
    for r in multi:
        for t in spread(good[r], 6):
            for gap in (1.5 * width, 3 * width, 5 * width):
                if t + gap <= good[r].max():
                    pairs.append(CorrelationQuery(((r, t, width), (r, t + gap, width))))
                    break
    for r, s in zip(levels[:-1], levels[1:]):
        for t in spread(good[r], 6):
            u = float(good[s][np.argmin(np.abs(good[s] - t))])
            pairs.append(CorrelationQuery(((s, u, width), (r, t, width))))
    kept = [q for q in pairs
            if predict_correlation(kernel, q, cls) >= MIN_DENSITY * width ** 2]
    if len(kept) > count // 2:
        kept = [kept[int(round(x))] for x in np.linspace(0, len(kept) - 1, count // 2)]
    want = count - len(kept)
    per = -(-want // len(levels))
    singles = []
    for r in levels:
        singles += [CorrelationQuery(((r, t, width),)) for t in spread(good[r], per)]
    singles = [singles[int(round(x))] for x in np.linspace(0, len(singles) - 1, want)]
    return singles + kept
