"""Command-line harness: ``interlaced <command> CONFIG.json [--seed N] [--out PATH]``.

Commands
--------
sample       CSV of point configurations, minor sequences, GC patterns or M_k spectra
kernel-grid  CSV of kernel values over a grid of (r, y, s, z)
verify       JSON comparison report; exit 0 iff the acceptance fraction holds
heckman      CSV of branching-measure distances per scale
em-check     JSON report comparing the Eynard-Mehta kernel with the class B kernel

Every output starts with ``#`` comment lines carrying the sha256 digest of the
effective configuration. Numbers are written with 17 significant digits.
Configurations are validated and all results computed before anything is
written, and files are replaced atomically.
"""

import argparse
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .classes import MatrixClass
from .ensembles import sample_fixed_orbit, sample_gaussian_batch, sample_sumC_process
from .errors import ConfigError, DomainError, NumericError, StructuralError
from .gc_cones import BURN_IN, level_length, num_pattern_levels, sample_uniform_batch
from .minors import minor_orders, minor_sequence, point_levels_from_matrices
from .ensembles import StructuredHermitian

SCHEMA_VERSION = 1
FLOAT_FMT = "%.16e"
COMMANDS = ("sample", "kernel-grid", "verify", "heckman", "em-check")
KERNEL_MODES = ("generic", "biorthogonal", "deterministic", "corollary", "eynard-mehta")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3, 4


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    raw: dict
    seed: int
    out: str
    cls: MatrixClass = None
    sample_count: int = 0
    tolerances: dict = field(default_factory=dict)

    @property
    def digest(self):
        return config_digest(self.raw)


def config_digest(cfg):
    text = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _need(cfg, key, kind=None):
    if key not in cfg:
        raise ConfigError("missing", key)
    v = cfg[key]
    if kind is int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"expected an integer, got {v!r}", key)
    elif kind is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"expected a finite number, got {v!r}", key)
    return v


def _positive_int(cfg, key, allow_zero=False, default=None):
    if key not in cfg and default is not None:
        return default
    v = _need(cfg, key, int)
    if v < 0 or (v == 0 and not allow_zero):
        raise ConfigError(f"must be {'nonnegative' if allow_zero else 'positive'}, got {v}", key)
    return v


def _class_of(cfg):
    tag = _need(cfg, "class")
    n = _positive_int(cfg, "n")
    try:
        return MatrixClass(tag, n)
    except DomainError as e:
        raise ConfigError(str(e), "class") from None


def _number_list(cfg, key):
    v = _need(cfg, key)
    if not isinstance(v, list) or not all(isinstance(t, (int, float)) and not isinstance(t, bool)
                                          for t in v):
        raise ConfigError("expected a list of numbers", key)
    return [float(t) for t in v]


def _axis(spec, key):
    """Grid axis ``{"min", "max", "step"}``; empty when ``max < min``."""
    if not isinstance(spec, dict):
        raise ConfigError("expected {min, max, step}", key)
    lo = _need(spec, "min", float)
    hi = _need(spec, "max", float)
    step = _need(spec, "step", float)
    if step <= 0:
        raise ConfigError("step must be positive", f"{key}.step")
    if hi < lo:
        return np.zeros(0)
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def load_config(command, path, seed=None, out=None):
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}", "command")
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e}", "config") from None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be an object", "config")
    if seed is not None:
        raw["seed"] = seed
    if out is not None:
        raw["output"] = out
    if "seed" not in raw:
        raise ConfigError("a seed is required", "seed")
    s = _need(raw, "seed", int)
    if s < 0:
        raise ConfigError("must be nonnegative", "seed")
    if "output" not in raw or not isinstance(raw["output"], str) or not raw["output"]:
        raise ConfigError("an output path is required", "output")
    tol = raw.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("expected an object", "tolerances")
    for k, v in tol.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0:
            raise ConfigError("tolerances must be positive numbers", f"tolerances.{k}")
    raw["command"] = command
    return RunConfig(command, raw, s, raw["output"], tolerances=dict(tol))


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return FLOAT_FMT % float(v)


def render_csv(header_comments, columns, rows):
    buf = io.StringIO()
    for line in header_comments:
        buf.write(f"# {line}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def render_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o)}")


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _comments(cfg, *extra):
    return [f"interlaced {__version__} {cfg.command}", f"config-sha256 {cfg.digest}",
            f"seed {cfg.seed}", *extra]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_sample(cfg):
    raw = cfg.raw
    cls = _class_of(raw)
    count = _positive_int(raw, "sampleCount", allow_zero=True)
    source = raw.get("source", "gaussian")
    what = raw.get("what", "points")
    rng = np.random.default_rng(cfg.seed)
    if source == "sumC":
        if cls.tag != "C":
            raise ConfigError("the sumC source needs class C", "class")
        steps = _positive_int(raw, "steps")
        cols = [f"k{k}_{j}" for k in range(1, steps + 1) for j in range(1, cls.rank + 1)]
        rows = []
        for _ in range(count):
            _, spectra = sample_sumC_process(cls.rank, steps, rng)
            rows.append(np.concatenate(spectra))
        return render_csv(_comments(cfg, f"source sumC steps {steps}"), cols, rows)
    if source == "gibbs":
        lam = _number_list(raw, "lambda")
        sweeps = _positive_int(raw, "sweeps", default=BURN_IN)
        L = num_pattern_levels(cls)
        cols = [f"x{k}_{j}" for k in range(1, L + 1) for j in range(1, level_length(cls, k) + 1)]
        try:
            levels = sample_uniform_batch(cls, lam, count, sweeps, rng) if count else []
        except DomainError as e:
            raise ConfigError(str(e), "lambda") from None
        rows = np.hstack(levels) if count else []
        return render_csv(_comments(cfg, f"source gibbs sweeps {sweeps}"), cols, rows)
    if source not in ("gaussian", "fixed-orbit"):
        raise ConfigError(f"unknown source {source!r}", "source")
    if what not in ("points", "minors"):
        raise ConfigError(f"unknown output kind {what!r}", "what")
    if source == "gaussian":
        H = sample_gaussian_batch(cls, count, rng)
    else:
        lam = _number_list(raw, "lambda")
        try:
            H = np.array([sample_fixed_orbit(cls, lam, rng).entries for _ in range(count)])
        except DomainError as e:
            raise ConfigError(str(e), "lambda") from None
    if what == "points":
        cols = [f"L{r}_{j}" for r in cls.levels() for j in range(1, cls.level_count(r) + 1)]
        if count:
            lv = point_levels_from_matrices(cls, H)
            rows = np.hstack([lv[r] for r in cls.levels()])
        else:
            rows = []
    else:
        orders = minor_orders(cls)
        sizes = [{"A": m, "B": (m - 1) // 2, "C": m // 2, "D": m // 2}[cls.tag] for m in orders]
        cols = [f"m{m}_{j}" for m, c in zip(orders, sizes) for j in range(1, c + 1)]
        rows = [np.concatenate([p.values for p in minor_sequence(StructuredHermitian(cls, h)).parts])
                for h in H]
    return render_csv(_comments(cfg, f"source {source} what {what}"), cols, rows)


def _kernel_for(raw, mode):
    from . import kernels as K
    if mode == "corollary":
        variant = raw.get("variant", "literal")
        if variant not in ("literal", "reconciled"):
            raise ConfigError(f"unknown variant {variant!r}", "variant")
        return (lambda p, q: K.kernel_corollary(p, q, variant)), None, \
            f"corollary kernel ({variant}); class and rank fields are ignored"
    cls = _class_of(raw)
    if mode in ("generic", "biorthogonal"):
        spec = K.gaussian_spec(cls)
        f = K.kernel_generic if mode == "generic" else K.kernel_biorthogonal
        return (lambda p, q: f(spec, p, q)), cls, f"{mode} kernel, Gaussian {cls}"
    if mode == "deterministic":
        lam = _number_list(raw, "lambda")
        try:
            K._atom_check(cls, lam)
        except DomainError as e:
            raise ConfigError(str(e), "lambda") from None
        return (lambda p, q: K.kernel_deterministic(cls, None, lam, p, q)), cls, \
            f"deterministic kernel {cls} lambda {lam} (continuous part)"
    if cls.tag != "B":
        raise ConfigError("eynard-mehta mode needs class B", "kernelMode")
    from .eynard_mehta import em_kernel
    chain = _gaussian_chain(cls.rank, raw)
    return (lambda p, q: em_kernel(chain, p, q)), cls, f"eynard-mehta indicator chain, n={cls.rank}"


def _gaussian_chain(n, raw):
    from .eynard_mehta import indicator_chain
    from .kernels import gaussian_psi
    psi = gaussian_psi(MatrixClass("B", n))
    anchors = raw.get("anchors")
    if anchors is not None:
        anchors = _number_list(raw, "anchors")
    return indicator_chain(n, psi, anchors, cutoff=float(raw.get("cutoff", 8.0)))


def _levels_for(grid, key, cls):
    v = grid.get(key)
    if v is None:
        return None
    if not isinstance(v, list) or not all(isinstance(t, int) and not isinstance(t, bool) for t in v):
        raise ConfigError("expected a list of integer levels", f"grid.{key}")
    if cls is not None:
        for t in v:
            if not 1 <= t <= cls.num_levels:
                raise ConfigError(f"level {t} out of range 1..{cls.num_levels}", f"grid.{key}")
    elif any(t < 1 for t in v):
        raise ConfigError("levels start at 1", f"grid.{key}")
    return v


def cmd_kernel_grid(cfg):
    raw = cfg.raw
    mode = raw.get("kernelMode", "biorthogonal")
    if mode not in KERNEL_MODES:
        raise ConfigError(f"unknown kernel mode {mode!r}", "kernelMode")
    kernel, cls, note = _kernel_for(raw, mode)
    grid = _need(raw, "grid")
    if not isinstance(grid, dict):
        raise ConfigError("expected an object", "grid")
    rs = _levels_for(grid, "r", cls)
    if rs is None:
        raise ConfigError("missing", "grid.r")
    ss = _levels_for(grid, "s", cls)
    ys = _axis(_need(grid, "y"), "grid.y")
    zs = _axis(grid["z"], "grid.z") if "z" in grid else None
    rows = []
    for r in rs:
        for y in ys:
            for s in (ss if ss is not None else [r]):
                for z in (zs if zs is not None else [y]):
                    rows.append((r, y, s, z, float(kernel((r, y), (s, z)))))
    for row in rows:
        if not math.isfinite(row[-1]):
            raise NumericError("non-finite kernel value", row, None)
    return render_csv(_comments(cfg, f"kernel {note}"), ["r", "y", "s", "z", "R"], rows)


def _queries_from(raw, cls, kernel):
    from .verify import CorrelationQuery, default_queries
    qs = raw.get("queries")
    if qs is None:
        return default_queries(cls, kernel=kernel, count=int(raw.get("queryCount", 20)))
    if not isinstance(qs, list) or not qs:
        raise ConfigError("expected a nonempty list of queries", "queries")
    out = []
    for i, q in enumerate(qs):
        try:
            windows = tuple((int(w[0]), float(w[1]), float(w[2])) for w in q)
            for lev, _, _ in windows:
                cls.check_level(lev)
            out.append(CorrelationQuery(windows))
        except (DomainError, TypeError, ValueError, IndexError) as e:
            raise ConfigError(str(e), f"queries[{i}]") from None
    return out


def cmd_verify(cfg):
    from . import verify as V
    from .kernels import gaussian_spec, kernel_biorthogonal
    raw = cfg.raw
    cls = _class_of(raw)
    count = _positive_int(raw, "sampleCount")
    spec = gaussian_spec(cls)
    kernel = lambda p, q: kernel_biorthogonal(spec, p, q)  # noqa: E731
    queries = _queries_from(raw, cls, kernel)
    tol = cfg.tolerances
    report = V.compare(cls, cls.rank, count, queries, seed=cfg.seed, kernel=kernel,
                       workers=_positive_int(raw, "workers", default=1),
                       z_limit=float(tol.get("zLimit", V.Z_LIMIT)),
                       accept_fraction=float(tol.get("acceptFraction", V.ACCEPT_FRACTION)))
    d = report.to_dict()
    d["tolerances"] = dict(tol)
    d["numericTolerances"] = report.tolerances
    d.update(schemaVersion=SCHEMA_VERSION, configSha256=cfg.digest, seed=cfg.seed)
    return render_json(d), report.accepted


def cmd_heckman(cfg):
    from .heckman import convergence_report, is_monotone
    raw = cfg.raw
    lams = _need(raw, "lambdaSequence")
    eps = _number_list(raw, "epsilonSequence")
    x = _number_list(raw, "x")
    if not isinstance(lams, list) or len(lams) != len(eps) or not lams:
        raise ConfigError("must be a nonempty list matching epsilonSequence", "lambdaSequence")
    for i, lam in enumerate(lams):
        if not isinstance(lam, list) or len(lam) != len(x):
            raise ConfigError(f"entry {i} must have length {len(x)}", "lambdaSequence")
    if any(e <= 0 for e in eps):
        raise ConfigError("scales must be positive", "epsilonSequence")
    samples = _positive_int(raw, "samples")
    rng = np.random.default_rng(cfg.seed)
    try:
        rows = convergence_report(lams, eps, x, samples, rng,
                                  bootstrap=_positive_int(raw, "bootstrap", True, default=20))
    except DomainError as e:
        raise ConfigError(str(e), "lambdaSequence") from None
    m = len(x)
    cols = ["row", "epsilon", *[f"lambda{j}" for j in range(1, m + 1)], "w1", "stderr"]
    table = [(i + 1, r["epsilon"], *[int(v) for v in r["lambda"]], r["w1"], r["stderr"])
             for i, r in enumerate(rows)]
    note = f"monotone-within-3se {is_monotone(rows)}"
    return render_csv(_comments(cfg, note), cols, table)


def cmd_em_check(cfg):
    from .eynard_mehta import em_kernel, em_trace, gram_matrix
    from .kernels import gaussian_spec, kernel_biorthogonal
    raw = cfg.raw
    n = _positive_int(raw, "n")
    grid = raw.get("grid", {"min": 0.1, "max": 2.5, "step": 0.6})
    pts = _axis(grid, "grid")
    tol = cfg.tolerances
    ktol = float(tol.get("kernel", 1e-5))
    ttol = float(tol.get("trace", 1e-4))
    chain = _gaussian_chain(n, raw)
    spec = gaussian_spec("B", n)
    gram = gram_matrix(chain)
    diff = 0.0
    for r in range(1, 2 * n + 1):
        for s in range(1, 2 * n + 1):
            for y in pts:
                for z in pts:
                    diff = max(diff, abs(em_kernel(chain, (r, y), (s, z))
                                         - kernel_biorthogonal(spec, (r, y), (s, z))))
    traces = [em_trace(chain, r) for r in range(1, 2 * n + 1)]
    expected = [(r + 1) // 2 for r in range(1, 2 * n + 1)]
    trace_err = max(abs(a - b) for a, b in zip(traces, expected))
    ok = diff <= ktol and trace_err <= ttol
    report = {
        "schemaVersion": SCHEMA_VERSION, "configSha256": cfg.digest, "seed": cfg.seed,
        "n": n, "tolerances": dict(tol), "maxKernelDiff": diff, "traces": traces,
        "expectedTraces": expected, "maxTraceError": trace_err,
        "gramMatrix": gram.matrix, "gramCondition": gram.condition, "accepted": ok,
    }
    return render_json(report), ok


HANDLERS = {
    "sample": cmd_sample,
    "kernel-grid": cmd_kernel_grid,
    "verify": cmd_verify,
    "heckman": cmd_heckman,
    "em-check": cmd_em_check,
}


def build_parser():
    p = argparse.ArgumentParser(prog="interlaced", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("config", help="JSON configuration file")
    p.add_argument("--seed", type=int, default=None, help="override the configured seed")
    p.add_argument("--out", default=None, help="override the configured output path")
    return p


def run(command, config_path, seed=None, out=None):
    """Execute one command; returns the process exit status."""
    try:
        cfg = load_config(command, config_path, seed, out)
        result = HANDLERS[command](cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, StructuralError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    text, ok = result if isinstance(result, tuple) else (result, True)
    try:
        write_atomic(cfg.out, text)
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(args.command, args.config, args.seed, args.out)


if __name__ == "__main__":
    sys.exit(main())
