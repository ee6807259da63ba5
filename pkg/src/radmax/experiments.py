"""Experiment runners and the CSV result format.

Every runner turns an :class:`ExperimentConfig` into a list of
:class:`ResultRow`. Work is split into tasks that are mapped over a process
pool and merged in task order, so the output does not depend on the worker
count. Rows that assert an inequality carry both sides.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._version import __version__
from .a1 import (
    a1_dimension_sweep,
    a1_lower_bound,
    a1_upper_from_condc,
    condition_c_constants,
    growth_example_curve,
)
from .balls import DimensionLimitSpec, dimension_limit_curve
from .config import ExperimentConfig
from .errors import CertificateMissing, ConfigError, RadmaxError
from .kakeya import (
    default_radii,
    kakeya_trials,
    segment_lemma_ratio,
    monte_carlo_intersection,
    random_indicator_set,
    random_segment,
    segment_radius_intersection,
    sharpness_curve,
    SharpnessConfig,
    superposed_universal,
    lorentz_bound_check,
)
from .maximal import (
    RadialIndicatorSet,
    SimpleRadialFunction,
    dense_grid_max,
    uncentered_max,
    weak11_empirical_constant,
)
from .profiles import PiecewisePower, weighted_moment
from .rng import A1_EXPONENTS, COUNTER_EXPONENTS, random_profile, trial_rng

SCHEMA_VERSION = 1

# offsets separating the random streams of the cross-check sub-suites
_STREAM = {"moments": 0, "maximal": 1 << 32, "segments": 2 << 32}


@dataclass
class ResultRow:
    experiment: str
    case: str
    params: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    lhs: float | None = None
    relation: str = ""
    rhs: float | None = None
    passed: bool | None = None
    witness: str = ""
    error: str = ""
    wall_time: float = 0.0


# ---------------------------------------------------------------------------
# fixed test batteries


def _simple(*layers) -> SimpleRadialFunction:
    return SimpleRadialFunction([(c, RadialIndicatorSet(tuple(ivs))) for c, ivs in layers])


def weak_battery() -> list[SimpleRadialFunction]:
    """Ten simple radial functions used by the weak-type experiment."""
    return [
        _simple((1.0, [(0.0, 1.0)])),
        _simple((1.0, [(1.0, 2.0)])),
        _simple((1.0, [(0.1, 0.2)])),
        _simple((1.0, [(0.0, 1.0)]), (1.0, [(0.0, 0.5)])),
        _simple((2.0, [(0.5, 3.0)]), (1.0, [(1.0, 1.5)])),
        _simple((1.0, [(0.0, 0.3), (2.0, 4.0)])),
        _simple((1.0, [(0.2, 5.0)]), (3.0, [(1.0, 2.0)]), (2.0, [(1.2, 1.3)])),
        _simple((0.5, [(5.0, 10.0)])),
        _simple((1.0, [(0.0, 1.0), (3.0, 3.1)]), (4.0, [(0.0, 0.01)])),
        _simple((1.0, [(0.9, 1.1)])),
    ]


def thm42_battery() -> list[SimpleRadialFunction]:
    """Five nested-layer simple functions used by the Lorentz check."""
    return [
        _simple((1.0, [(0.0, 1.0)])),
        _simple((1.0, [(0.5, 2.0)]), (1.0, [(1.0, 1.5)])),
        _simple((1.0, [(0.2, 3.0)]), (2.0, [(0.5, 1.0), (2.0, 2.5)]), (0.5, [(0.6, 0.8)])),
        _simple((0.3, [(0.0, 4.0)]), (1.0, [(0.0, 0.5)])),
        _simple((1.0, [(1.0, 1.2), (3.0, 3.5)]), (2.0, [(1.05, 1.1)])),
    ]


def lebesgue_constants():
    return condition_c_constants(PiecewisePower.constant(1.0))


def upper_certificate(w, n):
    """Condition (c) certificate for ``w`` (Lebesgue measure when ``None``)."""
    cc = condition_c_constants(w) if w is not None else lebesgue_constants()
    return a1_upper_from_condc(cc, n)


# ---------------------------------------------------------------------------
# pool


def _run_task(task):
    fn, args = task
    t0 = time.perf_counter()
    rows = fn(*args)
    dt = time.perf_counter() - t0
    for r in rows:
        r.wall_time = dt / max(len(rows), 1)
    return rows


def map_tasks(tasks, threads: int = 1) -> list[ResultRow]:
    """Run ``(fn, args)`` tasks, merging their rows in task order."""
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(_run_task, tasks))
    else:
        parts = [_run_task(t) for t in tasks]
    return [r for part in parts for r in part]


def _guard(exp, case, params, fn, *args):
    """Run ``fn`` and turn numerical failures into failed rows."""
    try:
        return fn(*args)
    except RadmaxError as exc:
        return [ResultRow(exp, case, params, error=f"{type(exc).__name__}: {exc}",
                          passed=False)]


# ---------------------------------------------------------------------------
# a1-sweep


def _a1_estimate(w, n, per_decade):
    return a1_lower_bound(w, n, per_decade=per_decade)


def run_a1_sweep(cfg: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    w = cfg.weight_profile()
    per_decade = int(cfg.param("per_decade", 16))
    t0 = time.perf_counter()
    if threads > 1 and len(cfg.schedule) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            raw = list(ex.map(_a1_estimate, [w] * len(cfg.schedule), cfg.schedule,
                              [per_decade] * len(cfg.schedule)))
    else:
        raw = [_a1_estimate(w, n, per_decade) for n in cfg.schedule]
    sweep = a1_dimension_sweep(w, cfg.schedule, estimates=raw)
    dt = (time.perf_counter() - t0) / max(len(cfg.schedule), 1)
    rows = []
    for e in sweep.estimates:
        wit = f"a={e.witness[0]!r};b={e.witness[1]!r}"
        p = {"n": e.n}
        v = {"certificate": e.certificate_kind, "window_limited": e.window_limited}
        rows.append(ResultRow("a1-sweep", "floor", p, dict(v), 1.0, "<=", e.lower,
                              e.lower >= 1.0, wit, wall_time=dt))
        rows.append(ResultRow("a1-sweep", "bracket", p, v, e.lower, "<=", e.upper,
                              e.consistent, wit, wall_time=dt))
    for t in sweep.transport:
        rows.append(ResultRow("a1-sweep", "transport", {"n": t.n, "k": t.k}, {},
                              t.lower_n, "<=", t.bound, t.ok))
    return rows


# ---------------------------------------------------------------------------
# growth


def run_growth(cfg: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    alphas = cfg.param("alpha", [0.3, 0.6, 0.9])
    alphas = alphas if isinstance(alphas, list) else [alphas]
    rows = []
    for a in alphas:
        t0 = time.perf_counter()
        curve = growth_example_curve(float(a), cfg.schedule)
        dt = (time.perf_counter() - t0) / len(curve)
        for g in curve:
            rows.append(ResultRow(
                "growth", "log-ratio-vs-floor", {"alpha": float(a), "n": g.n},
                {"ratio": g.ratio, "floor": g.floor, "ratio_over_floor": g.ratio_over_floor,
                 "log_margin": g.log_margin},
                g.log_floor, "<=", g.log_ratio, g.holds, wall_time=dt))
    return rows


# ---------------------------------------------------------------------------
# dimlimit


def _dimlimit_rows(w, T, s, schedule, tail, final_tol):
    spec = DimensionLimitSpec(T, s, tuple(schedule))
    curve = dimension_limit_curve(w, spec, tail=tail)
    rows = []
    for n, avg, err in curve.rows:
        rows.append(ResultRow("dimlimit", "average", {"n": n, "T": T, "s": s},
                              {"average": avg, "target": curve.target, "error": err}))
    errs = [r[2] for r in curve.rows]
    ns = [r[0] for r in curve.rows]
    for i in range(max(len(errs) - tail, 0) + 1, len(errs)):
        rows.append(ResultRow("dimlimit", "tail-monotone", {"n": ns[i], "T": T, "s": s}, {},
                              errs[i], "<=", errs[i - 1], errs[i] <= errs[i - 1]))
    rows.append(ResultRow("dimlimit", "final-error", {"n": ns[-1], "T": T, "s": s}, {},
                          errs[-1], "<", final_tol, errs[-1] < final_tol))
    return rows


def run_dimlimit(cfg: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    w = cfg.weight_profile()
    T = float(cfg.param("T", 1.0))
    s = float(cfg.param("s", 0.6))
    tail = int(cfg.param("tail", 6))
    tol = float(cfg.tol("final", 0.01))
    t0 = time.perf_counter()
    rows = _guard("dimlimit", "curve", {"T": T, "s": s}, _dimlimit_rows, w, T, s,
                  cfg.schedule, tail, tol)
    dt = (time.perf_counter() - t0) / max(len(rows), 1)
    for r in rows:
        r.wall_time = dt
    return rows


# ---------------------------------------------------------------------------
# weaktype


def _weak_rows(w, n, grid_points):
    upper = upper_certificate(w, n)
    if not math.isfinite(upper):
        raise CertificateMissing(f"no finite A1 certificate in dimension {n}")
    res = weak11_empirical_constant(w, n, weak_battery(), grid_points=grid_points)
    rows = []
    for r in res.rows:
        lhs = r.lam * r.level_measure
        rhs = 2.0 * upper * r.l1
        rows.append(ResultRow("weaktype", "level-set", {"n": n, "f": r.f_index, "lambda": r.lam},
                              {"level_measure": r.level_measure, "l1": r.l1, "ratio": r.ratio,
                               "upper": upper},
                              lhs, "<=", rhs, lhs <= rhs))
    return rows


def run_weaktype(cfg: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    w = cfg.weight_profile()
    pts = int(cfg.param("grid_points", 64))
    tasks = [(_guard, ("weaktype", "level-set", {"n": n}, _weak_rows, w, n, pts))
             for n in cfg.schedule]
    return map_tasks(tasks, threads)


# ---------------------------------------------------------------------------
# kakeya-verify


def _kakeya_rows(seed, start, count, ks, every_k, tol):
    rows = []
    for t in kakeya_trials(seed, count, ks, start=start, every_k=every_k):
        rows.append(ResultRow(
            "kakeya-verify", "segment", {"seed": t.seed, "k": t.k},
            {"r0": t.r0, "phi": t.phi, "a": t.a, "b": t.b, "E0": t.digest, "ratio": t.ratio},
            t.lhs, "<=", t.rhs, t.lhs <= t.rhs * (1 + tol)))
    return rows


def run_kakeya_verify(cfg: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    trials = int(cfg.param("trials", 10000))
    ks = tuple(float(k) for k in cfg.param("k", [2, 3, 5]))
    every_k = bool(cfg.param("every_k", False))
    chunk = int(cfg.param("chunk", 500))
    tol = float(cfg.tol("rel", 1e-9))
    tasks = [(_kakeya_rows, (cfg.seed, s, min(chunk, trials - s), ks, every_k, tol))
             for s in range(0, trials, chunk)]
    return map_tasks(tasks, threads)


# ---------------------------------------------------------------------------
# sharpness


def run_sharpness(cfg: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    ratios = [float(q) for q in cfg.param("ratios", [1e-1, 1e-2, 1e-3])]
    L = float(cfg.param("L", 1.0))
    y = float(cfg.param("y_radius", 1.0))
    ks = [float(k) for k in cfg.param("k", [2, 3, 5])]
    tol = float(cfg.tol("rel", 1e-9))
    t0 = time.perf_counter()
    curve = sharpness_curve(ratios, L=L, y_radius=y)
    rows = []
    for r in curve:
        p = {"ell_over_L": r.ell_over_L}
        rows.append(ResultRow(
            "sharpness", "observed-constant", p,
            {"lhs_fraction": r.lhs, "maximal": r.maximal,
             "predicted_constant": r.predicted_constant},
            2.0 - 2.0 * r.ell_over_L, "<=", r.observed_constant,
            r.observed_constant >= 2.0 - 2.0 * r.ell_over_L))
        rel = abs(r.maximal / r.predicted_maximal - 1.0)
        rows.append(ResultRow("sharpness", "maximal-formula", p, {"rel_diff": rel},
                              r.maximal, "~=", r.predicted_maximal, rel <= 1e-6))
        rows.append(ResultRow("sharpness", "universal-floor", p, {},
                              r.ell_over_L * (1 - tol), "<=", r.universal,
                              r.universal >= r.ell_over_L * (1 - tol)))
    by_size = sorted(curve, key=lambda r: -r.ell_over_L)
    for prev, cur in zip(by_size, by_size[1:]):
        rows.append(ResultRow("sharpness", "monotone", {"ell_over_L": cur.ell_over_L},
                              {"previous_ell_over_L": prev.ell_over_L},
                              prev.observed_constant, "<", cur.observed_constant,
                              prev.observed_constant < cur.observed_constant))
    # ratio against the dimension on the sharp configuration
    for q in ratios:
        cfg_s = SharpnessConfig(L, q * L, y)
        for k in ks:
            res = segment_lemma_ratio(cfg_s.segment(), cfg_s.annulus(), k, tol=tol)
            rows.append(ResultRow("sharpness", "ratio-vs-k", {"ell_over_L": q, "k": k},
                                  {"ratio": res.ratio}, res.lhs, "<=", res.rhs, res.ok))
    dt = (time.perf_counter() - t0) / len(rows)
    for r in rows:
        r.wall_time = dt
    return rows


# ---------------------------------------------------------------------------
# thm42


def _thm42_rows(idx, f, weight_cfg_profile, schedule):
    nodes = default_radii(f)
    g = superposed_universal(f, nodes)
    rows = []
    for n in schedule:
        try:
            res = lorentz_bound_check(f, weight_cfg_profile, n, radii=nodes, g_values=g,
                                  upper=upper_certificate(weight_cfg_profile, n))
        except RadmaxError as exc:
            rows.append(ResultRow("thm42", "lorentz", {"f": idx, "n": n},
                                  error=f"{type(exc).__name__}: {exc}", passed=False))
            continue
        rows.append(ResultRow("thm42", "lorentz", {"f": idx, "n": n},
                              {"upper": res.upper, "level": res.level, "nodes": res.nodes,
                               "norm_n1": res.meta.get("norm_n1", 0.0)},
                              res.lhs, "<=", res.rhs, res.passed))
    return rows


def run_thm42(cfg: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    w = cfg.weight_profile()
    battery = thm42_battery()
    tasks = [(_thm42_rows, (i, f, w, cfg.schedule)) for i, f in enumerate(battery)]
    return map_tasks(tasks, threads)


# ---------------------------------------------------------------------------
# oracle cross-checks


def _moment_case(seed, i, tol):
    rng = trial_rng(seed, _STREAM["moments"] + i)
    w = random_profile(rng, exponents=COUNTER_EXPONENTS)
    n = float(rng.integers(2, 41))
    a = 0.0 if rng.random() < 0.1 else float(np.exp(rng.uniform(math.log(1e-3), math.log(20))))
    b = (a if a > 0 else 1e-2) * float(np.exp(rng.uniform(0.01, 3.0)))
    closed = weighted_moment(w, a, b, n, method="closed")
    quad = weighted_moment(w, a, b, n, method="quadrature", rtol=1e-12)
    rel = abs(math.expm1(quad.log - closed.log))
    return [ResultRow("oracle-crosscheck", "moment", {"index": i, "n": n, "a": a, "b": b},
                      {"closed_log": closed.log, "quadrature_log": quad.log},
                      rel, "<", tol, rel < tol)]


def _maximal_case(seed, i, tol, size):
    rng = trial_rng(seed, _STREAM["maximal"] + i)
    w = random_profile(rng, exponents=A1_EXPONENTS)
    n = float((2, 3, 5)[int(rng.integers(0, 3))])
    r = float(np.exp(rng.uniform(math.log(0.05), math.log(20.0))))
    opt = uncentered_max(w, n, r)
    dense = dense_grid_max(w, n, r, size=size)
    wit = f"a={opt.witness[0]!r};b={opt.witness[1]!r}" if opt.witness else ""
    return [ResultRow("oracle-crosscheck", "maximal", {"index": i, "n": n, "r": r},
                      {"optimizer": opt.value, "dense": dense},
                      dense * (1 - tol), "<=", opt.value, opt.value >= dense * (1 - tol), wit)]


def _segment_case(seed, i, samples, sigmas):
    rng = trial_rng(seed, _STREAM["segments"] + i)
    E0 = random_indicator_set(rng)
    seg = random_segment(rng)
    exact = segment_radius_intersection(seg, E0)
    est, se = monte_carlo_intersection(seg, E0, rng, samples)
    diff = abs(exact - est)
    # an all-in or all-out segment has zero spread; allow rounding there
    bound = sigmas * se + 1e-12 * seg.length
    return [ResultRow("oracle-crosscheck", "segment", {"index": i, "E0": E0.digest()},
                      {"exact": exact, "monte_carlo": est, "std_error": se},
                      diff, "<=", bound, diff <= bound)]


def run_oracle_crosscheck(cfg: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    seed = cfg.seed
    m = int(cfg.param("moments", 200))
    k = int(cfg.param("maximal", 100))
    s = int(cfg.param("segments", 100))
    size = int(cfg.param("dense_size", 1024))
    samples = int(cfg.param("mc_samples", 1_000_000))
    tasks = [(_guard, ("oracle-crosscheck", "moment", {"index": i}, _moment_case, seed, i,
                       float(cfg.tol("moment", 1e-8)))) for i in range(m)]
    tasks += [(_guard, ("oracle-crosscheck", "maximal", {"index": i}, _maximal_case, seed, i,
                        float(cfg.tol("maximal", 1e-4)), size)) for i in range(k)]
    tasks += [(_guard, ("oracle-crosscheck", "segment", {"index": i}, _segment_case, seed, i,
                        samples, float(cfg.tol("sigmas", 3.0)))) for i in range(s)]
    return map_tasks(tasks, threads)


RUNNERS = {
    "a1-sweep": run_a1_sweep,
    "growth": run_growth,
    "dimlimit": run_dimlimit,
    "weaktype": run_weaktype,
    "kakeya-verify": run_kakeya_verify,
    "sharpness": run_sharpness,
    "thm42": run_thm42,
    "oracle-crosscheck": run_oracle_crosscheck,
}


# ---------------------------------------------------------------------------
# CSV


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".16e")
    return str(x)


def rows_to_csv(rows: list[ResultRow], experiment: str, *, seed=None,
                include_time: bool = True) -> str:
    pcols, vcols = [], []
    for r in rows:
        for k in r.params:
            if k not in pcols:
                pcols.append(k)
        for k in r.values:
            if k not in vcols:
                vcols.append(k)
    header = (["experiment", "case"] + pcols + vcols
              + ["lhs", "relation", "rhs", "passed", "witness", "error", "version"])
    if include_time:
        header.append("wall_time")
    buf = io.StringIO()
    buf.write(f"# radmax-results schema={SCHEMA_VERSION} tool=radmax/{__version__} "
              f"experiment={experiment} seed={'' if seed is None else seed}\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for r in rows:
        line = [r.experiment, r.case]
        line += [_fmt(r.params.get(k)) for k in pcols]
        line += [_fmt(r.values.get(k)) for k in vcols]
        line += [_fmt(r.lhs), r.relation, _fmt(r.rhs), _fmt(r.passed), r.witness, r.error,
                 __version__]
        if include_time:
            line.append(_fmt(r.wall_time))
        wr.writerow(line)
    return buf.getvalue()


@dataclass
class ExperimentOutcome:
    experiment: str
    rows: list
    path: str | None
    status: int

    @property
    def failures(self) -> int:
        return sum(1 for r in self.rows if r.passed is False)

    @property
    def checked(self) -> int:
        return sum(1 for r in self.rows if r.passed is not None)

    def summary(self) -> str:
        state = "PASS" if self.status == 0 else "FAIL"
        return (f"{self.experiment}: {state} {self.checked - self.failures}/{self.checked} "
                f"inequalities hold, {len(self.rows)} rows"
                + (f" -> {self.path}" if self.path else ""))


def run_experiment(cfg: ExperimentConfig, *, out=None, threads: int = 1) -> ExperimentOutcome:
    runner = RUNNERS.get(cfg.experiment)
    if runner is None:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}")
    rows = runner(cfg, max(int(threads), 1))
    path = out if out is not None else cfg.out
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(rows_to_csv(rows, cfg.experiment, seed=cfg.seed))
    status = 0 if all(r.passed is not False for r in rows) else 1
    return ExperimentOutcome(cfg.experiment, rows, path, status)
