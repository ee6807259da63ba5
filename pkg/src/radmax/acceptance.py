"""The acceptance suite: nine pinned checks with their tolerances and budgets.

Each criterion returns a list of :class:`Check` records (both sides of every
inequality) and is timed against its runtime budget. ``tolerance_scale``
multiplies every tolerance, which is how a tampered run is simulated.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .a1 import a1_upper_from_condc, condition_c_constants, shifted_a1_check
from .balls import centered_ball_maximal
from .config import config_from_dict
from .errors import RadmaxError
from .experiments import RUNNERS, ResultRow, thm42_battery, upper_certificate
from .kakeya import default_radii, superposed_universal, lorentz_bound_check
from .maximal import uncentered_max_many
from .profiles import PiecewisePower
from .rng import random_profile, trial_rng

ACCEPT_SEED = 20240917
ROOT_HALF = {"kind": "piecewise_power",
             "pieces": [{"lo": 0.0, "hi": "inf", "coeff": 1.0, "exponent": -0.5}]}


@dataclass(frozen=True)
class Check:
    label: str
    lhs: float
    relation: str
    rhs: float
    ok: bool

    @property
    def slack(self) -> float:
        """Relative room left in the inequality (negative when violated)."""
        if self.relation == "==":
            return math.inf if self.ok else -math.inf
        if self.relation in ("<=", "<"):
            lo, hi = self.lhs, self.rhs
        else:
            lo, hi = self.rhs, self.lhs
        if not (math.isfinite(lo) and math.isfinite(hi)):
            return math.inf if self.ok else -math.inf
        scale = max(abs(hi), abs(lo), 1e-300)
        return (hi - lo) / scale


@dataclass
class CriterionResult:
    cid: str
    title: str
    status: str  # "pass", "fail", "error" or "skipped"
    margin: float
    runtime: float
    budget: float
    checks: list = field(default_factory=list)
    note: str = ""

    @property
    def failed(self) -> bool:
        return self.status in ("fail", "error")

    def line(self) -> str:
        m = "" if self.status == "skipped" else f"margin={self.margin:.3e}"
        t = "" if self.status == "skipped" else f"runtime={self.runtime:.2f}s/{self.budget:g}s"
        n = f"checks={len(self.checks)}" if self.checks else ""
        extra = f" ({self.note})" if self.note else ""
        return f"[{self.status.upper():7s}] {self.cid:>2s} {self.title:34s} {n:13s} {m:18s} {t}{extra}"


def _rows_checks(rows: list[ResultRow]) -> list[Check]:
    out = []
    for r in rows:
        if r.passed is None:
            continue
        lhs = r.lhs if r.lhs is not None else math.nan
        rhs = r.rhs if r.rhs is not None else math.nan
        label = f"{r.case} {r.params}" + (f" error={r.error}" if r.error else "")
        out.append(Check(label, lhs, r.relation or "<=", rhs, bool(r.passed)))
    return out


def _run(doc: dict, threads: int) -> list[ResultRow]:
    cfg = config_from_dict(doc)
    return RUNNERS[cfg.experiment](cfg, threads)


# ---------------------------------------------------------------------------
# criteria


def c1_growth(scale: float, threads: int) -> list[Check]:
    rows = _run({"experiment": "growth", "schedule": [10, 100, 1000, 10000, 1000000],
                 "params": {"alpha": [0.3, 0.6, 0.9]}}, threads)
    checks = _rows_checks(rows)
    cap = 1.0 + 0.05 * scale
    for r in rows:
        if r.params["n"] == 1e6:
            q = r.values["ratio_over_floor"]
            checks.append(Check(f"ratio/floor alpha={r.params['alpha']}", q, "<=", cap, q <= cap))
    return checks


def c2_a1_bracket(scale: float, threads: int) -> list[Check]:
    rows = _run({"experiment": "a1-sweep", "schedule": list(range(2, 65, 2)),
                 "weight": ROOT_HALF}, threads)
    checks = _rows_checks(rows)
    top = 4.0 * math.sqrt(2.0)
    for r in rows:
        if r.case == "bracket":
            checks.append(Check(f"lower <= 4 sqrt2 n={r.params['n']}", r.lhs, "<=", top,
                                r.lhs <= top * (1 + 1e-12)))
            checks.append(Check(f"certificate n={r.params['n']}", r.rhs, "==", top,
                                abs(r.rhs / top - 1.0) <= 1e-12))
    return checks


def c3_centered_vs_annuli(scale: float, threads: int) -> list[Check]:
    tol = 1e-6 * scale
    radii = np.geomspace(0.05, 20.0, 16)
    checks = []
    for i in range(20):
        w = random_profile(trial_rng(ACCEPT_SEED, i))
        bps = w.breakpoints()
        reach = max(float(radii[-1]), float(bps[-1]) if bps.size else 1.0)
        for n in (2, 3, 5):
            balls = centered_ball_maximal(w, n, radii, 100.0 * reach)
            ann = uncentered_max_many(w, n, radii)
            for r, b, a in zip(radii, balls, ann):
                q = b.resolution.get("quad_rel_error", 0.0)
                bound = 2.0 * a.value * (1 + tol) * (1 + q)
                checks.append(Check(f"profile={i} n={n} r={r:.4g}", b.value, "<=", bound,
                                    b.value <= bound))
    return checks


def c4_weak_type(scale: float, threads: int) -> list[Check]:
    checks = []
    for weight in (None, ROOT_HALF):
        doc = {"experiment": "weaktype", "schedule": [2, 8, 32], "params": {"grid_points": 64}}
        if weight is not None:
            doc["weight"] = weight
        tag = "w=1" if weight is None else "w=t^-1/2"
        for c in _rows_checks(_run(doc, threads)):
            checks.append(Check(f"{tag} {c.label}", c.lhs, c.relation, c.rhs, c.ok))
    return checks


def c5_segments(scale: float, threads: int) -> list[Check]:
    tol = max(1e-9 * scale, 1e-300)
    rows = _run({"experiment": "kakeya-verify", "seed": ACCEPT_SEED,
                 "params": {"trials": 10000, "k": [2, 3, 5], "every_k": True},
                 "tolerances": {"rel": tol}}, threads)
    checks = _rows_checks(rows)
    rows = _run({"experiment": "sharpness", "params": {"ratios": [1e-1, 1e-2, 1e-3]},
                 "tolerances": {"rel": tol}}, threads)
    checks += _rows_checks([r for r in rows if r.case in ("observed-constant", "monotone")])
    return checks


def c6_lorentz(scale: float, threads: int) -> list[Check]:
    # the tabulation of the universal operator is shared by both weights
    weights = {"w=1": None, "w=t^-1/2": PiecewisePower.power(-0.5, 1.0)}
    checks = []
    for i, f in enumerate(thm42_battery()):
        nodes = default_radii(f)
        g = superposed_universal(f, nodes)
        for tag, w in weights.items():
            for n in (2, 4, 8):
                res = lorentz_bound_check(f, w, n, radii=nodes, g_values=g,
                                      upper=upper_certificate(w, n))
                checks.append(Check(f"{tag} f={i} n={n}", res.lhs, "<=", res.rhs, res.passed))
    return checks


def c7_dimension_limit(scale: float, threads: int) -> list[Check]:
    rows = _run({"experiment": "dimlimit", "weight": ROOT_HALF,
                 "schedule": [2 ** j for j in range(1, 15)],
                 "params": {"T": 1.0, "s": 0.6, "tail": 6},
                 "tolerances": {"final": max(0.01 * scale, 1e-300)}}, threads)
    return _rows_checks(rows)


def c8_shifted(scale: float, threads: int) -> list[Check]:
    w = PiecewisePower.power(-0.5, 1.0)
    k = 3
    upper = a1_upper_from_condc(condition_c_constants(w), k)
    radii = np.geomspace(0.01, 100.0, 32)
    rows = shifted_a1_check(w, k, [0.0, 0.5, 2.0, 10.0], radii, upper=upper,
                            rtol=1e-6 * scale)
    return [Check(f"rho={r.rho} r={r.r:.4g}", r.maximal, "<=", r.bound * (1 + 1e-6 * scale),
                  r.ok) for r in rows]


def c9_oracles(scale: float, threads: int) -> list[Check]:
    rows = _run({"experiment": "oracle-crosscheck", "seed": ACCEPT_SEED,
                 "params": {"moments": 200, "maximal": 100, "segments": 100,
                            "dense_size": 1024, "mc_samples": 1_000_000},
                 "tolerances": {"moment": max(1e-8 * scale, 1e-300),
                                "maximal": max(1e-4 * scale, 1e-300),
                                "sigmas": max(3.0 * scale, 1e-300)}}, threads)
    return _rows_checks(rows)


CRITERIA = [
    ("1", "growth law", c1_growth, 1.0),
    ("2", "A1 bracket across dimensions", c2_a1_bracket, 30.0),
    ("3", "centred vs annuli maximal", c3_centered_vs_annuli, 180.0),
    ("4", "weak (1,1) with constant 2 upper", c4_weak_type, 60.0),
    ("5", "segment lemma and sharpness of 2", c5_segments, 60.0),
    ("6", "Lorentz bound for the universal op", c6_lorentz, 120.0),
    ("7", "limit through dimensions", c7_dimension_limit, 60.0),
    ("8", "shifted weights", c8_shifted, 60.0),
    ("9", "oracle cross-checks", c9_oracles, 120.0),
]


def _selected(cid: str, only) -> bool:
    if not only:
        return True
    wanted = {s.strip() for part in only for s in str(part).split(",") if s.strip()}
    return cid in wanted


def run_criterion(cid: str, *, tolerance_scale: float = 1.0, threads: int = 1,
                  enforce_budget: bool = True) -> CriterionResult:
    for c, title, fn, budget in CRITERIA:
        if c == cid:
            break
    else:
        raise KeyError(f"unknown criterion {cid!r}")
    t0 = time.perf_counter()
    try:
        checks = fn(tolerance_scale, threads)
    except RadmaxError as exc:
        return CriterionResult(cid, title, "error", -math.inf, time.perf_counter() - t0,
                               budget, [], f"{type(exc).__name__}: {exc}")
    dt = time.perf_counter() - t0
    margin = min((c.slack for c in checks), default=math.inf)
    bad = [c for c in checks if not c.ok]
    note = ""
    status = "pass"
    if bad or not checks:
        status = "fail"
        note = f"{len(bad)} failing, first: {bad[0].label}" if bad else "no checks ran"
    elif enforce_budget and dt > budget:
        status = "fail"
        note = f"over the {budget:g}s budget"
    return CriterionResult(cid, title, status, margin, dt, budget, checks, note)


def acceptance_suite(only=None, *, tolerance_scale: float = 1.0, threads: int = 1,
                     enforce_budget: bool = True, echo=print) -> list[CriterionResult]:
    results = []
    for cid, title, _, budget in CRITERIA:
        if not _selected(cid, only):
            res = CriterionResult(cid, title, "skipped", math.nan, 0.0, budget)
        else:
            res = run_criterion(cid, tolerance_scale=tolerance_scale, threads=threads,
                                enforce_budget=enforce_budget)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
