"""A1 constants of radial weights: certificates, witnesses and sweeps.

The radial A1 constant ``(w)_{A1(R^n)}`` is the least ``C`` with

    w0 v_n(I) / v_n(I) <= C essinf_I w0   for every interval I.

Upper bounds come from the dyadic constants ``(beta, eta)`` of a piecewise
profile, or from carrying a bound in dimension ``k`` up to ``n`` with the
factor ``n / k``. Lower bounds are witnessed by explicit intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .balls import centered_ball_maximal
from .errors import CertificateMissing, InvalidInput
from .maximal import _as_profile, _log_vn, uncentered_max, uncentered_max_many
from .optimize import golden_max
from .profiles import RadialProfile, Shifted, _Piecewise, _power_value
from .special import lgamma, log_beta_moment, log_gamma_ratio

WINDOW = (1e-6, 1e6)


# ---------------------------------------------------------------------------
# dyadic constants


@dataclass(frozen=True)
class ConditionCConstants:
    beta: float  # sup_R esssup_[R,2R] w0 / essinf_[R,2R] w0
    eta: float  # sup_{s >= t} w0(s) / w0(t), in the a.e. sense
    beta_witness: float = math.nan  # R attaining beta (nan for a limit at 0 or inf)

    @property
    def beta_finite(self) -> bool:
        return math.isfinite(self.beta)

    @property
    def eta_finite(self) -> bool:
        return math.isfinite(self.eta)

    @property
    def finite(self) -> bool:
        return self.beta_finite and self.eta_finite


def _ratio(hi: float, lo: float) -> float:
    if lo == 0:
        return math.inf
    return hi / lo


def _end_ratio(c: float, g: float) -> float:
    """Dyadic ratio of ``c t^g`` on ``[R, 2R]``, the same for every R."""
    return math.inf if c == 0 else 2.0 ** abs(g)


def condition_c_constants(w: RadialProfile) -> ConditionCConstants:
    """Exact ``(beta, eta)`` for piecewise power and tabulated profiles.

    Within a fixed configuration of ``[R, 2R]`` against the breakpoints the
    log of the dyadic ratio is a max of affine functions of ``log R`` minus a
    min of such, hence convex, so its sup sits at a configuration change
    (``R`` or ``2R`` on a breakpoint, taken as one-sided limits) or at
    ``R -> 0`` / ``R -> inf``.
    """
    if not isinstance(w, _Piecewise):
        raise InvalidInput(f"dyadic constants need a piecewise profile, not {w.kind}")
    lo, hi, coeff, expo = w.lo, w.hi, w.coeff, w.exponent
    beta = max(_end_ratio(coeff[0], expo[0]), _end_ratio(coeff[-1], expo[-1]))
    beta_at = math.nan
    for p in w.breakpoints():
        for R in (p, p / 2.0):
            lo_vals, hi_vals = w._ranges(R, 2.0 * R)
            # R slightly below: the piece ending at R contributes its left limit
            left = [w.left_limit(R)]
            # R slightly above: the piece starting at 2R contributes its value
            right = [float(w(2.0 * R))]
            for extra in (left, right):
                vals_lo = np.concatenate([lo_vals, extra])
                vals_hi = np.concatenate([hi_vals, extra])
                rt = _ratio(float(np.max(vals_hi)), float(np.min(vals_lo)))
                if rt > beta:
                    beta, beta_at = rt, float(R)
    # eta: values on a later piece against values on earlier pieces, plus
    # the growth inside increasing pieces
    eta = 1.0
    run_inf = math.inf
    for i in range(lo.size):
        c, g = coeff[i], expo[i]
        va = float(_power_value(c, g, lo[i]))
        vb = float(_power_value(c, g, hi[i])) if math.isfinite(hi[i]) else (
            math.inf if (g > 0 and c > 0) else (c if g == 0 else 0.0))
        p_lo, p_hi = min(va, vb), max(va, vb)
        if g > 0 and c > 0:
            eta = max(eta, _ratio(vb, va))
        if i > 0:
            eta = max(eta, _ratio(p_hi, run_inf) if p_hi > 0 else 1.0)
        run_inf = min(run_inf, p_lo)
    return ConditionCConstants(float(beta), float(eta), beta_at)


def a1_upper_from_condc(cc: ConditionCConstants, n: float) -> float:
    """Certified ``(w)_{A1(R^n)} <= max(beta, 4 beta eta)`` for ``n > log2(beta) + 1``.

    Intervals with ``b <= 2a`` are bounded by ``beta``. Otherwise the dyadic
    sum gives ``w0 v_n([0, b]) <= 2 beta w0(b) v_n([0, b])`` once
    ``beta / 2^n <= 1/2``, then ``v_n([0,b]) / v_n([a,b]) <= 2`` and
    ``w0(b) <= eta essinf``. Returns ``inf`` when no certificate applies.
    """
    if not cc.finite:
        return math.inf
    if not n > math.log2(cc.beta) + 1.0:
        return math.inf
    return max(cc.beta, 4.0 * cc.beta * cc.eta)


# ---------------------------------------------------------------------------
# witnessed lower bounds


@dataclass(frozen=True)
class A1Estimate:
    n: float
    lower: float
    upper: float
    witness: tuple
    certificate_kind: str  # "condc", "transport" or "none"
    window_limited: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return not math.isfinite(self.upper) or self.lower <= self.upper * (1 + 1e-12)


def _essinf_pairs(w: _Piecewise, a, b):
    """Vectorized a.e. infimum of ``w`` over ``(a, b)``."""
    out = np.full(np.shape(a), np.inf)
    for lo, hi, c, g in zip(w.lo, w.hi, w.coeff, w.exponent):
        x = np.maximum(lo, a)
        y = np.minimum(hi, b)
        live = y > x
        if not np.any(live):
            continue
        va = _power_value(c, g, x)
        with np.errstate(invalid="ignore"):
            vb = np.where(np.isfinite(y), _power_value(c, g, np.where(np.isfinite(y), y, 1.0)),
                          np.inf if g > 0 else (c if g == 0 else 0.0))
        out = np.where(live, np.minimum(out, np.minimum(va, vb)), out)
    return out


def _log_ratio_pairs(w: _Piecewise, n, a, b):
    """``log( (w0 v_n(I) / v_n(I)) / essinf_I w0 )`` for finite ``I = [a, b]``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        num = w.log_moments(a, b, n) - _log_vn(a, b, n)
        inf = np.log(_essinf_pairs(w, a, b))
        out = num - inf
    out = np.where(num == np.inf, np.inf, out)
    return np.where(np.isnan(out), -np.inf, out)


def a1_lower_bound(w: RadialProfile, n: float, *, window=WINDOW, per_decade: int = 16,
                   golden_iters: int = 40, upper: float | None = None) -> A1Estimate:
    """Largest interval ratio found: breakpoint pairs, lattice pairs over the
    radius window and golden-section refinement of the best pair.

    The ratio is scale invariant for pure powers, so the window only matters
    for profiles with breakpoints; witnesses touching it are flagged.
    """
    if not isinstance(w, _Piecewise):
        raise InvalidInput("a1_lower_bound works on piecewise profiles")
    lo_w, hi_w = window
    if not (0 < lo_w < hi_w):
        raise InvalidInput("window must satisfy 0 < lo < hi")
    bps = w.breakpoints()
    k = int(math.ceil(math.log10(hi_w / lo_w) * per_decade)) + 1
    pts = np.unique(np.concatenate([[0.0], np.geomspace(lo_w, hi_w, k), bps,
                                    bps / 2.0, bps * 2.0]))
    A, B = np.meshgrid(pts, pts, indexing="ij")
    keep = B > A
    A, B = A[keep], B[keep]
    vals = _log_ratio_pairs(w, n, A, B)
    i = int(np.argmax(vals))
    best = float(vals[i])
    wa, wb = float(A[i]), float(B[i])
    if math.isfinite(best):
        def f_a(x):
            return float(_log_ratio_pairs(w, n, np.array([x]), np.array([wb]))[0])

        def f_b(x):
            return float(_log_ratio_pairs(w, n, np.array([wa]), np.array([x]))[0])

        for _ in range(2):
            ia = int(np.searchsorted(pts, wa))
            la, ha = pts[max(ia - 1, 0)], min(pts[min(ia + 1, pts.size - 1)], wb)
            if ha > la:
                x, v = golden_max(f_a, la, ha, iters=golden_iters)
                if v > best:
                    best, wa = v, float(x)
            ib = int(np.searchsorted(pts, wb))
            lb, hb = max(pts[max(ib - 1, 0)], wa), pts[min(ib + 1, pts.size - 1)]
            if hb > lb:
                x, v = golden_max(f_b, lb, hb, iters=golden_iters)
                if v > best:
                    best, wb = v, float(x)
    lower = max(1.0, math.exp(best) if best < 709 else math.inf)
    limited = (wa > 0 and wa <= lo_w * (1 + 1e-12)) or wb >= hi_w * (1 - 1e-12)
    if upper is None:
        try:
            upper = a1_upper_from_condc(condition_c_constants(w), n)
        except InvalidInput:
            upper = math.inf
    kind = "condc" if math.isfinite(upper) else "none"
    return A1Estimate(float(n), lower, float(upper), (wa, wb), kind, bool(limited),
                      {"per_decade": per_decade, "window": tuple(window)})


@dataclass(frozen=True)
class TransportCheck:
    k: float
    n: float
    lower_n: float
    bound: float  # (n / k) * upper(k)
    ok: bool


@dataclass(frozen=True)
class DimensionSweep:
    estimates: list
    transport: list

    @property
    def all_ok(self) -> bool:
        return all(t.ok for t in self.transport) and all(e.consistent for e in self.estimates)


def a1_dimension_sweep(w: RadialProfile, schedule, *, estimates=None, **kw) -> DimensionSweep:
    """Lower bounds per dimension, with the ``n / k`` transport of upper bounds.

    An upper bound in dimension ``k`` carries to ``n >= k`` with factor
    ``n / k`` (from ``b^(n-k) (b^k - a^k) <= b^n - a^n``); the sweep both
    uses this to fill missing certificates and checks ``lower(n)`` against it.
    """
    sched = [float(x) for x in schedule]
    if not sched or any(b <= a for a, b in zip(sched, sched[1:])):
        raise InvalidInput("schedule must be nonempty and ascending")
    if estimates is None:
        raw = [a1_lower_bound(w, n, **kw) for n in sched]
    else:
        raw = list(estimates)
        if [e.n for e in raw] != sched:
            raise InvalidInput("precomputed estimates do not match the schedule")
    ests = []
    for i, e in enumerate(raw):
        best, kind = e.upper, e.certificate_kind
        for prev in raw[:i]:
            cand = e.n / prev.n * prev.upper
            if cand < best:
                best, kind = cand, "transport"
        ests.append(A1Estimate(e.n, e.lower, best, e.witness, kind, e.window_limited, e.meta))
    checks = []
    for i, en in enumerate(ests):
        for ek in ests[: i + 1]:
            if math.isfinite(ek.upper):
                bound = en.n / ek.n * ek.upper
                checks.append(TransportCheck(ek.n, en.n, en.lower, bound,
                                             en.lower <= bound * (1 + 1e-12)))
    return DimensionSweep(ests, checks)


# ---------------------------------------------------------------------------
# the (1 - |x|)^(-alpha) example on the unit ball


@dataclass(frozen=True)
class GrowthRow:
    n: float
    log_ratio: float  # log(n B(1 - alpha, n))
    log_floor: float  # log(Gamma(1 - alpha) n^alpha)
    log_margin: float  # (1 - alpha) log n - log Gamma(n + 1 - alpha) / Gamma(n)

    @property
    def ratio(self) -> float:
        return math.exp(self.log_ratio)

    @property
    def floor(self) -> float:
        return math.exp(self.log_floor)

    @property
    def ratio_over_floor(self) -> float:
        return math.exp(self.log_margin)

    @property
    def holds(self) -> bool:
        return self.log_margin >= 0.0 and self.log_ratio >= self.log_floor


def growth_example_curve(alpha: float, schedule) -> list[GrowthRow]:
    """Average of ``(1 - t)^(-alpha)`` over the unit ball (its inf there is 1)
    against the lower bound ``Gamma(1 - alpha) n^alpha``.

    The margin uses ``log_gamma_ratio`` directly so that the true slack,
    about ``alpha (1 - alpha) / (2n)``, is not lost to cancellation.
    """
    if not 0 < alpha < 1:
        raise InvalidInput("alpha must lie in (0, 1)")
    rows = []
    for n in schedule:
        n = float(n)
        if n < 1:
            raise InvalidInput("dimensions must be >= 1")
        log_ratio = math.log(n) + log_beta_moment(alpha, n)
        log_floor = lgamma(1.0 - alpha) + alpha * math.log(n)
        margin = (1.0 - alpha) * math.log(n) - log_gamma_ratio(n, 1.0 - alpha)
        rows.append(GrowthRow(n, log_ratio, log_floor, margin))
    return rows


# ---------------------------------------------------------------------------
# shifted weights


@dataclass(frozen=True)
class ShiftedRow:
    rho: float
    r: float
    maximal: float  # M_{v_k} w_rho (r)
    bound: float  # (k/2) * upper * w_rho(r)
    ratio: float  # maximal / w_rho(r)
    ok: bool


def shifted_a1_check(w: RadialProfile, k: float, rho_schedule, r_samples, *,
                     upper: float | None = None, rtol: float = 1e-6) -> list[ShiftedRow]:
    """``M_{v_k}(w0(sqrt(rho^2 + .^2)))(r) <= (k/2) upper w0(sqrt(rho^2 + r^2))``."""
    if k < 2:
        raise InvalidInput("k must be >= 2")
    if upper is None:
        upper = a1_upper_from_condc(condition_c_constants(w), k)
    if not math.isfinite(upper):
        raise CertificateMissing(f"no finite A1 certificate for this weight in dimension {k}")
    rows = []
    rs = np.asarray(r_samples, dtype=float)
    for rho in rho_schedule:
        ws = Shifted(w, float(rho))
        evs = uncentered_max_many(ws, k, rs)
        vals = ws(rs)
        for r, ev, wr in zip(rs, evs, vals):
            bound = 0.5 * k * upper * float(wr)
            rows.append(ShiftedRow(float(rho), float(r), ev.value, bound,
                                   ev.value / float(wr), ev.value <= bound * (1 + rtol)))
    return rows


# ---------------------------------------------------------------------------
# left constant of the ball / annuli comparison


@dataclass(frozen=True)
class LeftConstantWitness:
    value: float  # max A u(r) / M u(r)
    profile_index: int
    r: float
    rows: list


def left_constant_witness(n: float, profiles, r_samples, *, R_max: float | None = None,
                                  per_decade: int = 64) -> LeftConstantWitness:
    """Largest observed ``A u(r) / M u(r)``: an empirical lower bound for the
    constant relating the annuli and centred ball maximal operators."""
    if not 2 <= n <= 8:
        raise InvalidInput("the left-constant witness is run for 2 <= n <= 8")
    rows = []
    best = (0.0, -1, math.nan)
    rs = np.asarray(r_samples, dtype=float)
    for idx, u in enumerate(profiles):
        prof = _as_profile(u)
        bps = prof.breakpoints()
        reach = max(float(np.max(rs)), float(bps[-1]) if bps.size else 1.0)
        Rm = R_max if R_max is not None else 100.0 * reach
        balls = centered_ball_maximal(prof, n, rs, Rm, per_decade=per_decade)
        for r, ball in zip(rs, balls):
            ann = uncentered_max(prof, n, float(r)).value
            ratio = ann / ball.value if ball.value > 0 else (math.inf if ann > 0 else 1.0)
            rows.append((idx, float(r), ann, ball.value, ratio))
            if ratio > best[0]:
                best = (ratio, idx, float(r))
    return LeftConstantWitness(best[0], best[1], best[2], rows)
