"""Averages of radial functions over balls in R^n via a planar reduction.

A ball ``B(z, R)`` with ``|z| = s`` is rotated so that ``z = s e_1``. A
radial integrand then depends only on ``(x_1, rho)`` with ``rho`` the
distance to the ``x_1`` axis, and the n-dimensional integral becomes a
half-disk integral with density ``rho**(n-2)``. We evaluate that planar
integral in polar coordinates about the origin, ``x_1 = t cos(theta)``,
``rho = t sin(theta)``. The profile then only sees ``t`` while the angular
factor ``int sin(theta)**(n-2) dtheta`` over the chord is a regularized
incomplete beta, computed in log space so that ``n = 16384`` works.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BreakpointAtT, DivergentMoment, InvalidInput
from .optimize import golden_max_batch
from .profiles import RadialProfile, vn_measure, weighted_moment
from .quadrature import log_quad_batch
from .special import log_beta, log_betainc

BALL_RTOL = 1e-8
_LOG_HALF = math.log(0.5)


@dataclass(frozen=True)
class BallSpec:
    """Ball of radius ``R`` centred at distance ``s`` from the origin in R^n."""

    n: float
    s: float
    R: float

    def __post_init__(self):
        if not self.n >= 2:
            raise InvalidInput(f"ball averages need n >= 2, got {self.n}")
        if not (self.s >= 0 and math.isfinite(self.s)):
            raise InvalidInput(f"centre radius must be finite and >= 0, got {self.s}")
        if not (self.R > 0 and math.isfinite(self.R)):
            raise InvalidInput(f"ball radius must be finite and > 0, got {self.R}")


@dataclass(frozen=True)
class DimensionLimitSpec:
    """Balls with ``s**2 + R**2 = T**2`` followed along a dimension schedule."""

    T: float
    s: float
    schedule: tuple

    def __post_init__(self):
        if not self.T > 0:
            raise InvalidInput("T must be positive")
        if not (0 <= self.s < self.T):
            raise InvalidInput("need 0 <= s < T")
        sched = tuple(self.schedule)
        if not sched or any(b <= a for a, b in zip(sched, sched[1:])):
            raise InvalidInput("dimension schedule must be nonempty and ascending")
        object.__setattr__(self, "schedule", sched)

    @property
    def R(self) -> float:
        return math.sqrt((self.T - self.s) * (self.T + self.s))


@dataclass(frozen=True)
class BallAverages:
    values: np.ndarray
    quad_rel_error: np.ndarray  # quadrature error estimate of the ratio
    denom_rel_error: np.ndarray  # |D_quad / D_closed - 1|


def half_disk_log_mass(n: float, R: float) -> float:
    """Log of ``int_{-R}^{R} int_0^{sqrt(R^2-u^2)} rho^(n-2) drho du``."""
    return n * math.log(R) - math.log(n - 1.0) + log_beta(0.5, 0.5 * (n + 1.0))


def _log_angular(n, s, t, R):
    """Log of ``int_0^{theta_max} sin^(n-2)`` for the chord of the circle of
    radius ``t`` inside the ball; ``theta_max = arccos((t^2+s^2-R^2)/(2st))``."""
    a = 0.5 * (n - 1.0)
    log_full = log_beta(a, 0.5)
    one_minus_c = (R - (t - s)) * (R + (t - s)) / (2.0 * s * t)
    one_plus_c = ((t + s) - R) * ((t + s) + R) / (2.0 * s * t)
    x = np.clip(one_minus_c * one_plus_c, 0.0, 1.0)
    log_i = log_betainc(a, 0.5, x)
    cap_small = t * t + s * s >= R * R
    out = np.where(
        cap_small,
        log_full + _LOG_HALF + log_i,
        log_full + np.log1p(-0.5 * np.exp(log_i)),
    )
    out = np.where(one_minus_c <= 0, -np.inf, out)
    out = np.where(one_plus_c <= 0, log_full, out)
    return out


def ball_averages(w: RadialProfile, n: float, s: float, radii, *, rtol: float = BALL_RTOL
                  ) -> BallAverages:
    """Average of ``w0(|x|)`` over ``B(s e_1, R)`` for every ``R`` in ``radii``.

    ``s`` may also be an array matching ``radii``, one centre per ball.
    """
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    s_all = np.broadcast_to(np.asarray(s, dtype=float), radii.shape).copy()
    for si, R in zip(s_all, radii):
        BallSpec(n, float(si), float(R))
    count = radii.size
    at_origin = s_all == 0
    if np.any(at_origin):
        vals = np.empty(count)
        qerr = np.zeros(count)
        derr = np.zeros(count)
        for i in np.nonzero(at_origin)[0]:
            vals[i] = float(weighted_moment(w, 0.0, radii[i], n) / vn_measure(0.0, radii[i], n))
        rest = ~at_origin
        if np.any(rest):
            sub = ball_averages(w, n, s_all[rest], radii[rest], rtol=rtol)
            vals[rest] = sub.values
            qerr[rest] = sub.quad_rel_error
            derr[rest] = sub.denom_rel_error
        return BallAverages(vals, qerr, derr)
    s = s_all

    # radii t in [0, R - s] lie entirely inside the ball: closed form
    log_full = log_beta(0.5 * (n - 1.0), 0.5)
    inner_n = np.full(count, -np.inf)
    inner_d = np.full(count, -np.inf)
    big = radii > s
    if np.any(big):
        reach = radii[big] - s[big]
        inner_d[big] = log_full + n * np.log(reach) - math.log(n)
        if w.is_piecewise:
            inner_n[big] = log_full + w.log_moments(0.0, reach, n)
        else:
            inner_n[big] = log_full + np.array([weighted_moment(w, 0.0, x, n).log for x in reach])
    lo = np.abs(radii - s)
    hi = radii + s
    width = hi - lo
    # t = lo + width (1 - cos(pi v)) / 2 removes the square-root behaviour of
    # the chord angle at both ends of [|s - R|, s + R]
    bps = w.breakpoints()
    breaks = []
    for l, h, wd in zip(lo, hi, width):
        inner = bps[(bps > l) & (bps < h)]
        breaks.append(np.arccos(np.clip(1.0 - 2.0 * (inner - l) / wd, -1.0, 1.0)) / math.pi)
    log_jac = np.log(0.5 * math.pi * width)

    def logf(v, k):
        Rk = radii[k]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = lo[k] + width[k] * (0.5 * (1.0 - np.cos(math.pi * v)))
            base = (log_jac[k] + np.log(np.sin(math.pi * v)) + (n - 1.0) * np.log(t)
                    + _log_angular(n, s[k], t, Rk))
            return np.vstack([base + w.log_value(t), base])

    zeros = np.zeros(count)
    est, err, _ = log_quad_batch(logf, zeros, zeros + 1.0, rtol=rtol, breakpoints=breaks)
    log_num = np.logaddexp(inner_n, est[0])
    log_den = np.logaddexp(inner_d, est[1])
    if np.any(log_num == np.inf):
        raise DivergentMoment("profile is not integrable over the ball")
    vals = np.exp(log_num - log_den)
    with np.errstate(invalid="ignore"):
        qerr = np.exp(err[0] - log_num) + np.exp(err[1] - log_den)
    qerr = np.nan_to_num(qerr, nan=0.0)
    closed = n * np.log(radii) + (half_disk_log_mass(n, 1.0))
    # the polar form integrates the same half disk, so D must match in closed form
    denom_err = np.abs(np.expm1(log_den - closed))
    return BallAverages(vals, qerr, denom_err)


def ball_average(w: RadialProfile, ball: BallSpec, *, rtol: float = BALL_RTOL) -> float:
    """Average of ``w0(|x|)`` over the ball ``ball``."""
    return float(ball_averages(w, ball.n, ball.s, [ball.R], rtol=rtol).values[0])


@dataclass(frozen=True)
class DimensionLimitCurve:
    rows: list  # (n, ball_average, |ball_average - w0(T)|)
    target: float
    converged: bool


def dimension_limit_curve(w: RadialProfile, spec: DimensionLimitSpec, *,
                          tail: int = 6, rtol: float = BALL_RTOL) -> DimensionLimitCurve:
    """Ball averages along the schedule, compared with ``w0(T)``."""
    if not w.is_continuous_at(spec.T):
        raise BreakpointAtT(f"profile is discontinuous at T={spec.T}")
    target = float(w(spec.T))
    rows = []
    for n in spec.schedule:
        avg = float(ball_averages(w, n, spec.s, [spec.R], rtol=rtol).values[0])
        rows.append((n, avg, abs(avg - target)))
    errs = [r[2] for r in rows]
    tail_errs = errs[-tail:]
    monotone = all(b <= a for a, b in zip(tail_errs, tail_errs[1:]))
    converged = monotone and errs[-1] < 0.01 * abs(target) if target else errs[-1] == 0
    return DimensionLimitCurve(rows, target, bool(converged))


@dataclass(frozen=True)
class CenteredMaximal:
    value: float
    argmax_R: float
    r: float
    tail_bound: float  # upper bound for every average with R >= R_max
    truncated: bool  # tail bound does not certify the value
    resolution: dict = field(default_factory=dict)


def _tail_bound(w: RadialProfile, n: float, r: float, R_max: float) -> float:
    """Upper bound of the ball average over ``B(r e_1, R)`` for all ``R >= R_max``.

    Uses ``B(r e_1, R) ⊂ B(0, R + r)`` and the power tail ``c t^g`` (g <= 0)
    beyond the last breakpoint ``P``.
    """
    g = w.tail_exponent
    c = w.tail_coeff
    bps = w.breakpoints()
    P = float(bps[-1]) if bps.size else 0.0
    if P > R_max:
        return math.inf
    head = 0.0
    if P > 0:
        head = math.exp(math.log(n) + weighted_moment(w, 0.0, P, n).log - n * math.log(R_max))
    return head + c * n / (g + n) * (1.0 + r / R_max) ** n * R_max ** g


def centered_ball_maximal(w: RadialProfile, n: float, r, R_max: float, *,
                          R_min: float | None = None, per_decade: int = 64,
                          golden_iters: int = 30, rtol: float = BALL_RTOL):
    """``sup_{0 < R <= R_max}`` of ball averages centred at distance ``r``.

    A log-spaced grid in ``R`` (``per_decade`` points per decade) is scanned
    and golden-section search refines the three best grid points. ``r`` may
    be an array, in which case a list of results is returned.
    """
    if not (2 <= n <= 16):
        raise InvalidInput(f"centered_ball_maximal supports 2 <= n <= 16, got {n}")
    scalar = np.ndim(r) == 0
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(rs < 0):
        raise InvalidInput("radius must be >= 0")
    results = []
    if w.tail_exponent > 0:
        for ri in rs:
            results.append(CenteredMaximal(math.inf, math.inf, float(ri), math.inf, False,
                                           {"reason": "increasing power tail"}))
        return results[0] if scalar else results
    tail = [_tail_bound(w, n, float(ri), R_max) for ri in rs]
    # one batched grid scan and one batched refinement for all centres
    grids, owners = [], []
    for j, ri in enumerate(rs):
        lo_R = R_min if R_min is not None else (1e-3 * ri if ri > 0 else 1e-6 * R_max)
        lo_R = min(lo_R, R_max)
        count = max(int(math.ceil(math.log10(R_max / lo_R) * per_decade)) + 1, 3)
        grids.append(np.geomspace(lo_R, R_max, count))
        owners.append(np.full(count, j))
    all_R = np.concatenate(grids)
    all_s = rs[np.concatenate(owners)]
    all_v = ball_averages(w, n, all_s, all_R, rtol=rtol).values
    bl, bh, bs, bj = [], [], [], []
    offset = 0
    for j, grid in enumerate(grids):
        vals = all_v[offset:offset + grid.size]
        offset += grid.size
        order = np.argsort(-vals, kind="stable")[:3]
        logs = np.log(grid)
        bl.append(logs[np.maximum(order - 1, 0)])
        bh.append(logs[np.minimum(order + 1, grid.size - 1)])
        bj.append(np.full(order.size, j))
    bj = np.concatenate(bj)
    br_s = rs[bj]

    def f(u):
        return ball_averages(w, n, br_s, np.exp(u), rtol=rtol).values

    xb, fb = golden_max_batch(f, np.concatenate(bl), np.concatenate(bh), iters=golden_iters)
    best_v, best_R = [], []
    offset = 0
    for j, grid in enumerate(grids):
        vals = all_v[offset:offset + grid.size]
        offset += grid.size
        mine = bj == j
        cand_R = np.concatenate([grid, np.exp(xb[mine])])
        cand_v = np.concatenate([vals, fb[mine]])
        best = float(np.max(cand_v))
        # ties go to the smaller radius
        tied = cand_v >= best * (1 - 1e-12)
        best_v.append(best)
        best_R.append(float(np.min(cand_R[tied])))
    at = ball_averages(w, n, rs, np.array(best_R), rtol=rtol)
    for j, ri in enumerate(rs):
        results.append(CenteredMaximal(
            best_v[j], best_R[j], float(ri), tail[j], bool(tail[j] > best_v[j]),
            {"per_decade": per_decade, "R_min": float(grids[j][0]), "R_max": R_max,
             "grid_points": int(grids[j].size), "golden_iters": golden_iters,
             "quad_rel_error": float(at.quad_rel_error[j]),
             "denom_rel_error": float(at.denom_rel_error[j])},
        ))
    return results[0] if scalar else results
