"""One-dimensional uncentered maximal operator and radial level sets.

For a weight ``v`` on ``[0, inf)`` the operator is

    M_v g(r) = sup_{0 <= a <= r <= b} (1 / v([a, b])) int_a^b |g| v,

with ``v = t^(n-1) dt`` (the annuli operator on radial data) or
``v = w0(t) t^(n-1) dt``. All set measures use the convention
``w(E) = int_E w0(t) t^(n-1) dt``: the sphere area drops out of every ratio
we compare, so it is never computed.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DivergentMoment, GridTooCoarse, InvalidInput
from .logscalar import LogScalar, log1mexp
from .optimize import golden_max
from .quadrature import log_quad_batch
from .profiles import (
    RadialProfile,
    _Piecewise,
    multiply,
    weighted_moment,
)

_TIE = 1e-12


# ---------------------------------------------------------------------------
# radial sets and simple functions


@dataclass(frozen=True)
class RadialIndicatorSet:
    """Finite union of disjoint radius intervals ``[lo, hi)``.

    Touching intervals are merged, so the stored form is canonical.
    """

    intervals: tuple

    def __post_init__(self):
        ivs = [(float(lo), float(hi)) for lo, hi in self.intervals]
        if not ivs:
            raise InvalidInput("a radial indicator set needs at least one interval")
        for lo, hi in ivs:
            if not (lo >= 0 and hi > lo):
                raise InvalidInput(f"bad interval [{lo}, {hi})")
        ivs.sort()
        merged = [ivs[0]]
        for lo, hi in ivs[1:]:
            if lo < merged[-1][1]:
                raise InvalidInput("intervals overlap")
            if lo == merged[-1][1]:
                merged[-1] = (merged[-1][0], hi)
            else:
                merged.append((lo, hi))
        object.__setattr__(self, "intervals", tuple(merged))

    @classmethod
    def single(cls, lo: float, hi: float) -> "RadialIndicatorSet":
        return cls(((lo, hi),))

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.intervals[-1][1])

    def edges(self) -> np.ndarray:
        return np.array([x for iv in self.intervals for x in iv if math.isfinite(x)])

    def contains(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=bool)
        for lo, hi in self.intervals:
            out |= (r >= lo) & (r < hi)
        return out

    def issubset(self, other: "RadialIndicatorSet") -> bool:
        return all(
            any(olo <= lo and hi <= ohi for olo, ohi in other.intervals)
            for lo, hi in self.intervals
        )

    def to_profile(self, c: float = 1.0) -> _Piecewise:
        """``c * chi_E`` as a right-continuous piecewise constant profile."""
        cuts = np.unique(np.concatenate([[0.0], self.edges()]))
        vals = c * self.contains(cuts)
        hi = np.concatenate([cuts[1:], [math.inf]])
        return _Piecewise(cuts, hi, vals, np.zeros(cuts.size))

    def measure(self, n: float, w: RadialProfile | None = None) -> LogScalar:
        """``int_E w0(t) t^(n-1) dt`` (``w0 = 1`` when ``w`` is omitted)."""
        return _set_measure(self.intervals, n, w)

    def digest(self) -> str:
        text = ";".join(f"{lo!r},{hi!r}" for lo, hi in self.intervals)
        return hashlib.sha256(text.encode()).hexdigest()[:12]


def _log_vn(x, y, n):
    """Vectorized ``log v_n([x, y])``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    out = np.full(x.shape, -np.inf)
    live = y > x
    with np.errstate(divide="ignore", invalid="ignore"):
        fin = live & np.isfinite(y)
        ratio = np.where(x[fin] == 0, -np.inf, np.log1p((x[fin] - y[fin]) / y[fin]))
        out[fin] = n * np.log(y[fin]) + log1mexp(np.minimum(n * ratio, 0.0)) - math.log(n)
    out[live & ~np.isfinite(y)] = np.inf
    return out


def _log_w_moments(w, x, y, n):
    """Vectorized log moments of ``w`` (``None`` means ``w0 = 1``)."""
    if w is None:
        return _log_vn(x, y, n)
    if w.is_piecewise:
        return w.log_moments(x, y, n)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    out = np.full(x.shape, -np.inf)
    for idx in np.ndindex(x.shape):
        if y[idx] > x[idx]:
            try:
                out[idx] = weighted_moment(w, float(x[idx]), float(y[idx]), n).log
            except DivergentMoment:
                out[idx] = np.inf
    return out


def _set_measure(intervals, n, w=None) -> LogScalar:
    if not intervals:
        return LogScalar.zero()
    lo = np.array([iv[0] for iv in intervals])
    hi = np.array([iv[1] for iv in intervals])
    logs = _log_w_moments(w, lo, hi, n)
    if np.any(logs == np.inf):
        return LogScalar.inf()
    return LogScalar.from_log(float(np.logaddexp.reduce(logs)))


class SimpleRadialFunction:
    """``f = sum_j c_j chi_{E_j}`` with nested sets ``E_1 ⊇ E_2 ⊇ ...``."""

    def __init__(self, layers: Sequence[tuple[float, RadialIndicatorSet]] = ()):
        layers = [(float(c), E) for c, E in layers]
        for c, _ in layers:
            if not (c > 0 and math.isfinite(c)):
                raise InvalidInput(f"layer heights must be positive and finite, got {c}")
        for (_, outer), (_, inner) in zip(layers, layers[1:]):
            if not inner.issubset(outer):
                raise InvalidInput("layers must be nested: E_(j+1) must lie inside E_j")
        self.layers = tuple(layers)

    @property
    def is_zero(self) -> bool:
        return not self.layers

    def to_profile(self) -> _Piecewise:
        if not self.layers:
            return _Piecewise([0.0], [math.inf], [0.0], [0.0])
        cuts = np.unique(np.concatenate([[0.0]] + [E.edges() for _, E in self.layers]))
        vals = np.zeros(cuts.size)
        for c, E in self.layers:
            vals += c * E.contains(cuts)
        hi = np.concatenate([cuts[1:], [math.inf]])
        return _Piecewise(cuts, hi, vals, np.zeros(cuts.size))

    def sup(self) -> float:
        return float(sum(c for c, _ in self.layers))

    def l1_norm(self, n: float, w: RadialProfile | None = None) -> LogScalar:
        """``int f0 w0 t^(n-1) dt``."""
        total = LogScalar.zero()
        for c, E in self.layers:
            total = total + c * E.measure(n, w)
        return total

    def __repr__(self):
        return f"SimpleRadialFunction({[(c, E.intervals) for c, E in self.layers]})"


def _as_profile(f) -> RadialProfile:
    if isinstance(f, SimpleRadialFunction):
        return f.to_profile()
    if isinstance(f, RadialIndicatorSet):
        return f.to_profile()
    if isinstance(f, RadialProfile):
        return f
    raise InvalidInput(f"cannot interpret {type(f).__name__} as a radial function")


# ---------------------------------------------------------------------------
# uncentered maximal operator


@dataclass(frozen=True)
class MaximalEvaluation:
    value: float
    witness: tuple  # (a, b); a == b == r marks the limit of shrinking intervals
    method: str  # "breakpoint-exact" or "grid+refine"
    resolution: dict = field(default_factory=dict)

    @property
    def value_log(self) -> float:
        return math.log(self.value) if self.value > 0 else -math.inf


def _tail_limit(f: RadialProfile) -> float:
    """``lim_{t -> inf} f(t)`` for profiles with a power tail."""
    c = f.tail_coeff
    g = f.tail_exponent
    if c == 0:
        return 0.0
    if g > 0:
        return math.inf
    if g == 0:
        return c
    return 0.0


class _Averager:
    """``v``-averages of ``f`` over intervals, vectorized over endpoint arrays."""

    def __init__(self, f: RadialProfile, n: float, w_density: RadialProfile | None):
        self.f = f
        self.n = float(n)
        self.wd = w_density
        self.num = f if w_density is None else multiply(f, w_density)
        self.tail = _tail_limit(f)
        # v([a, inf)) is infinite unless the density decays fast enough
        self.den_inf_finite = (
            w_density is not None and w_density.tail_coeff > 0
            and w_density.tail_exponent + n < 0
        )
        self.table = None

    def tabulate(self, points):
        """Cache prefix moments of a quadrature-only numerator on ``points``."""
        if not self.num.is_piecewise:
            self.table = _PrefixTable(self.num, self.n, points)

    def _log_num(self, a, b):
        if self.table is not None:
            hit = self.table.lookup(a, b)
            if hit is not None:
                return hit
        return _log_w_moments(self.num, a, b, self.n)

    def log_parts(self, a, b):
        a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        fin = np.isfinite(b)
        ln = np.full(a.shape, np.nan)
        ld = np.full(a.shape, np.nan)
        if np.any(fin):
            ln[fin] = self._log_num(a[fin], b[fin])
            ld[fin] = _log_w_moments(self.wd, a[fin], b[fin], self.n)
        if np.any(~fin) and self.den_inf_finite:
            ln[~fin] = _log_w_moments(self.num, a[~fin], b[~fin], self.n)
            ld[~fin] = _log_w_moments(self.wd, a[~fin], b[~fin], self.n)
        return ln, ld

    def average(self, a, b):
        """Averages; ``b = inf`` gives the limit, ``a == b`` gives NaN."""
        a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        ln, ld = self.log_parts(a, b)
        with np.errstate(invalid="ignore", over="ignore"):
            out = np.exp(ln - ld)
        out = np.where((ln == np.inf) & np.isfinite(ld), np.inf, out)
        out = np.where((ln == -np.inf) & (ld > -np.inf), 0.0, out)
        if not self.den_inf_finite:
            out = np.where(~np.isfinite(b), self.tail, out)
        return np.where(b > a, out, np.nan)


class _PrefixTable:
    """Prefix moments ``log int_{p_0}^{p_i}`` of a profile on sorted points.

    Cells are integrated together in one batched quadrature (in ``log t``),
    so a whole grid of interval averages costs a single adaptive sweep.
    """

    def __init__(self, prof: RadialProfile, n: float, points, *, rtol: float = 1e-10):
        pts = np.unique(np.asarray(points, dtype=float))
        pts = pts[np.isfinite(pts) & (pts >= 0)]
        self.points = pts
        cells = np.full(max(pts.size - 1, 0), -np.inf)
        lo, hi = pts[:-1], pts[1:]
        pos = lo > 0
        if np.any(pos):
            bps = prof.breakpoints()
            llo, lhi = np.log(lo[pos]), np.log(hi[pos])
            brk = [np.log(bps[(bps > x) & (bps < y)]) for x, y in zip(lo[pos], hi[pos])]

            def logf(u, k):
                with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                    return prof.log_value(np.exp(u)) + n * u

            est, _, _ = log_quad_batch(logf, llo, lhi, rtol=rtol, breakpoints=brk)
            cells[pos] = est[0]
        if pts.size > 1 and pts[0] == 0:
            try:
                cells[0] = weighted_moment(prof, 0.0, float(pts[1]), n).log
            except DivergentMoment:
                cells[0] = np.inf
        self.cum = np.concatenate([[-np.inf], np.logaddexp.accumulate(cells)])

    def lookup(self, a, b):
        ia = np.searchsorted(self.points, a)
        ib = np.searchsorted(self.points, b)
        m = self.points.size
        if np.any(ia >= m) or np.any(ib >= m):
            return None
        if not (np.all(self.points[ia] == a) and np.all(self.points[ib] == b)):
            return None
        ca = self.cum[ia]
        cb = self.cum[ib]
        out = np.full(np.shape(a), -np.inf)
        live = ib > ia
        with np.errstate(invalid="ignore"):
            diff = np.minimum(ca[live] - cb[live], 0.0)
            out[live] = cb[live] + log1mexp(diff)
        out[live & (cb == np.inf)] = np.inf
        return out


def _pick(vals, a, b):
    """Index of the best value; ties go to the smallest ``(b - a, a)``."""
    vals = np.where(np.isnan(vals), -np.inf, vals)
    best = np.max(vals)
    if best == np.inf:
        tied = vals == np.inf
    else:
        tied = vals >= best - _TIE * abs(best)
    idx = np.nonzero(tied)[0]
    order = np.lexsort((a[idx], b[idx] - a[idx]))
    return int(idx[order[0]]), float(best)


def _exact_max(avg: _Averager, r: float) -> MaximalEvaluation:
    bps = avg.f.breakpoints()
    a_c = np.unique(np.concatenate([[0.0, r], bps[bps < r]]))
    b_c = np.unique(np.concatenate([[r, math.inf], bps[bps > r]]))
    A, B = np.meshgrid(a_c, b_c, indexing="ij")
    A = A.ravel()
    B = B.ravel()
    keep = B > A
    A, B = A[keep], B[keep]
    vals = avg.average(A, B)
    i, best = _pick(vals, A, B)
    return MaximalEvaluation(
        best, (float(A[i]), float(B[i])), "breakpoint-exact",
        {"candidates": int(A.size)},
    )


def _b_search_limit(f: RadialProfile, r: float, floor: float) -> float:
    """Largest right endpoint worth searching.

    Past the last breakpoint ``P`` the profile is ``c t^g``. If ``g < 0`` an
    interior maximum in ``b`` sits where ``f(b)`` equals the average, so it
    can only beat ``floor`` while ``c b^g >= floor``.
    """
    bps = f.breakpoints()
    P = float(bps[-1]) if bps.size else 0.0
    base = max(r, P)
    c = f.tail_coeff
    g = f.tail_exponent
    if c == 0 or g >= 0 or not floor > 0:
        return max(base, 1e-300)
    return max(base, (floor / c) ** (1.0 / g))


def _lattice(lo: float, hi: float, per_decade: int) -> np.ndarray:
    """Points ``10^(j / per_decade)`` in ``[lo, hi]`` plus both ends.

    A shared lattice lets evaluations at many radii reuse one moment table.
    """
    if not (hi > lo > 0):
        return np.empty(0)
    j0 = math.ceil(math.log10(lo) * per_decade)
    j1 = math.floor(math.log10(hi) * per_decade)
    pts = 10.0 ** (np.arange(j0, j1 + 1) / per_decade)
    return np.unique(np.concatenate([[lo], pts[(pts > lo) & (pts < hi)], [hi]]))


def _thin(points, anchors, rel=1e-9):
    """Drop points within relative distance ``rel`` of an anchor they are not."""
    anchors = np.unique(anchors)
    idx = np.clip(np.searchsorted(anchors, points), 1, anchors.size - 1) if anchors.size > 1 else None
    if idx is None:
        return points
    near = np.minimum(np.abs(points - anchors[idx - 1]), np.abs(points - anchors[idx]))
    scale = np.where(np.isfinite(points), np.abs(points), 1.0)
    exact = np.isin(points, anchors)
    with np.errstate(invalid="ignore"):
        drop = (near <= rel * scale) & ~exact
    return points[~drop]


@dataclass
class _Plan:
    r: float
    a_c: np.ndarray
    b_c: np.ndarray
    floor: float
    b_lim: float
    truncated: bool


def _grid_plan(f: RadialProfile, r: float, per_decade: int, window: float,
               B_max: float | None) -> _Plan:
    bps = f.breakpoints()
    # degenerate intervals shrinking to r
    deg = [float(f(r))]
    if f.is_piecewise and r > 0:
        deg.append(f.left_limit(r))
    floor = max(deg)
    truncated = B_max is not None
    b_lim = _b_search_limit(f, r, floor) if B_max is None else float(B_max)
    b_lim = max(b_lim, r)
    a_c = [np.array([0.0, r]), bps[bps < r]]
    if r > 0:
        a_c.append(_lattice(r * window, r, per_decade))
    b_c = [np.array([r]), bps[(bps > r) & (bps <= b_lim)]]
    if not truncated:
        b_c.append(np.array([math.inf]))
    start = r if r > 0 else min(b_lim, float(bps[0]) if bps.size else 1.0) * window
    b_c.append(_lattice(start, b_lim, per_decade))
    anchors = np.concatenate([[0.0, r], bps])
    a_c = _thin(np.unique(np.concatenate(a_c)), anchors)
    b_c = _thin(np.unique(np.concatenate(b_c)), anchors)
    return _Plan(r, a_c[a_c <= r], b_c[b_c >= r], floor, b_lim, truncated)


def _grid_solve(avg: _Averager, plan: _Plan, *, per_decade: int, window: float,
                golden_iters: int) -> MaximalEvaluation:
    r, a_c, b_c, floor = plan.r, plan.a_c, plan.b_c, plan.floor
    A, B = np.meshgrid(a_c, b_c, indexing="ij")
    A = A.ravel()
    B = B.ravel()
    keep = B > A
    A, B = A[keep], B[keep]
    vals = avg.average(A, B)
    if vals.size:
        i, best = _pick(vals, A, B)
        wa, wb = float(A[i]), float(B[i])
        if avg.table is not None and math.isfinite(wb):
            # table entries come from prefix differences; recompute directly
            table, avg.table = avg.table, None
            best = float(avg.average(wa, wb))
            avg.table = table
    else:
        best, wa, wb = -math.inf, r, r
    if floor > best * (1 + _TIE) or not vals.size:
        best, wa, wb = floor, r, r

    if math.isfinite(best) and wb > wa and math.isfinite(wb):
        # coordinate-wise golden refinement between neighbouring candidates
        for _ in range(2):
            ia = int(np.searchsorted(a_c, wa))
            lo_a = a_c[max(ia - 1, 0)]
            hi_a = a_c[min(ia + 1, a_c.size - 1)]
            if hi_a > lo_a:
                xa, va = golden_max(lambda x: float(avg.average(x, wb)), lo_a, hi_a,
                                    iters=golden_iters)
                if va > best * (1 + _TIE):
                    best, wa = va, float(xa)
            jb = int(np.searchsorted(b_c, wb))
            lo_b = max(b_c[max(jb - 1, 0)], r)
            hi_b = b_c[min(jb + 1, b_c.size - 1)]
            if not math.isfinite(hi_b):
                hi_b = b_c[min(jb, b_c.size - 1)]
            if hi_b > lo_b and lo_b > wa:
                xb, vb = golden_max(lambda x: float(avg.average(wa, x)), lo_b, hi_b,
                                    iters=golden_iters)
                if vb > best * (1 + _TIE):
                    best, wb = vb, float(xb)
    return MaximalEvaluation(
        float(best), (wa, wb), "grid+refine",
        {"per_decade": per_decade, "a_window": r * window, "b_max": plan.b_lim,
         "candidates": int(A.size), "golden_iters": golden_iters,
         "truncated": plan.truncated},
    )


def uncentered_max_many(f, n: float, radii, *, w_density: RadialProfile | None = None,
                        B_max: float | None = None, per_decade: int = 32,
                        window: float = 1e-6, golden_iters: int = 40
                        ) -> list[MaximalEvaluation]:
    """``M_v f(r)`` for ``v = t^(n-1) dt`` or ``v = w_density(t) t^(n-1) dt``,
    at every radius in ``radii``.

    Piecewise constant ``f`` is solved exactly: inside a constant piece the
    average moves monotonically towards that constant, so optimal endpoints
    are breakpoints, ``r``, ``0`` or ``inf``. Other profiles are scanned on
    log grids (plus breakpoints) and refined by golden section.
    """
    rs = [float(r) for r in np.atleast_1d(np.asarray(radii, dtype=float))]
    for r in rs:
        if not r >= 0 or not math.isfinite(r):
            raise InvalidInput(f"radius must be finite and >= 0, got {r}")
    if n < 1:
        raise InvalidInput(f"dimension must be >= 1, got {n}")
    prof = _as_profile(f)
    if w_density is not None and w_density.head_exponent + n <= 0:
        raise InvalidInput("the measure v must be finite near 0")
    avg = _Averager(prof, n, w_density)
    if avg.tail == math.inf:
        return [MaximalEvaluation(math.inf, (r, math.inf), "breakpoint-exact",
                                  {"reason": "increasing power tail"}) for r in rs]
    if prof.is_piecewise and prof.is_piecewise_constant:
        return [_exact_max(avg, r) for r in rs]
    plans = [_grid_plan(prof, r, per_decade, window, B_max) for r in rs]
    if not avg.num.is_piecewise:
        pts = np.concatenate([np.concatenate([p.a_c, p.b_c]) for p in plans])
        avg.tabulate(pts[np.isfinite(pts)])
    return [_grid_solve(avg, p, per_decade=per_decade, window=window,
                        golden_iters=golden_iters) for p in plans]


def uncentered_max(f, n: float, r: float, **kw) -> MaximalEvaluation:
    """``M_v f(r)`` at a single radius; see :func:`uncentered_max_many`."""
    return uncentered_max_many(f, n, [r], **kw)[0]


def annuli_maximal(f, n: float, r: float, **kw) -> MaximalEvaluation:
    """The maximal operator over centred rings, ``M_{v_n} f0(|x|)``."""
    return uncentered_max(f, n, r, **kw)


def average_over(f, n: float, a: float, b: float, w_density=None) -> float:
    """Exact ``v``-average of ``f`` over ``[a, b]`` (limit value when ``b = inf``)."""
    avg = _Averager(_as_profile(f), n, w_density)
    return float(avg.average(a, b))


def dense_grid_max(f, n: float, r: float, *, size: int = 2048, b_max: float | None = None,
                   w_density=None) -> float:
    """Brute-force oracle: best average over a ``size x size`` grid of ``(a, b)``."""
    prof = _as_profile(f)
    avg = _Averager(prof, n, w_density)
    if b_max is None:
        bps = prof.breakpoints()
        b_max = 4.0 * max(r, float(bps[-1]) if bps.size else 1.0, 1e-12)
    a = np.linspace(0.0, r, size)
    b = np.linspace(r, b_max, size)
    best = -math.inf
    for start in range(0, size, 256):
        A, B = np.meshgrid(a[start:start + 256], b, indexing="ij")
        vals = avg.average(A.ravel(), B.ravel())
        vals = vals[~np.isnan(vals)]
        if vals.size:
            best = max(best, float(np.max(vals)))
    return best


# ---------------------------------------------------------------------------
# exact level sets of the annuli operator on simple functions


def _log_sub(x, y):
    """``log(exp(x) - exp(y))`` for ``x >= y``."""
    if y == -math.inf:
        return x
    return x + log1mexp(min(y - x, 0.0))


def annuli_level_set(f, n: float, lam: float) -> list[tuple[float, float]]:
    """``{r >= 0 : M_{v_n} f0(r) > lam}`` for piecewise constant ``f0``.

    Returned as sorted disjoint intervals (possibly unbounded). On a cell
    ``[p_k, p_(k+1))`` where ``f0 = c_k``, every competing average is either
    constant or of the form ``avg(p_i, r)`` / ``avg(r, p_j)``, each monotone
    in ``r``; their crossings of ``lam`` solve ``v_n([p, r]) = X`` exactly.
    """
    prof = _as_profile(f)
    if not (prof.is_piecewise and prof.is_piecewise_constant):
        raise InvalidInput("exact level sets need a piecewise constant function")
    if not lam > 0:
        raise InvalidInput("lambda must be positive")
    n = float(n)
    p = np.concatenate([[0.0], prof.breakpoints()])
    c = prof.coeff.astype(float)
    K = p.size
    edges = np.concatenate([p, [math.inf]])
    lognp = n * np.log(np.where(p > 0, p, 1.0))
    lognp[p == 0] = -np.inf
    log_lam = math.log(lam)
    avg = _Averager(prof, n, None)
    # prefix moments on the breakpoints
    I, J = np.meshgrid(np.arange(K), np.arange(K), indexing="ij")
    lnum = np.full((K, K), -np.inf)
    lden = np.full((K, K), -np.inf)
    up = J > I
    lnum[up] = prof.log_moments(p[I[up]], p[J[up]], n)
    lden[up] = _log_vn(p[I[up]], p[J[up]], n)
    out = []
    for k in range(K):
        lo, hi = edges[k], edges[k + 1]
        ck = c[k]
        const = max(ck, avg.tail)
        i_idx = np.arange(0, k + 1)
        j_idx = np.arange(k + 1, K)
        if j_idx.size:
            ii, jj = np.meshgrid(i_idx, j_idx, indexing="ij")
            with np.errstate(invalid="ignore"):
                pair = np.exp(lnum[ii, jj] - lden[ii, jj])
            const = max(const, float(np.nanmax(pair)))
        if const > lam:
            out.append((lo, hi))
            continue
        right_end = lo  # set contains [lo, right_end)
        left_start = hi  # set contains (left_start, hi)
        for i in range(k):
            ln, ld = lnum[i, k], lden[i, k]
            if not ln > log_lam + ld:
                continue
            if ck == lam:
                right_end = hi
                break
            log_x = _log_sub(ln, log_lam + ld) - math.log(lam - ck)
            # r^n = p_k^n + n X
            log_rn = float(np.logaddexp(lognp[k], math.log(n) + log_x))
            right_end = max(right_end, min(math.exp(log_rn / n), hi))
        if k + 1 < K:
            for j in range(k + 2, K):
                ln, ld = lnum[k + 1, j], lden[k + 1, j]
                if not ln > log_lam + ld:
                    continue
                if ck == lam:
                    left_start = lo
                    break
                log_x = _log_sub(ln, log_lam + ld) - math.log(lam - ck)
                t = math.log(n) + log_x
                if t >= lognp[k + 1]:
                    start = 0.0
                else:
                    start = math.exp(_log_sub(lognp[k + 1], t) / n)
                left_start = min(left_start, max(start, lo))
        if right_end >= left_start:
            out.append((lo, hi))
            continue
        if right_end > lo:
            out.append((lo, right_end))
        if left_start < hi:
            out.append((left_start, hi))
    merged = []
    for lo, hi in out:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        else:
            merged.append((float(lo), float(hi)))
    return merged


@dataclass(frozen=True)
class WeakTypeRow:
    f_index: int
    lam: float
    level_measure: float  # w(E_lambda)
    l1: float  # int |f0| w0 v_n
    ratio: float  # lam * w(E_lambda) / l1


@dataclass(frozen=True)
class WeakTypeResult:
    value: float
    witness: WeakTypeRow | None
    rows: list


def weak11_empirical_constant(w: RadialProfile | None, n: float, test_functions,
                              lambda_grid=None, *, grid_points: int = 64,
                              grid_span: float = 1e-3) -> WeakTypeResult:
    """``max lam * w({M_{v_n} f0 > lam}) / int |f0| w0 v_n`` over tests and levels.

    Without an explicit ``lambda_grid`` each test function gets
    ``grid_points`` geometric levels in ``[grid_span, 1) * sup f0``.
    """
    rows = []
    best = None
    for idx, f in enumerate(test_functions):
        prof = _as_profile(f)
        l1 = _set_measure_l1(prof, n, w)
        fmax = float(np.max(prof.coeff))
        if fmax == 0 or l1 == 0:
            continue
        if lambda_grid is None:
            lams = fmax * np.geomspace(grid_span, 1.0, grid_points + 1)[:-1]
        else:
            lams = np.asarray(lambda_grid, dtype=float)
        for lam in lams:
            ivs = annuli_level_set(prof, n, float(lam))
            meas = float(_set_measure(ivs, n, w))
            ratio = lam * meas / l1
            row = WeakTypeRow(idx, float(lam), meas, l1, ratio)
            rows.append(row)
            if best is None or ratio > best.ratio:
                best = row
    return WeakTypeResult(best.ratio if best else 0.0, best, rows)


def _set_measure_l1(prof, n, w) -> float:
    num = prof if w is None else multiply(prof, w)
    return float(LogScalar.from_log(float(num.log_moments(0.0, math.inf, n))))


# ---------------------------------------------------------------------------
# tabulated radial functions and Lorentz functionals


class TabulatedRadial:
    """``g = values[i]`` on ``[edges[i], edges[i+1])`` and 0 past the last edge."""

    def __init__(self, edges, values):
        edges = np.asarray(edges, dtype=float)
        values = np.asarray(values, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or values.size != edges.size - 1:
            raise InvalidInput("need m + 1 edges for m cell values")
        if edges[0] < 0 or np.any(np.diff(edges) <= 0) or not np.isfinite(edges[-1]):
            raise InvalidInput("edges must be finite, nonnegative and strictly ascending")
        if np.any(values < 0) or np.any(np.isnan(values)):
            raise InvalidInput("values must be >= 0")
        self.edges = edges
        self.values = values

    @classmethod
    def from_function(cls, g, edges):
        edges = np.asarray(edges, dtype=float)
        return cls(edges, np.asarray([g(float(x)) for x in edges[:-1]], dtype=float))

    def cell_log_measures(self, w, n):
        return _log_w_moments(w, self.edges[:-1], self.edges[1:], n)

    def straddles(self, lam: float, spread_tol: float) -> list[int]:
        """Cell boundaries where neighbouring values sit strictly on both
        sides of ``lam`` with relative spread above ``spread_tol``."""
        v0 = self.values[:-1]
        v1 = self.values[1:]
        lo = np.minimum(v0, v1)
        hi = np.maximum(v0, v1)
        cross = (lo < lam) & (lam < hi)
        spread = (hi - lo) / np.where(hi > 0, hi, 1.0)
        return [int(i) + 1 for i in np.nonzero(cross & (spread > spread_tol))[0]]


def weighted_level_set_measure(g: TabulatedRadial, w: RadialProfile | None, n: float,
                               lam: float, *, spread_tol: float = 1e-3) -> LogScalar:
    """``w({g > lam})`` in the ``w0 v_n`` convention."""
    if not lam > 0:
        raise InvalidInput("lambda must be positive")
    bad = g.straddles(lam, spread_tol)
    if bad:
        raise GridTooCoarse(
            f"{len(bad)} cell boundaries straddle lambda={lam:g}, e.g. at r={g.edges[bad[0]]:g}"
        )
    sel = g.values > lam
    if not np.any(sel):
        return LogScalar.zero()
    logs = g.cell_log_measures(w, n)[sel]
    return LogScalar.from_log(float(np.logaddexp.reduce(logs)))


@dataclass(frozen=True)
class LorentzWeak:
    value: float
    level: float  # the value v at which sup_v v * w({g >= v})^(1/p) is attained
    measure: float
    straddling: list  # boundary indices straddling the attaining level


def lorentz_weak_details(g: TabulatedRadial, w, n: float, p: float) -> LorentzWeak:
    if not p >= 1:
        raise InvalidInput("p must be >= 1")
    vals = g.values
    pos = vals > 0
    if not np.any(pos):
        return LorentzWeak(0.0, 0.0, 0.0, [])
    logs = g.cell_log_measures(w, n)[pos]
    v = vals[pos]
    order = np.argsort(-v, kind="stable")
    v_sorted = v[order]
    cum = np.logaddexp.accumulate(logs[order])
    # last index of each distinct value: measure of {g >= value}
    last = np.r_[v_sorted[1:] != v_sorted[:-1], True]
    levels = v_sorted[last]
    log_meas = cum[last]
    score = np.log(levels) + log_meas / p
    k = int(np.argmax(score))
    lam = float(levels[k])
    return LorentzWeak(float(np.exp(score[k])), lam, float(np.exp(log_meas[k])),
                       g.straddles(lam, 0.0))


def lorentz_weak_norm(g: TabulatedRadial, w, n: float, p: float, *,
                      spread_tol: float = 1e-3) -> float:
    """``sup_lam lam * w({g > lam})^(1/p)`` over the levels of ``g``.

    The sup is approached as ``lam`` rises to a value of ``g``, so each
    value ``v`` contributes ``v * w({g >= v})^(1/p)``.
    """
    det = lorentz_weak_details(g, w, n, p)
    bad = g.straddles(det.level, spread_tol) if det.value > 0 else []
    if bad:
        raise GridTooCoarse(
            f"level {det.level:g} crosses {len(bad)} coarse cell boundaries"
        )
    return det.value


def lorentz_n1_norm(f: SimpleRadialFunction, w, n: float) -> float:
    """``sum_j c_j w(E_j)^(1/n)`` for nested layers."""
    total = 0.0
    for c, E in f.layers:
        total += c * float(E.measure(n, w) ** (1.0 / n))
    return total
