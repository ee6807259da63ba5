"""Segments against radial sets and the universal maximal operator.

A segment through ``x`` and the origin span a plane, and a radial set meets
that plane in a union of annuli, so everything here is planar: ``x`` sits at
``(r0, 0)`` and the segment is ``{x + s u : a <= s <= b}`` with
``u = (cos phi, sin phi)``. Along it

    r(s)^2 = (s - s*)^2 + d^2,   s* = -r0 cos(phi),   d = r0 |sin(phi)|,

so each radius interval meets the line in at most two ``s``-intervals
whose ends are closed-form. No dimension enters the geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .a1 import a1_upper_from_condc, condition_c_constants
from .errors import BudgetExhausted, CertificateMissing, GridTooCoarse, InvalidInput
from .maximal import (
    RadialIndicatorSet,
    SimpleRadialFunction,
    TabulatedRadial,
    annuli_maximal,
    lorentz_n1_norm,
    lorentz_weak_details,
)
from .optimize import golden_max
from .rng import trial_rng, trial_seed


@dataclass(frozen=True)
class Segment2D:
    r0: float
    phi: float
    a: float
    b: float

    def __post_init__(self):
        if not (self.r0 >= 0 and math.isfinite(self.r0)):
            raise InvalidInput("r0 must be finite and >= 0")
        if not (0.0 <= self.phi <= math.pi):
            raise InvalidInput("phi must lie in [0, pi]")
        if not (self.a <= 0.0 <= self.b and self.b - self.a > 0):
            raise InvalidInput("need a <= 0 <= b with b - a > 0")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise InvalidInput("segment offsets must be finite")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def foot(self) -> float:
        """Offset of the point of the line closest to the origin."""
        return -self.r0 * math.cos(self.phi)

    @property
    def distance(self) -> float:
        return self.r0 * abs(math.sin(self.phi))

    def radius_at(self, s):
        s = np.asarray(s, dtype=float)
        return np.hypot(s - self.foot, self.distance)

    def endpoint_radii(self) -> tuple[float, float]:
        return float(self.radius_at(self.a)), float(self.radius_at(self.b))

    @property
    def nearest_radius(self) -> float:
        """Radius of the segment point closest to the origin (``|y|``)."""
        s = min(max(self.foot, self.a), self.b)
        return float(self.radius_at(s))


def _line_hits(foot, dist, intervals):
    """``s``-intervals where the line radius lies in each ``[r1, r2)``.

    ``foot`` and ``dist`` are arrays of shape ``(P,)``; returns ``lo, hi`` of
    shape ``(P, 2 m)``. Missing intervals have ``lo = hi``.
    """
    foot = np.asarray(foot, dtype=float)[:, None]
    dist = np.asarray(dist, dtype=float)[:, None]
    r1 = np.array([iv[0] for iv in intervals])[None, :]
    r2 = np.array([iv[1] for iv in intervals])[None, :]
    with np.errstate(invalid="ignore"):
        q1 = np.sqrt(np.maximum((r1 - dist) * (r1 + dist), 0.0))
        q2 = np.where(np.isfinite(r2), np.sqrt(np.maximum((r2 - dist) * (r2 + dist), 0.0)),
                      np.inf)
    empty = ~(r2 > dist)
    q2 = np.where(empty, q1, q2)
    lo = np.concatenate([foot + q1, foot - q2], axis=1)
    hi = np.concatenate([foot + q2, foot - q1], axis=1)
    return lo, hi


def _covered(lo, hi, a, b):
    """Total length of ``[lo, hi]`` pieces inside ``[a, b]`` (broadcasting)."""
    return np.sum(np.maximum(np.minimum(hi, b) - np.maximum(lo, a), 0.0), axis=-1)


def segment_radius_intersection(seg: Segment2D, E0: RadialIndicatorSet) -> float:
    """Exact length of ``{s in [a, b] : r(s) in E0}``."""
    lo, hi = _line_hits([seg.foot], [seg.distance], E0.intervals)
    return float(_covered(lo[0], hi[0], seg.a, seg.b))


@dataclass(frozen=True)
class SegmentLemmaResult:
    lhs: float  # |S ∩ E| / |S|
    rhs: float  # 2 (M_{v_k} chi_{E0}(r0))^(1/k)
    ratio: float
    ok: bool


def segment_lemma_ratio(seg: Segment2D, E0: RadialIndicatorSet, k: float, *,
                  tol: float = 1e-9) -> SegmentLemmaResult:
    """Segment average of ``chi_E`` against ``2 (M_{v_k} chi_{E0})^(1/k)``."""
    if k < 2:
        raise InvalidInput("k must be >= 2")
    lhs = segment_radius_intersection(seg, E0) / seg.length
    m = annuli_maximal(E0, k, seg.r0).value
    rhs = 2.0 * m ** (1.0 / k)
    ratio = lhs / rhs if rhs > 0 else (math.inf if lhs > 0 else 0.0)
    return SegmentLemmaResult(lhs, rhs, ratio, lhs <= rhs * (1 + tol))


def reduction_step_check(seg: Segment2D, E0: RadialIndicatorSet) -> tuple[float, float]:
    """First step of the segment lemma: with the foot ``y`` inside the segment
    and ``z`` its farther end, ``|S ∩ E| / |S| <= 2 |S_(y,z) ∩ E| / |z - y|``.

    Returns ``(lhs, bound)``; ``bound`` is ``inf`` if the foot lies outside.
    """
    lhs = segment_radius_intersection(seg, E0) / seg.length
    y = seg.foot
    if not (seg.a < y < seg.b):
        return lhs, math.inf
    far = seg.b if seg.b - y >= y - seg.a else seg.a
    lo, hi = _line_hits([seg.foot], [seg.distance], E0.intervals)
    part = float(_covered(lo[0], hi[0], min(y, far), max(y, far)))
    return lhs, 2.0 * part / abs(far - y)


# ---------------------------------------------------------------------------
# universal maximal operator on radial indicator data


@dataclass(frozen=True)
class UniversalEvaluation:
    value: float
    segment: Segment2D | None
    evaluations: int
    meta: dict = field(default_factory=dict)


def _best_over_offsets(r0, phis, intervals):
    """For each direction, the exact sup over ``a <= 0 <= b`` of the covered
    fraction. Optimal ends are 0 or ends of the hit intervals: in a gap the
    fraction falls as the segment grows and inside a hit interval it rises."""
    phis = np.asarray(phis, dtype=float)
    lo, hi = _line_hits(-r0 * np.cos(phis), r0 * np.abs(np.sin(phis)), intervals)
    real = hi > lo
    a_c = np.where(real & (lo < 0), lo, 0.0)
    b_c = np.where(real & (hi > 0), hi, 0.0)
    a_c = np.concatenate([np.zeros((phis.size, 1)), a_c], axis=1)
    b_c = np.concatenate([np.zeros((phis.size, 1)), b_c], axis=1)
    A = a_c[:, :, None, None]
    B = b_c[:, None, :, None]
    cov = _covered(lo[:, None, None, :], hi[:, None, None, :], A, B)
    width = (B - A)[..., 0]
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(width > 0, cov / width, -np.inf)
    flat = frac.reshape(phis.size, -1)
    k = np.argmax(flat, axis=1)
    ia, ib = np.unravel_index(k, frac.shape[1:])
    rows = np.arange(phis.size)
    # a line that misses E0 altogether scores 0
    best = np.maximum(flat[rows, k], 0.0)
    return best, a_c[rows, ia], b_c[rows, ib]


def universal_maximal_radial(E0: RadialIndicatorSet, r0: float, *, phi_points: int = 256,
                             golden_iters: int = 40, refine: int = 3,
                             max_evals: int | None = None) -> UniversalEvaluation:
    """Lower estimate of ``sup`` over segments through ``|x| = r0`` of the
    covered fraction of ``chi_E``.

    For each direction the offset sup is exact; directions come from a grid,
    the tangents to every boundary circle of ``E0`` and golden-section
    refinement around the best grid directions. Every reported value is the
    exact fraction of an explicit segment.
    """
    if not (r0 >= 0 and math.isfinite(r0)):
        raise InvalidInput("r0 must be finite and >= 0")
    if not E0.bounded:
        return UniversalEvaluation(1.0, None, 0, {"reason": "unbounded set"})
    for lo, hi in E0.intervals:
        if lo <= r0 <= hi:
            return UniversalEvaluation(1.0, None, 0, {"reason": "r0 in the closure of E0"})
    if r0 == 0:
        phis = np.array([0.0])
    else:
        grid = np.linspace(0.0, math.pi, phi_points)
        ends = np.array([x for iv in E0.intervals for x in iv])
        ends = ends[ends < r0]
        tang = np.arcsin(ends / r0)
        phis = np.unique(np.concatenate([grid, tang, math.pi - tang]))
    if max_evals is not None and phis.size > max_evals:
        raise BudgetExhausted("direction grid exceeds the evaluation budget", best=None)
    vals, a_best, b_best = _best_over_offsets(r0, phis, E0.intervals)
    evals = phis.size
    i = int(np.argmax(vals))
    best = (float(vals[i]), float(phis[i]), float(a_best[i]), float(b_best[i]))
    if r0 > 0 and refine > 0:
        def f(p):
            v, _, _ = _best_over_offsets(r0, [p], E0.intervals)
            return float(v[0])

        order = np.argsort(-vals, kind="stable")[:refine]
        for j in order:
            lo_p = phis[max(j - 1, 0)]
            hi_p = phis[min(j + 1, phis.size - 1)]
            if hi_p <= lo_p:
                continue
            if max_evals is not None and evals + golden_iters + 4 > max_evals:
                raise BudgetExhausted("refinement exceeds the evaluation budget", best=best[0])
            x, v = golden_max(f, float(lo_p), float(hi_p), iters=golden_iters)
            evals += golden_iters + 4
            if v > best[0]:
                _, a2, b2 = _best_over_offsets(r0, [x], E0.intervals)
                best = (v, float(x), float(a2[0]), float(b2[0]))
    if not best[0] > 0:
        return UniversalEvaluation(0.0, None, evals, {"phi_points": phi_points})
    seg = Segment2D(r0, min(max(best[1], 0.0), math.pi), best[2], best[3])
    # report the exact fraction of the returned segment
    value = segment_radius_intersection(seg, E0) / seg.length
    return UniversalEvaluation(value, seg, evals,
                               {"phi_points": phi_points, "golden_iters": golden_iters})


# ---------------------------------------------------------------------------
# sharpness of the constant 2


@dataclass(frozen=True)
class SharpnessConfig:
    """Segment ``S_(w,z)`` of length ``L`` whose closest point ``y`` to the
    origin is at distance ``ell / 2`` from ``w``; the set is the annulus
    ``|y| <= |x| <= |w|`` and the segment is evaluated at ``z``."""

    L: float
    ell: float
    y_radius: float = 1.0

    def __post_init__(self):
        if not (self.L > 0 and 0 < self.ell < self.L and self.y_radius > 0):
            raise InvalidInput("need L > 0, 0 < ell < L and |y| > 0")

    @property
    def z_radius(self) -> float:
        return math.hypot(self.y_radius, self.L - 0.5 * self.ell)

    @property
    def w_radius(self) -> float:
        return math.hypot(self.y_radius, 0.5 * self.ell)

    def annulus(self) -> RadialIndicatorSet:
        return RadialIndicatorSet.single(self.y_radius, self.w_radius)

    def segment(self) -> Segment2D:
        r0 = self.z_radius
        c = -(self.L - 0.5 * self.ell) / r0
        return Segment2D(r0, math.acos(max(-1.0, min(1.0, c))), 0.0, self.L)

    def predicted_maximal(self) -> float:
        return (0.5 * self.ell) ** 2 / (self.L - 0.5 * self.ell) ** 2

    def predicted_constant(self) -> float:
        return 2.0 * (self.L - 0.5 * self.ell) / self.L


@dataclass(frozen=True)
class SharpnessRow:
    ell_over_L: float
    lhs: float  # covered fraction, ell / L
    maximal: float  # M_{v_2} chi_{A0}(|z|)
    predicted_maximal: float
    observed_constant: float  # lhs / maximal^(1/2)
    predicted_constant: float
    universal: float  # lower estimate of the universal operator at |z|


def sharpness_curve(ratios=(1e-1, 1e-2, 1e-3), *, L: float = 1.0, y_radius: float = 1.0,
                    with_universal: bool = True) -> list[SharpnessRow]:
    rows = []
    for q in ratios:
        cfg = SharpnessConfig(L, q * L, y_radius)
        A0 = cfg.annulus()
        seg = cfg.segment()
        lhs = segment_radius_intersection(seg, A0) / seg.length
        m = annuli_maximal(A0, 2, seg.r0).value
        uni = universal_maximal_radial(A0, seg.r0).value if with_universal else math.nan
        rows.append(SharpnessRow(q, lhs, m, cfg.predicted_maximal(), lhs / math.sqrt(m),
                                 cfg.predicted_constant(), uni))
    return rows


# ---------------------------------------------------------------------------
# randomized suite


def random_indicator_set(rng: np.random.Generator, *, max_intervals: int = 4,
                         r_max: float = 3.0) -> RadialIndicatorSet:
    m = int(rng.integers(1, max_intervals + 1))
    pts = np.sort(rng.uniform(0.0, r_max, size=2 * m))
    if rng.random() < 0.2:
        pts[0] = 0.0
    ivs = [(pts[2 * i], pts[2 * i + 1]) for i in range(m) if pts[2 * i + 1] > pts[2 * i]]
    if not ivs:
        ivs = [(0.5, 1.0)]
    return RadialIndicatorSet(tuple(ivs))


def random_segment(rng: np.random.Generator, *, r_max: float = 3.0,
                   reach: float = 3.0, min_length: float = 1e-12) -> Segment2D:
    while True:
        r0 = rng.uniform(0.0, r_max)
        phi = rng.uniform(0.0, math.pi)
        a = -rng.uniform(0.0, reach)
        b = rng.uniform(0.0, reach)
        if b - a >= min_length:
            return Segment2D(r0, phi, a, b)


@dataclass(frozen=True)
class TrialRecord:
    seed: int
    k: float
    r0: float
    phi: float
    a: float
    b: float
    digest: str
    lhs: float
    rhs: float
    ratio: float


def kakeya_trials(master_seed: int, trials: int, ks=(2, 3, 5), *, start: int = 0,
                  every_k: bool = True) -> list[TrialRecord]:
    """Seeded random segments and sets, checked for every ``k`` or, with
    ``every_k=False``, for ``ks[i % len(ks)]`` only (one record per trial)."""
    out = []
    for i in range(start, start + trials):
        rng = trial_rng(master_seed, i)
        E0 = random_indicator_set(rng)
        seg = random_segment(rng)
        lhs = segment_radius_intersection(seg, E0) / seg.length
        for k in (ks if every_k else (ks[i % len(ks)],)):
            m = annuli_maximal(E0, k, seg.r0).value
            rhs = 2.0 * m ** (1.0 / k)
            ratio = lhs / rhs if rhs > 0 else (math.inf if lhs > 0 else 0.0)
            out.append(TrialRecord(trial_seed(master_seed, i), float(k), seg.r0, seg.phi,
                                   seg.a, seg.b, E0.digest(), lhs, rhs, ratio))
    return out


def monte_carlo_intersection(seg: Segment2D, E0: RadialIndicatorSet, rng, samples: int
                             ) -> tuple[float, float]:
    """Jittered stratified arc-length estimate and a standard error bound.

    The error reported is the binomial one of plain sampling, which bounds
    the stratified error from above; a hit fraction of 0 or 1 is shrunk by
    half a sample so the bound never collapses to zero.
    """
    u = (np.arange(samples) + rng.random(samples)) / samples
    s = seg.a + seg.length * u
    hits = int(np.count_nonzero(E0.contains(seg.radius_at(s))))
    est = seg.length * hits / samples
    p = (hits + 0.5) / (samples + 1.0)
    return est, seg.length * math.sqrt(p * (1.0 - p) / samples)


# ---------------------------------------------------------------------------
# Lorentz inequality for the universal operator


@dataclass(frozen=True)
class LorentzBoundResult:
    lhs: float
    rhs: float
    passed: bool
    upper: float
    level: float
    nodes: int
    meta: dict = field(default_factory=dict)


def superposed_universal(f: SimpleRadialFunction, radii, **kw) -> np.ndarray:
    """``sum_j c_j K chi_{E_j}`` at each radius (an upper bound for ``K f``)."""
    out = np.zeros(len(radii))
    for c, E in f.layers:
        out += c * np.array([universal_maximal_radial(E, float(r), **kw).value for r in radii])
    return out


def default_radii(f: SimpleRadialFunction, *, per_decade: int = 48, reach: float = 1e3
                  ) -> np.ndarray:
    edges = np.unique(np.concatenate([E.edges() for _, E in f.layers]))
    top = float(edges[-1]) if edges.size else 1.0
    pos = edges[edges > 0]
    bottom = float(pos[0]) if pos.size else top
    lo = 1e-3 * bottom
    k = int(math.ceil(math.log10(reach * top / lo) * per_decade)) + 1
    return np.unique(np.concatenate([[0.0], np.geomspace(lo, reach * top, k), edges]))


def lorentz_bound_check(f: SimpleRadialFunction, w, n: float, radii=None, *,
                    upper: float | None = None, g_values=None, spread_tol: float = 1e-3,
                    max_rounds: int = 40, **kw) -> LorentzBoundResult:
    """``||K f||_{L^{n,inf}(w)} <= (2n/(n-1)) (2 upper)^(1/n) ||f||_{L^{n,1}(w)}``.

    ``K f`` is replaced by the superposition of the layers (the form the
    proof bounds) and tabulated on ``radii``, piecewise constant from each
    node and zero past the last one. Cells crossing the attaining level
    with a large jump are bisected until the level set is resolved.
    """
    if n < 2:
        raise InvalidInput("n must be >= 2")
    if upper is None:
        upper = a1_upper_from_condc(condition_c_constants(w), n) if w is not None else 4.0
    if not math.isfinite(upper):
        raise CertificateMissing(f"no finite A1 certificate in dimension {n}")
    norm = lorentz_n1_norm(f, w, n)
    rhs = 2.0 * n / (n - 1.0) * (2.0 * upper) ** (1.0 / n) * norm
    if f.is_zero:
        return LorentzBoundResult(0.0, rhs, True, upper, 0.0, 0)
    nodes = np.asarray(default_radii(f) if radii is None else radii, dtype=float)
    vals = (superposed_universal(f, nodes, **kw) if g_values is None
            else np.asarray(g_values, dtype=float))
    for _ in range(max_rounds):
        g = TabulatedRadial(nodes, vals[:-1])
        det = lorentz_weak_details(g, w, n, n)
        bad = g.straddles(det.level, spread_tol)
        if not bad:
            break
        mids = 0.5 * (nodes[np.array(bad) - 1] + nodes[np.array(bad)])
        mids = np.concatenate([mids, 0.5 * (nodes[np.array(bad)] + nodes[np.array(bad) + 1])])
        new_vals = superposed_universal(f, mids, **kw)
        nodes = np.concatenate([nodes, mids])
        vals = np.concatenate([vals, new_vals])
        order = np.argsort(nodes, kind="stable")
        nodes, keep = np.unique(nodes[order], return_index=True)
        vals = vals[order][keep]
    else:
        raise GridTooCoarse("level set boundary not resolved after refinement")
    lhs = det.value
    return LorentzBoundResult(lhs, rhs, lhs <= rhs, upper, det.level, int(nodes.size),
                           {"norm_n1": norm, "tabulated_to": float(nodes[-1])})
