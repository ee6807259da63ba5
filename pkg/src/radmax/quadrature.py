"""Adaptive Gauss-Kronrod (7/15) quadrature carried out in the log domain.

The integrand is supplied as its logarithm. Each panel is evaluated as
``M + log(sum w_i exp(l_i - M))`` with ``M`` the largest log value on the
panel, so integrands like ``t**(n-1)`` at ``n = 16384`` stay representable.

The driver is batched: many independent integrals (and several integrand
components sharing the same nodes) are refined together, one vectorized
Gauss-Kronrod sweep per round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureFailure

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# 15 nodes ordered -x0..-x6, 0, x6..x0 and matching weights
NODES = np.concatenate([-_XGK[:7], [0.0], _XGK[6::-1]])
KRONROD_W = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[6::-1]])
_gw = np.zeros(15)
_gw[[1, 3, 5]] = _WG[:3]
_gw[7] = _WG[3]
_gw[[9, 11, 13]] = _WG[2::-1]
GAUSS_W = _gw


@dataclass(frozen=True)
class QuadResult:
    log_value: np.ndarray  # (m,) log of each integrand component
    log_error: np.ndarray  # (m,) log of the error estimate
    panels: int
    converged: bool

    @property
    def rel_error(self) -> float:
        with np.errstate(invalid="ignore"):
            rel = np.exp(self.log_error - self.log_value)
        rel = np.where(np.isfinite(self.log_value), rel, 0.0)
        return float(np.max(rel)) if rel.size else 0.0


def _gk_panels(logf, lo, hi, owner):
    """Evaluate GK15 on panels; returns log estimate and log error, shape (m, P)."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    k = np.repeat(owner, 15)
    vals = np.asarray(logf(x.ravel(), k), dtype=float)
    if vals.ndim == 1:
        vals = vals[None, :]
    m = vals.shape[0]
    vals = vals.reshape(m, lo.size, 15)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    peak = np.max(vals, axis=2)
    safe_peak = np.where(np.isfinite(peak), peak, 0.0)
    with np.errstate(under="ignore"):
        scaled = np.exp(vals - safe_peak[..., None])
    kron = scaled @ KRONROD_W
    gauss = scaled @ GAUSS_W
    with np.errstate(divide="ignore"):
        log_half = np.log(half)
        est = safe_peak + np.log(kron) + log_half
        err = safe_peak + np.log(np.abs(kron - gauss)) + log_half
    dead = ~np.isfinite(peak)
    if np.any(peak == np.inf):
        raise QuadratureFailure("integrand is infinite at a quadrature node")
    est = np.where(dead, -np.inf, est)
    err = np.where(dead, -np.inf, err)
    return est, err


def _group_logsumexp(values, owner, count):
    """logsumexp of ``values`` (m, P) grouped by ``owner`` into (m, count)."""
    m = values.shape[0]
    out = np.full((m, count), -np.inf)
    if values.shape[1] == 0:
        return out
    peak = np.full((m, count), -np.inf)
    for j in range(m):
        np.maximum.at(peak[j], owner, values[j])
    safe = np.where(np.isfinite(peak), peak, 0.0)
    acc = np.zeros((m, count))
    with np.errstate(under="ignore"):
        contrib = np.exp(values - safe[:, owner])
    for j in range(m):
        np.add.at(acc[j], owner, contrib[j])
    with np.errstate(divide="ignore"):
        out = safe + np.log(acc)
    return np.where(np.isfinite(peak), out, -np.inf)


def log_quad_batch(logf, a, b, *, rtol=1e-10, breakpoints=None, max_rounds=60,
                   max_panels=200_000, strict=True):
    """Integrate many log-integrands at once.

    Parameters
    ----------
    logf : callable ``(x, k) -> log values``
        ``x`` and ``k`` are flat arrays of abscissae and integral indices;
        returns shape ``(len(x),)`` or ``(m, len(x))`` for ``m`` components.
    a, b : array_like
        Finite integration limits, one pair per integral.
    breakpoints : sequence of array_like, optional
        Interior points where each integrand is known to be non-smooth.

    Returns ``(log_values, log_errors, converged)`` with shapes ``(m, K)``.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    count = a.size
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("log_quad_batch needs finite limits")
    los, his, owners = [], [], []
    for k in range(count):
        pts = [a[k], b[k]]
        if breakpoints is not None and len(breakpoints[k]):
            inner = np.asarray(breakpoints[k], dtype=float)
            inner = inner[(inner > a[k]) & (inner < b[k])]
            pts = np.unique(np.concatenate([[a[k]], inner, [b[k]]]))
        for lo, hi in zip(pts[:-1], pts[1:]):
            if hi > lo:
                los.append(lo)
                his.append(hi)
                owners.append(k)
    plo = np.array(los, dtype=float)
    phi = np.array(his, dtype=float)
    pown = np.array(owners, dtype=int)
    est, err = _gk_panels(logf, plo, phi, pown)
    m = est.shape[0]
    log_rtol = math.log(rtol)
    done = np.zeros(count, dtype=bool)
    for _ in range(max_rounds):
        tot = _group_logsumexp(est, pown, count)
        tot_err = _group_logsumexp(err, pown, count)
        with np.errstate(invalid="ignore"):
            ok = (tot_err <= tot + log_rtol) | (tot_err == -np.inf)
        done = np.all(ok, axis=0)
        if np.all(done):
            break
        if plo.size > max_panels:
            break
        # relative error contribution of each panel to its own integral
        with np.errstate(invalid="ignore"):
            rel = err - tot[:, pown]
        # a component that vanishes identically gives -inf - -inf; ignore it
        rel = np.max(np.where(np.isnan(rel), -np.inf, rel), axis=0)
        npan = np.bincount(pown, minlength=count)
        worst = np.full(count, -np.inf)
        np.maximum.at(worst, pown, rel)
        split = (~done[pown]) & (
            (rel >= log_rtol - np.log(npan[pown]) - math.log(4.0))
            | (rel >= worst[pown])
        )
        split &= rel > -np.inf
        if not np.any(split):
            break
        keep = ~split
        mid = 0.5 * (plo[split] + phi[split])
        new_lo = np.concatenate([plo[split], mid])
        new_hi = np.concatenate([mid, phi[split]])
        new_own = np.concatenate([pown[split], pown[split]])
        width_ok = new_hi > new_lo
        new_lo, new_hi, new_own = new_lo[width_ok], new_hi[width_ok], new_own[width_ok]
        n_est, n_err = _gk_panels(logf, new_lo, new_hi, new_own)
        plo = np.concatenate([plo[keep], new_lo])
        phi = np.concatenate([phi[keep], new_hi])
        pown = np.concatenate([pown[keep], new_own])
        est = np.concatenate([est[:, keep], n_est], axis=1)
        err = np.concatenate([err[:, keep], n_err], axis=1)
    tot = _group_logsumexp(est, pown, count)
    tot_err = _group_logsumexp(err, pown, count)
    with np.errstate(invalid="ignore"):
        ok = (tot_err <= tot + log_rtol) | (tot_err == -np.inf)
    done = np.all(ok, axis=0)
    if strict and not np.all(done):
        raise QuadratureFailure(
            f"{int(np.sum(~done))} of {count} integrals missed rtol={rtol:g}"
        )
    return tot, tot_err, done


def log_quad(logf, a, b, *, rtol=1e-10, breakpoints=(), **kw) -> QuadResult:
    """Single integral of ``exp(logf(x))`` over ``[a, b]``.

    ``logf`` takes one array argument here.
    """
    est, err, done = log_quad_batch(
        lambda x, k: logf(x), [a], [b], rtol=rtol, breakpoints=[breakpoints], **kw
    )
    return QuadResult(est[:, 0], err[:, 0], 0, bool(done[0]))
