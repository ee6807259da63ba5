"""Golden-section maximization, scalar and batched."""

from __future__ import annotations

import math

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def golden_max(f, lo: float, hi: float, *, iters: int = 60, tol: float = 0.0):
    """Maximize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``.

    The endpoints are evaluated as well, so a monotone ``f`` returns its
    boundary maximum exactly.
    """
    best_x, best_f = lo, f(lo)
    fh = f(hi)
    if fh > best_f:
        best_x, best_f = hi, fh
    a, b = lo, hi
    c = a + INV_PHI2 * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = a + INV_PHI2 * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    for x, fx in ((c, fc), (d, fd)):
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x, best_f


def golden_max_batch(f, lo, hi, *, iters: int = 40):
    """Run independent golden-section searches in lockstep.

    ``f`` maps an array of abscissae (one per bracket) to an array of values.
    Returns ``(x_best, f_best)`` arrays, endpoints included.
    """
    a = np.asarray(lo, dtype=float).copy()
    b = np.asarray(hi, dtype=float).copy()
    fa = f(a)
    fb = f(b)
    best_x = np.where(fb > fa, b, a)
    best_f = np.maximum(fa, fb)
    c = a + INV_PHI2 * (b - a)
    d = a + INV_PHI * (b - a)
    fc = f(c)
    fd = f(d)
    for _ in range(iters):
        left = fc >= fd
        # left: keep [a, d]; right: keep [c, b]
        nb = np.where(left, d, b)
        na = np.where(left, a, c)
        keep_x = np.where(left, c, d)
        keep_f = np.where(left, fc, fd)
        a, b = na, nb
        probe = np.where(left, a + INV_PHI2 * (b - a), a + INV_PHI * (b - a))
        fp = f(probe)
        c = np.where(left, probe, keep_x)
        fc = np.where(left, fp, keep_f)
        d = np.where(left, keep_x, probe)
        fd = np.where(left, keep_f, fp)
    for x, fx in ((c, fc), (d, fd)):
        better = fx > best_f
        best_x = np.where(better, x, best_x)
        best_f = np.where(better, fx, best_f)
    return best_x, best_f
