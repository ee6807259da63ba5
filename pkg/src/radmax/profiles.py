"""Radial profiles ``w0`` and their moments against ``t^(n-1) dt``.

Three kinds of profile are supported:

* :class:`PiecewisePower` -- ``c * t**gamma`` on consecutive pieces covering
  ``[0, inf)``. Moments are exact closed forms evaluated in log space.
* :class:`Tabulated` -- piecewise constant on the cells of a radius grid,
  a special case of the above (exponent 0, coefficients may vanish).
* :class:`Shifted` -- ``t -> base(sqrt(rho**2 + t**2))``. No closed form;
  moments go through log-domain adaptive quadrature.

Piecewise profiles are right-continuous: the value at a breakpoint is the
value of the piece that starts there. ``essinf``/``esssup`` ignore single
points, so they are the essential bounds of the a.e. class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DivergentMoment, InvalidInput
from .logscalar import LogScalar, log1mexp
from .quadrature import log_quad
from .special import log_beta_moment

DEFAULT_RTOL = 1e-10


@dataclass(frozen=True)
class PowerPiece:
    """``coeff * t**exponent`` on ``[lo, hi)``."""

    lo: float
    hi: float
    coeff: float
    exponent: float

    def __post_init__(self):
        if not (self.lo >= 0 and self.hi > self.lo):
            raise InvalidInput(f"bad piece range [{self.lo}, {self.hi})")
        if not self.coeff > 0:
            raise InvalidInput(f"piece coefficient must be positive, got {self.coeff}")
        if not math.isfinite(self.exponent):
            raise InvalidInput("piece exponent must be finite")


def _power_value(c, g, t):
    """``c * t**g`` with the conventions 0**neg = inf, inf**neg = 0, 0 * inf = 0."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        v = c * np.power(t, g)
    return np.where(c == 0, 0.0, v)


def _log_piece_moment(c, g, x, y, n):
    """Log of ``c * int_x^y t**(g + n - 1) dt`` for arrays ``x <= y``.

    Returns ``+inf`` where the integral diverges and ``-inf`` where it is 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.full(np.broadcast(x, y).shape, -np.inf)
    if c <= 0:
        return out
    x, y = np.broadcast_arrays(x, y)
    e = g + n
    live = y > x
    if not np.any(live):
        return out
    xs = x[live]
    ys = y[live]
    res = np.empty_like(xs)
    logc = math.log(c)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        fin_y = np.isfinite(ys)
        # log(x / y) without the rounding of the quotient
        d = np.where(fin_y, np.log1p((xs - ys) / np.where(fin_y, ys, 1.0)), -np.inf)
        d = np.where(xs == 0, -np.inf, d)
        if e > 0:
            res = logc + e * np.log(ys) + log1mexp(np.minimum(e * d, 0.0)) - math.log(e)
            res = np.where(fin_y, res, np.inf)
        elif e == 0:
            res = logc + np.log(-d)
            res = np.where((xs == 0) | ~fin_y, np.inf, res)
        else:
            res = logc + e * np.log(xs) + log1mexp(np.minimum(e * (-d), 0.0)) - math.log(-e)
            res = np.where(xs == 0, np.inf, res)
    out[live] = res
    return out


class RadialProfile:
    """Common interface of all profile kinds."""

    kind = "abstract"

    def __call__(self, t):
        raise NotImplementedError

    def log_value(self, t):
        with np.errstate(divide="ignore"):
            return np.log(self(t))

    def breakpoints(self) -> np.ndarray:
        return np.empty(0)

    def essinf(self, a: float, b: float) -> float:
        raise NotImplementedError

    def esssup(self, a: float, b: float) -> float:
        raise NotImplementedError

    # behaviour c * t**gamma as t -> 0 and t -> inf
    @property
    def head_exponent(self) -> float:
        raise NotImplementedError

    @property
    def tail_exponent(self) -> float:
        raise NotImplementedError

    @property
    def tail_coeff(self) -> float:
        raise NotImplementedError

    @property
    def is_piecewise(self) -> bool:
        return False

    def is_continuous_at(self, t: float) -> bool:
        raise NotImplementedError

    def scaled(self, lam: float) -> "RadialProfile":
        raise NotImplementedError

    def moment(self, a: float, b: float, n: float, *, method: str = "auto",
               rtol: float = DEFAULT_RTOL) -> LogScalar:
        return _quadrature_moment(self, a, b, n, rtol=rtol)

    def to_config(self) -> dict:
        raise NotImplementedError


class _Piecewise(RadialProfile):
    """Piecewise ``c * t**g`` with ``c >= 0``; shared by the public kinds."""

    kind = "piecewise"

    def __init__(self, lo, hi, coeff, exponent):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        self.coeff = np.asarray(coeff, dtype=float)
        self.exponent = np.asarray(exponent, dtype=float)
        k = self.lo.size
        if k == 0 or not (self.hi.size == self.coeff.size == self.exponent.size == k):
            raise InvalidInput("piece arrays must be nonempty and of equal length")
        if self.lo[0] != 0.0 or self.hi[-1] != math.inf:
            raise InvalidInput("pieces must cover [0, inf)")
        if np.any(self.hi <= self.lo) or np.any(self.lo[1:] != self.hi[:-1]):
            raise InvalidInput("pieces must be ordered, nonempty and without gaps")
        if np.any(self.coeff < 0) or not np.all(np.isfinite(self.coeff)):
            raise InvalidInput("coefficients must be finite and nonnegative")
        if not np.all(np.isfinite(self.exponent)):
            raise InvalidInput("exponents must be finite")

    @property
    def is_piecewise(self) -> bool:
        return True

    @property
    def is_piecewise_constant(self) -> bool:
        return bool(np.all(self.exponent == 0))

    def __len__(self):
        return self.lo.size

    def piece_index(self, t):
        return np.searchsorted(self.lo, np.asarray(t, dtype=float), side="right") - 1

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise InvalidInput("profiles are defined for t >= 0")
        i = self.piece_index(t)
        return _power_value(self.coeff[i], self.exponent[i], t)

    def breakpoints(self) -> np.ndarray:
        return self.lo[1:].copy()

    def _ranges(self, a, b):
        """Closure ranges ``(lo_vals, hi_vals)`` of pieces overlapping (a, b)."""
        x = np.maximum(self.lo, a)
        y = np.minimum(self.hi, b)
        live = y > x
        c = self.coeff[live]
        g = self.exponent[live]
        va = _power_value(c, g, x[live])
        vb = _power_value(c, g, y[live])
        return np.minimum(va, vb), np.maximum(va, vb)

    def essinf(self, a: float, b: float) -> float:
        if b <= a:
            return float(self(a))
        lo_vals, _ = self._ranges(a, b)
        return float(np.min(lo_vals))

    def esssup(self, a: float, b: float) -> float:
        if b <= a:
            return float(self(a))
        _, hi_vals = self._ranges(a, b)
        return float(np.max(hi_vals))

    @property
    def head_exponent(self) -> float:
        return float(self.exponent[0])

    @property
    def tail_exponent(self) -> float:
        return float(self.exponent[-1])

    @property
    def tail_coeff(self) -> float:
        return float(self.coeff[-1])

    def left_limit(self, t: float) -> float:
        i = int(self.piece_index(t))
        if i > 0 and self.lo[i] == t:
            i -= 1
        return float(_power_value(self.coeff[i], self.exponent[i], t))

    def is_continuous_at(self, t: float) -> bool:
        right = float(self(t))
        if not math.isfinite(right):
            return False
        left = self.left_limit(t)
        return math.isclose(left, right, rel_tol=1e-12, abs_tol=0.0)

    def log_moments(self, x, y, n: float) -> np.ndarray:
        """Vectorized ``log int_x^y w0(t) t^(n-1) dt`` (``+inf`` when divergent)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        total = np.full(np.broadcast(x, y).shape, -np.inf)
        for lo, hi, c, g in zip(self.lo, self.hi, self.coeff, self.exponent):
            xi = np.clip(x, lo, hi)
            yi = np.clip(y, lo, hi)
            total = np.logaddexp(total, _log_piece_moment(c, g, xi, yi, n))
        return total

    def moment(self, a: float, b: float, n: float, *, method: str = "auto",
               rtol: float = DEFAULT_RTOL) -> LogScalar:
        _check_interval(a, b)
        if method == "quadrature":
            return _quadrature_moment(self, a, b, n, rtol=rtol)
        lv = float(self.log_moments(a, b, n))
        if lv == math.inf:
            raise DivergentMoment(f"moment over [{a}, {b}] with n={n} diverges")
        return LogScalar.from_log(lv)

    def scaled(self, lam: float):
        return _Piecewise(self.lo, self.hi, self.coeff * lam, self.exponent)

    def pieces(self) -> list[tuple[float, float, float, float]]:
        return [tuple(map(float, p)) for p in zip(self.lo, self.hi, self.coeff, self.exponent)]

    def to_config(self) -> dict:
        return {
            "kind": "piecewise_power",
            "pieces": [
                {"lo": lo, "hi": hi, "coeff": c, "exponent": g}
                for lo, hi, c, g in self.pieces()
            ],
        }

    def __repr__(self):
        return f"{type(self).__name__}({self.pieces()})"


class PiecewisePower(_Piecewise):
    """``w0(t) = coeff * t**exponent`` piece by piece."""

    kind = "piecewise_power"

    def __init__(self, pieces: Iterable[PowerPiece | Sequence[float]]):
        ps = [p if isinstance(p, PowerPiece) else PowerPiece(*map(float, p)) for p in pieces]
        super().__init__(
            [p.lo for p in ps], [p.hi for p in ps],
            [p.coeff for p in ps], [p.exponent for p in ps],
        )

    @classmethod
    def power(cls, exponent: float, coeff: float = 1.0) -> "PiecewisePower":
        return cls([PowerPiece(0.0, math.inf, coeff, exponent)])

    @classmethod
    def constant(cls, c: float = 1.0) -> "PiecewisePower":
        return cls.power(0.0, c)

    def scaled(self, lam: float) -> "PiecewisePower":
        if not lam > 0:
            raise InvalidInput("scale factor must be positive")
        return PiecewisePower(
            [(lo, hi, c * lam, g) for lo, hi, c, g in self.pieces()]
        )


class Tabulated(_Piecewise):
    """Piecewise constant profile: ``values[i]`` on ``[grid[i], grid[i+1])``.

    The first value also covers ``[0, grid[0])`` and the last one extends
    to infinity.
    """

    kind = "tabulated"

    def __init__(self, grid, values):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.size == 0 or grid.size != values.size:
            raise InvalidInput("grid and values must be 1-D of equal nonzero length")
        if np.any(np.diff(grid) <= 0) or grid[0] < 0:
            raise InvalidInput("grid must be nonnegative and strictly ascending")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise InvalidInput("tabulated values must be finite and >= 0")
        self.grid = grid
        self.values = values
        lo = np.concatenate([[0.0], grid[1:]])
        hi = np.concatenate([grid[1:], [math.inf]])
        super().__init__(lo, hi, values, np.zeros_like(values))

    def scaled(self, lam: float) -> "Tabulated":
        return Tabulated(self.grid, self.values * lam)

    def to_config(self) -> dict:
        return {"kind": "tabulated", "grid": self.grid.tolist(), "values": self.values.tolist()}


class Shifted(RadialProfile):
    """``t -> base(sqrt(rho**2 + t**2))``."""

    kind = "shifted"

    def __init__(self, base: RadialProfile, rho: float):
        if not rho >= 0 or not math.isfinite(rho):
            raise InvalidInput(f"shift rho must be finite and >= 0, got {rho}")
        self.base = base
        self.rho = float(rho)

    def _lift(self, t):
        return np.hypot(self.rho, np.asarray(t, dtype=float))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise InvalidInput("profiles are defined for t >= 0")
        return self.base(self._lift(t))

    def log_value(self, t):
        return self.base.log_value(self._lift(t))

    def breakpoints(self) -> np.ndarray:
        p = self.base.breakpoints()
        p = p[p > self.rho]
        return np.sqrt(p * p - self.rho * self.rho)

    def essinf(self, a, b):
        return self.base.essinf(float(self._lift(a)), float(self._lift(b)))

    def esssup(self, a, b):
        return self.base.esssup(float(self._lift(a)), float(self._lift(b)))

    @property
    def head_exponent(self) -> float:
        return 0.0 if self.rho > 0 else self.base.head_exponent

    @property
    def tail_exponent(self) -> float:
        return self.base.tail_exponent

    @property
    def tail_coeff(self) -> float:
        return self.base.tail_coeff

    def is_continuous_at(self, t: float) -> bool:
        return self.base.is_continuous_at(float(self._lift(t)))

    def scaled(self, lam: float) -> "Shifted":
        return Shifted(self.base.scaled(lam), self.rho)

    def to_config(self) -> dict:
        return {"kind": "shifted", "rho": self.rho, "base": self.base.to_config()}

    def __repr__(self):
        return f"Shifted({self.base!r}, rho={self.rho})"


class _Product(RadialProfile):
    """Pointwise product of two profiles, integrated by quadrature."""

    kind = "product"

    def __init__(self, f: RadialProfile, g: RadialProfile):
        self.f = f
        self.g = g

    def __call__(self, t):
        return self.f(t) * self.g(t)

    def log_value(self, t):
        return self.f.log_value(t) + self.g.log_value(t)

    def breakpoints(self):
        return np.union1d(self.f.breakpoints(), self.g.breakpoints())

    @property
    def head_exponent(self):
        return self.f.head_exponent + self.g.head_exponent

    @property
    def tail_exponent(self):
        return self.f.tail_exponent + self.g.tail_exponent

    @property
    def tail_coeff(self):
        return self.f.tail_coeff * self.g.tail_coeff

    def is_continuous_at(self, t):
        return self.f.is_continuous_at(t) and self.g.is_continuous_at(t)


def multiply(f: RadialProfile, g: RadialProfile) -> RadialProfile:
    """Product profile; piecewise inputs give an exact piecewise result."""
    if f.is_piecewise and g.is_piecewise:
        cuts = np.union1d(f.lo, g.lo)
        lo = cuts
        hi = np.concatenate([cuts[1:], [math.inf]])
        i = f.piece_index(lo)
        j = g.piece_index(lo)
        return _Piecewise(lo, hi, f.coeff[i] * g.coeff[j], f.exponent[i] + g.exponent[j])
    return _Product(f, g)


# ---------------------------------------------------------------------------
# moments


def _check_interval(a, b):
    if not (a >= 0 and b >= a) or math.isnan(a) or math.isnan(b):
        raise InvalidInput(f"need 0 <= a <= b, got [{a}, {b}]")


def _scan_cutoff(g, start, step, rate, peak, log_eps=math.log(1e-17), limit=4000):
    """Walk ``u`` from ``start`` by ``step`` until the exponential tail of
    ``exp(g)`` with decay ``rate`` is below ``eps`` relative to ``peak``."""
    u = start
    for _ in range(limit):
        val = float(g(np.array([u]))[0])
        peak = max(peak, val)
        if val == -math.inf or val - math.log(rate) < peak + log_eps:
            return u, val, peak
        u += step
    raise DivergentMoment("could not bound the moment tail")


def _quadrature_moment(w: RadialProfile, a: float, b: float, n: float, *,
                       rtol: float = DEFAULT_RTOL) -> LogScalar:
    """``int_a^b w0(t) t^(n-1) dt`` by adaptive quadrature in ``u = log t``.

    Integrating in ``log t`` is the substitution ``t = b exp(-s/n)`` up to an
    affine change; it resolves the concentration of ``t^(n-1)`` at the right
    endpoint for large ``n``.
    """
    _check_interval(a, b)
    if a == b:
        return LogScalar.zero()
    head_rate = w.head_exponent + n
    tail_rate = -(w.tail_exponent + n)
    if a == 0 and head_rate <= 0:
        raise DivergentMoment(f"moment near 0 diverges (exponent {w.head_exponent}, n={n})")
    if b == math.inf and tail_rate <= 0:
        raise DivergentMoment(f"moment at infinity diverges (exponent {w.tail_exponent}, n={n})")

    def g(u):
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            return w.log_value(np.exp(u)) + n * u

    bps = w.breakpoints()
    bps = bps[(bps > a) & (bps < b)]
    anchor = [math.log(p) for p in bps]
    tail_logs = []
    peak = -math.inf
    if a > 0:
        u_lo = math.log(a)
    else:
        start = min([0.0] + anchor + ([math.log(b)] if b < math.inf else []))
        u_lo, val, peak = _scan_cutoff(g, start, -1.0, head_rate, peak)
        tail_logs.append(val - math.log(head_rate))
    if b < math.inf:
        u_hi = math.log(b)
    else:
        start = max([u_lo + 1.0, 0.0] + anchor)
        u_hi, val, peak = _scan_cutoff(g, start, 1.0, tail_rate, peak)
        tail_logs.append(val - math.log(tail_rate))
    res = log_quad(g, u_lo, u_hi, rtol=rtol, breakpoints=np.array(anchor))
    total = float(res.log_value[0])
    for t in tail_logs:
        total = float(np.logaddexp(total, t))
    return LogScalar.from_log(total)


def vn_measure(a: float, b: float, n: float) -> LogScalar:
    """``v_n([a, b]) = int_a^b t^(n-1) dt = (b^n - a^n) / n`` in log space."""
    _check_interval(a, b)
    if n < 1:
        raise InvalidInput(f"dimension must be >= 1, got {n}")
    if b == math.inf:
        return LogScalar.inf()
    if a == b:
        return LogScalar.zero()
    ratio = -math.inf if a == 0 else math.log1p((a - b) / b)
    return LogScalar.from_log(n * math.log(b) + log1mexp(n * ratio) - math.log(n))


def weighted_moment(w: RadialProfile, a: float, b: float, n: float, *,
                    method: str = "auto", rtol: float = DEFAULT_RTOL) -> LogScalar:
    """``int_a^b w0(t) t^(n-1) dt``.

    Piecewise profiles use exact per-piece closed forms unless
    ``method="quadrature"``; shifted profiles always use quadrature.
    Raises :class:`DivergentMoment` for non-integrable moments.
    """
    if method not in ("auto", "closed", "quadrature"):
        raise InvalidInput(f"unknown method {method!r}")
    if method == "closed" and not w.is_piecewise:
        raise InvalidInput(f"no closed form for {w.kind} profiles")
    return w.moment(a, b, n, method=method, rtol=rtol)


def beta_moment(alpha: float, n: float) -> LogScalar:
    """``int_0^1 (1 - t)^(-alpha) t^(n-1) dt = Gamma(1-alpha) Gamma(n) / Gamma(n+1-alpha)``."""
    if not (0 <= alpha < 1):
        raise InvalidInput(f"alpha must lie in [0, 1), got {alpha}")
    if n < 1:
        raise InvalidInput(f"dimension must be >= 1, got {n}")
    return LogScalar.from_log(log_beta_moment(alpha, n))


def profile_essinf(w: RadialProfile, a: float, b: float) -> float:
    return w.essinf(a, b)


def profile_esssup(w: RadialProfile, a: float, b: float) -> float:
    return w.esssup(a, b)


# ---------------------------------------------------------------------------
# config format


def _num(x) -> float:
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return math.inf
        return float(s)
    return float(x)


def profile_from_config(cfg: dict) -> RadialProfile:
    """Build a profile from the structured description used in config files.

    ``{"kind": "piecewise_power", "pieces": [{"lo", "hi", "coeff", "exponent"}, ...]}``,
    ``{"kind": "shifted", "rho": ..., "base": {...}}`` or
    ``{"kind": "tabulated", "grid": [...], "values": [...]}``.
    """
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise InvalidInput("profile description needs a 'kind'")
    kind = cfg["kind"]
    if kind == "piecewise_power":
        pieces = cfg.get("pieces")
        if not pieces:
            raise InvalidInput("piecewise_power needs a nonempty 'pieces' list")
        try:
            return PiecewisePower(
                PowerPiece(_num(p["lo"]), _num(p["hi"]), _num(p["coeff"]), _num(p["exponent"]))
                for p in pieces
            )
        except KeyError as exc:
            raise InvalidInput(f"piece is missing field {exc}") from None
    if kind == "shifted":
        return Shifted(profile_from_config(cfg["base"]), _num(cfg.get("rho", 0.0)))
    if kind == "tabulated":
        return Tabulated([_num(g) for g in cfg["grid"]], [_num(v) for v in cfg["values"]])
    raise InvalidInput(f"unknown profile kind {kind!r}")
