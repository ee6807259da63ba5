"""Nonnegative extended reals stored by their natural logarithm.

Moments such as ``int_0^1 t^(n-1) dt`` at ``n = 10**6`` under- or overflow
in double precision long before they become uninteresting, so every moment
in the package travels as a :class:`LogScalar`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering

import numpy as np

_LOG2 = math.log(2.0)


def log1mexp(x):
    """Return ``log(1 - exp(x))`` for ``x <= 0`` without cancellation.

    Works on scalars and numpy arrays. ``x = 0`` maps to ``-inf`` and
    ``x = -inf`` maps to ``0``.
    """
    if np.ndim(x) == 0:
        x = float(x)
        if x > 0.0:
            raise ValueError(f"log1mexp needs x <= 0, got {x}")
        if x == 0.0:
            return -math.inf
        if x > -_LOG2:
            return math.log(-math.expm1(x))
        return math.log1p(-math.exp(x))
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    near = x > -_LOG2
    with np.errstate(divide="ignore", invalid="ignore"):
        out[near] = np.log(-np.expm1(x[near]))
        out[~near] = np.log1p(-np.exp(x[~near]))
    return out


def logsumexp(values) -> float:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return -math.inf
    m = float(np.max(arr))
    if m == -math.inf or m == math.inf:
        return m
    return m + math.log(float(np.sum(np.exp(arr - m))))


@total_ordering
@dataclass(frozen=True)
class LogScalar:
    """A value in ``[0, +inf]``.

    Exactly one of three states holds: ``is_zero``, ``is_infinite`` or
    finite-and-positive with magnitude ``exp(log_value)``.
    """

    is_zero: bool = False
    is_infinite: bool = False
    log_value: float = 0.0

    def __post_init__(self):
        if self.is_zero and self.is_infinite:
            raise ValueError("LogScalar cannot be both zero and infinite")
        if not (self.is_zero or self.is_infinite) and not math.isfinite(self.log_value):
            raise ValueError(f"finite LogScalar needs a finite log, got {self.log_value}")

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls) -> "LogScalar":
        return cls(is_zero=True, log_value=-math.inf)

    @classmethod
    def inf(cls) -> "LogScalar":
        return cls(is_infinite=True, log_value=math.inf)

    @classmethod
    def from_log(cls, log_value: float) -> "LogScalar":
        if log_value == -math.inf:
            return cls.zero()
        if log_value == math.inf:
            return cls.inf()
        if math.isnan(log_value):
            raise ValueError("NaN log value")
        return cls(log_value=float(log_value))

    @classmethod
    def from_float(cls, x: float) -> "LogScalar":
        if x < 0 or math.isnan(x):
            raise ValueError(f"LogScalar holds nonnegative values, got {x}")
        if x == 0:
            return cls.zero()
        if math.isinf(x):
            return cls.inf()
        return cls(log_value=math.log(x))

    # views --------------------------------------------------------------
    @property
    def log(self) -> float:
        """Natural log of the value; ``-inf`` for zero, ``inf`` for infinity."""
        if self.is_zero:
            return -math.inf
        if self.is_infinite:
            return math.inf
        return self.log_value

    def __float__(self) -> float:
        if self.is_zero:
            return 0.0
        if self.is_infinite:
            return math.inf
        if self.log_value > 709.78:
            return math.inf
        return math.exp(self.log_value)

    @property
    def is_finite(self) -> bool:
        return not self.is_infinite

    # arithmetic ---------------------------------------------------------
    def __mul__(self, other):
        other = _coerce(other)
        if (self.is_zero and other.is_infinite) or (self.is_infinite and other.is_zero):
            raise ArithmeticError("0 * inf is undefined")
        if self.is_zero or other.is_zero:
            return LogScalar.zero()
        if self.is_infinite or other.is_infinite:
            return LogScalar.inf()
        return LogScalar.from_log(self.log_value + other.log_value)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other.is_zero:
            if self.is_zero:
                raise ArithmeticError("0 / 0 is undefined")
            return LogScalar.inf()
        if other.is_infinite:
            if self.is_infinite:
                raise ArithmeticError("inf / inf is undefined")
            return LogScalar.zero()
        if self.is_zero or self.is_infinite:
            return self
        return LogScalar.from_log(self.log_value - other.log_value)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, p: float):
        p = float(p)
        if p == 0:
            return LogScalar.from_log(0.0)
        if self.is_zero:
            return LogScalar.zero() if p > 0 else LogScalar.inf()
        if self.is_infinite:
            return LogScalar.inf() if p > 0 else LogScalar.zero()
        return LogScalar.from_log(p * self.log_value)

    def __add__(self, other):
        other = _coerce(other)
        if self.is_infinite or other.is_infinite:
            return LogScalar.inf()
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        return LogScalar.from_log(float(np.logaddexp(self.log_value, other.log_value)))

    __radd__ = __add__

    def __sub__(self, other):
        """Difference of two values; the result must be nonnegative."""
        other = _coerce(other)
        if other.is_zero:
            return self
        if self.is_infinite:
            if other.is_infinite:
                raise ArithmeticError("inf - inf is undefined")
            return self
        if other.is_infinite or other.log_value > self.log_value:
            raise ArithmeticError("LogScalar subtraction would be negative")
        if other.log_value == self.log_value:
            return LogScalar.zero()
        return LogScalar.from_log(self.log_value + log1mexp(other.log_value - self.log_value))

    # ordering -----------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, (LogScalar, int, float)):
            return NotImplemented
        return self.log == _coerce(other).log

    def __lt__(self, other):
        if not isinstance(other, (LogScalar, int, float)):
            return NotImplemented
        return self.log < _coerce(other).log

    def __hash__(self):
        return hash(self.log)

    def __repr__(self):
        if self.is_zero:
            return "LogScalar(0)"
        if self.is_infinite:
            return "LogScalar(inf)"
        return f"LogScalar(exp({self.log_value!r}))"


def _coerce(x) -> LogScalar:
    if isinstance(x, LogScalar):
        return x
    return LogScalar.from_float(float(x))
