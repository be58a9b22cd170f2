"""Reals carried with a certified absolute error bound.

Every operation returns a value together with a bound that covers both the
propagated input errors and the floating point rounding of the operation
itself. Rounding is accounted for by adding a few ulps of the result, which
is conservative for IEEE double arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Number = Union[int, float, Fraction]

# ulps of slack added per elementary operation
_SLACK = 4


def _ulps(x: float, k: int = _SLACK) -> float:
    return k * math.ulp(abs(x)) if math.isfinite(x) else math.inf


@dataclass(frozen=True)
class CertifiedReal:
    value: float
    abs_error: float = 0.0

    def __post_init__(self):
        if not (self.abs_error >= 0.0) or not math.isfinite(self.abs_error):
            raise ValueError(f"abs_error must be finite and >= 0, got {self.abs_error}")

    @classmethod
    def exact(cls, x: Number) -> "CertifiedReal":
        """Embed an exact number; the only error is the rounding to double."""
        v = float(x)
        if isinstance(x, int) and abs(x) < 2**53:
            return cls(v, 0.0)
        if isinstance(x, Fraction) and Fraction(v) == x:
            return cls(v, 0.0)
        if isinstance(x, float):
            return cls(v, 0.0)
        return cls(v, math.ulp(abs(v)))

    @classmethod
    def coerce(cls, x: Union["CertifiedReal", Number]) -> "CertifiedReal":
        return x if isinstance(x, CertifiedReal) else cls.exact(x)

    # interval views
    @property
    def lo(self) -> float:
        return self.value - self.abs_error

    @property
    def hi(self) -> float:
        return self.value + self.abs_error

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def overlaps(self, other: "CertifiedReal") -> bool:
        return abs(self.value - other.value) <= self.abs_error + other.abs_error

    def is_positive(self) -> bool:
        return self.lo > 0

    def __float__(self) -> float:
        return self.value

    # arithmetic
    def __add__(self, other):
        o = CertifiedReal.coerce(other)
        v = self.value + o.value
        return CertifiedReal(v, self.abs_error + o.abs_error + _ulps(v))

    __radd__ = __add__

    def __neg__(self):
        return CertifiedReal(-self.value, self.abs_error)

    def __sub__(self, other):
        return self + (-CertifiedReal.coerce(other))

    def __rsub__(self, other):
        return CertifiedReal.coerce(other) - self

    def __mul__(self, other):
        o = CertifiedReal.coerce(other)
        v = self.value * o.value
        err = (abs(self.value) * o.abs_error + abs(o.value) * self.abs_error
               + self.abs_error * o.abs_error)
        return CertifiedReal(v, err + _ulps(v))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = CertifiedReal.coerce(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("divisor interval contains zero")
        v = self.value / o.value
        # |a/b - A/B| <= (|a| eb + |b| ea) / (|b| (|b| - eb))
        b = abs(o.value)
        err = (abs(self.value) * o.abs_error + b * self.abs_error) / (b * (b - o.abs_error))
        return CertifiedReal(v, err + _ulps(v))

    def __rtruediv__(self, other):
        return CertifiedReal.coerce(other) / self

    def sqrt(self) -> "CertifiedReal":
        if self.lo < 0:
            raise ValueError("sqrt of an interval reaching below zero")
        v = math.sqrt(self.value)
        lo = math.sqrt(max(self.lo, 0.0))
        hi = math.sqrt(self.hi)
        return CertifiedReal(v, max(v - lo, hi - v) + _ulps(v))

    def log(self) -> "CertifiedReal":
        if self.lo <= 0:
            raise ValueError("log of a non-positive interval")
        v = math.log(self.value)
        err = math.log(self.hi) - math.log(self.lo) if self.abs_error else 0.0
        return CertifiedReal(v, err + _ulps(v) + 1e-300)

    def exp(self) -> "CertifiedReal":
        v = math.exp(self.value)
        err = math.exp(self.hi) - math.exp(self.lo) if self.abs_error else 0.0
        return CertifiedReal(v, err + _ulps(v))

    def __pow__(self, e: Number) -> "CertifiedReal":
        """Real power with exact exponent; requires a positive base interval."""
        if isinstance(e, int) and e >= 0:
            out = CertifiedReal(1.0)
            for _ in range(e):
                out = out * self
            return out
        if self.lo <= 0:
            raise ValueError("non-integer power of a non-positive interval")
        ef = float(e)
        v = self.value ** ef
        a, b = self.lo ** ef, self.hi ** ef
        return CertifiedReal(v, max(abs(v - a), abs(b - v)) + _ulps(v))

    def le(self, other) -> bool:
        """Certified-lenient comparison used by bound reports.

        True when the lower end of self does not exceed the upper end of other.
        """
        o = CertifiedReal.coerce(other)
        return self.lo <= o.hi

    def __repr__(self) -> str:
        return f"CertifiedReal({self.value!r} ± {self.abs_error:.3g})"


def cpi() -> CertifiedReal:
    return CertifiedReal(math.pi, math.ulp(math.pi))


def czeta_even(k: int) -> CertifiedReal:
    """zeta(k) for k = 2 or 4, from the closed forms."""
    if k == 2:
        v = math.pi ** 2 / 6
    elif k == 4:
        v = math.pi ** 4 / 90
    else:
        raise ValueError("only zeta(2) and zeta(4) are provided")
    return CertifiedReal(v, 8 * math.ulp(v))
