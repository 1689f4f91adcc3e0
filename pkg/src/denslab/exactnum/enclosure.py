"""Certified real enclosures with exact rational endpoints."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational as _RationalABC

Rational = Fraction


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, _RationalABC)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


class Ordering(enum.Enum):
    LESS = "Less"
    GREATER = "Greater"
    EQUAL = "Equal"
    OVERLAP = "Overlap"


class NeedsRefinement(ArithmeticError):
    """Raised internally when an operation cannot be decided at the current precision."""


@dataclass(frozen=True)
class Enclosure:
    """A closed interval ``[lo, hi]`` known to contain some real value."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if not isinstance(self.lo, Fraction):
            object.__setattr__(self, "lo", as_fraction(self.lo))
        if not isinstance(self.hi, Fraction):
            object.__setattr__(self, "hi", as_fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value) -> Enclosure:
        v = as_fraction(value)
        return cls(v, v)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def magnitude_lower(self) -> Fraction:
        """Largest m with |x| >= m for every x in the enclosure."""
        if self.lo >= 0:
            return self.lo
        if self.hi <= 0:
            return -self.hi
        return Fraction(0)

    def contains(self, value) -> bool:
        if isinstance(value, Enclosure):
            return self.lo <= value.lo and value.hi <= self.hi
        v = as_fraction(value)
        return self.lo <= v <= self.hi

    def __add__(self, other):
        other = _lift(other)
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other):
        other = _lift(other)
        return Enclosure(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        other = _lift(other)
        if self.is_point and other.is_point:
            return Enclosure.point(self.lo * other.lo)
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Enclosure(min(products), max(products))

    __rmul__ = __mul__

    def reciprocal(self) -> Enclosure:
        if self.lo == 0 and self.hi == 0:
            raise ZeroDivisionError("division by an exact zero")
        if self.lo <= 0 <= self.hi:
            raise NeedsRefinement("divisor enclosure straddles zero")
        return Enclosure(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        other = _lift(other)
        if other.is_point and other.lo != 0:
            q = other.lo
            return Enclosure(self.lo / q, self.hi / q) if q > 0 else Enclosure(self.hi / q, self.lo / q)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return _lift(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k == 0:
            return Enclosure.point(1)
        if k < 0:
            return (self ** (-k)).reciprocal()
        lo_k, hi_k = self.lo ** k, self.hi ** k
        if k % 2 == 1 or self.lo >= 0:
            return Enclosure(lo_k, hi_k)
        if self.hi <= 0:
            return Enclosure(hi_k, lo_k)
        return Enclosure(Fraction(0), max(lo_k, hi_k))

    def intersect(self, other: Enclosure) -> Enclosure:
        return Enclosure(max(self.lo, other.lo), min(self.hi, other.hi))

    def hull(self, other: Enclosure) -> Enclosure:
        return Enclosure(min(self.lo, other.lo), max(self.hi, other.hi))

    def outward(self, k: int) -> Enclosure:
        """Widen to the dyadic grid of spacing ``2**-k`` (keeps numerators small)."""
        return Enclosure(round_down(self.lo, k), round_up(self.hi, k))

    def to_json(self) -> dict:
        return {"lo": format_rational(self.lo), "hi": format_rational(self.hi)}

    def __str__(self):
        if self.is_point:
            return f"[{format_rational(self.lo)}]"
        return f"[{float(self.lo):.17g}, {float(self.hi):.17g}]"


def _lift(value) -> Enclosure:
    if isinstance(value, Enclosure):
        return value
    return Enclosure.point(value)


def round_down(x: Fraction, k: int) -> Fraction:
    """Largest multiple of ``2**-k`` that is <= x (k may be negative)."""
    if k >= 0:
        return Fraction((x.numerator << k) // x.denominator, 1 << k)
    return Fraction((x.numerator // (x.denominator << -k)) << -k)


def round_up(x: Fraction, k: int) -> Fraction:
    return -round_down(-x, k)


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def compare(a: Enclosure, b: Enclosure) -> Ordering:
    """Order two enclosures, or report that they cannot be separated."""
    if a.hi < b.lo:
        return Ordering.LESS
    if a.lo > b.hi:
        return Ordering.GREATER
    if a.is_point and b.is_point and a.lo == b.lo:
        return Ordering.EQUAL
    return Ordering.OVERLAP


def sqrt_enclosure(arg: Enclosure, bits: int) -> Enclosure:
    """Enclose sqrt over ``arg`` on the dyadic grid of spacing ``2**-bits``.

    Exact when ``arg`` is a point whose numerator and denominator are perfect
    squares. Grid brackets nest as ``bits`` grows, so refinement never widens.
    """
    if arg.hi < 0:
        raise ValueError("sqrt of a negative value")
    if arg.lo < 0:
        if arg.is_point:
            raise ValueError("sqrt of a negative value")
        raise NeedsRefinement("sqrt argument straddles zero")
    if arg.is_point:
        exact = exact_sqrt(arg.lo)
        if exact is not None:
            return Enclosure.point(exact)
    scale = 1 << (2 * bits)
    lo_scaled = arg.lo * scale
    lo_root = math.isqrt(lo_scaled.numerator // lo_scaled.denominator)
    hi_scaled = arg.hi * scale
    hi_int = -((-hi_scaled.numerator) // hi_scaled.denominator)
    hi_root = math.isqrt(hi_int)
    if hi_root * hi_root < hi_int:
        hi_root += 1
    denom = 1 << bits
    return Enclosure(Fraction(lo_root, denom), Fraction(hi_root, denom))


def exact_sqrt(value: Fraction) -> Fraction | None:
    """Return sqrt(value) when it is rational, else None."""
    if value < 0:
        return None
    p, q = value.numerator, value.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None
