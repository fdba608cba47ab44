"""Exact rationals, quadratic irrationals and certified enclosures.

Every non-rational quantity in the project is reported as an ``Enclosure``:
a closed interval with ``Fraction`` endpoints that is guaranteed to contain
the exact value. Irrational evaluation points are quadratic irrationals
``u + v*sqrt(w)``, which keeps every order comparison exactly decidable.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

from mpmath import bernfrac
from primefac import introot

logger = logging.getLogger(__name__)

# Refinement schedule for floor/ceil/ordering decisions: start coarse, then
# shrink the width cap by 2**REFINE_STEP_BITS per round.
REFINE_START_BITS = 16
REFINE_STEP_BITS = 32
REFINE_MAX_ROUNDS = 4096
# correction terms tried before the tail expansion of a progression gives up
EULER_MACLAURIN_MAX_TERMS = 256


def as_fraction(value: Union[int, Fraction]) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


@dataclass(frozen=True)
class Enclosure:
    """Closed rational interval certified to contain a real value."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", as_fraction(self.lo))
        object.__setattr__(self, "hi", as_fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"Enclosure endpoints out of order: [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value: Union[int, Fraction]) -> "Enclosure":
        return cls(value, value)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, value: Union[int, Fraction, "Enclosure"]) -> bool:
        if isinstance(value, Enclosure):
            return self.lo <= value.lo and value.hi <= self.hi
        return self.lo <= value <= self.hi

    def intersects(self, other: "Enclosure") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def is_within(self, lo: Fraction, hi: Fraction) -> bool:
        return lo <= self.lo and self.hi <= hi

    def __add__(self, other: Union["Enclosure", int, Fraction]) -> "Enclosure":
        if isinstance(other, Enclosure):
            return Enclosure(self.lo + other.lo, self.hi + other.hi)
        return Enclosure(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __sub__(self, other: Union["Enclosure", int, Fraction]) -> "Enclosure":
        if isinstance(other, Enclosure):
            return Enclosure(self.lo - other.hi, self.hi - other.lo)
        return Enclosure(self.lo - other, self.hi - other)

    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi, -self.lo)

    def scale(self, factor: Union[int, Fraction]) -> "Enclosure":
        if factor >= 0:
            return Enclosure(self.lo * factor, self.hi * factor)
        return Enclosure(self.hi * factor, self.lo * factor)

    def __truediv__(self, divisor: Union[int, Fraction]) -> "Enclosure":
        if divisor <= 0:
            raise ValueError("Enclosure division requires a positive rational divisor")
        return Enclosure(self.lo / divisor, self.hi / divisor)

    def clamp_nonnegative(self) -> "Enclosure":
        return Enclosure(max(self.lo, Fraction(0)), max(self.hi, Fraction(0)))

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


@lru_cache(maxsize=65536)
def _isqrt_bracket(radicand: int, bits: int) -> int:
    return introot(radicand << (2 * bits), 2)


def _is_square(n: int) -> bool:
    return n >= 0 and introot(n, 2) ** 2 == n


def _sign(value) -> int:
    return (value > 0) - (value < 0)


def _surd_sign(a: Fraction, v: Fraction, w: int) -> int:
    """Exact sign of a + v*sqrt(w) for nonzero v and nonsquare w."""
    if a == 0 or _sign(a) == _sign(v):
        return _sign(v) if a == 0 else _sign(a)
    # opposite signs: the larger magnitude wins, never a tie since w is nonsquare
    return _sign(a) if a * a > v * v * w else _sign(v)


@dataclass(frozen=True)
class QuadraticIrrational:
    """The irrational number u + v*sqrt(w) with v != 0 and w a positive nonsquare."""

    u: Fraction
    v: Fraction
    w: int

    def __post_init__(self):
        object.__setattr__(self, "u", as_fraction(self.u))
        object.__setattr__(self, "v", as_fraction(self.v))
        if self.v == 0:
            raise ValueError("QuadraticIrrational needs a nonzero coefficient v")
        if not isinstance(self.w, int) or self.w <= 0:
            raise ValueError(f"QuadraticIrrational needs a positive integer radicand, got {self.w!r}")
        if _is_square(self.w):
            raise ValueError(f"Radicand {self.w} is a perfect square; the value would be rational")

    # --- exact algebra -------------------------------------------------

    def shift(self, delta: Union[int, Fraction]) -> "QuadraticIrrational":
        return QuadraticIrrational(self.u + delta, self.v, self.w)

    def __add__(self, other: Union[int, Fraction]) -> "QuadraticIrrational":
        if isinstance(other, (int, Fraction)):
            return self.shift(other)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other: Union[int, Fraction]) -> "QuadraticIrrational":
        if isinstance(other, (int, Fraction)):
            return self.shift(-other)
        return NotImplemented

    def __rsub__(self, other: Union[int, Fraction]) -> "QuadraticIrrational":
        if isinstance(other, (int, Fraction)):
            return (-self).shift(other)
        return NotImplemented

    def __neg__(self) -> "QuadraticIrrational":
        return QuadraticIrrational(-self.u, -self.v, self.w)

    def scale(self, factor: Union[int, Fraction]) -> "QuadraticIrrational":
        if factor == 0:
            raise ValueError("Scaling an irrational by zero leaves the quadratic field form")
        return QuadraticIrrational(self.u * factor, self.v * factor, self.w)

    def reciprocal(self) -> "QuadraticIrrational":
        # 1/(a + b sqrt w) = (a - b sqrt w) / (a^2 - b^2 w); the norm is nonzero
        norm = self.u * self.u - self.v * self.v * self.w
        return QuadraticIrrational(self.u / norm, -self.v / norm, self.w)

    def sign(self) -> int:
        return _surd_sign(self.u, self.v, self.w)

    def __abs__(self) -> "QuadraticIrrational":
        return -self if self.sign() < 0 else self

    # --- enclosures ----------------------------------------------------

    def enclosure_bits(self, bits: int) -> Enclosure:
        """Enclosure of width 1/(2**bits * Q), Q the denominator of v*v*w."""
        radicand = self.v * self.v * self.w
        num, den = radicand.numerator, radicand.denominator
        s = _isqrt_bracket(num * den, bits)
        scale = den << bits
        root = Enclosure(Fraction(s, scale), Fraction(s + 1, scale))
        if self.v < 0:
            root = -root
        return root + self.u

    def refine(self, width_cap: Fraction) -> Enclosure:
        width_cap = as_fraction(width_cap)
        if width_cap <= 0:
            raise ValueError("refine needs a positive width cap")
        den = (self.v * self.v * self.w).denominator
        # smallest bits with 1/(2**bits * den) <= width_cap
        target = Fraction(1) / (width_cap * den)
        bits = 0 if target <= 1 else math.ceil(target).bit_length()
        return self.enclosure_bits(bits)

    def floor(self) -> int:
        bits = REFINE_START_BITS
        for _ in range(REFINE_MAX_ROUNDS):
            box = self.enclosure_bits(bits)
            lo, hi = math.floor(box.lo), math.floor(box.hi)
            if lo == hi:
                return lo
            bits += REFINE_STEP_BITS
        raise ArithmeticError(f"floor of {self} did not settle")

    def ceil(self) -> int:
        return self.floor() + 1

    def __str__(self):
        return f"{self.u} + {self.v}*sqrt({self.w})"


Point = Union[Fraction, QuadraticIrrational]


def refine_enclosure(x: QuadraticIrrational, width_cap: Fraction) -> Enclosure:
    return x.refine(width_cap)


def point_enclosure(x: Point, bits: int) -> Enclosure:
    if isinstance(x, QuadraticIrrational):
        return x.enclosure_bits(bits)
    return Enclosure.point(x)


def _exactly_equal(x: QuadraticIrrational, y: QuadraticIrrational) -> bool:
    # u1 + v1 sqrt(w1) = u2 + v2 sqrt(w2) forces u1 = u2 and v1 sqrt(w1) = v2 sqrt(w2)
    return (
        x.u == y.u
        and _sign(x.v) == _sign(y.v)
        and x.v * x.v * x.w == y.v * y.v * y.w
    )


def compare_point(x: QuadraticIrrational, r: Union[int, Fraction]) -> int:
    """Exact order of x against a rational r: +1 if x > r, -1 if x < r."""
    return _surd_sign(x.u - r, x.v, x.w)


def compare_points(x: Point, y: Point) -> int:
    """Exact three-way comparison of two evaluation points."""
    x_irr = isinstance(x, QuadraticIrrational)
    y_irr = isinstance(y, QuadraticIrrational)
    if not x_irr and not y_irr:
        return _sign(x - y)
    if x_irr and not y_irr:
        return compare_point(x, y)
    if y_irr and not x_irr:
        return -compare_point(y, x)
    if _exactly_equal(x, y):
        return 0
    if x.w == y.w:
        dv = x.v - y.v
        du = x.u - y.u
        if dv == 0:
            return _sign(du)
        return _surd_sign(du, dv, x.w)
    bits = REFINE_START_BITS
    for _ in range(REFINE_MAX_ROUNDS):
        ex, ey = x.enclosure_bits(bits), y.enclosure_bits(bits)
        if ex.hi < ey.lo:
            return -1
        if ey.hi < ex.lo:
            return 1
        bits += REFINE_STEP_BITS
    raise ArithmeticError(f"could not separate {x} and {y}")


def point_floor(x: Point) -> int:
    if isinstance(x, QuadraticIrrational):
        return x.floor()
    return math.floor(x)


def point_ceil(x: Point) -> int:
    if isinstance(x, QuadraticIrrational):
        return x.ceil()
    return math.ceil(x)


def scale_point(x: Point, factor: Union[int, Fraction]) -> Point:
    if isinstance(x, QuadraticIrrational):
        return x.scale(factor)
    return x * factor


def sqrt_upper(value: Fraction, slack: Fraction) -> Fraction:
    """Rational r >= sqrt(value) with r*r - value <= slack."""
    value = as_fraction(value)
    if value < 0 or slack <= 0:
        raise ValueError("sqrt_upper needs value >= 0 and slack > 0")
    num, den = value.numerator, value.denominator
    bits = 0
    while True:
        s = _isqrt_bracket(num * den, bits)
        scale = den << bits
        exact = Fraction(s, scale)
        if exact * exact == value:
            return exact
        r = Fraction(s + 1, scale)
        if r * r - value <= slack:
            return r
        bits += 8


# --- series tails -------------------------------------------------------------


class Weight(str, Enum):
    INVERSE_SQUARE = "inverse-square"
    BINARY = "binary"

    def at(self, n: int) -> Fraction:
        if self is Weight.INVERSE_SQUARE:
            return Fraction(1, n * n)
        return Fraction(1, 1 << n)

    def total(self) -> Fraction:
        """Upper bound on the whole series sum over n >= 1."""
        return Fraction(2) if self is Weight.INVERSE_SQUARE else Fraction(1)


def weight_tail_bound(weight: Weight, N: int) -> Fraction:
    """Upper bound on the sum of weight(n) over n > N."""
    if N < 1:
        raise ValueError("weight_tail_bound needs N >= 1")
    if weight is Weight.INVERSE_SQUARE:
        return Fraction(1, N)
    return Fraction(1, 1 << N)


def truncation_index(weight: Weight, tolerance: Fraction) -> int:
    """Smallest N whose weight tail bound is <= tolerance."""
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    if weight is Weight.INVERSE_SQUARE:
        return max(1, math.ceil(1 / tolerance))
    N = max(1, math.ceil(1 / tolerance).bit_length() - 1)
    while weight_tail_bound(weight, N) > tolerance:
        N += 1
    return N


def shifted_tail_bounds(s: int, d: int, m: int, prefix: int = 0, sharp: bool = False) -> Enclosure:
    """Enclosure of sum_{n>=m} (s + n*d)**-2.

    The plain sandwich is [1/(d(s+md)), 1/(d(s+(m-1)d))]. With ``sharp`` the
    convexity of the summand gives [1/(d(s+md)) + f(m)/2, 1/(d(s+(m-1/2)d))].
    A ``prefix`` of terms is summed exactly before bounding the remainder.
    """
    if s < 1 or d < 1 or m < 1:
        raise ValueError(f"shifted_tail_bounds needs s, d, m >= 1, got {(s, d, m)}")
    head = Fraction(0)
    for n in range(m, m + prefix):
        head += Fraction(1, (s + n * d) ** 2)
    start = m + prefix
    lower = Fraction(1, d * (s + start * d))
    if sharp:
        lower += Fraction(1, 2 * (s + start * d) ** 2)
        upper = Fraction(2, d * (2 * s + (2 * start - 1) * d))
    else:
        upper = Fraction(1, d * (s + (start - 1) * d))
    return Enclosure(head + lower, head + upper)


@lru_cache(maxsize=None)
def _bernoulli(n: int) -> Fraction:
    p, q = bernfrac(n)
    return Fraction(int(p), int(q))


def euler_maclaurin_tail(s: int, d: int, m: int, tolerance: Fraction) -> Optional[Enclosure]:
    """Enclosure of width <= tolerance of sum_{n>=m} (s + n*d)**-2, or None.

    With u = s + m*d the expansion reads 1/(d u) + 1/(2 u**2) + sum_k B_2k d**(2k-1) / u**(2k+1).
    Every even derivative of the summand is positive and decreasing, so two
    consecutive partial sums bracket the tail. None when the correction terms
    stop shrinking before reaching the tolerance; a later start m helps then.
    """
    if s < 0 or d < 1 or m < 1:
        raise ValueError(f"euler_maclaurin_tail needs s >= 0, d, m >= 1, got {(s, d, m)}")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    u = s + m * d
    partial = Fraction(1, d * u) + Fraction(1, 2 * u * u)
    previous = None
    for k in range(1, EULER_MACLAURIN_MAX_TERMS + 1):
        term = _bernoulli(2 * k) * Fraction(d ** (2 * k - 1), u ** (2 * k + 1))
        size = abs(term)
        if previous is not None and size >= previous:
            return None
        if size <= tolerance:
            return Enclosure(min(partial, partial + term), max(partial, partial + term))
        partial += term
        previous = size
    return None


def geometric_tail(first_exponent: int, step: int) -> Fraction:
    """Exact sum_{j>=0} 2**-(first_exponent + j*step)."""
    return Fraction(1 << step, (1 << first_exponent) * ((1 << step) - 1))


class DyadicAccumulator:
    """Outward-rounded running sum at fixed binary precision.

    Each added term contributes floor(term * 2**bits) to the lower sum and
    ceil(term * 2**bits) to the upper sum, so the pair always encloses the
    exact total while the integers stay small.
    """

    def __init__(self, bits: int):
        self.bits = bits
        self._unit = 1 << bits
        self.lo = 0
        self.hi = 0
        self.terms = 0

    def add(self, term: Fraction) -> None:
        scaled = term * self._unit
        self.lo += math.floor(scaled)
        self.hi += math.ceil(scaled)
        self.terms += 1

    def add_enclosure(self, box: Enclosure) -> None:
        self.lo += math.floor(box.lo * self._unit)
        self.hi += math.ceil(box.hi * self._unit)
        self.terms += 1

    def add_upper_bound(self, bound: Fraction) -> None:
        """A term known only to lie in [0, bound]."""
        self.hi += math.ceil(bound * self._unit)
        self.terms += 1

    def add_inverse_square(self, n: int) -> None:
        sq = n * n
        self.lo += self._unit // sq
        self.hi += -(-self._unit // sq)
        self.terms += 1

    def add_binary(self, n: int) -> None:
        if n <= self.bits:
            step = 1 << (self.bits - n)
            self.lo += step
            self.hi += step
        else:
            self.hi += 1
        self.terms += 1

    def add_weight(self, weight: Weight, n: int) -> None:
        if weight is Weight.INVERSE_SQUARE:
            self.add_inverse_square(n)
        else:
            self.add_binary(n)

    def enclosure(self) -> Enclosure:
        return Enclosure(Fraction(self.lo, self._unit), Fraction(self.hi, self._unit))


def precision_for(tolerance: Fraction, max_terms: int) -> int:
    """Bits so that max_terms roundings cost at most tolerance."""
    return max(8, math.ceil(max_terms / tolerance).bit_length() + 1)
