"""Certified evaluation of the saltus functions

    G(x) = sum over phi(n) < x of 1/n**2      (Weight.INVERSE_SQUARE)
    F(x) = sum over phi(n) < x of 2**-n       (Weight.BINARY)

``eval_saltus`` truncates by index; ``window_mass`` walks the values instead
(structured slots, encoded fractions by denominator, integers), which is what
reaches the absolute precision needed for difference quotients at scale x_m.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from enumerations.base import RationalEnumeration
from enumerations.constructed import DEFAULT_SCAN_LIMIT, Denumeration, Side, encode_odd
from utils.exact import (
    DyadicAccumulator,
    Enclosure,
    Point,
    Weight,
    compare_points,
    euler_maclaurin_tail,
    geometric_tail,
    point_ceil,
    point_enclosure,
    precision_for,
    scale_point,
    truncation_index,
    weight_tail_bound,
)

logger = logging.getLogger(__name__)

# progression ranges up to this length are summed term by term
DIRECT_SUM_LIMIT = 1 << 16
# rounding budget of one window assumes at most this many terms
MAX_WINDOW_TERMS = 1 << 24
# encoded indices with delta(p/q) above this are only bounded, never formed:
# such an index exceeds 7**4096 > 2**11000
EXACT_DELTA_LIMIT = 4096
EXACT_DELTA_LOG2 = 11000


class ToleranceNotReached(ArithmeticError):
    """A certified sum could not be narrowed to the requested width."""


@dataclass(frozen=True)
class WindowReport:
    lo: Point
    hi: Point
    mass: Enclosure
    structured_mass: Enclosure
    encoded_mass: Enclosure
    leftover_mass: Enclosure
    structured_terms: int
    encoded_terms: int
    leftover_terms: int
    neglected_bound: Fraction
    q_max: int


@dataclass(frozen=True)
class QuotientRow:
    m: int
    x_m: Fraction
    q_plus: Enclosure
    q_minus: Enclosure


def eval_saltus(enumeration: RationalEnumeration, weight: Weight, x: Point, eps: Fraction) -> Enclosure:
    """Enclosure of width <= eps of the saltus function at x."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    N = truncation_index(weight, eps / 2)
    bits = precision_for(eps / 2, N)
    if weight is Weight.BINARY:
        bits = max(bits, N)
    acc = DyadicAccumulator(bits)
    for n, value in enumeration.prefix(N):
        if compare_points(value, x) < 0:
            acc.add_weight(weight, n)
    box = acc.enclosure()
    # the exact value never exceeds the full series sum
    hi = min(box.hi + weight_tail_bound(weight, N), weight.total())
    logger.debug(f"eval_saltus({weight.value}) summed {N} indices, {acc.terms} below x")
    return Enclosure(box.lo, hi)


def encoded_remainder_bound(q_max: int, width: Fraction) -> Fraction:
    """Bound on the encoded-index mass of all p/q with q > q_max in a window of the given width.

    Each such index is at least 3 * 5**q * 7, so its weight is at most
    1/(441 * 25**q), and at most q*width + 1 numerators p fit the window.
    """
    r = Fraction(1, 25)
    head = r ** (q_max + 1)
    count_sum = head / (1 - r)
    weighted_sum = head * ((q_max + 1) - q_max * r) / (1 - r) ** 2
    return (width * weighted_sum + count_sum) / 441


def choose_q_max(width: Fraction, tolerance: Fraction) -> int:
    q_max = 1
    while encoded_remainder_bound(q_max, width) > tolerance:
        q_max += 1
    return q_max


def progression_mass(weight: Weight, s: int, d: int, first: int, last: Optional[int],
                     tolerance: Fraction, bits: int) -> tuple[Enclosure, int]:
    """Enclosure of sum_{n=first}^{last} weight(s + n*d) (last None: to infinity).

    Returns the enclosure and the number of individually summed terms.
    """
    acc = DyadicAccumulator(bits)
    if weight is Weight.BINARY:
        start = s + first * d
        if start > bits:
            acc.add_upper_bound(Fraction(1, 1 << bits))
            return acc.enclosure(), 0
        total = geometric_tail(start, d)
        if last is None:
            acc.add(total)
            return acc.enclosure(), 0
        stop = s + (last + 1) * d
        if stop <= 2 * bits + 2:
            acc.add(total - geometric_tail(stop, d))
        else:
            acc.add_enclosure(Enclosure(total - Fraction(1, 1 << (2 * bits)), total))
        return acc.enclosure(), 0

    if last is not None and last - first < DIRECT_SUM_LIMIT:
        for n in range(first, last + 1):
            acc.add_inverse_square(s + n * d)
        return acc.enclosure(), last - first + 1

    beyond = None
    if last is not None:
        beyond = euler_maclaurin_tail(s, d, last + 1, tolerance / 4)
        if beyond is None:
            raise ToleranceNotReached(f"tail of progression {s} + n*{d} beyond {last} misses {tolerance}")
    prefix = 0
    while True:
        rest = euler_maclaurin_tail(s, d, first + prefix, tolerance / 4)
        if rest is not None:
            break
        prefix = max(1, 2 * prefix)
        if prefix > DIRECT_SUM_LIMIT:
            raise ToleranceNotReached(f"tail of progression {s} + n*{d} from {first} misses {tolerance}")
    for n in range(first, first + prefix):
        acc.add_inverse_square(s + n * d)
    if beyond is not None:
        rest = Enclosure(max(Fraction(0), rest.lo - beyond.hi), max(Fraction(0), rest.hi - beyond.lo))
    acc.add_enclosure(rest)
    return acc.enclosure(), prefix


def _width_upper(lo: Point, hi: Point) -> Fraction:
    return (point_enclosure(hi, 16) - point_enclosure(lo, 16)).hi


def window_mass(denum: Denumeration, weight: Weight, lo: Point, hi: Point, eps: Fraction,
                scan_limit: int = DEFAULT_SCAN_LIMIT) -> WindowReport:
    """Enclosure of the weight of all n with lo <= phi(n) < hi, width <= eps."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if compare_points(lo, hi) >= 0:
        raise ValueError(f"empty window [{lo}, {hi})")
    budget = eps / 4
    bits = precision_for(budget, MAX_WINDOW_TERMS)

    # structured slots, cluster by cluster
    structured = Enclosure.point(0)
    structured_terms = 0
    range_budget = budget / (2 * denum.K)
    for cluster in denum.params:
        for side in Side:
            slots = denum.slot_range(cluster.k, side, lo, hi)
            if slots is None:
                continue
            first, last = slots
            logger.debug(f"window meets cluster {cluster.k} {side.value} slots {first}..{last}")
            box, terms = progression_mass(weight, cluster.offset(side), cluster.d, first, last, range_budget, bits)
            structured += box
            structured_terms += terms

    # encoded fractions p/q, 2 <= q <= q_max; larger q only bounded
    width = _width_upper(lo, hi)
    q_max = choose_q_max(width, budget)
    encoded_acc = DyadicAccumulator(bits)
    for q in range(2, q_max + 1):
        for p in range(point_ceil(scale_point(lo, q)), point_ceil(scale_point(hi, q))):
            if math.gcd(p, q) != 1 or denum.is_slot_chosen(Fraction(p, q)):
                continue
            delta = denum.fraction_delta(p, q)
            if delta > EXACT_DELTA_LIMIT and bits < EXACT_DELTA_LOG2:
                encoded_acc.add_upper_bound(Fraction(1, 1 << bits))
            else:
                encoded_acc.add_weight(weight, encode_odd(denum.prescription, p, q))
    remainder = encoded_remainder_bound(q_max, width)
    encoded = encoded_acc.enclosure() + Enclosure(0, remainder)

    # integers, through the leftover matching
    leftover_acc = DyadicAccumulator(bits)
    for z in range(point_ceil(lo), point_ceil(hi)):
        leftover_acc.add_weight(weight, denum.index_of(Fraction(z), scan_limit))
    leftover = leftover_acc.enclosure()

    mass = structured + encoded + leftover
    if mass.width > eps:
        raise ToleranceNotReached(f"window mass width {float(mass.width):.3e} exceeds tolerance {float(eps):.3e}")
    return WindowReport(
        lo=lo,
        hi=hi,
        mass=mass,
        structured_mass=structured,
        encoded_mass=encoded,
        leftover_mass=leftover,
        structured_terms=structured_terms,
        encoded_terms=encoded_acc.terms,
        leftover_terms=leftover_acc.terms,
        neglected_bound=mass.width,
        q_max=q_max,
    )


def jump_at(enumeration: RationalEnumeration, weight: Weight, r: Fraction,
            scan_limit: int = DEFAULT_SCAN_LIMIT) -> Fraction:
    """The jump of the saltus function at r: the weight of r's index."""
    return weight.at(enumeration.index_of(Fraction(r), scan_limit))


def default_eps_rule(denum: Denumeration, kappa: int) -> Callable[[int], Fraction]:
    cluster = denum.params[kappa]
    return lambda m: cluster.c * cluster.x(m) / 100


def quotient_sequence(denum: Denumeration, kappa: int, m_lo: int, m_hi: int,
                      eps_rule: Optional[Callable[[int], Fraction]] = None,
                      scan_limit: int = DEFAULT_SCAN_LIMIT) -> list[QuotientRow]:
    """Enclosures of (G(xi + x_m) - G(xi))/x_m and (G(xi) - G(xi - x_m))/x_m at xi = xi_kappa."""
    cluster = denum.params[kappa]
    if m_lo < cluster.m or m_hi < m_lo:
        raise ValueError(f"m range {m_lo}..{m_hi} must start at m_{kappa} = {cluster.m} or later")
    eps_rule = eps_rule or default_eps_rule(denum, kappa)
    rows = []
    for m in range(m_lo, m_hi + 1):
        x_m = cluster.x(m)
        eps = eps_rule(m)
        plus = window_mass(denum, Weight.INVERSE_SQUARE, cluster.xi, cluster.xi + x_m, eps, scan_limit)
        minus = window_mass(denum, Weight.INVERSE_SQUARE, cluster.xi - x_m, cluster.xi, eps, scan_limit)
        rows.append(QuotientRow(
            m=m,
            x_m=x_m,
            q_plus=(plus.mass / x_m).clamp_nonnegative(),
            q_minus=(minus.mass / x_m).clamp_nonnegative(),
        ))
    logger.info(f"Computed {len(rows)} quotient rows at xi_{kappa}")
    return rows
