"""The constructed denumeration phi with prescribed derivatives of G_phi.

Index space layout (all indices n >= 1):

* structured: even n = a_k + j*d_k (plus side) or b_k + j*d_k (minus side)
  with j >= m_k; phi(n) is a rational r/p_k**s placed in the j-th slot
  around xi_k,
* encoded: odd n = 13**t * 3**|p| * 5**q * 7**delta(p/q) for the remaining
  non-integers p/q,
* leftover: everything else, matched in increasing order to the integers
  0, 1, -1, 2, -2, ...
"""

import bisect
import logging
import math
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional

from enumerations.base import RationalEnumeration, ScanLimitExceeded
from enumerations.prescription import Prescription
from utils.exact import (
    Enclosure,
    Point,
    QuadraticIrrational,
    compare_point,
    compare_points,
    shifted_tail_bounds,
    sqrt_upper,
)
from utils.utils import integer_at_position, integer_position, nth_prime, strip_factor

logger = logging.getLogger(__name__)

DEFAULT_SCAN_LIMIT = 10 ** 6
DEFAULT_VALIDATION_DEPTH = 200
# select_m scans m = 1 .. LINEAR_M_SCAN one by one, then doubles and bisects
LINEAR_M_SCAN = 64
# relative slack of the square-root upper bound in the separation condition
SQRT_SLACK = Fraction(1, 1024)


class ConstructionError(RuntimeError):
    pass


class Side(str, Enum):
    PLUS = "plus"
    MINUS = "minus"


class IndexKind(str, Enum):
    STRUCTURED = "structured"
    ENCODED = "encoded"
    LEFTOVER = "leftover"


@dataclass(frozen=True)
class IndexClass:
    kind: IndexKind
    k: Optional[int] = None
    side: Optional[Side] = None
    slot: Optional[int] = None
    numerator: Optional[int] = None
    denominator: Optional[int] = None


def progressions(k: int) -> tuple[int, int, int]:
    """(a_k, b_k, d_k) = (2*3**k, 4*3**k, 2*3**(k+1))."""
    if k < 1:
        raise ValueError("progressions start at k = 1")
    return 2 * 3 ** k, 4 * 3 ** k, 2 * 3 ** (k + 1)


@dataclass(frozen=True)
class ClusterParams:
    k: int
    a: int
    b: int
    d: int
    m: int
    y: Fraction
    delta_lb: Fraction
    prime: int
    xi: QuadraticIrrational
    c: Fraction

    def x(self, n: int) -> Fraction:
        """x_n = 1/(c * d**2 * n)."""
        return 1 / (self.c * self.d * self.d * n)

    def offset(self, side: Side) -> int:
        return self.a if side is Side.PLUS else self.b

    def index(self, side: Side, n: int) -> int:
        return self.offset(side) + n * self.d

    def as_record(self) -> dict:
        return {"k": self.k, "a": self.a, "b": self.b, "d": self.d, "m": self.m}


@dataclass(frozen=True)
class ConstructionParams:
    clusters: tuple[ClusterParams, ...]

    @property
    def K(self) -> int:
        return len(self.clusters)

    def __getitem__(self, k: int) -> ClusterParams:
        if not 1 <= k <= len(self.clusters):
            raise IndexError(f"cluster index {k} outside 1..{len(self.clusters)}")
        return self.clusters[k - 1]

    def __iter__(self):
        return iter(self.clusters)

    def as_records(self) -> list[dict]:
        return [cluster.as_record() for cluster in self.clusters]


def distance_enclosure(x: QuadraticIrrational, y: QuadraticIrrational, ratio: Fraction) -> Enclosure:
    """Enclosure of |x - y| refined until lo > 0 and lo >= ratio * hi."""
    if compare_points(x, y) == 0:
        raise ValueError(f"{x} and {y} are equal")
    bits = 8
    while True:
        diff = x.enclosure_bits(bits) - y.enclosure_bits(bits)
        if diff.lo > 0 or diff.hi < 0:
            dist = diff if diff.lo > 0 else -diff
            if dist.lo >= ratio * dist.hi:
                return dist
        bits += 8


def separation_lower_bound(prescription: Prescription, k: int) -> Fraction:
    """Rational L with delta_k / 2 <= L <= delta_k; delta_1 = 1."""
    if not 1 <= k <= prescription.size:
        raise ValueError(f"k = {k} outside 1..{prescription.size}")
    if k == 1:
        return Fraction(1)
    xi_k = prescription.xi(k)
    return min(
        distance_enclosure(prescription.xi(i), xi_k, Fraction(1, 2)).lo
        for i in range(1, k)
    )


def _conditions_hold(c: Fraction, d: int, a: int, b: int, m: int, separation: Fraction,
                     previous: Optional[ClusterParams]) -> bool:
    y = 1 / (c * d * d * m)
    cy = c * y
    # separation: y + sqrt(c y) < delta / 2, with an upper bound on the root
    if y + sqrt_upper(cy, cy * SQRT_SLACK) >= separation / 2:
        return False
    # decay: 2 c_k y_k < c_{k-1} y_{k-1}; strict, so a tie under <= moves m up by one
    if previous is not None and not 2 * cy < previous.c * previous.y:
        return False
    # tails: both progression tails below 2 c_k y_k
    limit = 2 * cy
    return shifted_tail_bounds(a, d, m).hi < limit and shifted_tail_bounds(b, d, m).hi < limit


def select_m(prescription: Prescription, params_so_far: list[ClusterParams], k: int) -> int:
    """Smallest m for which every construction condition holds for cluster k with certified surrogates."""
    if len(params_so_far) != k - 1:
        raise ValueError(f"select_m for k = {k} needs m_1 .. m_{k - 1} first")
    a, b, d = progressions(k)
    c = prescription.c(k)
    separation = separation_lower_bound(prescription, k)
    previous = params_so_far[-1] if params_so_far else None

    def holds(m: int) -> bool:
        return _conditions_hold(c, d, a, b, m, separation, previous)

    for m in range(1, LINEAR_M_SCAN + 1):
        if holds(m):
            return m
    # every condition is monotone in m from here on: double, then bisect
    failing, passing = LINEAR_M_SCAN, 2 * LINEAR_M_SCAN
    while not holds(passing):
        failing, passing = passing, 2 * passing
    while passing - failing > 1:
        mid = (failing + passing) // 2
        if holds(mid):
            passing = mid
        else:
            failing = mid
    logger.debug(f"select_m: k={k} needed the geometric search, m={passing}")
    return passing


def fraction_delta(prescription: Prescription, p: int, q: int) -> int:
    """Least positive integer >= max |p/q - xi_i|**-1 over i <= min(q, K)."""
    if q < 2 or math.gcd(p, q) != 1:
        raise ValueError(f"fraction_delta needs coprime p, q with q >= 2, got {p}/{q}")
    r = Fraction(p, q)
    best = 1
    for i in range(1, min(q, prescription.size) + 1):
        distance = abs(r - prescription.xi(i))
        best = max(best, distance.reciprocal().ceil())
    return best


def encode_odd(prescription: Prescription, p: int, q: int) -> int:
    """13**[p > 0] * 3**|p| * 5**q * 7**delta(p/q); always odd and > 1."""
    if q < 2 or math.gcd(p, q) != 1:
        raise ValueError(f"encode_odd needs coprime p, q with q >= 2, got {p}/{q}")
    thirteen = 13 if p > 0 else 1
    return thirteen * 3 ** abs(p) * 5 ** q * 7 ** fraction_delta(prescription, p, q)


def _first_true(predicate: Callable[[int], bool], start: int) -> int:
    """Smallest n >= start with predicate(n), for predicates that switch once to True."""
    if predicate(start):
        return start
    failing, step = start, 1
    while not predicate(start + step):
        failing = start + step
        step *= 2
    passing = start + step
    while passing - failing > 1:
        mid = (failing + passing) // 2
        if predicate(mid):
            passing = mid
        else:
            failing = mid
    return passing


def _smallest_non_multiple(lo: int, hi: int, p: int) -> Optional[int]:
    """Integer r in [lo, hi] with p not dividing r, smallest |r|, positive on ties."""
    if lo > 0:
        for r in (lo, lo + 1):
            if r <= hi and r % p:
                return r
        return None
    if hi < 0:
        for r in (hi, hi - 1):
            if r >= lo and r % p:
                return r
        return None
    for magnitude in range(1, max(-lo, hi) + 1):
        for r in (magnitude, -magnitude):
            if lo <= r <= hi and r % p:
                return r
    return None


def _floor_scaled(x: QuadraticIrrational, box: Enclosure, scale: int) -> int:
    lo, hi = math.floor(box.lo * scale), math.floor(box.hi * scale)
    if lo == hi:
        return lo
    return x.scale(scale).floor()


class Denumeration(RationalEnumeration):
    """Frozen bijection phi built from a prescription; queries memoize lazily."""

    name = "constructed"

    def __init__(self, prescription: Prescription, params: ConstructionParams):
        self.prescription = prescription
        self.params = params
        self._slot_memo: dict[tuple[int, Side, int], Fraction] = {}
        self._decode_memo: dict[int, Fraction] = {}
        self._leftovers: list[int] = []
        self._scanned_to = 0
        self._lock = threading.Lock()

    @property
    def K(self) -> int:
        return self.params.K

    def x(self, k: int, n: int) -> Fraction:
        return self.params[k].x(n)

    # --- structured domain ------------------------------------------------

    def slot_interval(self, k: int, side: Side, n: int) -> tuple[QuadraticIrrational, QuadraticIrrational]:
        cluster = self.params[k]
        near, far = cluster.x(n + 1), cluster.x(n)
        if side is Side.PLUS:
            return cluster.xi + near, cluster.xi + far
        return cluster.xi - far, cluster.xi - near

    def slot_index(self, k: int, side: Side, n: int) -> int:
        return self.params[k].index(side, n)

    def slot_rational(self, k: int, side: Side, n: int) -> Fraction:
        """The rational r/p_k**j inside slot n: smallest j, then smallest |r|."""
        key = (k, side, n)
        cached = self._slot_memo.get(key)
        if cached is not None:
            return cached
        cluster = self.params[k]
        if n < cluster.m:
            raise ValueError(f"slot {n} of cluster {k} precedes m_{k} = {cluster.m}")
        lo, hi = self.slot_interval(k, side, n)
        width = hi.u - lo.u
        bits = 2 * (width.denominator.bit_length() + cluster.prime.bit_length()) + 32
        lo_box, hi_box = lo.enclosure_bits(bits), hi.enclosure_bits(bits)
        p = cluster.prime
        scale = p
        while True:
            first = _floor_scaled(lo, lo_box, scale) + 1
            last = -_floor_scaled(-hi, -hi_box, scale) - 1
            if first <= last:
                r = _smallest_non_multiple(first, last, p)
                if r is not None:
                    value = Fraction(r, scale)
                    logger.debug(f"slot ({k}, {side.value}, {n}) -> {value}")
                    return self._slot_memo.setdefault(key, value)
            scale *= p

    def slot_position(self, r: Fraction) -> Optional[tuple[int, Side, int]]:
        """(k, side, n) if r is the rational chosen for a structured index."""
        r = Fraction(r)
        q = r.denominator
        if q == 1:
            return None
        for cluster in self.params:
            rest, power = strip_factor(q, cluster.prime)
            if power == 0:
                continue
            if rest != 1:
                return None
            if compare_point(cluster.xi, r) < 0:
                side, offset = Side.PLUS, r - cluster.xi
            else:
                side, offset = Side.MINUS, cluster.xi - r
            # slot n holds offsets in (x_{n+1}, x_n), i.e. n = floor(1/(c d^2 t))
            n = offset.reciprocal().scale(1 / (cluster.c * cluster.d * cluster.d)).floor()
            if n < cluster.m:
                return None
            if self.slot_rational(cluster.k, side, n) == r:
                return cluster.k, side, n
            return None
        return None

    def is_slot_chosen(self, r: Fraction) -> bool:
        return self.slot_position(r) is not None

    def slot_range(self, k: int, side: Side, lo: Point, hi: Point) -> Optional[tuple[int, Optional[int]]]:
        """Slots n >= m_k of (k, side) whose rationals lie in [lo, hi): (first, last or None)."""
        cluster = self.params[k]
        xi, m = cluster.xi, cluster.m

        def value(n: int) -> Fraction:
            return self.slot_rational(k, side, n)

        if side is Side.PLUS:
            # values decrease in n inside (xi + x_{n+1}, xi + x_n)
            if compare_points(hi, xi) <= 0:
                return None
            first = _first_true(lambda n: compare_points(xi + cluster.x(n), hi) <= 0, m)
            if first - 1 >= m and compare_points(value(first - 1), hi) < 0:
                first -= 1
            if compare_points(lo, xi) <= 0:
                return first, None
            cut = _first_true(lambda n: compare_points(xi + cluster.x(n + 1), lo) < 0, m)
            last = cut if compare_points(value(cut), lo) >= 0 else cut - 1
        else:
            # values increase in n inside (xi - x_n, xi - x_{n+1})
            if compare_points(lo, xi) >= 0:
                return None
            first = _first_true(lambda n: compare_points(xi - cluster.x(n), lo) >= 0, m)
            if first - 1 >= m and compare_points(value(first - 1), lo) >= 0:
                first -= 1
            if compare_points(hi, xi) >= 0:
                return first, None
            cut = _first_true(lambda n: compare_points(xi - cluster.x(n + 1), hi) > 0, m)
            last = cut if compare_points(value(cut), hi) < 0 else cut - 1
        if last < max(first, m):
            return None
        return first, last

    # --- encoded domain ---------------------------------------------------

    def fraction_delta(self, p: int, q: int) -> int:
        return fraction_delta(self.prescription, p, q)

    def encode_odd(self, p: int, q: int) -> int:
        if self.is_slot_chosen(Fraction(p, q)):
            raise ValueError(f"{p}/{q} is the image of a structured index")
        return encode_odd(self.prescription, p, q)

    # --- classification and queries ---------------------------------------

    def classify_index(self, n: int) -> IndexClass:
        if n < 1:
            raise ValueError("indices start at 1")
        if n % 2 == 0:
            rest, k = strip_factor(n // 2, 3)
            residue = rest % 3
            if 1 <= k <= self.K and residue in (1, 2):
                slot = (rest - residue) // 3
                if slot >= self.params[k].m:
                    side = Side.PLUS if residue == 1 else Side.MINUS
                    return IndexClass(IndexKind.STRUCTURED, k=k, side=side, slot=slot)
            return IndexClass(IndexKind.LEFTOVER)
        rest, t = strip_factor(n, 13)
        rest, alpha = strip_factor(rest, 3)
        rest, beta = strip_factor(rest, 5)
        rest, gamma = strip_factor(rest, 7)
        if rest != 1 or t > 1 or alpha < 1 or beta < 2 or gamma < 1 or math.gcd(alpha, beta) != 1:
            return IndexClass(IndexKind.LEFTOVER)
        p = alpha if t == 1 else -alpha
        if self.fraction_delta(p, beta) != gamma or self.is_slot_chosen(Fraction(p, beta)):
            return IndexClass(IndexKind.LEFTOVER)
        return IndexClass(IndexKind.ENCODED, numerator=p, denominator=beta)

    def _scan_leftovers(self, upto: int) -> None:
        with self._lock:
            for n in range(self._scanned_to + 1, upto + 1):
                if self.classify_index(n).kind is IndexKind.LEFTOVER:
                    self._leftovers.append(n)
            if upto > self._scanned_to:
                logger.debug(f"leftover scan reached {upto} ({len(self._leftovers)} leftovers)")
                self._scanned_to = upto

    def decode_index(self, n: int) -> Fraction:
        cached = self._decode_memo.get(n)
        if cached is not None:
            return cached
        cls = self.classify_index(n)
        if cls.kind is IndexKind.STRUCTURED:
            value = self.slot_rational(cls.k, cls.side, cls.slot)
        elif cls.kind is IndexKind.ENCODED:
            value = Fraction(cls.numerator, cls.denominator)
        else:
            self._scan_leftovers(n)
            value = Fraction(integer_at_position(bisect.bisect_left(self._leftovers, n)))
        return self._decode_memo.setdefault(n, value)

    def index_of(self, r: Fraction, scan_limit: int = DEFAULT_SCAN_LIMIT) -> int:
        r = Fraction(r)
        if r.denominator == 1:
            position = integer_position(r.numerator)
            while len(self._leftovers) <= position and self._scanned_to < scan_limit:
                self._scan_leftovers(min(scan_limit, 2 * self._scanned_to + 64))
            if len(self._leftovers) <= position or self._leftovers[position] > scan_limit:
                raise ScanLimitExceeded(r, scan_limit)
            return self._leftovers[position]
        slot = self.slot_position(r)
        if slot is not None:
            k, side, n = slot
            return self.slot_index(k, side, n)
        return encode_odd(self.prescription, r.numerator, r.denominator)

    # --- persistence hooks -------------------------------------------------

    def records(self, count: int) -> list[tuple[int, int, int]]:
        return [(n, value.numerator, value.denominator) for n, value in self.prefix(count)]

    def seed_records(self, records: list[tuple[int, int, int]]) -> None:
        for n, num, den in records:
            self._decode_memo.setdefault(n, Fraction(num, den))

    def validate(self, depth: int) -> None:
        """Check injectivity and inverse consistency on indices 1 .. depth."""
        seen: dict[Fraction, int] = {}
        for n, value in self.prefix(depth):
            if value in seen:
                raise ConstructionError(f"phi({seen[value]}) = phi({n}) = {value}")
            seen[value] = n
            if self.index_of(value, scan_limit=max(depth, DEFAULT_SCAN_LIMIT)) != n:
                raise ConstructionError(f"index_of(phi({n})) != {n}")
        for (k, side, n), value in list(self._slot_memo.items()):
            lo, hi = self.slot_interval(k, side, n)
            if not (compare_points(lo, value) < 0 < compare_points(hi, value)):
                raise ConstructionError(f"slot ({k}, {side.value}, {n}) value {value} escapes its interval")


def build_params(prescription: Prescription) -> ConstructionParams:
    clusters: list[ClusterParams] = []
    for k in range(1, prescription.size + 1):
        a, b, d = progressions(k)
        c = prescription.c(k)
        m = select_m(prescription, clusters, k)
        clusters.append(
            ClusterParams(
                k=k, a=a, b=b, d=d, m=m,
                y=1 / (c * d * d * m),
                delta_lb=separation_lower_bound(prescription, k),
                prime=nth_prime(k),
                xi=prescription.xi(k),
                c=c,
            )
        )
        logger.debug(f"cluster {k}: (a, b, d) = {(a, b, d)}, m = {m}")
    return ConstructionParams(tuple(clusters))


def freeze(prescription: Prescription, validation_depth: int = DEFAULT_VALIDATION_DEPTH) -> Denumeration:
    """Deterministically construct phi for the prescription and validate its first indices."""
    params = build_params(prescription)
    denum = Denumeration(prescription, params)
    if validation_depth > 0:
        denum.validate(validation_depth)
    logger.info(f"Constructed denumeration for K={params.K}, m_k = {[c.m for c in params]}")
    return denum
