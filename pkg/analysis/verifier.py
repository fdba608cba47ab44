"""Independent re-checks of the construction inequalities, limit diagnostics
and the band-violation search for the binary-weight saltus function.

Nothing here calls the parameter search in ``enumerations.constructed``:
separations, square roots and tails are bounded again with separate code.
"""

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from analysis.evaluator import (
    EXACT_DELTA_LIMIT,
    EXACT_DELTA_LOG2,
    MAX_WINDOW_TERMS,
    progression_mass,
    window_mass,
)
from enumerations.base import RationalEnumeration
from enumerations.constructed import ClusterParams, Denumeration, Side
from utils.exact import (
    Enclosure,
    Point,
    QuadraticIrrational,
    Weight,
    compare_points,
    point_ceil,
    point_floor,
    precision_for,
    scale_point,
    shifted_tail_bounds,
    sqrt_upper,
)

logger = logging.getLogger(__name__)

DEFAULT_M_GRID = 10 ** 4
MARGIN_MAX_ROUNDS = 64
# terms summed exactly before the tail in the progression-tail re-check
TAIL_PREFIX = 64
# denominators tried when looking for the simplest fraction in a window
Q_SEARCH_LIMIT = 10 ** 4
# extra bits beyond 2**(x - m) when truncating witness window sums
WITNESS_GUARD_BITS = 12

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_INCONCLUSIVE = 2


# --- construction report ----------------------------------------------------------


@dataclass(frozen=True)
class ClusterMargins:
    k: int
    m: int
    y: Fraction
    separation_margin: Fraction
    decay_margin: Optional[Fraction]
    tail_plus_margin: Fraction
    tail_minus_margin: Fraction

    def margins(self) -> dict[str, Fraction]:
        found = {"separation": self.separation_margin, "tail+": self.tail_plus_margin, "tail-": self.tail_minus_margin}
        if self.decay_margin is not None:
            found["decay"] = self.decay_margin
        return found


@dataclass(frozen=True)
class ClaimSummary:
    """Grid check of: k > kappa and I_{m,k} nonempty implies c_k y_k <= x_m**2."""

    kappa: int
    k: int
    pairs_checked: int
    nonempty: int
    violations: int
    last_nonempty_m: Optional[int]


@dataclass(frozen=True)
class RatioSample:
    k: int
    s: int
    m: int
    ratio: Enclosure


@dataclass
class ConstructionReport:
    clusters: list[ClusterMargins]
    claims: list[ClaimSummary]
    ratio_samples: list[RatioSample] = field(default_factory=list)
    m_grid_limit: int = DEFAULT_M_GRID

    def failures(self) -> list[str]:
        found = []
        for cluster in self.clusters:
            for name, margin in cluster.margins().items():
                if margin <= 0:
                    found.append(f"k={cluster.k}: ({name}) margin {margin} is not positive")
        for claim in self.claims:
            if claim.violations:
                found.append(f"kappa={claim.kappa}, k={claim.k}: {claim.violations} hull-claim violations")
        return found

    @property
    def passed(self) -> bool:
        return not self.failures()

    @property
    def exit_status(self) -> int:
        return EXIT_PASS if self.passed else EXIT_VIOLATION


def _separation_enclosure_lo(x: QuadraticIrrational, y: QuadraticIrrational, bits: int) -> Fraction:
    diff = x.enclosure_bits(bits) - y.enclosure_bits(bits)
    if diff.lo > 0:
        return diff.lo
    if diff.hi < 0:
        return -diff.hi
    return Fraction(0)


def _separation_margin(denum: Denumeration, cluster: ClusterParams) -> Fraction:
    """delta_k/2 - y_k - sqrt(c_k y_k), bounded below; refined until positive or capped."""
    cy = cluster.c * cluster.y
    margin = Fraction(0)
    bits = 16
    for _ in range(MARGIN_MAX_ROUNDS):
        if cluster.k == 1:
            delta = Fraction(1)
        else:
            delta = min(
                _separation_enclosure_lo(denum.params[i].xi, cluster.xi, bits) for i in range(1, cluster.k)
            )
        root = sqrt_upper(cy, cy / (1 << bits))
        margin = delta / 2 - cluster.y - root
        if margin > 0:
            return margin
        bits += 32
    return margin


def _tail_upper(s: int, d: int, m: int) -> Fraction:
    """sum_{n>=m} (s + n d)**-2 from above: TAIL_PREFIX exact terms, then the integral from the midpoint."""
    head = sum((Fraction(1, (s + n * d) ** 2) for n in range(m, m + TAIL_PREFIX)), Fraction(0))
    start = m + TAIL_PREFIX
    return head + Fraction(2, d * (2 * s + (2 * start - 1) * d))


def _interval_meets(denum: Denumeration, kappa: int, k: int, m: int) -> bool:
    """I_{m,k} = [xi_k - y_k, xi_k + y_k] meets [xi_kappa - x_m, xi_kappa + x_m]."""
    near, far = denum.params[kappa], denum.params[k]
    reach = far.y + near.x(m)
    return compare_points(far.xi, near.xi + reach) <= 0 and compare_points(near.xi, far.xi + reach) <= 0


def _claim_summary(denum: Denumeration, kappa: int, k: int, m_grid_limit: int) -> ClaimSummary:
    far = denum.params[k]
    cy = far.c * far.y
    nonempty = violations = 0
    last = None
    for m in range(1, m_grid_limit + 1):
        if not _interval_meets(denum, kappa, k, m):
            continue
        nonempty += 1
        last = m
        x_m = denum.params[kappa].x(m)
        if cy > x_m * x_m:
            violations += 1
            logger.debug(f"hull claim fails at kappa={kappa}, k={k}, m={m}")
    return ClaimSummary(kappa, k, m_grid_limit, nonempty, violations, last)


def check_construction(denum: Denumeration, m_grid_limit: int = DEFAULT_M_GRID,
                       ratio_ms: tuple[int, ...] = (10, 100, 1000)) -> ConstructionReport:
    clusters = []
    previous = None
    for cluster in denum.params:
        cy = cluster.c * cluster.y
        clusters.append(ClusterMargins(
            k=cluster.k,
            m=cluster.m,
            y=cluster.y,
            separation_margin=_separation_margin(denum, cluster),
            decay_margin=None if previous is None else previous.c * previous.y - 2 * cy,
            tail_plus_margin=2 * cy - _tail_upper(cluster.a, cluster.d, cluster.m),
            tail_minus_margin=2 * cy - _tail_upper(cluster.b, cluster.d, cluster.m),
        ))
        previous = cluster

    claims = [
        _claim_summary(denum, kappa, k, m_grid_limit)
        for kappa in range(1, denum.K + 1)
        for k in range(kappa + 1, denum.K + 1)
    ]
    samples = [
        RatioSample(cluster.k, s, m, ratio_31(denum, cluster.k, s, m))
        for cluster in denum.params
        for s in (cluster.a, cluster.b)
        for m in ratio_ms
    ]
    report = ConstructionReport(clusters, claims, samples, m_grid_limit)
    if report.passed:
        logger.info(f"Construction check passed for K={denum.K} (grid m <= {m_grid_limit})")
    else:
        logger.info(f"Construction check found {len(report.failures())} failures")
    return report


def ratio_31(denum: Denumeration, k: int, s: int, m: int) -> Enclosure:
    """sum_{n>=m} (s + n d_k)**-2 divided by c_k x_m, from the plain sandwich."""
    cluster = denum.params[k]
    if s not in (cluster.a, cluster.b):
        raise ValueError(f"s = {s} is neither a_{k} = {cluster.a} nor b_{k} = {cluster.b}")
    if m < 1:
        raise ValueError("m must be positive")
    # c_k x_m = 1/(d**2 m)
    return shifted_tail_bounds(s, cluster.d, m).scale(cluster.d * cluster.d * m)


def ratio_band(denum: Denumeration, k: int, s: int, m: int) -> tuple[Fraction, Fraction]:
    C = 1 + Fraction(s, denum.params[k].d)
    return 1 - C / m, 1 + C / m


# --- limit diagnostics -----------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostics:
    kappa: int
    m: int
    x_m: Fraction
    cross_bound: Enclosure
    encoded_bound: Fraction
    crossing: tuple[int, ...]
    mu: Optional[int]
    q_min: int
    admissible: bool


def crossing_clusters(denum: Denumeration, kappa: int, m: int) -> tuple[int, ...]:
    """K_m: the clusters k > kappa whose hull meets kappa's m-th window."""
    return tuple(k for k in range(kappa + 1, denum.K + 1) if _interval_meets(denum, kappa, k, m))


def isolation_index(denum: Denumeration, kappa: int) -> int:
    """Smallest m with K_m empty; exists since finitely many distinct points are never a limit."""
    best = 1
    for k in range(kappa + 1, denum.K + 1):
        if not _interval_meets(denum, kappa, k, 1):
            continue
        meeting, clear = 1, 2
        while _interval_meets(denum, kappa, k, clear):
            meeting, clear = clear, 2 * clear
        while clear - meeting > 1:
            mid = (meeting + clear) // 2
            if _interval_meets(denum, kappa, k, mid):
                meeting = mid
            else:
                clear = mid
        best = max(best, clear)
    return best


def _window_has_fraction(lo: Point, hi: Point, q: int) -> bool:
    """Some p/q in the closed window [lo, hi]."""
    return point_ceil(scale_point(lo, q)) <= point_floor(scale_point(hi, q))


def smallest_denominator(lo: Point, hi: Point, start: int = 2) -> int:
    for q in range(start, Q_SEARCH_LIMIT + 1):
        if _window_has_fraction(lo, hi, q):
            return q
    return Q_SEARCH_LIMIT + 1


def _encoded_tail_bound(q_min: int, x_m: Fraction) -> Fraction:
    """(1/x_m) * sum over n >= 3 * 5**q_min * 7**ceil(1/x_m) of 1/n**2."""
    e = math.ceil(1 / x_m)
    if e > EXACT_DELTA_LIMIT:
        floor_n = 1 << EXACT_DELTA_LOG2
    else:
        floor_n = 3 * 5 ** q_min * 7 ** e
    return Fraction(1, floor_n - 1) / x_m


def diagnostics_367(denum: Denumeration, kappa: int, m: int) -> Diagnostics:
    cluster = denum.params[kappa]
    if m < cluster.m:
        raise ValueError(f"m = {m} precedes m_{kappa} = {cluster.m}")
    x_m = cluster.x(m)
    lo, hi = cluster.xi - x_m, cluster.xi + x_m
    tolerance = x_m * x_m / 16
    bits = precision_for(tolerance, MAX_WINDOW_TERMS)

    cross = Enclosure.point(0)
    for other in denum.params:
        if other.k == kappa:
            continue
        for side in Side:
            slots = denum.slot_range(other.k, side, lo, hi)
            if slots is None:
                continue
            first, last = slots
            box, _ = progression_mass(Weight.INVERSE_SQUARE, other.offset(side), other.d, first, last,
                                      tolerance / (2 * denum.K), bits)
            cross += box
    crossing = crossing_clusters(denum, kappa, m)

    has_integer = point_ceil(lo) <= point_floor(hi)
    q_min = smallest_denominator(lo, hi)
    admissible = not has_integer and q_min >= kappa
    if admissible:
        encoded_bound = _encoded_tail_bound(q_min, x_m)
    else:
        report = window_mass(denum, Weight.INVERSE_SQUARE, lo, hi, tolerance)
        encoded_bound = report.encoded_mass.hi / x_m
        logger.debug(f"window of xi_{kappa} at m={m} holds small fractions, encoded bound from window sum")
    return Diagnostics(
        kappa=kappa,
        m=m,
        x_m=x_m,
        cross_bound=cross / x_m,
        encoded_bound=encoded_bound,
        crossing=crossing,
        mu=min(crossing) if crossing else None,
        q_min=q_min,
        admissible=admissible,
    )


# --- band-violation search for F --------------------------------------------------------


@dataclass(frozen=True)
class WitnessQuery:
    xi: QuadraticIrrational
    x_exponent: int
    epsilon: Fraction
    N: int
    M: int

    def __post_init__(self):
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        if not 0 < self.epsilon < Fraction(1, 10):
            raise ValueError(f"epsilon must lie in (0, 1/10), got {self.epsilon}")
        if self.N < 1:
            raise ValueError("N must be positive")


def _outside_band(box: Enclosure, x: int, epsilon: Fraction) -> bool:
    """box lies outside the open band (2**(x - eps), 2**(x + eps))."""
    a, b = epsilon.numerator, epsilon.denominator
    base = Fraction(2) ** x
    below = (box.hi / base) ** b <= Fraction(1, 1 << a)
    above = (box.lo / base) ** b >= (1 << a)
    return below or above


def _window_sum(values: list[tuple[int, Fraction]], lo: Point, hi: Point, m: int, T: int) -> Enclosure:
    """2**m times the sum of 2**-n over n <= T with lo <= phi(n) < hi, plus the tail beyond T."""
    total = Fraction(0)
    for n, value in values[:T]:
        if compare_points(lo, value) <= 0 and compare_points(value, hi) < 0:
            total += Fraction(1, 1 << n)
    scale = 1 << m
    return Enclosure(total * scale, (total + Fraction(1, 1 << T)) * scale)


def proposition_witness(enumeration: RationalEnumeration, query: WitnessQuery) -> Optional[int]:
    """Smallest m in [N, M] whose right or left window sum leaves the band, if any."""
    if query.M < query.N:
        return None
    depth = max(1, query.M - query.x_exponent + WITNESS_GUARD_BITS)
    values = list(enumeration.prefix(depth))
    for m in range(query.N, query.M + 1):
        T = max(1, m - query.x_exponent + WITNESS_GUARD_BITS)
        step = Fraction(1, 1 << m)
        right = _window_sum(values, query.xi, query.xi + step, m, T)
        left = _window_sum(values, query.xi - step, query.xi, m, T)
        for box in (right, left):
            if _outside_band(box, query.x_exponent, query.epsilon):
                logger.debug(f"{enumeration.name}: band violated at m={m} by {box}")
                return m
    logger.warning(f"{enumeration.name}: no band violation for m in {query.N}..{query.M}")
    return None


def random_witness_query(rng: random.Random, N: int = 5, M: int = 60,
                         epsilon: Fraction = Fraction(1, 20)) -> WitnessQuery:
    u = Fraction(rng.randint(-20, 20), rng.randint(1, 10))
    v = Fraction(rng.choice((-1, 1)) * rng.randint(1, 5), rng.randint(1, 5))
    w = rng.choice((2, 3, 5, 6, 7, 10, 11, 13))
    return WitnessQuery(QuadraticIrrational(u, v, w), rng.randint(-3, 3), epsilon, N, M)


def minindex_bounds_check(indices) -> bool:
    """2**-mu <= sum 2**-n <= 2**(1 - mu) for a nonempty finite index set with minimum mu."""
    indices = set(indices)
    if not indices:
        raise ValueError("the index set must be nonempty")
    mu = min(indices)
    total = sum((Fraction(1, 1 << n) for n in indices), Fraction(0))
    return Fraction(1, 1 << mu) <= total <= Fraction(2, 1 << mu)
