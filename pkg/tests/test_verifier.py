# tests/test_verifier.py

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from analysis.verifier import (
    EXIT_PASS,
    EXIT_VIOLATION,
    ClusterMargins,
    ConstructionReport,
    WitnessQuery,
    check_construction,
    crossing_clusters,
    diagnostics_367,
    isolation_index,
    minindex_bounds_check,
    proposition_witness,
    random_witness_query,
    ratio_31,
    ratio_band,
    smallest_denominator,
)
from enumerations.calkin_wilf import CalkinWilfEnumeration
from enumerations.constructed import freeze
from enumerations.prescription import parse_prescription
from utils.exact import QuadraticIrrational

NEAR_PAIR = "xi = -1 + 1*sqrt(2) ; c = 1/1\nxi = -999/1000 + 1*sqrt(2) ; c = 1/1\n"


@pytest.fixture(scope="module")
def near_pair():
    return freeze(parse_prescription(NEAR_PAIR), validation_depth=50)


def test_three_points_pass(denum):
    report = check_construction(denum, m_grid_limit=1000)
    assert report.passed
    assert report.exit_status == EXIT_PASS
    assert len(report.clusters) == 3
    assert all(margin > 0 for cluster in report.clusters for margin in cluster.margins().values())
    assert report.clusters[0].tail_plus_margin >= Fraction(1, 1296)
    assert [(claim.kappa, claim.k) for claim in report.claims] == [(1, 2), (1, 3), (2, 3)]
    assert all(claim.violations == 0 for claim in report.claims)
    assert len(report.ratio_samples) == 3 * 2 * 3


def test_single_point_has_no_decay_margin(one_point_denum):
    report = check_construction(one_point_denum, m_grid_limit=100)
    (cluster,) = report.clusters
    assert cluster.decay_margin is None
    assert "decay" not in cluster.margins()
    assert report.claims == []
    assert report.passed


def test_near_pair_passes_with_nonempty_claims(near_pair):
    assert near_pair.params[2].m > 1000
    report = check_construction(near_pair, m_grid_limit=200)
    assert report.passed
    (claim,) = report.claims
    assert claim.nonempty > 0
    assert claim.last_nonempty_m == isolation_index(near_pair, 1) - 1


def test_failures_are_reported():
    bad = ClusterMargins(k=1, m=2, y=Fraction(1, 648), separation_margin=Fraction(-1, 10),
                         decay_margin=None, tail_plus_margin=Fraction(1), tail_minus_margin=Fraction(1))
    report = ConstructionReport([bad], [])
    assert not report.passed
    assert report.exit_status == EXIT_VIOLATION
    assert "separation" in report.failures()[0]


def test_ratio_31_example(denum):
    assert ratio_31(denum, 1, 6, 10).lo == Fraction(30, 31)
    assert ratio_31(denum, 1, 6, 10).hi == Fraction(15, 14)
    with pytest.raises(ValueError):
        ratio_31(denum, 1, 7, 10)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("m", [10, 100, 1000])
def test_ratio_31_inside_band(denum, k, m):
    cluster = denum.params[k]
    for s in (cluster.a, cluster.b):
        ratio = ratio_31(denum, k, s, m)
        lo, hi = ratio_band(denum, k, s, m)
        assert ratio.is_within(lo, hi)
        assert ratio.width <= hi - lo


def test_ratio_31_width_shrinks(denum):
    wide = ratio_31(denum, 2, 18, 100).width
    narrow = ratio_31(denum, 2, 18, 1000).width
    assert narrow <= wide / 5


def test_diagnostics_isolated_cluster(denum):
    found = diagnostics_367(denum, 1, 100)
    assert found.cross_bound.lo == found.cross_bound.hi == 0
    assert found.crossing == ()
    assert found.mu is None
    assert found.admissible
    assert found.encoded_bound < Fraction(1, 10 ** 6)
    with pytest.raises(ValueError):
        diagnostics_367(denum, 1, 1)


def test_encoded_bound_at_small_m(denum):
    found = diagnostics_367(denum, 1, 10)
    assert found.q_min >= 2
    assert found.encoded_bound < Fraction(1, 10 ** 6)


def test_diagnostics_near_pair(near_pair):
    assert crossing_clusters(near_pair, 1, 2) == (2,)
    found = diagnostics_367(near_pair, 1, 2)
    assert found.crossing == (2,)
    assert found.mu == 2
    assert found.cross_bound.lo > 0
    assert found.cross_bound.hi <= 8 * found.x_m
    assert isolation_index(near_pair, 1) > 2
    assert crossing_clusters(near_pair, 1, isolation_index(near_pair, 1)) == ()


def test_isolation_index_of_separated_points(denum):
    assert isolation_index(denum, 1) == 1
    assert isolation_index(denum, 3) == 1


def test_smallest_denominator():
    assert smallest_denominator(Fraction(41, 100), Fraction(42, 100)) == 12
    assert smallest_denominator(Fraction(1, 3), Fraction(1, 3)) == 3


def test_witness_on_constructed_enumeration(denum):
    query = WitnessQuery(denum.params[1].xi, 0, Fraction(1, 20), 5, 60)
    # no index below the truncation point lands in [xi_1, xi_1 + 1/32)
    assert proposition_witness(denum, query) == 5


def test_witness_on_calkin_wilf():
    query = WitnessQuery(QuadraticIrrational(-1, 1, 2), 1, Fraction(1, 20), 5, 60)
    m = proposition_witness(CalkinWilfEnumeration(), query)
    assert m is not None and 5 <= m <= 60


def test_witness_empty_range(denum):
    query = WitnessQuery(QuadraticIrrational(0, 1, 3), 0, Fraction(1, 20), 10, 9)
    assert proposition_witness(denum, query) is None


@pytest.mark.parametrize("seed", range(10))
def test_randomized_witness_queries(denum, seed):
    query = random_witness_query(random.Random(seed))
    assert query.M == 60 and query.N == 5
    for enumeration in (denum, CalkinWilfEnumeration()):
        m = proposition_witness(enumeration, query)
        assert m is not None and query.N <= m <= query.M


def test_witness_query_validation():
    xi = QuadraticIrrational(0, 1, 2)
    for epsilon in (Fraction(0), Fraction(1, 10), Fraction(1, 2)):
        with pytest.raises(ValueError):
            WitnessQuery(xi, 0, epsilon, 5, 60)
    with pytest.raises(ValueError):
        WitnessQuery(xi, 0, Fraction(1, 20), 0, 60)


def test_minindex_examples():
    assert minindex_bounds_check({3, 5, 9})
    assert minindex_bounds_check([1])
    with pytest.raises(ValueError):
        minindex_bounds_check(set())


@given(st.sets(st.integers(1, 200), min_size=1, max_size=50))
@settings(max_examples=500)
def test_minindex_holds_for_any_subset(indices):
    assert minindex_bounds_check(indices)


@pytest.mark.slow
def test_minindex_on_random_subsets_at_desk_scale():
    rng = random.Random(2024)
    for _ in range(10 ** 4):
        indices = {n for n in range(1, 41) if rng.random() < 0.5} or {rng.randint(1, 40)}
        assert minindex_bounds_check(indices)


@pytest.mark.slow
def test_construction_on_full_grid(denum):
    report = check_construction(denum)
    assert report.m_grid_limit == 10 ** 4
    assert report.passed
