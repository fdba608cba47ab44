# tests/test_constructed.py

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from enumerations.base import ScanLimitExceeded
from enumerations.constructed import (
    IndexKind,
    Side,
    encode_odd,
    fraction_delta,
    freeze,
    progressions,
    separation_lower_bound,
)
from enumerations.prescription import parse_prescription
from utils.exact import compare_points


def test_progressions():
    assert progressions(1) == (6, 12, 18)
    assert progressions(2) == (18, 36, 54)
    assert progressions(3) == (54, 108, 162)
    with pytest.raises(ValueError):
        progressions(0)


def test_separation_lower_bound(three_points):
    assert separation_lower_bound(three_points, 1) == 1
    second = separation_lower_bound(three_points, 2)
    assert Fraction(1589, 10000) <= second <= Fraction(31785, 100000)
    third = separation_lower_bound(three_points, 3)
    assert Fraction(89, 1000) <= third <= Fraction(17815, 100000)


def test_params_of_three_point_prescription(denum):
    assert [cluster.m for cluster in denum.params] == [2, 2, 2]
    assert [cluster.y for cluster in denum.params] == [Fraction(1, 648), Fraction(1, 11664), Fraction(1, 26244)]
    assert [cluster.prime for cluster in denum.params] == [2, 3, 5]


def test_one_point_has_no_previous_cluster(one_point_denum):
    assert one_point_denum.K == 1
    assert one_point_denum.params[1].m == 2


def test_small_c_pushes_m_up():
    denum = freeze(parse_prescription("xi = -1 + 1*sqrt(2) ; c = 1/1000\n"), validation_depth=50)
    cluster = denum.params[1]
    # y = 1000 / (324 m) must drop below 1/2
    assert cluster.m > 6
    assert cluster.y < Fraction(1, 2)


def test_large_c_keeps_tail_scale():
    # c y = 1/(d**2 m) does not depend on c
    denum = freeze(parse_prescription("xi = -1 + 1*sqrt(2) ; c = 1000000/1\n"), validation_depth=50)
    assert denum.params[1].m == 2


def test_decay_condition_is_strict():
    text = "xi = -1 + 1*sqrt(2) ; c = 1/1248\nxi = 2 + 1*sqrt(2) ; c = 1/1\n"
    denum = freeze(parse_prescription(text), validation_depth=50)
    first, second = denum.params
    assert first.m == 9
    assert first.c * first.y == Fraction(1, 2916)
    # m = 2 would give 2 c y == 1/2916 exactly, a tie the strict rule rejects
    assert second.m == 3
    assert first.c * first.y - 2 * second.c * second.y == Fraction(1, 8748)


def test_slot_rational_example(denum):
    value = denum.slot_rational(1, Side.PLUS, 2)
    assert value == Fraction(851, 2048)
    lo, hi = denum.slot_interval(1, Side.PLUS, 2)
    assert compare_points(lo, value) < 0 < compare_points(hi, value)
    assert denum.decode_index(42) == value
    assert denum.index_of(value) == 42
    assert denum.slot_position(value) == (1, Side.PLUS, 2)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("side", list(Side))
def test_slot_rationals_are_distinct_and_inside(denum, k, side):
    cluster = denum.params[k]
    values = [denum.slot_rational(k, side, n) for n in range(cluster.m, cluster.m + 40)]
    assert len(set(values)) == len(values)
    for n, value in zip(range(cluster.m, cluster.m + 40), values):
        lo, hi = denum.slot_interval(k, side, n)
        assert compare_points(lo, value) < 0 < compare_points(hi, value)
        assert value.denominator % cluster.prime == 0
        assert value.numerator % cluster.prime != 0


def test_fraction_delta_examples(three_points):
    assert fraction_delta(three_points, 1, 2) == 12
    assert fraction_delta(three_points, -1, 2) == 2
    assert fraction_delta(three_points, 7, 2) == 1
    with pytest.raises(ValueError):
        fraction_delta(three_points, 2, 4)


def test_encode_odd_examples(three_points):
    assert encode_odd(three_points, 1, 2) == 13 * 3 * 5 ** 2 * 7 ** 12
    assert encode_odd(three_points, -1, 2) == 3675
    with pytest.raises(ValueError):
        encode_odd(three_points, 3, 1)


def test_decode_examples(denum):
    assert denum.decode_index(3675) == Fraction(-1, 2)
    assert denum.index_of(Fraction(-1, 2)) == 3675
    assert denum.decode_index(1) == 0
    assert denum.index_of(Fraction(0)) == 1


def test_classify_index(denum):
    assert denum.classify_index(42).kind is IndexKind.STRUCTURED
    plus = denum.classify_index(42)
    assert (plus.k, plus.side, plus.slot) == (1, Side.PLUS, 2)
    minus = denum.classify_index(48)
    assert (minus.k, minus.side, minus.slot) == (1, Side.MINUS, 2)
    # slot 1 precedes m_1 = 2
    assert denum.classify_index(24).kind is IndexKind.LEFTOVER
    encoded = denum.classify_index(3675)
    assert (encoded.kind, encoded.numerator, encoded.denominator) == (IndexKind.ENCODED, -1, 2)
    assert denum.classify_index(3 * 25 * 7).kind is IndexKind.LEFTOVER


@given(st.integers(1, 3), st.sampled_from(list(Side)), st.integers(0, 10 ** 6))
@settings(max_examples=300)
def test_structured_indices_classify_back(denum, k, side, offset):
    cluster = denum.params[k]
    n = cluster.m + offset
    found = denum.classify_index(cluster.index(side, n))
    assert (found.kind, found.k, found.side, found.slot) == (IndexKind.STRUCTURED, k, side, n)


def test_encoded_outputs_are_odd(denum):
    for q in range(2, 12):
        for p in range(-15, 16):
            if math.gcd(p, q) != 1 or denum.is_slot_chosen(Fraction(p, q)):
                continue
            n = denum.encode_odd(p, q)
            assert n % 2 == 1
            assert denum.decode_index(n) == Fraction(p, q)


def test_prefix_is_injective_and_inverse(denum):
    seen = {}
    for n, value in denum.prefix(3000):
        assert value not in seen
        seen[value] = n
        assert denum.index_of(value) == n


def test_integers_roundtrip(denum):
    for z in range(-20, 21):
        n = denum.index_of(Fraction(z))
        assert denum.decode_index(n) == z


def test_small_fractions_roundtrip(denum):
    for q in range(2, 16):
        for p in range(-15, 16):
            if math.gcd(p, q) != 1:
                continue
            r = Fraction(p, q)
            assert denum.decode_index(denum.index_of(r)) == r


def test_scan_limit_exceeded():
    denum = freeze(parse_prescription("xi = -1 + 1*sqrt(2) ; c = 1/1\n"), validation_depth=0)
    with pytest.raises(ScanLimitExceeded):
        denum.index_of(Fraction(10 ** 4), scan_limit=100)


def test_freeze_is_deterministic(three_points, denum):
    again = freeze(three_points, validation_depth=0)
    assert again.params == denum.params
    assert again.records(500) == denum.records(500)


@pytest.mark.slow
def test_bijection_integrity_at_desk_scale(denum):
    seen = set()
    for n, value in denum.prefix(10 ** 5):
        assert value not in seen
        seen.add(value)
        assert denum.index_of(value, scan_limit=10 ** 6) == n
    for q in range(2, 51):
        for p in range(-50, 51):
            if math.gcd(p, q) == 1:
                r = Fraction(p, q)
                assert denum.decode_index(denum.index_of(r)) == r
