# tests/test_grammar.py

from fractions import Fraction

import pytest

from utils.exact import Enclosure, QuadraticIrrational
from utils.grammar import (
    format_decimal,
    format_enclosure,
    format_point,
    format_rational,
    parse_irrational,
    parse_m_range,
    parse_point,
    parse_rational,
)


def test_parse_rational():
    assert parse_rational("3/6") == Fraction(1, 2)
    assert parse_rational("-7") == Fraction(-7)
    assert parse_rational(" 0/1 ") == 0
    with pytest.raises(ValueError):
        parse_rational("1/0")
    with pytest.raises(ValueError):
        parse_rational("0.5")


def test_parse_irrational_forms():
    assert parse_irrational("-1 + 1*sqrt(2)") == QuadraticIrrational(-1, 1, 2)
    assert parse_irrational("-2 + sqrt(5)") == QuadraticIrrational(-2, 1, 5)
    assert parse_irrational("1/2 - 3/4*sqrt(7)") == QuadraticIrrational(Fraction(1, 2), Fraction(-3, 4), 7)
    assert parse_irrational("sqrt(3)") == QuadraticIrrational(0, 1, 3)
    with pytest.raises(ValueError):
        parse_irrational("1 + 1*sqrt(4)")


def test_parse_point_dispatches():
    assert parse_point("0/1") == 0
    assert isinstance(parse_point("1 + sqrt(2)"), QuadraticIrrational)


def test_parse_m_range():
    assert parse_m_range("2..2000") == (2, 2000)
    assert parse_m_range("5..5") == (5, 5)
    for bad in ("10..2", "0..3", "a..b"):
        with pytest.raises(ValueError):
            parse_m_range(bad)


def test_formatting():
    assert format_rational(Fraction(3)) == "3/1"
    assert format_point(QuadraticIrrational(-1, 1, 2)) == "-1/1 + 1/1*sqrt(2)"
    assert format_decimal(Fraction(2, 3), 3, upward=True) == "0.667"
    assert format_decimal(Fraction(2, 3), 3, upward=False) == "0.666"
    assert format_decimal(Fraction(-2, 3), 2, upward=False) == "-0.67"
    assert format_enclosure(Enclosure(Fraction(1, 3), Fraction(1, 2))) == "[1/3, 1/2]"
    assert format_enclosure(Enclosure(Fraction(1, 3), Fraction(1, 2)), 2) == "[0.33, 0.50]"


def test_point_format_roundtrips_through_parser():
    xi = QuadraticIrrational(Fraction(-5, 3), Fraction(2, 7), 11)
    assert parse_irrational(format_point(xi)) == xi
