# tests/test_calkin_wilf.py

from fractions import Fraction

from hypothesis import given, settings
import hypothesis.strategies as st

from enumerations.calkin_wilf import CalkinWilfEnumeration, calkin_wilf_position, calkin_wilf_term


def test_leading_terms():
    expected = [Fraction(1), Fraction(1, 2), Fraction(2), Fraction(1, 3), Fraction(3, 2), Fraction(2, 3), Fraction(3)]
    assert [calkin_wilf_term(j) for j in range(1, 8)] == expected


def test_enumeration_layout():
    enumeration = CalkinWilfEnumeration()
    assert [enumeration.decode_index(n) for n in range(1, 6)] == [0, 1, -1, Fraction(1, 2), Fraction(-1, 2)]
    assert enumeration.index_of(Fraction(0)) == 1
    assert enumeration.index_of(Fraction(-3, 2)) == 11


@given(st.integers(1, 10 ** 9))
@settings(max_examples=500)
def test_position_inverts_term(j):
    assert calkin_wilf_position(calkin_wilf_term(j)) == j


@given(st.fractions(min_value=-1000, max_value=1000, max_denominator=1000))
@settings(max_examples=500)
def test_index_of_inverts_decode(r):
    enumeration = CalkinWilfEnumeration()
    assert enumeration.decode_index(enumeration.index_of(r)) == r


def test_prefix_is_injective():
    values = [value for _, value in CalkinWilfEnumeration().prefix(5000)]
    assert len(set(values)) == len(values)


if __name__ == "__main__":
    test_leading_terms()
    test_enumeration_layout()
    test_prefix_is_injective()
