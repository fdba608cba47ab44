from fractions import Fraction

from enumerations.base import RationalEnumeration


def calkin_wilf_term(j: int) -> Fraction:
    """j-th term (j >= 1) of the breadth-first Calkin-Wilf sequence 1, 1/2, 2, 1/3, ..."""
    if j < 1:
        raise ValueError("Calkin-Wilf terms start at j = 1")
    a, b = 1, 1
    for bit in bin(j)[3:]:
        if bit == "0":
            a, b = a, a + b
        else:
            a, b = a + b, b
    return Fraction(a, b)


def calkin_wilf_position(q: Fraction) -> int:
    """Inverse of calkin_wilf_term for a positive rational q."""
    if q <= 0:
        raise ValueError("Calkin-Wilf positions exist for positive rationals only")
    a, b = q.numerator, q.denominator
    bits = []
    # walk up to the root 1/1 in runs of equal moves
    while (a, b) != (1, 1):
        if a < b:
            run = (b - 1) // a
            b -= run * a
            bits.append("0" * run)
        else:
            run = (a - 1) // b
            a -= run * b
            bits.append("1" * run)
    return int("1" + "".join(reversed(bits)), 2)


class CalkinWilfEnumeration(RationalEnumeration):
    """phi(1) = 0, phi(2j) = q_j, phi(2j+1) = -q_j with q_j the Calkin-Wilf sequence."""

    name = "calkin-wilf"

    def decode_index(self, n: int) -> Fraction:
        if n < 1:
            raise ValueError("indices start at 1")
        if n == 1:
            return Fraction(0)
        term = calkin_wilf_term(n // 2)
        return term if n % 2 == 0 else -term

    def index_of(self, r: Fraction, scan_limit: int = 0) -> int:
        r = Fraction(r)
        if r == 0:
            return 1
        j = calkin_wilf_position(abs(r))
        return 2 * j if r > 0 else 2 * j + 1
