import math
import re
from fractions import Fraction
from typing import Union

from utils.exact import Enclosure, Point, QuadraticIrrational

RATIONAL_PATTERN = r"[+-]?\d+(?:/\d+)?"

_RATIONAL_RE = re.compile(rf"^\s*({RATIONAL_PATTERN})\s*$")
# u + v*sqrt(w), u - v*sqrt(w), v*sqrt(w), sqrt(w), u + sqrt(w)
_IRRATIONAL_RE = re.compile(
    rf"^\s*(?:(?P<u>{RATIONAL_PATTERN})\s*(?P<op>[+-]))?\s*"
    rf"(?:(?P<v>{RATIONAL_PATTERN})\s*\*\s*)?sqrt\(\s*(?P<w>\d+)\s*\)\s*$"
)


def parse_rational(text: str) -> Fraction:
    """Parse "p/q" (sign on p, q defaults to 1) into a reduced Fraction."""
    match = _RATIONAL_RE.match(text)
    if not match:
        raise ValueError(f"Not a rational in p/q form: {text!r}")
    token = match.group(1)
    if "/" in token:
        num, den = token.split("/")
        if int(den) == 0:
            raise ValueError(f"Zero denominator in {text!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(token))


def parse_irrational(text: str) -> QuadraticIrrational:
    """Parse "u + v*sqrt(w)" with rational u and v."""
    match = _IRRATIONAL_RE.match(text)
    if not match:
        raise ValueError(f"Not an expression of the form u + v*sqrt(w): {text!r}")
    u = parse_rational(match.group("u")) if match.group("u") else Fraction(0)
    v = parse_rational(match.group("v")) if match.group("v") else Fraction(1)
    if match.group("op") == "-":
        v = -v
    return QuadraticIrrational(u, v, int(match.group("w")))


def parse_point(text: str) -> Point:
    if "sqrt" in text:
        return parse_irrational(text)
    return parse_rational(text)


def parse_m_range(text: str) -> tuple[int, int]:
    """Parse "lo..hi" (inclusive) into a nonempty integer range."""
    match = re.match(r"^\s*(\d+)\s*\.\.\s*(\d+)\s*$", text)
    if not match:
        raise ValueError(f"Expected a range lo..hi, got {text!r}")
    lo, hi = int(match.group(1)), int(match.group(2))
    if lo < 1 or hi < lo:
        raise ValueError(f"Range {text!r} is empty or starts below 1")
    return lo, hi


def format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def format_decimal(value: Fraction, digits: int, upward: bool) -> str:
    """Render value with `digits` decimals, rounded outward in the given direction."""
    scale = 10 ** digits
    scaled = value * scale
    units = math.ceil(scaled) if upward else math.floor(scaled)
    sign = "-" if units < 0 else ""
    units = abs(units)
    whole, frac = divmod(units, scale)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}"


def format_endpoint(value: Fraction, digits: Union[int, None], upward: bool) -> str:
    if digits is None:
        return format_rational(value)
    return format_decimal(value, digits, upward)


def format_enclosure(box: Enclosure, digits: Union[int, None] = None) -> str:
    return f"[{format_endpoint(box.lo, digits, False)}, {format_endpoint(box.hi, digits, True)}]"


def format_point(x: Point) -> str:
    if isinstance(x, QuadraticIrrational):
        return f"{format_rational(x.u)} + {format_rational(x.v)}*sqrt({x.w})"
    return format_rational(x)
