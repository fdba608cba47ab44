import hashlib
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from utils.exact import QuadraticIrrational, compare_points
from utils.grammar import format_point, format_rational, parse_irrational, parse_rational

logger = logging.getLogger(__name__)

_LINE_RE = re.compile(r"^\s*xi\s*=\s*(?P<xi>[^;]+?)\s*;\s*c\s*=\s*(?P<c>\S+)\s*$")


class PrescriptionError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


@dataclass(frozen=True)
class PrescriptionPoint:
    xi: QuadraticIrrational
    c: Fraction

    def __str__(self):
        return f"xi = {format_point(self.xi)} ; c = {format_rational(self.c)}"


class Prescription:
    """Ordered points xi_k with target derivatives c_k, k = 1 .. K."""

    def __init__(self, points: list[PrescriptionPoint]):
        self.points = tuple(points)
        self.validate()

    def validate(self) -> None:
        if not self.points:
            raise PrescriptionError("a prescription needs at least one point")
        for k, point in enumerate(self.points, start=1):
            if point.c <= 0:
                raise PrescriptionError(f"c_{k} = {point.c} is not positive ({point})")
        for k in range(len(self.points)):
            for i in range(k):
                if compare_points(self.points[i].xi, self.points[k].xi) == 0:
                    raise PrescriptionError(
                        f"xi_{i + 1} and xi_{k + 1} coincide ({self.points[i]} / {self.points[k]})"
                    )

    @property
    def size(self) -> int:
        return len(self.points)

    def xi(self, k: int) -> QuadraticIrrational:
        return self.points[k - 1].xi

    def c(self, k: int) -> Fraction:
        return self.points[k - 1].c

    def __iter__(self) -> Iterator[PrescriptionPoint]:
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        return isinstance(other, Prescription) and self.points == other.points

    def __hash__(self):
        return hash(self.points)

    def canonical_text(self) -> str:
        return "".join(f"{point}\n" for point in self.points)

    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()

    def __repr__(self):
        return f"Prescription({list(self.points)!r})"


def parse_prescription(text: str) -> Prescription:
    """One point per line: ``xi = <u> + <v>*sqrt(<w>) ; c = <p>/<q>``; ``#`` starts a comment."""
    points = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _LINE_RE.match(line)
        if not match:
            raise PrescriptionError(f"expected 'xi = ... ; c = ...', got {raw.strip()!r}", line=lineno)
        try:
            xi = parse_irrational(match.group("xi"))
            c = parse_rational(match.group("c"))
        except ValueError as e:
            raise PrescriptionError(str(e), line=lineno) from e
        points.append(PrescriptionPoint(xi=xi, c=c))
    prescription = Prescription(points)
    logger.debug(f"Parsed prescription with {prescription.size} points")
    return prescription


def load_prescription(path: str) -> Prescription:
    with open(path, encoding="utf-8") as f:
        return parse_prescription(f.read())
