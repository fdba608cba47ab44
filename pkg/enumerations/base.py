from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Iterator


class ScanLimitExceeded(LookupError):
    """An inverse query needed to scan past the configured index limit."""

    def __init__(self, value: Fraction, scan_limit: int):
        super().__init__(f"index of {value} lies beyond scan limit {scan_limit}")
        self.value = value
        self.scan_limit = scan_limit


class RationalEnumeration(ABC):
    """A bijection n -> phi(n) from the positive integers onto the rationals."""

    name = "enumeration"

    @abstractmethod
    def decode_index(self, n: int) -> Fraction:
        """Return phi(n) for n >= 1."""
        pass

    @abstractmethod
    def index_of(self, r: Fraction, scan_limit: int) -> int:
        """Return the n with phi(n) == r."""
        pass

    # Optional override – not abstract
    def prefix(self, count: int) -> Iterator[tuple[int, Fraction]]:
        """Yield (n, phi(n)) for n = 1 .. count."""
        for n in range(1, count + 1):
            yield n, self.decode_index(n)
