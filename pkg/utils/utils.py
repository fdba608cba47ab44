from functools import lru_cache
from itertools import islice

from primefac import primegen


def strip_factor(n: int, p: int) -> tuple[int, int]:
    """Split n into (n / p**v, v) with v the p-adic valuation of n (n != 0)."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return n, v


@lru_cache(maxsize=None)
def nth_prime(k: int) -> int:
    """The k-th prime, 1-based: nth_prime(1) == 2."""
    if k < 1:
        raise ValueError("prime index starts at 1")
    return next(islice(primegen(), k - 1, None))


def integer_position(z: int) -> int:
    """Position of z in the order 0, 1, -1, 2, -2, ..."""
    if z > 0:
        return 2 * z - 1
    return -2 * z


def integer_at_position(pos: int) -> int:
    if pos % 2 == 1:
        return (pos + 1) // 2
    return -(pos // 2)
