"""Exact Bernoulli numbers."""

from fractions import Fraction
from functools import lru_cache
from math import comb


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """B_n with the B_1 = -1/2 convention."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return Fraction(1)
    if n > 1 and n % 2:
        return Fraction(0)
    # sum_{j<=n} C(n+1, j) B_j = 0
    acc = sum(comb(n + 1, j) * bernoulli(j) for j in range(n))
    return -acc / (n + 1)


def bernoulli_plus(n: int) -> Fraction:
    """B_n with the B_1 = +1/2 convention (Maclaurin coefficients of s/(1-e^{-s}))."""
    return Fraction(1, 2) if n == 1 else bernoulli(n)
