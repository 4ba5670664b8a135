"""Exact integer and rational helpers shared by every other module.

Integers are Python ints (arbitrary precision) and rationals are
:class:`fractions.Fraction`, which is always kept in lowest terms with a
positive denominator.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

__all__ = ["Fraction", "binom", "narayana", "catalan", "exact_div"]


def binom(n: int, k: int) -> int:
    """Binomial coefficient that is zero outside ``0 <= k <= n``.

    Negative ``n`` also gives zero, so sums may run over all integers and
    out-of-range terms drop out.
    """
    if n < 0 or k < 0 or k > n:
        return 0
    return comb(n, k)


def exact_div(num: int, den: int) -> int:
    """Integer division that must be exact; a remainder means a broken formula."""
    q, r = divmod(num, den)
    if r:
        raise ArithmeticError(f"{num} is not divisible by {den}")
    return q


def narayana(e: int, f: int) -> int:
    """Narayana number ``binom(e, f+1) * binom(e, f) / e``."""
    if e <= 0:
        raise ValueError(f"narayana needs e >= 1, got e={e}")
    return exact_div(binom(e, f + 1) * binom(e, f), e)


def catalan(e: int) -> int:
    return exact_div(binom(2 * e, e), e + 1)
