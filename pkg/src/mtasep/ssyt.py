"""Counting semistandard Young tableaux with two or three columns.

Closed forms come from the hook-content formula and a handful of
constrained counts (fixed last row, fixed first row, a value present in
the second column).  :func:`enumerate_tableaux` is a brute-force generator
used to check all of them.

Shapes are given by column lengths throughout, so ``(r, l)`` is a tableau
whose first column has ``r`` cells and second column ``l`` cells.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .combinatorics import binom, exact_div, narayana

__all__ = [
    "Tableau",
    "ssyt2",
    "ssyt3",
    "count_x",
    "count_z",
    "count_y",
    "enumerate_tableaux",
]


@dataclass(frozen=True)
class Tableau:
    """A tableau stored column by column."""

    columns: tuple[tuple[int, ...], ...]
    max_entry: int

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.columns)

    def rows(self) -> list[tuple[int, ...]]:
        height = len(self.columns[0]) if self.columns else 0
        return [tuple(c[i] for c in self.columns if len(c) > i) for i in range(height)]

    def is_valid(self) -> bool:
        for c in self.columns:
            if any(not (1 <= x <= self.max_entry) for x in c):
                return False
            if any(a >= b for a, b in zip(c, c[1:])):
                return False
        for left, right in zip(self.columns, self.columns[1:]):
            if len(right) > len(left) or any(a > b for a, b in zip(left, right)):
                return False
        return True


def ssyt2(r: int, l: int, m: int) -> int:
    """Number of SSYT with columns of lengths ``r >= l`` and entries at most ``m``."""
    if not (m >= r >= l >= 0):
        return 0
    return exact_div((r - l + 1) * binom(m, r) * binom(m + 1, l), r + 1)


def ssyt3(a: int, b: int, c: int, m: int) -> int:
    """Number of SSYT with columns of lengths ``a >= b >= c`` and entries at most ``m``."""
    if not (m >= a >= b >= c >= 0):
        return 0
    num = (a - b + 1) * (a - c + 2) * (b - c + 1) * binom(m, a) * binom(m + 1, b) * binom(m + 2, c)
    return exact_div(num, (a + 1) * (a + 2) * (b + 1))


def count_x(r: int, alpha: int, beta: int) -> int:
    """SSYT of shape ``(r, r)`` whose last row is ``(alpha, beta)``."""
    if r < 1:
        raise ValueError("count_x needs r >= 1")
    if alpha > beta:
        return 0
    return binom(beta, r - 1) * binom(alpha - 1, r - 1) - binom(beta - 1, r - 2) * binom(alpha, r)


def _z_first_row_one(r: int, l: int, beta: int, m: int) -> int:
    # first row fixed to (1, beta)
    total = 0
    for i in range(1, beta + 1):
        sign = 1 if i % 2 else -1
        for j in range(i, beta + 1):
            # the (1, 1) coefficient is 1; binom(-1, -1) would otherwise vanish
            lead = 1 if i == 1 and j == 1 else binom(j - 2, i - 2)
            if not lead:
                continue
            total += sign * lead * binom(beta - j + i - 1, i - 1) * ssyt2(r - i, l - i, m - j)
    return total


def count_z(r: int, l: int, alpha: int, beta: int, m: int) -> int:
    """SSYT of column shape ``(r, l)``, entries at most ``m``, first row ``(alpha, beta)``."""
    if not (1 <= alpha <= beta <= m) or not (1 <= l <= r <= m):
        return 0
    return _z_first_row_one(r, l, beta - alpha + 1, m - alpha + 1)


def _narayana0(e: int, f: int) -> int:
    # N_{0,0} = 1 by the usual convention
    if e == 0:
        return 1 if f == 0 else 0
    return narayana(e, f)


def count_y(r: int, l: int, beta: int, m: int) -> int:
    """SSYT of column shape ``(r, l)``, entries at most ``m``, with ``beta`` in column two.

    Returns 0 when the parameters admit no such tableau (``l < 1``,
    ``l > r``, ``r > m`` or ``beta`` outside ``1..m``).
    """
    if not (m >= r >= l >= 1) or not (1 <= beta <= m):
        return 0
    if beta == m:
        return binom(m, l - 1) * binom(m, r) - binom(m - 1, l - 2) * binom(m + 1, r + 1)
    total = 0
    for e in range(1, beta + 1):
        for f in range(1, e + 1):
            total += _narayana0(e - 1, f - 1) * ssyt2(r - f, l - f, m - e)
    return total


def _columns(length: int, lower: Sequence[int], m: int, start: int = 0, prev: int = 0) -> Iterator[tuple[int, ...]]:
    # strictly increasing column with entry i >= lower[i]
    if start == length:
        yield ()
        return
    lo = max(prev + 1, lower[start])
    for v in range(lo, m - (length - start - 1) + 1):
        for rest in _columns(length, lower, m, start + 1, v):
            yield (v,) + rest


def enumerate_tableaux(shape: Sequence[int], m: int) -> Iterator[Tableau]:
    """Yield every SSYT with the given column lengths and entries in ``1..m``."""
    shape = tuple(shape)
    if any(a < b for a, b in zip(shape, shape[1:])) or any(s < 0 for s in shape):
        raise ValueError(f"column lengths must be weakly decreasing, got {shape}")
    shape = tuple(s for s in shape if s > 0)

    def rec(k: int, left: tuple[int, ...]) -> Iterator[tuple[tuple[int, ...], ...]]:
        if k == len(shape):
            yield ()
            return
        lower = left if k else (1,) * shape[0]
        for col in _columns(shape[k], lower, m):
            for rest in rec(k + 1, col):
                yield (col,) + rest

    for cols in rec(0, ()):
        yield Tableau(cols, m)
