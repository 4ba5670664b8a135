"""Multiline queues and exact stationary laws of the multispecies TASEP.

A multiline queue for the sector ``m = (m_1, ..., m_n)`` on a ring of
``N = sum(m)`` sites is a stack of ``n - 1`` cyclic rows; row ``i`` (from the
top) holds ``M_i = m_1 + ... + m_i`` occupied sites.  Bully paths project
each queue to a word of the sector, and the stationary probability of a
word is the fraction of queues projecting to it.

Rows are stored as bit masks with bit ``c`` standing for column ``c + 1``.
Public positions (columns, word indices) are 1-based.
"""

from __future__ import annotations

import csv
import io
import json
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from math import factorial, prod
from typing import Iterable, Iterator, Sequence

from .combinatorics import binom

__all__ = [
    "Word",
    "Sector",
    "MultilineQueue",
    "ExactDist",
    "BudgetExceeded",
    "DEFAULT_QUEUE_BUDGET",
    "queue_count",
    "enumerate_queues",
    "bully_project",
    "stationary_from_queues",
    "reverse_word",
    "worker_count",
]

Word = tuple[int, ...]

DEFAULT_QUEUE_BUDGET = 200_000_000


class BudgetExceeded(RuntimeError):
    """Raised when a computation would exceed its configured size budget."""


def worker_count() -> int:
    env = os.environ.get("MTASEP_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Sector:
    """Species counts ``m_1..m_n`` of a ring configuration."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if not self.counts:
            raise ValueError("a sector needs at least one species")
        if any(c < 1 for c in self.counts):
            raise ValueError(f"species counts must be positive, got {self.counts}")

    @classmethod
    def distinct(cls, n: int) -> "Sector":
        """The permutation sector ``(1, ..., 1)`` with ``n`` species."""
        return cls((1,) * n)

    @property
    def n(self) -> int:
        return len(self.counts)

    @property
    def N(self) -> int:
        return sum(self.counts)

    @property
    def prefix_sums(self) -> tuple[int, ...]:
        out, s = [], 0
        for c in self.counts:
            s += c
            out.append(s)
        return tuple(out)

    def reversed(self) -> "Sector":
        return Sector(self.counts[::-1])

    def num_words(self) -> int:
        return factorial(self.N) // prod(factorial(c) for c in self.counts)

    def words(self) -> Iterator[Word]:
        """All multipermutations of the sector in lexicographic order."""
        remaining = list(self.counts)
        N, n = self.N, self.n
        word = [0] * N

        def rec(pos: int) -> Iterator[Word]:
            if pos == N:
                yield tuple(word)
                return
            for s in range(n):
                if remaining[s]:
                    remaining[s] -= 1
                    word[pos] = s + 1
                    yield from rec(pos + 1)
                    remaining[s] += 1

        yield from rec(0)

    def is_word(self, word: Sequence[int]) -> bool:
        return len(word) == self.N and Counter(word) == {i + 1: c for i, c in enumerate(self.counts)}

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.counts)) + ")"


def reverse_word(word: Sequence[int], n: int) -> Word:
    """Particle-hole image: reverse the ring and complement labels."""
    return tuple(n + 1 - x for x in reversed(word))


def queue_count(sector: Sector) -> int:
    """Number of multiline queues of the sector."""
    N = sector.N
    return prod(binom(N, M) for M in sector.prefix_sums[:-1])


@dataclass(frozen=True)
class MultilineQueue:
    sector: Sector
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        N = self.sector.N
        if len(self.rows) != self.sector.n - 1:
            raise ValueError(f"expected {self.sector.n - 1} rows, got {len(self.rows)}")
        for i, (row, M) in enumerate(zip(self.rows, self.sector.prefix_sums)):
            if row >> N or bin(row).count("1") != M:
                raise ValueError(f"row {i + 1} must have {M} occupied sites among {N}")

    @classmethod
    def from_columns(cls, sector: Sector, rows: Sequence[Iterable[int]]) -> "MultilineQueue":
        """Build a queue from 1-based occupied columns per row."""
        return cls(sector, tuple(sum(1 << (c - 1) for c in r) for r in rows))

    def occupied(self, row: int) -> list[int]:
        """1-based occupied columns of a 1-based row."""
        mask = self.rows[row - 1]
        return [c + 1 for c in range(self.sector.N) if mask >> c & 1]

    def __str__(self) -> str:
        N = self.sector.N
        return "\n".join("".join("o" if r >> c & 1 else "." for c in range(N)) for r in self.rows)


def _next_free(free: int, start: int, N: int, full: int) -> int:
    """First set bit of ``free`` at or cyclically after ``start``; -1 if none."""
    if not free:
        return -1
    rot = ((free >> start) | (free << (N - start))) & full
    return (start + (rot & -rot).bit_length() - 1) % N


def _bully_rows(rows: Sequence[int], N: int, order: dict[int, list[int]] | None = None) -> Word:
    n = len(rows) + 1
    full = (1 << N) - 1
    claimed = [0] * len(rows)
    label = [0] * N
    for start_row in range(len(rows)):
        starts_mask = rows[start_row] & ~claimed[start_row]
        starts = [c for c in range(N) if starts_mask >> c & 1]
        if order is not None and start_row in order:
            given = order[start_row]
            if sorted(given) != starts:
                raise ValueError(
                    f"order for row {start_row + 1} must permute columns {[c + 1 for c in starts]}"
                )
            starts = given
        for col in starts:
            claimed[start_row] |= 1 << col
            for k in range(start_row + 1, len(rows)):
                col = _next_free(rows[k] & ~claimed[k], col, N, full)
                if col < 0:
                    raise RuntimeError("bully path found no free site; queue violates row counts")
                claimed[k] |= 1 << col
            label[col] = start_row + 1
    for c in range(N):
        if not label[c]:
            label[c] = n
    return tuple(label)


def bully_project(queue: MultilineQueue, order: Sequence[tuple[int, int]] | None = None) -> Word:
    """Project a queue to a word by running bully paths row by row.

    ``order`` optionally fixes the order in which path starts are run, as a
    sequence of 1-based ``(row, column)`` pairs.  Rows must appear in
    non-decreasing order and each row's columns must be exactly that row's
    path starts; rows that are not mentioned run left to right.
    """
    grouped: dict[int, list[int]] | None = None
    if order is not None:
        grouped = {}
        last = 0
        for row, col in order:
            if row < last:
                raise ValueError("path starts of different rows may not interleave")
            last = row
            grouped.setdefault(row - 1, []).append(col - 1)
    return _bully_rows(queue.rows, queue.sector.N, grouped)


def _row_masks(N: int, M: int) -> list[int]:
    # colexicographic order of the occupied sets
    masks = [sum(1 << c for c in comb) for comb in combinations(range(N), M)]
    masks.sort(key=lambda m: [c for c in range(N - 1, -1, -1) if m >> c & 1])
    return masks


def enumerate_queues(sector: Sector, budget: int = DEFAULT_QUEUE_BUDGET) -> Iterator[MultilineQueue]:
    """Yield every multiline queue of ``sector`` exactly once."""
    if sector.n < 2:
        raise ValueError("multiline queues need at least two species")
    total = queue_count(sector)
    if total > budget:
        raise BudgetExceeded(f"sector {sector} has {total} queues, budget is {budget}")
    per_row = [_row_masks(sector.N, M) for M in sector.prefix_sums[:-1]]
    for rows in product(*per_row):
        yield MultilineQueue(sector, rows)


@dataclass
class ExactDist:
    """Exact law on the words of a sector, stored as integer weights over ``total``."""

    sector: Sector
    counts: dict[Word, int]
    total: int
    _tables: dict = field(default_factory=dict, repr=False, compare=False)

    def table(self, positions: tuple[int, ...]) -> Counter:
        """Weights of the letters read at the given 1-based positions (cached)."""
        tab = self._tables.get(positions)
        if tab is None:
            tab = Counter()
            idx = [p - 1 for p in positions]
            for w, c in self.counts.items():
                tab[tuple(w[i] for i in idx)] += c
            self._tables[positions] = tab
        return tab

    @cached_property
    def probabilities(self) -> dict[Word, Fraction]:
        return {w: Fraction(c, self.total) for w, c in self.counts.items()}

    def prob(self, word: Sequence[int]) -> Fraction:
        return Fraction(self.counts.get(tuple(word), 0), self.total)

    def __len__(self) -> int:
        return len(self.counts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExactDist):
            return NotImplemented
        return self.sector == other.sector and self.probabilities == other.probabilities

    def check(self) -> None:
        """Raise if the weights are not a positive law summing to one."""
        if sum(self.counts.values()) != self.total:
            raise ValueError("weights do not sum to the total")
        if any(c <= 0 for c in self.counts.values()):
            raise ValueError("non-positive weight")
        if len(self.counts) != self.sector.num_words():
            raise ValueError("law does not cover every word of the sector")

    def rows(self) -> list[tuple[Word, int, Fraction]]:
        return [(w, self.counts[w], self.probabilities[w]) for w in sorted(self.counts)]

    def to_json(self) -> str:
        return json.dumps(
            {
                "sector": list(self.sector.counts),
                "total": self.total,
                "words": [
                    {"word": list(w), "count": c, "numerator": p.numerator, "denominator": p.denominator}
                    for w, c, p in self.rows()
                ],
            },
            indent=1,
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["word", "count", "numerator", "denominator"])
        for w, c, p in self.rows():
            writer.writerow([" ".join(map(str, w)), c, p.numerator, p.denominator])
        return buf.getvalue()

    @classmethod
    def from_json(cls, text: str) -> "ExactDist":
        data = json.loads(text)
        counts = {tuple(e["word"]): e["count"] for e in data["words"]}
        return cls(Sector(tuple(data["sector"])), counts, data["total"])


def transfer_work(sector: Sector) -> int:
    """Number of (intermediate word, next row) pairs the transfer method visits."""
    N = sector.N
    work, level = 0, 1
    occupied = 0
    for i, M in enumerate(sector.prefix_sums[:-1]):
        if i == 0:
            level = binom(N, M)
            work += level
        else:
            work += level * binom(N, M)
            level *= binom(N - occupied, sector.counts[i])
        occupied = M
    return work


def _transfer(sector: Sector) -> dict[Word, int]:
    # Row-by-row bully projection: after processing row k the ring carries
    # labels 1..k for path classes and k+1 for the remaining sites.
    N = sector.N
    full = (1 << N) - 1
    M = sector.prefix_sums[:-1]
    level: dict[Word, int] = {}
    for mask in _row_masks(N, M[0]):
        level[tuple(1 if mask >> c & 1 else 2 for c in range(N))] = 1
    for k in range(1, len(M)):
        masks = _row_masks(N, M[k])
        nxt: dict[Word, int] = {}
        for word, weight in level.items():
            by_class = [[] for _ in range(k)]
            for pos, lab in enumerate(word):
                if lab <= k:
                    by_class[lab - 1].append(pos)
            for mask in masks:
                free = mask
                out = [k + 2] * N
                for cls, positions in enumerate(by_class, start=1):
                    for p in positions:
                        col = _next_free(free, p, N, full)
                        free &= ~(1 << col)
                        out[col] = cls
                for c in range(N):
                    if free >> c & 1:
                        out[c] = k + 1
                key = tuple(out)
                nxt[key] = nxt.get(key, 0) + weight
        level = nxt
    return level


def _enumerate_shard(args: tuple[tuple[int, ...], int, list[list[int]]]) -> Counter:
    counts_tuple, first, rest = args
    N = sum(counts_tuple)
    acc: Counter = Counter()
    for tail in product(*rest):
        acc[_bully_rows((first,) + tail, N)] += 1
    return acc


def stationary_from_queues(
    sector: Sector,
    method: str = "transfer",
    budget: int = DEFAULT_QUEUE_BUDGET,
    workers: int | None = None,
) -> ExactDist:
    """Stationary law of the sector by counting queues per projected word.

    ``method="enumerate"`` projects every queue with :func:`bully_project`
    (sharded over first-row configurations); the budget caps the number of
    queues.  ``method="transfer"`` aggregates the same counts row by row,
    carrying one weight per intermediate word; the budget caps the number of
    (word, row configuration) pairs visited.
    """
    if sector.n == 1:
        return ExactDist(sector, {(1,) * sector.N: 1}, 1)
    total = queue_count(sector)
    if method == "transfer":
        work = transfer_work(sector)
        if work > budget:
            raise BudgetExceeded(f"sector {sector} needs {work} transfer steps, budget is {budget}")
        counts = _transfer(sector)
    elif method == "enumerate":
        if total > budget:
            raise BudgetExceeded(f"sector {sector} has {total} queues, budget is {budget}")
        per_row = [_row_masks(sector.N, M) for M in sector.prefix_sums[:-1]]
        shards = [(sector.counts, first, per_row[1:]) for first in per_row[0]]
        workers = workers or worker_count()
        acc: Counter = Counter()
        if workers > 1 and len(shards) > 1:
            with ProcessPoolExecutor(workers) as pool:
                for part in pool.map(_enumerate_shard, shards, chunksize=max(1, len(shards) // (4 * workers))):
                    acc.update(part)
        else:
            for shard in shards:
                acc.update(_enumerate_shard(shard))
        counts = dict(acc)
    else:
        raise ValueError(f"unknown method {method!r}")
    return ExactDist(sector, counts, total)
