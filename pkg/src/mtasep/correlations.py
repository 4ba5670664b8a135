"""Closed-form correlations of the permutation TASEP and exact marginals.

All formulas concern the sector with ``n`` distinct species on a ring of
``n`` sites.  ``E[w_1 = x, w_2 = y]`` and friends are returned as exact
fractions.  Labels are always written ``i < j < k``; a three-point pattern
such as ``"213"`` names the relative order of ``(w_1, w_2, w_3)``, so
``"213"`` is the event ``(w_1, w_2, w_3) = (j, i, k)``.

Observed values come from :func:`observed`, which lumps every species that
is not queried (the projection principle) and counts multiline queues in
the smaller sector.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, prod
from typing import NamedTuple, Sequence

from .combinatorics import binom
from .mlq import DEFAULT_QUEUE_BUDGET, ExactDist, Sector, stationary_from_queues
from .patterns import PatternQuery
from .ssyt import count_y

__all__ = [
    "PatternQuery",
    "ConjecturalValue",
    "FormulaMismatch",
    "THREE_POINT_PATTERNS",
    "marginal",
    "project_sector",
    "stationary",
    "computed_laws",
    "observed",
    "e_adjacent",
    "e_distance",
    "e_distance_uniform",
    "e_distance_top",
    "e_three",
    "e_decreasing",
    "TwoPointAggregate",
    "aggregate_two_point",
    "ThreePointRow",
    "aggregate_three_point",
    "density_trend",
]

THREE_POINT_PATTERNS = ("321", "213", "132", "312", "231", "123")


class FormulaMismatch(ArithmeticError):
    """Two closed forms that must agree on an instance do not."""


@dataclass(frozen=True)
class ConjecturalValue:
    """A value predicted by an unproved formula."""

    value: Fraction
    source: str

    def __float__(self) -> float:
        return float(self.value)


# ------------------------------------------------------------------ marginals


def marginal(dist: ExactDist, q: PatternQuery) -> Fraction:
    """Exact probability of the event ``q`` under ``dist``."""
    q.validate(dist.sector)
    positions = tuple(p for p, _ in q.assignments)
    return Fraction(dist.table(positions).get(q.labels, 0), dist.total)


def project_sector(n: int, labels: Sequence[int]) -> tuple[Sector, dict[int, int]]:
    """Lump the unqueried species of the ``n``-species permutation TASEP.

    Each queried label stays its own species; each maximal run of labels
    between (or outside) them becomes one species.  Returns the reduced
    sector and the map from queried labels to their new species.
    """
    labels = list(labels)
    if any(a >= b for a, b in zip(labels, labels[1:])):
        raise ValueError(f"labels must be strictly increasing, got {labels}")
    if labels and not (1 <= labels[0] and labels[-1] <= n):
        raise ValueError(f"labels must lie in 1..{n}")
    counts: list[int] = []
    mapping: dict[int, int] = {}
    prev = 0
    for x in labels:
        if x - prev - 1 > 0:
            counts.append(x - prev - 1)
        counts.append(1)
        mapping[x] = len(counts)
        prev = x
    if n - prev > 0:
        counts.append(n - prev)
    return Sector(tuple(counts)), mapping


_REGISTRY: dict[Sector, ExactDist] = {}


def stationary(sector: Sector, budget: int = DEFAULT_QUEUE_BUDGET) -> ExactDist:
    """Queue-counting stationary law, memoised per sector."""
    dist = _REGISTRY.get(sector)
    if dist is None:
        dist = _REGISTRY[sector] = stationary_from_queues(sector, budget=budget)
    return dist


def computed_laws() -> list[ExactDist]:
    """Every law :func:`stationary` has produced so far in this process."""
    return list(_REGISTRY.values())


def observed(n: int, q: PatternQuery, budget: int = DEFAULT_QUEUE_BUDGET) -> Fraction:
    """Exact probability of ``q`` in the ``n``-species permutation TASEP via projection."""
    labels = q.labels
    if len(set(labels)) != len(labels):
        raise ValueError("labels repeat, which is impossible with distinct species")
    q.validate(Sector.distinct(n))
    sector, mapping = project_sector(n, sorted(labels))
    return marginal(stationary(sector, budget), q.relabeled(mapping))


# ---------------------------------------------------------- two-point formulas


def e_adjacent(n: int, w1: int, w2: int) -> Fraction:
    """``P(w_1 = w1, w_2 = w2)`` for neighbouring sites."""
    if w1 == w2:
        raise ValueError("labels must differ for distinct species")
    if not (1 <= w1 <= n and 1 <= w2 <= n):
        raise ValueError(f"labels must lie in 1..{n}")
    if w1 > w2:
        return Fraction(w1 - w2, n * binom(n, 2))
    # unit ascent: the bonus term is driven by the smaller label
    extra = Fraction(w1 * (n - w1), n * n * (n - 1)) if w1 == w2 - 1 else 0
    return Fraction(1, n * n) + extra


def _y_term(r: int, l: int, beta: int, m: int, a: int, b: int, n: int) -> Fraction:
    den = binom(n, a) * binom(n, b)
    if den == 0:
        return Fraction(0)
    return Fraction(count_y(r, l, beta, m), den)


def _e_distance_desc(n: int, j: int, i: int, a: int) -> Fraction:
    # P(w_1 = j, w_a = i) with j > i, via second-column counts
    beta, m = a - 1, n - 1
    return (
        _y_term(n - i, n - j + 1, beta, m, i - 1, j - 1, n)
        - _y_term(n - i, n - j, beta, m, i - 1, j, n)
        - _y_term(n - i - 1, n - j + 1, beta, m, i, j - 1, n)
        + _y_term(n - i - 1, n - j, beta, m, i, j, n)
    )


def e_distance_uniform(n: int) -> Fraction:
    """``P(w_1 = i, w_a = j)`` for ``i < j`` and ``a <= j - i``."""
    return Fraction(1, n * n)


def e_distance_top(n: int, i: int, a: int) -> Fraction:
    """``P(w_1 = n, w_a = i)`` for ``1 <= i < n`` and ``2 <= a <= n``."""
    if not (1 <= i < n and 2 <= a <= n):
        raise ValueError("need 1 <= i < n and 2 <= a <= n")
    return Fraction(1, n * n) + Fraction(
        (n - i) * binom(i - 1, a - 2) - binom(i - 1, a - 1), a * n * binom(n, a)
    )


def e_distance(n: int, w1: int, wa: int, a: int, cross_check: bool = True) -> Fraction:
    """``P(w_1 = w1, w_a = wa)`` for sites ``a - 1`` apart.

    The general count-based formula handles ``w1 > wa``; the opposite order
    uses rotation, ``P(w_1 = i, w_a = j) = P(w_1 = j, w_{n-a+2} = i)``.
    Whenever one of the simpler closed forms also applies, both are
    evaluated and must agree (unless ``cross_check`` is false).
    """
    if w1 == wa:
        raise ValueError("labels must differ for distinct species")
    if not (1 <= w1 <= n and 1 <= wa <= n):
        raise ValueError(f"labels must lie in 1..{n}")
    if not (2 <= a <= n):
        raise ValueError(f"position must satisfy 2 <= a <= {n}")
    if w1 > wa:
        j, i, a_eff = w1, wa, a
    else:
        j, i, a_eff = wa, w1, n - a + 2
    value = _e_distance_desc(n, j, i, a_eff)
    if not cross_check:
        return value
    checks = []
    if w1 < wa and a <= wa - w1:
        checks.append(("uniform window", e_distance_uniform(n)))
    if j == n:
        checks.append(("top label", e_distance_top(n, i, a_eff)))
    if a == 2:
        checks.append(("adjacent", e_adjacent(n, w1, wa)))
    for name, other in checks:
        if other != value:
            raise FormulaMismatch(f"{name} form gives {other}, count form gives {value} at n={n}, {w1},{wa}, a={a}")
    return value


# -------------------------------------------------------- three-point formulas


def _e321(n: int, i: int, j: int, k: int) -> Fraction:
    return Fraction(6 * (j - i) * (k - i) * (k - j), n**3 * (n - 1) ** 2 * (n - 2))


def _e213(n: int, i: int, j: int, k: int) -> Fraction:
    if k > j + 1:
        return Fraction(2 * (j - i), n**3 * (n - 1))
    return Fraction(2 * (j - i), n * (n - 1)) * (
        Fraction(1, n * n) + Fraction(j * (n - j), n * n * (n - 1))
    ) + Fraction(2 * j * (j - 1) * (n - j), n**3 * (n - 1) ** 2 * (n - 2))


def _e231(n: int, i: int, j: int, k: int) -> Fraction:
    if k > j + 1:
        return Fraction(3 * (j - i) * (2 * n - j - i - 1), n**3 * (n - 1) * (n - 2)) - Fraction(
            4 * (j - i) * (n - k), n**3 * (n - 1) ** 2
        )
    inner = (
        Fraction(1, n - 2)
        + Fraction(3 * (n - i - 1), n)
        - Fraction((n - 1 - j) * (3 * n - 3 * i + j - 1), n * (n - 2))
    )
    return Fraction((j - i) * (n - 1 - j), n * n * (n - 1) ** 2) * inner + Fraction(
        6 * (j - i) * (n - i), n**3 * (n - 1) * (n - 2)
    )


def _e123(n: int, i: int, j: int, k: int) -> Fraction:
    if j > i + 1 and k > j + 1:
        return Fraction(1, n**3)
    if j == i + 1 and k > j + 1:
        return Fraction(n - 1 + i * (n - i), n**3 * (n - 1))
    if j > i + 1 and k == j + 1:
        return Fraction(n - 1 + j * (n - j), n**3 * (n - 1))
    return Fraction((n - 1 + i * (n - i)) * (n - 1 + (i + 1) * (n - i - 1)), n**3 * (n - 1) ** 2) + Fraction(
        2 * i * (i + 1) * (n - i) * (n - i - 1), n**3 * (n - 1) ** 2 * (n - 2)
    )


def three_point_word(pattern: str, i: int, j: int, k: int) -> tuple[int, int, int]:
    """The labels ``(w_1, w_2, w_3)`` named by ``pattern``."""
    if pattern not in THREE_POINT_PATTERNS:
        raise ValueError(f"unknown pattern {pattern!r}")
    lab = {"1": i, "2": j, "3": k}
    return tuple(lab[c] for c in pattern)  # type: ignore[return-value]


def e_three(n: int, pattern: str, i: int, j: int, k: int) -> Fraction | ConjecturalValue:
    """``P((w_1, w_2, w_3) = three_point_word(pattern, i, j, k))``.

    ``"132"`` and ``"312"`` are the particle-hole images of ``"213"`` and
    ``"231"``.  The increasing pattern ``"123"`` is only conjectured and is
    returned as a :class:`ConjecturalValue`.
    """
    if not (1 <= i < j < k <= n):
        raise ValueError(f"need 1 <= i < j < k <= n, got {(i, j, k)} with n={n}")
    if n < 3:
        raise ValueError("three-point correlations need n >= 3")
    r = lambda x: n + 1 - x  # noqa: E731
    if pattern == "321":
        return _e321(n, i, j, k)
    if pattern == "213":
        return _e213(n, i, j, k)
    if pattern == "132":
        return _e213(n, r(k), r(j), r(i))
    if pattern == "231":
        return _e231(n, i, j, k)
    if pattern == "312":
        return _e231(n, r(k), r(j), r(i))
    if pattern == "123":
        return ConjecturalValue(_e123(n, i, j, k), "increasing three-point conjecture")
    raise ValueError(f"unknown pattern {pattern!r}")


def e_decreasing(n: int, labels: Sequence[int]) -> Fraction:
    """``P(w_1..w_r = labels)`` for strictly decreasing labels (Vandermonde form)."""
    labels = list(labels)
    r = len(labels)
    if r == 0 or r > n:
        raise ValueError("need 1 <= r <= n labels")
    if any(a <= b for a, b in zip(labels, labels[1:])):
        raise ValueError(f"labels must be strictly decreasing, got {labels}")
    if not (1 <= labels[-1] and labels[0] <= n):
        raise ValueError(f"labels must lie in 1..{n}")
    vdm = prod(labels[a] - labels[b] for a in range(r) for b in range(a + 1, r))
    return Fraction(factorial(r) * vdm, prod((n - i) ** (r - i) for i in range(r)))


# ------------------------------------------------------------------ aggregates


class TwoPointAggregate(NamedTuple):
    descent: Fraction  # P(w_1 > w_2)
    unit_ascent: Fraction  # P(w_1 = w_2 - 1)
    long_ascent: Fraction  # P(w_1 < w_2 - 1)


def aggregate_two_point(n: int) -> TwoPointAggregate:
    if n < 2:
        raise ValueError("need n >= 2")
    return TwoPointAggregate(
        Fraction(1, 3) + Fraction(1, 3 * n),
        Fraction(1, 6) + Fraction(7 * n - 6, 6 * n * n),
        Fraction(1, 2) - Fraction(3 * n - 2, 2 * n * n),
    )


@dataclass(frozen=True)
class ThreePointRow:
    """One class of three-point events and its total probability."""

    name: str
    pattern: str
    gap: str  # which label gap is forced to one: "", "ij" (j = i+1), "jk", or "both"
    value: Fraction
    proved: bool

    def contains(self, i: int, j: int, k: int) -> bool:
        ij, jk = j == i + 1, k == j + 1
        want_ij = self.gap in ("ij", "both")
        want_jk = self.gap in ("jk", "both")
        # rows only pin down the gaps that matter for their pattern
        if self.pattern in ("213", "231"):
            return jk == want_jk
        if self.pattern in ("132", "312"):
            return ij == want_ij
        if self.pattern == "123":
            return ij == want_ij and jk == want_jk
        return True


def aggregate_three_point(n: int) -> list[ThreePointRow]:
    """Total probabilities of the 13 classes of three adjacent labels."""
    if n < 5:
        raise ValueError("need n >= 5 so that every class is populated")
    F = Fraction
    v_kji = F((n + 1) * (n + 2), 30 * n * (n - 1))
    v_ikj = F((n - 2) * (n - 3), 12 * n * n)
    v_iki1 = F(n**3 + 8 * n**2 - 23 * n + 10, 20 * n * n * (n - 1))
    v_kij = F((n + 1) * (n - 3) * (7 * n - 10), 60 * n * n * (n - 1))
    v_kii1 = F((n + 1) * (n * n + 7 * n - 10), 20 * n * n * (n - 1))
    v_ijk = F((n - 2) * (n - 3) * (n - 4), 6 * n**3)
    v_ii1k = F((n - 2) * (n - 3) * (n + 8), 12 * n**3)
    v_ii1i2 = F(n**4 + 13 * n**3 + 32 * n**2 - 160 * n + 120, 30 * n**3 * (n - 1))
    return [
        ThreePointRow("(k,j,i)", "321", "", v_kji, True),
        ThreePointRow("(i,k,j)", "132", "", v_ikj, True),
        ThreePointRow("(j,i,k)", "213", "", v_ikj, True),
        ThreePointRow("(i,k,i+1)", "132", "ij", v_iki1, True),
        ThreePointRow("(j,i,j+1)", "213", "jk", v_iki1, True),
        ThreePointRow("(k,i,j)", "312", "", v_kij, True),
        ThreePointRow("(j,k,i)", "231", "", v_kij, True),
        ThreePointRow("(k,i,i+1)", "312", "ij", v_kii1, True),
        ThreePointRow("(j,j+1,i)", "231", "jk", v_kii1, True),
        ThreePointRow("(i,j,k)", "123", "", v_ijk, False),
        ThreePointRow("(i,i+1,k)", "123", "ij", v_ii1k, False),
        ThreePointRow("(i,j,j+1)", "123", "jk", v_ii1k, False),
        ThreePointRow("(i,i+1,i+2)", "123", "both", v_ii1i2, False),
    ]


# ------------------------------------------------------------- limit trend


def density_trend(ns: Sequence[int] = (20, 40, 80)) -> list[dict]:
    """Finite-n rescaled correlations next to their continuum densities.

    Informational only.  Each row fixes a point of ``[-1, 1]^2`` (or
    ``[-1, 1]^3``), evaluates the exact finite formula at the nearest labels
    for every ``n`` in ``ns``, rescales it and reports whether the distance
    to the density shrinks monotonically.
    """

    def label(x: float, n: int) -> int:
        return min(n, max(1, round((x + 1) * n / 2)))

    rows = []
    cases = [
        ("two-point w1<w2-1", (-0.5, 0.5), lambda n, i, j: e_adjacent(n, i, j) * n * n / 4, lambda x, y: 0.25),
        ("two-point w1>w2", (0.5, -0.5), lambda n, i, j: e_adjacent(n, i, j) * n * n / 4, lambda x, y: (x - y) / 4),
        (
            "two-point w1=w2-1",
            (0.2,),
            lambda n, j: e_adjacent(n, j - 1, j) * n / 2,
            lambda y: (1 - y * y) / 8,
        ),
        (
            "three-point (k,j,i)",
            (0.6, 0.0, -0.6),
            lambda n, k, j, i: e_three(n, "321", i, j, k) * n**3 / 8,
            lambda z, y, x: 3 * (y - x) * (z - x) * (z - y) / 32,
        ),
    ]
    for name, point, finite, density in cases:
        limit = density(*point)
        values = [float(finite(n, *(label(x, n) for x in point))) for n in ns]
        gaps = [abs(v - limit) for v in values]
        rows.append(
            {
                "case": name,
                "point": point,
                "n": list(ns),
                "scaled": values,
                "density": limit,
                "monotone": all(a > b for a, b in zip(gaps, gaps[1:])),
            }
        )
    return rows
