"""Exhaustive checks of closed forms and conjectures against exact laws.

Every check compares two exact rationals for equality.  Instances whose
exact law would exceed the queue budget are listed as skipped and make the
verdict ``"incomplete"``; they are never counted as passing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from typing import Callable, Iterable, Iterator

from .combinatorics import binom
from .correlations import (
    THREE_POINT_PATTERNS,
    aggregate_three_point,
    aggregate_two_point,
    computed_laws,
    e_adjacent,
    e_decreasing,
    e_distance,
    e_distance_top,
    e_distance_uniform,
    e_three,
    marginal,
    observed,
    stationary,
    three_point_word,
)
from .mlq import DEFAULT_QUEUE_BUDGET, BudgetExceeded, ExactDist, Sector, reverse_word, stationary_from_queues
from .patterns import PatternQuery
from .ssyt import count_x, count_y, count_z, enumerate_tableaux, ssyt2, ssyt3
from .tasep import DEFAULT_STATE_BUDGET, build_generator, solve_stationary

__all__ = [
    "Instance",
    "FormulaReport",
    "FORMULAS",
    "CONJECTURES",
    "verify_formula",
    "verify_conjecture",
    "compositions",
    "symmetry_instances",
]


@dataclass(frozen=True)
class Instance:
    params: dict
    expected: Fraction
    observed: Fraction

    @property
    def match(self) -> bool:
        return self.expected == self.observed

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "expected": _q(self.expected),
            "observed": _q(self.observed),
            "match": self.match,
        }


def _q(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass
class FormulaReport:
    """Outcome of one exhaustive sweep.

    ``band`` holds informational instances that sit just outside a
    hypothesis (or rely on unproved values); they never affect the verdict.
    """

    formula: str
    kind: str  # "proved" or "conjecture"
    n_range: list[int]
    instances: list[Instance] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)
    band: list[Instance] = field(default_factory=list)

    @property
    def mismatches(self) -> list[Instance]:
        return [x for x in self.instances if not x.match]

    @property
    def verdict(self) -> str:
        if self.mismatches:
            return "fail"
        if self.skipped:
            return "incomplete"
        return "pass"

    def to_json(self) -> str:
        return json.dumps(
            {
                "formula": self.formula,
                "kind": self.kind,
                "n": self.n_range,
                "verdict": self.verdict,
                "tested": len(self.instances),
                "mismatched": len(self.mismatches),
                "instances": [x.to_dict() for x in self.instances],
                "skipped": self.skipped,
                "band": [x.to_dict() for x in self.band],
            },
            indent=1,
        )

    def to_csv(self) -> str:
        lines = ["section,params,expected,observed,match"]
        for section, items in (("main", self.instances), ("band", self.band)):
            for x in items:
                params = " ".join(f"{k}={v}" for k, v in x.params.items())
                lines.append(f"{section},{params},{_q(x.expected)},{_q(x.observed)},{x.match}")
        return "\n".join(lines) + "\n"

    def to_table(self, limit: int = 20) -> str:
        head = (
            f"{self.formula} [{self.kind}] n={self.n_range}: {self.verdict} "
            f"({len(self.instances)} tested, {len(self.mismatches)} mismatched, {len(self.skipped)} skipped)"
        )
        lines = [head]
        shown = self.mismatches or self.instances
        for x in shown[:limit]:
            params = " ".join(f"{k}={v}" for k, v in x.params.items())
            flag = "ok" if x.match else "MISMATCH"
            lines.append(f"  {params:<40} expected {_q(x.expected):>14} observed {_q(x.observed):>14} {flag}")
        if len(shown) > limit:
            lines.append(f"  ... {len(shown) - limit} more")
        if self.band:
            held = sum(x.match for x in self.band)
            lines.append(f"  boundary band: {held}/{len(self.band)} instances satisfy the identity (informational)")
        for s in self.skipped[:limit]:
            lines.append(f"  skipped {s}")
        return "\n".join(lines)


# A sweep yields (params, expected, thunk for observed, to_band).
Case = tuple[dict, Callable[[], Fraction], Callable[[], Fraction], bool]


def _run(formula: str, kind: str, ns: list[int], cases: Iterable[Case]) -> FormulaReport:
    report = FormulaReport(formula, kind, list(ns))
    for params, expected, obs, to_band in cases:
        try:
            inst = Instance(params, Fraction(expected()), Fraction(obs()))
        except BudgetExceeded as exc:
            report.skipped.append({**params, "reason": str(exc)})
            continue
        (report.band if to_band else report.instances).append(inst)
    return report


def _prefix(n: int, labels, budget: int) -> Callable[[], Fraction]:
    return lambda: observed(n, PatternQuery.prefix(labels), budget)


# ------------------------------------------------------------ proved formulas


def _two_point(n: int, budget: int) -> Iterator[Case]:
    for w1 in range(1, n + 1):
        for w2 in range(1, n + 1):
            if w1 != w2:
                yield {"n": n, "w1": w1, "w2": w2}, lambda w1=w1, w2=w2: e_adjacent(n, w1, w2), _prefix(
                    n, (w1, w2), budget
                ), False


def _distance(n: int, budget: int) -> Iterator[Case]:
    for w1 in range(1, n + 1):
        for wa in range(1, n + 1):
            if w1 == wa:
                continue
            for a in range(2, n + 1):
                q = PatternQuery.of([(1, w1), (a, wa)])
                obs = lambda q=q: observed(n, q, budget)
                base = {"n": n, "w1": w1, "wa": wa, "a": a}
                yield {**base, "form": "count"}, lambda w1=w1, wa=wa, a=a: e_distance(
                    n, w1, wa, a, cross_check=False
                ), obs, False
                if w1 < wa and a <= wa - w1:
                    yield {**base, "form": "uniform"}, lambda: e_distance_uniform(n), obs, False
                if w1 == n:
                    yield {**base, "form": "top"}, lambda wa=wa, a=a: e_distance_top(n, wa, a), obs, False
                elif wa == n:
                    # rotate so the top label sits first
                    yield {**base, "form": "top"}, lambda w1=w1, a=a: e_distance_top(n, w1, n - a + 2), obs, False


def _three_point(n: int, budget: int) -> Iterator[Case]:
    for i, j, k in combinations(range(1, n + 1), 3):
        for pattern in THREE_POINT_PATTERNS:
            if pattern == "123":
                continue
            word = three_point_word(pattern, i, j, k)
            yield {"n": n, "pattern": pattern, "i": i, "j": j, "k": k}, lambda p=pattern, i=i, j=j, k=k: e_three(
                n, p, i, j, k
            ), _prefix(n, word, budget), False


def _decreasing(n: int, budget: int, r_values: Iterable[int] = (2, 3, 4)) -> Iterator[Case]:
    for r in r_values:
        if r > n:
            continue
        for labels in combinations(range(n, 0, -1), r):
            yield {"n": n, "labels": list(labels)}, lambda l=labels: e_decreasing(
                n, l
            ), _prefix(n, labels, budget), False


def _aggregate_two(n: int, budget: int) -> Iterator[Case]:
    agg = aggregate_two_point(n)

    def total(pred) -> Callable[[], Fraction]:
        return lambda: sum(
            (
                observed(n, PatternQuery.prefix((a, b)), budget)
                for a in range(1, n + 1)
                for b in range(1, n + 1)
                if a != b and pred(a, b)
            ),
            Fraction(0),
        )

    yield {"n": n, "event": "w1>w2"}, lambda: agg.descent, total(lambda a, b: a > b), False
    yield {"n": n, "event": "w1=w2-1"}, lambda: agg.unit_ascent, total(lambda a, b: a == b - 1), False
    yield {"n": n, "event": "w1<w2-1"}, lambda: agg.long_ascent, total(lambda a, b: a < b - 1), False


def _aggregate_three(n: int, budget: int) -> Iterator[Case]:
    for row in aggregate_three_point(n):

        def total(row=row) -> Fraction:
            return sum(
                (
                    observed(n, PatternQuery.prefix(three_point_word(row.pattern, i, j, k)), budget)
                    for i, j, k in combinations(range(1, n + 1), 3)
                    if row.contains(i, j, k)
                ),
                Fraction(0),
            )

        yield {"n": n, "row": row.name}, lambda row=row: row.value, total, not row.proved


def compositions(N: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Compositions of ``N`` into ``parts`` positive parts."""
    for cuts in combinations(range(1, N), parts - 1):
        bounds = (0,) + cuts + (N,)
        yield tuple(b - a for a, b in zip(bounds, bounds[1:]))


def _reverse_word(n: int, budget: int, max_N: int = 7) -> Iterator[Case]:
    # n species, every ring size up to max_N
    for N in range(n, max_N + 1):
        for counts in compositions(N, n):
            sector = Sector(counts)
            word = tuple(x for s in range(n, 0, -1) for x in [s] * counts[s - 1])
            dist = lambda sector=sector: stationary(sector, budget)
            yield {"sector": str(sector)}, lambda: Fraction(1), lambda dist=dist, word=word: Fraction(
                dist().counts[word]
            ), False


def symmetry_instances(dist: ExactDist, budget: int = DEFAULT_QUEUE_BUDGET) -> Iterator[Case]:
    """Rotation, particle-hole and one-site marginal checks on one law.

    Rotation and particle-hole compare word counts: the expected value is the
    number of words and the observed value the number that satisfy the identity.
    """
    sector = dist.sector
    N = sector.N
    tag = {"sector": str(sector)}
    words = list(dist.counts)
    probs = dist.probabilities

    def rotated() -> Fraction:
        return Fraction(sum(probs[w[1:] + w[:1]] == probs[w] for w in words))

    def flipped() -> Fraction:
        other = stationary(sector.reversed(), budget).probabilities
        return Fraction(sum(other[reverse_word(w, sector.n)] == probs[w] for w in words))

    yield {**tag, "check": "rotation"}, lambda: Fraction(len(words)), rotated, False
    yield {**tag, "check": "particle-hole"}, lambda: Fraction(len(words)), flipped, False
    for pos in (1, N):
        for label in range(1, sector.n + 1):
            q = PatternQuery.of([(pos, label)])
            yield {**tag, "check": "site", "pos": pos, "label": label}, lambda label=label: Fraction(
                sector.counts[label - 1], N
            ), lambda q=q: marginal(dist, q), False


def _symmetries(n: int, budget: int) -> Iterator[Case]:
    stationary(Sector.distinct(n), budget)
    seen: set[Sector] = set()
    for dist in computed_laws():
        if dist.sector not in seen:
            seen.add(dist.sector)
            yield from symmetry_instances(dist, budget)


def _lumping(n: int, budget: int, max_N: int | None = None) -> Iterator[Case]:
    # default: rings up to 7 sites for n <= 4, only the permutation sector beyond
    if max_N is None:
        max_N = 7 if n <= 4 else n
    for N in range(n, max_N + 1):
        for counts in compositions(N, n):
            sector = Sector(counts)

            def agree(sector=sector, method="enumerate") -> Fraction:
                queues = stationary_from_queues(sector, method=method, budget=budget, workers=1)
                solved = solve_stationary(build_generator(sector, DEFAULT_STATE_BUDGET))
                qp, sp = queues.probabilities, solved.probabilities
                return Fraction(sum(qp.get(w) == p for w, p in sp.items()))

            size = lambda sector=sector: Fraction(sector.num_words())
            yield {"sector": str(sector), "route": "enumerate"}, size, agree, False
            yield {"sector": str(sector), "route": "transfer"}, size, lambda s=sector: agree(s, "transfer"), False


def _ssyt(m_max: int, budget: int) -> Iterator[Case]:
    # one brute-force pass per shape feeds every constrained count
    for m in range(0, m_max + 1):
        for r in range(0, m + 1):
            for l in range(0, r + 1):
                tabs = list(enumerate_tableaux((r, l), m)) if m >= 1 else [None]
                yield {"f": "ssyt2", "r": r, "l": l, "m": m}, lambda r=r, l=l, m=m: ssyt2(r, l, m), lambda t=tabs: len(
                    t
                ), False
                if m < 1 or l < 1:
                    continue
                for beta in range(1, m + 1):
                    hits = sum(beta in t.columns[1] for t in tabs)
                    yield {"f": "count_y", "r": r, "l": l, "beta": beta, "m": m}, lambda r=r, l=l, b=beta, m=m: count_y(
                        r, l, b, m
                    ), lambda h=hits: h, False
                    if l + m - r <= beta:
                        yield {"f": "flat_window", "r": r, "l": l, "beta": beta, "m": m}, lambda r=r, l=l, m=m: count_y(
                            r, l, m, m
                        ), lambda r=r, l=l, b=beta, m=m: count_y(r, l, b, m), False
                    for alpha in range(1, beta + 1):
                        hits = sum(t.columns[0][0] == alpha and t.columns[1][0] == beta for t in tabs)
                        yield {"f": "count_z", "r": r, "l": l, "alpha": alpha, "beta": beta, "m": m}, (
                            lambda r=r, l=l, a=alpha, b=beta, m=m: count_z(r, l, a, b, m)
                        ), lambda h=hits: h, False
    for r in range(1, m_max + 1):
        # last row (alpha, beta) forces every entry to be at most beta
        for beta in range(1, m_max + 1):
            tabs = list(enumerate_tableaux((r, r), beta))
            for alpha in range(1, beta + 1):
                hits = sum(t.columns[0][-1] == alpha and t.columns[1][-1] == beta for t in tabs)
                yield {"f": "count_x", "r": r, "alpha": alpha, "beta": beta}, lambda r=r, a=alpha, b=beta: count_x(
                    r, a, b
                ), lambda h=hits: h, False
    for m in range(0, min(m_max, 7) + 1):
        for a in range(0, m + 1):
            for b in range(0, a + 1):
                for c in range(0, b + 1):
                    count = lambda a=a, b=b, c=c, m=m: (
                        sum(1 for _ in enumerate_tableaux((a, b, c), m)) if m >= 1 else 1
                    )
                    yield {"f": "ssyt3", "a": a, "b": b, "c": c, "m": m}, lambda a=a, b=b, c=c, m=m: ssyt3(
                        a, b, c, m
                    ), count, False


FORMULAS: dict[str, Callable[..., Iterator[Case]]] = {
    "two-point": _two_point,
    "distance": _distance,
    "three-point": _three_point,
    "decreasing": _decreasing,
    "aggregate-two": _aggregate_two,
    "aggregate-three": _aggregate_three,
    "reverse-word": _reverse_word,
    "symmetries": _symmetries,
    "lumping": _lumping,
    "ssyt": _ssyt,
}


def verify_formula(formula: str, n_range: Iterable[int], budget: int = DEFAULT_QUEUE_BUDGET, **options) -> FormulaReport:
    """Check a proved identity on every instance for each ``n`` in ``n_range``.

    ``n`` means the number of species for the TASEP checks and the largest
    entry for ``"ssyt"``.  ``options`` are forwarded to the instance
    generator (``r_values`` for ``"decreasing"``, ``max_N`` for
    ``"lumping"`` and ``"reverse-word"``).
    """
    if formula not in FORMULAS:
        raise ValueError(f"unknown formula {formula!r}; choose from {sorted(FORMULAS)}")
    ns = list(n_range)
    gen = FORMULAS[formula]
    cases = (case for n in ns for case in gen(n, budget, **options))
    return _run(formula, "proved", ns, cases)


# ---------------------------------------------------------------- conjectures


def _increasing_triple(n: int, budget: int, r_max: int | None = None) -> Iterator[Case]:
    for i, j, k in combinations(range(1, n + 1), 3):
        yield {"n": n, "i": i, "j": j, "k": k}, lambda i=i, j=j, k=k: e_three(n, "123", i, j, k).value, _prefix(
            n, (i, j, k), budget
        ), False


def _spread_increasing(n: int, budget: int, r_max: int | None = None) -> Iterator[Case]:
    # i_1 < i_2 - 1 < ... : consecutive labels differ by at least 2
    top = r_max or n
    for r in range(1, top + 1):
        for labels in combinations(range(1, n + 1), r):
            if all(b - a >= 2 for a, b in zip(labels, labels[1:])):
                yield {"n": n, "labels": list(labels)}, lambda r=r: Fraction(1, n**r), _prefix(n, labels, budget), False


def _large_follower(n: int, budget: int, r_max: int | None = None) -> Iterator[Case]:
    top = min(r_max or n, n - 1)
    for r in range(1, top + 1):
        for k in range(1, n + 1):
            for labels in permutations(range(1, k - 1), r):
                yield {"n": n, "labels": list(labels), "k": k}, lambda l=labels: _prefix(n, l, budget)() / n, _prefix(
                    n, labels + (k,), budget
                ), False


def _large_distant(n: int, budget: int, r_max: int | None = None) -> Iterator[Case]:
    # hypothesis k > b - r + max; the equality case k = b - r + max is the band
    top = min(r_max or n, n - 1)
    for r in range(1, top + 1):
        for labels in permutations(range(1, n + 1), r):
            hi = max(labels)
            for b in range(r + 1, n + 1):
                for k in range(1, n + 1):
                    if k in labels or k < b - r + hi:
                        continue
                    q = PatternQuery(tuple((a + 1, x) for a, x in enumerate(labels)) + ((b, k),))
                    yield {"n": n, "labels": list(labels), "b": b, "k": k}, lambda l=labels: _prefix(
                        n, l, budget
                    )() / n, lambda q=q: observed(n, q, budget), k == b - r + hi


def _two_block(n: int, budget: int, r_max: int | None = None) -> Iterator[Case]:
    top = r_max or n
    for r in range(1, min(top, n - 1) + 1):
        for s in range(1, min(top, n - r) + 1):
            for left in permutations(range(1, n + 1), r):
                lo = max(left) + 2
                for right in permutations(range(lo, n + 1), s):
                    yield {"n": n, "left": list(left), "right": list(right)}, lambda l=left, rt=right: _prefix(
                        n, l, budget
                    )() * _prefix(n, rt, budget)(), _prefix(n, left + right, budget), False


CONJECTURES: dict[str, Callable[..., Iterator[Case]]] = {
    "increasing-triple": _increasing_triple,
    "spread-increasing": _spread_increasing,
    "large-follower": _large_follower,
    "large-distant": _large_distant,
    "two-block": _two_block,
}


def verify_conjecture(name: str, n: int | Iterable[int], budget: int = DEFAULT_QUEUE_BUDGET, r_max: int | None = None) -> FormulaReport:
    """Search for counterexamples to an independence conjecture.

    A ``"pass"`` verdict only means no counterexample exists among the
    tested instances.  ``r_max`` caps the block length where the
    conjecture has one.
    """
    if name not in CONJECTURES:
        raise ValueError(f"unknown conjecture {name!r}; choose from {sorted(CONJECTURES)}")
    ns = [n] if isinstance(n, int) else list(n)
    gen = CONJECTURES[name]
    return _run(name, "conjecture", ns, (case for m in ns for case in gen(m, budget, r_max)))
