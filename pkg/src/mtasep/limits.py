"""Limit objects: the walk direction, random n-core growth and its limit curve.

Geometry uses one frame throughout: the corner of the Young diagram sits at
the origin, the first row runs along the positive x axis and row ``i``
occupies ``i - 1 <= y <= i``.  Curves are compared along the content lines
``x - y = d``, which are the anti-diagonals of the usual picture where rows
are stacked downwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .combinatorics import binom
from .correlations import e_adjacent, observed
from .patterns import PatternQuery

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

__all__ = [
    "DirectionVector",
    "psi_closed",
    "psi_from_correlations",
    "collinearity",
    "CorePartition",
    "hook_lengths",
    "is_n_core",
    "grow_step",
    "Abacus",
    "random_growth",
    "LimitCurve",
    "staircase",
    "curve_distance",
    "shape_distance",
    "window_counts",
    "points_csv",
]


# ------------------------------------------------------------------ direction


@dataclass(frozen=True)
class DirectionVector:
    components: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if sum(self.components) != 0:
            raise ValueError("direction components must sum to zero")

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def unit(self) -> tuple[float, ...]:
        norm = math.sqrt(sum(float(c) ** 2 for c in self.components))
        return tuple(float(c) / norm for c in self.components)


def psi_closed(n: int) -> DirectionVector:
    """Components ``n + 1 - 2k`` for ``k = 1..n``; unit norm ``sqrt(2 binom(n+1, 3))``."""
    if n < 2:
        raise ValueError("the direction needs n >= 2")
    return DirectionVector(tuple(Fraction(n + 1 - 2 * k) for k in range(1, n + 1)))


def psi_from_correlations(n: int, source: str = "formula") -> DirectionVector:
    """``sum_{j > i} P(w_1 = j, w_2 = i) (e_i - e_j)``, unnormalised.

    ``source="formula"`` uses the closed adjacent correlations,
    ``"enumeration"`` the exact stationary marginals.
    """
    if n < 2:
        raise ValueError("the direction needs n >= 2")
    if source == "formula":
        corr = lambda j, i: e_adjacent(n, j, i)  # noqa: E731
    elif source == "enumeration":
        corr = lambda j, i: observed(n, PatternQuery.prefix((j, i)))  # noqa: E731
    else:
        raise ValueError(f"unknown source {source!r}")
    comp = [Fraction(0)] * n
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            e = corr(j, i)
            comp[i - 1] += e
            comp[j - 1] -= e
    return DirectionVector(tuple(comp))


def collinearity(u: DirectionVector, v: DirectionVector) -> Fraction | None:
    """The exact ratio ``c`` with ``u = c v``, or ``None`` if there is none."""
    if u.n != v.n:
        return None
    ratio = None
    for a, b in zip(u.components, v.components):
        if b == 0:
            if a != 0:
                return None
            continue
        if ratio is None:
            ratio = a / b
        elif a != ratio * b:
            return None
    return ratio


# ------------------------------------------------------------------ partitions


@dataclass(frozen=True)
class CorePartition:
    rows: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        rows = tuple(int(r) for r in self.rows)
        if any(r <= 0 for r in rows) or any(a < b for a, b in zip(rows, rows[1:])):
            raise ValueError(f"rows must be positive and weakly decreasing, got {rows}")
        object.__setattr__(self, "rows", rows)

    @property
    def size(self) -> int:
        return sum(self.rows)

    def conjugate(self) -> tuple[int, ...]:
        if not self.rows:
            return ()
        return tuple(sum(1 for r in self.rows if r > c) for c in range(self.rows[0]))

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.rows)) + ")"


def hook_lengths(p: CorePartition) -> list[list[int]]:
    cols = p.conjugate()
    return [[lam - j + cols[j] - i - 1 for j in range(lam)] for i, lam in enumerate(p.rows)]


def is_n_core(p: CorePartition, n: int) -> bool:
    """True iff no hook length is divisible by ``n``."""
    return all(h % n for row in hook_lengths(p) for h in row)


def grow_step(core: CorePartition, n: int, t: int) -> CorePartition:
    """Add a box at every addable cell whose content ``j - i`` is ``t`` mod ``n``."""
    if not 0 <= t < n:
        raise ValueError(f"residue must lie in 0..{n - 1}")
    rows = list(core.rows)
    grown = list(rows)
    for i in range(len(rows) + 1):
        lam = rows[i] if i < len(rows) else 0
        addable = i == 0 or rows[i - 1] > lam
        # cell (i+1, lam+1) in 1-based matrix indexing has content lam - i
        if addable and (lam - i) % n == t:
            if i < len(rows):
                grown[i] += 1
            else:
                grown.append(1)
    return CorePartition(tuple(grown))


# A core is stored on the n-runner abacus.  Bead positions are lambda_i - i
# (i >= 1); runner r holds exactly the positions congruent to r below a[r].
# Adding every addable box of residue t moves all beads that can step from
# runner t-1 to runner t, which swaps the two runner heights.


@njit(cache=True)
def _abacus_run(a, residues):
    n = a.shape[0]
    boxes = 0
    for s in range(residues.shape[0]):
        t = residues[s]
        p = (t - 1) % n
        if a[p] + 1 > a[t]:
            boxes += (a[p] + 1 - a[t]) // n
            a[p], a[t] = a[t] - 1, a[p] + 1
    return boxes


class Abacus:
    """Runner heights of an n-core; one growth step costs O(1)."""

    def __init__(self, n: int, heights: Sequence[int] | None = None, boxes: int = 0):
        if n < 2:
            raise ValueError("cores need n >= 2")
        self.n = n
        self.heights = np.array(heights if heights is not None else range(n), dtype=np.int64)
        self.boxes = boxes

    def step(self, t: int) -> None:
        self.run([t])

    def run(self, residues: Sequence[int]) -> None:
        res = np.asarray(residues, dtype=np.int64)
        if res.size and (res.min() < 0 or res.max() >= self.n):
            raise ValueError(f"residues must lie in 0..{self.n - 1}")
        self.boxes += int(_abacus_run(self.heights, res))

    def partition(self) -> CorePartition:
        a = [int(x) for x in self.heights]
        n = self.n
        lo = min(a)
        rows = []
        i = 0
        for x in range(max(a) - 1, lo - 1, -1):
            if x < a[x % n]:
                i += 1
                if x + i <= 0:
                    break
                rows.append(x + i)
        else:
            # below min(a) every position holds a bead, so later parts all equal lo + i
            if lo + i != 0:
                raise AssertionError("abacus charge is not zero")
        p = CorePartition(tuple(rows))
        if p.size != self.boxes:
            raise AssertionError(f"abacus lost track of boxes: {p.size} != {self.boxes}")
        return p


def random_growth(
    n: int, steps: int, seed: int, residues: Sequence[int] | None = None
) -> Abacus:
    """Grow a core from the empty partition with uniform residues.

    ``residues`` replaces the random sequence, which is drawn from
    ``numpy.random.Generator(PCG64(seed))`` otherwise.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    ab = Abacus(n)
    if residues is None:
        residues = np.random.Generator(np.random.PCG64(seed)).integers(0, n, size=steps)
    ab.run(residues)
    return ab


# ------------------------------------------------------------------ geometry


@dataclass(frozen=True)
class LimitCurve:
    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("the limit curve needs n >= 2")

    @property
    def gamma(self) -> float:
        n = self.n
        return 2 * math.sqrt(6) / (n * math.sqrt(n * n - 1))

    def vertices(self) -> np.ndarray:
        """Vertices ``gamma (binom(i, 2), binom(n - i + 1, 2))`` for ``i = 1..n``."""
        n, g = self.n, self.gamma
        return np.array([(g * binom(i, 2), g * binom(n - i + 1, 2)) for i in range(1, n + 1)], dtype=float)

    def area(self) -> float:
        poly = np.vstack([[0.0, 0.0], self.vertices()[::-1]])
        x, y = poly[:, 0], poly[:, 1]
        return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def staircase(core: CorePartition, scale: bool = True) -> np.ndarray:
    """Boundary polyline from the y axis to the x axis, optionally at unit area."""
    rows = core.rows
    if not rows:
        raise ValueError("the empty partition has no boundary")
    pts = [(0.0, float(len(rows)))]
    for i in range(len(rows), 0, -1):
        lam = rows[i - 1]
        pts.append((float(lam), float(i)))
        pts.append((float(lam), float(i - 1)))
    arr = np.array(pts)
    # drop repeated corners where consecutive rows have equal length
    keep = np.ones(len(arr), dtype=bool)
    keep[1:] = np.any(np.diff(arr, axis=0) != 0, axis=1)
    arr = arr[keep]
    if scale:
        arr = arr / math.sqrt(core.size)
    return arr


def _radial(poly: np.ndarray, d: np.ndarray) -> np.ndarray:
    # x + y at the point where the polyline (extended along the axes) meets x - y = d
    dv = poly[:, 0] - poly[:, 1]
    sv = poly[:, 0] + poly[:, 1]
    s = np.interp(d, dv, sv)
    s = np.where(d < dv[0], -d, s)
    return np.where(d > dv[-1], d, s)


def curve_distance(a: np.ndarray, b: np.ndarray, grid: int = 1000) -> float:
    """Largest distance between two monotone polylines along content lines.

    Both curves are piecewise linear in ``d``, so the supremum sits on a
    vertex line; ``grid`` extra evenly spaced lines are included as well.
    """
    d_all = np.concatenate([a[:, 0] - a[:, 1], b[:, 0] - b[:, 1]])
    d = np.concatenate([d_all, np.linspace(float(d_all.min()), float(d_all.max()), grid)])
    gap = np.abs(_radial(a, d) - _radial(b, d))
    return float(gap.max() / math.sqrt(2))


def shape_distance(core: CorePartition, n: int, grid: int = 1000) -> float:
    """Distance between the unit-area staircase of ``core`` and the limit curve."""
    if core.size == 0:
        raise ValueError("shape distance of the empty core is undefined")
    return curve_distance(staircase(core), LimitCurve(n).vertices(), grid)


def window_counts(core: CorePartition, n: int) -> list[int]:
    """Right steps in each length-``n`` window along the boundary.

    The boundary is padded with ``n`` up steps before and ``n`` right steps
    after, so the counts start at 0 and end at ``n``.  For an n-core they
    never decrease.
    """
    steps = [0] * n
    rows = core.rows
    for i in range(len(rows), 0, -1):
        prev = rows[i] if i < len(rows) else 0
        steps += [1] * (rows[i - 1] - prev) + [0]
    steps += [1] * n
    return [sum(steps[k : k + n]) for k in range(len(steps) - n + 1)]


def points_csv(points: np.ndarray) -> str:
    return "x,y\n" + "".join(f"{float(x)!r},{float(y)!r}\n" for x, y in points)
