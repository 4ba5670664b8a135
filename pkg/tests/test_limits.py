import math
import statistics
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtasep.limits import (
    Abacus,
    CorePartition,
    DirectionVector,
    LimitCurve,
    collinearity,
    curve_distance,
    grow_step,
    hook_lengths,
    is_n_core,
    points_csv,
    psi_closed,
    psi_from_correlations,
    random_growth,
    shape_distance,
    staircase,
    window_counts,
)

REPLAY = [0, 2, 3, 1, 2, 3, 0, 1]


def test_psi_small():
    assert psi_closed(3).components == (2, 0, -2)
    u = psi_closed(2).unit
    assert u == pytest.approx((1 / math.sqrt(2), -1 / math.sqrt(2)))
    assert collinearity(psi_from_correlations(3), psi_closed(3)) > 0
    with pytest.raises(ValueError):
        psi_closed(1)


@pytest.mark.parametrize("n", range(2, 11))
def test_psi_collinear(n):
    ratio = collinearity(psi_from_correlations(n), psi_closed(n))
    assert ratio is not None and ratio > 0
    norm2 = sum(c * c for c in psi_closed(n).components)
    assert norm2 == 2 * math.comb(n + 1, 3)


@pytest.mark.parametrize("n", range(2, 6))
def test_psi_from_enumeration(n):
    assert psi_from_correlations(n, "enumeration") == psi_from_correlations(n, "formula")


def test_collinearity_negative_cases():
    a = DirectionVector((Fraction(1), Fraction(0), Fraction(-1)))
    b = DirectionVector((Fraction(1), Fraction(-2), Fraction(1)))
    assert collinearity(a, b) is None
    assert collinearity(a, DirectionVector((Fraction(-2), Fraction(0), Fraction(2)))) == Fraction(-1, 2)
    with pytest.raises(ValueError):
        DirectionVector((Fraction(1), Fraction(1)))


def test_partition_basics():
    p = CorePartition((6, 3, 1, 1))
    assert p.size == 11 and p.conjugate() == (4, 2, 2, 1, 1, 1)
    assert hook_lengths(p)[0][0] == 9
    assert is_n_core(p, 4)
    # hooks of (2,2) are 3,2,2,1: a 4-core but not a 3-core
    assert is_n_core(CorePartition((2, 2)), 4)
    assert not is_n_core(CorePartition((2, 2)), 3)
    assert is_n_core(CorePartition(), 7)
    with pytest.raises(ValueError):
        CorePartition((1, 2))


def test_growth_examples():
    empty = CorePartition()
    assert grow_step(empty, 4, 1) == empty
    assert grow_step(empty, 4, 0) == CorePartition((1,))
    assert grow_step(CorePartition((1,)), 4, 2) == CorePartition((1,))
    core = empty
    for t in REPLAY:
        core = grow_step(core, 4, t)
    assert core == CorePartition((6, 3, 1, 1))
    ab = random_growth(4, len(REPLAY), seed=0, residues=REPLAY)
    assert ab.partition() == core and ab.boxes == 11


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(0, n - 1), max_size=40))))
def test_abacus_matches_literal_growth(case):
    n, residues = case
    core = CorePartition()
    ab = Abacus(n)
    for t in residues:
        core = grow_step(core, n, t)
        ab.step(t)
        assert ab.partition() == core
        assert is_n_core(core, n)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_every_step_is_a_core(n):
    res = np.random.Generator(np.random.PCG64(n)).integers(0, n, size=10_000)
    ab = Abacus(n)
    for t in res:
        ab.step(int(t))
        if ab.boxes < 3000:
            assert is_n_core(ab.partition(), n)
    core = ab.partition()
    assert is_n_core(core, n)
    counts = window_counts(core, n)
    assert counts[0] == 0 and counts[-1] == n
    assert all(a <= b for a, b in zip(counts, counts[1:]))


def test_growth_is_reproducible():
    a = random_growth(5, 5000, seed=3).partition()
    b = random_growth(5, 5000, seed=3).partition()
    assert a == b


def _brute_hooks(rows):
    cells = {(i, j) for i, r in enumerate(rows) for j in range(r)}
    return sorted(
        sum(1 for c in range(j + 1, rows[i])) + sum(1 for r in range(i + 1, len(rows)) if (r, j) in cells) + 1
        for i, j in cells
    )


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(1, 9), max_size=7), st.integers(2, 6))
def test_core_test_matches_brute_force(parts, n):
    rows = tuple(sorted(parts, reverse=True))
    p = CorePartition(rows)
    hooks = _brute_hooks(rows)
    assert sorted(h for row in hook_lengths(p) for h in row) == hooks
    assert is_n_core(p, n) == all(h % n for h in hooks)


def test_window_counts_detect_non_cores():
    counts = window_counts(CorePartition((2, 2)), 3)
    assert any(a > b for a, b in zip(counts, counts[1:]))


@pytest.mark.parametrize("n", range(2, 9))
def test_limit_curve_area(n):
    c = LimitCurve(n)
    v = c.vertices()
    assert v.shape == (n, 2)
    assert v[0][0] == 0 and v[-1][1] == 0
    assert c.area() == pytest.approx(1.0, abs=1e-12)


def test_curve_distance_basics():
    v = LimitCurve(4).vertices()
    assert curve_distance(v, v) == 0
    s = staircase(CorePartition((6, 3, 1, 1)))
    assert curve_distance(s, v) == curve_distance(v, s)
    # the unscaled single box against the unit square corner
    box = staircase(CorePartition((1,)), scale=False)
    assert box.tolist() == [[0, 1], [1, 1], [1, 0]]


def test_pinned_shape_distance():
    d = shape_distance(CorePartition((6, 3, 1, 1)), 4)
    assert d == pytest.approx(0.2885828303503101, rel=1e-12)


def test_distance_medians_shrink():
    medians = []
    for k in (100, 10_000):
        ds = [shape_distance(random_growth(4, k, seed).partition(), 4) for seed in range(20)]
        medians.append(statistics.median(ds))
    assert medians[0] > medians[1]


def test_points_csv():
    text = points_csv(np.array([[0.5, 1.0]]))
    assert text == "x,y\n0.5,1.0\n"
