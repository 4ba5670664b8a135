"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion k: PASS|FAIL`` line with its counts.
"""

import statistics
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtasep.combinatorics import binom
from mtasep.correlations import computed_laws, e_adjacent, marginal, observed, stationary
from mtasep.limits import (
    Abacus,
    CorePartition,
    collinearity,
    is_n_core,
    psi_closed,
    psi_from_correlations,
    random_growth,
    shape_distance,
)
from mtasep.mlq import Sector
from mtasep.patterns import PatternQuery
from mtasep.tasep import simulate_many
from mtasep.verification import CONJECTURES, compositions, symmetry_instances, verify_conjecture, verify_formula

TABLE_N5 = [
    [0, 4, 2, 2, 2],
    [1, 0, 5, 2, 2],
    [2, 1, 0, 5, 2],
    [3, 2, 1, 0, 4],
    [4, 3, 2, 1, 0],
]


@pytest.fixture
def say(capsys):
    def emit(k, ok, detail=""):
        with capsys.disabled():
            print(f"\ncriterion {k}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())

    return emit


def _timed(f):
    t0 = time.perf_counter()
    out = f()
    return out, time.perf_counter() - t0


def _check_report(say, k, reports, limit):
    elapsed = sum(t for _, t in reports)
    tested = sum(len(r.instances) for r, _ in reports)
    bad = sum(len(r.mismatches) for r, _ in reports)
    skipped = sum(len(r.skipped) for r, _ in reports)
    ok = bad == 0 and skipped == 0 and elapsed < limit
    say(k, ok, f"{tested} instances, {bad} mismatched, {skipped} skipped, {elapsed:.1f}s")
    for r, _ in reports:
        assert r.verdict == "pass", r.to_table()
    assert elapsed < limit


def test_criterion_01_table(say):
    t0 = time.perf_counter()
    dist = stationary(Sector.distinct(5))
    scale = 5 * binom(5, 2)
    got = [
        [0 if a == b else marginal(dist, PatternQuery.prefix((a, b))) * scale for b in range(1, 6)]
        for a in range(1, 6)
    ]
    elapsed = time.perf_counter() - t0
    ok = got == TABLE_N5 and elapsed < 60
    say(1, ok, f"25 entries, {elapsed:.1f}s")
    assert got == TABLE_N5
    assert elapsed < 60


def test_criterion_02_adjacent(say):
    _check_report(say, 2, [_timed(lambda: verify_formula("two-point", range(3, 8)))], 600)


def test_criterion_03_distance(say):
    _check_report(say, 3, [_timed(lambda: verify_formula("distance", [4, 5, 6]))], 300)


def test_criterion_04_tableaux(say):
    _check_report(say, 4, [_timed(lambda: verify_formula("ssyt", [8]))], 120)


def test_criterion_05_three_point(say):
    _check_report(say, 5, [_timed(lambda: verify_formula("three-point", [5, 6]))], 300)


def test_criterion_06_decreasing(say):
    report = _timed(lambda: verify_formula("decreasing", range(4, 8), r_values=(2, 3, 4)))
    _check_report(say, 6, [report], 600)


def test_criterion_07_lumping(say):
    small = _timed(lambda: verify_formula("lumping", range(1, 5), max_N=7))
    distinct = _timed(lambda: verify_formula("lumping", [5], max_N=5))
    _check_report(say, 7, [small, distinct], 3600)


def _ensure_laws():
    for n in range(1, 5):
        for N in range(n, 8):
            for counts in compositions(N, n):
                stationary(Sector(counts))
    for n in range(1, 8):
        stationary(Sector.distinct(n))


def test_criterion_08_symmetries(say):
    _ensure_laws()
    laws = computed_laws()
    tested = bad = 0
    for dist in laws:
        for params, expected, obs, _ in symmetry_instances(dist):
            tested += 1
            if expected() != obs():
                bad += 1
    say(8, bad == 0, f"{len(laws)} laws, {tested} checks, {bad} failed")
    assert bad == 0


def test_criterion_09_conjectures(say):
    reports = [verify_conjecture(name, range(2, 8)) for name in sorted(CONJECTURES)]
    counts = ", ".join(f"{r.formula}={len(r.instances)}" for r in reports)
    bad = sum(len(r.mismatches) for r in reports)
    skipped = sum(len(r.skipped) for r in reports)
    say(9, bad == 0 and skipped == 0, f"counterexamples {bad}, skipped {skipped}; tested {counts}")
    for r in reports:
        assert r.verdict == "pass", r.to_table()


@pytest.mark.long
@pytest.mark.parametrize("name", sorted(CONJECTURES))
def test_criterion_09_conjectures_n8(name, say):
    r = verify_conjecture(name, 8)
    say("9 (n=8)", r.verdict == "pass", f"{name}: {len(r.instances)} tested, {len(r.mismatches)} counterexamples")
    assert r.verdict == "pass"


def test_criterion_10_psi(say):
    fails = []
    for n in range(2, 11):
        for source in ("formula", "enumeration") if n <= 7 else ("formula",):
            ratio = collinearity(psi_from_correlations(n, source), psi_closed(n))
            if ratio is None or ratio <= 0:
                fails.append((n, source))
    n3 = collinearity(psi_from_correlations(3), psi_closed(3)) is not None and psi_closed(3).components == (2, 0, -2)
    say(10, not fails and n3, f"n=2..10 collinear, n=3 direction (2,0,-2): {n3}")
    assert not fails and n3


# Literal growth on a row array, independent of the abacus: every addable
# cell whose content is t mod n gains a box.
def _grow_rows(lam: np.ndarray, n: int, t: int) -> np.ndarray:
    idx = np.arange(lam.size)
    addable = np.ones(lam.size, dtype=bool)
    addable[1:] = lam[:-1] > lam[1:]
    lam = lam + (addable & ((lam - idx) % n == t))
    return np.append(lam, 0) if lam[-1] else lam


def _beads_closed(lam: np.ndarray, n: int) -> bool:
    # n-core iff every bead x = lambda_i - i has a bead at x - n
    rows = lam[lam > 0]
    L = rows.size
    beads = rows - np.arange(1, L + 1)
    need = beads - n
    need = need[need >= -L]
    asc = beads[::-1]
    pos = np.searchsorted(asc, need)
    pos = np.minimum(pos, max(L - 1, 0))
    return bool(L == 0 or np.all(asc[pos] == need))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 10), max_size=8), st.integers(2, 6))
def test_bead_test_agrees_with_hooks(parts, n):
    rows = sorted(parts, reverse=True)
    assert _beads_closed(np.array(rows + [0], dtype=np.int64), n) == is_n_core(CorePartition(tuple(rows)), n)


def test_criterion_11_growth(say):
    t0 = time.perf_counter()
    ab = Abacus(4)
    ab.run([0, 2, 3, 1, 2, 3, 0, 1])
    replay = ab.partition() == CorePartition((6, 3, 1, 1))

    every_step = True
    for n in (2, 3, 4, 5):
        residues = np.random.Generator(np.random.PCG64(100 + n)).integers(0, n, size=10_000)
        lam = np.zeros(1, dtype=np.int64)
        for t in residues:
            lam = _grow_rows(lam, n, int(t))
            every_step &= _beads_closed(lam, n)
        final = random_growth(n, 10_000, 100 + n).partition()
        every_step &= final.rows == tuple(int(x) for x in lam[lam > 0])

    medians = []
    for K in (10**2, 10**4, 10**6):
        medians.append(statistics.median(shape_distance(random_growth(4, K, s).partition(), 4) for s in range(20)))
    trend = medians[0] > medians[1] > medians[2]
    elapsed = time.perf_counter() - t0
    ok = replay and every_step and trend and elapsed < 300
    say(11, ok, f"replay {replay}, cores at every step {every_step}, medians {[round(m, 4) for m in medians]}, {elapsed:.1f}s")
    assert replay and every_step and trend
    assert elapsed < 300


@pytest.mark.slow
def test_criterion_12_monte_carlo(say):
    seeds = range(20)
    target = float(Fraction(1, 3) + Fraction(1, 30))
    runs10 = simulate_many(Sector.distinct(10), 3.0e5, 1000.0, seeds, [PatternQuery.prefix((2, 1))])
    hits10 = sum(abs(r.descent_estimate - target) <= 3 * r.descent_se for r in runs10)
    min_events = min(r.events for r in runs10)

    pairs = [(a, b) for a in range(1, 7) for b in range(1, 7) if a != b]
    exact = [observed(6, PatternQuery.prefix(p)) for p in pairs]
    assert all(e == e_adjacent(6, *p) for e, p in zip(exact, pairs))
    runs6 = simulate_many(Sector.distinct(6), 5.0e5, 1000.0, seeds, [PatternQuery.prefix(p) for p in pairs])
    hits6 = sum(
        all(abs(est - float(e)) <= 3 * se for est, se, e in zip(r.estimates, r.standard_errors, exact)) for r in runs6
    )
    ok = hits10 >= 18 and hits6 >= 18 and min_events >= 10**6
    say(12, ok, f"n=10 {hits10}/20 seeds (min {min_events} events), n=6 all 30 pairs {hits6}/20 seeds")
    assert min_events >= 10**6
    assert hits10 >= 18 and hits6 >= 18
