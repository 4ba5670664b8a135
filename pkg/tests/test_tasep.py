import json
from fractions import Fraction

import pytest

from mtasep.mlq import BudgetExceeded, Sector, stationary_from_queues
from mtasep.patterns import PatternQuery
from mtasep.tasep import build_generator, simulate, simulate_many, solve_stationary


def test_two_site_generator():
    g = build_generator(Sector((1, 1)))
    assert len(g) == 2
    assert g.dense() == [[-1, 1], [1, -1]]


def test_three_site_generator():
    g = build_generator(Sector.distinct(3))
    assert len(g) == 6
    # every state of the permutation sector on three sites has exactly two
    # cyclic descents, including 321 (pairs 3>2 and 2>1; the wrap pair 1,3 is an ascent)
    assert len(g.successors[g.index[(3, 2, 1)]]) == 2
    assert sorted(g.states[t] for t in g.successors[g.index[(3, 2, 1)]]) == [(2, 3, 1), (3, 1, 2)]


@pytest.mark.parametrize("counts", [(1, 1, 1), (2, 1, 1), (1, 2, 1, 1)])
def test_columns_sum_to_zero(counts):
    M = build_generator(Sector(counts)).dense()
    assert all(sum(col) == 0 for col in zip(*M))
    assert all(M[s][t] in (0, 1) for s in range(len(M)) for t in range(len(M)) if s != t)


def test_solve_examples():
    assert solve_stationary(build_generator(Sector((1, 1)))).probabilities == {
        (1, 2): Fraction(1, 2),
        (2, 1): Fraction(1, 2),
    }
    assert solve_stationary(build_generator(Sector.distinct(3))).prob((3, 2, 1)) == Fraction(1, 9)


@pytest.mark.parametrize("counts", [(1, 1, 1, 1), (2, 1, 1), (1, 2, 2, 1), (1, 1, 1, 1, 1)])
def test_lumping(counts):
    s = Sector(counts)
    solved = solve_stationary(build_generator(s))
    assert solved == stationary_from_queues(s, method="enumerate", workers=1)


def test_backends_agree():
    g = build_generator(Sector((2, 1, 2)))
    assert solve_stationary(g, backend="flint") == solve_stationary(g, backend="fraction")


def test_ascent_reading_disagrees_with_queues():
    s = Sector.distinct(4)
    ascent = solve_stationary(build_generator(s, orientation="ascent"))
    assert ascent != stationary_from_queues(s)


def test_state_budget():
    with pytest.raises(BudgetExceeded):
        build_generator(Sector.distinct(7), budget=1000)


def test_simulation_rejects_bad_input():
    s = Sector((1, 1))
    with pytest.raises(ValueError):
        simulate(s, 10.0, 0.0, 0, [])
    with pytest.raises(ValueError):
        simulate(s, 10.0, 20.0, 0, [PatternQuery.prefix((1, 2))])
    with pytest.raises(ValueError):
        simulate(s, 10.0, 0.0, 0, [PatternQuery.prefix((3, 1))])


def test_simulation_is_reproducible():
    s = Sector.distinct(5)
    pats = [PatternQuery.prefix((2, 1)), PatternQuery.prefix((1, 2))]
    a = simulate(s, 2000.0, 100.0, 7, pats)
    b = simulate(s, 2000.0, 100.0, 7, pats)
    assert a.to_json() == b.to_json() and a.batch_means == b.batch_means
    c = simulate(s, 2000.0, 100.0, 8, pats)
    assert c.estimates != a.estimates


def test_two_sites():
    st = simulate(Sector((1, 1)), 20000.0, 10.0, 3, [PatternQuery.prefix((1, 2))], rotate=False)
    assert abs(st.estimates[0] - 0.5) <= 3 * st.standard_errors[0]
    assert 0 <= st.estimates[0] <= 1 and st.total_time > 0


def test_small_sector_against_exact():
    s = Sector((2, 1, 1))
    exact = stationary_from_queues(s)
    pats = [PatternQuery.prefix(w) for w in exact.counts]
    st = simulate(s, 50000.0, 50.0, 11, pats, rotate=False)
    z = [abs(e - float(exact.prob(w))) / se for e, se, w in zip(st.estimates, st.standard_errors, exact.counts)]
    assert max(z) < 4.5


def test_json_fields():
    st = simulate(Sector.distinct(3), 500.0, 10.0, 1, [PatternQuery.prefix((3, 2))])
    data = json.loads(st.to_json())
    assert {"sector", "seed", "horizon", "burnIn"} <= set(data)
    assert data["patterns"][0]["pattern"] == "w1=3 w2=2"
    assert {"estimate", "se"} <= set(data["patterns"][0])


def test_many_seeds_in_order():
    runs = simulate_many(Sector.distinct(4), 500.0, 10.0, [3, 4], [PatternQuery.prefix((2, 1))])
    assert [r.seed for r in runs] == [3, 4]
    assert runs[0].to_json() == simulate(Sector.distinct(4), 500.0, 10.0, 3, [PatternQuery.prefix((2, 1))]).to_json()
