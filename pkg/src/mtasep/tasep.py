"""The multispecies TASEP on a ring as a continuous-time Markov chain.

Dynamics: every adjacent pair (cyclically, including the pair formed by the
last and first site) whose left label is larger than its right label swaps
at rate 1.  This module builds the exact generator, solves for its
stationary law over the rationals, and simulates trajectories.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .mlq import BudgetExceeded, ExactDist, Sector, Word
from .patterns import PatternQuery

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

__all__ = [
    "Generator",
    "TrajectoryStats",
    "DEFAULT_STATE_BUDGET",
    "SingularGeneratorError",
    "build_generator",
    "solve_stationary",
    "simulate",
    "simulate_many",
]

DEFAULT_STATE_BUDGET = 100_000


class SingularGeneratorError(RuntimeError):
    """The generator does not have a one-dimensional null space."""


def _moves(word: Word, orientation: str) -> list[Word]:
    N = len(word)
    out = []
    for i in range(N):
        j = (i + 1) % N
        a, b = word[i], word[j]
        if (a > b) if orientation == "descent" else (a < b):
            w = list(word)
            w[i], w[j] = b, a
            out.append(tuple(w))
    return out


@dataclass
class Generator:
    """Sparse integer generator.

    ``successors[t]`` lists the states reachable from state ``t`` at rate 1,
    so the matrix entry ``M[s][t]`` is 1 when ``s`` is in ``successors[t]``
    and ``M[t][t] = -len(successors[t])``.  Columns sum to zero.
    """

    sector: Sector
    states: list[Word]
    index: dict[Word, int]
    successors: list[list[int]]
    orientation: str = "descent"

    def __len__(self) -> int:
        return len(self.states)

    def entry(self, s: int, t: int) -> int:
        if s == t:
            return -len(self.successors[t])
        return self.successors[t].count(s)

    def dense(self) -> list[list[int]]:
        S = len(self.states)
        M = [[0] * S for _ in range(S)]
        for t, succ in enumerate(self.successors):
            M[t][t] -= len(succ)
            for s in succ:
                M[s][t] += 1
        return M

    def predecessors(self) -> list[list[int]]:
        pred: list[list[int]] = [[] for _ in self.states]
        for t, succ in enumerate(self.successors):
            for s in succ:
                pred[s].append(t)
        return pred

    def is_stationary(self, pi: Sequence[Fraction]) -> bool:
        """Exact check that ``M pi = 0`` and ``sum(pi) = 1``."""
        if sum(pi) != 1:
            return False
        for s, pred in enumerate(self.predecessors()):
            if sum(pi[t] for t in pred) != len(self.successors[s]) * pi[s]:
                return False
        return True


def build_generator(sector: Sector, budget: int = DEFAULT_STATE_BUDGET, orientation: str = "descent") -> Generator:
    """Exact generator on the words of ``sector``.

    ``orientation="descent"`` swaps pairs with a larger left label (a particle
    overtakes a smaller neighbour to its left).  ``"ascent"`` is the mirror
    rule, kept so the two readings can be compared against queue counting.
    """
    if orientation not in ("descent", "ascent"):
        raise ValueError(f"unknown orientation {orientation!r}")
    size = sector.num_words()
    if size > budget:
        raise BudgetExceeded(f"sector {sector} has {size} states, budget is {budget}")
    states = list(sector.words())
    index = {w: i for i, w in enumerate(states)}
    successors = [[index[v] for v in _moves(w, orientation)] for w in states]
    return Generator(sector, states, index, successors, orientation)


def _nullspace_flint(gen: Generator) -> list[int]:
    import flint

    M = flint.fmpz_mat(gen.dense())
    basis, nullity = M.nullspace()
    if nullity != 1:
        raise SingularGeneratorError(f"null space has dimension {nullity}")
    return [int(basis[i, 0]) for i in range(len(gen))]


def _nullspace_fraction(gen: Generator) -> list[Fraction]:
    # Sparse Gaussian elimination over Q with pi[last] fixed to 1.
    S = len(gen)
    rows: list[dict[int, Fraction]] = [dict() for _ in range(S)]
    for t, succ in enumerate(gen.successors):
        rows[t][t] = rows[t].get(t, Fraction(0)) - len(succ)
        for s in succ:
            rows[s][t] = rows[s].get(t, Fraction(0)) + 1
    last = S - 1
    # equations for all but one row; unknown `last` moved to the right-hand side
    eqs = [r for r in rows[:-1]]
    rhs = [-r.pop(last, Fraction(0)) for r in eqs]
    pivots: dict[int, int] = {}
    alive = set(range(len(eqs)))
    for col in range(last):
        cand = [i for i in alive if eqs[i].get(col)]
        if not cand:
            raise SingularGeneratorError("null space has dimension > 1")
        p = min(cand, key=lambda i: len(eqs[i]))
        alive.discard(p)
        prow, pval = eqs[p], eqs[p][col]
        for i in cand:
            if i == p:
                continue
            f = eqs[i][col] / pval
            row = eqs[i]
            for c, v in prow.items():
                nv = row.get(c, Fraction(0)) - f * v
                if nv:
                    row[c] = nv
                else:
                    row.pop(c, None)
            rhs[i] -= f * rhs[p]
        pivots[col] = p
    x = [Fraction(0)] * S
    x[last] = Fraction(1)
    for col in range(last - 1, -1, -1):
        p = pivots[col]
        row = eqs[p]
        acc = rhs[p] - sum(v * x[c] for c, v in row.items() if c != col)
        x[col] = acc / row[col]
    return x


def solve_stationary(gen: Generator, backend: str = "auto") -> ExactDist:
    """Exact stationary law: the normalised null vector of the generator.

    ``backend`` is ``"flint"`` (integer null space), ``"fraction"`` (sparse
    elimination over :class:`~fractions.Fraction`) or ``"auto"``.  The result
    is checked exactly against the generator before it is returned.
    """
    if backend == "auto":
        try:
            import flint  # noqa: F401

            backend = "flint"
        except ImportError:  # pragma: no cover
            backend = "fraction"
    if len(gen) == 1:
        vec: list = [Fraction(1)]
    elif backend == "flint":
        vec = [Fraction(v) for v in _nullspace_flint(gen)]
    elif backend == "fraction":
        vec = _nullspace_fraction(gen)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    total = sum(vec)
    if total == 0:
        raise SingularGeneratorError("null vector sums to zero")
    pi = [v / total for v in vec]
    if any(p <= 0 for p in pi):
        raise SingularGeneratorError("stationary vector is not positive")
    if not gen.is_stationary(pi):
        raise ArithmeticError("solver returned a vector that is not stationary")
    denom = math.lcm(*(p.denominator for p in pi))
    counts = {w: int(p * denom) for w, p in zip(gen.states, pi)}
    return ExactDist(gen.sector, counts, denom)


# ---------------------------------------------------------------- simulation


@dataclass
class TrajectoryStats:
    sector: tuple[int, ...]
    seed: int
    horizon: float
    burn_in: float
    rotate: bool
    events: int
    batches: int
    patterns: list[str]
    estimates: list[float]
    standard_errors: list[float]
    batch_means: list[list[float]] = field(repr=False, default_factory=list)
    descent_estimate: float = float("nan")
    descent_se: float = float("nan")

    @property
    def total_time(self) -> float:
        return self.horizon - self.burn_in

    def combined(self, indices: Sequence[int]) -> tuple[float, float]:
        """Estimate and batch-means standard error of a sum of patterns."""
        sums = np.asarray(self.batch_means)[:, list(indices)].sum(axis=1)
        return float(sums.mean()), float(sums.std(ddof=1) / math.sqrt(len(sums)))

    def to_json(self) -> str:
        data = asdict(self)
        data.pop("batch_means")
        data["burnIn"] = data.pop("burn_in")
        data["patterns"] = [
            {"pattern": p, "estimate": e, "se": s}
            for p, e, s in zip(self.patterns, self.estimates, self.standard_errors)
        ]
        data.pop("estimates")
        data.pop("standard_errors")
        return json.dumps(data, indent=1)


@njit(cache=True)
def _pattern_hits(word, off, lab, length, shift):
    N = word.shape[0]
    for j in range(length):
        if word[(off[j] + shift) % N] != lab[j]:
            return 0
    return 1


@njit(cache=True)
def _refresh(word, q, enabled, where, n_enabled):
    N = word.shape[0]
    desc = word[q] > word[(q + 1) % N]
    if desc and where[q] < 0:
        enabled[n_enabled] = q
        where[q] = n_enabled
        n_enabled += 1
    elif not desc and where[q] >= 0:
        k = where[q]
        last = enabled[n_enabled - 1]
        enabled[k] = last
        where[last] = k
        where[q] = -1
        n_enabled -= 1
    return n_enabled


@njit(cache=True)
def _touched_shifts(off, length, p, N, rotate, shifts):
    # rotations of a pattern that read site p or p + 1
    ns = 0
    for j in range(length):
        for q in (p, (p + 1) % N):
            s = (q - off[j]) % N
            if not rotate and s != 0:
                continue
            dup = False
            for u in range(ns):
                if shifts[u] == s:
                    dup = True
            if not dup:
                shifts[ns] = s
                ns += 1
    return ns


@njit(cache=True)
def _kernel(word, rng, horizon, burn_in, n_batches, off, lab, lens, rotate, acc):
    N = word.shape[0]
    P = lens.shape[0]
    enabled = np.empty(N, np.int64)
    where = -np.ones(N, np.int64)
    n_enabled = 0
    for q in range(N):
        n_enabled = _refresh(word, q, enabled, where, n_enabled)
    cur = np.zeros(P, np.float64)
    for k in range(P):
        if rotate:
            for s in range(N):
                cur[k] += _pattern_hits(word, off[k], lab[k], lens[k], s)
        else:
            cur[k] = _pattern_hits(word, off[k], lab[k], lens[k], 0)
    batch_len = (horizon - burn_in) / n_batches
    shifts = np.empty(2 * off.shape[1], np.int64)
    t = 0.0
    events = 0
    while True:
        if n_enabled == 0:
            dt = horizon - t
        else:
            dt = rng.standard_exponential() / n_enabled
        t1 = min(t + dt, horizon)
        a = max(t, burn_in)
        while a < t1:
            b = min(int((a - burn_in) / batch_len), n_batches - 1)
            # rounding can put a on or past the end of batch b
            while b < n_batches - 1 and burn_in + (b + 1) * batch_len <= a:
                b += 1
            if b == n_batches - 1:
                end = t1
            else:
                end = min(t1, burn_in + (b + 1) * batch_len)
            for k in range(P):
                acc[b, k] += cur[k] * (end - a)
            acc[b, P] += n_enabled * (end - a)
            a = end
        if t + dt >= horizon:
            break
        t += dt
        i = min(int(rng.random() * n_enabled), n_enabled - 1)
        p = enabled[i]
        p1 = (p + 1) % N
        if word[p] <= word[p1]:
            raise RuntimeError("attempted a swap that is not a descent")
        for k in range(P):
            ns = _touched_shifts(off[k], lens[k], p, N, rotate, shifts)
            for u in range(ns):
                cur[k] -= _pattern_hits(word, off[k], lab[k], lens[k], shifts[u])
        tmp = word[p]
        word[p] = word[p1]
        word[p1] = tmp
        for k in range(P):
            ns = _touched_shifts(off[k], lens[k], p, N, rotate, shifts)
            for u in range(ns):
                cur[k] += _pattern_hits(word, off[k], lab[k], lens[k], shifts[u])
        n_enabled = _refresh(word, (p - 1) % N, enabled, where, n_enabled)
        n_enabled = _refresh(word, p, enabled, where, n_enabled)
        n_enabled = _refresh(word, p1, enabled, where, n_enabled)
        events += 1
    return events


def simulate(
    sector: Sector,
    horizon: float,
    burn_in: float,
    seed: int,
    patterns: Sequence[PatternQuery],
    batches: int = 100,
    rotate: bool = True,
) -> TrajectoryStats:
    """Time-averaged pattern probabilities along one trajectory.

    Waiting times are exponential with rate equal to the number of enabled
    swaps and the swap is chosen uniformly among them.  With ``rotate`` the
    indicator of each pattern is averaged over all rotations of the ring,
    which leaves its stationary mean unchanged.  Standard errors come from
    ``batches`` equal-time batch means after burn-in.  The fraction of
    cyclic descents, whose mean is ``P(w_1 > w_2)``, is always recorded as
    ``descent_estimate``.  Randomness is drawn
    from NumPy's PCG64 seeded with ``seed``.
    """
    if not patterns:
        raise ValueError("at least one pattern is required")
    if not horizon > burn_in >= 0:
        raise ValueError("need horizon > burn_in >= 0")
    if batches < 2:
        raise ValueError("need at least two batches")
    for q in patterns:
        q.validate(sector)
    rng = np.random.Generator(np.random.PCG64(seed))
    base = np.repeat(np.arange(1, sector.n + 1), sector.counts).astype(np.int64)
    word = rng.permutation(base)
    L = max(len(q.assignments) for q in patterns)
    P = len(patterns)
    off = np.zeros((P, L), np.int64)
    lab = np.zeros((P, L), np.int64)
    lens = np.zeros(P, np.int64)
    for k, q in enumerate(patterns):
        lens[k] = len(q.assignments)
        for j, (pos, x) in enumerate(q.assignments):
            off[k, j] = pos - 1
            lab[k, j] = x
    acc = np.zeros((batches, P + 1), np.float64)
    events = _kernel(word, rng, float(horizon), float(burn_in), batches, off, lab, lens, rotate, acc)
    batch_time = (horizon - burn_in) / batches
    means = acc[:, :P] / (batch_time * (sector.N if rotate else 1))
    est = means.mean(axis=0)
    se = means.std(axis=0, ddof=1) / math.sqrt(batches)
    # the number of enabled swaps is the number of cyclic descents
    desc = acc[:, P] / (batch_time * sector.N)
    return TrajectoryStats(
        sector=sector.counts,
        seed=seed,
        horizon=float(horizon),
        burn_in=float(burn_in),
        rotate=rotate,
        events=int(events),
        batches=batches,
        patterns=[str(q) for q in patterns],
        estimates=[float(x) for x in est],
        standard_errors=[float(x) for x in se],
        batch_means=means.tolist(),
        descent_estimate=float(desc.mean()),
        descent_se=float(desc.std(ddof=1) / math.sqrt(batches)),
    )


def _simulate_star(args):
    return simulate(*args)


def simulate_many(
    sector: Sector,
    horizon: float,
    burn_in: float,
    seeds: Sequence[int],
    patterns: Sequence[PatternQuery],
    batches: int = 100,
    rotate: bool = True,
    workers: int = 1,
) -> list[TrajectoryStats]:
    """Independent trajectories, one per seed, returned in seed order."""
    jobs = [(sector, horizon, burn_in, s, list(patterns), batches, rotate) for s in seeds]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_simulate_star, jobs))
    return [simulate(*job) for job in jobs]
