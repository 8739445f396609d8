"""Finite checks of the pairwise-independence lemma and the periodic/entropy
dichotomy for processes with a 3-dot type self-joining."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import reduce
from typing import Callable, Iterator, Sequence

import numpy as np

from threedot.dist import JointDist, Prob, product, tv_distance
from threedot.gf2 import BitExpr, SeedTag, are_independent, joint_distribution, xor

FLOAT_TOL = 1e-9

FiniteTriple = JointDist  # arity-3 table over letters (single symbols or words)


class NonUniform(ValueError):
    """A window law gives different probabilities to two admissible words."""


def _close(a: Prob, b: Prob, exact: bool) -> bool:
    return a == b if exact else abs(float(a) - float(b)) <= FLOAT_TOL


def _dist_equal(a: JointDist, b: JointDist, exact: bool) -> bool:
    keys = a.support | b.support
    return all(_close(a[k], b[k], exact) for k in keys)


@dataclass
class LemmaVerdict:
    same_marginal: bool
    pairwise_independent: bool
    functional: bool
    uniform: bool

    @property
    def hypotheses_met(self) -> bool:
        return self.same_marginal and self.pairwise_independent and self.functional

    @property
    def consistent(self) -> bool:
        """Hypotheses imply the conclusion on this instance."""
        return not self.hypotheses_met or self.uniform

    @property
    def status(self) -> str:
        if not self.hypotheses_met:
            return "hypotheses unmet"
        return "uniform" if self.uniform else "COUNTEREXAMPLE"

    def to_json(self) -> str:
        d = asdict(self)
        d.update(hypotheses_met=self.hypotheses_met, consistent=self.consistent,
                 status=self.status)
        return json.dumps(d, sort_keys=True)


def check_lemma_instance(t: FiniteTriple) -> LemmaVerdict:
    exact = t.exact
    mx, my, mz = t.marginals()
    same = _dist_equal(mx, my, exact) and _dist_equal(mx, mz, exact)
    pairwise = all(
        _dist_equal(t.marginal(pair), product([t.marginal(pair[0]), t.marginal(pair[1])]), exact)
        for pair in ((0, 1), (0, 2), (1, 2))
    )
    # Z a.s. a function of (X, Y): every (x, y) in the support sees one z
    seen: dict[tuple[str, str], str] = {}
    functional = True
    for (x, y, z), v in t.table.items():
        if not exact and abs(v) <= FLOAT_TOL:
            continue
        if seen.setdefault((x, y), z) != z:
            functional = False
            break
    vals = [v for v in mx.table.values() if exact or v > FLOAT_TOL]
    uniform = bool(vals) and all(_close(v, vals[0], exact) for v in vals)
    return LemmaVerdict(same, pairwise, functional, uniform)


def triple_from_function(f: Callable[[int, int], int], mu: Sequence[Prob]) -> FiniteTriple:
    """``X, Y`` i.i.d. with law ``mu`` and ``Z = f(X, Y)``."""
    table: dict[tuple[str, str, str], Prob] = {}
    for x, y in itertools.product(range(len(mu)), repeat=2):
        p = mu[x] * mu[y]
        if p:
            key = (str(x), str(y), str(f(x, y)))
            table[key] = table.get(key, 0) + p
    exact = all(isinstance(m, (int, Fraction)) for m in mu)
    return JointDist(table, n=None if exact else 1)


def xor_triple() -> FiniteTriple:
    return triple_from_function(lambda x, y: x ^ y, [Fraction(1, 2)] * 2)


def mod3_triple() -> FiniteTriple:
    return triple_from_function(lambda x, y: (2 * y - x) % 3, [Fraction(1, 3)] * 3)


def independent_triple(mu: Sequence[Prob]) -> FiniteTriple:
    """``X, Y, Z`` i.i.d. with law ``mu``."""
    table = {}
    for x, y, z in itertools.product(range(len(mu)), repeat=3):
        p = mu[x] * mu[y] * mu[z]
        if p:
            table[(str(x), str(y), str(z))] = p
    exact = all(isinstance(m, (int, Fraction)) for m in mu)
    return JointDist(table, n=None if exact else 1)


# exhaustive counterexample search

def all_functions(a: int) -> Iterator[tuple[int, ...]]:
    """Tables ``f[x * a + y]`` of every map ``A x A -> A``."""
    return itertools.product(range(a), repeat=a * a)


def latin_squares(a: int) -> list[tuple[int, ...]]:
    out = []
    for f in all_functions(a):
        rows_ok = all(len(set(f[x * a:(x + 1) * a])) == a for x in range(a))
        cols_ok = all(len({f[x * a + y] for x in range(a)}) == a for y in range(a))
        if rows_ok and cols_ok:
            out.append(f)
    return out


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction], nvar: int
                 ) -> tuple[list[Fraction], list[list[Fraction]]] | None:
    """Rational Gauss-Jordan: particular solution and nullspace basis, or None."""
    m = [r[:] + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(nvar):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                fac = m[i][c]
                m[i] = [a - fac * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    if any(all(v == 0 for v in row[:nvar]) and row[nvar] != 0 for row in m):
        return None
    sol = [Fraction(0)] * nvar
    for i, c in enumerate(pivots):
        sol[c] = m[i][nvar]
    free = [c for c in range(nvar) if c not in pivots]
    null = []
    for fc in free:
        v = [Fraction(0)] * nvar
        v[fc] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -m[i][fc]
        null.append(v)
    return sol, null


def _support_system(f: Sequence[int], a: int, support: Sequence[int]):
    """Linear conditions on ``mu`` (restricted to ``support``) for the triple
    ``(X, Y, f(X, Y))`` to meet the lemma's hypotheses."""
    idx = {s: i for i, s in enumerate(support)}
    n = len(support)
    rows: list[list[Fraction]] = [[Fraction(1)] * n]
    rhs: list[Fraction] = [Fraction(1)]
    for side in (0, 1):
        for fixed in support:
            for z in range(a):
                row = [Fraction(0)] * n
                for other in support:
                    x, y = (fixed, other) if side == 0 else (other, fixed)
                    if f[x * a + y] == z:
                        row[idx[other]] += 1
                if z in idx:
                    row[idx[z]] -= 1
                rows.append(row)
                rhs.append(Fraction(0))
    return rows, rhs


def _positive_point(sol, null) -> list[float] | None:
    """A strictly positive point of ``sol + span(null)``, if any (LP)."""
    from scipy.optimize import linprog

    n, d = len(sol), len(null)
    # variables: coefficients c (d) and slack t; maximize t s.t. sol + N c >= t
    cost = [0.0] * d + [-1.0]
    a_ub = [[-float(null[j][i]) for j in range(d)] + [1.0] for i in range(n)]
    b_ub = [float(sol[i]) for i in range(n)]
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * d + [(None, 1.0)])
    if res.status != 0 or -res.fun <= FLOAT_TOL:
        return None
    c = res.x[:d]
    return [float(sol[i]) + sum(c[j] * float(null[j][i]) for j in range(d)) for i in range(n)]


def _exact_counterexample(f: Sequence[int], a: int, support: Sequence[int]):
    rows, rhs = _support_system(f, a, support)
    solved = _solve_exact(rows, rhs, len(support))
    if solved is None:
        return None
    sol, null = solved
    if not null:
        if all(v > 0 for v in sol) and len(set(sol)) > 1:
            return sol
        return None
    point = _positive_point(sol, null)
    if point is None:
        return None
    # a positive point plus a nullspace direction gives non-uniform positive points
    step = min(point) / (2 * max(1.0, max(abs(float(v)) for v in null[0])))
    moved = [p + step * float(v) for p, v in zip(point, null[0])]
    return moved if max(moved) - min(moved) > FLOAT_TOL else point


def rational_grid(a: int, max_den: int) -> np.ndarray:
    """Distinct probability vectors with denominators up to ``max_den``,
    scaled to integers with common denominator ``lcm(1..max_den)``."""
    lcm = reduce(math.lcm, range(1, max_den + 1), 1)
    pts = set()
    for den in range(1, max_den + 1):
        for comp in itertools.product(range(den + 1), repeat=a - 1):
            last = den - sum(comp)
            if last >= 0:
                pts.add(tuple(c * (lcm // den) for c in comp + (last,)))
    return np.array(sorted(pts), dtype=np.int64), lcm


def _grid_hits(funcs: np.ndarray, grid: np.ndarray, a: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows of ``funcs`` x ``grid`` where the lemma's hypotheses hold."""
    nf = len(funcs)
    onehot = np.zeros((nf, a, a, a), dtype=np.int64)  # [f, x, y, z]
    fi, xi, yi = np.meshgrid(np.arange(nf), np.arange(a), np.arange(a), indexing="ij")
    onehot[fi, xi, yi, funcs.reshape(nf, a, a)] = 1
    ok = np.ones((nf, len(grid)), dtype=bool)
    pos = grid > 0
    for x in range(a):
        # sum_y mu_y [f(x,y)=z] == mu_z wherever mu_x > 0
        t = np.einsum("gy,fyz->fgz", grid, onehot[:, x])
        ok &= (t == grid[None]).all(axis=2) | ~pos[None, :, x]
        t = np.einsum("gx,fxz->fgz", grid, onehot[:, :, x])
        ok &= (t == grid[None]).all(axis=2) | ~pos[None, :, x]
    return np.nonzero(ok)


def _uniform_on_support(v: np.ndarray) -> bool:
    nz = v[v > 0]
    return bool(len(nz)) and bool((nz == nz[0]).all())


@dataclass
class SearchReport:
    alphabet: int
    functions: int
    grid_points: int
    grid_hits: int
    exact_systems: int
    counterexample: FiniteTriple | None


def search_lemma_counterexample(a: int, grid: int = 12, chunk: int = 2048) -> FiniteTriple | None:
    return lemma_search(a, grid, chunk).counterexample


def lemma_search(a: int, grid: int = 12, chunk: int = 2048) -> SearchReport:
    """Look for a triple meeting the hypotheses with a non-uniform law.

    Every map ``f: A x A -> A`` is tried against (i) every marginal on a
    rational grid and (ii) the exact solution set of the linear conditions on
    the marginal, for every support set.
    """
    if not 1 <= a <= 4:
        raise ValueError("alphabet size must be 1..4")
    pts, lcm = rational_grid(a, grid)
    funcs = np.array(list(all_functions(a)), dtype=np.int64)
    hits = 0
    found: FiniteTriple | None = None
    for lo in range(0, len(funcs), chunk):
        fi, gi = _grid_hits(funcs[lo:lo + chunk], pts, a)
        hits += len(fi)
        for f_idx, g_idx in zip(fi, gi):
            mu = pts[g_idx]
            if not _uniform_on_support(mu) and found is None:
                f = tuple(funcs[lo + f_idx])
                found = triple_from_function(lambda x, y, f=f: f[x * a + y],
                                             [Fraction(int(m), lcm) for m in mu])
    systems: dict[tuple, object] = {}
    for f in map(tuple, funcs):
        for size in range(1, a + 1):
            for support in itertools.combinations(range(a), size):
                key = (support, tuple(f[x * a + y] for x in support for y in support))
                if key in systems:
                    continue
                systems[key] = None
                sol = _exact_counterexample(f, a, support)
                if sol is not None and found is None:
                    mu = [0.0] * a
                    for s, v in zip(support, sol):
                        mu[s] = v
                    found = triple_from_function(lambda x, y, f=f: f[x * a + y], mu)
    return SearchReport(a, len(funcs), len(pts), hits, len(systems), found)


# GF(2)-built instances

def gf2_word_triples(m: int) -> Iterator[FiniteTriple]:
    """Triples of ``m``-bit words: ``X = L(a) ^ c``, ``Y = L(b) ^ c``, ``Z = X ^ Y``.

    ``L`` ranges over every linear map from ``m`` seed bits to ``m`` bits and
    ``c`` over every constant word; ``a`` and ``b`` are disjoint seed sets.
    """
    choices = list(itertools.product(range(1 << m), (0, 1)))
    for rows in itertools.product(choices, repeat=m):
        xs, ys = [], []
        for subset, const in rows:
            ex = BitExpr.constant(const)
            ey = BitExpr.constant(const)
            for s in range(m):
                if subset >> s & 1:
                    ex = ex ^ BitExpr.seed(SeedTag.X, s)
                    ey = ey ^ BitExpr.seed(SeedTag.X, m + s)
            xs.append(ex)
            ys.append(ey)
        zs = [xor(x, y) for x, y in zip(xs, ys)]
        yield joint_distribution(xs + ys + zs, (m, m, m))


def rank_pairwise_independent(groups: Sequence[Sequence[BitExpr]]) -> bool:
    return all(are_independent(groups[i], groups[j])
               for i, j in itertools.combinations(range(len(groups)), 2))


# word census and the dichotomy

@dataclass
class CensusRow:
    m: int
    p_m: int
    a_m: Fraction | None
    uniform: bool
    entropy_lb_bits: float


@dataclass
class WordCensus:
    rows: list[CensusRow]
    laws: dict[int, JointDist]

    @property
    def p(self) -> dict[int, int]:
        return {r.m: r.p_m for r in self.rows}

    @property
    def a(self) -> dict[int, Fraction]:
        return {r.m: r.a_m for r in self.rows if r.a_m is not None}

    @property
    def horizon(self) -> int:
        return max(self.a)


def word_census(source, m_max: int, anchor=None, strict: bool = True) -> WordCensus:
    """Admissible words of the windows ``line(anchor, m)``, ``m <= m_max + 1``.

    Raises :class:`NonUniform` when a window law is not uniform on its
    support (with ``strict``); otherwise the row is flagged.
    """
    if anchor is None:
        anchor = source.origin()
    laws = {}
    counts = {}
    flags = {}
    for m in range(1, m_max + 2):
        law = source.law([source.line(anchor, m)])
        laws[m] = law
        counts[m] = len(law)
        flags[m] = law.is_uniform()
        if strict and not flags[m]:
            raise NonUniform(f"length-{m} window law is not uniform on its support")
    rows = []
    for m in range(1, m_max + 1):
        rows.append(CensusRow(m, counts[m], Fraction(counts[m + 1], counts[m]), flags[m],
                              math.log2(counts[m]) / m))
    return WordCensus(rows, laws)


@dataclass
class Dichotomy:
    verdict: str  # "periodic", "entropy>=log2" or "undecided"
    m0: int | None
    entropy_bits: float
    monotone: bool
    note: str = ""


def classify_dichotomy(c: WordCensus) -> Dichotomy:
    ms = sorted(c.a)
    a = [c.a[m] for m in ms]
    monotone = all(a[i + 1] <= a[i] for i in range(len(a) - 1))
    horizon = ms[-1]
    p_last = c.p[horizon]
    if not monotone:
        return Dichotomy("undecided", None, math.log2(p_last) / horizon, False,
                         "a_m not nonincreasing: the source is not stationary")
    if a[-1] == 1:
        m0 = horizon
        while m0 - 1 in c.a and c.a[m0 - 1] == 1:
            m0 -= 1
        return Dichotomy("periodic", m0, 0.0, True, f"a_m = 1 for {m0} <= m <= {horizon}")
    if all(v >= 2 for v in a):
        return Dichotomy("entropy>=log2", None, math.log2(p_last) / horizon, True,
                         f"a_m >= 2 for m <= {horizon}")
    return Dichotomy("undecided", None, math.log2(p_last) / horizon, True,
                     "1 < a_m < 2 within the horizon")
