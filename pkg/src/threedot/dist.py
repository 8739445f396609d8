"""Finite joint probability tables over tuples of words."""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Prob = Union[Fraction, float]
Outcome = tuple[str, ...]

EMPIRICAL_TOL = 1e-12


@dataclass(frozen=True)
class JointDist:
    """Probability table ``outcome -> probability``.

    An outcome is a tuple of words (one word per copy/window); the words are
    strings over a small alphabet such as ``"01"`` or ``"012"``.  Zero-mass
    outcomes are never stored.  Tables built from exact computations hold
    :class:`~fractions.Fraction` values, tables built from samples hold floats
    and remember their sample size in ``n``.
    """

    table: Mapping[Outcome, Prob]
    n: int | None = None
    _support: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        clean = {}
        for k, v in self.table.items():
            if not isinstance(k, tuple):
                k = (k,)
            if v:
                clean[k] = clean.get(k, 0) + v
        object.__setattr__(self, "table", clean)
        object.__setattr__(self, "_support", frozenset(clean))
        if clean:
            arities = {len(k) for k in clean}
            if len(arities) != 1:
                raise ValueError("mixed outcome arities in one table")

    @classmethod
    def from_counts(cls, counts: Mapping[Outcome, int] | Counter) -> "JointDist":
        total = sum(counts.values())
        return cls({k: c / total for k, c in counts.items()}, n=total)

    @classmethod
    def from_samples(cls, outcomes: Iterable[Outcome]) -> "JointDist":
        return cls.from_counts(Counter(outcomes))

    @property
    def exact(self) -> bool:
        return self.n is None

    @property
    def arity(self) -> int:
        return len(next(iter(self.table))) if self.table else 0

    @property
    def support(self) -> frozenset:
        return self._support

    def __getitem__(self, outcome: Outcome | str) -> Prob:
        if not isinstance(outcome, tuple):
            outcome = (outcome,)
        return self.table.get(outcome, Fraction(0) if self.exact else 0.0)

    def __len__(self) -> int:
        return len(self.table)

    def items(self):
        return sorted(self.table.items())

    def total(self) -> Prob:
        return sum(self.table.values(), Fraction(0) if self.exact else 0.0)

    def is_normalized(self) -> bool:
        t = self.total()
        return t == 1 if self.exact else abs(t - 1.0) <= EMPIRICAL_TOL

    def marginal(self, idx: int | Sequence[int]) -> "JointDist":
        """Law of the selected coordinates (in the given order)."""
        if isinstance(idx, int):
            idx = (idx,)
        out: dict[Outcome, Prob] = {}
        for k, v in self.table.items():
            key = tuple(k[i] for i in idx)
            out[key] = out.get(key, 0) + v
        return JointDist(out, n=self.n)

    def marginals(self) -> list["JointDist"]:
        return [self.marginal(i) for i in range(self.arity)]

    def flatten(self) -> "JointDist":
        """Concatenate all words of an outcome into a single word."""
        return JointDist({("".join(k),): v for k, v in self.table.items()}, n=self.n)

    def regroup(self, lengths: Sequence[int]) -> "JointDist":
        """Re-split each flattened outcome into words of the given lengths."""
        out = {}
        for k, v in self.table.items():
            w = "".join(k)
            parts, pos = [], 0
            for n in lengths:
                parts.append(w[pos:pos + n])
                pos += n
            out[tuple(parts)] = v
        return JointDist(out, n=self.n)

    def prefix(self, lengths: Sequence[int]) -> "JointDist":
        """Law of the first ``lengths[i]`` letters of each word."""
        out: dict[Outcome, Prob] = {}
        for k, v in self.table.items():
            key = tuple(w[:n] for w, n in zip(k, lengths))
            out[key] = out.get(key, 0) + v
        return JointDist(out, n=self.n)

    def is_uniform(self) -> bool:
        vals = list(self.table.values())
        if not vals:
            return False
        if self.exact:
            return all(v == vals[0] for v in vals)
        return max(vals) - min(vals) <= EMPIRICAL_TOL

    def is_product(self) -> bool:
        """Exact equality with the product of the single-copy marginals."""
        return tv_distance(self, product(self.marginals())) == 0


def product(dists: Sequence[JointDist]) -> JointDist:
    """Independent coupling; outcome tuples are concatenated."""
    table: dict[Outcome, Prob] = {(): Fraction(1)}
    for d in dists:
        nxt: dict[Outcome, Prob] = {}
        for (a, pa), (b, pb) in itertools.product(table.items(), d.table.items()):
            nxt[a + b] = pa * pb
        table = nxt
    exact = all(d.exact for d in dists)
    return JointDist(table, n=None if exact else min(d.n for d in dists))


def tv_distance(a: JointDist, b: JointDist) -> Prob:
    """Half the l1 distance between two tables on a common outcome space."""
    keys = a.support | b.support
    s = sum((abs(a[k] - b[k]) for k in keys), Fraction(0))
    return s / 2


def equal(a: JointDist, b: JointDist) -> bool:
    return tv_distance(a, b) == 0


def sigma_bound(p: float, n: int, z: float = 5.0) -> float:
    """Per-cell tolerance ``z * sqrt(p (1-p) / n)``."""
    return z * (p * (1.0 - p) / n) ** 0.5


def within_sigma(empirical: JointDist, reference: JointDist, n: int | None = None,
                 z: float = 5.0) -> bool:
    """Every cell of ``empirical`` lies within ``z`` sigma of ``reference``."""
    n = n or empirical.n
    if n is None:
        raise ValueError("sample size unknown")
    for k in empirical.support | reference.support:
        p = float(reference[k])
        if abs(float(empirical[k]) - p) > sigma_bound(p, n, z):
            return False
    return True
