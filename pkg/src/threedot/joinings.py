"""Shifted-diagonal self-joinings and distances to product measures."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from threedot import block, field, odometer
from threedot.dist import JointDist, Prob, product, tv_distance
from threedot.gf2 import DEFAULT_LENGTH_BOUND, BitExpr, LengthBound, SeedTag, joint_distribution

Coord = object  # int for processes, (i, j) for the field


class Source:
    """A process handle: exact window laws and/or a sampler.

    ``window(anchor, length)`` lists the coordinates of a window, ``law``
    returns the exact joint law of several coordinate groups and ``sample``
    an empirical one.  Callers never look past this interface.
    """

    name = "source"
    exact = True
    alphabet = "01"

    def window(self, anchor, length: int) -> list:
        return [anchor + t for t in range(length)]

    def line(self, anchor, length: int) -> list:
        """``length`` consecutive coordinates in the main direction."""
        return self.window(anchor, length)

    def shift(self, anchor, offset):
        return anchor + offset

    def origin(self):
        return 0

    def law(self, groups: Sequence[Sequence], bound: int = DEFAULT_LENGTH_BOUND) -> JointDist:
        raise NotImplementedError

    def sample(self, groups: Sequence[Sequence], n: int, rng_seed: int) -> JointDist:
        raise NotImplementedError


class GF2Source(Source):
    def exprs(self, coords: Sequence) -> list[BitExpr]:
        raise NotImplementedError

    def law(self, groups, bound=DEFAULT_LENGTH_BOUND):
        flat = [c for g in groups for c in g]
        if len(flat) > bound:
            raise LengthBound(f"{len(flat)} coordinates exceed bound {bound}")
        return joint_distribution(self.exprs(flat), [len(g) for g in groups], bound=bound)


class BlockSource(GF2Source):
    name = "block"

    def __init__(self, grid: block.BlockGrid | None = None) -> None:
        self.grid = grid or block._default_grid

    def exprs(self, coords):
        return self.grid.exprs(coords)


class FieldSource(GF2Source):
    """The 2-D field; windows are squares, lines run horizontally."""

    name = "field"

    def __init__(self, grid: field.FieldGrid | None = None) -> None:
        self.grid = grid or field._default_grid

    def window(self, anchor, length):
        return field.Window2D.square(anchor, length).cells()

    def line(self, anchor, length):
        i, j = anchor
        return [(i + t, j) for t in range(length)]

    def shift(self, anchor, offset):
        return (anchor[0] + offset[0], anchor[1] + offset[1])

    def origin(self):
        return (0, 0)

    def exprs(self, coords):
        return self.grid.exprs(coords)


class IIDSource(GF2Source):
    """Independent fair bits."""

    name = "iid"

    def exprs(self, coords):
        return [BitExpr.seed(SeedTag.X, c) for c in coords]


class ConditionedSource(GF2Source):
    """Stationary process with its skeleton fixed (a shifted block process)."""

    name = "conditioned"

    def __init__(self, skeleton: odometer.SkeletonState) -> None:
        self.skeleton = skeleton

    def exprs(self, coords):
        return odometer.conditioned_exprs(self.skeleton, coords)


class Rot3Source(Source):
    """Periodic process on {0,1,2}: uniform start, then ``+1 mod 3``."""

    name = "rot3"
    alphabet = "012"

    def law(self, groups, bound=DEFAULT_LENGTH_BOUND):
        table: dict[tuple[str, ...], Fraction] = {}
        for x0 in range(3):
            key = tuple("".join(str((x0 + c) % 3) for c in g) for g in groups)
            table[key] = table.get(key, 0) + Fraction(1, 3)
        return JointDist(table)


class StationarySource(Source):
    """Unconditioned stationary process; sampled, with a small exact oracle."""

    name = "stationary"
    exact = False

    def law(self, groups, bound=DEFAULT_LENGTH_BOUND):
        # single contiguous window only: exact mixture over skeleton prefixes
        flat = [c for g in groups for c in g]
        lo = min(flat)
        if flat != list(range(lo, lo + len(flat))):
            raise NotImplementedError("exact law available for one contiguous window")
        if len(flat) > 6:
            raise LengthBound("exact stationary laws are limited to 6 coordinates")
        return odometer.exact_window_law(lo, len(flat)).regroup([len(g) for g in groups])

    def sample(self, groups, n, rng_seed):
        flat = [c for g in groups for c in g]
        lo, hi = min(flat), max(flat)
        w = odometer.sample_windows(lo, hi - lo + 1, n, rng_seed)
        cols = [c - lo for c in flat]
        return _empirical(w[:, cols], [len(g) for g in groups])


def _empirical(samples: np.ndarray, lengths: Sequence[int]) -> JointDist:
    n, k = samples.shape
    codes = samples.astype(np.int64) @ (1 << np.arange(k - 1, -1, -1))
    counts = np.bincount(codes, minlength=1 << k)
    table = {}
    for c in np.nonzero(counts)[0]:
        word = format(int(c), f"0{k}b")
        parts, pos = [], 0
        for m in lengths:
            parts.append(word[pos:pos + m])
            pos += m
        table[tuple(parts)] = counts[c] / n
    return JointDist(table, n=n)


SOURCES = {
    "block": BlockSource,
    "field": FieldSource,
    "iid": IIDSource,
    "rot3": Rot3Source,
    "stationary": StationarySource,
}


def make_source(name: str, **kw) -> Source:
    try:
        return SOURCES[name](**kw)
    except KeyError:
        raise ValueError(f"unknown source {name!r}") from None


def _law(source: Source, groups, n: int | None, rng_seed: int) -> JointDist:
    if source.exact:
        return source.law(groups)
    if n is None:
        return source.law(groups)
    return source.sample(groups, n, rng_seed)


def delta_p(source: Source, p, length: int, n: int | None = None, rng_seed: int = 0) -> JointDist:
    """Law of ``(xi_0^{l-1}, xi_p^{p+l-1})`` as a 2-fold joining table."""
    a = source.origin()
    groups = [source.window(a, length), source.window(source.shift(a, p), length)]
    return _law(source, groups, n, rng_seed)


def delta_pq(source: Source, p, q, length: int, n: int | None = None,
             rng_seed: int = 0) -> JointDist:
    """Law of the windows at ``0``, ``p`` and ``p + q``."""
    a = source.origin()
    b = source.shift(a, p)
    c = source.shift(b, q)
    groups = [source.window(a, length), source.window(b, length), source.window(c, length)]
    return _law(source, groups, n, rng_seed)


def delta_at(source: Source, offsets: Sequence, length: int, n: int | None = None,
             rng_seed: int = 0) -> JointDist:
    """Joining of windows anchored at the given absolute offsets from the origin.

    ``delta_pq(s, p, q, l)`` equals ``delta_at(s, [0, p, p + q], l)``.
    """
    a = source.origin()
    groups = [source.window(source.shift(a, off), length) for off in offsets]
    return _law(source, groups, n, rng_seed)


def product_of_marginals(j: JointDist) -> JointDist:
    return product(j.marginals())


def pairwise_tv_max(j: JointDist) -> Prob:
    out: Prob = Fraction(0)
    for a, b in itertools.combinations(range(j.arity), 2):
        m = j.marginal((a, b))
        out = max(out, tv_distance(m, product(m.marginals())))
    return out


def triple_tv(j: JointDist) -> Prob:
    return tv_distance(j, product_of_marginals(j))


# cylinder enumeration anchored at coordinate 0

def cylinder(n: int, alphabet: str = "01") -> str:
    """Word of the ``n``-th cylinder: by length (>= 1), then lexicographic."""
    a = len(alphabet)
    length, size = 1, a
    while n >= size:
        n -= size
        length += 1
        size *= a
    out = []
    for _ in range(length):
        n, r = divmod(n, a)
        out.append(alphabet[r])
    return "".join(reversed(out))


def cylinder_index(word: str, alphabet: str = "01") -> int:
    a = len(alphabet)
    n = sum(a ** m for m in range(1, len(word)))
    v = 0
    for ch in word:
        v = v * a + alphabet.index(ch)
    return n + v


def depth_word_length(depth: int, alphabet: str = "01") -> int:
    return max((len(cylinder(n, alphabet)) for n in range(depth)), default=0)


def truncation_bound(depth: int, arity: int) -> float:
    """Upper bound on the omitted terms: each difference is at most 1."""
    s = 2.0 - 2.0 ** (1 - depth)
    return 2.0 ** arity - s ** arity


@dataclass(frozen=True)
class Distance:
    value: Prob
    bound: float


def joining_distance(a: JointDist, b: JointDist, depth: int, alphabet: str = "01") -> Distance:
    """Weak-topology distance truncated to cylinder indices below ``depth``.

    ``a`` and ``b`` are joinings of ``arity`` copies, each copy given as a
    word long enough for every cylinder with index below ``depth``.
    """
    arity = a.arity
    if b.arity != arity:
        raise ValueError("joinings of different arity")
    words = [cylinder(n, alphabet) for n in range(depth)]
    need = max((len(w) for w in words), default=0)
    for j in (a, b):
        for w in next(iter(j.table)):
            if len(w) < need:
                raise ValueError(f"joining words shorter than cylinder length {need}")
    cache: dict[tuple[int, tuple[int, ...]], JointDist] = {}

    def mass(j: JointDist, tag: int, idx: tuple[int, ...]) -> Prob:
        lengths = tuple(len(words[i]) for i in idx)
        key = (tag, lengths)
        if key not in cache:
            cache[key] = j.prefix(lengths)
        return cache[key][tuple(words[i] for i in idx)]

    total: Prob = Fraction(0)
    for idx in itertools.product(range(depth), repeat=arity):
        diff = abs(mass(a, 0, idx) - mass(b, 1, idx))
        if diff:
            total += diff / (1 << sum(idx))
    return Distance(total, truncation_bound(depth, arity))


@dataclass(frozen=True)
class ProfileRow:
    p: object
    q: object
    pairwise_tv_max: Prob
    triple_tv: Prob
    d_truncated: Prob
    trunc_bound: float


def product_distance_profile(source: Source, length: int, pairs: Sequence[tuple],
                             depth: int = 4, n: int | None = None,
                             rng_seed: int = 0) -> list[ProfileRow]:
    """Distance of ``Delta_{p,q}`` from the product of its marginals.

    TV distances use windows of ``length``; the truncated joining distance
    uses windows long enough for the cylinders below ``depth``.
    """
    dlen = max(length, depth_word_length(depth, source.alphabet))
    rows = []
    for p, q in pairs:
        j = delta_pq(source, p, q, length, n, rng_seed)
        jd = j if dlen == length else delta_pq(source, p, q, dlen, n, rng_seed)
        dist = joining_distance(jd, product_of_marginals(jd), depth, source.alphabet)
        rows.append(ProfileRow(p, q, pairwise_tv_max(j), triple_tv(j), dist.value, dist.bound))
    return rows
