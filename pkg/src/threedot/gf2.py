"""Exact probabilities for affine GF(2) functionals of independent fair bits.

Every cell of the processes in this package is an XOR of named coin tosses
(plus possibly a constant).  A :class:`BitExpr` stores the set of tosses as a
Python ``int`` bitmask, so XOR of expressions is a single big-int XOR and
elimination runs directly on bit-packed rows.

Seed identities are mapped to bit positions by a fixed, stateless encoding
(see :func:`seed_bit`), so expressions built by different grids of the same
kind can be combined without a shared registry.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from threedot.dist import JointDist

DEFAULT_LENGTH_BOUND = 24


class LengthBound(ValueError):
    """Raised when an exact table would exceed the configured dimension bound."""


class SeedTag(enum.IntEnum):
    H = 0  # horizontal axis of the 2-D field
    V = 1  # lower vertical axis of the 2-D field
    B = 2  # block process coin tosses
    X = 3  # free-standing seeds (tests, i.i.d. reference source)


_NTAGS = len(SeedTag)


@dataclass(frozen=True, order=True)
class SeedId:
    tag: SeedTag
    index: int

    def __repr__(self) -> str:
        return f"{self.tag.name}{self.index}"


def _zigzag(n: int) -> int:
    return 2 * n if n >= 0 else -2 * n - 1


def _unzigzag(z: int) -> int:
    return z >> 1 if not z & 1 else -((z + 1) >> 1)


def seed_bit(sid: SeedId) -> int:
    """Bit position of a seed inside a :class:`BitExpr` mask."""
    return _zigzag(sid.index) * _NTAGS + int(sid.tag)


def bit_seed(bit: int) -> SeedId:
    z, tag = divmod(bit, _NTAGS)
    return SeedId(SeedTag(tag), _unzigzag(z))


@dataclass(frozen=True)
class BitExpr:
    """``const XOR (sum of the seeds in mask)``, canonical by construction."""

    mask: int = 0
    const: int = 0

    @classmethod
    def seed(cls, tag: SeedTag | str, index: int) -> "BitExpr":
        if isinstance(tag, str):
            tag = SeedTag[tag]
        return cls(1 << seed_bit(SeedId(tag, index)), 0)

    @classmethod
    def constant(cls, bit: int) -> "BitExpr":
        return cls(0, bit & 1)

    @classmethod
    def from_support(cls, support: Iterable[SeedId], const: int = 0) -> "BitExpr":
        mask = 0
        for sid in support:
            mask ^= 1 << seed_bit(sid)
        return cls(mask, const & 1)

    def __xor__(self, other: "BitExpr") -> "BitExpr":
        return BitExpr(self.mask ^ other.mask, self.const ^ other.const)

    def flip(self) -> "BitExpr":
        return BitExpr(self.mask, self.const ^ 1)

    @property
    def support(self) -> tuple[SeedId, ...]:
        out = []
        m = self.mask
        while m:
            low = m & -m
            out.append(bit_seed(low.bit_length() - 1))
            m ^= low
        return tuple(sorted(out))

    @property
    def weight(self) -> int:
        return self.mask.bit_count()

    def is_zero(self) -> bool:
        return self.mask == 0 and self.const == 0

    def evaluate(self, values: dict[SeedId, int]) -> int:
        v = self.const
        for sid in self.support:
            v ^= values[sid] & 1
        return v

    def __repr__(self) -> str:
        terms = [repr(s) for s in self.support]
        if self.const or not terms:
            terms.append(str(self.const))
        return "BitExpr(" + " ^ ".join(terms) + ")"


def xor(a: BitExpr, b: BitExpr) -> BitExpr:
    return a ^ b


def xor_all(exprs: Iterable[BitExpr]) -> BitExpr:
    mask = const = 0
    for e in exprs:
        mask ^= e.mask
        const ^= e.const
    return BitExpr(mask, const)


@dataclass(frozen=True)
class AffineSystem:
    """Conjunction of constraints ``expr == bit``."""

    rows: tuple[tuple[BitExpr, int], ...]

    @classmethod
    def of(cls, rows: Iterable[tuple[BitExpr, int]]) -> "AffineSystem":
        return cls(tuple((e, b & 1) for e, b in rows))


class _Basis:
    """Incremental GF(2) row reduction keyed by leading bit.

    Each basis row carries ``combo``, the set of input rows (as a bitmask of
    row indices) whose XOR it equals, so dependent rows can be expressed in
    terms of independent ones.
    """

    __slots__ = ("rows",)

    def __init__(self) -> None:
        self.rows: dict[int, tuple[int, int, int]] = {}  # lead -> (mask, rhs, combo)

    def reduce(self, mask: int, rhs: int = 0, combo: int = 0) -> tuple[int, int, int]:
        rows = self.rows
        while mask:
            lead = mask.bit_length() - 1
            hit = rows.get(lead)
            if hit is None:
                break
            mask ^= hit[0]
            rhs ^= hit[1]
            combo ^= hit[2]
        return mask, rhs, combo

    def insert(self, mask: int, rhs: int = 0, combo: int = 0) -> tuple[bool, int, int]:
        """Insert a row; returns (independent, residual rhs, residual combo)."""
        mask, rhs, combo = self.reduce(mask, rhs, combo)
        if mask:
            self.rows[mask.bit_length() - 1] = (mask, rhs, combo)
            return True, rhs, combo
        return False, rhs, combo

    @property
    def rank(self) -> int:
        return len(self.rows)


def rank(exprs: Iterable[BitExpr]) -> int:
    """GF(2) rank of the homogeneous parts."""
    basis = _Basis()
    for e in exprs:
        basis.insert(e.mask)
    return basis.rank


def system_probability(sys: AffineSystem | Sequence[tuple[BitExpr, int]]) -> Fraction:
    """Exact probability that every constraint holds: ``0`` or ``2**-rank``."""
    rows = sys.rows if isinstance(sys, AffineSystem) else sys
    basis = _Basis()
    for expr, bit in rows:
        independent, rhs, _ = basis.insert(expr.mask, (bit ^ expr.const) & 1)
        if not independent and rhs:
            return Fraction(0)
    return Fraction(1, 1 << basis.rank)


def _check_bound(k: int, bound: int) -> None:
    if k > bound:
        raise LengthBound(f"{k} expressions exceed the exact-table bound {bound}")


def joint_distribution(
    exprs: Sequence[BitExpr],
    lengths: Sequence[int] | None = None,
    bound: int = DEFAULT_LENGTH_BOUND,
) -> JointDist:
    """Exact law of ``(e_0, ..., e_{k-1})``.

    The law is uniform on an affine subspace of ``{0,1}^k``: rows that are
    linearly independent are free fair bits, the others are fixed XORs of
    them.  Outcomes are split into words according to ``lengths`` (default: a
    single word of length ``k``).
    """
    k = len(exprs)
    _check_bound(k, bound)
    if lengths is None:
        lengths = (k,)
    if sum(lengths) != k:
        raise ValueError("word lengths must add up to the number of expressions")

    basis = _Basis()
    free: list[int] = []
    # dependent row j: value = fixed ^ XOR of the values of free rows in deps
    dependent: list[tuple[int, int, int]] = []
    for j, e in enumerate(exprs):
        independent, _, combo = basis.insert(e.mask, 0, 1 << j)
        if independent:
            free.append(j)
        else:
            # combo now names only free rows (plus j itself)
            combo ^= 1 << j
            fixed = e.const
            for i in free:
                if combo >> i & 1:
                    fixed ^= exprs[i].const
            dependent.append((j, fixed, combo))

    p = Fraction(1, 1 << len(free))
    table: dict[tuple[str, ...], Fraction] = {}
    for bits in itertools.product((0, 1), repeat=len(free)):
        vals = [0] * k
        packed = 0
        for j, b in zip(free, bits):
            vals[j] = b
            packed |= b << j
        for j, fixed, combo in dependent:
            vals[j] = fixed ^ ((combo & packed).bit_count() & 1)
        table[_split("".join(map(str, vals)), lengths)] = p
    return JointDist(table)


def _split(word: str, lengths: Sequence[int]) -> tuple[str, ...]:
    out = []
    pos = 0
    for n in lengths:
        out.append(word[pos:pos + n])
        pos += n
    return tuple(out)


def are_independent(
    group_a: Sequence[BitExpr],
    group_b: Sequence[BitExpr],
    bound: int | None = None,
) -> bool:
    """Exact independence of two groups of affine functionals (rank form)."""
    if bound is not None:
        _check_bound(len(group_a) + len(group_b), bound)
    return rank(list(group_a) + list(group_b)) == rank(group_a) + rank(group_b)


def are_mutually_independent(groups: Sequence[Sequence[BitExpr]]) -> bool:
    return rank([e for g in groups for e in g]) == sum(rank(g) for g in groups)


def dyadic_log2(p: Fraction) -> int | None:
    """Exponent ``e`` with ``p == 2**e``, or ``None`` if ``p`` is not such a power."""
    if p <= 0 or p.numerator != 1 or p.denominator & (p.denominator - 1):
        return None
    return -(p.denominator.bit_length() - 1)
