"""The one-sided block process built from 3**k-blocks.

Coordinates ``0, 1`` are fair coins and ``2`` is their XOR; in general the
third ``k``-block of every ``(k+1)``-block is the pointwise XOR of the first
two.  Free coin tosses sit exactly at the positions whose ternary digits are
all 0 or 1, and :class:`SeedId` ``B<position>`` names them.
"""
from __future__ import annotations

import itertools
import threading
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from threedot import kernels
from threedot.dist import JointDist, product, tv_distance
from threedot.gf2 import (
    DEFAULT_LENGTH_BOUND,
    BitExpr,
    LengthBound,
    SeedTag,
    are_independent,
    joint_distribution,
    rank,
)
from threedot.rng import Stream, stream_key


def ternary_digits(x: int) -> list[int]:
    out = []
    while x:
        x, d = divmod(x, 3)
        out.append(d)
    return out


def expansion(x: int) -> list[int]:
    """Free positions whose coins XOR to coordinate ``x`` (closed form)."""
    ys = [0]
    w = 1
    for d in ternary_digits(x):
        if d == 1:
            ys = [y + w for y in ys]
        elif d == 2:
            ys = ys + [y + w for y in ys]
        w *= 3
    return sorted(ys)


class BlockGrid:
    """Memoized symbolic coordinates of the block process."""

    def __init__(self) -> None:
        self._memo: dict[int, BitExpr] = {}
        self._lock = threading.Lock()

    def expr(self, i: int) -> BitExpr:
        if i < 0:
            raise ValueError("the block process is indexed by nonnegative integers")
        hit = self._memo.get(i)
        if hit is not None:
            return hit
        # highest level whose digit is 2 decides the reduction
        digits = ternary_digits(i)
        top = max((k for k, d in enumerate(digits) if d == 2), default=-1)
        if top < 0:
            e = BitExpr.seed(SeedTag.B, i)
        else:
            w = 3 ** top
            e = self.expr(i - 2 * w) ^ self.expr(i - w)
        with self._lock:
            self._memo.setdefault(i, e)
        return e

    def exprs(self, coords: Iterable[int]) -> list[BitExpr]:
        return [self.expr(i) for i in coords]

    def __len__(self) -> int:
        return len(self._memo)


_default_grid = BlockGrid()


def coord_expr(i: int, grid: BlockGrid | None = None) -> BitExpr:
    return (grid or _default_grid).expr(i)


def window(start: int, length: int) -> list[int]:
    return list(range(start, start + length))


def window_distribution(start: int, length: int, grid: BlockGrid | None = None,
                        bound: int = DEFAULT_LENGTH_BOUND) -> JointDist:
    g = grid or _default_grid
    return joint_distribution(g.exprs(window(start, length)), bound=bound)


def k_block(k: int, index: int) -> list[int]:
    """Coordinates of the ``index``-th ``k``-block."""
    w = 3 ** k
    return list(range(index * w, (index + 1) * w))


def block_independence_check(k: int, grid: BlockGrid | None = None) -> bool:
    """Distinct ``k``-blocks inside the first ``(k+2)``-block are independent."""
    g = grid or _default_grid
    blocks = [g.exprs(k_block(k, m)) for m in range(9)]
    ranks = [rank(b) for b in blocks]
    for a, b in itertools.combinations(range(9), 2):
        if rank(blocks[a] + blocks[b]) != ranks[a] + ranks[b]:
            return False
    return True


def overlap_pairs(k: int) -> list[tuple[tuple[int, int], list[int]]]:
    """Consecutive ``(k-1)``-block pairs inside the first ``(k+2)``-block.

    Returns ``((first k-block, last k-block), coordinates)`` for each pair of
    consecutive ``(k-1)``-blocks; a pair whose two k-block indices differ is a
    ``k``-overlapping.
    """
    if k < 1:
        return []
    out = []
    for t in range(27 - 1):
        coords = k_block(k - 1, t) + k_block(k - 1, t + 1)
        out.append(((t // 3, (t + 1) // 3), coords))
    return out


def overlap_independence_check(k: int, grid: BlockGrid | None = None) -> bool:
    """Every ``k``-overlapping is independent of every pair of consecutive
    ``(k-1)``-blocks lying in other ``k``-blocks (first ``(k+2)``-block)."""
    if k < 1:
        return True
    g = grid or _default_grid
    pairs = [(set(blocks), g.exprs(coords)) for blocks, coords in overlap_pairs(k)]
    for blocks_a, ea in pairs:
        if len(blocks_a) != 2:
            continue
        for blocks_b, eb in pairs:
            if blocks_a & blocks_b:
                continue
            if not are_independent(ea, eb):
                return False
    return True


def pair_law(a: Sequence[int], b: Sequence[int], grid: BlockGrid | None = None,
             bound: int = DEFAULT_LENGTH_BOUND) -> JointDist:
    g = grid or _default_grid
    return joint_distribution(g.exprs(list(a) + list(b)), (len(a), len(b)), bound=bound)


def mixing_profile_1d(length: int, gaps: Iterable[int], grid: BlockGrid | None = None,
                      bound: int = DEFAULT_LENGTH_BOUND) -> list[tuple[int, Fraction]]:
    """Exact TV distance between the law of two windows and its product form.

    The first window starts at 0, the second at ``gap``.
    """
    g = grid or _default_grid
    if 2 * length > bound:
        raise LengthBound(f"two windows of length {length} exceed bound {bound}")
    rows = []
    for p in gaps:
        joint = pair_law(window(0, length), window(p, length), g, bound)
        rows.append((p, tv_distance(joint, product(joint.marginals()))))
    return rows


def mixing_threshold(length: int) -> int:
    """Smallest ``3**k`` with ``3**(k-1) >= length``; gaps beyond it mix exactly."""
    k = 1
    while 3 ** (k - 1) < length:
        k += 1
    return 3 ** k


def sample_windows(start: int, length: int, n: int, rng_seed: int) -> np.ndarray:
    """``n`` independent draws of ``(xi_start, ..., xi_{start+length-1})``."""
    key = stream_key(rng_seed, Stream.BLOCK)
    return kernels.sample_windows(key, n, start, length, stationary=False)
