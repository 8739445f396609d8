"""The 3-dot random field on Z^2.

Cells obey ``xi(i,j) ^ xi(i+1,j) ^ xi(i,j+1) = 0``.  The free cells are the
horizontal axis ``(i, 0)`` (seed ``H<i>``) and the lower vertical axis
``(0, j)``, ``j < 0`` (seed ``V<j>``).  Rows above the axis follow from the
row below; rows below are filled outward from the vertical seed:

    xi(i+1, j) = xi(i, j) ^ xi(i, j+1)     (i >= 0, rightward)
    xi(i, j)   = xi(i+1, j) ^ xi(i, j+1)   (i < 0, leftward)

Cell supports grow like Pascal's triangle mod 2, so far cells are expensive;
the memo is unbounded and callers bound their coordinate ranges.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from threedot.dist import JointDist, product, tv_distance
from threedot.gf2 import (
    DEFAULT_LENGTH_BOUND,
    BitExpr,
    LengthBound,
    SeedTag,
    are_independent,
    are_mutually_independent,
    joint_distribution,
    rank,
)
from threedot.rng import Stream, coin_np, signed_to_u64, stream_key

Cell = tuple[int, int]


def _deps(i: int, j: int) -> tuple[Cell, Cell] | None:
    if j > 0:
        return (i, j - 1), (i + 1, j - 1)
    if j == 0 or i == 0:
        return None
    if i > 0:
        return (i - 1, j), (i - 1, j + 1)
    return (i + 1, j), (i, j + 1)


class FieldGrid:
    """Memoized symbolic cells; safe to share between threads."""

    def __init__(self) -> None:
        self._memo: dict[Cell, BitExpr] = {}
        self._lock = threading.Lock()

    def expr(self, i: int, j: int) -> BitExpr:
        memo = self._memo
        hit = memo.get((i, j))
        if hit is not None:
            return hit
        with self._lock:
            stack = [(i, j)]
            while stack:
                c = stack[-1]
                if c in memo:
                    stack.pop()
                    continue
                deps = _deps(*c)
                if deps is None:
                    tag = SeedTag.H if c[1] == 0 else SeedTag.V
                    memo[c] = BitExpr.seed(tag, c[0] if c[1] == 0 else c[1])
                    stack.pop()
                    continue
                a, b = deps
                ea, eb = memo.get(a), memo.get(b)
                if ea is None:
                    stack.append(a)
                if eb is None:
                    stack.append(b)
                if ea is not None and eb is not None:
                    memo[c] = ea ^ eb
                    stack.pop()
        return memo[(i, j)]

    def exprs(self, cells: Iterable[Cell]) -> list[BitExpr]:
        return [self.expr(i, j) for i, j in cells]

    def __len__(self) -> int:
        return len(self._memo)


_default_grid = FieldGrid()


def cell_expr(i: int, j: int, grid: FieldGrid | None = None) -> BitExpr:
    return (grid or _default_grid).expr(i, j)


def rule_residual(i: int, j: int, grid: FieldGrid | None = None) -> BitExpr:
    g = grid or _default_grid
    return g.expr(i, j) ^ g.expr(i + 1, j) ^ g.expr(i, j + 1)


def scaled_rule_residual(i: int, j: int, n: int, grid: FieldGrid | None = None) -> BitExpr:
    """``xi(i,j) ^ xi(i+2^n,j) ^ xi(i,j+2^n)``; the zero expression for every n."""
    g = grid or _default_grid
    s = 1 << n
    return g.expr(i, j) ^ g.expr(i + s, j) ^ g.expr(i, j + s)


@dataclass(frozen=True)
class Window2D:
    """Rectangle of ``width x height`` cells with lower-left corner ``corner``."""

    corner: Cell
    width: int
    height: int

    @classmethod
    def square(cls, corner: Cell, side: int) -> "Window2D":
        return cls(corner, side, side)

    def cells(self) -> list[Cell]:
        i0, j0 = self.corner
        # row-major, bottom row first
        return [(i0 + di, j0 + dj) for dj in range(self.height) for di in range(self.width)]

    def shifted(self, d: Cell) -> "Window2D":
        return Window2D((self.corner[0] + d[0], self.corner[1] + d[1]), self.width, self.height)


def window_distribution(w: Window2D, grid: FieldGrid | None = None,
                        bound: int = DEFAULT_LENGTH_BOUND) -> JointDist:
    """Exact law of the window, flattened row by row from the bottom row."""
    if w.width < 1 or w.height < 1:
        raise ValueError("window sides must be positive")
    cells = w.cells()
    if len(cells) > bound:
        raise LengthBound(f"{len(cells)} cells exceed bound {bound}")
    return joint_distribution((grid or _default_grid).exprs(cells), bound=bound)


# independence regions of the seed scheme

def in_r1(c: Cell) -> bool:
    i, j = c
    return i < 0 and 0 < j < -i


def in_r2(c: Cell) -> bool:
    i, j = c
    return j < 0 and 0 < i < -j


def in_r3(c: Cell) -> bool:
    i, j = c
    return i > 0 and j > 0


REGIONS = {"R1": in_r1, "R2": in_r2, "R3": in_r3}


def region_windows(side: int, radius: int = 8) -> dict[str, list[Window2D]]:
    """All ``side x side`` windows with corners in ``[-radius, radius]^2``
    lying entirely inside each region."""
    out: dict[str, list[Window2D]] = {name: [] for name in REGIONS}
    for i0, j0 in itertools.product(range(-radius, radius + 1), repeat=2):
        w = Window2D.square((i0, j0), side)
        for name, inside in REGIONS.items():
            if all(inside(c) for c in w.cells()):
                out[name].append(w)
    return out


def region_pairs(side: int, radius: int = 8) -> Iterator[tuple[Window2D, Window2D]]:
    wins = region_windows(side, radius)
    for ra, rb in itertools.combinations(REGIONS, 2):
        for a in wins[ra]:
            for b in wins[rb]:
                yield a, b


def region_independence_check(side: int, radius: int = 8, grid: FieldGrid | None = None,
                              bound: int = DEFAULT_LENGTH_BOUND) -> bool:
    """Windows inside two different regions are exactly independent."""
    if 2 * side * side > bound:
        raise LengthBound(f"two {side}x{side} windows exceed bound {bound}")
    g = grid or _default_grid
    for a, b in region_pairs(side, radius):
        if not are_independent(g.exprs(a.cells()), g.exprs(b.cells())):
            return False
    return True


def triple_dependence_witness(n: int, grid: FieldGrid | None = None
                              ) -> tuple[JointDist, bool, bool]:
    """Law of ``(xi(0,0), xi(2^n,0), xi(0,2^n))`` with pairwise/mutual flags."""
    g = grid or _default_grid
    s = 1 << n
    e = g.exprs([(0, 0), (s, 0), (0, s)])
    law = joint_distribution(e, (1, 1, 1))
    pairwise = all(are_independent([e[a]], [e[b]]) for a, b in ((0, 1), (0, 2), (1, 2)))
    mutual = are_mutually_independent([[x] for x in e])
    return law, pairwise, mutual


def triple_tv(law: JointDist) -> object:
    return tv_distance(law, product(law.marginals()))


def sample_field(w: Window2D, rng_seed: int) -> np.ndarray:
    """One configuration restricted to ``w``.

    Returns a ``height x width`` uint8 array, row ``r`` holding ``j = j0 + r``
    and column ``c`` holding ``i = i0 + c``.
    """
    i0, j0 = w.corner
    i1, j1 = i0 + w.width, j0 + w.height  # exclusive
    lo = min(i0, 0)
    top = max(j1 - 1, 0)
    hi = max(i1, 1) + top  # row 0 must extend this far right for the upper rows
    kh = stream_key(rng_seed, Stream.FIELD_H)
    kv = stream_key(rng_seed, Stream.FIELD_V)
    xs = np.arange(lo, hi, dtype=np.int64)
    row0 = coin_np(np.full(len(xs), kh, dtype=np.uint64), signed_to_u64(xs))
    out = np.zeros((w.height, w.width), dtype=np.uint8)

    def put(j: int, first: int, row: np.ndarray) -> None:
        if j0 <= j < j1:
            a = i0 - first
            out[j - j0] = row[a:a + w.width]

    put(0, lo, row0)
    row = row0
    for j in range(1, j1):
        row = row[:-1] ^ row[1:]
        put(j, lo, row)
    if j0 < 0:
        # lower rows live on [lo, max(i1, 1)); index of i = 0 is -lo
        width = max(i1, 1) - lo
        above = row0[:width]
        z = -lo
        for j in range(-1, j0 - 1, -1):
            cur = np.empty(width, dtype=np.uint8)
            cur[z] = _vcoin(kv, j)
            # rightward: cur[i+1] = cur[i] ^ above[i]
            if width - z > 1:
                cur[z + 1:] = cur[z] ^ np.bitwise_xor.accumulate(above[z:width - 1])
            # leftward: cur[i] = cur[i+1] ^ above[i]
            if z > 0:
                left = np.bitwise_xor.accumulate(above[z - 1::-1])
                cur[z - 1::-1] = cur[z] ^ left
            put(j, lo, cur)
            above = cur
    return out


def _vcoin(kv: int, j: int) -> int:
    return int(coin_np(np.array([kv], dtype=np.uint64), signed_to_u64([j]))[0])


def rule_violations(m: np.ndarray) -> int:
    """Number of interior triples of a sampled matrix breaking the 3-dot rule."""
    return int(np.count_nonzero(m[:-1, :-1] ^ m[:-1, 1:] ^ m[1:, :-1]))


def to_pbm(m: np.ndarray) -> str:
    """Plain PBM text, top line = highest row."""
    h, w = m.shape
    lines = ["P1", f"{w} {h}"]
    for r in range(h - 1, -1, -1):
        lines.append(" ".join(str(int(v)) for v in m[r]))
    return "\n".join(lines) + "\n"


def horizontal_exprs(start: Cell, length: int, grid: FieldGrid | None = None) -> list[BitExpr]:
    g = grid or _default_grid
    i, j = start
    return g.exprs([(i + t, j) for t in range(length)])


def rank_of_window(w: Window2D, grid: FieldGrid | None = None) -> int:
    return rank((grid or _default_grid).exprs(w.cells()))
