"""Stationary version of the block process driven by a 3-adic skeleton.

Skeleton digit ``S_k`` tells whether the ``k``-block holding coordinate 0 is
the first, second or third ``k``-block of its ``(k+1)``-block, so the origin
sits at offset ``sum S_k 3^k`` of the enclosing block and the coordinate
shift acts on the skeleton as 3-adic ``+1``.  Given the skeleton, the process
is the block process read from that offset.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from threedot import block, kernels
from threedot.dist import JointDist, sigma_bound, tv_distance
from threedot.gf2 import SeedTag, are_independent
from threedot.kernels import KMAX, SkeletonOverflow
from threedot.rng import Stream, digit, digit_np, sample_key, sample_keys_np, stream_key


class CarryOverflow(ArithmeticError):
    """Incrementing an all-2 skeleton needs a digit beyond the truncation."""


class BadAlignment(ValueError):
    """The requested triple does not fill the three k-slots of one (k+1)-block."""


@dataclass(frozen=True)
class SkeletonState:
    digits: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if any(d not in (0, 1, 2) for d in self.digits):
            raise ValueError("skeleton digits must be 0, 1 or 2")

    @property
    def K(self) -> int:
        return len(self.digits)

    def covers(self, start: int, length: int) -> bool:
        o = position_of_origin(self)
        return 0 <= o + start and o + start + length <= 3 ** self.K

    def extended(self, more: Iterable[int]) -> "SkeletonState":
        return SkeletonState(self.digits + tuple(more))

    def __str__(self) -> str:
        return ",".join(map(str, self.digits))


def skeleton_sample(K: int, rng_seed: int) -> SkeletonState:
    """``K`` i.i.d. uniform ternary digits."""
    if K < 0:
        raise ValueError("K must be nonnegative")
    skey = sample_key(stream_key(rng_seed, Stream.SKELETON), 0)
    return SkeletonState(tuple(digit(skey, k) for k in range(K)))


def skeleton_digits_batch(n: int, K: int, rng_seed: int) -> np.ndarray:
    """``n x K`` array; row ``i`` is the skeleton of sample ``i`` of the stream."""
    skeys = sample_keys_np(stream_key(rng_seed, Stream.SKELETON), 0, n)
    return np.stack([digit_np(skeys, k) for k in range(K)], axis=1).astype(np.uint8) \
        if K else np.zeros((n, 0), dtype=np.uint8)


def shift_skeleton(s: SkeletonState) -> SkeletonState:
    """3-adic ``+1``: shift of the process by one coordinate to the left."""
    d = list(s.digits)
    for k in range(len(d)):
        if d[k] < 2:
            d[k] += 1
            return SkeletonState(tuple(d))
        d[k] = 0
    raise CarryOverflow("all digits are 2; extend the skeleton before shifting")


def position_of_origin(s: SkeletonState) -> int:
    return sum(d * 3 ** k for k, d in enumerate(s.digits))


def skeleton_of_offset(o: int, K: int) -> SkeletonState:
    d = []
    for _ in range(K):
        o, r = divmod(o, 3)
        d.append(r)
    if o:
        raise ValueError("offset does not fit in K digits")
    return SkeletonState(tuple(d))


@dataclass(frozen=True)
class StationarySampleSpec:
    start: int
    length: int
    rng_seed: int
    skeleton: SkeletonState | None = None

    def __post_init__(self) -> None:
        if self.length < 1:
            raise ValueError("window length must be positive")


def sample_windows(start: int, length: int, n: int, rng_seed: int,
                   skeleton: SkeletonState | None = None, stream: int = 0) -> np.ndarray:
    """``n`` draws of ``(xi_start, ..., xi_{start+length-1})``.

    Without ``skeleton`` every sample draws its own skeleton; with one, its
    digits are fixed and only missing higher digits are drawn.  ``stream``
    selects an independent batch for the same seed.
    """
    key = stream_key(rng_seed, Stream.STATIONARY)
    if stream:
        key = stream_key(key, stream)
    prefix = skeleton.digits if skeleton is not None else ()
    return kernels.sample_windows(key, n, start, length, prefix, stationary=True)


def sample_window(spec: StationarySampleSpec) -> str:
    w = sample_windows(spec.start, spec.length, 1, spec.rng_seed, spec.skeleton)[0]
    return "".join(map(str, w))


def conditioned_exprs(skeleton: SkeletonState, coords: Sequence[int],
                      grid: block.BlockGrid | None = None):
    """Symbolic coordinates of the process conditioned on a covering skeleton."""
    o = position_of_origin(skeleton)
    lo, hi = min(coords), max(coords)
    if not skeleton.covers(lo, hi - lo + 1):
        raise ValueError("skeleton does not cover the requested coordinates")
    g = grid or block._default_grid
    return g.exprs([o + c for c in coords])


def origin_depends_on_past(skeleton: SkeletonState, grid: block.BlockGrid | None = None) -> bool:
    """Whether ``xi_0`` is a function of coordinates strictly left of it.

    True when some digit is 2: the origin then lies in a third k-block and
    its value is the XOR of coordinates in the two earlier k-blocks, so every
    seed it uses sits at an earlier position.
    """
    o = position_of_origin(skeleton)
    e = (grid or block._default_grid).expr(o)
    return all(sid.tag == SeedTag.B and sid.index < o for sid in e.support)


def exact_window_law(start: int, length: int, max_level: int = KMAX) -> JointDist:
    """Exact law of an unconditioned window, by enumerating skeleton prefixes.

    Prefixes are extended one digit at a time until the window is covered;
    the covered mass contributes the block-process law at the induced offset.
    Uncovered prefixes form a chain whose contribution becomes a fixed law once
    the enclosing block is large compared to the window; when two consecutive
    levels contribute the same normalized law, the remaining mass is assigned
    to it (geometric tail).
    """
    acc: dict[tuple[str, ...], Fraction] = {}
    pending = [(0, 1, Fraction(1))]  # (offset, block size, mass)
    prev_level: JointDist | None = None
    for _ in range(max_level + 1):
        nxt = []
        level: dict[tuple[str, ...], Fraction] = {}
        level_mass = Fraction(0)
        for o, size, mass in pending:
            if 0 <= o + start and o + start + length <= size:
                law = block.window_distribution(o + start, length)
                for k, v in law.table.items():
                    level[k] = level.get(k, 0) + mass * v
                level_mass += mass
            else:
                for d in range(3):
                    nxt.append((o + d * size, size * 3, mass / 3))
        for k, v in level.items():
            acc[k] = acc.get(k, 0) + v
        remaining = sum((m for _, _, m in nxt), Fraction(0))
        if not nxt:
            return JointDist(acc)
        if level_mass:
            normalized = JointDist({k: v / level_mass for k, v in level.items()})
            if prev_level is not None and tv_distance(normalized, prev_level) == 0 \
                    and _chain_stable(nxt, start, length):
                for k, v in normalized.table.items():
                    acc[k] = acc.get(k, 0) + remaining * v
                return JointDist(acc)
            prev_level = normalized
        pending = nxt
    raise SkeletonOverflow("window law did not stabilize within the skeleton bound")


def _chain_stable(pending, start: int, length: int) -> bool:
    # every pending block is already much larger than the window
    return all(size >= 27 * (abs(start) + length) for _, size, _ in pending)


def stationary_census_law(length: int) -> JointDist:
    return exact_window_law(0, length)


@dataclass
class StationarityReport:
    length: int
    n: int
    starts: tuple[int, ...]
    freqs: dict[int, dict[str, float]]
    pooled: dict[str, float]
    max_tv: float
    worst_z: float
    passed: bool
    rows: list[tuple[int, str, float]] = field(default_factory=list)


def _word_freqs(samples: np.ndarray) -> dict[str, float]:
    n, ell = samples.shape
    codes = samples.astype(np.int64) @ (1 << np.arange(ell - 1, -1, -1))
    counts = np.bincount(codes, minlength=1 << ell)
    return {format(c, f"0{ell}b"): counts[c] / n for c in range(1 << ell)}


def stationarity_check(length: int, n: int, rng_seed: int, source: str = "stationary",
                       starts: Sequence[int] = (0, 1, 2, 3), z: float = 5.0
                       ) -> StationarityReport:
    """Compare empirical word frequencies at several window starts.

    Each start uses an independent batch of ``n`` samples.  A cell passes when
    its frequency is within ``z`` sigma of the pooled frequency.
    """
    if not 1 <= length <= 6:
        raise ValueError("word tables are limited to length 1..6")
    freqs = {}
    for idx, s in enumerate(starts):
        if source == "stationary":
            w = sample_windows(s, length, n, rng_seed, stream=idx + 1)
        elif source == "block":
            w = block.sample_windows(s, length, n, stream_key(rng_seed, idx + 1))
        else:
            raise ValueError(f"unknown source {source!r}")
        freqs[s] = _word_freqs(w)
    words = sorted(freqs[starts[0]])
    pooled = {w: sum(freqs[s][w] for s in starts) / len(starts) for w in words}
    worst = 0.0
    passed = True
    rows = []
    for s in starts:
        for w in words:
            p, q = pooled[w], freqs[s][w]
            rows.append((s, w, q))
            tol = sigma_bound(p, n, z)
            if abs(q - p) > tol:
                passed = False
            sd = sigma_bound(p, n, 1.0)
            if sd > 0:
                worst = max(worst, abs(q - p) / sd)
            elif q != p:
                worst = float("inf")
    max_tv = 0.0
    for a, b in itertools.combinations(starts, 2):
        max_tv = max(max_tv, 0.5 * sum(abs(freqs[a][w] - freqs[b][w]) for w in words))
    return StationarityReport(length, n, tuple(starts), freqs, pooled, max_tv, worst,
                              passed, rows)


def aligned_base(skeleton: SkeletonState, k: int) -> int:
    """Coordinate (relative to ``xi_0``) of the start of the ``(k+1)``-block
    containing the origin."""
    return -(position_of_origin(skeleton) % 3 ** (k + 1))


@dataclass
class TripleReport:
    k: int
    base: int
    n: int
    parity_violations: int
    chi2_pairs: tuple[float, float, float]
    pairwise_ok: bool
    exact_pairwise: bool
    exact_mutual: bool

    @property
    def passed(self) -> bool:
        return self.parity_violations == 0 and self.pairwise_ok


CHI2_5SIGMA_1DF = 25.0  # chi-square with one degree of freedom at 5 sigma


def _chi2_2x2(a: np.ndarray, b: np.ndarray) -> float:
    n = len(a)
    table = np.zeros((2, 2))
    np.add.at(table, (a, b), 1)
    expected = np.outer(table.sum(1), table.sum(0)) / n
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0, (table - expected) ** 2 / expected, 0.0)
    return float(terms.sum())


def conditional_triple_check(k: int, skeleton: SkeletonState, n: int, rng_seed: int = 0,
                             base: int = 0) -> TripleReport:
    """With the skeleton fixed, the three k-slots of one (k+1)-block XOR to 0.

    Checks the coordinates ``base, base + 3^k, base + 2*3^k`` relative to
    ``xi_0``; they must be the three k-slots of a single (k+1)-block under the
    skeleton's offset, otherwise :class:`BadAlignment` is raised.
    """
    w = 3 ** k
    o = position_of_origin(skeleton)
    first = o + base
    if first < 0 or first % (3 * w) != 0 or not skeleton.covers(base, 3 * w):
        raise BadAlignment(
            f"coordinates {base}, {base + w}, {base + 2 * w} are not the k-slots of one "
            f"(k+1)-block for offset {o}")
    coords = [base, base + w, base + 2 * w]
    samples = sample_windows(base, 2 * w + 1, n, rng_seed, skeleton)
    x, y, zz = samples[:, 0], samples[:, w], samples[:, 2 * w]
    violations = int(np.count_nonzero(x ^ y ^ zz))
    chi = (_chi2_2x2(x, y), _chi2_2x2(x, zz), _chi2_2x2(y, zz))
    e = conditioned_exprs(skeleton, coords)
    exact_pairwise = all(are_independent([e[a]], [e[b]]) for a, b in ((0, 1), (0, 2), (1, 2)))
    exact_mutual = are_independent(e[:2], e[2:])
    return TripleReport(k, base, n, violations, chi,
                        all(c <= CHI2_5SIGMA_1DF for c in chi), exact_pairwise, exact_mutual)


def offsets_by_iteration(K: int) -> list[int]:
    """Origin offsets visited by shifting the all-zero skeleton ``3^K - 1`` times."""
    s = SkeletonState((0,) * K)
    out = [position_of_origin(s)]
    for _ in range(3 ** K - 1):
        s = shift_skeleton(s)
        out.append(position_of_origin(s))
    return out


def shift_pushforward(K: int) -> dict[tuple[int, ...], Fraction]:
    """Exact law of the shifted skeleton prefix when the prefix is uniform.

    States whose shift overflows the truncation carry into the next digit,
    which is dropped, so the prefix map is the increment modulo ``3^K``.
    """
    law: dict[tuple[int, ...], Fraction] = {}
    p = Fraction(1, 3 ** K)
    for digits in itertools.product(range(3), repeat=K):
        s = SkeletonState(digits)
        try:
            t = shift_skeleton(s).digits
        except CarryOverflow:
            t = (0,) * K
        law[t] = law.get(t, 0) + p
    return law


def digit_counts(states: Iterable[SkeletonState]) -> Counter:
    c: Counter = Counter()
    for s in states:
        c.update(s.digits)
    return c
