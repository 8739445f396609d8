"""Vectorized numpy fallback for the window sampler (see ``_ckernels.pyx``)."""
from __future__ import annotations

import numpy as np

from threedot.rng import coin_np, digit_np, sample_keys_np

KMAX = 40


def _shift(x: np.ndarray, delta: int) -> np.ndarray:
    if delta >= 0:
        return x + np.uint64(delta)
    return x - np.uint64(-delta)


def _covered(origin: np.ndarray, start: int, length: int, size: int) -> np.ndarray:
    hi = size - start - length
    if hi < 0:
        return np.zeros(origin.shape, dtype=bool)
    ok = origin <= np.uint64(hi)
    if start < 0:
        ok &= origin >= np.uint64(-start)
    return ok


def block_values(skeys: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Block-process value at position ``x`` under per-sample coin keys.

    ``x`` is XOR of the coins at every position obtained by replacing each
    ternary digit 2 of ``x`` by 0 or 1.
    """
    n = len(x)
    y0 = np.zeros(n, dtype=np.uint64)
    twos = np.zeros(n, dtype=np.int64)
    levels: list[tuple[int, np.ndarray]] = []
    rem = x.astype(np.uint64, copy=True)
    w = 1
    three = np.uint64(3)
    while rem.any():
        d = rem % three
        rem //= three
        y0 += np.where(d == 1, np.uint64(w), np.uint64(0))
        is2 = d == 2
        if is2.any():
            levels.append((w, is2))
            twos += is2
        w *= 3
    out = np.zeros(n, dtype=np.uint8)
    for c in np.unique(twos):
        idx = np.nonzero(twos == c)[0]
        c = int(c)
        weights = np.zeros((len(idx), max(c, 1)), dtype=np.uint64)
        col = np.zeros(len(idx), dtype=np.int64)
        for wl, is2 in levels:
            sel = np.nonzero(is2[idx])[0]
            weights[sel, col[sel]] = np.uint64(wl)
            col[sel] += 1
        base = y0[idx]
        keys = skeys[idx]
        acc = np.zeros(len(idx), dtype=np.uint8)
        for m in range(1 << c):
            y = base.copy()
            for b in range(c):
                if m >> b & 1:
                    y += weights[:, b]
            acc ^= coin_np(keys, y)
        out[idx] = acc
    return out


def sample_windows(key: int, lo: int, hi: int, start: int, length: int,
                   prefix: np.ndarray, stationary: bool,
                   out: np.ndarray) -> int:
    """Fill ``out[0:hi-lo]`` with windows for samples ``lo..hi-1``.

    Returns the number of samples whose window was not covered within
    ``KMAX`` skeleton digits (their rows are left as zeros).
    """
    n = hi - lo
    skeys = sample_keys_np(key, lo, hi)
    origin = np.zeros(n, dtype=np.uint64)
    overflow = 0
    if stationary:
        # fixed prefix digits always apply; random digits only until covered
        active = ~_covered(origin, start, length, 1)
        size = 1
        for k in range(KMAX):
            fixed = k < len(prefix)
            if not fixed and not active.any():
                break
            idx = np.arange(n) if fixed else np.nonzero(active)[0]
            if fixed:
                d = np.full(len(idx), int(prefix[k]), dtype=np.uint64)
            else:
                d = digit_np(skeys[idx], k)
            origin[idx] += d * np.uint64(size)
            size *= 3
            active[idx] = ~_covered(origin[idx], start, length, size)
        overflow = int(active.sum())
        origin[active] = np.uint64(max(0, -start))
    for t in range(length):
        out[:n, t] = block_values(skeys, _shift(origin, start + t))
    if overflow:
        out[:n][active] = 0
    return overflow
