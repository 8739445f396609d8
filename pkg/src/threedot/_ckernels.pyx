# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled window sampler; same contract as ``_pykernels.sample_windows``."""
from libc.stdint cimport uint64_t, int64_t, uint8_t

import numpy as np

cdef enum:
    KMAX = 40

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t SALT_DIGIT = 0xD1B54A32D192ED03ULL
cdef uint64_t SALT_COIN = 0x8CB92BA72F3D8DD7ULL


cdef inline uint64_t mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t digit(uint64_t skey, int k) noexcept nogil:
    cdef uint64_t h = mix((skey ^ SALT_DIGIT) + <uint64_t>(k + 1) * GAMMA)
    return ((h >> 32) * 3) >> 32


cdef inline uint8_t coin(uint64_t skey, uint64_t y) noexcept nogil:
    return <uint8_t>(mix((skey ^ SALT_COIN) + (y + 1) * GAMMA) >> 63)


cdef inline uint8_t block_value(uint64_t skey, uint64_t x) noexcept nogil:
    cdef uint64_t w2[KMAX + 2]
    cdef uint64_t y0 = 0, w = 1, y, d, m, g, prev = 0, diff
    cdef int c = 0, b
    cdef uint8_t acc
    while x:
        d = x % 3
        x = x / 3
        if d == 1:
            y0 += w
        elif d == 2:
            w2[c] = w
            c += 1
        w *= 3
    # Gray-code walk over the 2**c expansions of the 2-digits
    y = y0
    acc = coin(skey, y)
    m = 1
    while m < (<uint64_t>1 << c):
        g = m ^ (m >> 1)
        diff = g ^ prev
        b = 0
        while not (diff >> b) & 1:
            b += 1
        if g & diff:
            y += w2[b]
        else:
            y -= w2[b]
        prev = g
        acc ^= coin(skey, y)
        m += 1
    return acc


cdef inline bint covered(uint64_t origin, int64_t start, int64_t length,
                         uint64_t size) noexcept nogil:
    # origin + start >= 0 and origin + start + length <= size
    if start < 0 and origin < <uint64_t>(-start):
        return False
    if start + length >= 0:
        return origin + <uint64_t>(start + length) <= size
    return origin <= size + <uint64_t>(-(start + length))


def sample_windows(uint64_t key, Py_ssize_t lo, Py_ssize_t hi, int64_t start,
                   int64_t length, prefix, bint stationary, uint8_t[:, ::1] out):
    cdef const uint8_t[::1] pre = np.ascontiguousarray(prefix, dtype=np.uint8)
    cdef Py_ssize_t npre = pre.shape[0]
    cdef Py_ssize_t i, r
    cdef int k, t
    cdef uint64_t skey, origin, size, x
    cdef Py_ssize_t overflow = 0
    cdef bint ok
    with nogil:
        for i in range(lo, hi):
            r = i - lo
            skey = mix(key + <uint64_t>(i + 1) * GAMMA)
            origin = 0
            ok = True
            if stationary:
                size = 1
                k = 0
                ok = covered(origin, start, length, size)
                while (not ok or k < npre) and k < KMAX:
                    if k < npre:
                        origin += <uint64_t>pre[k] * size
                    else:
                        origin += digit(skey, k) * size
                    size *= 3
                    k += 1
                    ok = covered(origin, start, length, size)
            if not ok:
                overflow += 1
                for t in range(length):
                    out[r, t] = 0
                continue
            for t in range(length):
                x = origin + <uint64_t>(start + t)
                out[r, t] = block_value(skey, x)
    return overflow
