"""Counter-based random streams.

All randomness derives from one 64-bit seed.  Every draw is a pure function of
``(seed, stream, counter)`` built from the splitmix64 finalizer, so a batch of
samples can be cut into chunks, computed in any order or in parallel, and
still reproduce bit for bit.  The compiled kernel implements the same
functions; ``tests/test_kernels.py`` pins them against each other.

Derivation::

    key(seed, stream)      = mix(seed ^ mix(stream * GAMMA + SALT_STREAM))
    sample_key(key, i)     = mix(key + (i + 1) * GAMMA)
    digit(skey, k)         = ((mix((skey ^ SALT_DIGIT) + (k + 1) * GAMMA) >> 32) * 3) >> 32
    coin(skey, y)          = mix((skey ^ SALT_COIN) + (y + 1) * GAMMA) >> 63

``y`` is taken modulo 2**64, so negative coordinates are valid inputs.
"""
from __future__ import annotations

import enum

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
SALT_STREAM = 0x632BE59BD9B4E019
SALT_DIGIT = 0xD1B54A32D192ED03
SALT_COIN = 0x8CB92BA72F3D8DD7
M1 = 0xBF58476D1CE4E5B9
M2 = 0x94D049BB133111EB


class Stream(enum.IntEnum):
    SKELETON = 1
    BLOCK = 2
    STATIONARY = 3
    FIELD_H = 4
    FIELD_V = 5
    IID = 6
    ROT3 = 7


def mix(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * M1) & MASK64
    z = ((z ^ (z >> 27)) * M2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, stream: int) -> int:
    return mix((seed & MASK64) ^ mix(int(stream) * GAMMA + SALT_STREAM))


def sample_key(key: int, i: int) -> int:
    return mix(key + (i + 1) * GAMMA)


def digit(skey: int, k: int) -> int:
    h = mix((skey ^ SALT_DIGIT) + (k + 1) * GAMMA)
    return ((h >> 32) * 3) >> 32


def coin(skey: int, y: int) -> int:
    return mix((skey ^ SALT_COIN) + ((y + 1) & MASK64) * GAMMA) >> 63


# numpy versions; uint64 arithmetic wraps modulo 2**64

def _u64(x) -> np.ndarray:
    return np.asarray(x).astype(np.uint64, copy=False)


def mix_np(z: np.ndarray) -> np.ndarray:
    z = _u64(z)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(M2)
    return z ^ (z >> np.uint64(31))


def sample_keys_np(key: int, start: int, stop: int) -> np.ndarray:
    i = np.arange(start, stop, dtype=np.uint64) + np.uint64(1)
    with np.errstate(over="ignore"):
        return mix_np(np.uint64(key) + i * np.uint64(GAMMA))


def digit_np(skeys: np.ndarray, k: int) -> np.ndarray:
    with np.errstate(over="ignore"):
        h = mix_np((skeys ^ np.uint64(SALT_DIGIT)) + np.uint64(((k + 1) * GAMMA) & MASK64))
    return ((h >> np.uint64(32)) * np.uint64(3)) >> np.uint64(32)


def coin_np(skeys: np.ndarray, y: np.ndarray) -> np.ndarray:
    y = _u64(y)
    with np.errstate(over="ignore"):
        h = mix_np((skeys ^ np.uint64(SALT_COIN)) + (y + np.uint64(1)) * np.uint64(GAMMA))
    return (h >> np.uint64(63)).astype(np.uint8)


def signed_to_u64(a) -> np.ndarray:
    """Two's complement view of signed coordinates."""
    return np.asarray(a, dtype=np.int64).view(np.uint64)
