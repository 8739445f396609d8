"""Backend selection for the hot sampling kernel.

The compiled extension ``threedot._ckernels`` is used when it imports;
otherwise the numpy implementation in ``threedot._pykernels`` is used.  Set
``THREEDOT_PURE_PYTHON=1`` to force the fallback.  Both produce identical
output for identical arguments.

Batches are cut into chunks and spread over ``THREEDOT_THREADS`` worker
threads (the compiled kernel releases the GIL).  Results do not depend on the
chunking because every sample draws from its own counter-indexed stream.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from types import ModuleType
from typing import Sequence

import numpy as np

from threedot import _pykernels

KMAX = _pykernels.KMAX
_CHUNK = 1 << 16


class SkeletonOverflow(RuntimeError):
    """A window was not covered by the first ``KMAX`` skeleton digits."""


def _load_compiled() -> ModuleType | None:
    try:
        from threedot import _ckernels
    except ImportError:
        return None
    return _ckernels


_compiled = _load_compiled()

if _compiled is not None and not os.environ.get("THREEDOT_PURE_PYTHON"):
    _impl: ModuleType = _compiled
    BACKEND = "cython"
else:
    _impl = _pykernels
    BACKEND = "python"


def available_backends() -> dict[str, ModuleType]:
    out = {"python": _pykernels}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


def worker_count() -> int:
    env = os.environ.get("THREEDOT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sample_windows(key: int, n: int, start: int, length: int,
                   prefix: Sequence[int] = (), stationary: bool = True,
                   backend: str | None = None, threads: int | None = None) -> np.ndarray:
    """Draw ``n`` windows ``(xi_start, ..., xi_{start+length-1})``.

    ``stationary=False`` samples the one-sided block process (``start >= 0``);
    otherwise the origin is placed by skeleton digits, the first
    ``len(prefix)`` of which are fixed.
    """
    if length < 1:
        raise ValueError("window length must be positive")
    if not stationary and start < 0:
        raise ValueError("the block process is indexed by nonnegative integers")
    impl = available_backends()[backend] if backend else _impl
    pre = np.ascontiguousarray(prefix, dtype=np.uint8)
    out = np.zeros((n, length), dtype=np.uint8)
    bounds = [(lo, min(lo + _CHUNK, n)) for lo in range(0, n, _CHUNK)]

    def run(b: tuple[int, int]) -> int:
        lo, hi = b
        return impl.sample_windows(key, lo, hi, start, length, pre, stationary, out[lo:hi])

    workers = min(threads or worker_count(), len(bounds)) or 1
    if workers == 1:
        overflow = sum(map(run, bounds))
    else:
        with ThreadPoolExecutor(workers) as pool:
            overflow = sum(pool.map(run, bounds))
    if overflow:
        raise SkeletonOverflow(f"{overflow} samples needed more than {KMAX} skeleton digits")
    return out
