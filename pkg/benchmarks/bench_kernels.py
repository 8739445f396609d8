"""Compare the compiled and pure-Python window samplers.

Usage: python benchmarks/bench_kernels.py [-n 200000] [--length 16] [--repeat 3]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from threedot import kernels


def best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-n", type=int, default=200_000, help="windows per run")
    ap.add_argument("--length", type=int, default=16)
    ap.add_argument("--start", type=int, default=-8)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=12345)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; timing the Python backend only")
    results = {}
    for name in backends:
        def run(name=name):
            return kernels.sample_windows(args.seed, args.n, args.start, args.length,
                                          backend=name, threads=args.threads)
        results[name] = (best_time(run, args.repeat), run())
    ref = None
    print(f"{'backend':<8} {'seconds':>9} {'windows/s':>12}")
    for name, (sec, out) in results.items():
        print(f"{name:<8} {sec:9.3f} {args.n / sec:12.0f}")
        if ref is None:
            ref = out
        elif not np.array_equal(ref, out):
            print(f"mismatch: {name} output differs")
            return 1
    if len(results) == 2:
        t = {k: v[0] for k, v in results.items()}
        print(f"speedup: {t['python'] / t['cython']:.1f}x (outputs identical)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
