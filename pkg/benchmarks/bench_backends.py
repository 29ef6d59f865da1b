#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Runs the three hot paths (matrix build, full sweep, windowed matching) on a
synthetic pair under both backends and prints wall times plus the speedup.
The two backends produce bit-identical results; only speed differs.

Usage:
    python benchmarks/bench_backends.py [--n-frames 800] [--dim 64] [--ds 40]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

import seqlcd as sl
from seqlcd.backend import available_backends, get_kernels
from seqlcd.diffmatrix import build_full


def time_call(fn, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-frames", type=int, default=800)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--ds", type=int, default=40)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled kernels not built; benchmarking the fallback only")

    cfg = sl.SynthConfig(
        n_frames=args.n_frames, dim=args.dim, condition_noise=0.1,
        viewpoint_shift=0.125, seed=7,
    )
    ref, query, _ = sl.generate_pair(cfg)
    base = sl.MatcherParams(ds=args.ds)
    accel = sl.AccelParams(base=base, k=10, num=16)

    tasks = {
        "distance matrix": lambda k: build_full(ref, query, kernels=k),
        "full sweep": lambda k: sl.match_all(ref, query, base, kernels=k),
        "windowed matcher": lambda k: sl.match_accelerated(ref, query, accel, kernels=k),
    }

    print(f"{args.n_frames} frames, dim {args.dim}, ds {args.ds}  (best of {args.repeats})")
    header = f"{'task':<18}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    results = {}
    for name, task in tasks.items():
        times = []
        outputs = []
        for b in backends:
            kern = get_kernels(b)
            times.append(time_call(lambda: task(kern), args.repeats))
            outputs.append(task(kern))
        row = f"{name:<18}" + "".join(f"{t:>11.3f}s" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:>9.1f}x"
            a, b = outputs
            if hasattr(a, "best_scores"):
                same = np.array_equal(a.best_scores, b.best_scores)
            else:
                same = np.array_equal(a.data, b.data)
            row += "  (bit-identical)" if same else "  (MISMATCH!)"
        print(row)
        results[name] = times
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
