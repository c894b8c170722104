#!/usr/bin/env python3
"""Benchmark: compiled kernel core vs the NumPy fallback.

Times the hot kernels in isolation (2-form evaluation, Gram areas, bump
frame pushforwards, comass ascent) and two end-to-end paths (deformed
area of the three-sheet fan, a small adversarial search on an unbalanced
book).  End-to-end runs swap the active backend by rebinding the
dispatch module's functions, so both backends drive identical code.

Usage:
    python benchmarks/bench_kernels.py [--quick]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from calmin import constructions as cn
from calmin import deform as df
from calmin import kernels
from calmin.kernels import pyfallback

try:
    from calmin.kernels import _core
except ImportError:
    _core = None

KERNEL_NAMES = (
    "eval2_values",
    "gram_values",
    "weighted_sum",
    "weighted_sqrt_sum",
    "displacements",
    "pushed_frames",
    "orthonormalize_2frames",
    "ascent_2form",
)


def use_backend(impl):
    for name in KERNEL_NAMES:
        setattr(kernels, name, getattr(impl, name))


def timeit(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def bench_kernels(impl, sizes):
    rng = np.random.default_rng(0)
    n = 4
    npts = sizes["nodes"]
    du = rng.standard_normal((npts, n))
    dv = rng.standard_normal((npts, n))
    x = rng.standard_normal((npts, n)) * 0.4
    w = rng.random(npts)
    t = rng.random(npts)
    rows = np.array([0, 1, 0, 2], dtype=np.int64)
    cols = np.array([2, 3, 3, 3], dtype=np.int64)
    vals = rng.standard_normal(4)
    centers = rng.standard_normal((2, n)) * 0.2
    radii = np.array([0.8, 1.1])
    dirs = rng.standard_normal((2, n))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    amps = np.array([0.05, -0.08])
    starts = rng.standard_normal((sizes["restarts"], n, 2))
    reps = sizes["repeats"]
    return {
        "eval2 batch": timeit(
            lambda: impl.eval2_values(du, dv, rows, cols, vals), reps
        ),
        "gram batch": timeit(lambda: impl.gram_values(du, dv), reps),
        "bump frames": timeit(
            lambda: impl.pushed_frames(x, du, dv, t, centers, radii, dirs, amps),
            reps,
        ),
        "weighted sqrt sum": timeit(
            lambda: impl.weighted_sqrt_sum(w, impl.gram_values(du, dv)), reps
        ),
        "comass ascent": timeit(
            lambda: impl.ascent_2form(
                rows, cols, vals, n, starts, 1e-6, 1e-10, 500, 0.5, 1e-9
            ),
            max(1, reps // 4),
        ),
    }


def bench_end_to_end(impl, sizes):
    use_backend(impl)
    fan = cn.build_sigma(3)
    mid = fan.edges[0].edge.point(0.5)
    bump = df.BumpField(tuple(mid), 0.42, (0.2, 0.9, 0.1, 0.3), 0.02)
    phi = df.make_diffeo([bump], fan)
    df.deformed_area(fan, phi, 1.0, 32)  # warm caches
    out = {
        "deformed area (fan, q32)": timeit(
            lambda: df.deformed_area(fan, phi, 1.0, 32), sizes["repeats"]
        )
    }
    book = cn.book_from_sectors([math.radians(a) for a in (100, 130, 130)])
    started = time.perf_counter()
    df.adversarial_search(book, sizes["budget"], seed=11)
    out[f"adversarial search (budget {sizes['budget']})"] = (
        time.perf_counter() - started
    )
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()
    sizes = (
        {"nodes": 2048, "restarts": 16, "repeats": 5, "budget": 100}
        if args.quick
        else {"nodes": 8192, "restarts": 64, "repeats": 20, "budget": 500}
    )
    results = {"python": bench_kernels(pyfallback, sizes)}
    results["python"].update(bench_end_to_end(pyfallback, sizes))
    if _core is not None:
        results["compiled"] = bench_kernels(_core, sizes)
        results["compiled"].update(bench_end_to_end(_core, sizes))
    use_backend(pyfallback if kernels.BACKEND == "python" else _core)

    names = list(results["python"])
    width = max(len(n) for n in names) + 2
    header = f"{'benchmark':<{width}}{'python':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name in names:
        py = results["python"][name]
        if _core is None:
            print(f"{name:<{width}}{py * 1e3:>10.3f}ms{'n/a':>12}{'n/a':>10}")
            continue
        cc = results["compiled"][name]
        print(
            f"{name:<{width}}{py * 1e3:>10.3f}ms{cc * 1e3:>10.3f}ms"
            f"{py / cc:>9.1f}x"
        )
    if _core is None:
        print("\ncompiled core not built; showing fallback only")


if __name__ == "__main__":
    main()
