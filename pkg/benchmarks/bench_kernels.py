#!/usr/bin/env python3
"""Compare the compiled simulation kernels against the pure-Python fallback.

Runs the hot kernels (grid A*, the frontal-cone distance scan, and the
path-smoothing segment clearance check) over the shipped factory grid and
reports per-call timings for both backends.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import math
import timeit

import numpy as np

from metactl.navsim import factory, kernels
from metactl.navsim import _kernels_py


def _backends():
    backends = {"python": _kernels_py}
    if kernels.IMPLEMENTATION == "cython":
        from metactl.navsim import _kernels
        backends["cython"] = _kernels
    return backends


def bench_astar(repeat):
    grid = factory.default_grid()
    clearance = grid.clearance_map()
    blocked = np.ascontiguousarray((clearance < 0.5).astype(np.uint8))
    sr, sc = grid.world_to_cell(*factory.MISSION_START)
    gr, gc = grid.world_to_cell(*factory.MISSION_GOAL)
    results = {}
    for name, impl in _backends().items():
        cells = impl.astar_grid(blocked, sr, sc, gr, gc)
        assert cells is not None and len(cells) > 100
        seconds = timeit.timeit(
            lambda: impl.astar_grid(blocked, sr, sc, gr, gc), number=repeat)
        results[name] = seconds / repeat
    return "astar_grid (200x160 factory, r=0.5)", results


def bench_cone(repeat):
    rng = np.random.default_rng(0)
    dx = np.ascontiguousarray(rng.uniform(-1.6, 1.6, 400))
    dy = np.ascontiguousarray(rng.uniform(-1.6, 1.6, 400))
    half_angle = math.radians(30.0)
    results = {}
    for name, impl in _backends().items():
        seconds = timeit.timeit(
            lambda: impl.cone_min_distance(dx, dy, 0.7, half_angle),
            number=repeat * 100)
        results[name] = seconds / (repeat * 100)
    return "cone_min_distance (400 points)", results


def bench_segment(repeat):
    grid = factory.default_grid()
    clearance = grid.clearance_map()
    rng = np.random.default_rng(1)
    segments = rng.uniform([-9, -7, -9, -7], [9, 7, 9, 7], (200, 4))
    results = {}
    for name, impl in _backends().items():
        def run(impl=impl):
            for ax, ay, bx, by in segments:
                impl.segment_clear(ax, ay, bx, by, clearance,
                                   grid.origin_x, grid.origin_y,
                                   grid.resolution, 0.5)
        seconds = timeit.timeit(run, number=repeat)
        results[name] = seconds / (repeat * len(segments))
    return "segment_clear (200 random segments)", results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=20,
                        help="A* repetitions per backend (default 20)")
    args = parser.parse_args()

    print(f"active backend: {kernels.IMPLEMENTATION}")
    if kernels.IMPLEMENTATION != "cython":
        print("compiled extension not built; benchmarking python only")
    for bench in (bench_astar, bench_cone, bench_segment):
        label, results = bench(args.repeat)
        print(f"\n{label}")
        for name, per_call in sorted(results.items()):
            print(f"  {name:>7}: {per_call * 1e3:9.3f} ms/call")
        if len(results) == 2:
            speedup = results["python"] / results["cython"]
            print(f"  speedup: {speedup:8.1f}x")


if __name__ == "__main__":
    main()
