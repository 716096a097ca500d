"""Kernel selection: compiled extension when built, pure Python otherwise.

``IMPLEMENTATION`` is "cython" or "python"; ``benchmarks/bench_kernels.py``
compares the two.
"""
from __future__ import annotations

try:
    from . import _kernels as _impl
    IMPLEMENTATION = "cython"
except ImportError:  # pragma: no cover - depends on the build environment
    from . import _kernels_py as _impl
    IMPLEMENTATION = "python"

from . import _kernels_py as python_impl

astar_grid = _impl.astar_grid
cone_min_distance = _impl.cone_min_distance
segment_clear = _impl.segment_clear
