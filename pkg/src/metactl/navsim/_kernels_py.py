"""Pure-Python fallback for the hot simulator kernels.

Mirrors ``_kernels.pyx`` operation for operation so both implementations
produce identical results; the compiled module is preferred at import time
when available.
"""
from __future__ import annotations

import heapq
import math

import numpy as np

SQRT2 = math.sqrt(2.0)

# 8-connected neighbourhood, fixed order for deterministic tie-breaking
_STEPS = ((-1, -1, SQRT2), (-1, 0, 1.0), (-1, 1, SQRT2),
          (0, -1, 1.0), (0, 1, 1.0),
          (1, -1, SQRT2), (1, 0, 1.0), (1, 1, SQRT2))


def astar_grid(blocked, sr, sc, gr, gc):
    """Shortest 8-connected path over a boolean blocked grid.

    Returns an (N, 2) int32 array of (row, col) cells from start to goal
    inclusive, or None when no path exists. Octile-distance heuristic;
    ties broken by insertion order, so the result is deterministic.
    """
    rows, cols = blocked.shape
    if blocked[sr, sc] or blocked[gr, gc]:
        return None
    n = rows * cols
    g = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    closed = np.zeros(n, dtype=bool)
    start = sr * cols + sc
    goal = gr * cols + gc
    g[start] = 0.0
    counter = 0
    heap = [(_octile(sr, sc, gr, gc), 0, start)]
    while heap:
        _, _, node = heapq.heappop(heap)
        if closed[node]:
            continue
        if node == goal:
            break
        closed[node] = True
        r, c = divmod(node, cols)
        gn = g[node]
        for dr, dc, cost in _STEPS:
            nr, nc = r + dr, c + dc
            if nr < 0 or nr >= rows or nc < 0 or nc >= cols:
                continue
            if blocked[nr, nc]:
                continue
            nb = nr * cols + nc
            ng = gn + cost
            if ng < g[nb] - 1e-12:
                g[nb] = ng
                parent[nb] = node
                counter += 1
                heapq.heappush(heap, (ng + _octile(nr, nc, gr, gc),
                                      counter, nb))
    if not np.isfinite(g[goal]):
        return None
    path = []
    node = goal
    while node != -1:
        path.append(divmod(node, cols))
        node = parent[node]
    path.reverse()
    return np.array(path, dtype=np.int32)


def _octile(r, c, gr, gc):
    dr = abs(r - gr)
    dc = abs(c - gc)
    lo, hi = (dr, dc) if dr < dc else (dc, dr)
    return hi + (SQRT2 - 1.0) * lo


def cone_min_distance(dx, dy, heading, half_angle):
    """Minimum distance to any point (dx, dy relative to the robot) whose
    bearing lies within +-half_angle of the heading. inf if none."""
    cos_h = math.cos(heading)
    sin_h = math.sin(heading)
    cos_half = math.cos(half_angle)
    best = math.inf
    for i in range(len(dx)):
        x = dx[i]
        y = dy[i]
        dist = math.sqrt(x * x + y * y)
        if dist <= 1e-9:
            return 0.0
        # forward component must exceed cos(half_angle) of the distance
        fwd = x * cos_h + y * sin_h
        if fwd >= cos_half * dist and dist < best:
            best = dist
    return best


def segment_clear(ax, ay, bx, by, clearance, origin_x, origin_y,
                  resolution, inflation):
    """True when every sample along the segment (one per half cell) stays in
    bounds with at least ``inflation`` clearance."""
    length = float(np.hypot(bx - ax, by - ay))
    steps = max(2, int(np.ceil(length / (resolution * 0.5))))
    t = np.linspace(0.0, 1.0, steps + 1)
    cols = np.floor((ax + (bx - ax) * t - origin_x) / resolution)
    rows = np.floor((ay + (by - ay) * t - origin_y) / resolution)
    cols = cols.astype(np.intp)
    rows = rows.astype(np.intp)
    height, width = clearance.shape
    out = (rows < 0) | (rows >= height) | (cols < 0) | (cols >= width)
    if out.any():
        return False
    return bool((clearance[rows, cols] >= inflation).all())
