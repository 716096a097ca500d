# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulator kernels: grid A*, the forward-cone obstacle scan, and
the path-smoothing segment clearance check.

Must stay operation-for-operation identical to ``_kernels_py.py``; the tests
compare both implementations on the same inputs.
"""
import heapq
import math

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, ceil, cos, fabs, floor, hypot, sin, sqrt

cnp.import_array()

SQRT2 = math.sqrt(2.0)

cdef double _SQRT2 = sqrt(2.0)

cdef int[8] _DR = [-1, -1, -1, 0, 0, 1, 1, 1]
cdef int[8] _DC = [-1, 0, 1, -1, 1, -1, 0, 1]


cdef inline double _octile(int r, int c, int gr, int gc) nogil:
    cdef double dr = fabs(<double>(r - gr))
    cdef double dc = fabs(<double>(c - gc))
    if dr < dc:
        return dc + (_SQRT2 - 1.0) * dr
    return dr + (_SQRT2 - 1.0) * dc


def astar_grid(cnp.uint8_t[:, :] blocked, int sr, int sc, int gr, int gc):
    """Shortest 8-connected path; see the Python fallback for the contract."""
    cdef int rows = blocked.shape[0]
    cdef int cols = blocked.shape[1]
    if blocked[sr, sc] or blocked[gr, gc]:
        return None
    cdef int n = rows * cols
    g_arr = np.full(n, np.inf)
    parent_arr = np.full(n, -1, dtype=np.int64)
    closed_arr = np.zeros(n, dtype=np.uint8)
    cdef double[:] g = g_arr
    cdef long long[:] parent = parent_arr
    cdef cnp.uint8_t[:] closed = closed_arr
    cdef int start = sr * cols + sc
    cdef int goal = gr * cols + gc
    g[start] = 0.0
    cdef long counter = 0
    heap = [(_octile(sr, sc, gr, gc), 0, start)]
    cdef int node, r, c, nr, nc, nb, k
    cdef double gn, ng, step_cost
    while heap:
        node = <int>(heapq.heappop(heap)[2])
        if closed[node]:
            continue
        if node == goal:
            break
        closed[node] = 1
        r = node // cols
        c = node - r * cols
        gn = g[node]
        for k in range(8):
            nr = r + _DR[k]
            nc = c + _DC[k]
            if nr < 0 or nr >= rows or nc < 0 or nc >= cols:
                continue
            if blocked[nr, nc]:
                continue
            nb = nr * cols + nc
            step_cost = _SQRT2 if (_DR[k] != 0 and _DC[k] != 0) else 1.0
            ng = gn + step_cost
            if ng < g[nb] - 1e-12:
                g[nb] = ng
                parent[nb] = node
                counter += 1
                heapq.heappush(heap, (ng + _octile(nr, nc, gr, gc),
                                      counter, nb))
    if not np.isfinite(g_arr[goal]):
        return None
    path = []
    cdef long long cur = goal
    while cur != -1:
        path.append((cur // cols, cur % cols))
        cur = parent[cur]
    path.reverse()
    return np.array(path, dtype=np.int32)


def cone_min_distance(cnp.float64_t[:] dx, cnp.float64_t[:] dy,
                      double heading, double half_angle):
    """Minimum distance to a relative point within the forward cone."""
    cdef double cos_h = cos(heading)
    cdef double sin_h = sin(heading)
    cdef double cos_half = cos(half_angle)
    cdef double best = INFINITY
    cdef double x, y, dist, fwd
    cdef Py_ssize_t i
    for i in range(dx.shape[0]):
        x = dx[i]
        y = dy[i]
        dist = sqrt(x * x + y * y)
        if dist <= 1e-9:
            return 0.0
        fwd = x * cos_h + y * sin_h
        if fwd >= cos_half * dist and dist < best:
            best = dist
    return best


def segment_clear(double ax, double ay, double bx, double by,
                  double[:, ::1] clearance, double origin_x, double origin_y,
                  double resolution, double inflation):
    """True when every sample along the segment (one per half cell) stays in
    bounds with at least ``inflation`` clearance."""
    cdef double length = hypot(bx - ax, by - ay)
    cdef long steps = <long>ceil(length / (resolution * 0.5))
    if steps < 2:
        steps = 2
    cdef double step = 1.0 / steps
    cdef Py_ssize_t rows = clearance.shape[0]
    cdef Py_ssize_t cols = clearance.shape[1]
    cdef double t, x, y
    cdef long row, col
    cdef long i
    for i in range(steps + 1):
        t = 1.0 if i == steps else i * step
        x = ax + (bx - ax) * t
        y = ay + (by - ay) * t
        col = <long>floor((x - origin_x) / resolution)
        row = <long>floor((y - origin_y) / resolution)
        if row < 0 or row >= rows or col < 0 or col >= cols:
            return False
        if clearance[row, col] < inflation:
            return False
    return True
