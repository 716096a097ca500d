"""Grid path planning: inflated A* search plus clearance-preserving smoothing."""
from __future__ import annotations

from collections import deque

import numpy as np

from . import kernels
from .grid import OccupancyGrid


ESCAPE_CLEARANCE = 0.48  # m, body radius + margin; traversable during escape


class NoPathError(Exception):
    """Inflation closed every corridor between start and goal."""


def plan_path(grid: OccupancyGrid, start, goal, inflation_radius: float,
              snap_radius: float = 0.0) -> np.ndarray:
    """Shortest 8-connected path keeping >= inflation_radius clearance.

    Returns an (N, 2) array of world waypoints, smoothed to a polyline whose
    segments keep the same clearance. ``snap_radius`` > 0 allows a start that
    lies inside the inflated zone: an escape prefix is prepended, the
    shortest body-passable route (within that travel radius) to the nearest
    cell from which planning at the full inflation radius is possible.
    """
    clearance = grid.clearance_map()
    blocked = np.ascontiguousarray(
        (clearance < inflation_radius).astype(np.uint8))
    sr, sc = grid.world_to_cell(*start)
    gr, gc = grid.world_to_cell(*goal)
    if not (grid.in_bounds(sr, sc) and grid.in_bounds(gr, gc)):
        raise NoPathError("start or goal outside the grid")
    prefix = []
    if blocked[sr, sc] and snap_radius > 0:
        escape = _escape_route(blocked, clearance, grid, sr, sc, snap_radius,
                               (gr, gc))
        if escape is None:
            raise NoPathError("start blocked after inflation")
        prefix = escape[:-1]
        sr, sc = escape[-1]
    if blocked[sr, sc] or blocked[gr, gc]:
        raise NoPathError("start or goal blocked after inflation")
    cells = kernels.astar_grid(blocked, sr, sc, gr, gc)
    if cells is None:
        raise NoPathError("no corridor survives the inflation radius")
    if prefix:
        cells = np.vstack([np.array(prefix, dtype=cells.dtype), cells])
    points = np.column_stack([
        grid.origin_x + (cells[:, 1] + 0.5) * grid.resolution,
        grid.origin_y + (cells[:, 0] + 0.5) * grid.resolution,
    ])
    return _smooth(points, grid, clearance, inflation_radius)


def path_length(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    return float(np.sum(np.linalg.norm(np.diff(points, axis=0), axis=1)))


def point_along(points: np.ndarray, distance: float) -> np.ndarray:
    """World point at the given arc length from the start of the polyline."""
    if len(points) == 1 or distance <= 0:
        return points[0]
    remaining = distance
    for a, b in zip(points[:-1], points[1:]):
        seg = float(np.linalg.norm(b - a))
        if remaining <= seg and seg > 0:
            return a + (b - a) * (remaining / seg)
        remaining -= seg
    return points[-1]


def _escape_route(blocked, clearance, grid, row, col, radius, goal_cell):
    """Breadth-first route through body-passable cells from a start inside
    the inflated zone to the nearest plannable cell that is connected to the
    goal at the full inflation radius; None if unreachable within ``radius``
    of travel. Below the body-passable clearance the route may only climb
    the clearance gradient, so a start pinned near a corner always backs
    away from it rather than hugging it."""
    from scipy import ndimage

    labels, _ = ndimage.label(blocked == 0, structure=np.ones((3, 3)))
    goal_label = labels[goal_cell]
    if goal_label == 0:
        return None
    max_steps = int(np.ceil(radius / grid.resolution))
    parents = {(row, col): None}
    queue = deque([((row, col), 0)])
    while queue:
        (r, c), steps = queue.popleft()
        if labels[r, c] == goal_label:
            route = []
            cell = (r, c)
            while cell is not None:
                route.append(cell)
                cell = parents[cell]
            return route[::-1]
        if steps >= max_steps:
            continue
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == 0 and dc == 0:
                    continue
                nxt = (r + dr, c + dc)
                if nxt in parents or not grid.in_bounds(*nxt):
                    continue
                here = float(clearance[r, c])
                if clearance[nxt] < min(ESCAPE_CLEARANCE, here):
                    continue
                parents[nxt] = (r, c)
                queue.append((nxt, steps + 1))
    return None


def _smooth(points, grid, clearance, inflation_radius):
    """Greedy line-of-sight shortcutting; a shortcut is taken only when the
    whole segment keeps the required clearance."""
    if len(points) <= 2:
        return points
    out = [points[0]]
    i = 0
    n = len(points)
    while i < n - 1:
        j = n - 1
        while j > i + 1:
            if _segment_clear(points[i], points[j], grid, clearance,
                              inflation_radius):
                break
            j -= 1
        out.append(points[j])
        i = j
    return np.array(out)


def _segment_clear(a, b, grid, clearance, inflation_radius):
    return kernels.segment_clear(float(a[0]), float(a[1]),
                                 float(b[0]), float(b[1]), clearance,
                                 grid.origin_x, grid.origin_y,
                                 grid.resolution, inflation_radius)
