"""The factory floor used by the navigation experiments.

20 m x 16 m at 0.1 m resolution. A row of workstation blocks splits the
floor into a south lane (mission start) and a north lane (mission goal).
Two passages connect the lanes:

* a central corridor with a staggered pair of shelving teeth (a chicane)
  whose 1.2 m gaps only admit tightly-inflated plans, and
* a wide western corridor that any inflation radius can use.

Aggressive configurations thread the chicane and shave mission time at the
cost of close quarters; conservative ones take the long way around. The
layout ships as ``data/factory.grid``; this module is the generator for that
file and the accessor used by the harness.
"""
from __future__ import annotations

from importlib import resources

import numpy as np

from .grid import OccupancyGrid, load_grid, save_grid

MISSION_START = (-1.5, -6.5)
MISSION_GOAL = (8.5, 6.5)

_WALL = 0.2  # m, boundary wall thickness

# (x0, y0, x1, y1) workstation blocks, world coordinates
_BLOCKS = (
    (-5.6, -3.4, -2.1, 4.0),    # west block (west corridor beyond it)
    (3.6, -3.4, 10.0, 4.0),     # east block, rooted in the east wall
    (-1.0, -3.4, 3.6, -2.2),    # chicane tooth 1 (from the east block)
    (-2.1, -1.1, 2.4, 0.1),     # chicane tooth 2 (from the west block)
    (-1.0, 1.2, 3.6, 2.4),      # chicane tooth 3 (from the east block)
)


def build_factory_grid() -> OccupancyGrid:
    grid = OccupancyGrid(width=200, height=160, resolution=0.1,
                         origin_x=-10.0, origin_y=-8.0,
                         occupied=np.zeros((160, 200), dtype=bool))
    grid.set_rect(-10.0, -8.0, 10.0, -8.0 + _WALL)
    grid.set_rect(-10.0, 8.0 - _WALL, 10.0, 8.0)
    grid.set_rect(-10.0, -8.0, -10.0 + _WALL, 8.0)
    grid.set_rect(10.0 - _WALL, -8.0, 10.0, 8.0)
    for block in _BLOCKS:
        grid.set_rect(*block)
    return grid


def default_grid() -> OccupancyGrid:
    """The shipped factory grid (fresh copy, safe to mutate)."""
    return _shipped().copy()


_CACHE = None


def _shipped() -> OccupancyGrid:
    global _CACHE
    if _CACHE is None:
        path = resources.files("metactl.data") / "factory.grid"
        with resources.as_file(path) as real_path:
            _CACHE = load_grid(real_path)
    return _CACHE


def regenerate(path):
    """Rebuild the grid file from the layout constants (dev utility)."""
    save_grid(build_factory_grid(), path)
