"""Occupancy grid with clearance maps and the plain-text grid file format.

File format: a header line ``width height resolution origin_x origin_y``
followed by one text row per grid row, ``#`` occupied and ``.`` free. File
rows run top to bottom; internally row index 0 is the bottom row (y grows
with the row index).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage


@dataclass
class OccupancyGrid:
    width: int
    height: int
    resolution: float
    origin_x: float
    origin_y: float
    occupied: np.ndarray  # bool, shape (height, width), row 0 at the bottom
    _clearance: np.ndarray = field(default=None, repr=False, compare=False)

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(self.width, self.height, self.resolution,
                             self.origin_x, self.origin_y,
                             self.occupied.copy())

    # -- coordinates ---------------------------------------------------------

    def world_to_cell(self, x: float, y: float):
        col = math.floor((x - self.origin_x) / self.resolution)
        row = math.floor((y - self.origin_y) / self.resolution)
        return row, col

    def cell_to_world(self, row: int, col: int):
        x = self.origin_x + (col + 0.5) * self.resolution
        y = self.origin_y + (row + 0.5) * self.resolution
        return x, y

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.height and 0 <= col < self.width

    # -- occupancy -----------------------------------------------------------

    def set_disc(self, cx: float, cy: float, radius: float):
        """Mark all cells whose centers lie within the disc as occupied."""
        r0, c0 = self.world_to_cell(cx - radius, cy - radius)
        r1, c1 = self.world_to_cell(cx + radius, cy + radius)
        for row in range(max(r0, 0), min(r1 + 1, self.height)):
            for col in range(max(c0, 0), min(c1 + 1, self.width)):
                px, py = self.cell_to_world(row, col)
                if (px - cx) ** 2 + (py - cy) ** 2 <= radius ** 2:
                    self.occupied[row, col] = True
        self._clearance = None

    def set_rect(self, x0: float, y0: float, x1: float, y1: float):
        """Mark an axis-aligned rectangle (world coords) as occupied."""
        r0, c0 = self.world_to_cell(x0, y0)
        r1, c1 = self.world_to_cell(x1, y1)
        self.occupied[max(r0, 0):min(r1 + 1, self.height),
                      max(c0, 0):min(c1 + 1, self.width)] = True
        self._clearance = None

    def clearance_map(self) -> np.ndarray:
        """Distance (m) from each cell center to the nearest occupied cell
        center; 0 inside obstacles. Cached until occupancy changes."""
        if self._clearance is None:
            free = ~self.occupied
            self._clearance = (
                ndimage.distance_transform_edt(free) * self.resolution)
        return self._clearance

    def clearance_at(self, x: float, y: float) -> float:
        row, col = self.world_to_cell(x, y)
        if not self.in_bounds(row, col):
            return 0.0
        return float(self.clearance_map()[row, col])

    def occupied_points(self) -> np.ndarray:
        """(N, 2) world coordinates of occupied cell centers."""
        rows, cols = np.nonzero(self.occupied)
        xs = self.origin_x + (cols + 0.5) * self.resolution
        ys = self.origin_y + (rows + 0.5) * self.resolution
        return np.column_stack([xs, ys])


def save_grid(grid: OccupancyGrid, path):
    lines = [f"{grid.width} {grid.height} {grid.resolution:g} "
             f"{grid.origin_x:g} {grid.origin_y:g}"]
    for row in range(grid.height - 1, -1, -1):
        lines.append("".join("#" if cell else "."
                             for cell in grid.occupied[row]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_grid(path) -> OccupancyGrid:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        width, height = int(header[0]), int(header[1])
        resolution = float(header[2])
        origin_x, origin_y = float(header[3]), float(header[4])
        occupied = np.zeros((height, width), dtype=bool)
        for i in range(height):
            line = fh.readline().rstrip("\n")
            occupied[height - 1 - i] = [ch == "#" for ch in line]
    return OccupancyGrid(width, height, resolution, origin_x, origin_y,
                         occupied)
