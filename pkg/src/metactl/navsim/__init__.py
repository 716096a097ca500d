"""Deterministic 2D factory-navigation simulator (the managed system)."""
from .control import NavConfig, RobotState
from .grid import OccupancyGrid, load_grid, save_grid
from .kernels import IMPLEMENTATION
from .observers import PowerModel, energy_value, safety_value
from .planner import NoPathError, plan_path
from .world import ContingencySpec, NavSimulator, decode_design

__all__ = [
    "ContingencySpec", "IMPLEMENTATION", "NavConfig", "NavSimulator",
    "NoPathError", "OccupancyGrid", "PowerModel", "RobotState",
    "decode_design", "energy_value", "load_grid", "plan_path",
    "safety_value", "save_grid",
]
