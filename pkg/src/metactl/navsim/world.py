"""The managed system: a deterministic 2D factory-navigation simulation.

Explicit-Euler stepping at 0.05 s, replanning at the planner frequency,
unexpected-obstacle spawning/sensing, safety/energy observers at 10 Hz, and
configuration swaps named after the generated navigation designs.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from ..mapek import Diagnostic
from . import planner
from .control import GOAL_TOLERANCE, NavConfig, RobotState, control
from .grid import OccupancyGrid
from .observers import (
    SAFETY_CONE_HALF_ANGLE,
    PowerModel,
    energy_value,
    safety_value,
)
from .kernels import cone_min_distance

SIM_DT = 0.05            # s, integrator step
OBSERVER_PERIOD = 0.1    # s, 10 Hz diagnostics
SENSOR_RADIUS = 3.0      # m
SPAWN_DISTANCE = 4.0     # m, obstacle appears when the robot gets this close
OBSTACLE_RADIUS = 0.3    # m
FOOTPRINT_RADIUS = 0.4   # m
SAFETY_SCAN_RADIUS = 1.6  # m, beyond the largest braking distance + footprint
REPLAN_GRACE = 8.0       # s of continuous replan failure before giving up
RECONFIG_LATENCY = 0.5   # s between a reconfiguration command and its effect
ESCAPE_RADIUS = 12.0     # m, escape-prefix travel budget when replanning
                         # from inside the inflated margin

OUTCOME_ACTIVE = "active"
OUTCOME_COMPLETE = "complete"
OUTCOME_COLLISION = "collision"
OUTCOME_NO_PATH = "no_path"

CLUTTER_LEVELS = ("none", "low", "medium", "high")
# obstacles per clutter level as fractions of the initial path length
CLUTTER_FRACTIONS = {
    "none": (),
    "low": (0.5,),
    "medium": (0.25, 0.75),
    "high": (0.25, 0.5, 0.75),
}
POWER_LEVELS = (0.0, 0.10, 0.30, 0.50)


class UnknownDesignError(Exception):
    """Configuration swap names a design the simulator cannot decode."""


_NAV_DESIGN_RE = re.compile(
    r"^f_nav_v(?P<v>[0-9.]+)_a(?P<a>[0-9.]+)_r(?P<r>[0-9.]+)$")


def decode_design(design_name: str) -> NavConfig:
    m = _NAV_DESIGN_RE.match(design_name)
    if m is None:
        raise UnknownDesignError(design_name)
    return NavConfig(max_vel=float(m.group("v")),
                     accel_lim=float(m.group("a")),
                     inflation_radius=float(m.group("r")))


@dataclass(frozen=True)
class ContingencySpec:
    clutter: str = "none"
    power_increase: float = 0.0

    def __post_init__(self):
        if self.clutter not in CLUTTER_LEVELS:
            raise ValueError(f"bad clutter level {self.clutter!r}")
        if not 0.0 <= self.power_increase <= 1.0:
            raise ValueError("power increase outside [0,1]")


@dataclass
class Obstacle:
    center: tuple
    radius: float
    spawned: bool = False
    sensed: bool = False
    spawn_time: Optional[float] = None


@dataclass
class TrajectorySample:
    t: float
    x: float
    y: float
    v: float
    safety: float
    energy: float
    design: str


class NavSimulator:
    """Single-owner stepped simulation; emits diagnostics for the loop."""

    def __init__(self, static_grid: OccupancyGrid, start, goal,
                 design_name: str, contingency: ContingencySpec,
                 seed: int = 0, controller_frequency: Optional[float] = None,
                 power_model: PowerModel = PowerModel()):
        self.static_grid = static_grid
        self.planning_grid = static_grid.copy()
        self.start = tuple(start)
        self.goal = tuple(goal)
        self.contingency = contingency
        self.power_model = power_model
        self.rng = np.random.default_rng(seed)

        self.design_name = design_name
        self.cfg = decode_design(design_name)
        if controller_frequency is not None:
            self.cfg = NavConfig(
                max_vel=self.cfg.max_vel, accel_lim=self.cfg.accel_lim,
                inflation_radius=self.cfg.inflation_radius,
                controller_frequency=controller_frequency,
                planner_frequency=self.cfg.planner_frequency)
        self.pending_cfg: Optional[tuple] = None  # (name, NavConfig, ready_at)

        heading = math.atan2(goal[1] - start[1], goal[0] - start[0])
        self.robot = RobotState(x=start[0], y=start[1], heading=heading,
                                speed=0.0)
        self.clock = 0.0
        self.accel = 0.0
        self.outcome = OUTCOME_ACTIVE
        self.path: Optional[np.ndarray] = None
        self.path_index = 0
        self.replan_needed = True
        self._next_replan = 0.0
        self._next_observation = OBSERVER_PERIOD
        self._plan_fail_since = None
        self.obstacles: list = []
        self._obstacle_tree: Optional[cKDTree] = None
        self._obstacle_points: Optional[np.ndarray] = None
        self.diagnostics: list = []
        self.trajectory: list = []
        self.reconfig_log: list = []

        self._replan(initial=True)
        self._place_obstacles()
        self._rebuild_obstacle_index()

    # -- setup ----------------------------------------------------------------

    def _place_obstacles(self):
        """Discs dropped on the initial path; lateral jitter keeps seeds
        distinct while the geometry stays identical across modes."""
        fractions = CLUTTER_FRACTIONS[self.contingency.clutter]
        if not fractions or self.path is None:
            return
        total = planner.path_length(self.path)
        for fraction in fractions:
            along = fraction + float(self.rng.uniform(-0.03, 0.03))
            point = planner.point_along(self.path, along * total)
            ahead = planner.point_along(self.path, along * total + 0.2)
            tangent = ahead - point
            norm = float(np.linalg.norm(tangent))
            if norm > 0:
                normal = np.array([-tangent[1], tangent[0]]) / norm
            else:
                normal = np.array([0.0, 1.0])
            lateral = float(self.rng.uniform(-0.25, 0.25))
            center = point + normal * lateral
            self.obstacles.append(Obstacle(center=(float(center[0]),
                                                   float(center[1])),
                                           radius=OBSTACLE_RADIUS))

    # -- configuration --------------------------------------------------------

    def apply_configuration(self, design_name: str) -> bool:
        """Swap the navigation configuration after the actuation latency."""
        cfg = decode_design(design_name)  # raises UnknownDesignError
        self.pending_cfg = (design_name, cfg, self.clock + RECONFIG_LATENCY)
        self.reconfig_log.append((self.clock, self.design_name, design_name))
        return True

    def _activate_pending_cfg(self):
        if self.pending_cfg is None:
            return
        design_name, cfg, ready = self.pending_cfg
        if self.clock + 1e-9 < ready:
            return
        if abs(cfg.inflation_radius - self.cfg.inflation_radius) > 1e-12:
            self.replan_needed = True
        self.design_name = design_name
        self.cfg = cfg
        self.pending_cfg = None

    # -- sensing and planning ---------------------------------------------------

    def _update_obstacles(self):
        changed = False
        rx, ry = self.robot.x, self.robot.y
        for obstacle in self.obstacles:
            d = math.hypot(obstacle.center[0] - rx, obstacle.center[1] - ry)
            if not obstacle.spawned and d <= SPAWN_DISTANCE:
                obstacle.spawned = True
                obstacle.spawn_time = self.clock
            if (obstacle.spawned and not obstacle.sensed
                    and d <= SENSOR_RADIUS
                    and self._line_of_sight(rx, ry, *obstacle.center)):
                obstacle.sensed = True
                self.planning_grid.set_disc(*obstacle.center, obstacle.radius)
                changed = True
        if changed:
            self.replan_needed = True
            self._rebuild_obstacle_index()

    def _line_of_sight(self, x0, y0, x1, y1) -> bool:
        """True when no static wall interrupts the straight sensor ray."""
        length = math.hypot(x1 - x0, y1 - y0)
        steps = max(1, int(length / (self.static_grid.resolution * 0.5)))
        for i in range(1, steps):
            t = i / steps
            row, col = self.static_grid.world_to_cell(
                x0 + (x1 - x0) * t, y0 + (y1 - y0) * t)
            if not self.static_grid.in_bounds(row, col):
                return False
            if self.static_grid.occupied[row, col]:
                return False
        return True

    def _rebuild_obstacle_index(self):
        points = self.planning_grid.occupied_points()
        self._obstacle_points = points
        self._obstacle_tree = cKDTree(points) if len(points) else None

    def _replan(self, initial=False):
        try:
            self.path = planner.plan_path(
                self.planning_grid, (self.robot.x, self.robot.y), self.goal,
                self.cfg.inflation_radius,
                snap_radius=0.0 if initial else ESCAPE_RADIUS)
            self.path_index = 0
            self.replan_needed = False
            self._plan_fail_since = None
        except planner.NoPathError:
            # mid-mission failures get a grace period: keep following the
            # current path (a squeeze in progress usually frees the start
            # cell again); give up only if failures persist
            if initial or self.path is None:
                self.outcome = OUTCOME_NO_PATH
                return
            if self._plan_fail_since is None:
                self._plan_fail_since = self.clock
            elif self.clock - self._plan_fail_since > REPLAN_GRACE:
                self.outcome = OUTCOME_NO_PATH

    # -- observers -----------------------------------------------------------

    def frontal_clearance(self) -> float:
        """Distance from the robot body to the nearest sensed obstacle within
        the forward cone; inf when the cone is clear."""
        if self._obstacle_tree is None:
            return math.inf
        # omnidirectional clearance bounds the cone distance from below, so
        # far from everything the KD-tree query can be skipped entirely
        if self.planning_grid.clearance_at(
                self.robot.x, self.robot.y) > SAFETY_SCAN_RADIUS:
            return math.inf
        idx = self._obstacle_tree.query_ball_point(
            [self.robot.x, self.robot.y], SAFETY_SCAN_RADIUS)
        if not idx:
            return math.inf
        pts = self._obstacle_points[idx]
        dist = cone_min_distance(
            np.ascontiguousarray(pts[:, 0] - self.robot.x),
            np.ascontiguousarray(pts[:, 1] - self.robot.y),
            self.robot.heading, SAFETY_CONE_HALF_ANGLE)
        if not math.isfinite(dist):
            return math.inf
        return max(dist - FOOTPRINT_RADIUS, 0.0)

    def _away_direction(self):
        """Unit vector pointing from the nearest obstacle toward the robot."""
        if self._obstacle_tree is None:
            return None
        dist, idx = self._obstacle_tree.query([self.robot.x, self.robot.y])
        if not math.isfinite(dist) or dist <= 1e-9:
            return None
        nearest = self._obstacle_points[idx]
        return ((self.robot.x - nearest[0]) / dist,
                (self.robot.y - nearest[1]) / dist)

    def observe_safety(self) -> float:
        return safety_value(self.frontal_clearance(), self.robot.speed,
                            self.cfg.accel_lim)

    def observe_energy(self) -> float:
        return energy_value(self.robot.speed, self.accel,
                            self.cfg.controller_frequency,
                            self.contingency.power_increase,
                            self.power_model)

    # -- stepping --------------------------------------------------------------

    def mission_active(self) -> bool:
        return self.outcome == OUTCOME_ACTIVE

    def goal_distance(self) -> float:
        return math.hypot(self.goal[0] - self.robot.x,
                          self.goal[1] - self.robot.y)

    def step(self, dt: float = SIM_DT) -> list:
        """Advance one step; returns diagnostics emitted during it."""
        if not self.mission_active():
            return []
        emitted = []
        self._activate_pending_cfg()
        self._update_obstacles()
        if self.replan_needed and self.clock >= self._next_replan:
            self._replan()
            self._next_replan = self.clock + 1.0 / self.cfg.planner_frequency
            if not self.mission_active():
                return []

        frontal = self.frontal_clearance()
        side = self.planning_grid.clearance_at(
            self.robot.x, self.robot.y) - FOOTPRINT_RADIUS
        away = self._away_direction() \
            if side < self.cfg.inflation_radius else None
        speed, accel, turn, self.path_index = control(
            self.robot, self.path, self.cfg, dt, self.goal_distance(),
            frontal_clearance=frontal, side_clearance=side,
            away_direction=away, path_index=self.path_index)
        self.robot.heading = _wrap(self.robot.heading + turn * dt)
        self.robot.speed = speed
        self.accel = accel
        self.robot.x += speed * dt * math.cos(self.robot.heading)
        self.robot.y += speed * dt * math.sin(self.robot.heading)
        self.clock += dt

        # collision against everything physically present, sensed or not
        if self._collided():
            self.outcome = OUTCOME_COLLISION
            return emitted

        safety = self.observe_safety()
        energy = self.observe_energy()
        self.trajectory.append(TrajectorySample(
            self.clock, self.robot.x, self.robot.y, self.robot.speed,
            safety, energy, self.design_name))
        if self.clock + 1e-9 >= self._next_observation:
            emitted.append(Diagnostic(self.clock, "qa_value", "safety",
                                      safety))
            emitted.append(Diagnostic(self.clock, "qa_value", "energy",
                                      energy))
            self._next_observation += OBSERVER_PERIOD
        self.diagnostics.extend(emitted)

        if self.goal_distance() <= GOAL_TOLERANCE:
            self.outcome = OUTCOME_COMPLETE
        return emitted

    def _collided(self) -> bool:
        if self.static_grid.clearance_at(self.robot.x,
                                         self.robot.y) < FOOTPRINT_RADIUS:
            return True
        for obstacle in self.obstacles:
            if not obstacle.spawned:
                continue
            d = math.hypot(obstacle.center[0] - self.robot.x,
                           obstacle.center[1] - self.robot.y)
            if d < obstacle.radius + FOOTPRINT_RADIUS:
                return True
        return False


def _wrap(angle: float) -> float:
    while angle > math.pi:
        angle -= 2.0 * math.pi
    while angle < -math.pi:
        angle += 2.0 * math.pi
    return angle
