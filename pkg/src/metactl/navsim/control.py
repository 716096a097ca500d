"""Pure-pursuit path tracking with speed/acceleration clamps.

The controller chases a lookahead point 0.5 m along the path, turns toward it
at a bounded rate, decelerates to stop inside the goal tolerance, and brakes
reactively when the frontal obstacle clearance approaches braking distance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .observers import braking_distance

LOOKAHEAD = 0.5          # m along the path
PROJECTION_WINDOW = 3    # segments the path projection may advance per step
TURN_RATE_LIMIT = 1.5    # rad/s
BRAKE_RATIO = 0.25       # brake when frontal clearance < ratio * d_break
BRAKE_FLOOR = 0.12       # m/s, creep speed while braking
HARD_STOP_MARGIN = 0.2   # m, frontal clearance below which we stop outright
SIDE_OVERRIDE = 0.1      # m, body margin below which pursuit yields entirely
PIVOT_ANGLE = 0.6 * math.pi  # rad, heading error beyond which we stop and turn
GOAL_TOLERANCE = 0.3     # m
GENTLE_DECEL = 0.6       # m/s^2, comfort deceleration outside emergencies
SIDE_GUARD = 0.45        # m, body margin below which lateral slowdown starts
SIDE_GAIN = 3.0          # (m/s)/m, speed cap slope against the side margin


@dataclass
class RobotState:
    x: float
    y: float
    heading: float
    speed: float


@dataclass(frozen=True)
class NavConfig:
    max_vel: float
    accel_lim: float
    inflation_radius: float
    controller_frequency: float = 20.0  # Hz, fixed middle value
    planner_frequency: float = 4.0      # Hz, fixed middle value

    def __post_init__(self):
        if min(self.max_vel, self.accel_lim, self.inflation_radius,
               self.controller_frequency, self.planner_frequency) <= 0:
            raise ValueError("navigation parameters must be positive")


def _clamp(value, low, high):
    return low if value < low else high if value > high else value


def lookahead_point(path: np.ndarray, x: float, y: float,
                    start_index: int = 0):
    """Lookahead target on the path and the segment index of the projection.

    The projection never moves backwards along the path (``start_index``)
    and advances at most PROJECTION_WINDOW segments per call: both keep
    tracking stable when a snaking path passes close to itself, e.g. on the
    other side of a wall.
    """
    best_i, best_t, best_d2 = start_index, 0.0, math.inf
    p = np.array([x, y])
    stop = min(start_index + PROJECTION_WINDOW + 1, len(path) - 1)
    for i in range(start_index, stop):
        a, b = path[i], path[i + 1]
        ab = b - a
        denom = float(ab @ ab)
        t = 0.0 if denom == 0 else _clamp(float((p - a) @ ab) / denom, 0.0, 1.0)
        closest = a + ab * t
        d2 = float((p - closest) @ (p - closest))
        if d2 < best_d2:
            best_i, best_t, best_d2 = i, t, d2
    if len(path) == 1:
        return path[0], 0
    # walk LOOKAHEAD meters forward from the projection
    remaining = LOOKAHEAD
    i, t = best_i, best_t
    a, b = path[i], path[i + 1]
    seg_left = float(np.linalg.norm(b - a)) * (1.0 - t)
    point = a + (b - a) * t
    while remaining > seg_left and i < len(path) - 2:
        remaining -= seg_left
        i += 1
        a, b = path[i], path[i + 1]
        seg_left = float(np.linalg.norm(b - a))
        point = a
    seg = b - a
    seg_len = float(np.linalg.norm(seg))
    if seg_len > 0:
        advance = min(remaining, seg_left)
        point = b - seg / seg_len * (seg_left - advance)
    return point, best_i


def control(robot: RobotState, path: np.ndarray, cfg: NavConfig, dt: float,
            goal_distance: float, frontal_clearance: float = math.inf,
            side_clearance: float = math.inf, away_direction=None,
            path_index: int = 0):
    """One control step.

    Returns (commanded_speed, commanded_accel, commanded_turn_rate,
    path_index). Commands respect |v| <= max_vel and |a| <= accel_lim.
    """
    # the configured inflation radius sets the reactive margin too: a wider
    # radius means the platform keeps more lateral room and creeps earlier
    margin = max(cfg.inflation_radius - 0.5, 0.0)
    guard = SIDE_GUARD + margin
    target, path_index = lookahead_point(path, robot.x, robot.y, path_index)
    to_target = np.array([target[0] - robot.x, target[1] - robot.y])
    norm = float(np.linalg.norm(to_target))
    if away_direction is not None and side_clearance < SIDE_OVERRIDE \
            and robot.speed > 0.5 * BRAKE_FLOOR:
        # almost touching while moving: abandon pursuit and back straight
        # off (when already stopped, normal blending below lets the robot
        # pivot back toward the path instead of freezing against a wall)
        to_target = np.asarray(away_direction, dtype=float)
        norm = 1.0
    elif norm > 0 and away_direction is not None \
            and side_clearance < guard:
        # reactive avoidance: blend the pursuit direction away from the
        # nearest obstacle so the body never spirals into a cut corner
        weight = (guard - max(side_clearance, 0.0)) / guard
        blended = to_target / norm + weight * np.asarray(away_direction)
        if float(np.linalg.norm(blended)) > 1e-9:
            to_target = blended
    desired_heading = math.atan2(to_target[1], to_target[0])
    err = _wrap_angle(desired_heading - robot.heading)
    turn = _clamp(err / dt, -TURN_RATE_LIMIT, TURN_RATE_LIMIT)

    emergency = False
    if goal_distance <= GOAL_TOLERANCE:
        v_target = 0.0
    elif abs(err) > PIVOT_ANGLE:
        # grossly misaligned (typically right after a replan that reverses
        # the route): brake hard and turn in place instead of driving on
        emergency = True
        v_target = 0.0
    else:
        # arrive at the goal on a gentle deceleration profile
        v_target = min(cfg.max_vel,
                       math.sqrt(2.0 * GENTLE_DECEL
                                 * max(goal_distance - GOAL_TOLERANCE / 2, 0.0)))
        d_break = braking_distance(max(robot.speed, 0.05), cfg.accel_lim)
        if frontal_clearance < HARD_STOP_MARGIN:
            emergency = True
            v_target = 0.0
        elif frontal_clearance < BRAKE_RATIO * d_break:
            emergency = True
            v_target = min(v_target,
                           max(BRAKE_FLOOR,
                               cfg.max_vel * frontal_clearance / d_break))
        # creep past obstacles beside the body that the cone cannot see
        if side_clearance < guard:
            v_target = min(v_target,
                           max(BRAKE_FLOOR,
                               SIDE_GAIN * (side_clearance - margin)))

    # speed up at the full limit; shed speed gently unless braking for an
    # obstacle, where the full limit is the collision backstop
    decel_limit = cfg.accel_lim if emergency \
        else min(GENTLE_DECEL, cfg.accel_lim)
    accel = _clamp((v_target - robot.speed) / dt,
                   -decel_limit, cfg.accel_lim)
    speed = _clamp(robot.speed + accel * dt, 0.0, cfg.max_vel)
    return speed, accel, turn, path_index


def _wrap_angle(angle: float) -> float:
    while angle > math.pi:
        angle -= 2.0 * math.pi
    while angle < -math.pi:
        angle += 2.0 * math.pi
    return angle
