"""Safety and energy observers producing normalized [0,1] quality values."""
from __future__ import annotations

import math
from dataclasses import dataclass

SAFETY_CONE_HALF_ANGLE = math.radians(30.0)
SAFETY_HORIZON = 1.0  # s, reaction-time part of the stopping distance


def braking_distance(speed: float, accel_lim: float) -> float:
    """Stopping distance: reaction-horizon travel plus kinematic braking."""
    return speed * SAFETY_HORIZON + speed * speed / (2.0 * accel_lim)


def safety_value(obstacle_distance: float, speed: float,
                 accel_lim: float) -> float:
    """1.0 when the nearest frontal obstacle is beyond braking distance (or
    the robot is stopped), otherwise the distance ratio, clamped to [0,1]."""
    if speed <= 0.0:
        return 1.0
    d_break = braking_distance(speed, accel_lim)
    if obstacle_distance >= d_break:
        return 1.0
    if obstacle_distance <= 0.0:
        return 0.0
    return obstacle_distance / d_break


@dataclass(frozen=True)
class PowerModel:
    p_idle: float = 20.0   # W
    c_v: float = 30.0      # W per m/s
    c_a: float = 5.0       # W per m/s^2
    c_f: float = 0.2       # W per Hz
    p_max: float = 80.0    # W

    def power_load(self, speed: float, accel: float, ctrl_frequency: float,
                   power_increase: float) -> float:
        base = (self.p_idle + self.c_v * abs(speed) + self.c_a * abs(accel)
                + self.c_f * ctrl_frequency)
        return base * (1.0 + power_increase)


def energy_value(speed: float, accel: float, ctrl_frequency: float,
                 power_increase: float,
                 power_model: PowerModel = PowerModel()) -> float:
    """Instantaneous power load as a fraction of peak power, capped at 1."""
    load = power_model.power_load(speed, accel, ctrl_frequency,
                                  power_increase)
    return min(1.0, load / power_model.p_max)
