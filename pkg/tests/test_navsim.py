"""Simulator tests: grids, planning, control clamps, observers, stepping."""
import math
from collections import deque

import numpy as np
import pytest

from metactl.navsim import factory
from metactl.navsim import kernels
from metactl.navsim._kernels_py import astar_grid as astar_py
from metactl.navsim._kernels_py import cone_min_distance as cone_py
from metactl.navsim._kernels_py import segment_clear as segment_py
from metactl.navsim.control import NavConfig, RobotState, control
from metactl.navsim.grid import OccupancyGrid, load_grid, save_grid
from metactl.navsim.observers import (
    PowerModel,
    braking_distance,
    energy_value,
    safety_value,
)
from metactl.navsim.planner import NoPathError, path_length, plan_path
from metactl.navsim.world import (
    ContingencySpec,
    NavSimulator,
    UnknownDesignError,
    decode_design,
)


def _empty_grid(size_m=5.0, resolution=0.1):
    cells = int(size_m / resolution)
    return OccupancyGrid(width=cells, height=cells, resolution=resolution,
                         origin_x=0.0, origin_y=0.0,
                         occupied=np.zeros((cells, cells), dtype=bool))


# -- grid --------------------------------------------------------------------

def test_grid_file_round_trip(tmp_path):
    grid = _empty_grid()
    grid.set_rect(1.0, 1.0, 2.0, 3.0)
    grid.set_disc(4.0, 4.0, 0.3)
    path = tmp_path / "g.grid"
    save_grid(grid, path)
    loaded = load_grid(path)
    assert loaded.resolution == grid.resolution
    assert loaded.origin_x == grid.origin_x
    assert np.array_equal(loaded.occupied, grid.occupied)


def test_clearance_map_zero_inside_obstacles():
    grid = _empty_grid()
    grid.set_rect(2.0, 2.0, 3.0, 3.0)
    assert grid.clearance_at(2.5, 2.5) == 0.0
    assert grid.clearance_at(0.5, 0.5) > 1.0


def test_shipped_factory_grid_matches_generator():
    assert np.array_equal(factory.default_grid().occupied,
                          factory.build_factory_grid().occupied)


# -- planner -------------------------------------------------------------------

def test_plan_straight_line_in_free_space():
    grid = _empty_grid()
    path = plan_path(grid, (1.0, 2.5), (2.0, 2.5), inflation_radius=0.3)
    assert path_length(path) == pytest.approx(1.0, abs=2 * grid.resolution)


def test_narrow_gap_closed_by_inflation():
    grid = _empty_grid()
    grid.set_rect(2.0, 0.0, 2.2, 2.34)   # wall with a single-cell gap
    grid.set_rect(2.0, 2.55, 2.2, 5.0)   # (row of cell centers at y=2.45)
    with pytest.raises(NoPathError):
        plan_path(grid, (1.0, 2.5), (4.0, 2.5), inflation_radius=0.5)


def _bfs_distance(grid, start, goal):
    """8-connected breadth-first oracle in metric steps."""
    sr, sc = grid.world_to_cell(*start)
    gr, gc = grid.world_to_cell(*goal)
    dist = {(sr, sc): 0.0}
    queue = deque([(sr, sc)])
    while queue:
        r, c = queue.popleft()
        if (r, c) == (gr, gc):
            return dist[(r, c)]
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == dc == 0:
                    continue
                nxt = (r + dr, c + dc)
                if nxt in dist or not grid.in_bounds(*nxt) \
                        or grid.occupied[nxt]:
                    continue
                dist[nxt] = dist[(r, c)] + math.hypot(dr, dc)
                queue.append(nxt)
    return None


def test_astar_length_matches_bfs_oracle_through_gap():
    grid = _empty_grid()
    grid.set_rect(2.0, 0.0, 2.05, 2.34)
    grid.set_rect(2.0, 2.55, 2.05, 5.0)
    start, goal = (1.0, 2.5), (4.0, 2.5)
    blocked = np.ascontiguousarray(grid.occupied.astype(np.uint8))
    sr, sc = grid.world_to_cell(*start)
    gr, gc = grid.world_to_cell(*goal)
    cells = kernels.astar_grid(blocked, sr, sc, gr, gc)
    assert cells is not None
    steps = sum(math.hypot(*(cells[i + 1] - cells[i]))
                for i in range(len(cells) - 1))
    oracle = _bfs_distance(grid, start, goal) / grid.resolution
    # BFS expands in step order, not cost order: allow one diagonal of slack
    assert steps <= oracle + math.sqrt(2.0)


def test_plan_deterministic():
    grid = factory.default_grid()
    a = plan_path(grid, factory.MISSION_START, factory.MISSION_GOAL, 0.5)
    b = plan_path(grid, factory.MISSION_START, factory.MISSION_GOAL, 0.5)
    assert np.array_equal(a, b)


def test_wide_inflation_takes_longer_route():
    grid = factory.default_grid()
    tight = plan_path(grid, factory.MISSION_START, factory.MISSION_GOAL, 0.5)
    wide = plan_path(grid, factory.MISSION_START, factory.MISSION_GOAL, 0.8)
    assert path_length(wide) > path_length(tight)


# -- compiled kernels vs pure Python ------------------------------------------

def test_kernel_backend_selected():
    assert kernels.IMPLEMENTATION in ("cython", "python")


def test_astar_kernels_agree():
    rng = np.random.default_rng(5)
    for _ in range(10):
        blocked = (rng.random((40, 40)) < 0.25).astype(np.uint8)
        blocked[0, 0] = blocked[39, 39] = 0
        a = kernels.astar_grid(blocked, 0, 0, 39, 39)
        b = astar_py(blocked, 0, 0, 39, 39)
        if a is None or b is None:
            assert a is None and b is None
        else:
            assert np.array_equal(a, b)


def test_cone_kernels_agree():
    rng = np.random.default_rng(9)
    for _ in range(20):
        dx = np.ascontiguousarray(rng.uniform(-2, 2, 50))
        dy = np.ascontiguousarray(rng.uniform(-2, 2, 50))
        heading = float(rng.uniform(-math.pi, math.pi))
        a = kernels.cone_min_distance(dx, dy, heading, math.radians(30))
        b = cone_py(dx, dy, heading, math.radians(30))
        assert a == pytest.approx(b)


def test_segment_kernels_agree():
    grid = factory.default_grid()
    clearance = grid.clearance_map()
    rng = np.random.default_rng(11)
    seen = set()
    for _ in range(500):
        ax, ay = rng.uniform([-12, -9], [12, 9])
        bx, by = rng.uniform([-12, -9], [12, 9])
        r = float(rng.choice([0.5, 0.65, 0.8]))
        args = (ax, ay, bx, by, clearance,
                grid.origin_x, grid.origin_y, grid.resolution, r)
        result = kernels.segment_clear(*args)
        assert result == segment_py(*args)
        seen.add(result)
    assert seen == {True, False}


# -- control -------------------------------------------------------------------

def _straight_path():
    return np.array([[0.0, 0.0], [10.0, 0.0]])


def test_control_from_rest_clamps_to_accel_limit():
    cfg = NavConfig(max_vel=0.5, accel_lim=6.0, inflation_radius=0.5)
    robot = RobotState(x=0.0, y=0.0, heading=0.0, speed=0.0)
    speed, accel, _, _ = control(robot, _straight_path(), cfg, dt=0.05,
                                 goal_distance=10.0)
    assert speed == pytest.approx(0.3)  # min(0.5, 0 + 6 * 0.05)
    assert accel == pytest.approx(6.0)


def test_control_stops_inside_goal_tolerance():
    cfg = NavConfig(max_vel=0.5, accel_lim=6.0, inflation_radius=0.5)
    robot = RobotState(x=9.9, y=0.0, heading=0.0, speed=0.2)
    speed, _, _, _ = control(robot, _straight_path(), cfg, dt=0.05,
                             goal_distance=0.1)
    assert speed < 0.2  # commanded target is zero, speed decays toward it
    robot = RobotState(x=9.9, y=0.0, heading=0.0, speed=0.02)
    speed, _, _, _ = control(robot, _straight_path(), cfg, dt=0.05,
                             goal_distance=0.1)
    assert speed == pytest.approx(0.0)


def test_control_commands_respect_bounds_under_fuzz():
    rng = np.random.default_rng(17)
    cfg = NavConfig(max_vel=0.75, accel_lim=3.6, inflation_radius=0.65)
    path = _straight_path()
    for _ in range(10_000):
        robot = RobotState(x=float(rng.uniform(-1, 11)),
                           y=float(rng.uniform(-2, 2)),
                           heading=float(rng.uniform(-math.pi, math.pi)),
                           speed=float(rng.uniform(0, cfg.max_vel)))
        speed, accel, turn, _ = control(
            robot, path, cfg, dt=0.05,
            goal_distance=float(rng.uniform(0, 12)),
            frontal_clearance=float(rng.uniform(0, 3)),
            side_clearance=float(rng.uniform(-0.1, 2)),
            away_direction=(0.0, 1.0))
        assert 0.0 <= speed <= cfg.max_vel + 1e-12
        assert abs(accel) <= cfg.accel_lim + 1e-12
        assert abs(speed - robot.speed) <= cfg.accel_lim * 0.05 + 1e-12


def test_nav_config_rejects_nonpositive_values():
    with pytest.raises(ValueError):
        NavConfig(max_vel=0.0, accel_lim=6.0, inflation_radius=0.5)


# -- observers -----------------------------------------------------------------

def test_safety_hand_values():
    assert safety_value(5.0, 0.0, 6.0) == 1.0                 # stationary
    d_break = braking_distance(0.5, 6.0)
    assert d_break == pytest.approx(0.5 + 0.25 / 12)
    assert safety_value(2.0, 0.5, 6.0) == 1.0                 # P >= d_break
    assert safety_value(0.26, 0.5, 6.0) == pytest.approx(0.26 / d_break,
                                                         abs=1e-4)
    assert safety_value(0.26, 0.5, 6.0) == pytest.approx(0.499, abs=1e-3)
    assert safety_value(0.0, 0.5, 6.0) == 0.0


def test_energy_hand_values():
    assert energy_value(0.5, 0.0, 20.0, 0.0) == pytest.approx(0.4875)
    assert energy_value(0.5, 0.0, 20.0, 0.5) == pytest.approx(0.7313,
                                                              abs=1e-4)
    assert energy_value(0.3, 0.0, 20.0, 0.5) == pytest.approx(0.6188,
                                                              abs=1e-4)


def test_observer_monotonicity_and_range():
    rng = np.random.default_rng(23)
    for _ in range(2_000):
        p = float(rng.uniform(0, 3))
        v = float(rng.uniform(0.01, 0.75))
        a = float(rng.choice([3.6, 6.0, 9.0]))
        s = safety_value(p, v, a)
        assert 0.0 <= s <= 1.0
        assert safety_value(p + 0.1, v, a) >= s          # more room, safer
        assert safety_value(p, min(v + 0.1, 0.75), a) <= s + 1e-12
        delta = float(rng.uniform(0, 0.4))
        e = energy_value(v, 0.0, 20.0, delta)
        assert 0.0 <= e <= 1.0
        if e < 1.0:
            assert energy_value(v, 0.0, 20.0, delta + 0.1) > e
        assert energy_value(v + 0.1, 0.0, 20.0, delta) >= e


def test_power_model_fields():
    pm = PowerModel()
    assert pm.power_load(0.5, 0.0, 20.0, 0.0) == pytest.approx(39.0)
    assert pm.p_idle < pm.p_max


# -- simulator -----------------------------------------------------------------

def _sim(design="f_nav_v0.5_a6_r0.65", clutter="none", power=0.0, seed=0):
    return NavSimulator(factory.default_grid(), factory.MISSION_START,
                        factory.MISSION_GOAL, design,
                        ContingencySpec(clutter, power), seed=seed)


def test_decode_design_names():
    cfg = decode_design("f_nav_v0.3_a3.6_r0.8")
    assert (cfg.max_vel, cfg.accel_lim, cfg.inflation_radius) == \
        (0.3, 3.6, 0.8)
    with pytest.raises(UnknownDesignError):
        decode_design("f_nav_warp9")


def test_default_mission_completes():
    sim = _sim()
    while sim.mission_active() and sim.clock < 600.0:
        sim.step()
    assert sim.outcome == "complete"
    assert sim.clock < 600.0


def test_step_advances_position_and_emits_at_10hz():
    sim = _sim()
    emitted = []
    for _ in range(20):  # one second
        emitted.extend(sim.step())
    assert math.hypot(sim.robot.x - factory.MISSION_START[0],
                      sim.robot.y - factory.MISSION_START[1]) > 0.0
    qa_names = [d.name for d in emitted]
    assert qa_names.count("safety") == 10
    assert qa_names.count("energy") == 10
    assert all(0.0 <= d.value <= 1.0 for d in emitted)


def test_obstacles_hidden_until_sensed():
    sim = _sim(clutter="high", seed=1)
    static_occupied = int(sim.static_grid.occupied.sum())
    assert int(sim.planning_grid.occupied.sum()) == static_occupied
    assert all(not o.sensed for o in sim.obstacles)
    assert len(sim.obstacles) == 3


def test_clutter_counts():
    for clutter, count in (("none", 0), ("low", 1), ("medium", 2),
                           ("high", 3)):
        assert len(_sim(clutter=clutter).obstacles) == count


def test_reconfiguration_swaps_design_after_latency():
    sim = _sim("f_nav_v0.75_a6_r0.5")
    for _ in range(40):
        sim.step()
    assert sim.apply_configuration("f_nav_v0.3_a3.6_r0.8")
    assert sim.design_name == "f_nav_v0.75_a6_r0.5"  # latency not elapsed
    for _ in range(20):
        sim.step()
    assert sim.design_name == "f_nav_v0.3_a3.6_r0.8"
    assert sim.cfg.max_vel == 0.3
    with pytest.raises(UnknownDesignError):
        sim.apply_configuration("bogus")


def test_speed_decays_within_limits_after_downswap():
    sim = _sim("f_nav_v0.75_a9_r0.5")
    for _ in range(60):
        sim.step()
    assert sim.robot.speed > 0.3
    sim.apply_configuration("f_nav_v0.3_a3.6_r0.5")
    previous = sim.robot.speed
    for _ in range(60):
        sim.step()
        assert abs(sim.robot.speed - previous) <= 9.0 * 0.05 + 1e-9
        previous = sim.robot.speed
    assert sim.robot.speed <= 0.3 + 1e-9


def test_identical_seeds_give_identical_trajectories():
    def trajectory():
        sim = _sim(clutter="medium", power=0.3, seed=4)
        while sim.mission_active() and sim.clock < 600.0:
            sim.step()
        return [(s.t, s.x, s.y, s.v, s.safety, s.energy)
                for s in sim.trajectory]

    assert trajectory() == trajectory()
