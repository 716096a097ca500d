"""Experiment harness: single missions, the Base-vs-MROS matrix, summaries,
and the manipulator failure scenarios."""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from . import archmodel, reasoner
from .archmodel import ENERGY_THRESHOLD, SAFETY_THRESHOLD, generate_nav_model
from .mapek import Diagnostic, LoopConfig, MapeLoop
from .navsim import factory
from .navsim.world import (
    CLUTTER_LEVELS,
    OUTCOME_ACTIVE,
    OUTCOME_COMPLETE,
    SIM_DT,
    ContingencySpec,
    NavSimulator,
)
from .tomasys import kb_init

MISSION_TIMEOUT = 600.0  # s simulated
LOOP_PERIOD = 1.0        # s simulated
OUTCOME_TIMEOUT = "timeout"
DEFAULT_SEED = int(os.environ.get("METACTL_SEED", "0"))

# Initial launch configurations (controller frequency Hz, max_vel m/s,
# inflation radius m). C6 as printed reads (25, 6, 9), which are
# acceleration-valued entries outside the velocity/radius domains, and C4/C5
# are duplicates; C6 is repaired to (25, 0.5, 0.8) and the duplicate kept.
INITIAL_CONFIGS = {
    "C1": (15.0, 0.3, 0.8),
    "C2": (15.0, 0.75, 0.5),
    "C3": (20.0, 0.3, 0.8),
    "C4": (20.0, 0.5, 0.65),
    "C5": (20.0, 0.5, 0.65),
    "C6": (25.0, 0.5, 0.8),
    "C7": (25.0, 0.75, 0.5),
}
CONFIG_NOTES = (
    "C6 repaired from the printed (cf 25, max_v 6, r 9) to "
    "(cf 25, max_v 0.5, r 0.8); C4/C5 duplicate kept as printed.",
)
MATRIX_POWER_LEVELS = (0.10, 0.30, 0.50)

CSV_COLUMNS = ("config", "clutter", "power", "seed", "mode", "outcome",
               "mission_time", "t_safety_viol", "t_energy_viol",
               "reconfig_count")


class MalformedCsvError(Exception):
    """The results CSV is empty or lacks the expected columns."""


@dataclass(frozen=True)
class TestCase:
    initial_config: str  # C1..C7
    contingency: ContingencySpec
    mode: str  # "base" | "mros"
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.initial_config not in INITIAL_CONFIGS:
            raise ValueError(f"unknown configuration {self.initial_config!r}")
        if self.mode not in ("base", "mros"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class MissionMetrics:
    mission_time: float
    time_safety_violation: float
    time_energy_violation: float
    reconfig_count: int
    outcome: str


@dataclass
class MissionLogs:
    diagnostics: list = field(default_factory=list)   # Diagnostic
    commands: list = field(default_factory=list)      # ReconfigurationCommand
    trajectory: list = field(default_factory=list)    # TrajectorySample


@dataclass
class MatrixSpec:
    configs: tuple = tuple(INITIAL_CONFIGS)
    clutter_levels: tuple = CLUTTER_LEVELS
    power_levels: tuple = MATRIX_POWER_LEVELS
    seeds_per_cell: int = 1


def initial_design_name(config_id: str) -> str:
    _, max_vel, radius = INITIAL_CONFIGS[config_id]
    return archmodel.nav_design_name(max_vel, 6.0, radius)


def run_mission(case: TestCase, model=None):
    """Run one lockstep mission; returns (MissionMetrics, MissionLogs)."""
    model = model or generate_nav_model()
    ctrl_freq, _, _ = INITIAL_CONFIGS[case.initial_config]
    sim = NavSimulator(
        factory.default_grid(), factory.MISSION_START, factory.MISSION_GOAL,
        initial_design_name(case.initial_config), case.contingency,
        seed=case.seed, controller_frequency=ctrl_freq)
    logs = MissionLogs()

    loop = None
    if case.mode == "mros":
        kb = kb_init(model, {"o_nav": sim.design_name})
        loop = MapeLoop(kb, sim.apply_configuration,
                        LoopConfig(period=LOOP_PERIOD))

    next_tick = LOOP_PERIOD
    while sim.mission_active() and sim.clock < MISSION_TIMEOUT:
        emitted = sim.step()
        if loop is not None:
            for diag in emitted:
                loop.enqueue(diag)
            if sim.clock + 1e-9 >= next_tick:
                report = loop.tick(sim.clock)
                logs.commands.extend(report.commands)
                next_tick += LOOP_PERIOD

    outcome = sim.outcome if sim.outcome != OUTCOME_ACTIVE else OUTCOME_TIMEOUT
    t_safety = sum(SIM_DT for s in sim.trajectory
                   if s.safety < SAFETY_THRESHOLD)
    t_energy = sum(SIM_DT for s in sim.trajectory
                   if s.energy > ENERGY_THRESHOLD)
    metrics = MissionMetrics(
        mission_time=sim.clock,
        time_safety_violation=t_safety,
        time_energy_violation=t_energy,
        reconfig_count=len(logs.commands),
        outcome=outcome)
    logs.diagnostics = sim.diagnostics
    logs.trajectory = sim.trajectory
    return metrics, logs


def _row_key(row):
    return (row["config"], row["clutter"], row["power"], row["seed"],
            row["mode"])


def metrics_to_row(case: TestCase, metrics: MissionMetrics) -> dict:
    return {
        "config": case.initial_config,
        "clutter": case.contingency.clutter,
        "power": str(int(round(case.contingency.power_increase * 100))),
        "seed": str(case.seed),
        "mode": case.mode,
        "outcome": metrics.outcome,
        "mission_time": f"{metrics.mission_time:.3f}",
        "t_safety_viol": f"{metrics.time_safety_violation:.3f}",
        "t_energy_viol": f"{metrics.time_energy_violation:.3f}",
        "reconfig_count": str(metrics.reconfig_count),
    }


def run_matrix(spec: MatrixSpec, out_path, progress=None) -> int:
    """Run every (config, clutter, power, seed, mode) cell, appending rows to
    the CSV; cells already present are skipped, so a partial run resumes."""
    existing = set()
    write_header = True
    if os.path.exists(out_path) and os.path.getsize(out_path) > 0:
        with open(out_path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                existing.add(_row_key(row))
        write_header = False

    model = generate_nav_model()
    written = 0
    with open(out_path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        if write_header:
            writer.writeheader()
        for config in spec.configs:
            for clutter in spec.clutter_levels:
                for power in spec.power_levels:
                    for seed in range(spec.seeds_per_cell):
                        for mode in ("base", "mros"):
                            case = TestCase(
                                config, ContingencySpec(clutter, power),
                                mode, seed)
                            row_id = (config, clutter,
                                      str(int(round(power * 100))),
                                      str(seed), mode)
                            if row_id in existing:
                                continue
                            metrics, _ = run_mission(case, model=model)
                            writer.writerow(metrics_to_row(case, metrics))
                            fh.flush()
                            written += 1
                            if progress:
                                progress(row_id, metrics)
    return written


def _mean(values):
    return sum(values) / len(values) if values else float("nan")


def load_rows(csv_path) -> list:
    try:
        with open(csv_path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or \
                    not set(CSV_COLUMNS) <= set(reader.fieldnames):
                raise MalformedCsvError(f"{csv_path}: missing columns")
            rows = list(reader)
    except OSError as exc:
        raise MalformedCsvError(str(exc)) from exc
    if not rows:
        raise MalformedCsvError(f"{csv_path}: no data rows")
    return rows


def summarize(csv_path, out_dir: Optional[str] = None):
    """Aggregate a matrix CSV into the three per-figure tables.

    Returns (text, tables) where tables maps figure name to a list of
    (group, base_mean, mros_mean) rows; also writes one CSV per figure when
    ``out_dir`` is given.
    """
    rows = load_rows(csv_path)

    def group_means(key, metric, order):
        table = []
        for value in order:
            sel = [r for r in rows if r[key] == value]
            base = [float(r[metric]) for r in sel if r["mode"] == "base"]
            mros = [float(r[metric]) for r in sel if r["mode"] == "mros"]
            if sel:
                table.append((value, _mean(base), _mean(mros)))
        return table

    clutter_order = [c for c in CLUTTER_LEVELS
                     if any(r["clutter"] == c for r in rows)]
    power_order = sorted({r["power"] for r in rows}, key=int)
    config_order = sorted({r["config"] for r in rows})

    tables = {
        "safety_by_clutter": group_means("clutter", "t_safety_viol",
                                         clutter_order),
        "energy_by_power": group_means("power", "t_energy_viol", power_order),
        "time_by_config": group_means("config", "mission_time", config_order),
    }

    lines = [f"# {note}" for note in CONFIG_NOTES]
    titles = {
        "safety_by_clutter": ("mean time under safety threshold (s) by "
                              "clutter level", "clutter"),
        "energy_by_power": ("mean time above energy threshold (s) by power "
                            "increase (%)", "power"),
        "time_by_config": ("mean mission time (s) by initial configuration",
                           "config"),
    }
    for name, table in tables.items():
        title, column = titles[name]
        lines.append("")
        lines.append(title)
        lines.append(f"{column:>10} {'base':>10} {'mros':>10}")
        for group, base, mros in table:
            lines.append(f"{group:>10} {base:>10.3f} {mros:>10.3f}")

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for name, table in tables.items():
            path = os.path.join(out_dir, f"{name}.csv")
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow([titles[name][1], "base_mean", "mros_mean"])
                for group, base, mros in table:
                    writer.writerow([group, f"{base:.3f}", f"{mros:.3f}"])

    return "\n".join(lines) + "\n", tables


# ---------------------------------------------------------------------------
# manipulator failure scenarios

@dataclass
class ScenarioResult:
    name: str
    passed: bool
    detail: str
    commands: list = field(default_factory=list)


def load_pyramid_model():
    path = resources.files("metactl.data") / "pyramid.archmodel"
    return archmodel.parse_model(path.read_text(encoding="utf-8"))


def _run_scenario(model, groundings, injections, until: float,
                  executor_ok=True):
    """Lockstep scenario driver: diagnostics injected at fixed times, the
    loop ticking every second with an executor that always acks."""
    kb = kb_init(model, groundings)
    acks = []

    def executor(design_name):
        if not executor_ok:
            return False
        acks.append(design_name)
        return True

    loop = MapeLoop(kb, executor, LoopConfig(period=LOOP_PERIOD))
    reports = []
    t = 0.0
    pending = sorted(injections, key=lambda d: d.timestamp)
    while t < until:
        t += LOOP_PERIOD
        while pending and pending[0].timestamp <= t:
            loop.enqueue(pending.pop(0))
        reports.append(loop.tick(t))
    return kb, loop, reports


def run_pyramid_scenarios() -> list:
    """Scenario 1 (tag not detected), Scenario 2 (one arm blocked), and the
    unresolvable both-arms case; each asserts the expected reconfiguration."""
    model = load_pyramid_model()
    groundings = {"o_build": "dual_arm", "o_detect_tag": "tag_detect_normal"}
    results = []

    # Scenario 1: the normal-light tag detector fails at t=2s
    kb, _, reports = _run_scenario(
        model, groundings,
        [Diagnostic(2.0, "component_status", "tag_detector_normal", "error")],
        until=6.0)
    commands = [c for r in reports for c in r.commands]
    first_tick = next((r.tick_time for r in reports if r.commands), None)
    ok = (len(commands) == 1
          and commands[0].to_design == "tag_detect_lowlight"
          and first_tick == 2.0)  # fault visible at the t=2s tick
    results.append(ScenarioResult(
        "scenario1_tag_detection", ok,
        f"commands={[(c.timestamp, c.to_design) for c in commands]}",
        commands))

    # Scenario 2: the right arm is blocked at t=5s
    kb, _, reports = _run_scenario(
        model, groundings,
        [Diagnostic(5.0, "component_status", "arm_right", "error")],
        until=9.0)
    commands = [c for r in reports for c in r.commands]
    first_tick = next((r.tick_time for r in reports if r.commands), None)
    reasoner.infer(kb)
    status = reasoner.objective_status(kb, "o_build")
    ok = (len(commands) == 1
          and commands[0].to_design == "single_arm_with_move"
          and first_tick == 5.0
          and status == "ok")
    results.append(ScenarioResult(
        "scenario2_single_arm", ok,
        f"commands={[(c.timestamp, c.to_design) for c in commands]} "
        f"o_build={status}", commands))

    # both arms blocked: no feasible design remains
    kb, _, reports = _run_scenario(
        model, groundings,
        [Diagnostic(2.0, "component_status", "arm_left", "error"),
         Diagnostic(2.0, "component_status", "arm_right", "error")],
        until=8.0)
    commands = [c for r in reports for c in r.commands
                if c.objective == "o_build"]
    reasoner.infer(kb)
    status = reasoner.objective_status(kb, "o_build")
    ok = not commands and status == "unresolvable"
    results.append(ScenarioResult(
        "both_arms_unresolvable", ok,
        f"commands={len(commands)} o_build={status}", commands))

    return results
