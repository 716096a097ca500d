"""Monitor-Analyze-Plan-Execute loop over the knowledge base.

The loop owns the KB. Diagnostics arrive through an in-process queue; each
tick drains the queue, re-runs inference, and issues at most one
reconfiguration command per objective. Lockstep callers drive the clock
explicitly, which is what every test and the experiment harness use.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import reasoner
from .tomasys import (
    DESIGN_UNREALISABLE,
    HIGHER_BETTER,
    GROUNDING_IN_ERROR,
    OBJECTIVE_IN_ERROR,
    Fact,
    KnowledgeBase,
    QAValue,
    UnknownEntityError,
)

MAX_EXECUTE_RETRIES = 3


@dataclass(frozen=True)
class Diagnostic:
    timestamp: float
    kind: str  # "component_status" | "qa_value"
    name: str  # component name or qa_type
    value: object  # "ok"/"error" or a float in [0,1]

    def __post_init__(self):
        if self.kind == "component_status":
            if self.value not in ("ok", "error"):
                raise ValueError(f"bad component status {self.value!r}")
        elif self.kind == "qa_value":
            if not 0.0 <= float(self.value) <= 1.0:
                raise ValueError(f"qa value {self.value!r} outside [0,1]")
        else:
            raise ValueError(f"bad diagnostic kind {self.kind!r}")

    def to_json(self) -> str:
        if self.kind == "component_status":
            record = {"t": self.timestamp, "kind": self.kind,
                      "name": self.name, "status": self.value}
        else:
            record = {"t": self.timestamp, "kind": self.kind,
                      "type": self.name, "value": self.value}
        return json.dumps(record)

    @staticmethod
    def from_json(line: str) -> "Diagnostic":
        record = json.loads(line)
        if record["kind"] == "component_status":
            return Diagnostic(record["t"], "component_status",
                              record["name"], record["status"])
        return Diagnostic(record["t"], "qa_value",
                          record["type"], record["value"])


@dataclass(frozen=True)
class ReconfigurationCommand:
    timestamp: float
    objective: str
    from_design: str
    to_design: str

    def __post_init__(self):
        if self.to_design == self.from_design:
            raise ValueError("reconfiguration must change the design")

    def to_json(self) -> str:
        return json.dumps({"t": self.timestamp, "objective": self.objective,
                           "from": self.from_design, "to": self.to_design})


@dataclass
class LoopReport:
    tick_time: float
    ingested: int = 0
    skipped: int = 0
    objectives_in_error: set = field(default_factory=set)
    commands: list = field(default_factory=list)  # executed (acked) commands
    failed_commands: list = field(default_factory=list)
    unresolvable: set = field(default_factory=set)


@dataclass(frozen=True)
class LoopConfig:
    period: float = 1.0  # seconds of simulation time
    settle_time: float = 0.85  # seconds of measurements ignored after execute

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError("period must be positive")
        if self.settle_time < 0:
            raise ValueError("settle time must not be negative")


class MapeLoop:
    """The managing subsystem.

    ``executor`` is a callable taking a design name and returning True on
    ack, False (or raising TimeoutError) on failure.
    """

    def __init__(self, kb: KnowledgeBase,
                 executor: Callable[[str], bool],
                 config: LoopConfig = LoopConfig()):
        self.kb = kb
        self.executor = executor
        self.config = config
        self.queue: list = []
        self._last_raw: dict = {}  # qa_type -> last raw sample value
        self._settled_at = -math.inf  # measurements before this are stale
        self.retries: dict = {}  # objective id -> failed execute count
        self.last_tick: Optional[float] = None
        self.last_report: Optional[LoopReport] = None

    def enqueue(self, diagnostic: Diagnostic):
        self.queue.append(diagnostic)

    # -- M ------------------------------------------------------------------

    def ingest(self, batch) -> int:
        """Apply diagnostics in timestamp order; unknown entities are skipped
        and counted, never fatal.

        QA streams go through two filters. Cost-like (lower-better) streams
        report instantaneous draw, so a reading only counts once its
        immediate predecessor agrees (two-sample confirmation: the pair's
        less alarming value) and single-sample transients such as an
        acceleration spike never trigger adaptation. Margin-like
        (higher-better) streams are already worst-case estimates and count
        immediately. Among the readings of a batch the most conservative one
        is kept (minimum for higher-better types, maximum for lower-better),
        so a dip shorter than the loop period is never missed."""
        skipped = 0
        held = {}  # qa_type -> most conservative confirmed QAValue
        for diag in sorted(batch, key=lambda d: d.timestamp):
            try:
                if diag.kind == "component_status":
                    fact = Fact("component_error", diag.name)
                    if diag.value == "error":
                        self.kb.assert_fact(fact)
                    else:
                        if self.kb.model.component(diag.name) is None:
                            raise UnknownEntityError(diag.name)
                        self.kb.retract(fact)
                    continue
                qa = self.kb.model.qa_type(diag.name)
                if qa is None:
                    raise UnknownEntityError(diag.name)
            except UnknownEntityError:
                skipped += 1
                continue
            if diag.timestamp < self._settled_at:
                # taken while the previous design was still in effect (or
                # the new one still settling): not evidence against the
                # newly deployed design
                continue
            value = float(diag.value)
            previous = self._last_raw.get(diag.name)
            self._last_raw[diag.name] = value
            if qa.polarity == HIGHER_BETTER:
                confirmed = value
            else:
                if previous is None:
                    continue
                confirmed = min(value, previous)
            worst = held.get(diag.name)
            if worst is None or self._worse(qa.polarity, confirmed,
                                            worst.value):
                held[diag.name] = QAValue(diag.name, confirmed,
                                          diag.timestamp)
        for qav in held.values():
            self.kb.assert_measurement(qav)
        return skipped

    @staticmethod
    def _worse(polarity: str, value: float, reference: float) -> bool:
        if polarity == HIGHER_BETTER:
            return value < reference
        return value > reference

    # -- A ------------------------------------------------------------------

    def analyze(self):
        report = reasoner.infer(self.kb)
        in_error = {f.entity for f in self.kb.query(OBJECTIVE_IN_ERROR)}
        return in_error, report

    # -- P ------------------------------------------------------------------

    def plan(self, objective_id: str):
        """Best feasible alternative design, or None (objective becomes
        unresolvable). Feasible: realizes the function, realisable, not the
        current design, and every NFR threshold met by the design estimate."""
        objective = self.kb.model.objective(objective_id)
        grounding = self.kb.groundings.get(objective_id)
        current = grounding.design if grounding else None
        candidates = []
        for design in self.kb.model.designs_for(objective.function):
            if design.name == current:
                continue
            if not self.kb.design_realisable(design.name):
                continue
            estimates_ok = all(
                design.estimate(nfr.qa_type) is not None
                and nfr.satisfied_by(design.estimate(nfr.qa_type))
                for nfr in objective.nfrs)
            if estimates_ok:
                candidates.append(design)
        if not candidates:
            self.kb.unresolvable.add(objective_id)
            return None
        # argmax utility, ties by lexicographically smallest name
        return min(candidates, key=lambda d: (-d.utility, d.name))

    # -- E ------------------------------------------------------------------

    def execute(self, command: ReconfigurationCommand) -> bool:
        try:
            acked = bool(self.executor(command.to_design))
        except TimeoutError:
            acked = False
        if not acked:
            return False
        grounding = self.kb.groundings[command.objective]
        grounding.design = command.to_design
        grounding.since = command.timestamp
        self.kb.retract(Fact(GROUNDING_IN_ERROR, command.objective))
        self.kb.retract(Fact(OBJECTIVE_IN_ERROR, command.objective))
        self.retries.pop(command.objective, None)
        self._settled_at = command.timestamp + self.config.settle_time
        self._last_raw.clear()
        self.kb.measurements.clear()  # they described the replaced design
        return True

    # -- the loop -----------------------------------------------------------

    def tick(self, now: float) -> LoopReport:
        batch, self.queue = self.queue, []
        report = LoopReport(tick_time=now, ingested=len(batch))
        report.skipped = self.ingest(batch)
        in_error, inference = self.analyze()
        report.objectives_in_error = set(in_error)

        for objective_id in sorted(in_error):
            if self.retries.get(objective_id, 0) >= MAX_EXECUTE_RETRIES:
                self.kb.unresolvable.add(objective_id)
                report.unresolvable.add(objective_id)
                continue
            grounding = self.kb.groundings.get(objective_id)
            if grounding is not None and self._qa_violation(inference,
                                                            objective_id):
                # a design that failed its thresholds at runtime is ruled out
                # of future planning for this mission
                self.kb.assert_fact(
                    Fact(DESIGN_UNREALISABLE, grounding.design))
            choice = self.plan(objective_id)
            if choice is None:
                report.unresolvable.add(objective_id)
                continue
            command = ReconfigurationCommand(
                timestamp=now, objective=objective_id,
                from_design=grounding.design, to_design=choice.name)
            if self.execute(command):
                report.commands.append(command)
            else:
                self.retries[objective_id] = \
                    self.retries.get(objective_id, 0) + 1
                report.failed_commands.append(command)

        report.unresolvable |= self.kb.unresolvable
        self.last_tick = now
        self.last_report = report
        return report

    @staticmethod
    def _qa_violation(inference, objective_id) -> bool:
        return any(f.rule_id == "R3"
                   and dict(f.bindings).get("o") == objective_id
                   for f in inference.firings)
