"""TOMASys-style domain objects and the closed-world runtime knowledge base.

The knowledge base stores only negative facts (errors / unrealisability);
everything not mentioned is healthy. Derived facts are recomputed from the
asserted ones on every inference pass, so retraction never needs truth
maintenance.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

HIGHER_BETTER = "higher_better"
LOWER_BETTER = "lower_better"

# negative-fact kinds
COMPONENT_ERROR = "component_error"
DESIGN_UNREALISABLE = "design_unrealisable"
OBJECTIVE_IN_ERROR = "objective_in_error"
GROUNDING_IN_ERROR = "grounding_in_error"  # entity is the objective id

FACT_KINDS = (
    COMPONENT_ERROR,
    DESIGN_UNREALISABLE,
    OBJECTIVE_IN_ERROR,
    GROUNDING_IN_ERROR,
)


class Fact(NamedTuple):
    kind: str
    entity: str

    def __str__(self):
        return f"{self.kind}({self.entity})"


class KnowledgeError(Exception):
    """Base class for knowledge-base contract violations."""


class GroundingMismatchError(KnowledgeError):
    """Initial grounding maps an objective to a design of another function."""


class UnknownEntityError(KnowledgeError):
    """A fact or diagnostic references an entity absent from the model."""


class StaleKnowledgeError(KnowledgeError):
    """Status was queried after assertions without re-running inference."""


@dataclass(frozen=True)
class QAType:
    name: str
    polarity: str  # HIGHER_BETTER | LOWER_BETTER


@dataclass(frozen=True)
class QAValue:
    qa_type: str
    value: float
    timestamp: float = 0.0


@dataclass(frozen=True)
class Component:
    name: str


@dataclass(frozen=True)
class Function:
    name: str


@dataclass(frozen=True)
class NFR:
    qa_type: str
    comparator: str  # ">=" | "<="
    threshold: float

    def satisfied_by(self, value: float) -> bool:
        if self.comparator == ">=":
            return value >= self.threshold
        return value <= self.threshold


@dataclass(frozen=True)
class FunctionDesign:
    name: str
    realizes: str
    requires: tuple  # component names, non-empty
    qa_estimates: tuple  # ((qa_type, value), ...) in declaration order
    utility: float

    def estimate(self, qa_type: str) -> Optional[float]:
        for name, value in self.qa_estimates:
            if name == qa_type:
                return value
        return None


@dataclass(frozen=True)
class Objective:
    id: str
    function: str
    nfrs: tuple  # of NFR


@dataclass
class ArchitectureModel:
    name: str
    qa_types: list = field(default_factory=list)
    components: list = field(default_factory=list)
    functions: list = field(default_factory=list)
    designs: list = field(default_factory=list)
    objectives: list = field(default_factory=list)
    # source positions of declarations, parser-internal; not part of identity
    decl_positions: dict = field(default_factory=dict, compare=False, repr=False)

    def qa_type(self, name):
        return next((q for q in self.qa_types if q.name == name), None)

    def component(self, name):
        return next((c for c in self.components if c.name == name), None)

    def function(self, name):
        return next((f for f in self.functions if f.name == name), None)

    def design(self, name):
        return next((d for d in self.designs if d.name == name), None)

    def objective(self, oid):
        return next((o for o in self.objectives if o.id == oid), None)

    def designs_for(self, function_name):
        return [d for d in self.designs if d.realizes == function_name]


@dataclass
class FunctionGrounding:
    objective: str
    design: str
    since: float = 0.0


class KnowledgeBase:
    """Mutable runtime fact store with closed-world semantics.

    ``asserted`` holds monitor/scenario facts, ``derived`` the reasoner's
    fixpoint over them. Any entity absent from both is in its ok state.
    """

    def __init__(self, model: ArchitectureModel, groundings: dict):
        self.model = model
        self.groundings = groundings  # objective id -> FunctionGrounding
        self.asserted: set = set()
        self.derived: set = set()
        self.measurements: dict = {}  # qa_type -> QAValue
        self.unresolvable: set = set()
        self.stale = False

    # -- fact maintenance ---------------------------------------------------

    def assert_fact(self, fact):
        if isinstance(fact, QAValue):
            return self.assert_measurement(fact)
        self._check_entity(fact)
        self.asserted.add(fact)
        self.stale = True

    def assert_measurement(self, qav: QAValue):
        if self.model.qa_type(qav.qa_type) is None:
            raise UnknownEntityError(f"unknown QA type {qav.qa_type!r}")
        self.measurements[qav.qa_type] = qav
        self.stale = True

    def retract(self, fact: Fact):
        self.asserted.discard(fact)
        self.stale = True

    def facts(self) -> frozenset:
        return frozenset(self.asserted | self.derived)

    def has_fact(self, fact: Fact) -> bool:
        return fact in self.asserted or fact in self.derived

    def query(self, kind: str, entity: Optional[str] = None) -> list:
        """All asserted and derived facts matching kind (and entity if given),
        sorted by entity name."""
        if kind not in FACT_KINDS:
            raise KnowledgeError(f"unknown fact kind {kind!r}")
        matches = [f for f in self.facts() if f.kind == kind
                   and (entity is None or f.entity == entity)]
        return sorted(matches, key=lambda f: f.entity)

    # -- status accessors (closed world) ------------------------------------

    def component_state(self, name: str) -> str:
        return "error" if self.has_fact(Fact(COMPONENT_ERROR, name)) else "ok"

    def design_realisable(self, name: str) -> bool:
        return not self.has_fact(Fact(DESIGN_UNREALISABLE, name))

    # -- internals -----------------------------------------------------------

    def _check_entity(self, fact: Fact):
        if fact.kind == COMPONENT_ERROR:
            known = self.model.component(fact.entity) is not None
        elif fact.kind == DESIGN_UNREALISABLE:
            known = self.model.design(fact.entity) is not None
        elif fact.kind in (OBJECTIVE_IN_ERROR, GROUNDING_IN_ERROR):
            known = self.model.objective(fact.entity) is not None
        else:
            raise KnowledgeError(f"unknown fact kind {fact.kind!r}")
        if not known:
            raise UnknownEntityError(f"unknown entity in {fact}")


def kb_init(model: ArchitectureModel, initial_groundings: dict) -> KnowledgeBase:
    """Build a fresh all-ok knowledge base.

    ``initial_groundings`` maps objective id to design name; each design must
    realize the objective's function.
    """
    groundings = {}
    for oid, design_name in initial_groundings.items():
        objective = model.objective(oid)
        if objective is None:
            raise UnknownEntityError(f"unknown objective {oid!r}")
        design = model.design(design_name)
        if design is None:
            raise UnknownEntityError(f"unknown design {design_name!r}")
        if design.realizes != objective.function:
            raise GroundingMismatchError(
                f"design {design_name!r} realizes {design.realizes!r}, "
                f"objective {oid!r} needs {objective.function!r}")
        groundings[oid] = FunctionGrounding(objective=oid, design=design_name)
    return KnowledgeBase(model, groundings)
