"""Forward-chaining Horn rules over the knowledge base.

The four rules propagate component errors and violated quality thresholds up
to objective status:

  R1: component_error(c) and c in d.requires      => design_unrealisable(d)
  R2: grounding on d and design_unrealisable(d)   => grounding_in_error(o)
  R3: grounding on d for o, NFR on q violated by
      the latest measurement of q                 => grounding_in_error(o)
  R4: grounding_in_error(o)                       => objective_in_error(o)

All rules are monotone over negative facts, so the fixpoint is unique and
independent of evaluation order. The fixpoint is recomputed from the asserted
facts on every call, which makes retraction trivially correct.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .tomasys import (
    COMPONENT_ERROR,
    DESIGN_UNREALISABLE,
    GROUNDING_IN_ERROR,
    OBJECTIVE_IN_ERROR,
    Fact,
    KnowledgeBase,
    StaleKnowledgeError,
)

RULE_IDS = ("R1", "R2", "R3", "R4")


@dataclass(frozen=True)
class RuleFiring:
    rule_id: str
    bindings: tuple  # ((variable, entity), ...)
    derived_fact: Fact

    def __str__(self):
        bound = " ".join(f"{k}={v}" for k, v in self.bindings)
        return f"{self.rule_id} {bound} => {self.derived_fact}"


@dataclass
class InferenceReport:
    firings: list = field(default_factory=list)
    iterations: int = 0

    @property
    def derived(self) -> set:
        return {f.derived_fact for f in self.firings}

    def trace(self) -> str:
        return "\n".join(str(f) for f in self.firings)


def _fire_r1(kb, facts):
    out = []
    for design in kb.model.designs:
        for comp in design.requires:
            if Fact(COMPONENT_ERROR, comp) in facts:
                out.append(RuleFiring(
                    "R1", (("c", comp), ("d", design.name)),
                    Fact(DESIGN_UNREALISABLE, design.name)))
    return out


def _fire_r2(kb, facts):
    out = []
    for oid, grounding in kb.groundings.items():
        if Fact(DESIGN_UNREALISABLE, grounding.design) in facts:
            out.append(RuleFiring(
                "R2", (("o", oid), ("d", grounding.design)),
                Fact(GROUNDING_IN_ERROR, oid)))
    return out


def _fire_r3(kb, facts):
    out = []
    for oid, grounding in kb.groundings.items():
        objective = kb.model.objective(oid)
        for nfr in objective.nfrs:
            measurement = kb.measurements.get(nfr.qa_type)
            if measurement is None:
                continue  # missing measurements never violate (closed world)
            if not nfr.satisfied_by(measurement.value):
                out.append(RuleFiring(
                    "R3",
                    (("o", oid), ("q", nfr.qa_type),
                     ("m", repr(measurement.value))),
                    Fact(GROUNDING_IN_ERROR, oid)))
    return out


def _fire_r4(kb, facts):
    out = []
    for oid in kb.groundings:
        if Fact(GROUNDING_IN_ERROR, oid) in facts:
            out.append(RuleFiring(
                "R4", (("o", oid),), Fact(OBJECTIVE_IN_ERROR, oid)))
    return out


_RULES = {"R1": _fire_r1, "R2": _fire_r2, "R3": _fire_r3, "R4": _fire_r4}


def infer(kb: KnowledgeBase, rule_order=None) -> InferenceReport:
    """Run the rules to a fixpoint, replacing kb.derived.

    ``rule_order`` reorders evaluation within each iteration; the resulting
    fixpoint is the same for every ordering (confluence).
    """
    order = tuple(rule_order) if rule_order is not None else RULE_IDS
    report = InferenceReport()
    facts = set(kb.asserted)
    seen = set(facts)
    changed = True
    while changed:
        changed = False
        report.iterations += 1
        for rule_id in order:
            for firing in _RULES[rule_id](kb, facts):
                if firing.derived_fact not in seen:
                    seen.add(firing.derived_fact)
                    facts.add(firing.derived_fact)
                    report.firings.append(firing)
                    changed = True
    kb.derived = facts - kb.asserted
    kb.stale = False
    # objectives that recovered are no longer unresolvable
    kb.unresolvable = {
        oid for oid in kb.unresolvable
        if Fact(OBJECTIVE_IN_ERROR, oid) in facts
    }
    return report


def objective_status(kb: KnowledgeBase, objective_id: str) -> str:
    """ok / in_error / unresolvable, valid only after infer()."""
    if kb.stale:
        raise StaleKnowledgeError(
            "assertions occurred after the last inference pass")
    if not kb.has_fact(Fact(OBJECTIVE_IN_ERROR, objective_id)):
        return "ok"
    if objective_id in kb.unresolvable:
        return "unresolvable"
    return "in_error"
