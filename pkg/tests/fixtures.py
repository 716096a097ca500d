"""Shared fixtures and independent oracles used across the test suite.

The oracles deliberately re-derive results by exhaustive enumeration so the
production implementations are checked against independent logic, not
against themselves.
"""
import random
from importlib import resources

from metactl.archmodel import parse_model
from metactl.tomasys import (
    COMPONENT_ERROR,
    DESIGN_UNREALISABLE,
    GROUNDING_IN_ERROR,
    HIGHER_BETTER,
    LOWER_BETTER,
    NFR,
    OBJECTIVE_IN_ERROR,
    ArchitectureModel,
    Component,
    Fact,
    Function,
    FunctionDesign,
    Objective,
    QAType,
    kb_init,
)


def pyramid_model():
    path = resources.files("metactl.data") / "pyramid.archmodel"
    return parse_model(path.read_text(encoding="utf-8"))


def navigation_model_text():
    path = resources.files("metactl.data") / "navigation.archmodel"
    return path.read_text(encoding="utf-8")


# ---------------------------------------------------------------------------
# random-model generator (small worlds for exhaustive checking)

def random_model(rng: random.Random, max_components=4, max_designs=3,
                 max_objectives=2) -> ArchitectureModel:
    model = ArchitectureModel(name="random")
    model.qa_types = [QAType("qa_hi", HIGHER_BETTER),
                      QAType("qa_lo", LOWER_BETTER)]
    n_comp = rng.randint(1, max_components)
    model.components = [Component(f"c{i}") for i in range(n_comp)]
    model.functions = [Function("f0")]
    n_designs = rng.randint(1, max_designs)
    for i in range(n_designs):
        requires = tuple(rng.sample([c.name for c in model.components],
                                    rng.randint(1, n_comp)))
        model.designs.append(FunctionDesign(
            name=f"d{i}", realizes="f0", requires=requires,
            qa_estimates=(("qa_hi", round(rng.random(), 3)),
                          ("qa_lo", round(rng.random(), 3))),
            utility=round(rng.random(), 3)))
    for i in range(rng.randint(1, max_objectives)):
        nfrs = []
        if rng.random() < 0.7:
            nfrs.append(NFR("qa_hi", ">=", round(rng.random(), 3)))
        if rng.random() < 0.7:
            nfrs.append(NFR("qa_lo", "<=", round(rng.random(), 3)))
        model.objectives.append(Objective(id=f"o{i}", function="f0",
                                          nfrs=tuple(nfrs)))
    return model


def random_kb(rng: random.Random, model: ArchitectureModel):
    groundings = {o.id: rng.choice(model.designs).name
                  for o in model.objectives}
    kb = kb_init(model, groundings)
    for comp in model.components:
        if rng.random() < 0.35:
            kb.assert_fact(Fact(COMPONENT_ERROR, comp.name))
    for design in model.designs:
        if rng.random() < 0.2:
            kb.assert_fact(Fact(DESIGN_UNREALISABLE, design.name))
    for qa in model.qa_types:
        if rng.random() < 0.6:
            from metactl.tomasys import QAValue
            kb.assert_fact(QAValue(qa.name, round(rng.random(), 3),
                                   timestamp=rng.random() * 10))
    return kb


# ---------------------------------------------------------------------------
# reasoner oracle: naive closure by repeated full re-enumeration

def closure_oracle(kb) -> frozenset:
    """All facts derivable from kb.asserted under R1-R4, computed by brute
    force: keep sweeping every possible instantiation until nothing new."""
    facts = set(kb.asserted)
    while True:
        new = set()
        for design in kb.model.designs:
            if any(Fact(COMPONENT_ERROR, c) in facts
                   for c in design.requires):
                new.add(Fact(DESIGN_UNREALISABLE, design.name))
        for oid, grounding in kb.groundings.items():
            if Fact(DESIGN_UNREALISABLE, grounding.design) in facts:
                new.add(Fact(GROUNDING_IN_ERROR, oid))
            objective = kb.model.objective(oid)
            for nfr in objective.nfrs:
                m = kb.measurements.get(nfr.qa_type)
                if m is not None and not nfr.satisfied_by(m.value):
                    new.add(Fact(GROUNDING_IN_ERROR, oid))
            if Fact(GROUNDING_IN_ERROR, oid) in facts:
                new.add(Fact(OBJECTIVE_IN_ERROR, oid))
        if new <= facts:
            return frozenset(facts)
        facts |= new


# ---------------------------------------------------------------------------
# planner oracle: filter + argmax + lexicographic tie-break, spelled out

def plan_oracle(kb, objective_id):
    objective = kb.model.objective(objective_id)
    grounding = kb.groundings.get(objective_id)
    current = grounding.design if grounding else None
    feasible = []
    for design in kb.model.designs_for(objective.function):
        if design.name == current:
            continue
        if Fact(DESIGN_UNREALISABLE, design.name) in kb.asserted \
                or Fact(DESIGN_UNREALISABLE, design.name) in kb.derived:
            continue
        ok = True
        for nfr in objective.nfrs:
            estimate = design.estimate(nfr.qa_type)
            if estimate is None or not nfr.satisfied_by(estimate):
                ok = False
                break
        if ok:
            feasible.append(design)
    if not feasible:
        return None
    best_utility = max(d.utility for d in feasible)
    names = sorted(d.name for d in feasible if d.utility == best_utility)
    return names[0]
