"""Rule-engine tests: hand-derivable cases, confluence, oracle equivalence."""
import itertools
import random

from metactl import reasoner
from metactl.tomasys import (
    COMPONENT_ERROR,
    DESIGN_UNREALISABLE,
    GROUNDING_IN_ERROR,
    OBJECTIVE_IN_ERROR,
    Fact,
    QAValue,
    kb_init,
)

from fixtures import closure_oracle, pyramid_model, random_kb, random_model


def _pyramid_kb():
    return kb_init(pyramid_model(), {"o_build": "dual_arm",
                                     "o_detect_tag": "tag_detect_normal"})


def test_empty_kb_derives_nothing():
    kb = _pyramid_kb()
    report = reasoner.infer(kb)
    assert report.derived == set()
    assert kb.derived == set()
    assert reasoner.objective_status(kb, "o_build") == "ok"


def test_component_error_propagates_to_objective():
    kb = _pyramid_kb()
    kb.assert_fact(Fact(COMPONENT_ERROR, "arm_left"))
    report = reasoner.infer(kb)
    assert report.derived >= {
        Fact(DESIGN_UNREALISABLE, "dual_arm"),
        Fact(GROUNDING_IN_ERROR, "o_build"),
        Fact(OBJECTIVE_IN_ERROR, "o_build"),
    }
    # single_arm_with_move also needs arm_left, so it is unrealisable too
    assert Fact(DESIGN_UNREALISABLE, "single_arm_with_move") in report.derived
    # the tag-detection objective is untouched
    assert Fact(OBJECTIVE_IN_ERROR, "o_detect_tag") not in kb.facts()
    assert reasoner.objective_status(kb, "o_build") == "in_error"


def _nav_kb():
    from metactl.archmodel import generate_nav_model
    return kb_init(generate_nav_model(), {"o_nav": "f_nav_v0.75_a6_r0.5"})


def test_qa_threshold_violation_fires_r3():
    kb = _nav_kb()  # o_nav requires safety >= 0.4
    kb.assert_fact(QAValue("safety", 0.37, timestamp=1.0))
    report = reasoner.infer(kb)
    r3 = [f for f in report.firings if f.rule_id == "R3"]
    assert r3, report.trace()
    assert Fact(OBJECTIVE_IN_ERROR, "o_nav") in kb.facts()


def test_satisfied_measurement_does_not_fire():
    kb = _nav_kb()
    kb.assert_fact(QAValue("safety", 0.95, timestamp=1.0))
    kb.assert_fact(QAValue("energy", 0.4, timestamp=1.0))
    report = reasoner.infer(kb)
    assert report.derived == set()


def test_retraction_recovers_through_recomputation():
    kb = _pyramid_kb()
    fact = Fact(COMPONENT_ERROR, "tag_detector_normal")
    kb.assert_fact(fact)
    reasoner.infer(kb)
    assert reasoner.objective_status(kb, "o_detect_tag") == "in_error"
    kb.retract(fact)
    reasoner.infer(kb)
    assert kb.derived == set()
    assert reasoner.objective_status(kb, "o_detect_tag") == "ok"


def test_monotonicity_adding_facts_never_shrinks_fixpoint():
    rng = random.Random(7)
    for _ in range(25):
        model = random_model(rng)
        kb = random_kb(rng, model)
        reasoner.infer(kb)
        before = kb.facts()
        healthy = [c.name for c in model.components
                   if Fact(COMPONENT_ERROR, c.name) not in kb.asserted]
        if not healthy:
            continue
        kb.assert_fact(Fact(COMPONENT_ERROR, rng.choice(healthy)))
        reasoner.infer(kb)
        assert before <= kb.facts()


def test_confluence_all_rule_orderings_small():
    kb = _pyramid_kb()
    kb.assert_fact(Fact(COMPONENT_ERROR, "arm_right"))
    kb.assert_fact(QAValue("performance", 0.1, timestamp=1.0))
    results = set()
    for order in itertools.permutations(reasoner.RULE_IDS):
        reasoner.infer(kb, rule_order=order)
        results.add(kb.facts())
    assert len(results) == 1


def test_fixpoint_matches_exhaustive_oracle_on_random_models():
    rng = random.Random(42)
    for _ in range(50):
        model = random_model(rng)
        kb = random_kb(rng, model)
        reasoner.infer(kb)
        assert kb.facts() == closure_oracle(kb)


def test_iterations_bounded():
    rng = random.Random(3)
    for _ in range(20):
        model = random_model(rng)
        kb = random_kb(rng, model)
        report = reasoner.infer(kb)
        entities = (len(model.components) + len(model.designs)
                    + len(model.objectives))
        assert report.iterations <= entities + 1


def test_trace_mentions_rule_and_fact():
    kb = _pyramid_kb()
    kb.assert_fact(Fact(COMPONENT_ERROR, "arm_left"))
    report = reasoner.infer(kb)
    trace = report.trace()
    assert "R1" in trace
    assert "design_unrealisable(dual_arm)" in trace
