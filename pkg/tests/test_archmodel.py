"""DSL tests: parsing, validation diagnostics, round trips, the generator."""
import itertools

import pytest

from metactl import archmodel
from metactl.archmodel import (
    ModelError,
    NavParameterSpace,
    estimate_energy,
    estimate_safety,
    generate_nav_model,
    nav_design_name,
    parse_model,
    print_model,
    validate,
)

from fixtures import navigation_model_text, pyramid_model

MINIMAL = """
system tiny {
  qa_type speed higher_better;
  component engine;
  function f_go;
  design slow realizes f_go {
    requires engine;
    qa speed = 0.5;
    utility = 0.5;
  }
  objective o_go : f_go {
    require speed >= 0.3;
  }
}
"""


def test_minimal_model_parses():
    model = parse_model(MINIMAL)
    assert [d.name for d in model.designs] == ["slow"]
    assert model.objectives[0].nfrs[0].threshold == 0.3
    assert validate(model) == []


def test_pyramid_example_shape():
    model = pyramid_model()
    assert {f.name for f in model.functions} == \
        {"f_build_pyramid", "f_detect_tag"}
    assert len(model.designs) >= 4
    assert {d.name for d in model.designs} >= \
        {"dual_arm", "single_arm_with_move",
         "tag_detect_normal", "tag_detect_lowlight"}


@pytest.mark.parametrize("source_fn", [
    lambda: print_model(pyramid_model()),
    lambda: navigation_model_text(),
    lambda: MINIMAL,
])
def test_round_trip_identity(source_fn):
    first = parse_model(source_fn())
    text = print_model(first)
    second = parse_model(text)
    assert first == second
    # printing is a normal form: the second trip is byte-identical
    assert print_model(second) == text


def test_shipped_navigation_model_matches_generator():
    assert parse_model(navigation_model_text()) == generate_nav_model()


def _diag_messages(source):
    with pytest.raises(ModelError) as exc:
        parse_model(source)
    return [str(d) for d in exc.value.diagnostics]


def test_undeclared_component_reported_with_position():
    bad = MINIMAL.replace("requires engine;", "requires warp_drive;")
    messages = _diag_messages(bad)
    assert any("warp_drive" in m for m in messages)
    line, col = messages[0].split(" ", 1)[0].split(":")
    assert int(line) > 1 and int(col) >= 1


def test_duplicate_design_is_an_error():
    dup = MINIMAL.replace(
        "objective",
        "design slow realizes f_go { requires engine; utility = 0.1; }\n"
        "  objective")
    assert any("duplicate" in m for m in _diag_messages(dup))


def test_comparator_must_match_polarity():
    bad = MINIMAL.replace("require speed >= 0.3;", "require speed <= 0.3;")
    assert any("polarity" in m for m in _diag_messages(bad))


def test_out_of_range_values_rejected():
    assert any("outside [0,1]" in m for m in
               _diag_messages(MINIMAL.replace("qa speed = 0.5;",
                                              "qa speed = 1.5;")))
    assert any("outside [0,1]" in m for m in
               _diag_messages(MINIMAL.replace("utility = 0.5;",
                                              "utility = 7;")))


def test_syntax_error_has_position():
    messages = _diag_messages("system broken {")
    assert messages
    assert all(m.split(" ", 1)[0].count(":") == 1 for m in messages)


def test_unsatisfiable_nfr_warns_but_parses():
    source = MINIMAL.replace("require speed >= 0.3;",
                             "require speed >= 0.99;")
    model = parse_model(source)
    warnings = [d for d in validate(model) if d.severity == "warning"]
    assert any("statically unsatisfiable" in d.message for d in warnings)


def test_generator_cardinality_and_names():
    model = generate_nav_model()
    assert len(model.designs) == 27
    space = NavParameterSpace()
    expected = {
        nav_design_name(v, a, r)
        for v, a, r in itertools.product(space.max_vel, space.accel_lim,
                                         space.inflation_radius)
    }
    assert {d.name for d in model.designs} == expected
    assert "f_nav_v0.75_a9_r0.5" in expected
    assert [o.id for o in model.objectives] == ["o_nav"]
    nfrs = {(n.qa_type, n.comparator, n.threshold)
            for n in model.objectives[0].nfrs}
    assert nfrs == {("safety", ">=", 0.4), ("energy", "<=", 0.7)}


def test_generator_singleton_space():
    space = NavParameterSpace(max_vel=(0.5,), accel_lim=(6.0,),
                              inflation_radius=(0.65,))
    model = generate_nav_model(space)
    assert len(model.designs) == 1


def test_generator_rejects_bad_spaces():
    with pytest.raises(ValueError):
        NavParameterSpace(max_vel=()).check()
    with pytest.raises(ValueError):
        NavParameterSpace(max_vel=(0.5, 0.3)).check()
    with pytest.raises(ValueError):
        NavParameterSpace(accel_lim=(-1.0, 2.0)).check()


def test_estimate_monotonicity():
    space = NavParameterSpace()
    for v in space.max_vel:
        safeties = [estimate_safety(v, r) for r in space.inflation_radius]
        assert safeties == sorted(safeties)
    for r in space.inflation_radius:
        safeties = [estimate_safety(v, r) for v in space.max_vel]
        assert safeties == sorted(safeties, reverse=True)
    energies = [estimate_energy(v) for v in space.max_vel]
    assert energies == sorted(energies)
    assert energies[0] < energies[-1]


def test_estimates_land_in_design_records():
    model = generate_nav_model()
    design = model.design("f_nav_v0.5_a6_r0.65")
    assert design.estimate("safety") == pytest.approx(
        estimate_safety(0.5, 0.65))
    assert design.estimate("energy") == pytest.approx(estimate_energy(0.5))
    assert design.utility == pytest.approx(0.5 / 0.75)
    assert design.requires[0] == "nav_stack"
