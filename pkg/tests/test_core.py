import json
import pathlib

import numpy as np
import pytest

from designbench import make
from designbench.core import (
    Category,
    ConstraintError,
    DesignSpace,
    Direction,
    OptHistory,
    ProblemSpec,
    RegistryError,
    Severity,
    UnknownConditionError,
    Violation,
    registered,
)
from violation_cases import CASES, case_id, run_case

DATA = pathlib.Path(__file__).parent / "data"


@pytest.mark.parametrize("case", CASES, ids=[case_id(c) for c in CASES])
def test_constraint_table_rows(case):
    assert run_case(case) == case[4]


def test_registry_lists_builtin_problems():
    assert registered() == sorted(["beams2d/v0", "heatconduction2d/v0", "thermoelasticbeams2d/v0",
                                   "photonics2d/v0", "powerelectronics/v0"])


def test_registry_accepts_path_style_ids():
    assert make("problems/beams2d/v0").problem_id == "beams2d/v0"


def test_registry_miss():
    with pytest.raises(RegistryError):
        make("airfoil/v0")


def test_unknown_condition_is_an_input_error():
    p = make("beams2d/v0")
    with pytest.raises(UnknownConditionError):
        p.check_constraints(None, {"nonsense": 1.0})


def test_metadata():
    p = make("beams2d/v0")
    assert p.objectives == (("compliance", Direction.MINIMIZE),)
    assert p.conditions_keys == ["volfrac", "forcedist", "rmin", "overhang_constraint"]
    assert p.design_space.shape == (50, 100)
    spec = p.spec
    assert spec.problem_id == "beams2d/v0"
    assert spec.default_conditions()["volfrac"] == 0.35


def test_spec_rejects_duplicate_names():
    with pytest.raises(ValueError):
        ProblemSpec("x", 0, DesignSpace(0, 1, (2,)), (("a", Direction.MINIMIZE), ("a", Direction.MINIMIZE)), ())


def test_design_space_bounds_validation():
    with pytest.raises(ValueError):
        DesignSpace(np.array([0.0, 2.0]), np.array([1.0, 1.0]), (2,))


def test_degenerate_box_samples_the_constant_design():
    space = DesignSpace(np.array([0.3, -1.0]), np.array([0.3, -1.0]), (2,))
    assert np.array_equal(space.sample(np.random.default_rng(0)), [0.3, -1.0])


def test_message_format():
    v = Violation("volfrac", 2.0, 0.0, 1.0, Category.THEORY, Severity.ERROR)
    assert v.message == "Config.volfrac: 2.0 ∉ [0.0, 1.0] (Theory, error)"
    v = Violation("rmin", 0.0, 0.0, float("inf"), Category.THEORY, Severity.ERROR, lo_open=True)
    assert v.message == "Config.rmin: 0.0 ∉ (0.0, inf) (Theory, error)"


def test_strict_refuses_errors_and_runs_with_warnings():
    p = make("beams2d/v0", nelx=12, nely=6)
    x = np.full((6, 12), 0.35)
    with pytest.raises(ConstraintError) as info:
        p.simulate(x, {"volfrac": 2.0}, strict=True)
    assert "Config.volfrac: 2.0 ∉ [0.0, 1.0] (Theory, error)" in str(info.value)
    # a warning alone does not block
    assert np.isfinite(p.simulate(x, {"volfrac": 0.05}, strict=True)[0])
    # without strict the invalid configuration still runs
    assert np.isfinite(p.simulate(x, {"volfrac": 2.0})[0])


def test_random_design_determinism_and_seed_spread():
    p = make("beams2d/v0", nelx=8, nely=4)
    a, conds = p.random_design(seed=3)
    b, _ = p.random_design(seed=3)
    assert np.array_equal(a, b)
    assert conds == dict(p.conditions)
    draws = [p.random_design(seed=s)[0].tobytes() for s in range(100)]
    assert len(set(draws)) == 100


def test_random_design_golden_sequences():
    import sys

    sys.path.insert(0, str(pathlib.Path(__file__).parent / "oracles"))
    from sampler_golden import sequence

    golden = json.loads((DATA / "sampler_golden.json").read_text())
    for pid, entry in golden.items():
        assert sequence(make(pid, **entry["config"])) == entry["draws"], pid


def test_reset_makes_optimize_repeatable():
    p = make("beams2d/v0", nelx=12, nely=6)
    p.reset(42)
    start, _ = p.random_design()
    x1, h1 = p.optimize(start, max_iter=8)
    p.reset(42)
    start2, _ = p.random_design()
    x2, h2 = p.optimize(start2, max_iter=8)
    assert np.array_equal(x1, x2)
    assert h1 == h2
    assert h1.iterations == len(h1.objective_values)


def test_history_equality_and_array():
    h = OptHistory()
    h.append([1.0, 2.0])
    h.append([0.5, 1.5])
    assert h.iterations == 2
    assert h.objective_array().shape == (2, 2)
    g = OptHistory()
    g.append([1.0, 2.0])
    assert h != g


def test_render_dimensions_follow_design_shape():
    p = make("beams2d/v0", nelx=30, nely=10)
    img = p.render(np.zeros((10, 30)), "pgm")
    assert img.startswith(b"P5\n30 10\n255\n")
    assert len(img) == len(b"P5\n30 10\n255\n") + 300
    # void is white
    assert set(img[-300:]) == {255}
    svg = p.render(np.ones((10, 30)), "svg").decode()
    assert 'viewBox="0 0 30 10"' in svg
