import math
from pathlib import Path

import numpy as np
import pytest

from gridforge.milp import (
    MipModel, MipSession, NameCollision, SolveParams, Status, UnknownVariable, ValueOutOfBounds,
    export_mps, fix_assignment, read_solution_file, solve_lp, solve_mip,
)
from milp_cases import enumerate_optimum, random_model

GOLDEN = Path(__file__).with_name("golden")


def knapsack_model():
    m = MipModel("knap")
    a = m.add_var("a", binary=True)
    b = m.add_var("b", binary=True)
    x = m.add_var("x", 0, 2.5)
    m.add_constr("cap", {a: 2, b: 3, x: 1}, "<=", 4)
    m.add_constr("need", {a: 1, x: -1}, ">=", -1)
    m.set_objective({a: 3, b: 4, x: 0.5}, "max")
    return m


def test_lp_small_vertex_optimum():
    # min 3x + 2y s.t. x + y >= 4, x - y <= 2; vertex enumeration gives (0, 4)
    m = MipModel("lp")
    x, y = m.add_var("x"), m.add_var("y")
    m.add_constr("c1", {x: 1, y: 1}, ">=", 4)
    m.add_constr("c2", {x: 1, y: -1}, "<=", 2)
    m.set_objective({x: 3, y: 2})
    sol = solve_lp(m)
    assert sol.status == Status.OPTIMAL
    assert sol.objective_value == pytest.approx(8.0, abs=1e-9)
    assert sol.assignment == pytest.approx([0.0, 4.0], abs=1e-9)


def test_lp_infeasible_and_unbounded():
    m = MipModel()
    x = m.add_var("x", 0, 1)
    m.add_constr("c", {x: 1}, ">=", 2)
    m.set_objective({x: 1})
    assert solve_lp(m).status == Status.INFEASIBLE

    u = MipModel()
    y = u.add_var("y")
    u.set_objective({y: 1}, "max")
    assert solve_lp(u).status == Status.UNBOUNDED


def test_knapsack_by_hand():
    # a=b=1 breaks the capacity row; b alone with x=1 gives 4 + 0.5
    sol = solve_mip(knapsack_model())
    assert sol.status == Status.OPTIMAL
    assert sol.objective_value == pytest.approx(4.5, abs=1e-9)
    assert sol.assignment == pytest.approx([0, 1, 1], abs=1e-9)


def test_pure_binary_knapsack_seven():
    m = MipModel()
    a, b = m.add_var("a", binary=True), m.add_var("b", binary=True)
    m.add_constr("w", {a: 1, b: 1}, "<=", 2)
    m.set_objective({a: 3, b: 4}, "max")
    assert solve_mip(m).objective_value == pytest.approx(7.0)


@pytest.mark.parametrize("seed", range(60))
def test_random_models_match_enumeration(seed):
    m = random_model(seed)
    expect = enumerate_optimum(m)
    sol = solve_mip(m)
    if expect is None:
        assert sol.status == Status.INFEASIBLE
    else:
        assert sol.status == Status.OPTIMAL
        assert sol.objective_value == pytest.approx(expect, abs=1e-6)
        assert not m.violations(sol.assignment)


@pytest.mark.parametrize("seed", range(20))
def test_highs_engine_agrees(seed):
    m = random_model(1000 + seed)
    a = solve_mip(m)
    b = solve_mip(m, SolveParams(lp_engine="highs"))
    assert a.status == b.status
    if a.status == Status.OPTIMAL:
        assert a.objective_value == pytest.approx(b.objective_value, abs=1e-6)


@pytest.mark.parametrize("seed", range(15))
def test_session_fixings_match_fixed_copy(seed):
    m = random_model(2000 + seed, n_bin=6)
    session = MipSession(m)
    rng = np.random.default_rng(seed)
    for _ in range(4):
        fixes = {int(j): float(rng.integers(0, 2)) for j in rng.choice(6, 3, replace=False)}
        a = session.solve(fixes)
        b = solve_mip(fix_assignment(m, fixes))
        assert a.status == b.status
        if b.status == Status.OPTIMAL:
            assert a.objective_value == pytest.approx(b.objective_value, abs=1e-6)


def test_session_relaxation_bounds_mip():
    for seed in range(10):
        m = random_model(3000 + seed)
        sol = solve_mip(m)
        if sol.status != Status.OPTIMAL:
            continue
        lp = MipSession(m).relax()
        if m.sense == "min":
            assert lp.bound <= sol.objective_value + 1e-6
        else:
            assert lp.bound >= sol.objective_value - 1e-6


def test_cutoff_prunes_everything():
    sol = solve_mip(knapsack_model(), SolveParams(objective_cutoff=5.0))
    assert not sol.has_solution


def test_model_errors():
    m = MipModel()
    m.add_var("x")
    with pytest.raises(ValueError):
        m.add_var("x")
    with pytest.raises(UnknownVariable):
        m.var_index("nope")
    with pytest.raises(ValueOutOfBounds):
        fix_assignment(m, {0: -1.0})
    with pytest.raises(ValueError):
        SolveParams(time_limit_seconds=0)


def test_mps_golden_knapsack():
    assert export_mps(knapsack_model()) == (GOLDEN / "knap.mps").read_text()


def test_mps_name_collision():
    m = MipModel()
    m.add_var("a b")
    m.add_var("a_b")
    with pytest.raises(NameCollision):
        export_mps(m)


def test_mps_roundtrip_through_highs(tmp_path):
    highspy = pytest.importorskip("highspy")
    m = knapsack_model()
    path = tmp_path / "k.mps"
    path.write_text(export_mps(m))
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(str(path))
    h.run()
    assert h.getInfo().objective_function_value == pytest.approx(4.5)


def test_solution_file_reading():
    m = knapsack_model()
    x = read_solution_file(m, "a 0\nb 1\nx 1\n")
    assert m.objective_value(x) == pytest.approx(4.5)


def test_solve_is_deterministic():
    m = random_model(77, n_bin=10)
    a, b = solve_mip(m), solve_mip(m)
    assert a.objective_value == b.objective_value
    assert np.array_equal(a.assignment, b.assignment)
    assert a.node_count == b.node_count
    assert math.isfinite(a.bound) or a.status != Status.OPTIMAL
