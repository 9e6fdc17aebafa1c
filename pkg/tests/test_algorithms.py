import dataclasses
import math

import pytest

from gridforge.algorithms import (
    ALGORITHMS, INFEASIBLE, OPTIMAL, TIME_LIMIT, VnsParams, brute_force_oracle, evaluate_design,
    repair_switches, run_algorithm, solve_extensive, solve_greedy, solve_sbd, solve_sbvnds, solve_vns,
)
from gridforge.formulation import Design
from gridforge.grid_model import Bus, Edge, GenerationSite, LoadBlock, NetworkInstance
from gridforge.milp import SolveParams
from gridforge.scenario import Scenario, ScenarioSet
from checks import phase_band_violations, radiality_violations
from suite import disjoint_hardening, random_case, tri3

DOUBLE = ScenarioSet((Scenario(0, frozenset({"e01", "e02"})),))


@pytest.mark.parametrize("name", ALGORITHMS)
def test_tri3_double_damage(name):
    inst = tri3()
    rep = run_algorithm(name, inst, DOUBLE)
    assert rep.objective == pytest.approx(10.0)
    assert rep.feasible
    assert [p.l_value for p in rep.per_scenario] == [0.0]


@pytest.mark.parametrize("name", ALGORITHMS)
def test_benign_scenarios_cost_nothing(name):
    rep = run_algorithm(name, tri3(), ScenarioSet((Scenario(0), Scenario(1))))
    assert rep.objective == pytest.approx(0.0)
    assert rep.feasible


def test_disjoint_hardening_greedy_overpays():
    inst, scen = disjoint_hardening()
    g = solve_greedy(inst, scen)
    x = solve_extensive(inst, scen)
    assert g.objective == pytest.approx(20.0)
    assert x.objective == pytest.approx(10.0)
    assert brute_force_oracle(inst, scen)[0] == pytest.approx(10.0)
    assert solve_sbd(inst, scen).objective == pytest.approx(10.0)
    assert solve_vns(inst, scen).objective == pytest.approx(10.0)


def test_greedy_ignores_epsilon_through_dispatch():
    inst, scen = disjoint_hardening()
    assert run_algorithm("greedy", inst, scen, epsilon=0.5).objective == pytest.approx(20.0)


def test_epsilon_budget_allows_one_violation():
    inst, scen = disjoint_hardening()
    # either scenario alone still cuts off critical bus 1, so one hardening (10) remains necessary
    rep = solve_extensive(inst, scen, epsilon=0.5)
    assert rep.objective == pytest.approx(10.0)
    assert sum(p.l_value > 0 for p in rep.per_scenario) <= 1
    assert solve_extensive(inst, scen, epsilon=0.0).objective == pytest.approx(10.0)


@pytest.mark.parametrize("index", [0, 3, 7, 11])
def test_exact_methods_agree_with_oracle(index):
    case = random_case(index)
    oracle, design = brute_force_oracle(case.instance, case.scenarios)
    x = solve_extensive(case.instance, case.scenarios)
    s = solve_sbd(case.instance, case.scenarios)
    assert x.status == s.status == OPTIMAL
    assert x.objective == pytest.approx(oracle, abs=1e-6)
    assert s.objective == pytest.approx(oracle, abs=1e-6)
    assert all(p.l_value == 0 for p in evaluate_design(case.instance, case.scenarios, design))


@pytest.mark.parametrize("index", [1, 3, 5])
def test_solutions_are_radial_and_balanced(index):
    case = random_case(index)
    for name in ALGORITHMS:
        rep = run_algorithm(name, case.instance, case.scenarios)
        for p in rep.per_scenario:
            assert p.operation is not None
            assert not radiality_violations(case.instance, p.operation)
            assert not phase_band_violations(case.instance, p.operation)
        for op in rep.operations:
            assert not radiality_violations(case.instance, op)


def test_sbd_trace_and_subset():
    case = random_case(4)
    rep = solve_sbd(case.instance, case.scenarios)
    assert len(rep.scenarios_in_master) <= len(case.scenarios)
    assert rep.trace[0]["event"] == "master"
    added = [ev for ev in rep.trace if ev["event"] == "add_scenario"]
    assert len(added) == len(rep.scenarios_in_master) - 1
    with pytest.raises(ValueError):
        solve_sbd(case.instance, case.scenarios, initial=())


def test_vns_is_deterministic():
    case = random_case(32)
    vp = VnsParams(max_restarts=3, max_iterations=3, shuffle_seed=5)
    a = solve_vns(case.instance, case.scenarios, vns=vp)
    b = solve_vns(case.instance, case.scenarios, vns=vp)
    assert a.objective == b.objective
    assert a.design == b.design
    assert [ev for ev in a.trace] == [ev for ev in b.trace]


def test_vns_improves_a_poor_start():
    inst, scen = disjoint_hardening()
    start = Design.baseline(inst)
    for e in ("e01", "e02", "e12"):
        start.hardened[e] = 1
    rep = solve_vns(inst, scen, initial_design=start)
    assert rep.objective == pytest.approx(10.0)
    assert rep.trace[0] == {"event": "vns_start", "objective": 30.0}


def test_vns_params_validation():
    with pytest.raises(ValueError):
        VnsParams(max_restarts=0)
    with pytest.raises(ValueError):
        VnsParams(d=0.5)


def test_sbvnds_is_feasible_and_no_worse_than_greedy():
    for index in (2, 6, 9):
        case = random_case(index)
        v = solve_sbvnds(case.instance, case.scenarios)
        g = solve_greedy(case.instance, case.scenarios)
        assert v.feasible
        assert v.objective <= g.objective + 1e-9


def test_repair_buys_one_switch_for_a_closed_triangle():
    inst = tri3()
    edges = list(inst.edges)
    edges[2] = dataclasses.replace(edges[2], has_existing_switch=False, switch_cost=1.0)
    inst = NetworkInstance(inst.buses, tuple(edges))
    benign = ScenarioSet((Scenario(0),))
    # energized lines form a loop, so one switch must open it; ties go to the lowest edge
    fixed = repair_switches(inst, Design.baseline(inst), benign)
    assert fixed.cost(inst) == pytest.approx(1.0)
    assert fixed.upgrades(inst)["switches"] == ["e01"]
    assert all(p.l_value == 0 for p in evaluate_design(inst, benign, fixed))


def unreachable_instance():
    A = ("A",)
    buses = (Bus(0, A, (), GenerationSite({"A": 5.0})), Bus(1, A, (LoadBlock({"A": 1.0}),), None, True))
    edges = (Edge("e", 0, 1, A, 5.0),)
    return NetworkInstance(buses, edges), ScenarioSet((Scenario(0, frozenset({"e"})),))


@pytest.mark.parametrize("name", ALGORITHMS)
def test_unfixable_scenario_is_infeasible(name):
    inst, scen = unreachable_instance()
    rep = run_algorithm(name, inst, scen)
    assert rep.status == INFEASIBLE
    assert rep.design is None
    assert not rep.feasible
    assert math.isinf(rep.objective)


def test_tiny_time_limit_reports_status():
    case = random_case(32)
    rep = solve_extensive(case.instance, case.scenarios, SolveParams(time_limit_seconds=1e-4))
    assert rep.status in (TIME_LIMIT, OPTIMAL)


def test_unknown_algorithm():
    inst, scen = disjoint_hardening()
    with pytest.raises(ValueError):
        run_algorithm("annealing", inst, scen)


def test_tight_phase_band_is_not_reported_infeasible():
    # tiny pivots on this model used to fake an infeasible LP relaxation
    case = random_case(27)
    inst = case.instance
    edges = tuple(dataclasses.replace(e, phase_imbalance_limit=0.15) for e in inst.edges)
    inst = NetworkInstance(inst.buses, edges, inst.critical_fraction, inst.total_fraction, inst.name)
    oracle = brute_force_oracle(inst, case.scenarios)[0]
    assert oracle == pytest.approx(28.0)
    assert solve_extensive(inst, case.scenarios).objective == pytest.approx(oracle, abs=1e-6)
