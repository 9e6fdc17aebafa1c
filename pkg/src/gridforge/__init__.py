"""Two-stage design of ice-storm resilient distribution grids."""
from .algorithms import (
    ALGORITHMS, SolveReport, VnsParams, brute_force_oracle, evaluate_design, repair_switches,
    run_algorithm, solve_extensive, solve_greedy, solve_sbd, solve_sbvnds, solve_vns,
)
from .estimator import GridDesigner
from .formulation import Design
from .grid_model import Bus, Edge, GenerationSite, LoadBlock, NetworkInstance, validate_instance
from .scenario import DamageModel, Scenario, ScenarioSet, sample_scenarios

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS", "Bus", "DamageModel", "Design", "Edge", "GenerationSite", "GridDesigner",
    "LoadBlock", "NetworkInstance", "Scenario", "ScenarioSet", "SolveReport", "VnsParams",
    "brute_force_oracle", "evaluate_design", "repair_switches", "run_algorithm", "sample_scenarios",
    "solve_extensive", "solve_greedy", "solve_sbd", "solve_sbvnds", "solve_vns", "validate_instance",
]
