"""Design algorithms: exact solves, decomposition and heuristics."""
from .common import (
    FEASIBLE, INFEASIBLE, OPTIMAL, TIME_LIMIT, PricingResult, SolveReport, evaluate_design,
)
from .exact import TooLarge, brute_force_oracle, solve_extensive, solve_sbd
from .heuristics import (
    InfeasibleScenario, VnsParams, repair_switches, solve_greedy, solve_sbvnds, solve_vns,
)
from .run import ALGORITHMS, run_algorithm

__all__ = [
    "ALGORITHMS", "FEASIBLE", "INFEASIBLE", "OPTIMAL", "TIME_LIMIT", "InfeasibleScenario",
    "PricingResult", "SolveReport", "TooLarge", "VnsParams", "brute_force_oracle",
    "evaluate_design", "repair_switches", "run_algorithm", "solve_extensive", "solve_greedy", "solve_sbd",
    "solve_sbvnds", "solve_vns",
]
