"""Dispatch by algorithm name, as used by the CLI, sweeps and the estimator."""
from __future__ import annotations

from typing import Optional

from ..milp import SolveParams
from .common import SolveReport
from .exact import solve_extensive, solve_sbd
from .heuristics import VnsParams, solve_greedy, solve_sbvnds, solve_vns

ALGORITHMS = ("extensive", "sbd", "greedy", "vns", "sbvnds")


def run_algorithm(name: str, instance, scenarios, params: Optional[SolveParams] = None, *,
                  epsilon: Optional[float] = None, vns: Optional[VnsParams] = None,
                  link_mode: str = "energized", cycles=None) -> SolveReport:
    """Run one of :data:`ALGORITHMS`; greedy ignores ``epsilon``."""
    common = dict(cycles=cycles, link_mode=link_mode)
    if name == "extensive":
        return solve_extensive(instance, scenarios, params, epsilon=epsilon, **common)
    if name == "sbd":
        return solve_sbd(instance, scenarios, params=params, epsilon=epsilon, **common)
    if name == "greedy":
        return solve_greedy(instance, scenarios, params, **common)
    if name == "vns":
        return solve_vns(instance, scenarios, params=params, vns=vns, epsilon=epsilon, **common)
    if name == "sbvnds":
        return solve_sbvnds(instance, scenarios, params=params, vns=vns, epsilon=epsilon, **common)
    raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")
