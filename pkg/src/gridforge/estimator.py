"""Estimator-style wrapper: fit a design on training scenarios, price it on new ones."""
from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .algorithms import ALGORITHMS, VnsParams, evaluate_design, run_algorithm
from .formulation import LINK_MODES
from .grid_model import NetworkInstance, validate_instance
from .milp import SolveParams
from .scenario import ScenarioSet


def check_instance(instance) -> NetworkInstance:
    if not isinstance(instance, NetworkInstance):
        raise TypeError(f"expected a NetworkInstance, got {type(instance).__name__}")
    report = validate_instance(instance)
    if not report.ok:
        raise ValueError(f"invalid instance: {report}")
    return instance


def check_scenarios(scenarios, instance: NetworkInstance) -> ScenarioSet:
    """Accept a ScenarioSet or a sequence of Scenario objects; edges must exist."""
    if not isinstance(scenarios, ScenarioSet):
        scenarios = ScenarioSet(tuple(scenarios))
    known = {e.id for e in instance.edges}
    for s in scenarios:
        unknown = (s.damaged_edges | s.hardened_damaged_edges) - known
        if unknown:
            raise ValueError(f"scenario {s.id} damages unknown edge {sorted(map(str, unknown))[0]}")
    return scenarios


class GridDesigner(BaseEstimator):
    """Choose upgrades for a grid so that every training scenario meets its service targets.

    ``fit`` takes the instance in place of ``X`` and the scenario set in place
    of ``y``. ``predict`` returns the shortfall ``l`` of the fitted design on
    each given scenario, zero where both service targets are met.

    Parameters
    ----------
    algorithm : one of ``extensive``, ``sbd``, ``greedy``, ``vns``, ``sbvnds``.
    epsilon : fraction of scenarios allowed to miss their targets, or None.
    critical_fraction, total_fraction : override the instance's service targets.
    time_limit : wall-clock budget in seconds, or None for no limit.
    link_mode : ``energized`` or ``optional``.
    max_restarts, max_iterations, d, shuffle_seed : VNS settings.
    """

    def __init__(self, algorithm: str = "sbd", epsilon: Optional[float] = None,
                 critical_fraction: Optional[float] = None, total_fraction: Optional[float] = None,
                 time_limit: Optional[float] = None, link_mode: str = "energized",
                 max_restarts: int = 10, max_iterations: int = 4, d: float = 2, shuffle_seed: int = 0):
        self.algorithm = algorithm
        self.epsilon = epsilon
        self.critical_fraction = critical_fraction
        self.total_fraction = total_fraction
        self.time_limit = time_limit
        self.link_mode = link_mode
        self.max_restarts = max_restarts
        self.max_iterations = max_iterations
        self.d = d
        self.shuffle_seed = shuffle_seed

    def _validate_params(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.link_mode not in LINK_MODES:
            raise ValueError(f"link_mode must be one of {LINK_MODES}, got {self.link_mode!r}")
        if self.epsilon is not None and not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")

    def _solve_params(self) -> SolveParams:
        return SolveParams() if self.time_limit is None else SolveParams(time_limit_seconds=self.time_limit)

    def fit(self, instance, scenarios):
        self._validate_params()
        inst = check_instance(instance)
        if self.critical_fraction is not None or self.total_fraction is not None:
            inst = check_instance(inst.with_fractions(self.critical_fraction, self.total_fraction))
        scen = check_scenarios(scenarios, inst)
        vns = VnsParams(self.max_restarts, self.max_iterations, d=self.d, shuffle_seed=self.shuffle_seed)
        report = run_algorithm(self.algorithm, inst, scen, self._solve_params(), epsilon=self.epsilon,
                               vns=vns, link_mode=self.link_mode)
        self.instance_ = inst
        self.report_ = report
        self.design_ = report.design
        self.objective_ = report.objective
        self.status_ = report.status
        self.n_scenarios_ = len(scen)
        return self

    def _check_fitted(self):
        if not hasattr(self, "report_"):
            raise NotFittedError("GridDesigner is not fitted yet; call fit first")
        if self.design_ is None:
            raise ValueError(f"fit found no design (status {self.status_})")

    def predict(self, scenarios) -> np.ndarray:
        self._check_fitted()
        scen = check_scenarios(scenarios, self.instance_)
        results = evaluate_design(self.instance_, scen, self.design_, self._solve_params(),
                                  link_mode=self.link_mode)
        return np.array([r.l_value for r in results])

    def score(self, scenarios) -> float:
        """Share of ``scenarios`` the fitted design serves."""
        return float(np.mean(self.predict(scenarios) == 0.0))
