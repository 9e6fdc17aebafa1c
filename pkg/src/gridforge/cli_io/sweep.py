"""Sensitivity sweeps over lambda, epsilon or storm intensity."""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence

from ..algorithms import ALGORITHMS, run_algorithm
from ..milp import SolveParams
from ..scenario import DamageModel, DEFAULT_SCENARIO_COUNT, sample_scenarios

PARAMETERS = ("lambda", "epsilon", "per_mile_probability")
SWEEP_COLUMNS = ("parameter", "value", "algorithm", "status", "objective", "cpu_seconds",
                 "violated_scenarios")


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    grid: Sequence[float]
    algorithm: str = "sbd"
    seed: int = 0
    scenario_count: int = DEFAULT_SCENARIO_COUNT
    hardened_ratio: float = 0.0

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ValueError(f"parameter must be one of {PARAMETERS}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise ValueError("grid must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid must be strictly increasing")
        if any(not 0.0 <= v <= 1.0 for v in grid):
            raise ValueError("grid values must lie in [0, 1]")
        object.__setattr__(self, "grid", grid)


@dataclass(frozen=True)
class SweepRow:
    parameter: str
    value: float
    algorithm: str
    status: str
    objective: float
    cpu_seconds: float
    violated_scenarios: int


def run_sweep(instance, scenarios, spec: SweepSpec, params: Optional[SolveParams] = None) -> List[SweepRow]:
    """One solve per grid value, in grid order; a time-limited point is recorded and the sweep goes on."""
    rows = []
    for v in spec.grid:
        inst, scen, eps = instance, scenarios, None
        if spec.parameter == "lambda":
            inst = instance.with_fractions(critical=v)
        elif spec.parameter == "epsilon":
            eps = v
        else:
            model = DamageModel(v, spec.hardened_ratio, spec.seed)
            scen = sample_scenarios(instance, model, spec.scenario_count)
        t0 = time.process_time()
        rep = run_algorithm(spec.algorithm, inst, scen, params, epsilon=eps)
        cpu = time.process_time() - t0
        violated = sum(1 for p in rep.per_scenario if p.l_value > 0)
        rows.append(SweepRow(spec.parameter, v, spec.algorithm, rep.status, rep.objective, cpu, violated))
    return rows


def sweep_csv(rows: Sequence[SweepRow], record_time: bool = False) -> str:
    """CSV text with a header row; ``cpu_seconds`` stays blank unless ``record_time``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        obj = r.objective if math.isfinite(r.objective) else ""
        w.writerow([r.parameter, repr(r.value), r.algorithm, r.status, obj,
                    round(r.cpu_seconds, 6) if record_time else "", r.violated_scenarios])
    return buf.getvalue()
