"""Mixed-integer linear program container."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np
from scipy import sparse

INF = math.inf


class ModelError(ValueError):
    """Structural problem with a MipModel."""


class UnknownVariable(ModelError, KeyError):
    pass


class ValueOutOfBounds(ModelError):
    pass


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    TIME_LIMIT = "TimeLimit"
    NODE_LIMIT = "NodeLimit"
    NUMERICAL = "NumericalFailure"


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float = 0.0
    ub: float = INF
    binary: bool = False


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: Tuple[Tuple[int, float], ...]
    sense: str  # "<=", "==" or ">="
    rhs: float


_SENSES = {"<=": "<=", "=<": "<=", "==": "==", "=": "==", ">=": ">=", "=>": ">="}


class MipModel:
    """Variables, linear constraints and a linear objective.

    Variables are referenced by the integer index returned from
    :meth:`add_var`. Coefficient maps passed to :meth:`add_constr` may repeat
    an index only through accumulation (``dict`` semantics).
    """

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: List[Variable] = []
        self.constraints: List[Constraint] = []
        self.sense = "min"
        self.objective: Dict[int, float] = {}
        self.objective_constant = 0.0
        self._index: Dict[str, int] = {}
        self._cnames: set = set()
        # variable -> branching priority; higher values branch first
        self.branch_priority: Dict[int, int] = {}

    # -- construction -------------------------------------------------
    def add_var(self, name: str, lb: float = 0.0, ub: float = INF, binary: bool = False) -> int:
        if name in self._index:
            raise ModelError(f"duplicate variable name {name!r}")
        if binary:
            lb, ub = max(0.0, float(lb)), min(1.0, float(ub))
        if lb > ub:
            raise ModelError(f"variable {name!r} has empty domain [{lb}, {ub}]")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, float(lb), float(ub), binary))
        return len(self.variables) - 1

    def add_constr(self, name: str, coeffs: Mapping[int, float], sense: str, rhs: float) -> int:
        if name in self._cnames:
            raise ModelError(f"duplicate constraint name {name!r}")
        try:
            sense = _SENSES[sense]
        except KeyError:
            raise ModelError(f"bad relation {sense!r} in {name!r}") from None
        n = len(self.variables)
        terms = []
        for j, a in coeffs.items():
            if not 0 <= j < n:
                raise UnknownVariable(f"constraint {name!r} references variable {j}")
            if a != 0.0:
                terms.append((int(j), float(a)))
        terms.sort()
        self._cnames.add(name)
        self.constraints.append(Constraint(name, tuple(terms), sense, float(rhs)))
        return len(self.constraints) - 1

    def set_objective(self, coeffs: Mapping[int, float], sense: str = "min", constant: float = 0.0) -> None:
        if sense not in ("min", "max"):
            raise ModelError(f"objective sense must be 'min' or 'max', got {sense!r}")
        n = len(self.variables)
        for j in coeffs:
            if not 0 <= j < n:
                raise UnknownVariable(f"objective references variable {j}")
        self.sense = sense
        self.objective = {int(j): float(c) for j, c in coeffs.items() if c != 0.0}
        self.objective_constant = float(constant)

    # -- queries --------------------------------------------------------
    @property
    def num_vars(self) -> int:
        return len(self.variables)

    @property
    def num_constrs(self) -> int:
        return len(self.constraints)

    def var_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariable(name) from None

    def binaries(self) -> List[int]:
        return [j for j, v in enumerate(self.variables) if v.binary]

    def copy(self) -> "MipModel":
        other = MipModel(self.name)
        other.variables = list(self.variables)
        other.constraints = list(self.constraints)
        other.sense = self.sense
        other.objective = dict(self.objective)
        other.objective_constant = self.objective_constant
        other._index = dict(self._index)
        other._cnames = set(self._cnames)
        other.branch_priority = dict(self.branch_priority)
        return other

    def set_bounds(self, j: int, lb: float, ub: float) -> None:
        v = self.variables[j]
        self.variables[j] = Variable(v.name, float(lb), float(ub), v.binary)

    def objective_value(self, x: Iterable[float]) -> float:
        x = list(x)
        return self.objective_constant + sum(c * x[j] for j, c in self.objective.items())

    def arrays(self):
        """Return ``(c, A, senses, b, lb, ub, is_binary)`` with ``A`` in CSR form.

        ``c`` is the minimization-form cost (negated for max models).
        """
        n, m = self.num_vars, self.num_constrs
        rows, cols, vals = [], [], []
        for i, con in enumerate(self.constraints):
            for j, a in con.coeffs:
                rows.append(i)
                cols.append(j)
                vals.append(a)
        A = sparse.csr_matrix((vals, (rows, cols)), shape=(m, n), dtype=float)
        c = np.zeros(n)
        for j, v in self.objective.items():
            c[j] = v
        if self.sense == "max":
            c = -c
        senses = np.array([con.sense for con in self.constraints], dtype=object)
        b = np.array([con.rhs for con in self.constraints], dtype=float)
        lb = np.array([v.lb for v in self.variables], dtype=float)
        ub = np.array([v.ub for v in self.variables], dtype=float)
        is_bin = np.array([v.binary for v in self.variables], dtype=bool)
        return c, A, senses, b, lb, ub, is_bin

    def violations(self, x, tol: float = 1e-6, int_tol: float = 1e-6) -> List[str]:
        """Names of constraints, bounds and integrality conditions violated by ``x``."""
        out = []
        for j, v in enumerate(self.variables):
            if x[j] < v.lb - tol or x[j] > v.ub + tol:
                out.append(f"bound:{v.name}")
            if v.binary and min(abs(x[j]), abs(x[j] - 1.0)) > int_tol:
                out.append(f"integrality:{v.name}")
        for con in self.constraints:
            lhs = sum(a * x[j] for j, a in con.coeffs)
            scale = tol * max(1.0, abs(con.rhs))
            if con.sense == "<=" and lhs > con.rhs + scale:
                out.append(con.name)
            elif con.sense == ">=" and lhs < con.rhs - scale:
                out.append(con.name)
            elif con.sense == "==" and abs(lhs - con.rhs) > scale:
                out.append(con.name)
        return out

    def __repr__(self) -> str:
        return (f"MipModel({self.name!r}, vars={self.num_vars}, "
                f"binaries={len(self.binaries())}, constrs={self.num_constrs})")


@dataclass
class SolveParams:
    time_limit_seconds: float = INF
    mip_gap: float = 1e-6
    feasibility_tolerance: float = 1e-7
    integrality_tolerance: float = 1e-6
    node_limit: int = 1_000_000
    lp_engine: str = "simplex"
    objective_cutoff: Optional[float] = None

    def __post_init__(self):
        for name in ("time_limit_seconds", "mip_gap", "feasibility_tolerance",
                     "integrality_tolerance", "node_limit"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.lp_engine not in ("simplex", "highs"):
            raise ValueError(f"unknown lp_engine {self.lp_engine!r}")


@dataclass
class MipSolution:
    status: Status
    assignment: Optional[np.ndarray] = None
    objective_value: float = math.nan
    bound: float = math.nan
    node_count: int = 0
    trace: List[Tuple[int, float, float]] = field(default_factory=list)

    @property
    def has_solution(self) -> bool:
        return self.assignment is not None

    def value(self, model: MipModel, name: str) -> float:
        return float(self.assignment[model.var_index(name)])


def fix_assignment(model: MipModel, fixes: Mapping) -> MipModel:
    """Copy of ``model`` with each fixed variable's bounds collapsed to its value.

    Keys of ``fixes`` may be variable names or indices.
    """
    out = model.copy()
    for key, value in fixes.items():
        j = model.var_index(key) if isinstance(key, str) else int(key)
        if not 0 <= j < model.num_vars:
            raise UnknownVariable(str(key))
        v = model.variables[j]
        value = float(value)
        if value < v.lb - 1e-9 or value > v.ub + 1e-9:
            raise ValueOutOfBounds(f"{v.name}={value} outside [{v.lb}, {v.ub}]")
        value = min(max(value, v.lb), v.ub)
        out.set_bounds(j, value, value)
    return out


def read_solution_file(model: MipModel, text: str) -> np.ndarray:
    """Parse ``name value`` lines (``#`` comments allowed) into a full assignment.

    Variables absent from the file take their lower bound when finite, else 0.
    """
    x = np.array([v.lb if math.isfinite(v.lb) else 0.0 for v in model.variables])
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ModelError(f"line {lineno}: expected 'name value', got {line!r}")
        try:
            value = float(parts[1])
        except ValueError:
            raise ModelError(f"line {lineno}: bad number {parts[1]!r}") from None
        x[model.var_index(parts[0])] = value
    return x
