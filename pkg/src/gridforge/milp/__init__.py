"""Self-contained mixed-integer linear programming core."""
from .bnb import MipSession, solve_mip
from .lp import solve_lp
from .model import (
    MipModel, MipSolution, ModelError, SolveParams, Status, UnknownVariable,
    ValueOutOfBounds, fix_assignment, read_solution_file,
)
from .mps import NameCollision, export_mps

__all__ = [
    "MipModel", "MipSession", "MipSolution", "ModelError", "NameCollision", "SolveParams", "Status",
    "UnknownVariable", "ValueOutOfBounds", "export_mps", "fix_assignment",
    "read_solution_file", "solve_lp", "solve_mip",
]
