"""Model IR, LP simplex, branch-and-bound and LP-file I/O."""

from .bnb import SolveResult, SolverError, relative_gap, solve_milp
from .lpformat import LPFormatError, export_model, import_model
from .model import BINARY, CONTINUOUS, Constraint, LinExpr, MilpModel, ModelError, Variable, eq, lin_sum
from .simplex import BoundedSimplex, LPResult, solve_lp

__all__ = [
    "BINARY", "CONTINUOUS", "Constraint", "LinExpr", "MilpModel", "ModelError", "Variable",
    "eq", "lin_sum", "LPResult", "BoundedSimplex", "solve_lp", "SolveResult", "SolverError",
    "relative_gap", "solve_milp", "LPFormatError", "export_model", "import_model",
]
