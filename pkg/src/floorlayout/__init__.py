"""Mixed-integer formulations and valid inequalities for the floor layout problem.

Boxes of fixed area and bounded aspect ratio are placed on a rectangular floor
without overlap, minimizing cost-weighted center distances. The package builds
the pairwise formulations (big-M unary, unary, Gray binary, BLDP1, sequence
pair, refined unary, extended), adds cut families and symmetry breaking, and
solves the result with its own LP-based branch and bound. A brute-force oracle
over all branch assignments serves as ground truth.
"""

from .formulations import KINDS, AssemblyOptions, assemble_nbox, layout_from_point
from .instance import FlpInstance, derive_bounds, load_instance, parse_instance, random_instance, shipped_instance
from .milp import solve_lp, solve_milp
from .oracle import brute_force_optimum, check_layout

__version__ = "0.1.0"

__all__ = [
    "KINDS", "AssemblyOptions", "assemble_nbox", "layout_from_point", "FlpInstance", "derive_bounds",
    "load_instance", "parse_instance", "random_instance", "shipped_instance", "solve_lp", "solve_milp",
    "brute_force_optimum", "check_layout", "__version__",
]
