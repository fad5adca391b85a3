"""Generic sparse LP/MILP kernel: simplex, branch and bound, verification."""

from .branch_bound import solve_milp
from .mps import export_mps, read_solution
from .problem import EQ, GE, LE, ProblemError, Row, SparseProblem
from .simplex import (
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    Basis,
    SolveOptions,
    SolveResult,
    solve_lp,
)
from .verify import VerificationReport, verify_solution
from .warmstart import WarmStartError, WarmStartResult, warm_start_solve

__all__ = [
    "EQ",
    "GE",
    "LE",
    "OPTIMAL",
    "INFEASIBLE",
    "UNBOUNDED",
    "ITERATION_LIMIT",
    "Basis",
    "ProblemError",
    "Row",
    "SolveOptions",
    "SolveResult",
    "SparseProblem",
    "VerificationReport",
    "WarmStartError",
    "WarmStartResult",
    "export_mps",
    "read_solution",
    "solve_lp",
    "solve_milp",
    "verify_solution",
    "warm_start_solve",
]
