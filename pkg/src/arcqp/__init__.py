"""Arc-search interior-point solver for box-constrained convex QPs and saturated LQR."""

from .lqr import CondensedQP, LqrProblem, bertsekas_example, build_phi, condense, simulate, weight_scaling
from .qp_core import BoxQP, Iterate, Mode, NumericalError, ProblemError, SolverOptions, initial_point
from .solver import IterationRecord, SolveReport, SolveStatus, check_optimality, solve, solve_practical, solve_theoretical

__all__ = [
    "BoxQP",
    "CondensedQP",
    "Iterate",
    "IterationRecord",
    "LqrProblem",
    "Mode",
    "NumericalError",
    "ProblemError",
    "SolveReport",
    "SolveStatus",
    "SolverOptions",
    "bertsekas_example",
    "build_phi",
    "check_optimality",
    "condense",
    "initial_point",
    "simulate",
    "solve",
    "solve_practical",
    "solve_theoretical",
    "weight_scaling",
]
