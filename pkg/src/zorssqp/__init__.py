"""
Zeroth-order random-subspace SQP for black-box constrained optimization.

Each iteration draws a random ``d``-dimensional subspace, fits a linear model
of the objective and constraints in it from two-point differences, solves a
small proximal QP and steps along the result.
"""

from .estimator import ReducedModel, build_exact_model, build_reduced_model, default_radius
from .linalg import RankDeficient, SingularSystem, solve_saddle, thin_qr
from .metrics import TRACE_COLUMNS, SolverTrace, kkt_gap, violations
from .problem import (BlackBoxProblem, DimensionMismatch, EvalCounter, Evaluation,
                      GradientInfo, NonFiniteOutput, ProblemDims, Unsupported)
from .qp import QPOutcome, QPStatus, brute_force_qp, solve_reduced_qp
from .solver import (RejectionBudgetExhausted, SolverConfig, SolverState, armijo, merit,
                     run, step)
from .subspace import make_rng, sample_subspace

__version__ = "0.1.0"

__all__ = [
    "ReducedModel", "build_exact_model", "build_reduced_model", "default_radius",
    "RankDeficient", "SingularSystem", "solve_saddle", "thin_qr",
    "TRACE_COLUMNS", "SolverTrace", "kkt_gap", "violations",
    "BlackBoxProblem", "DimensionMismatch", "EvalCounter", "Evaluation", "GradientInfo",
    "NonFiniteOutput", "ProblemDims", "Unsupported",
    "QPOutcome", "QPStatus", "brute_force_qp", "solve_reduced_qp",
    "RejectionBudgetExhausted", "SolverConfig", "SolverState", "armijo", "merit", "run",
    "step", "make_rng", "sample_subspace", "__version__",
]
