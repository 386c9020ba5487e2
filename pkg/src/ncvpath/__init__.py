"""Non-convex penalized regression paths via convex-concave and modified LQA iterations."""

from .loss import Dataset, DataError, QuadModel, loss_grad, loss_value, quad_approx
from .path import (LambdaGrid, PathResult, ProblemConfig, fit_fixed_lambda, fit_path,
                   kkt_check, lambda_grid, standardize_columns)
from .penalty import (KINDS, PenaltyDomainError, PenaltySpec, d_subgrad, grad_penalty, kappa,
                      penalty_value)
from .solver import FitState, SolverConfig, cccp_minimize, cd_subproblem, mlqa_minimize, objective_q

__version__ = "0.1.0"
