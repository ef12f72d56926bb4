"""Elastic Net regression solved by a semi-smooth Newton augmented Lagrangian method."""

__version__ = "0.1.0"

from .config import SolverConfig
from .data import Dataset, SimSpec, generate, poly_expand, read_csv, read_libsvm, rho_hat, standardize
from .dual import DualState, Problem
from .estimator import SsnalElasticNet, SsnalElasticNetCV
from .oracle import OracleConfig, coord_descent_solve, oracle_solve, prox_grad_solve
from .penalty import Penalty, conjugate_value, penalty_value, prox_conjugate, prox_penalty
from .selection import LambdaGrid, SelectionReport, build_grid, kfold_cv, path, select_model
from .solver import Solution, solve

__all__ = [
    "__version__", "SolverConfig", "Dataset", "SimSpec", "generate", "poly_expand", "read_csv",
    "read_libsvm", "rho_hat", "standardize", "DualState", "Problem", "SsnalElasticNet",
    "SsnalElasticNetCV", "OracleConfig", "coord_descent_solve", "oracle_solve", "prox_grad_solve",
    "Penalty", "conjugate_value", "penalty_value", "prox_conjugate", "prox_penalty", "LambdaGrid",
    "SelectionReport", "build_grid", "kfold_cv", "path", "select_model", "Solution", "solve",
]
