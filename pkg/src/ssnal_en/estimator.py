"""scikit-learn compatible estimators backed by the semi-smooth Newton solver."""

from __future__ import annotations

from numbers import Integral, Real

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, _fit_context
from sklearn.utils._param_validation import Interval, StrOptions
from sklearn.utils.validation import check_is_fitted, validate_data

from .config import SolverConfig
from .data import Dataset, standardize, to_raw_coefficients
from .dual import Problem
from .penalty import Penalty
from .selection import CRITERIA, make_grid, select_model
from .solver import solve

_SOLVER_CONSTRAINTS = {
    "tol": [Interval(Real, 0, None, closed="neither")],
    "sigma0": [Interval(Real, 0, None, closed="neither")],
    "sigma_factor": [Interval(Real, 1, None, closed="neither")],
    "mu": [Interval(Real, 0, 0.5, closed="neither")],
    "max_iter": [Interval(Integral, 1, None, closed="left")],
    "standardize": ["boolean"],
}


def _problem(X, y, standardize_: bool) -> Problem:
    if standardize_:
        prob, _ = standardize(Dataset(X, y))
        return prob
    return Problem(X, y)


class SsnalElasticNet(RegressorMixin, BaseEstimator):
    r"""Elastic Net fitted with a semi-smooth Newton augmented Lagrangian method.

    Minimizes

    .. math::

        \tfrac12 \|X w - y\|_2^2 + \lambda_1 \|w\|_1 + \tfrac{\lambda_2}{2} \|w\|_2^2

    on standardized features and a centered response. The weights are either
    given directly (``lambda1``/``lambda2``) or as ``l1_ratio`` and ``c_lambda``
    relative to ``lambda_max = ||X^T y||_inf / l1_ratio``.

    Parameters
    ----------
    lambda1, lambda2 : float or None
        Absolute penalty weights. Both must be given to override ``l1_ratio``
        and ``c_lambda``.
    l1_ratio : float, default=0.5
        Share of the l1 term (called alpha in the Elastic Net literature).
    c_lambda : float, default=0.1
        Fraction of ``lambda_max``.
    standardize : bool, default=True
        Center and scale columns of ``X`` and center ``y``; an intercept is
        then recovered. With False the data is used as given and
        ``intercept_`` is 0.
    tol, sigma0, sigma_factor, mu, max_iter :
        Solver settings, see :class:`SolverConfig`.
    warm_start : bool, default=False
        Reuse the dual state of the previous fit.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    intercept_ : float
    n_iter_ : int
        Outer iterations of the last fit.
    solution_ : Solution
        Solver output on the standardized scale.
    """

    _parameter_constraints: dict = {
        "lambda1": [Interval(Real, 0, None, closed="left"), None],
        "lambda2": [Interval(Real, 0, None, closed="left"), None],
        "l1_ratio": [Interval(Real, 0, 1, closed="right")],
        "c_lambda": [Interval(Real, 0, 1, closed="right")],
        "warm_start": ["boolean"],
        **_SOLVER_CONSTRAINTS,
    }

    def __init__(self, lambda1=None, lambda2=None, l1_ratio=0.5, c_lambda=0.1, standardize=True,
                 tol=1e-6, sigma0=5e-3, sigma_factor=5.0, mu=0.2, max_iter=100, warm_start=False):
        self.lambda1 = lambda1
        self.lambda2 = lambda2
        self.l1_ratio = l1_ratio
        self.c_lambda = c_lambda
        self.standardize = standardize
        self.tol = tol
        self.sigma0 = sigma0
        self.sigma_factor = sigma_factor
        self.mu = mu
        self.max_iter = max_iter
        self.warm_start = warm_start

    def _config(self) -> SolverConfig:
        return SolverConfig(outer_tol=self.tol, sigma0=self.sigma0, sigma_factor=self.sigma_factor,
                            mu=self.mu, max_outer=self.max_iter)

    def _penalty(self, prob: Problem) -> Penalty:
        if self.lambda1 is not None and self.lambda2 is not None:
            return Penalty(self.lambda1, self.lambda2)
        if (self.lambda1 is None) != (self.lambda2 is None):
            raise ValueError("give both lambda1 and lambda2, or neither")
        return make_grid(prob, self.l1_ratio, [self.c_lambda]).penalty(0)

    @_fit_context(prefer_skip_nested_validation=True)
    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=True, dtype=np.float64, ensure_min_samples=2)
        prob = _problem(X, y, self.standardize)
        warm = None
        if self.warm_start and hasattr(self, "solution_") and self.solution_.state is not None:
            if self.solution_.state.x.shape == (prob.n,):
                warm = self.solution_.state
        sol = solve(prob, self._penalty(prob), self._config(), warm=warm)
        self.solution_ = sol
        self.penalty_ = sol.penalty
        self.coef_, self.intercept_ = to_raw_coefficients(prob, sol.x)
        self.n_iter_ = sol.outer_iters
        self.active_set_ = prob.columns[sol.active_set]
        return self

    def predict(self, X):
        check_is_fitted(self)
        X = validate_data(self, X, reset=False, dtype=np.float64)
        return X @ self.coef_ + self.intercept_


class SsnalElasticNetCV(RegressorMixin, BaseEstimator):
    """Elastic Net with the penalty chosen along warm-started paths.

    Every mixing value in ``l1_ratios`` gets its own sweep over ``n_lambda``
    log-spaced ``c_lambda`` values from 1 down to ``c_min``; the model
    minimizing ``criterion`` is kept. Criteria are computed from de-biased
    (least squares on the active set) refits.

    Parameters
    ----------
    l1_ratios : sequence of float, default=(0.9, 0.8, 0.6)
        Shares of the l1 term to sweep.
    n_lambda : int, default=100
    c_min : float, default=0.1
    max_active : int or None
        Stop a sweep once this many features are active.
    criterion : {"gcv", "ebic", "cv"}, default="gcv"
    cv : int, default=10
        Folds used when ``criterion="cv"``.
    random_state : int, default=0
    debiased : bool, default=True
        ``coef_`` holds the least-squares refit on the chosen active set,
        which is the fit the criteria score. With False the penalized
        estimate at the chosen grid point is kept instead.

    Attributes
    ----------
    coef_, intercept_
    l1_ratio_, c_lambda_, lambda1_, lambda2_ : float
    n_iter_ : int
        Outer iterations spent on the chosen grid point.
    report_ : SelectionReport
    """

    _parameter_constraints: dict = {
        "l1_ratios": ["array-like"],
        "n_lambda": [Interval(Integral, 1, None, closed="left")],
        "c_min": [Interval(Real, 0, 1, closed="neither")],
        "max_active": [Interval(Integral, 1, None, closed="left"), None],
        "criterion": [StrOptions(set(CRITERIA))],
        "cv": [Interval(Integral, 2, None, closed="left")],
        "random_state": ["random_state"],
        "debiased": ["boolean"],
        **_SOLVER_CONSTRAINTS,
    }

    def __init__(self, l1_ratios=(0.9, 0.8, 0.6), n_lambda=100, c_min=0.1, max_active=None,
                 criterion="gcv", cv=10, random_state=0, debiased=True, standardize=True,
                 tol=1e-6, sigma0=5e-3, sigma_factor=5.0, mu=0.2, max_iter=100):
        self.l1_ratios = l1_ratios
        self.n_lambda = n_lambda
        self.c_min = c_min
        self.max_active = max_active
        self.criterion = criterion
        self.cv = cv
        self.random_state = random_state
        self.debiased = debiased
        self.standardize = standardize
        self.tol = tol
        self.sigma0 = sigma0
        self.sigma_factor = sigma_factor
        self.mu = mu
        self.max_iter = max_iter

    @_fit_context(prefer_skip_nested_validation=True)
    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=True, dtype=np.float64, ensure_min_samples=2)
        prob = _problem(X, y, self.standardize)
        cfg = SolverConfig(outer_tol=self.tol, sigma0=self.sigma0, sigma_factor=self.sigma_factor,
                           mu=self.mu, max_outer=self.max_iter)
        seed = self.random_state if isinstance(self.random_state, Integral) else 0
        report = select_model(prob, alphas=tuple(self.l1_ratios), n_lambda=self.n_lambda,
                              c_min=self.c_min, max_active=self.max_active,
                              cv_folds=self.cv if self.criterion == "cv" else None,
                              criteria=(self.criterion,), config=cfg, seed=seed)
        i = report.chosen[self.criterion]
        pt = report.points[i]
        if self.debiased:
            J, vals = report.debiased[self.criterion]
            x = np.zeros(prob.n)
            x[J] = vals
        else:
            x = report.solutions[i].x
        self.report_ = report
        self.l1_ratio_, self.c_lambda_ = pt.alpha, pt.c_lambda
        self.lambda1_, self.lambda2_ = pt.lambda1, pt.lambda2
        self.coef_, self.intercept_ = to_raw_coefficients(prob, x)
        self.active_set_ = prob.columns[report.solutions[i].active_set]
        self.n_iter_ = report.solutions[i].outer_iters
        return self

    def predict(self, X):
        check_is_fitted(self)
        X = validate_data(self, X, reset=False, dtype=np.float64)
        return X @ self.coef_ + self.intercept_
