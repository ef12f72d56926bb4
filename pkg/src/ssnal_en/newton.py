"""Semi-smooth Newton solver for the inner augmented Lagrangian sub-problem.

The generalized Hessian of ``psi`` is ``V = I_m + kappa * A_J A_J^T`` where
``J`` is the set of coordinates that survive the soft-threshold and
``kappa = sigma / (1 + sigma * lambda2)``. Only the ``r = |J|`` active columns
enter the linear algebra, which is what makes each Newton step cheap when the
solution is sparse.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.sparse.linalg import LinearOperator, cg

from .config import SolverConfig
from .dual import DualState, Problem
from .penalty import Penalty, prox_penalty

logger = logging.getLogger(__name__)

JITTER = 1e-10


class Strategy(str, Enum):
    CHOLESKY_M = "cholesky_m"
    SMW_R = "smw_r"
    CG = "cg"


class NewtonSystemError(np.linalg.LinAlgError):
    """The reduced Newton matrix could not be factorized."""


class LineSearchError(RuntimeError):
    """Backtracking exhausted without meeting the Armijo condition."""


@dataclass(frozen=True)
class ActiveSet:
    indices: np.ndarray
    kappa: float

    @property
    def r(self) -> int:
        return int(self.indices.size)


def extract_active_set(w, sigma: float, p: Penalty) -> ActiveSet:
    """Coordinates with ``|w_j| > sigma * lambda1`` (strict; ties are inactive)."""
    idx = np.flatnonzero(np.abs(w) > sigma * p.lambda1)
    return ActiveSet(idx, sigma / (1.0 + sigma * p.lambda2))


def choose_strategy(m: int, r: int, cg_threshold: int = 10_000) -> Strategy:
    if min(m, r) > cg_threshold:
        return Strategy.CG
    if r < m:
        return Strategy.SMW_R
    return Strategy.CHOLESKY_M


def _factor(mat: np.ndarray, strategy: Strategy, jitter: float):
    try:
        return cho_factor(mat, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NewtonSystemError(
            f"{strategy.value}: Cholesky failed on a {mat.shape[0]}x{mat.shape[0]} "
            f"system (jitter={jitter:g}, min diag={mat.diagonal().min():.3e})"
        ) from exc


def newton_direction(act: ActiveSet, prob: Problem, grad: np.ndarray,
                     config: SolverConfig | None = None, *, jitter: float = 0.0) -> np.ndarray:
    """Solve ``(I_m + kappa A_J A_J^T) d = -grad``.

    Raises
    ------
    NewtonSystemError
        If the exact factorization fails; retry with ``jitter=JITTER``.
    """
    cfg = config or SolverConfig()
    m, r = prob.m, act.r
    if r == 0:
        return -grad
    if cfg.strategy == "auto":
        strategy = choose_strategy(m, r, cfg.cg_threshold)
    else:
        strategy = Strategy(cfg.strategy)
    AJ = prob.A[:, act.indices]
    kappa = act.kappa

    if strategy is Strategy.CHOLESKY_M:
        V = AJ @ AJ.T
        V *= kappa
        V[np.diag_indices(m)] += 1.0 + jitter
        return cho_solve(_factor(V, strategy, jitter), -grad, check_finite=False)

    if strategy is Strategy.SMW_R:
        M = AJ.T @ AJ
        M[np.diag_indices(r)] += 1.0 / kappa + jitter
        t = cho_solve(_factor(M, strategy, jitter), AJ.T @ grad, check_finite=False)
        return AJ @ t - grad

    op = LinearOperator((m, m), matvec=lambda u: u + kappa * (AJ @ (AJ.T @ u)), dtype=float)
    rtol = min(cfg.cg_rtol_max, float(np.sqrt(np.linalg.norm(grad))))
    d, info = cg(op, -grad, rtol=rtol, atol=0.0, maxiter=10 * m)
    if info > 0:
        logger.debug("CG stopped after %d iterations above rtol=%g", info, rtol)
    return d


def line_search(state: DualState, prob: Problem, p: Penalty, d: np.ndarray, grad: np.ndarray,
                mu: float = 0.2, *, w=None, Atd=None, beta: float = 0.5,
                max_backtracks: int = 50) -> float:
    """Backtracking step satisfying ``psi(y + s d) <= psi(y) + mu s <grad, d>``.

    The change in ``psi`` is accumulated from differences so that the
    ``||x||^2 / (2 sigma)`` term, which can dwarf the decrease, cancels exactly.
    """
    sigma = state.sigma
    if w is None:
        w = state.x - sigma * (prob.A.T @ state.y)
    if Atd is None:
        Atd = prob.A.T @ d
    c = (1.0 + sigma * p.lambda2) / (2.0 * sigma)
    p0 = prox_penalty(p, sigma, w)
    lin = float(state.y @ d + prob.b @ d)
    dd = float(d @ d)
    gd = float(grad @ d)
    s = 1.0
    for _ in range(max_backtracks):
        ps = prox_penalty(p, sigma, w - (s * sigma) * Atd)
        delta = s * lin + 0.5 * s * s * dd + c * float((ps - p0) @ (ps + p0))
        if delta <= mu * s * gd:
            return s
        s *= beta
    raise LineSearchError(f"no Armijo step after {max_backtracks} backtracks (<grad,d>={gd:.3e})")


@dataclass
class InnerResult:
    y: np.ndarray
    z: np.ndarray
    x_next: np.ndarray
    Aty: np.ndarray
    active: ActiveSet
    grad_norm: float
    n_iter: int
    converged: bool


def inner_solve(state: DualState, prob: Problem, p: Penalty,
                config: SolverConfig | None = None, tol: float | None = None) -> InnerResult:
    """Minimize ``psi`` over ``y`` for the multiplier and ``sigma`` held in ``state``.

    Stops once ``||grad psi(y)|| / (1 + ||b||) <= tol``. The gradient equals
    ``y + b - A x_next`` with ``x_next = prox_{sigma p}(w)``, so this is the
    first KKT residual at the prospective multiplier. ``state`` is not
    modified.
    """
    cfg = config or SolverConfig()
    tol = cfg.outer_tol if tol is None else tol
    A, b, x, sigma = prob.A, prob.b, state.x, state.sigma
    scale = 1.0 + np.linalg.norm(b)

    y = state.y.copy()
    Aty = A.T @ y
    w = x - sigma * Aty
    n_iter = 0
    converged = False
    jitter = 0.0
    while True:
        px = prox_penalty(p, sigma, w)
        act = extract_active_set(w, sigma, p)
        J = act.indices
        grad = y + b - A[:, J] @ px[J]
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm / scale <= tol:
            converged = True
            break
        if n_iter >= cfg.max_inner:
            break
        try:
            d = newton_direction(act, prob, grad, cfg, jitter=jitter)
        except NewtonSystemError:
            if jitter:
                raise
            logger.warning("Newton system not SPD; retrying with jitter %g", JITTER)
            jitter = JITTER
            d = newton_direction(act, prob, grad, cfg, jitter=jitter)
        Atd = A.T @ d
        trial = DualState(y, state.z, x, sigma)
        try:
            s = line_search(trial, prob, p, d, grad, cfg.mu, w=w, Atd=Atd,
                            max_backtracks=cfg.max_backtracks)
        except LineSearchError as exc:
            logger.debug("inner solve stalled: %s", exc)
            break
        y = y + s * d
        Aty = Aty + s * Atd
        w = x - sigma * Aty
        n_iter += 1

    z = (w - px) / sigma
    return InnerResult(y, z, px, Aty, act, grad_norm, n_iter, converged)
