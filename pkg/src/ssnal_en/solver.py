"""Augmented Lagrangian outer loop and the public ``solve`` entry point."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .config import SolverConfig
from .dual import DualState, Problem, h_star
from .newton import inner_solve
from .penalty import Penalty, conjugate_value

logger = logging.getLogger(__name__)


@dataclass
class Solution:
    """Result of an Elastic Net solve.

    ``x`` is stored densely; ``active_set`` lists its nonzero coordinates and
    :meth:`sparse` returns the index/value pairs.
    """

    x: np.ndarray
    active_set: np.ndarray
    primal_objective: float
    dual_objective: float = float("nan")
    res_kkt3: float = float("nan")
    res_kkt1: float = float("nan")
    outer_iters: int = 0
    inner_iters_total: int = 0
    wall_time: float = 0.0
    converged: bool = True
    state: DualState | None = None
    penalty: Penalty | None = None
    history: list = field(default_factory=list)

    @property
    def r(self) -> int:
        return int(self.active_set.size)

    @property
    def gap(self) -> float:
        return self.primal_objective - self.dual_objective

    def sparse(self) -> tuple[np.ndarray, np.ndarray]:
        return self.active_set.copy(), self.x[self.active_set].copy()

    def summary(self) -> dict:
        return {
            "r": self.r,
            "primal_objective": self.primal_objective,
            "dual_objective": self.dual_objective,
            "res_kkt3": self.res_kkt3,
            "res_kkt1": self.res_kkt1,
            "outer_iters": self.outer_iters,
            "inner_iters_total": self.inner_iters_total,
            "wall_time": self.wall_time,
            "converged": self.converged,
        }


def sigma_schedule(sigma: float, config: SolverConfig | None = None) -> float:
    cfg = config or SolverConfig()
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return min(sigma * cfg.sigma_factor, max(cfg.sigma_max, sigma))


def effective_penalty(p: Penalty, m: int, loss_scale: str) -> Penalty:
    """Penalty for the unit-loss objective equivalent to ``loss_scale``.

    With ``per_observation`` the loss is ``||Ax - b||^2 / (2m)``; multiplying
    the whole objective by ``m`` gives unit loss with weights ``m * lambda``.
    """
    if loss_scale == "unit":
        return p
    if loss_scale == "per_observation":
        return p.scaled(m)
    raise ValueError(f"unknown loss_scale {loss_scale!r}")


def solve(prob: Problem, penalty: Penalty, config: SolverConfig | None = None,
          warm: DualState | None = None) -> Solution:
    """Solve ``min 1/2 ||Ax - b||^2 + lambda1 ||x||_1 + lambda2/2 ||x||^2``.

    Parameters
    ----------
    prob : Problem
    penalty : Penalty
    config : SolverConfig, optional
    warm : DualState, optional
        Starting ``(y, z, x, sigma)``, typically ``Solution.state`` from a
        nearby penalty. Defaults to zeros and ``config.sigma0``.

    Returns
    -------
    Solution
        ``converged`` is False when ``max_outer`` is exhausted or an inner
        solve fails; the best iterate is still returned.
    """
    cfg = config or SolverConfig()
    p = effective_penalty(penalty, prob.m, cfg.loss_scale)
    t0 = time.perf_counter()
    A, b = prob.A, prob.b
    m, n = A.shape

    if warm is None:
        state = DualState.zeros(m, n, cfg.sigma0)
    else:
        state = warm.copy()
        if state.y.shape != (m,) or state.x.shape != (n,):
            raise ValueError("warm start does not match the problem dimensions")
    bscale = 1.0 + np.linalg.norm(b)

    # inner tolerance follows the feasibility of the incoming pair
    Aty = A.T @ state.y
    res3 = float(np.linalg.norm(Aty + state.z) / (1.0 + np.linalg.norm(state.y) + np.linalg.norm(state.z)))
    res1 = float("inf")
    inner_total = 0
    converged = False
    history = []
    outer = 0
    for outer in range(1, cfg.max_outer + 1):
        inner_tol = max(cfg.outer_tol, cfg.inner_tol_factor * res3)
        inner = inner_solve(state, prob, p, cfg, tol=inner_tol)
        inner_total += inner.n_iter
        x_new = inner.x_next
        res3 = float(np.linalg.norm(inner.Aty + inner.z)
                     / (1.0 + np.linalg.norm(inner.y) + np.linalg.norm(inner.z)))
        res1 = inner.grad_norm / bscale
        state = DualState(inner.y, inner.z, x_new, state.sigma)
        history.append({"sigma": state.sigma, "inner_iters": inner.n_iter, "r": inner.active.r,
                        "res_kkt3": res3, "res_kkt1": res1})
        logger.debug("outer %d: sigma=%.3g inner=%d r=%d res3=%.2e res1=%.2e",
                     outer, state.sigma, inner.n_iter, inner.active.r, res3, res1)
        if res3 <= cfg.outer_tol and res1 <= cfg.outer_tol:
            converged = True
            break
        if not inner.converged and state.sigma >= cfg.sigma_max:
            break
        state.sigma = sigma_schedule(state.sigma, cfg)

    x = state.x
    active = np.flatnonzero(x)
    primal = prob.primal_objective(x, p)
    dual = -(h_star(state.y, b) + conjugate_value(p, state.z))
    if not converged:
        logger.warning("solver stopped after %d outer iterations (res3=%.2e, res1=%.2e)",
                       outer, res3, res1)
    return Solution(
        x=x, active_set=active, primal_objective=primal, dual_objective=dual,
        res_kkt3=res3, res_kkt1=res1, outer_iters=outer, inner_iters_total=inner_total,
        wall_time=time.perf_counter() - t0, converged=converged, state=state,
        penalty=penalty, history=history,
    )
