"""Plain first-order Elastic Net solvers used as independent references.

Neither routine shares code with the Newton solver beyond the soft-threshold
kernel; they exist to certify its output, not to be fast.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .dual import Problem
from .penalty import Penalty, prox_penalty
from .solver import Solution, effective_penalty


@dataclass
class OracleConfig:
    max_iters: int = 1_000_000
    tol: float = 1e-12
    method: str = "prox_grad"  # prox_grad | coord_descent
    loss_scale: str = "unit"
    max_time: float | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.method not in ("prox_grad", "coord_descent"):
            raise ValueError(f"unknown oracle method {self.method!r}")


def spectral_norm_sq(A: np.ndarray, rtol: float = 1e-10, max_iter: int = 10_000, seed: int = 0) -> float:
    """Largest eigenvalue of ``A^T A`` by power iteration on ``v -> A^T (A v)``."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        u = A.T @ (A @ v)
        new = float(np.linalg.norm(u))
        if new == 0.0:
            return 0.0
        v = u / new
        if abs(new - est) <= rtol * new:
            return new
        est = new
    return est


def _objective_from(Ax, b, x, p):
    resid = Ax - b
    return 0.5 * float(resid @ resid) + p.lambda1 * float(np.abs(x).sum()) + 0.5 * p.lambda2 * float(x @ x)


def _finish(x, prob, penalty, p, iters, t0, converged):
    return Solution(x=x, active_set=np.flatnonzero(x), primal_objective=prob.primal_objective(x, p),
                    outer_iters=iters, wall_time=time.perf_counter() - t0,
                    converged=converged, penalty=penalty)


def prox_grad_solve(prob: Problem, penalty: Penalty, config: OracleConfig | None = None,
                    x0=None, target: float | None = None) -> Solution:
    """ISTA with constant step ``1 / (||A||_2^2 + lambda2)``.

    Stops when the relative objective change drops to ``tol``, or when the
    objective reaches ``target`` (used for time-to-target benchmarks), or
    after ``max_iters`` / ``max_time``.
    """
    cfg = config or OracleConfig()
    p = effective_penalty(penalty, prob.m, cfg.loss_scale)
    t0 = time.perf_counter()
    A, b = prob.A, prob.b
    step = 1.0 / (spectral_norm_sq(A) + p.lambda2)
    x = np.zeros(prob.n) if x0 is None else np.array(x0, dtype=float)
    Ax = A @ x
    obj = _objective_from(Ax, b, x, p)
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        x = prox_penalty(p, step, x - step * (A.T @ (Ax - b)))
        Ax = A @ x
        new = _objective_from(Ax, b, x, p)
        if abs(obj - new) <= cfg.tol * max(abs(new), 1e-300):
            obj = new
            converged = True
            break
        obj = new
        if target is not None and obj <= target:
            converged = True
            break
        if cfg.max_time is not None and time.perf_counter() - t0 > cfg.max_time:
            break
    return _finish(x, prob, penalty, p, it, t0, converged)


def coord_descent_solve(prob: Problem, penalty: Penalty, config: OracleConfig | None = None) -> Solution:
    """Cyclic coordinate descent with exact scalar minimization per coordinate."""
    cfg = config or OracleConfig(method="coord_descent")
    p = effective_penalty(penalty, prob.m, cfg.loss_scale)
    t0 = time.perf_counter()
    A, b = np.asfortranarray(prob.A), prob.b
    m, n = A.shape
    col_sq = np.einsum("ij,ij->j", A, A)
    denom = col_sq + p.lambda2
    x = np.zeros(n)
    resid = b.copy()
    obj = _objective_from(A @ x, b, x, p)
    converged = False
    sweep = 0
    for sweep in range(1, cfg.max_iters + 1):
        for j in range(n):
            if denom[j] == 0.0:
                continue
            aj = A[:, j]
            old = x[j]
            rho = aj @ resid + col_sq[j] * old
            new = np.sign(rho) * max(abs(rho) - p.lambda1, 0.0) / denom[j]
            if new != old:
                resid -= aj * (new - old)
                x[j] = new
        val = 0.5 * float(resid @ resid) + p.lambda1 * float(np.abs(x).sum()) + 0.5 * p.lambda2 * float(x @ x)
        if abs(obj - val) <= cfg.tol * max(abs(val), 1e-300):
            obj = val
            converged = True
            break
        obj = val
        if cfg.max_time is not None and time.perf_counter() - t0 > cfg.max_time:
            break
    return _finish(x, prob, penalty, p, sweep, t0, converged)


def oracle_solve(prob: Problem, penalty: Penalty, config: OracleConfig | None = None) -> Solution:
    cfg = config or OracleConfig()
    if cfg.method == "coord_descent":
        return coord_descent_solve(prob, penalty, cfg)
    return prox_grad_solve(prob, penalty, cfg)
