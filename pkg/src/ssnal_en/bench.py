"""Timing harness: the Newton solver against the proximal-gradient baseline."""

from __future__ import annotations

import gc
import logging
import math
import time

import numpy as np

from .config import SolverConfig
from .data import PRESETS, SimSpec, generate, rho_hat, standardize
from .dual import Problem
from .oracle import OracleConfig, prox_grad_solve
from .selection import make_grid
from .solver import solve

logger = logging.getLogger(__name__)

BENCH_COLUMNS = [
    "scenario", "n", "m", "n0", "alpha", "c_lambda", "reps",
    "ssnal_time_mean", "ssnal_time_se", "outer_iters_mean", "r_mean", "rho_hat",
    "baseline_reps", "baseline_time_mean", "baseline_time_se", "baseline_reached_target",
    "oracle_gap_max", "speedup",
]


def mean_se(values) -> tuple[float, float | None]:
    """Mean and standard error; the error is None for a single value."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return float("nan"), None
    if v.size == 1:
        return float(v[0]), None
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def find_c_for_support(prob: Problem, alpha: float, target_r: int, config: SolverConfig | None = None,
                       c_lo: float = 1e-3, iters: int = 40) -> tuple[float, int]:
    """Largest ``c_lambda`` whose solution has ``target_r`` active features, by bisection in log c.

    Returns the ``c`` found and the active-set size it produces; when the
    size jumps past ``target_r`` the closest denser point is returned.
    """
    cfg = config or SolverConfig()
    def size(c):
        return solve(prob, make_grid(prob, alpha, [c]).penalty(0), cfg).r

    hi, lo = 1.0, c_lo
    r_lo = size(lo)
    if r_lo < target_r:
        return lo, r_lo
    for _ in range(iters):
        mid = math.sqrt(hi * lo)
        r_mid = size(mid)
        if r_mid >= target_r:
            lo, r_lo = mid, r_mid
        else:
            hi = mid
        if r_lo == target_r and hi / lo < 1.0 + 1e-3:
            break
    return lo, r_lo


def run_cell(scenario: str, n: int, reps: int = 20, *, m: int | None = None, n0: int | None = None,
             c_lambda: float | None = 0.5, target_r: int | None = None, seed: int = 0,
             baseline_reps: int | None = None, baseline_max_time: float | None = None,
             config: SolverConfig | None = None) -> dict:
    """Time ``reps`` replications of one (scenario, n) cell.

    Every replication draws fresh data with seed ``seed + rep`` and keeps
    ``c_lambda`` fixed. The baseline runs on the first ``baseline_reps``
    replications until it reaches the Newton solver's objective within a
    relative 1e-6 (time to target), capped by ``baseline_max_time`` seconds;
    a capped run still bounds the baseline time from below.
    """
    cfg = config or SolverConfig()
    pm, pn0, alpha = PRESETS[scenario]
    m = pm if m is None else m
    n0 = pn0 if n0 is None else n0
    baseline_reps = reps if baseline_reps is None else min(baseline_reps, reps)
    times, iters, sizes, b_times, gaps = [], [], [], [], []
    reached = True
    rho = float("nan")
    for rep in range(reps):
        ds = generate(SimSpec(m=m, n=n, n0=n0, seed=seed + rep))
        if rep == 0:
            rho = rho_hat(ds)
        prob, _ = standardize(ds)
        del ds
        if c_lambda is None:
            if rep == 0:
                c_lambda, got = find_c_for_support(prob, alpha, target_r if target_r else n0, cfg)
                logger.info("%s n=%d: c_lambda=%.4g gives r=%d", scenario, n, c_lambda, got)
        pen = make_grid(prob, alpha, [c_lambda]).penalty(0)
        sol = solve(prob, pen, cfg)
        times.append(sol.wall_time)
        iters.append(sol.outer_iters)
        sizes.append(sol.r)
        if rep < baseline_reps:
            target = sol.primal_objective + 1e-6 * abs(sol.primal_objective)
            ocfg = OracleConfig(tol=1e-14, max_time=baseline_max_time)
            t0 = time.perf_counter()
            base = prox_grad_solve(prob, pen, ocfg, target=target)
            b_times.append(time.perf_counter() - t0)
            reached &= base.primal_objective <= target
            gaps.append(abs(base.primal_objective - sol.primal_objective) / abs(sol.primal_objective))
        del prob
        gc.collect()
    t_mean, t_se = mean_se(times)
    bt_mean, bt_se = mean_se(b_times)
    return {
        "scenario": scenario, "n": n, "m": m, "n0": n0, "alpha": alpha, "c_lambda": c_lambda,
        "reps": reps, "ssnal_time_mean": t_mean, "ssnal_time_se": t_se,
        "outer_iters_mean": float(np.mean(iters)), "r_mean": float(np.mean(sizes)), "rho_hat": rho,
        "baseline_reps": len(b_times), "baseline_time_mean": bt_mean if b_times else None,
        "baseline_time_se": bt_se, "baseline_reached_target": reached if b_times else None,
        "oracle_gap_max": max(gaps) if gaps else None,
        "speedup": bt_mean / float(np.mean(times[: len(b_times)])) if b_times else None,
    }


def run_bench(scenario: str, n_list, reps: int = 20, **kwargs) -> list[dict]:
    return [run_cell(scenario, int(n), reps, **kwargs) for n in n_list]
