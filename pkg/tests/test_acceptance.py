"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v`` or
``python tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest

from ssnal_en import Dataset, Penalty, Problem, SimSpec, SolverConfig, generate, solve, standardize
from ssnal_en.bench import find_c_for_support, run_cell
from ssnal_en.data import PRESETS, poly_exponents, poly_expand, poly_n_columns, realized_snr, rho_hat
from ssnal_en.dual import DualState, psi_gradient, psi_value
from ssnal_en.newton import extract_active_set, newton_direction
from ssnal_en.oracle import coord_descent_solve, prox_grad_solve
from ssnal_en.penalty import conjugate_value, penalty_value, prox_conjugate, prox_penalty
from ssnal_en.selection import build_grid, degrees_of_freedom, make_grid, path

PROTOCOL = SolverConfig(outer_tol=1e-6, sigma0=5e-3, sigma_factor=5.0, mu=0.2)


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail}")
        assert ok, detail
    return emit


def small_instance(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(5, 21))
    n = int(rng.integers(5, 61))
    A = rng.standard_normal((m, n))
    x = np.zeros(n)
    k = int(rng.integers(1, max(2, n // 5)))
    x[rng.choice(n, k, replace=False)] = rng.normal(0, 3, k)
    b = A @ x + rng.standard_normal(m)
    prob, _ = standardize(Dataset(A, b))
    return prob


GRID = [(a, c) for a in (0.3, 0.6, 0.9) for c in (0.8, 0.5, 0.2)]


def test_01_oracle_equivalence(verdict):
    t0 = time.perf_counter()
    worst, mismatches, count = 0.0, 0, 0
    for seed in range(50):
        prob = small_instance(seed)
        for alpha, c in GRID:
            p = make_grid(prob, alpha, [c]).penalty(0)
            sol = solve(prob, p, PROTOCOL)
            for ref in (prox_grad_solve(prob, p), coord_descent_solve(prob, p)):
                worst = max(worst, abs(sol.primal_objective - ref.primal_objective) / abs(ref.primal_objective))
                if not np.array_equal(sol.active_set, np.flatnonzero(np.abs(ref.x) > 1e-8)):
                    mismatches += 1
            count += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and mismatches == 0 and elapsed < 60
    verdict(1, "oracle equivalence", ok,
            f"{count} solves, max rel objective diff {worst:.2e}, support mismatches {mismatches}, {elapsed:.1f}s")


def test_02_kkt_certification(verdict):
    rows = []
    for seed in range(50):
        prob = small_instance(seed)
        for alpha, c in GRID:
            rows.append(solve(prob, make_grid(prob, alpha, [c]).penalty(0), PROTOCOL))
    for name in PRESETS:
        prob, _ = standardize(generate(SimSpec.preset(name, 10_000, m=100, seed=11)))
        for c in (0.9, 0.5, 0.2, 0.1):
            rows.append(solve(prob, make_grid(prob, PRESETS[name][2], [c]).penalty(0), PROTOCOL))
    conv = [s for s in rows if s.converged]
    r3 = max(s.res_kkt3 for s in conv)
    r1 = max(s.res_kkt1 for s in conv)
    gap = max(abs(s.gap) / (1 + abs(s.primal_objective)) for s in conv)
    ok = len(conv) == len(rows) and r3 <= 1e-6 and r1 <= 1e-6 and gap <= 1e-5
    verdict(2, "KKT certification", ok,
            f"{len(conv)}/{len(rows)} converged, max res3 {r3:.2e}, max res1 {r1:.2e}, max scaled gap {gap:.2e}")


def test_03_iteration_counts(verdict):
    t0 = time.perf_counter()
    counts, notes = [], []
    for name, (_, n0, alpha) in PRESETS.items():
        prob, _ = standardize(generate(SimSpec.preset(name, 10_000, m=100, seed=0)))
        c, r = find_c_for_support(prob, alpha, n0, PROTOCOL)
        sol = solve(prob, make_grid(prob, alpha, [c]).penalty(0), PROTOCOL)
        counts.append(sol.outer_iters if sol.converged else math.inf)
        notes.append(f"{name}: r={sol.r}/{n0} c={c:.3f} iters={sol.outer_iters}")
    elapsed = time.perf_counter() - t0
    ok = max(counts) <= 8 and elapsed < 30
    tag = "within 6" if max(counts) <= 6 else "within allowance 8"
    verdict(3, "iteration counts at m=100, n=1e4", ok, f"{'; '.join(notes)}; {tag}; {elapsed:.1f}s")


def test_04_prox_conjugate_properties(verdict):
    rng = np.random.default_rng(4)
    N = 10_000
    moreau, fy = 0.0, 0.0
    for i in range(N):
        l1 = float(rng.uniform(0, 5)) if i % 7 else 0.0
        l2 = float(rng.uniform(0, 5)) if i % 5 else 0.0
        if l1 == 0 and l2 == 0:
            l1 = 1.0
        p = Penalty(l1, l2)
        sigma = float(10 ** rng.uniform(-3, 3))
        x = rng.normal(scale=10 ** rng.uniform(-2, 2), size=4)
        rebuilt = prox_penalty(p, sigma, x) + sigma * prox_conjugate(p, sigma, x / sigma)
        moreau = max(moreau, float(np.max(np.abs(rebuilt - x)) / np.max(np.abs(x))))
        z = rng.normal(scale=3, size=4)
        fy = max(fy, float(x @ z) - penalty_value(p, x) - conjugate_value(p, z))
    p = Penalty(0.8, 0.5)
    grid = np.linspace(-60, 60, 1_200_001)
    pen = p.lambda1 * np.abs(grid) + 0.5 * p.lambda2 * grid**2
    sup = max(abs(conjugate_value(p, [z]) - float(np.max(z * grid - pen))) for z in np.linspace(-5, 5, 41))
    ok = moreau <= 1e-12 and fy <= 1e-10 and sup <= 1e-4
    verdict(4, "prox/conjugate properties", ok,
            f"Moreau max rel err {moreau:.1e}, Fenchel-Young max violation {fy:.1e}, grid-sup err {sup:.1e}")


def test_05_gradient_check(verdict):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(20):
        m, n = int(rng.integers(2, 11)), int(rng.integers(1, 51))
        prob = Problem(rng.standard_normal((m, n)), rng.standard_normal(m))
        p = Penalty(float(rng.uniform(0.05, 1)), float(rng.uniform(0, 1)))
        st = DualState(rng.standard_normal(m), np.zeros(n), rng.standard_normal(n), float(10 ** rng.uniform(-2, 1)))
        g = psi_gradient(st, prob, p)
        fd = np.empty(m)
        h = 1e-6
        for i in range(m):
            e = np.zeros(m)
            e[i] = h
            fd[i] = (psi_value(DualState(st.y + e, st.z, st.x, st.sigma), prob, p)
                     - psi_value(DualState(st.y - e, st.z, st.x, st.sigma), prob, p)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(fd - g)) / max(1.0, np.max(np.abs(g)))))
    verdict(5, "gradient check", worst <= 1e-6, f"max relative error {worst:.1e} over 20 states")


def test_06_linear_algebra(verdict):
    rng = np.random.default_rng(6)
    err = {"cholesky_m": 0.0, "smw_r": 0.0}
    cg_ok = True
    for _ in range(100):
        m, r = int(rng.integers(2, 51)), int(rng.integers(1, 31))
        prob = Problem(rng.standard_normal((m, r)), rng.standard_normal(m))
        p = Penalty(float(rng.uniform(0.1, 2)), float(rng.uniform(0, 2)))
        sigma = float(10 ** rng.uniform(-2, 2))
        w = np.sign(rng.standard_normal(r)) * sigma * p.lambda1 * (1 + rng.uniform(0.01, 3, r))
        act = extract_active_set(w, sigma, p)
        grad = rng.standard_normal(m)
        q = np.full(r, 1.0 / (1.0 + sigma * p.lambda2))
        V = np.eye(m) + sigma * prob.A @ np.diag(q) @ prob.A.T
        ref = np.linalg.solve(V, -grad)
        for strategy in err:
            d = newton_direction(act, prob, grad, SolverConfig(strategy=strategy))
            err[strategy] = max(err[strategy], float(np.linalg.norm(d - ref) / np.linalg.norm(ref)))
        cfg = SolverConfig(strategy="cg")
        d = newton_direction(act, prob, grad, cfg)
        rtol = min(cfg.cg_rtol_max, math.sqrt(np.linalg.norm(grad)))
        cg_ok &= bool(np.linalg.norm(V @ d + grad) <= rtol * np.linalg.norm(grad) * (1 + 1e-8))
    ok = max(err.values()) <= 1e-10 and cg_ok
    verdict(6, "linear-algebra equivalence", ok,
            f"Cholesky {err['cholesky_m']:.1e}, SMW {err['smw_r']:.1e}, CG within rtol: {cg_ok}")


def test_07_degrees_of_freedom(verdict):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        m, r = int(rng.integers(2, 40)), int(rng.integers(1, 30))
        prob = Problem(rng.standard_normal((m, r)), rng.standard_normal(m))
        lam2 = float(10 ** rng.uniform(-2, 1))
        A = prob.A
        direct = float(np.trace(A @ np.linalg.solve(A.T @ A + lam2 * np.eye(r), A.T)))
        worst = max(worst, abs(degrees_of_freedom(prob, np.arange(r), lam2) - direct))
    Q, _ = np.linalg.qr(rng.standard_normal((30, 12)))
    nu = degrees_of_freedom(Problem(Q, np.ones(30)), np.arange(12), 0.0)
    ok = worst <= 1e-10 and abs(nu - 12) <= 1e-10
    verdict(7, "degrees of freedom", ok, f"SVD vs trace max diff {worst:.1e}; orthonormal nu={nu:.12f} (r=12)")


def test_08_path_consistency(verdict):
    # sim1 with alpha=0.8, a 100-point grid from 1 to 0.1 (2.3% spacing), truncated at 100 active
    prob, _ = standardize(generate(SimSpec.preset("sim1", 100_000, m=500, seed=0)))
    grid = build_grid(prob, 0.8, 100, 0.1, max_active=100)
    spacing = 1 - grid.c_values[1] / grid.c_values[0]
    warm = path(prob, grid, PROTOCOL)
    cold = path(prob, grid, PROTOCOL, warm_start=False)
    rel = max(abs(a.objective - b.objective) / abs(b.objective) for a, b in zip(warm.points, cold.points))
    iters = [s.outer_iters for s in warm.solutions[1:]]
    ok = len(warm) == len(cold) and rel <= 1e-6 and max(iters) <= 2 and spacing <= 0.05
    verdict(8, "path consistency", ok,
            f"{len(warm)} grid points (spacing {spacing:.1%}), warm vs cold max rel diff {rel:.1e}, "
            f"warm outer iterations {iters}")


def test_09_data_protocol(verdict):
    snrs = {}
    for name in PRESETS:
        snrs[name] = realized_snr(generate(SimSpec.preset(name, 1000, m=5000, seed=9)))
    snr_ok = all(abs(v / 5.0 - 1) <= 0.1 for v in snrs.values())
    counted = sum(1 for _ in poly_exponents(13, 8))
    expanded = poly_expand(np.random.default_rng(0).standard_normal((3, 13)), 8).shape[1]
    poly_ok = poly_n_columns(13, 8) == counted == expanded == 203489
    rhos = {}
    for n in (10_000, 100_000):
        rhos[n] = rho_hat(generate(SimSpec.preset("sim1", n, seed=9)))
    rho_ok = all(0.7 <= v <= 1.7 for v in rhos.values())
    detail = (f"snr {', '.join(f'{k}={v:.3f}' for k, v in snrs.items())}; poly columns {expanded}; "
              f"rho_hat {', '.join(f'n={k}: {v:.3f}' for k, v in rhos.items())}")
    verdict(9, "data protocol", snr_ok and poly_ok and rho_ok, detail)


@pytest.mark.slow
def test_10_bench_against_baseline(verdict):
    row = run_cell("sim3", 100_000, 20, m=500, seed=0, baseline_reps=2, baseline_max_time=30.0,
                   config=PROTOCOL)
    ok = (row["reps"] >= 20 and row["ssnal_time_se"] is not None
          and row["speedup"] is not None and row["speedup"] > 1.0)
    note = "target 5x met" if row["speedup"] >= 5 else "below 5x target"
    capped = "" if row["baseline_reached_target"] else " (baseline hit its time cap, so the speedup is a lower bound)"
    verdict(10, "bench vs proximal-gradient baseline", ok,
            f"ssnal {row['ssnal_time_mean']:.3f}s +- {row['ssnal_time_se']:.3f} over {row['reps']} reps, "
            f"baseline {row['baseline_time_mean']:.1f}s over {row['baseline_reps']} reps, "
            f"speedup {row['speedup']:.0f}x, {note}{capped}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
