"""Regularization paths and model selection (GCV, e-BIC, k-fold CV)."""

from __future__ import annotations

import csv
import logging
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import SolverConfig
from .data import Dataset, standardize
from .dual import Problem
from .penalty import Penalty
from .solver import Solution, solve

logger = logging.getLogger(__name__)

CRITERIA = ("gcv", "ebic", "cv")


@dataclass
class LambdaGrid:
    """Sparse-to-dense sweep ``lambda1 = alpha c lambda_max``, ``lambda2 = (1 - alpha) c lambda_max``."""

    alpha: float
    c_values: np.ndarray
    lambda_max: float
    max_active: int | None = None
    l1_max: float | None = None

    def __post_init__(self):
        self.c_values = np.asarray(self.c_values, dtype=float)
        if np.any(np.diff(self.c_values) > 0):
            raise ValueError("c_values must be non-increasing")
        if self.l1_max is None:
            self.l1_max = self.alpha * self.lambda_max

    def __len__(self) -> int:
        return self.c_values.size

    def penalty(self, i: int) -> Penalty:
        # lambda1 is built from ||A^T b||_inf itself so that c = 1 is exactly the empty model
        c = float(self.c_values[i])
        return Penalty(c * self.l1_max, (1.0 - self.alpha) * c * self.lambda_max)


def lambda_max(prob: Problem, alpha: float) -> float:
    """``||A^T b||_inf / alpha``: with ``c = 1`` the solution is zero."""
    return _l1_max(prob) / alpha


def _l1_max(prob: Problem) -> float:
    return float(np.abs(prob.A.T @ prob.b).max())


def make_grid(prob: Problem, alpha: float, c_values, max_active: int | None = None) -> LambdaGrid:
    l1 = _l1_max(prob)
    return LambdaGrid(alpha, c_values, l1 / alpha, max_active, l1_max=l1)


def build_grid(prob: Problem, alpha: float, n_points: int = 100, c_min: float = 0.1,
               max_active: int | None = None) -> LambdaGrid:
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    if not 0 < c_min < 1:
        raise ValueError(f"c_min must lie in (0, 1), got {c_min}")
    if _l1_max(prob) == 0:
        raise ValueError("A^T b = 0: lambda_max is zero and the path is degenerate")
    c = np.geomspace(1.0, c_min, n_points) if n_points > 1 else np.ones(1)
    return make_grid(prob, alpha, c, max_active)


def degrees_of_freedom(prob: Problem, J, lambda2: float) -> float:
    """``tr(A_J (A_J^T A_J + lambda2 I)^-1 A_J^T) = sum d_i^2 / (d_i^2 + lambda2)``.

    Zero singular values contribute nothing, which also makes the Lasso case
    with a rank-deficient ``A_J`` well defined.
    """
    J = np.asarray(J, dtype=int)
    if J.size == 0:
        return 0.0
    d2 = np.linalg.svd(prob.A[:, J], compute_uv=False) ** 2
    tiny = d2.max() * max(prob.m, J.size) * np.finfo(float).eps
    d2 = d2[d2 > tiny]
    return float(np.sum(d2 / (d2 + lambda2)))


def gcv(rss: float, m: int, nu: float) -> float:
    if nu >= m:
        return math.inf
    return rss / m / (1.0 - nu / m) ** 2


def ebic(rss: float, m: int, n: int, nu: float) -> float:
    if rss <= 0:
        return -math.inf
    return math.log(rss / m) + nu / m * (math.log(m) + math.log(n))


def debias(prob: Problem, J, lambda2: float = 0.0) -> tuple[np.ndarray, bool]:
    """Least squares of ``b`` on the selected columns.

    Returns
    -------
    coef : ndarray of shape (r,)
    fallback : bool
        True when ``A_J`` has ``r >= m`` columns or is rank deficient; a ridge
        fit with penalty ``lambda2`` (or a minimum-norm fit if ``lambda2`` is 0)
        is returned instead.
    """
    J = np.asarray(J, dtype=int)
    if J.size == 0:
        return np.zeros(0), False
    AJ = prob.A[:, J]
    m, r = AJ.shape
    if r < m:
        coef, _, rank, _ = np.linalg.lstsq(AJ, prob.b, rcond=None)
        if rank == r:
            return coef, False
    if lambda2 > 0:
        if r <= m:
            G = AJ.T @ AJ
            G[np.diag_indices(r)] += lambda2
            return np.linalg.solve(G, AJ.T @ prob.b), True
        K = AJ @ AJ.T
        K[np.diag_indices(m)] += lambda2
        return AJ.T @ np.linalg.solve(K, prob.b), True
    return np.linalg.lstsq(AJ, prob.b, rcond=None)[0], True


@dataclass
class PathPoint:
    alpha: float
    c_lambda: float
    lambda1: float
    lambda2: float
    r: int
    rss: float
    nu: float
    gcv: float
    ebic: float
    cv_mean: float = float("nan")
    cv_se: float = float("nan")
    objective: float = float("nan")
    outer_iters: int = 0
    inner_iters: int = 0
    time: float = 0.0
    converged: bool = True
    debias_fallback: bool = False


@dataclass
class SelectionReport:
    points: list[PathPoint] = field(default_factory=list)
    solutions: list[Solution] = field(default_factory=list)
    chosen: dict[str, int] = field(default_factory=dict)
    debiased: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(pt, name) for pt in self.points], dtype=float)

    def extend(self, other: "SelectionReport") -> None:
        self.points.extend(other.points)
        self.solutions.extend(other.solutions)

    def choose(self, criteria=CRITERIA) -> dict[str, int]:
        """Global argmin per criterion; ties go to the larger ``lambda1`` (sparser model)."""
        l1 = self.column("lambda1")
        for crit in criteria:
            vals = self.column("cv_mean" if crit == "cv" else crit)
            ok = ~np.isnan(vals)
            if not ok.any():
                continue
            best = np.nanmin(vals)
            ties = np.flatnonzero(ok & (vals == best))
            self.chosen[crit] = int(ties[np.argmax(l1[ties])])
        return self.chosen

    def to_rows(self) -> list[dict]:
        return [asdict(pt) for pt in self.points]

    def to_csv(self, path) -> None:
        rows = self.to_rows()
        names = list(PathPoint.__dataclass_fields__)
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=names)
            writer.writeheader()
            for row in rows:
                writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})

    def to_dict(self) -> dict:
        return {
            "points": self.to_rows(),
            "chosen": {k: {"index": i, **asdict(self.points[i])} for k, i in self.chosen.items()},
            "debiased": {k: {"indices": idx.tolist(), "values": vals.tolist()}
                         for k, (idx, vals) in self.debiased.items()},
        }


def _score_point(prob: Problem, grid: LambdaGrid, i: int, sol: Solution) -> PathPoint:
    p = grid.penalty(i)
    J = sol.active_set
    coef, fallback = debias(prob, J, p.lambda2)
    resid = prob.b - prob.A[:, J] @ coef
    rss = float(resid @ resid)
    nu = degrees_of_freedom(prob, J, p.lambda2)
    return PathPoint(
        alpha=grid.alpha, c_lambda=float(grid.c_values[i]), lambda1=p.lambda1, lambda2=p.lambda2,
        r=sol.r, rss=rss, nu=nu, gcv=gcv(rss, prob.m, nu), ebic=ebic(rss, prob.m, prob.n, nu),
        objective=sol.primal_objective, outer_iters=sol.outer_iters,
        inner_iters=sol.inner_iters_total, time=sol.wall_time, converged=sol.converged,
        debias_fallback=fallback,
    )


def path(prob: Problem, grid: LambdaGrid, config: SolverConfig | None = None,
         warm_start: bool = True) -> SelectionReport:
    """Solve along the grid, chaining each solution into the next as a warm start.

    The sweep stops after the first point whose active set reaches
    ``grid.max_active``.
    """
    cfg = config or SolverConfig()
    report = SelectionReport()
    warm = None
    for i in range(len(grid)):
        sol = solve(prob, grid.penalty(i), cfg, warm=warm)
        if warm_start:
            warm = sol.state
        report.points.append(_score_point(prob, grid, i, sol))
        report.solutions.append(sol)
        if grid.max_active is not None and sol.r >= grid.max_active:
            break
    return report


def _fold_scores(prob_raw: tuple[np.ndarray, np.ndarray], train, test, alpha, c_values, cfg):
    A_raw, b_raw = prob_raw
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tr, _ = standardize(Dataset(A_raw[train], b_raw[train]))
    A_te = (A_raw[np.ix_(test, tr.columns)] - tr.col_means) / tr.col_scales
    b_te = b_raw[test]
    grid = make_grid(tr, alpha, c_values)
    rep = path(tr, grid, cfg)
    mse = np.empty(len(c_values))
    for i, sol in enumerate(rep.solutions):
        J = sol.active_set
        coef, _ = debias(tr, J, grid.penalty(i).lambda2)
        pred = A_te[:, J] @ coef + tr.b_mean
        mse[i] = float(np.mean((b_te - pred) ** 2))
    return mse


def fold_indices(m: int, k: int, seed: int = 0) -> list[np.ndarray]:
    """Seeded partition of ``range(m)`` into ``k`` blocks whose sizes differ by at most one."""
    if k < 2 or k > m:
        raise ValueError(f"need 2 <= k <= m, got k={k}, m={m}")
    perm = np.random.default_rng(seed).permutation(m)
    return [np.sort(f) for f in np.array_split(perm, k)]


def kfold_cv(prob: Problem, grid: LambdaGrid, k: int = 10, config: SolverConfig | None = None,
             seed: int = 0, threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Per-grid-point mean and standard error of held-out MSE of de-biased fits.

    Each training fold is re-standardized from the raw data and uses its own
    ``lambda_max`` with the grid's ``c`` values; held-out rows are transformed
    with the training statistics. Prediction error is measured on the raw
    response scale.
    """
    cfg = config or SolverConfig()
    raw = prob.raw_design()
    folds = fold_indices(prob.m, k, seed)
    everything = np.arange(prob.m)
    jobs = [(np.setdiff1d(everything, te), te) for te in folds]

    def run(job):
        return _fold_scores(raw, job[0], job[1], grid.alpha, grid.c_values, cfg)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            scores = np.array(list(pool.map(run, jobs)))
    else:
        scores = np.array([run(j) for j in jobs])
    mean = scores.mean(axis=0)
    se = scores.std(axis=0, ddof=1) / math.sqrt(k)
    return mean, se


def select_model(prob: Problem, alphas=(0.9, 0.8, 0.6), n_lambda: int = 100, c_min: float = 0.1,
                 max_active: int | None = None, cv_folds: int | None = 10,
                 criteria=CRITERIA, config: SolverConfig | None = None, seed: int = 0,
                 threads: int = 1) -> SelectionReport:
    """Sweep every ``alpha`` separately, score each point and pick a model per criterion."""
    cfg = config or SolverConfig()
    criteria = tuple(criteria)
    report = SelectionReport()
    for alpha in alphas:
        t0 = time.perf_counter()
        grid = build_grid(prob, alpha, n_lambda, c_min, max_active)
        rep = path(prob, grid, cfg)
        if cv_folds and "cv" in criteria:
            done = LambdaGrid(alpha, grid.c_values[: len(rep)], grid.lambda_max, l1_max=grid.l1_max)
            mean, se = kfold_cv(prob, done, cv_folds, cfg, seed, threads)
            for pt, mu_, s_ in zip(rep.points, mean, se):
                pt.cv_mean, pt.cv_se = float(mu_), float(s_)
        logger.info("alpha=%g: %d grid points in %.2fs", alpha, len(rep), time.perf_counter() - t0)
        report.extend(rep)
    report.choose(criteria)
    for crit, i in report.chosen.items():
        J = report.solutions[i].active_set
        coef, _ = debias(prob, J, report.points[i].lambda2)
        report.debiased[crit] = (J, coef)
    return report
