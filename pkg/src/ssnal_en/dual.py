"""Dual augmented Lagrangian pieces for the least-squares Elastic Net.

The dual problem is ``min -(h*(y) + p*(z))`` subject to ``A^T y + z = 0`` with
``h*(y) = ||y||^2 / 2 + b^T y``. For a fixed multiplier ``x`` and penalty
parameter ``sigma``, minimizing the augmented Lagrangian over ``z`` leaves the
smooth function ``psi(y)`` which the Newton solver works on. Every quantity
below is a function of ``w = x - sigma * A^T y``; callers that already hold
``w`` can pass it to skip the ``n x m`` product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .penalty import Penalty, prox_penalty


@dataclass
class Problem:
    """A (usually standardized) least-squares design.

    Attributes
    ----------
    A : ndarray of shape (m, n)
    b : ndarray of shape (m,)
    col_means, col_scales : ndarray of shape (n,)
        Raw column ``j`` equals ``A[:, j] * col_scales[j] + col_means[j]``.
    b_mean : float
        Raw response equals ``b + b_mean``.
    columns : ndarray of shape (n,)
        Index of each column in the raw design (constant columns may have
        been dropped).
    """

    A: np.ndarray
    b: np.ndarray
    col_means: np.ndarray = None
    col_scales: np.ndarray = None
    b_mean: float = 0.0
    columns: np.ndarray = None
    n_raw_features: int = None

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.A.ndim != 2:
            raise ValueError("A must be a 2-d array")
        m, n = self.A.shape
        if self.b.shape[0] != m:
            raise ValueError(f"A has {m} rows but b has {self.b.shape[0]} entries")
        if m < 2 or n < 1:
            raise ValueError(f"need m >= 2 and n >= 1, got m={m}, n={n}")
        if self.col_means is None:
            self.col_means = np.zeros(n)
        if self.col_scales is None:
            self.col_scales = np.ones(n)
        if self.columns is None:
            self.columns = np.arange(n)
        if self.n_raw_features is None:
            self.n_raw_features = int(self.columns.max()) + 1 if n else 0

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def primal_objective(self, x, p: Penalty) -> float:
        x = np.asarray(x, dtype=float)
        nz = np.flatnonzero(x)
        resid = self.A[:, nz] @ x[nz] - self.b
        return 0.5 * float(resid @ resid) + p.lambda1 * float(np.abs(x).sum()) + 0.5 * p.lambda2 * float(x @ x)

    def raw_design(self) -> tuple[np.ndarray, np.ndarray]:
        """Undo standardization of the kept columns and the response."""
        return self.A * self.col_scales + self.col_means, self.b + self.b_mean


@dataclass
class DualState:
    """Iterate of the augmented Lagrangian method."""

    y: np.ndarray
    z: np.ndarray
    x: np.ndarray
    sigma: float

    @classmethod
    def zeros(cls, m: int, n: int, sigma: float) -> "DualState":
        return cls(np.zeros(m), np.zeros(n), np.zeros(n), float(sigma))

    def copy(self) -> "DualState":
        return DualState(self.y.copy(), self.z.copy(), self.x.copy(), self.sigma)


def h_star(y, b) -> float:
    y = np.asarray(y, dtype=float)
    b = np.asarray(b, dtype=float)
    if y.shape != b.shape:
        raise ValueError("y and b must have the same length")
    return 0.5 * float(y @ y) + float(b @ y)


def shifted_point(state: DualState, prob: Problem) -> np.ndarray:
    """``w = x - sigma * A^T y``."""
    return state.x - state.sigma * (prob.A.T @ state.y)


def psi_value(state: DualState, prob: Problem, p: Penalty, w=None) -> float:
    if w is None:
        w = shifted_point(state, prob)
    s = state.sigma
    px = prox_penalty(p, s, w)
    return (h_star(state.y, prob.b)
            + (1.0 + s * p.lambda2) / (2.0 * s) * float(px @ px)
            - float(state.x @ state.x) / (2.0 * s))


def psi_gradient(state: DualState, prob: Problem, p: Penalty, w=None) -> np.ndarray:
    if w is None:
        w = shifted_point(state, prob)
    px = prox_penalty(p, state.sigma, w)
    nz = np.flatnonzero(px)
    return state.y + prob.b - prob.A[:, nz] @ px[nz]


def z_update(state: DualState, prob: Problem, p: Penalty, w=None) -> np.ndarray:
    """Minimizer over ``z`` of the augmented Lagrangian, ``prox_{p*/sigma}(w / sigma)``.

    Computed through the Moreau identity so that ``A^T y + z`` is an exact
    multiple of the multiplier change.
    """
    if w is None:
        w = shifted_point(state, prob)
    s = state.sigma
    return (w - prox_penalty(p, s, w)) / s


def multiplier_update(state: DualState, prob: Problem) -> np.ndarray:
    return state.x - state.sigma * (prob.A.T @ state.y + state.z)


def kkt_residuals(state: DualState, prob: Problem) -> tuple[float, float]:
    """Normalized residuals of ``A^T y + z = 0`` and ``y + b - A x = 0``.

    Returns
    -------
    res3, res1 : float
    """
    y, z, x = state.y, state.z, state.x
    res3 = np.linalg.norm(prob.A.T @ y + z) / (1.0 + np.linalg.norm(y) + np.linalg.norm(z))
    nz = np.flatnonzero(x)
    res1 = np.linalg.norm(y + prob.b - prob.A[:, nz] @ x[nz]) / (1.0 + np.linalg.norm(prob.b))
    return float(res3), float(res1)
