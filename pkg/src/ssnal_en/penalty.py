"""Elastic Net penalty kernels: value, Fenchel conjugate and proximal maps.

The penalty is ``p(x) = lambda1 * ||x||_1 + lambda2 / 2 * ||x||_2^2``.
All kernels act componentwise and are vectorized over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Penalty:
    """Elastic Net weights.

    Parameters
    ----------
    lambda1 : float
        Weight of the l1 norm.
    lambda2 : float
        Weight of the squared l2 norm (halved in the penalty).
    """

    lambda1: float
    lambda2: float

    def __post_init__(self):
        l1, l2 = float(self.lambda1), float(self.lambda2)
        if not (l1 >= 0 and l2 >= 0):
            raise ValueError(f"penalty weights must be nonnegative, got ({l1}, {l2})")
        if l1 == 0 and l2 == 0:
            raise ValueError("lambda1 and lambda2 cannot both be zero")
        object.__setattr__(self, "lambda1", l1)
        object.__setattr__(self, "lambda2", l2)

    @classmethod
    def from_alpha(cls, alpha: float, c_lambda: float, lambda_max: float) -> "Penalty":
        """Build weights from the mixing ``alpha`` and the fraction ``c_lambda`` of ``lambda_max``."""
        if not 0 < alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
        if not 0 < c_lambda <= 1:
            raise ValueError(f"c_lambda must lie in (0, 1], got {c_lambda}")
        scale = c_lambda * lambda_max
        return cls(alpha * scale, (1.0 - alpha) * scale)

    def scaled(self, factor: float) -> "Penalty":
        return Penalty(self.lambda1 * factor, self.lambda2 * factor)


def penalty_value(p: Penalty, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(p.lambda1 * np.abs(x).sum() + 0.5 * p.lambda2 * np.dot(x.ravel(), x.ravel()))


def conjugate_value(p: Penalty, z) -> float:
    """Fenchel conjugate ``p*(z)``.

    For ``lambda2 > 0`` this is ``sum((|z_i| - lambda1)_+^2) / (2 lambda2)``.
    For the pure Lasso it is the indicator of the box ``||z||_inf <= lambda1``
    and ``math.inf`` is returned outside of it.
    """
    z = np.asarray(z, dtype=float)
    excess = np.maximum(np.abs(z) - p.lambda1, 0.0)
    if p.lambda2 == 0.0:
        return 0.0 if not excess.any() else math.inf
    return float(np.dot(excess.ravel(), excess.ravel()) / (2.0 * p.lambda2))


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return sigma


def prox_penalty(p: Penalty, sigma: float, x) -> np.ndarray:
    """``prox_{sigma p}(x)``: soft-threshold at ``sigma * lambda1`` then shrink by ``1 + sigma * lambda2``.

    Entries with ``|x_i| <= sigma * lambda1`` map to exactly zero.
    """
    sigma = _check_sigma(sigma)
    x = np.asarray(x, dtype=float)
    mag = np.maximum(np.abs(x) - sigma * p.lambda1, 0.0)
    return np.sign(x) * mag / (1.0 + sigma * p.lambda2)


def prox_conjugate(p: Penalty, sigma: float, u) -> np.ndarray:
    """``prox_{p*/sigma}(u)`` in closed form.

    ``u`` is the evaluation point itself; with ``t = sigma * u`` the map is
    ``u`` inside the threshold box and ``(lambda2 t + sign(t) lambda1) / (1 + sigma lambda2)``
    outside it.
    """
    sigma = _check_sigma(sigma)
    u = np.asarray(u, dtype=float)
    t = sigma * u
    outside = np.abs(t) > sigma * p.lambda1
    shrunk = (p.lambda2 * t + np.sign(t) * p.lambda1) / (1.0 + sigma * p.lambda2)
    return np.where(outside, shrunk, u)
