import numpy as np
import pytest

from ssnal_en import Penalty, Problem
from ssnal_en.selection import lambda_max


def random_problem(seed, m=None, n=None, standardized=False):
    rng = np.random.default_rng(seed)
    m = m or int(rng.integers(5, 21))
    n = n or int(rng.integers(3, 61))
    A = rng.standard_normal((m, n))
    x = np.zeros(n)
    k = max(1, n // 10)
    x[rng.choice(n, k, replace=False)] = rng.choice([-3.0, 3.0], k)
    b = A @ x + 0.5 * rng.standard_normal(m)
    if standardized:
        A = (A - A.mean(0)) / A.std(0)
        b = b - b.mean()
    return Problem(A, b)


def penalty_for(prob, alpha, c):
    return Penalty.from_alpha(alpha, c, lambda_max(prob, alpha))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
