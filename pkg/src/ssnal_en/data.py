"""Synthetic and real data tooling.

* ``generate``: Gaussian designs with a sparse constant-amplitude truth and
  noise calibrated to a target signal-to-noise ratio.
* ``read_libsvm`` / ``read_csv``: dense loaders.
* ``poly_expand``: all monomials up to a total degree.
* ``standardize``: zero-mean, unit-variance columns and a centered response.
* ``rho_hat``: top eigenvalue of ``A A^T`` divided by the number of features.
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dual import Problem

logger = logging.getLogger(__name__)

# (m, n0, alpha) per scenario
PRESETS = {
    "sim1": (500, 100, 0.6),
    "sim2": (500, 20, 0.75),
    "sim3": (500, 5, 0.9),
}


@dataclass
class SimSpec:
    m: int
    n: int
    n0: int
    x_star: float = 5.0
    snr: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.m < 2 or self.n < 1:
            raise ValueError(f"need m >= 2 and n >= 1, got m={self.m}, n={self.n}")
        if not 0 <= self.n0 <= self.n:
            raise ValueError(f"n0 must lie in [0, n], got {self.n0}")
        if not self.snr > 0:
            raise ValueError("snr must be positive")

    @classmethod
    def preset(cls, name: str, n: int, seed: int = 0, **overrides) -> "SimSpec":
        try:
            m, n0, _ = PRESETS[name]
        except KeyError:
            raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
        kw = {"m": m, "n": n, "n0": n0, "seed": seed}
        kw.update(overrides)
        return cls(**kw)


@dataclass
class Dataset:
    A: np.ndarray
    b: np.ndarray
    support: np.ndarray | None = None
    x_true: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.A.ndim != 2 or self.A.shape[0] != self.b.shape[0]:
            raise ValueError(f"inconsistent shapes A{self.A.shape}, b{self.b.shape}")
        if not (np.isfinite(self.A).all() and np.isfinite(self.b).all()):
            raise ValueError("dataset contains non-finite entries")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


def generate(spec: SimSpec) -> Dataset:
    """Draw ``A`` iid N(0, 1) and ``b = A x_t + eps``.

    The support of ``x_t`` is the first ``n0`` entries of a seeded permutation
    and its nonzeros all equal ``x_star``. The noise standard deviation is set
    from the sample variance of the realized signal, so
    ``var(A x_t) / s_eps^2 == snr`` exactly for every draw.
    """
    if spec.n0 == 0:
        raise ValueError("n0 = 0 gives a zero signal; the snr calibration is undefined")
    rng = np.random.default_rng(spec.seed)
    A = rng.standard_normal((spec.m, spec.n))
    support = np.sort(rng.permutation(spec.n)[: spec.n0])
    x_true = np.zeros(spec.n)
    x_true[support] = spec.x_star
    signal = A[:, support].sum(axis=1) * spec.x_star
    s_eps = math.sqrt(signal.var(ddof=1) / spec.snr)
    b = signal + s_eps * rng.standard_normal(spec.m)
    prov = {"generator": "gaussian", "m": spec.m, "n": spec.n, "n0": spec.n0,
            "x_star": spec.x_star, "snr": spec.snr, "seed": spec.seed, "noise_sd": s_eps}
    return Dataset(A, b, support, x_true, prov)


def realized_snr(ds: Dataset) -> float:
    if ds.x_true is None:
        raise ValueError("dataset carries no ground truth")
    signal = ds.A @ ds.x_true
    return float(signal.var(ddof=1) / (ds.b - signal).var(ddof=1))


def read_libsvm(path, n_features: int | None = None) -> Dataset:
    """Parse ``label idx:val ...`` lines (1-based, strictly ascending indices)."""
    labels, rows = [], []
    width = 0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                label = float(parts[0])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad label {parts[0]!r}") from None
            idx, val = [], []
            last = 0
            for tok in parts[1:]:
                try:
                    k, v = tok.split(":")
                    k, v = int(k), float(v)
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: malformed feature {tok!r}") from None
                if k < 1:
                    raise ValueError(f"{path}:{lineno}: feature index must be >= 1, got {k}")
                if k == last:
                    raise ValueError(f"{path}:{lineno}: duplicate feature index {k}")
                if k < last:
                    raise ValueError(f"{path}:{lineno}: feature indices not ascending ({last} then {k})")
                last = k
                idx.append(k - 1)
                val.append(v)
            labels.append(label)
            rows.append((idx, val))
            width = max(width, last)
    if n_features is not None:
        if width > n_features:
            raise ValueError(f"file uses feature {width} but n_features={n_features}")
        width = n_features
    A = np.zeros((len(rows), width))
    for i, (idx, val) in enumerate(rows):
        A[i, idx] = val
    return Dataset(A, np.array(labels), provenance={"source": str(path), "format": "libsvm"})


def read_csv(path, target_col: int = 0) -> Dataset:
    """Comma-separated numeric matrix; a non-numeric first row is taken as a header."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValueError(f"{path}: empty file")
    try:
        [float(v) for v in rows[0]]
    except ValueError:
        rows = rows[1:]
    try:
        M = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    if M.ndim != 2 or M.shape[1] < 2:
        raise ValueError(f"{path}: need a response column and at least one feature")
    b = M[:, target_col]
    A = np.delete(M, target_col, axis=1)
    return Dataset(A, b, provenance={"source": str(path), "format": "csv", "target_col": target_col})


def poly_n_columns(p: int, degree: int) -> int:
    """Number of monomials of total degree 1..degree in p variables."""
    return math.comb(p + degree, degree) - 1


def poly_exponents(p: int, degree: int):
    """Monomials as index tuples, graded then lexicographic: for p=2, d=2 -> (0,), (1,), (0,0), (0,1), (1,1)."""
    for k in range(1, degree + 1):
        yield from itertools.combinations_with_replacement(range(p), k)


def poly_expand(A, degree: int, max_columns: int = 5_000_000, block: int = 4096) -> np.ndarray:
    """All monomials of total degree 1..``degree`` of the columns of ``A``.

    Raises ``ValueError`` before allocating when the expansion would exceed
    ``max_columns`` columns.
    """
    A = np.asarray(A, dtype=float)
    if degree < 1:
        raise ValueError("degree must be >= 1")
    m, p = A.shape
    ncol = poly_n_columns(p, degree)
    if ncol > max_columns:
        raise ValueError(f"expansion to degree {degree} gives {ncol} columns (> max_columns={max_columns})")
    out = np.empty((m, ncol))
    terms = poly_exponents(p, degree)
    start = 0
    while start < ncol:
        chunk = list(itertools.islice(terms, block))
        for off, mono in enumerate(chunk):
            col = out[:, start + off]
            col[:] = A[:, mono[0]]
            for k in mono[1:]:
                col *= A[:, k]
        start += len(chunk)
    return out


def standardize(ds: Dataset, *, drop_tol: float = 1e-12) -> tuple[Problem, dict]:
    """Center and scale columns to unit standard deviation (divisor m) and center ``b``.

    Columns whose standard deviation is at most ``drop_tol`` are dropped with
    a warning; ``Problem.columns`` maps kept columns to raw indices.
    """
    A = ds.A
    means = A.mean(axis=0)
    scales = A.std(axis=0)
    keep = np.flatnonzero(scales > drop_tol * np.maximum(1.0, np.abs(means)))
    dropped = np.setdiff1d(np.arange(A.shape[1]), keep)
    if dropped.size:
        warnings.warn(f"dropping {dropped.size} constant column(s): {dropped[:10].tolist()}"
                      + (" ..." if dropped.size > 10 else ""), stacklevel=2)
    if keep.size == 0:
        raise ValueError("every column is constant")
    if dropped.size:
        Z = A[:, keep]
        means, scales = means[keep], scales[keep]
        Z -= means
    else:
        Z = A - means
    Z /= scales
    b_mean = float(ds.b.mean())
    prob = Problem(Z, ds.b - b_mean, col_means=means, col_scales=scales, b_mean=b_mean,
                   columns=keep, n_raw_features=A.shape[1])
    meta = {"dropped_columns": dropped.tolist(), "b_mean": b_mean, "n_raw_features": int(A.shape[1])}
    return prob, meta


def to_raw_coefficients(prob: Problem, x) -> tuple[np.ndarray, float]:
    """Map standardized-scale coefficients to raw-scale ``(coef, intercept)``."""
    x = np.asarray(x, dtype=float)
    coef = np.zeros(prob.n_raw_features)
    coef[prob.columns] = x / prob.col_scales
    intercept = prob.b_mean - float(prob.col_means @ (x / prob.col_scales))
    return coef, intercept


def rho_hat(data, rtol: float = 1e-6, max_iter: int = 5000, seed: int = 0) -> float:
    """``lambda_max(A A^T) / n`` via power iteration on ``v -> A (A^T v)``."""
    A = data.A if hasattr(data, "A") else np.asarray(data, dtype=float)
    m, n = A.shape
    if m == 0 or n == 0:
        raise ValueError("empty design")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(m)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        u = A @ (A.T @ v)
        lam = float(v @ u)  # Rayleigh quotient
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return 0.0
        v = u / nu
        if abs(lam - est) <= rtol * abs(lam):
            return lam / n
        est = lam
    logger.warning("rho_hat power iteration hit max_iter=%d", max_iter)
    return est / n
