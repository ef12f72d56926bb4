from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass
class SolverConfig:
    """Tuning knobs of the augmented Lagrangian / semi-smooth Newton solver.

    Defaults follow the experimental protocol used for the published timings:
    tolerance 1e-6, ``sigma0 = 5e-3`` grown by a factor 5 per outer
    iteration, Armijo constant 0.2.
    """

    outer_tol: float = 1e-6
    inner_tol_factor: float = 0.1
    sigma0: float = 5e-3
    sigma_factor: float = 5.0
    sigma_max: float = 1e8
    mu: float = 0.2
    max_outer: int = 100
    max_inner: int = 100
    max_backtracks: int = 50
    cg_threshold: int = 10_000
    cg_rtol_max: float = 0.1
    strategy: str = "auto"  # auto | cholesky_m | smw_r | cg
    loss_scale: str = "unit"  # unit | per_observation
    # kept for run snapshots; the solver draws no random numbers
    seed: int | None = None

    def __post_init__(self):
        if not self.outer_tol > 0:
            raise ValueError("outer_tol must be positive")
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")
        if not self.sigma_factor > 1:
            raise ValueError("sigma_factor must exceed 1")
        if not 0 < self.mu < 0.5:
            raise ValueError("mu must lie in (0, 1/2)")
        if self.strategy not in ("auto", "cholesky_m", "smw_r", "cg"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.loss_scale not in ("unit", "per_observation"):
            raise ValueError(f"unknown loss_scale {self.loss_scale!r}")

    def to_dict(self) -> dict:
        return asdict(self)
