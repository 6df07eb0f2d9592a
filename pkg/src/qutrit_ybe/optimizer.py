"""Trace infidelity between unitaries and a restarted BFGS minimiser."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize as scipy_minimize

log = logging.getLogger(__name__)

# Costs below this are reported as exactly zero.
ZERO_COST = 1e-15


def infidelity(w_left: np.ndarray, w_right: np.ndarray) -> float:
    """1 - |tr(W_L W_R^dag)|^2 / D^2, clamped into [0, 1]."""
    if w_left.shape != w_right.shape or w_left.shape[0] != w_left.shape[1]:
        raise ValueError(f"shape mismatch: {w_left.shape} vs {w_right.shape}")
    d = w_left.shape[0]
    # tr(A B^dag) = sum_ij A_ij conj(B_ij)
    overlap = np.vdot(w_right, w_left)
    c = 1.0 - abs(overlap) ** 2 / d**2
    return min(max(c, 0.0), 1.0)


def multi_step_infidelity(w_left: np.ndarray, w_right: np.ndarray, n_b: int) -> float:
    """Infidelity of W_L^n_b against W_R^n_b, normalised by D^2 for every n_b."""
    if n_b < 1:
        raise ValueError(f"n_b must be >= 1, got {n_b}")
    return infidelity(np.linalg.matrix_power(w_left, n_b), np.linalg.matrix_power(w_right, n_b))


def lower_bound(c1: float, n_b: int) -> float:
    """1 - (1 - C1)^n_b: the n_b-step infidelity floor when W_L W_R^dag is PSD."""
    if not 0.0 <= c1 <= 1.0:
        raise ValueError(f"C1 must lie in [0, 1], got {c1}")
    return 1.0 - (1.0 - c1) ** n_b


@dataclass
class OptimizerConfig:
    max_iterations: int = 400
    gradient_step: float = 1e-6
    convergence_tol: float = 1e-10
    restarts: int = 16
    perturbation_scale: float = 0.5
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_iterations <= 0 or self.gradient_step <= 0 or self.convergence_tol <= 0:
            raise ValueError("max_iterations, gradient_step and convergence_tol must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.perturbation_scale < 0:
            raise ValueError("perturbation_scale must be non-negative")

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizerConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown optimizer options: {sorted(unknown)}")
        return cls(**data)


@dataclass
class OptResult:
    best_params: np.ndarray
    best_infidelity: float
    iterations_used: int
    converged: bool
    restart_infidelities: list[float] = field(default_factory=list)
    messages: list[str] = field(default_factory=list)


def central_gradient(cost: Callable[[np.ndarray], float], x: np.ndarray, h: float) -> np.ndarray:
    g = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (cost(x + e) - cost(x - e)) / (2 * h)
    return g


def minimize(cost: Callable[[np.ndarray], float], init, cfg: OptimizerConfig | None = None) -> OptResult:
    """Minimise ``cost`` by BFGS from ``init`` plus ``cfg.restarts - 1`` perturbed starts.

    Restart 0 starts at ``init``; restart r >= 1 adds a uniform perturbation in
    [-perturbation_scale, perturbation_scale] per coordinate, drawn from a
    generator seeded with ``rng_seed``. A restart that ends on a line-search
    failure still contributes its last iterate.
    """
    cfg = cfg or OptimizerConfig()
    x0 = np.asarray(init, dtype=float)
    c0 = cost(x0)
    if not math.isfinite(c0) or not np.all(np.isfinite(x0)):
        raise ValueError(f"cost is not finite at the initial point (got {c0})")

    rng = np.random.default_rng(cfg.rng_seed)
    starts = [x0] + [
        x0 + rng.uniform(-cfg.perturbation_scale, cfg.perturbation_scale, size=x0.shape)
        for _ in range(cfg.restarts - 1)
    ]

    def jac(x):
        return central_gradient(cost, x, cfg.gradient_step)

    best_x, best_c, best_ok = x0, math.inf, False
    per_restart, messages = [], []
    iterations = 0
    for r, start in enumerate(starts):
        res = scipy_minimize(
            cost, start, jac=jac, method="BFGS",
            options={"maxiter": cfg.max_iterations, "gtol": cfg.convergence_tol},
        )
        iterations += int(res.nit)
        fun = float(res.fun)
        per_restart.append(fun)
        if not res.success:
            messages.append(f"restart {r}: {res.message}")
            log.debug("restart %d stopped early: %s", r, res.message)
        if fun < best_c:
            best_x, best_c, best_ok = np.array(res.x), fun, bool(res.success)
    return OptResult(best_x, best_c, iterations, best_ok, per_restart, messages)
