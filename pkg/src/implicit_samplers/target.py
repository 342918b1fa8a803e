"""Target densities p(x) ~ exp(-G(x)) and the Gaussian anchor at their mode."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_triangular

Array = np.ndarray


@dataclass(frozen=True)
class TargetDensity:
    """Working potential G = F/eps of a target density.

    The noise parameter is already folded into ``potential``; samplers never
    see ``epsilon`` directly, it is metadata for reporting and predictions.
    """

    dim: int
    epsilon: float
    potential: Callable[[Array], float]
    gradient: Optional[Callable[[Array], Array]] = None
    hessian: Optional[Callable[[Array], Array]] = None
    name: str = "target"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dimension must be positive, got {self.dim}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")


def _check_point(dim: int, x) -> Array:
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise ValueError(f"expected a point of shape ({dim},), got {x.shape}")
    return x


def eval_potential(t: TargetDensity, x) -> float:
    x = _check_point(t.dim, x)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite evaluation point")
    return float(t.potential(x))


def eval_gradient(t: TargetDensity, x) -> Array:
    """Analytic gradient when the target has one, central differences otherwise."""
    x = _check_point(t.dim, x)
    if t.gradient is not None:
        return np.asarray(t.gradient(x), dtype=float)
    from .optimize import fd_gradient

    return fd_gradient(t, x)


@dataclass(frozen=True)
class ModeInfo:
    """Minimizer, minimum value, Hessian and its Cholesky factor."""

    x_star: Array
    g_star: float
    hessian: Array
    chol: Array
    # L^{-T}, cached so unwhitening is a matvec
    chol_inv_t: Array = field(repr=False)
    iterations: int = 0

    @property
    def dim(self) -> int:
        return self.x_star.shape[0]

    @classmethod
    def from_hessian(cls, x_star, g_star: float, hessian, iterations: int = 0) -> "ModeInfo":
        x_star = np.array(x_star, dtype=float).reshape(-1)
        hessian = np.array(hessian, dtype=float, ndmin=2)
        d = x_star.shape[0]
        if hessian.shape != (d, d):
            raise ValueError(f"Hessian shape {hessian.shape} does not match dimension {d}")
        scale = max(np.max(np.abs(hessian)), np.finfo(float).tiny)
        if np.max(np.abs(hessian - hessian.T)) > 1e-8 * scale:
            raise ValueError("Hessian is not symmetric")
        hessian = 0.5 * (hessian + hessian.T)
        try:
            chol = np.linalg.cholesky(hessian)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError("Hessian is not positive definite at the mode") from exc
        chol_inv_t = solve_triangular(chol, np.eye(d), lower=True).T
        for a in (x_star, hessian, chol, chol_inv_t):
            a.setflags(write=False)
        return cls(x_star, float(g_star), hessian, chol, chol_inv_t, iterations)


def centered_quadratic(m: ModeInfo, x) -> float:
    """Exponent 1/2 (x - x*)^T H (x - x*) of the Gaussian approximation."""
    dx = _check_point(m.dim, x) - m.x_star
    # via L^T dx so the value is exactly the squared norm of the whitened point
    eta = m.chol.T @ dx
    return 0.5 * float(eta @ eta)


def quadratic_target(hessian, center=None, offset: float = 0.0, name: str = "quadratic") -> TargetDensity:
    """Gaussian target G(x) = offset + 1/2 (x-a)^T A (x-a) with analytic derivatives."""
    A = np.array(hessian, dtype=float, ndmin=2)
    d = A.shape[0]
    a = np.zeros(d) if center is None else np.asarray(center, dtype=float)

    def potential(x):
        r = x - a
        return offset + 0.5 * float(r @ A @ r)

    def gradient(x):
        return A @ (x - a)

    def hessian_fn(x):
        return A.copy()

    return TargetDensity(d, 1.0, potential, gradient, hessian_fn, name)
