"""Mode finding: BFGS with backtracking and finite-difference derivatives."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .target import ModeInfo, TargetDensity, eval_potential

log = logging.getLogger(__name__)

_EPS = np.finfo(float).eps
ARMIJO = 1e-4
BACKTRACK = 0.5
F_SLACK_ULPS = 16


class OptimizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizeOptions:
    initial_point: Optional[np.ndarray] = None
    grad_tol: float = 1e-8
    max_iters: int = 200
    # None selects the scaled defaults below
    fd_step_grad: Optional[float] = None
    fd_step_hess: Optional[float] = None

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        for h in (self.fd_step_grad, self.fd_step_hess):
            if h is not None and not h > 0:
                raise ValueError("finite-difference steps must be positive")


def _steps(x: np.ndarray, h: Optional[float], power: float) -> np.ndarray:
    if h is not None:
        if not h > 0:
            raise ValueError("finite-difference step must be positive")
        return np.full(x.shape, float(h))
    return _EPS**power * np.maximum(1.0, np.abs(x))


def _value(t: TargetDensity, x: np.ndarray) -> float:
    v = eval_potential(t, x)
    if not np.isfinite(v):
        raise OptimizationError(f"non-finite potential at {x}")
    return v


def fd_gradient(t: TargetDensity, x, h: Optional[float] = None) -> np.ndarray:
    """Central-difference gradient. ``h=None`` uses cbrt(eps)*max(1,|x_i|)."""
    x = np.asarray(x, dtype=float)
    steps = _steps(x, h, 1 / 3)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = steps[i]
        # the actually representable step
        hp = (x + e)[i] - x[i]
        hm = x[i] - (x - e)[i]
        g[i] = (_value(t, x + e) - _value(t, x - e)) / (hp + hm)
    return g


def fd_hessian(t: TargetDensity, x, h: Optional[float] = None) -> np.ndarray:
    """Symmetrized central second differences. ``h=None`` uses eps^(1/4)*max(1,|x_i|)."""
    x = np.asarray(x, dtype=float)
    d = x.size
    steps = _steps(x, h, 1 / 4)
    f0 = _value(t, x)
    H = np.empty((d, d))
    E = np.diag(steps)
    for i in range(d):
        ei = E[i]
        H[i, i] = (_value(t, x + ei) - 2 * f0 + _value(t, x - ei)) / steps[i] ** 2
        for j in range(i + 1, d):
            ej = E[j]
            fpp = _value(t, x + ei + ej)
            fpm = _value(t, x + ei - ej)
            fmp = _value(t, x - ei + ej)
            fmm = _value(t, x - ei - ej)
            H[i, j] = H[j, i] = (fpp - fpm - fmp + fmm) / (4 * steps[i] * steps[j])
    return 0.5 * (H + H.T)


def _gradient(t: TargetDensity, x: np.ndarray, h: Optional[float]) -> np.ndarray:
    if t.gradient is not None:
        return np.asarray(t.gradient(x), dtype=float)
    return fd_gradient(t, x, h)


def minimize(t: TargetDensity, opts: Optional[OptimizeOptions] = None) -> ModeInfo:
    """Find the mode of ``t`` and the Hessian there.

    Raises OptimizationError when the gradient tolerance is not met within
    ``max_iters`` iterations, and ``np.linalg.LinAlgError`` when the Hessian at
    the returned point is not positive definite.
    """
    opts = opts or OptimizeOptions()
    x = np.zeros(t.dim) if opts.initial_point is None else np.array(opts.initial_point, dtype=float)
    if x.shape != (t.dim,):
        raise ValueError(f"initial point has shape {x.shape}, expected ({t.dim},)")

    f = _value(t, x)
    g = _gradient(t, x, opts.fd_step_grad)
    B = np.eye(t.dim)  # inverse Hessian approximation
    first = True
    n_iter = 0
    while np.max(np.abs(g)) > opts.grad_tol:
        if n_iter >= opts.max_iters:
            raise OptimizationError(
                f"no convergence in {opts.max_iters} iterations (|grad|_inf = {np.max(np.abs(g)):.3e})"
            )
        n_iter += 1
        p = -B @ g
        slope = float(g @ p)
        if slope >= 0:
            B = np.eye(t.dim)
            p = -g
            slope = float(g @ p)
        alpha = 1.0
        while True:
            x_new = x + alpha * p
            f_new = eval_potential(t, x_new)
            # a few ulps of slack: near the mode the required decrease is below the resolution of f
            if np.isfinite(f_new) and f_new <= f + ARMIJO * alpha * slope + F_SLACK_ULPS * _EPS * abs(f):
                break
            alpha *= BACKTRACK
            if alpha * np.max(np.abs(p)) <= _EPS * max(1.0, np.max(np.abs(x))):
                raise OptimizationError(
                    f"line search stalled at |grad|_inf = {np.max(np.abs(g)):.3e} "
                    f"(tolerance {opts.grad_tol:.1e})"
                )
        g_new = _gradient(t, x_new, opts.fd_step_grad)
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > 0:
            if first:
                B = np.eye(t.dim) * (sy / float(y @ y))
                first = False
            rho = 1.0 / sy
            By = B @ y
            B = B + (rho * rho * float(y @ By) + rho) * np.outer(s, s) - rho * (np.outer(By, s) + np.outer(s, By))
        x, f, g = x_new, f_new, g_new

    log.debug("minimize: %d iterations, G* = %.6g", n_iter, f)
    if t.hessian is not None:
        H = np.asarray(t.hessian(x), dtype=float)
        H = 0.5 * (H + H.T)
    else:
        H = fd_hessian(t, x, opts.fd_step_hess)
    return ModeInfo.from_hessian(x, f, H, iterations=n_iter)
