"""Benchmark targets: a nonlinear random walk and a Lorenz '63 initial-condition posterior."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Optional

import numpy as np

from .gaussian import RngStream, sample_standard_normal
from .ode import dopri45_lorenz
from .optimize import OptimizeOptions
from .target import TargetDensity, quadratic_target

DATA_STREAM = 1 << 63
LORENZ_MU0 = (3.6314, 6.6136, 10.6044)


# --- nonlinear random walk -------------------------------------------------


@dataclass(frozen=True)
class RandomWalkProblem:
    """Walk x_1..x_N tied at x_0 = 0 with cubic and quartic increment couplings.

    The potential is used in its scaled form, so epsilon enters only through
    the coefficients sqrt(eps)*alpha and eps*beta.
    """

    n_dim: int
    alpha: float = 1.0
    beta: float = 1.0
    epsilon: float = 1e-4

    def __post_init__(self):
        if self.n_dim < 1:
            raise ValueError("n_dim must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")


def _increments(x: np.ndarray) -> np.ndarray:
    d = x.copy()
    d[1:] -= x[:-1]
    return d


def randomwalk_target(p: RandomWalkProblem) -> TargetDensity:
    a3 = math.sqrt(p.epsilon) * p.alpha
    a4 = p.epsilon * p.beta
    n = p.n_dim

    def potential(x):
        d = _increments(x)
        d2 = d * d
        return float((d2 * (0.5 + a3 * d + a4 * d2)).sum())

    def gradient(x):
        d = _increments(x)
        # derivative of each increment term, then D^T
        s = d * (1.0 + d * (3 * a3 + 4 * a4 * d))
        g = s.copy()
        g[:-1] -= s[1:]
        return g

    def hessian(x):
        d = _increments(x)
        c = 1.0 + d * (6 * a3 + 12 * a4 * d)
        H = np.zeros((n, n))
        idx = np.arange(n)
        H[idx, idx] = c
        H[idx[:-1], idx[:-1]] += c[1:]
        H[idx[:-1], idx[1:]] = -c[1:]
        H[idx[1:], idx[:-1]] = -c[1:]
        return H

    return TargetDensity(n, p.epsilon, potential, gradient, hessian, f"random_walk(N={n})")


def second_difference_matrix(n: int) -> np.ndarray:
    """Hessian of 1/2 sum (x_{k+1} - x_k)^2 with x_0 = 0."""
    H = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    H[-1, -1] = 1.0
    return H


# --- Lorenz '63 --------------------------------------------------------------


@dataclass(frozen=True)
class Lorenz63Problem:
    T: float
    epsilon: float
    data: np.ndarray
    mu0: np.ndarray = field(default_factory=lambda: np.array(LORENZ_MU0))
    x0_true: Optional[np.ndarray] = None
    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0
    ode_rel_tol: float = 1e-10
    ode_abs_tol: float = 1e-12

    def __post_init__(self):
        if self.T < 0:
            raise ValueError("T must be nonnegative")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        object.__setattr__(self, "data", np.asarray(self.data, dtype=float))
        object.__setattr__(self, "mu0", np.asarray(self.mu0, dtype=float))


def integrate_lorenz(x0, p: Lorenz63Problem) -> np.ndarray:
    """State at time p.T starting from x0."""
    y, _ = dopri45_lorenz(x0, p.T, p.sigma, p.rho, p.beta, p.ode_rel_tol, p.ode_abs_tol)
    return y


def lorenz_target(p: Lorenz63Problem) -> TargetDensity:
    """G(x0) = [ |d - h(x0)|^2 + |mu0 - x0|^2 ] / (2 eps), no analytic gradient."""
    data, mu0, inv_eps = p.data, p.mu0, 1.0 / p.epsilon

    def potential(x0):
        r_obs = data - integrate_lorenz(x0, p)
        r_prior = mu0 - x0
        return 0.5 * inv_eps * (float(r_obs @ r_obs) + float(r_prior @ r_prior))

    return TargetDensity(3, p.epsilon, potential, name=f"lorenz63(T={p.T:g})")


def generate_lorenz_instance(eps: float, T: float, seed: int, **overrides) -> Lorenz63Problem:
    """Synthetic data d = h(x0_true) + v, v ~ N(0, eps I), x0_true = mu0 + sqrt(eps)/2 (1, -1, 1)."""
    if not (eps > 0 and T > 0):
        raise ValueError("eps and T must be positive")
    mu0 = np.array(LORENZ_MU0)
    x0_true = mu0 + 0.5 * math.sqrt(eps) * np.array([1.0, -1.0, 1.0])
    base = Lorenz63Problem(T=T, epsilon=eps, data=np.zeros(3), mu0=mu0, x0_true=x0_true, **overrides)
    noise = math.sqrt(eps) * sample_standard_normal(RngStream(seed, DATA_STREAM), 3)
    return replace(base, data=integrate_lorenz(x0_true, base) + noise)


def lorenz_optimize_options(p: Lorenz63Problem) -> OptimizeOptions:
    # G = F/eps, so its gradient noise from the ODE solve grows like 1/eps
    return OptimizeOptions(initial_point=p.mu0.copy(), grad_tol=max(1e-8, 1e-8 / p.epsilon))


# --- construction by name ------------------------------------------------


@dataclass(frozen=True)
class GaussianProblem:
    """Isotropic Gaussian test target; every sampler has constant weights on it."""

    n_dim: int = 3
    epsilon: float = 1.0


def build_problem(name: str, params: Mapping[str, Any], seed: int = 0):
    """Problem instance from a config name and parameters."""
    params = dict(params)
    if name == "random_walk":
        return RandomWalkProblem(**params)
    if name == "lorenz63":
        missing = {"epsilon", "T"} - set(params)
        if missing:
            raise ValueError(f"lorenz63 needs parameters {sorted(missing)}")
        eps = params.pop("epsilon")
        T = params.pop("T")
        return generate_lorenz_instance(eps, T, seed, **params)
    if name == "quadratic":
        return GaussianProblem(**params)
    raise ValueError(f"unknown problem {name!r}")


def problem_target(problem) -> TargetDensity:
    if isinstance(problem, RandomWalkProblem):
        return randomwalk_target(problem)
    if isinstance(problem, Lorenz63Problem):
        return lorenz_target(problem)
    if isinstance(problem, GaussianProblem):
        return quadratic_target(np.eye(problem.n_dim) / problem.epsilon, name=f"quadratic(d={problem.n_dim})")
    raise TypeError(f"not a problem: {problem!r}")


def problem_optimize_options(problem) -> OptimizeOptions:
    if isinstance(problem, Lorenz63Problem):
        return lorenz_optimize_options(problem)
    return OptimizeOptions()
