"""Reference computations that do not go through the package's numerics.

Each oracle uses a different method than the code under test (closed forms,
scipy quadrature/integrators, brute-force Monte Carlo on the raw definition).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, optimize

LORENZ_MU0 = np.array([3.6314, 6.6136, 10.6044])


# --- 1D polynomial potentials ------------------------------------------------


def quartic_stretch_root(c4: float, xi: float) -> float:
    """Positive lambda with 1/2 (lambda xi)^2 + c4 (lambda xi)^4 = 1/2 xi^2, via the quadratic in s = (lambda xi)^2."""
    s = (-0.5 + math.sqrt(0.25 + 4 * c4 * 0.5 * xi * xi)) / (2 * c4)
    return math.sqrt(s) / abs(xi)


def quadrature_mean(potential, lo: float = -30.0, hi: float = 30.0) -> float:
    """E_p(X) for p proportional to exp(-potential) on the real line."""
    z = integrate.quad(lambda x: math.exp(-potential(x)), lo, hi, limit=200, points=[0.0])[0]
    m1 = integrate.quad(lambda x: x * math.exp(-potential(x)), lo, hi, limit=200, points=[0.0])[0]
    return m1 / z


# --- finite-difference reference ---------------------------------------------


def five_point_gradient(f, x, h: float = 1e-3) -> np.ndarray:
    """O(h^4) central-difference gradient."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h)
    return g


# --- Lorenz '63 with scipy ---------------------------------------------------


def lorenz_flow(x0, T: float, sigma=10.0, rho=28.0, beta=8.0 / 3.0) -> np.ndarray:
    def rhs(_, y):
        return [sigma * (y[1] - y[0]), y[0] * (rho - y[2]) - y[1], y[0] * y[1] - beta * y[2]]

    sol = integrate.solve_ivp(rhs, (0.0, T), np.asarray(x0, float), method="DOP853", rtol=1e-13, atol=1e-13)
    return sol.y[:, -1]


def lorenz_mode_grid_polish(data, T: float, eps: float, mu0=LORENZ_MU0, half_width: float = 1.0, n: int = 9):
    """Coarse grid around mu0, then Nelder-Mead from the best grid node."""

    def F(x):
        r = data - lorenz_flow(x, T)
        q = mu0 - x
        return 0.5 * (r @ r + q @ q) / eps

    axis = np.linspace(-half_width, half_width, n)
    best = min(
        (mu0 + np.array([a, b, c]) for a in axis for b in axis for c in axis),
        key=F,
    )
    res = optimize.minimize(F, best, method="Nelder-Mead", options={"xatol": 1e-9, "fatol": 1e-14, "maxiter": 20000})
    return res.x


# --- random walk --------------------------------------------------------------


def randomwalk_moment_mc(n_dim: int, n: int, seed: int, alpha=1.0, beta=1.0):
    """Monte Carlo E C3^2 and var(C4 - C3^2/2) from iid N(0,1) increments (unfolded)."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, n_dim))
    c3 = alpha * np.sum(z**3, axis=1)
    c4 = beta * np.sum(z**4, axis=1)
    y = c4 - 0.5 * c3**2
    return {
        "e_c3sq": float(np.mean(c3**2)),
        "e_c3sq_se": float(np.std(c3**2) / math.sqrt(n)),
        "var_y": float(np.var(y)),
        # delta-method SE of the sample variance
        "var_y_se": float(np.std((y - y.mean()) ** 2) / math.sqrt(n)),
    }


def double_factorial_odd(n: int) -> int:
    """(n-1)!! for even n: E Z^n of a standard normal."""
    out = 1
    for k in range(n - 1, 0, -2):
        out *= k
    return out
