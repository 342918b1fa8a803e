"""Small-noise predictions of the quality measure Q.

Moments are of the cubic and quartic Taylor terms C3, C4 of the whitened
potential, taken under xi ~ N(0, I). For targets whose potential already has
eps folded in (all problems here), moments carry their eps powers and the
predictors are called with ``eps=1``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .gaussian import RngStream, poly_pow, polynomial_expectation, sample_standard_normal
from .quality import JACKKNIFE_BATCHES
from .target import ModeInfo, TargetDensity

log = logging.getLogger(__name__)

# 7-point central stencils on s = -3h..3h, both O(h^4)
_D3 = np.array([1 / 8, -1, 13 / 8, 0, -13 / 8, 1, -1 / 8])
_D4 = np.array([-1 / 6, 2, -13 / 2, 28 / 3, -13 / 2, 2, -1 / 6])
_OFFSETS = np.arange(-3, 4)
# stencil step in whitened units of eps^(-1/2), where nonlinearity sets in
RAY_STEP = 0.1
RICHARDSON_WARN = 0.01

MOMENT_FIELDS = ("e_c3sq", "e_c4", "var_c4_minus_half_c3sq", "e_c3_4", "e_c3sq_c4", "e_c4sq")


@dataclass(frozen=True)
class TaylorMoments:
    e_c3sq: float
    e_c4: float
    var_c4_minus_half_c3sq: float
    e_c3_4: float
    e_c3sq_c4: float
    e_c4sq: float
    n_used: int = 0
    se: dict = field(default_factory=dict)

    @classmethod
    def from_raw(cls, e_c3sq, e_c4, e_c3_4, e_c3sq_c4, e_c4sq, n_used=0, se=None):
        """Fill in var(C4 - C3^2/2) from the raw moments."""
        second = e_c4sq - e_c3sq_c4 + 0.25 * e_c3_4
        var = second - (e_c4 - 0.5 * e_c3sq) ** 2
        return cls(e_c3sq, e_c4, var, e_c3_4, e_c3sq_c4, e_c4sq, n_used, dict(se or {}))


def _ray_derivatives(t: TargetDensity, m: ModeInfo, x_w: np.ndarray, h: float) -> tuple[float, float]:
    v = m.chol_inv_t @ x_w
    g = np.array([float(t.potential(m.x_star + (k * h) * v)) - m.g_star for k in _OFFSETS])
    if not np.all(np.isfinite(g)):
        raise ValueError("non-finite potential on the Taylor probe")
    return float(_D3 @ g) / h**3, float(_D4 @ g) / h**4


def taylor_ray_coefficients(t: TargetDensity, m: ModeInfo, x) -> tuple[float, float]:
    """(C3(x), C4(x)): cubic and quartic coefficients of s -> phi(s x_w), x_w = L^T (x - x*)."""
    x_w = m.chol.T @ (np.asarray(x, dtype=float) - m.x_star)
    c3, c4, stable = _coefficients_whitened(t, m, x_w)
    if not stable:
        log.warning("quartic ray coefficient moved by more than %g under step halving", RICHARDSON_WARN)
    return c3, c4


def _coefficients_whitened(t, m, x_w) -> tuple[float, float, bool]:
    r = float(np.linalg.norm(x_w))
    if r == 0.0:
        return 0.0, 0.0, True
    scale = 1.0 / math.sqrt(t.epsilon) if t.epsilon > 0 else 1.0
    h = RAY_STEP * scale / r
    d3, d4 = _ray_derivatives(t, m, x_w, h)
    d3h, d4h = _ray_derivatives(t, m, x_w, 0.5 * h)
    # Richardson on the O(h^4) error
    d3r = d3h + (d3h - d3) / 15
    d4r = d4h + (d4h - d4) / 15
    stable = abs(d4r - d4) <= RICHARDSON_WARN * abs(d4r) or abs(d4r - d4) <= 1e-12
    return d3r / 6.0, d4r / 24.0, stable


def _jackknife_se(samples: np.ndarray, stat, n_batches: int = JACKKNIFE_BATCHES) -> float:
    n = samples.shape[0]
    nb = min(n_batches, n)
    edges = np.linspace(0, n, nb + 1).astype(int)
    sums = np.add.reduceat(samples, edges[:-1], axis=0)
    total = sums.sum(axis=0)
    counts = np.diff(edges)
    vals = np.array([stat((total - sums[b]) / (n - counts[b])) for b in range(nb)])
    return float(np.sqrt((nb - 1) / nb * np.sum((vals - vals.mean()) ** 2)))


def _moments_from_means(mu) -> TaylorMoments:
    e_c3sq, e_c4, e_c3_4, e_c3sq_c4, e_c4sq = mu
    return TaylorMoments.from_raw(e_c3sq, e_c4, e_c3_4, e_c3sq_c4, e_c4sq)


def estimate_taylor_moments(t: TargetDensity, m: ModeInfo, n: int, seed: int) -> TaylorMoments:
    """Monte Carlo moments of C3(xi), C4(xi) with xi ~ N(0, I), sample k on stream k."""
    if n < 100:
        raise ValueError("need at least 100 samples")
    c3 = np.empty(n)
    c4 = np.empty(n)
    unstable = 0
    for k in range(n):
        xi = sample_standard_normal(RngStream(seed, k), t.dim)
        c3[k], c4[k], stable = _coefficients_whitened(t, m, xi)
        unstable += not stable
    if unstable:
        log.warning(
            "quartic ray coefficient moved by more than %g under step halving at %d of %d points",
            RICHARDSON_WARN, unstable, n,
        )
    c3sq = c3 * c3
    table = np.column_stack([c3sq, c4, c3sq * c3sq, c3sq * c4, c4 * c4])
    mom = _moments_from_means(table.mean(axis=0))
    se = {}
    for name in MOMENT_FIELDS:
        se[name] = _jackknife_se(table, lambda mu, name=name: getattr(_moments_from_means(mu), name))
    return TaylorMoments(
        mom.e_c3sq, mom.e_c4, mom.var_c4_minus_half_c3sq, mom.e_c3_4, mom.e_c3sq_c4, mom.e_c4sq, n, se
    )


def random_map_factor(d: int) -> float:
    """(1+d)^2 / ((2+d)(4+d)): ratio of simple random-map to linear-map error constants."""
    return (1 + d) ** 2 / ((2 + d) * (4 + d))


def symmetrized_random_terms(d: int, mom: TaylorMoments) -> tuple[float, float, float]:
    """Exact terms (I, II, III) with var(a X - b Y) = I - 2 II + III.

    X = C3^2/|xi|^4 scaled by (d+2)(d+4)/2 and Y = C4/|xi|^2 scaled by d+2;
    the radial denominators are removed with the Gaussian integral identity.
    """
    e3, e4 = mom.e_c3sq, mom.e_c4
    term1 = (d + 2) ** 2 * (d + 4) ** 2 / (4 * (d + 4) * (d + 6) * (d + 8) * (d + 10)) * mom.e_c3_4 - (0.5 * e3) ** 2
    term2 = (d + 2) ** 2 * (d + 4) / (2 * (d + 4) * (d + 6) * (d + 8)) * mom.e_c3sq_c4 - 0.5 * e3 * e4
    term3 = (d + 2) ** 2 / ((d + 4) * (d + 6)) * mom.e_c4sq - e4**2
    return term1, term2, term3


def predict_q_symmetrized_random(d: int, eps: float, mom: TaylorMoments) -> float:
    if d < 1:
        raise ValueError("dimension must be positive")
    i, ii, iii = symmetrized_random_terms(d, mom)
    return eps**2 * (i - 2 * ii + iii)


def predict_q(method: str, d: int, eps: float, mom: TaylorMoments) -> float:
    """Leading-order Q for ``method`` given Taylor moments."""
    if method == "lm":
        return eps * mom.e_c3sq
    if method == "rm":
        return eps * random_map_factor(d) * mom.e_c3sq
    if method == "slm":
        return eps**2 * mom.var_c4_minus_half_c3sq
    if method == "srm":
        return predict_q_symmetrized_random(d, eps, mom)
    raise ValueError(f"unknown method {method!r}")


# --- nonlinear random walk ------------------------------------------------


def randomwalk_closed_form(method: str, n_dim: int, alpha: float, eps: float) -> float:
    """Closed-form leading Q for the random walk: lm, rm, and the O(N^2) part for slm."""
    N = n_dim
    if method == "lm":
        return 15 * alpha**2 * N * eps
    if method == "rm":
        return 15 * alpha**2 * eps * N * (N + 1) ** 2 / ((N + 2) * (N + 4))
    if method in ("slm", "slm-leading"):
        return 225 * alpha**4 * N**2 / 2 * eps**2
    raise ValueError(f"no closed form for method {method!r}")


def randomwalk_exact_moments(n_dim: int, alpha: float = 1.0, beta: float = 1.0, eps: float = 1.0) -> TaylorMoments:
    """Exact moments from iid standard normal increments Z_k.

    C3 = sqrt(eps) alpha sum Z^3 and C4 = eps beta sum Z^4; uses
    E Z^4 = 3, Z^6 = 15, Z^8 = 105, Z^10 = 945, Z^12 = 10395.
    """
    N = n_dim
    pairs = N * (N - 1)
    e_c3sq = eps * alpha**2 * 15 * N
    e_c4 = eps * beta * 3 * N
    e_c4sq = eps**2 * beta**2 * (105 * N + 9 * pairs)
    e_c3sq_c4 = eps**2 * alpha**2 * beta * (945 * N + 45 * pairs)
    e_c3_4 = eps**2 * alpha**4 * (10395 * N + 3 * 225 * pairs)
    return TaylorMoments.from_raw(e_c3sq, e_c4, e_c3_4, e_c3sq_c4, e_c4sq)


def randomwalk_c3_polynomial(n_dim: int, alpha: float = 1.0, coords: str = "increments") -> dict:
    """C3 as {index tuple: coefficient}, in increment variables or in walk positions x_1..x_N."""
    poly: dict = {}
    for k in range(n_dim):
        if coords == "increments":
            term = {(k,) * 3: alpha}
        else:
            # (x_k - x_{k-1})^3, with x_{-1} the pinned zero
            inc = {(k,): 1.0} if k == 0 else {(k,): 1.0, (k - 1,): -1.0}
            term = {key: alpha * c for key, c in poly_pow(inc, 3).items()}
        for key, c in term.items():
            poly[key] = poly.get(key, 0.0) + c
    return poly


def randomwalk_wick_e_c3sq(n_dim: int, alpha: float = 1.0, coords: str = "increments") -> float:
    """E_pi(C3^2) by Wick's formula; positions use covariance H^{-1} of the Gaussian walk."""
    from .problems import second_difference_matrix

    c3 = randomwalk_c3_polynomial(n_dim, alpha, coords)
    cov = np.eye(n_dim) if coords == "increments" else np.linalg.inv(second_difference_matrix(n_dim))
    return polynomial_expectation(poly_pow(c3, 2), cov)


def slm_leading_relative_correction(n_dim: int) -> float:
    """Exact var(C4 - C3^2/2) over its N^2 leading term, minus one (alpha = beta = 1)."""
    exact = randomwalk_exact_moments(n_dim).var_c4_minus_half_c3sq
    return exact / (225 * n_dim**2 / 2) - 1.0

