"""Linear-map and random-map implicit samplers, simple and symmetrized.

All four methods work along the ray x* + s v with v = L^{-T} xi, where
H = L L^T is the Hessian at the mode. In whitened coordinates the potential
phi(eta) = G(x* + L^{-T} eta) - G(x*) has identity Hessian at the origin and
phi(s xi) is what the stretch equation is solved for.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .gaussian import RngStream, sample_standard_normal, selection_uniform
from .optimize import fd_gradient
from .target import ModeInfo, TargetDensity

METHODS = ("lm", "slm", "rm", "srm")
_EPS = np.finfo(float).eps
_LOG2 = math.log(2.0)


class SamplerError(RuntimeError):
    pass


class LambdaSolveError(SamplerError):
    """The stretch equation has no usable root along this ray.

    ``kind`` is ``"no_bracket"`` when phi never reaches the target level (the
    level set is not star-shaped along the ray) and ``"non_monotone"`` when phi
    is not increasing across the bracket (more than one crossing).
    """

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


@dataclass(frozen=True)
class WeightedSample:
    x: np.ndarray
    log_weight: float
    xi: np.ndarray
    lambda_plus: Optional[float] = None
    lambda_minus: Optional[float] = None
    chose_minus: bool = False


@dataclass(frozen=True)
class LambdaOptions:
    rel_tol: float = 1e-12
    max_iters: int = 100
    bracket_growth: float = 2.0
    initial_guess: float = 1.0

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-6:
            raise ValueError("rel_tol must lie in (0, 1e-6]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not self.bracket_growth > 1:
            raise ValueError("bracket_growth must exceed 1")
        if not self.initial_guess > 0:
            raise ValueError("initial_guess must be positive")


def stable_log_mean(l_plus: float, l_minus: float) -> float:
    """log((e^l+ + e^l-)/2) without overflow."""
    hi, lo = (l_plus, l_minus) if l_plus >= l_minus else (l_minus, l_plus)
    if hi == -math.inf:
        raise SamplerError("both weights underflow to zero")
    return hi + math.log1p(math.exp(lo - hi)) - _LOG2


def _plus_probability(l_plus: float, l_minus: float) -> float:
    # w+/(w+ + w-) as a logistic function of the log-weight difference
    z = l_plus - l_minus
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


class _Ray:
    """phi restricted to the ray s -> s xi, i.e. G(x* + s v) - g*."""

    def __init__(self, t: TargetDensity, m: ModeInfo, xi: np.ndarray):
        self.t = t
        self.m = m
        self.xi = xi
        self.v = m.chol_inv_t @ xi

    def point(self, s: float) -> np.ndarray:
        return self.m.x_star + s * self.v

    def phi(self, s: float) -> float:
        return float(self.t.potential(self.point(s))) - self.m.g_star

    def slope(self, s: float) -> float:
        """d/ds phi(s xi) = xi^T grad phi(s xi), used for Newton steps."""
        if self.t.gradient is not None:
            return float(self.v @ self.t.gradient(self.point(s)))
        h = _EPS ** (1 / 3) * max(1.0, abs(s))
        return (self.phi(s + h) - self.phi(s - h)) / (2 * h)

    def weight_slope(self, s: float) -> float:
        """xi^T grad phi(s xi) for the random-map weight; full gradient by differences if needed."""
        if self.t.gradient is not None:
            return float(self.v @ self.t.gradient(self.point(s)))
        return float(self.v @ fd_gradient(self.t, self.point(s)))


def _solve_on_ray(ray: _Ray, opts: LambdaOptions) -> float:
    c = 0.5 * float(ray.xi @ ray.xi)
    if c == 0.0:
        raise ValueError("stretch factor undefined for xi = 0")

    def f(s):
        val = ray.phi(s) - c
        if not math.isfinite(val):
            raise LambdaSolveError("no_bracket", f"non-finite potential at stretch {s:g}")
        return val

    growth = opts.bracket_growth
    lam = opts.initial_guess
    f_lam = f(lam)
    if f_lam < 0:
        lo, f_lo = lam, f_lam
        hi = lam * growth
        for _ in range(opts.max_iters):
            f_hi = f(hi)
            if f_hi >= 0:
                break
            lo, f_lo = hi, f_hi
            hi *= growth
        else:
            raise LambdaSolveError(
                "no_bracket",
                f"potential stays below level {c:g} up to stretch {hi / growth:g}",
            )
    else:
        hi, f_hi = lam, f_lam
        lo = lam / growth
        for _ in range(opts.max_iters):
            f_lo = f(lo)
            if f_lo < 0:
                break
            hi, f_hi = lo, f_lo
            lo /= growth
        else:
            lo, f_lo = 0.0, -c

    # the accepted bracket is [0, hi]; phi(0) = 0 at the mode
    grid = np.linspace(0.0, hi, 8)
    vals = [-c] + [f(s) for s in grid[1:-1]] + [f_hi]
    if not np.all(np.diff(vals) > 0):
        raise LambdaSolveError(
            "non_monotone", f"potential is not increasing on [0, {hi:g}] along this ray"
        )

    tol = opts.rel_tol * c
    if abs(f_lam) <= tol:
        return lam
    x = lam if lo < lam < hi else 0.5 * (lo + hi)
    fx = f_lam if x == lam else f(x)
    step_old = hi - lo
    for _ in range(opts.max_iters):
        if abs(fx) <= tol:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        if hi - lo <= 4 * _EPS * hi:
            return x
        dfx = ray.slope(x)
        x_new = x - fx / dfx if dfx > 0 else math.nan
        # Newton only while it stays inside the bracket and keeps contracting
        if not (lo < x_new < hi) or abs(x_new - x) > 0.5 * step_old:
            x_new = 0.5 * (lo + hi)
        step_old = abs(x_new - x)
        if x_new == x:
            return x
        x = x_new
        fx = f(x)
    raise LambdaSolveError("no_bracket", f"stretch solve did not converge in {opts.max_iters} iterations")


def solve_lambda(t: TargetDensity, m: ModeInfo, xi, opts: Optional[LambdaOptions] = None) -> float:
    """Positive root of phi(lambda xi) = |xi|^2 / 2."""
    return _solve_on_ray(_Ray(t, m, np.asarray(xi, dtype=float)), opts or LambdaOptions())


# --- per-draw kernels (xi given) -----------------------------------------


def _linear_log_weight(t: TargetDensity, m: ModeInfo, x: np.ndarray, half_sq: float) -> float:
    g = float(t.potential(x))
    if not math.isfinite(g):
        raise SamplerError(f"non-finite potential at {x}")
    return -(g - m.g_star) + half_sq


def linear_map_from_xi(t, m, xi) -> WeightedSample:
    v = m.chol_inv_t @ xi
    x = m.x_star + v
    return WeightedSample(x, _linear_log_weight(t, m, x, 0.5 * float(xi @ xi)), xi)


def symmetrized_linear_map_from_xi(t, m, xi, u: float) -> WeightedSample:
    v = m.chol_inv_t @ xi
    half_sq = 0.5 * float(xi @ xi)
    x_plus = m.x_star + v
    x_minus = m.x_star - v
    l_plus = _linear_log_weight(t, m, x_plus, half_sq)
    l_minus = _linear_log_weight(t, m, x_minus, half_sq)
    log_w = stable_log_mean(l_plus, l_minus)
    minus = u >= _plus_probability(l_plus, l_minus)
    return WeightedSample(x_minus if minus else x_plus, log_w, xi, chose_minus=minus)


def _random_map_side(t, m, xi, opts: LambdaOptions):
    ray = _Ray(t, m, xi)
    lam = _solve_on_ray(ray, opts)
    den = ray.weight_slope(lam)
    if not den > 0:
        raise SamplerError(f"level set crossed non-transversally (xi^T grad phi = {den:g})")
    sq = float(xi @ xi)
    log_w = (t.dim - 1) * math.log(lam) + math.log(sq) - math.log(den)
    return ray.point(lam), log_w, lam


def random_map_from_xi(t, m, xi, opts: Optional[LambdaOptions] = None) -> WeightedSample:
    x, log_w, lam = _random_map_side(t, m, xi, opts or LambdaOptions())
    return WeightedSample(x, log_w, xi, lambda_plus=lam)


def symmetrized_random_map_from_xi(t, m, xi, u: float, opts: Optional[LambdaOptions] = None) -> WeightedSample:
    opts = opts or LambdaOptions()
    x_plus, l_plus, lam_plus = _random_map_side(t, m, xi, opts)
    seeded = LambdaOptions(opts.rel_tol, opts.max_iters, opts.bracket_growth, lam_plus)
    x_minus, l_minus, lam_minus = _random_map_side(t, m, -xi, seeded)
    log_w = stable_log_mean(l_plus, l_minus)
    minus = u >= _plus_probability(l_plus, l_minus)
    return WeightedSample(
        x_minus if minus else x_plus, log_w, xi, lambda_plus=lam_plus, lambda_minus=lam_minus, chose_minus=minus
    )


def sample_from_xi(method: str, t, m, xi, u: float = 0.5, lambda_opts: Optional[LambdaOptions] = None):
    xi = np.asarray(xi, dtype=float)
    if method == "lm":
        return linear_map_from_xi(t, m, xi)
    if method == "slm":
        return symmetrized_linear_map_from_xi(t, m, xi, u)
    if method == "rm":
        return random_map_from_xi(t, m, xi, lambda_opts)
    if method == "srm":
        return symmetrized_random_map_from_xi(t, m, xi, u, lambda_opts)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


# --- stream-driven samplers ------------------------------------------------


def linear_map_sample(t: TargetDensity, m: ModeInfo, rng: RngStream) -> WeightedSample:
    return linear_map_from_xi(t, m, sample_standard_normal(rng, t.dim))


def symmetrized_linear_map_sample(t: TargetDensity, m: ModeInfo, rng: RngStream) -> WeightedSample:
    return symmetrized_linear_map_from_xi(
        t, m, sample_standard_normal(rng, t.dim), selection_uniform(rng, t.dim)
    )


def random_map_sample(t: TargetDensity, m: ModeInfo, rng: RngStream, lambda_opts=None) -> WeightedSample:
    return random_map_from_xi(t, m, sample_standard_normal(rng, t.dim), lambda_opts)


def symmetrized_random_map_sample(t: TargetDensity, m: ModeInfo, rng: RngStream, lambda_opts=None) -> WeightedSample:
    return symmetrized_random_map_from_xi(
        t, m, sample_standard_normal(rng, t.dim), selection_uniform(rng, t.dim), lambda_opts
    )


SAMPLERS: dict[str, Callable] = {
    "lm": lambda t, m, rng, opts: linear_map_sample(t, m, rng),
    "slm": lambda t, m, rng, opts: symmetrized_linear_map_sample(t, m, rng),
    "rm": random_map_sample,
    "srm": symmetrized_random_map_sample,
}


def draw_ensemble(
    method: str,
    t: TargetDensity,
    m: ModeInfo,
    n: int,
    seed: int,
    lambda_opts: Optional[LambdaOptions] = None,
    workers: int = 1,
) -> list[WeightedSample]:
    """``n`` independent weighted samples; sample k uses ``RngStream(seed, k)``.

    Output order is by stream id regardless of ``workers``.
    """
    if method not in SAMPLERS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if n < 1:
        raise ValueError("n must be at least 1")
    draw = SAMPLERS[method]

    def one(k: int) -> WeightedSample:
        try:
            return draw(t, m, RngStream(seed, k), lambda_opts)
        except (SamplerError, ValueError, ArithmeticError) as exc:
            raise SamplerError(f"{method} sample failed at stream_id={k}: {exc}") from exc

    if workers <= 1:
        return [one(k) for k in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(n)))


def log_weights(samples) -> np.ndarray:
    return np.array([s.log_weight for s in samples])
