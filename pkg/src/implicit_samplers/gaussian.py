"""Reproducible Gaussian draws, whitening, and exact Gaussian moments.

Random numbers come from a counter-based generator (Philox) keyed by
``(seed, stream_id)``: draw ``k`` of a stream is a pure function of the key and
``k``, so any parallel schedule over stream ids reproduces the same numbers.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import ndtri

from .target import ModeInfo

MAX_WICK_DEGREE = 16
_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def raw(self, n: int) -> np.ndarray:
        """First ``n`` 64-bit draws of the stream."""
        bg = np.random.Philox(key=[self.seed & _U64, self.stream_id & _U64])
        return bg.random_raw(n)

    def uniforms(self, n: int, offset: int = 0) -> np.ndarray:
        """Uniforms in (0, 1) from draws ``offset .. offset+n-1`` (53-bit, never 0 or 1)."""
        bits = self.raw(offset + n)[offset:] >> np.uint64(11)
        return (bits.astype(float) + 0.5) * 2.0**-53


def sample_standard_normal(rng: RngStream, d: int) -> np.ndarray:
    """``d`` standard normals by inverse CDF of the stream's first ``d`` uniforms."""
    if d < 1:
        raise ValueError("dimension must be positive")
    return ndtri(rng.uniforms(d))


def selection_uniform(rng: RngStream, d: int) -> float:
    """The uniform right after the ``d`` normals, used for the +/- choice."""
    return float(rng.uniforms(1, offset=d)[0])


def unwhiten(m: ModeInfo, eta) -> np.ndarray:
    """x = x* + L^{-T} eta."""
    return m.x_star + m.chol_inv_t @ np.asarray(eta, dtype=float)


def whiten(m: ModeInfo, x) -> np.ndarray:
    """eta = L^T (x - x*)."""
    return m.chol.T @ (np.asarray(x, dtype=float) - m.x_star)


def sample_proposal(m: ModeInfo, rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
    """Draw x ~ N(x*, H^{-1}); returns ``(x, xi)`` with xi the whitened draw."""
    xi = sample_standard_normal(rng, m.dim)
    return unwhiten(m, xi), xi


# --- Wick / Isserlis -----------------------------------------------------


@dataclass(frozen=True)
class Monomial:
    indices: tuple[int, ...]

    def __init__(self, indices: Iterable[int]):
        object.__setattr__(self, "indices", tuple(int(i) for i in indices))

    @property
    def degree(self) -> int:
        return len(self.indices)


def pairings(items: Sequence) -> Iterable[list[tuple]]:
    """All perfect matchings, generated by pairing the first unpaired item."""
    items = list(items)
    if not items:
        yield []
        return
    first = items[0]
    rest = items[1:]
    for i, other in enumerate(rest):
        for tail in pairings(rest[:i] + rest[i + 1 :]):
            yield [(first, other)] + tail


def wick_expectation(mono, cov) -> float:
    """E[X_{i1} ... X_{i2n}] for X ~ N(0, cov): sum over pairings of covariance products.

    The recursion pairs the first index with each other one, so every matching
    is counted once; identical sub-multisets are memoized.
    """
    idx = mono.indices if isinstance(mono, Monomial) else tuple(int(i) for i in mono)
    if len(idx) % 2:
        return 0.0
    if len(idx) > MAX_WICK_DEGREE:
        raise ValueError(
            f"degree {len(idx)} exceeds {MAX_WICK_DEGREE}; use Monte Carlo for this moment"
        )
    C = np.asarray(cov, dtype=float)
    if C.ndim == 0:
        C = C.reshape(1, 1)

    @lru_cache(maxsize=None)
    def expect(rest: tuple[int, ...]) -> float:
        if not rest:
            return 1.0
        i, tail = rest[0], rest[1:]
        total = 0.0
        for k, j in enumerate(tail):
            c = C[i, j]
            if c != 0.0:
                total += c * expect(tuple(sorted(tail[:k] + tail[k + 1 :])))
        return total

    return float(expect(tuple(sorted(idx))))


def double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


# Polynomials are {sorted index tuple: coefficient}.
Polynomial = Mapping[tuple[int, ...], float]


def poly_mul(a: Polynomial, b: Polynomial) -> dict:
    out: dict = defaultdict(float)
    for ka, va in a.items():
        for kb, vb in b.items():
            out[tuple(sorted(ka + kb))] += va * vb
    return dict(out)


def poly_pow(a: Polynomial, n: int) -> dict:
    out: dict = {(): 1.0}
    for _ in range(n):
        out = poly_mul(out, a)
    return out


def polynomial_expectation(poly: Polynomial, cov) -> float:
    return sum(c * wick_expectation(k, cov) for k, c in poly.items())


def rational_reduction_factor(p: int, d: int, k: int) -> float:
    """Factor r with E[C(xi)/|xi|^(2k)] = r E[C(xi)] for C homogeneous of degree p, xi ~ N(0, I_d)."""
    if k == 1:
        den = p - 2 + d
    elif k == 2:
        den = (p - 4 + d) * (p - 2 + d)
        if p - 4 + d <= 0:
            den = 0
    else:
        raise ValueError("k must be 1 or 2")
    if den <= 0:
        raise ValueError(f"nonpositive denominator for p={p}, d={d}, k={k}")
    return 1.0 / den


def radial_reduction_factor(p: int, d: int, k: int) -> float:
    """General k: 1 / prod_{j=1..k} (p - 2j + d), the iterated Gaussian integral identity."""
    den = 1
    for j in range(1, k + 1):
        f = p - 2 * j + d
        if f <= 0:
            raise ValueError(f"nonpositive denominator for p={p}, d={d}, k={k}")
        den *= f
    return 1.0 / den
