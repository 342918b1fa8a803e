"""Quality measure Q = E(w^2)/E(w)^2 - 1 from log-weights, and log-log slope fits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

Q_FLOOR = 1e-14
JACKKNIFE_BATCHES = 100


@dataclass(frozen=True)
class QualityReport:
    q_hat: float
    q_se: float
    n_samples: int
    max_log_weight: float
    effective_sample_fraction: float


def _relative_weights(log_weights) -> tuple[np.ndarray, float]:
    lw = np.asarray(log_weights, dtype=float)
    if lw.ndim != 1 or lw.size < 2:
        raise ValueError("need at least two log-weights")
    if np.any(np.isnan(lw)) or np.any(lw == np.inf):
        raise ValueError("log-weights must be finite or -inf")
    m = float(np.max(lw))
    if m == -np.inf:
        raise ValueError("all weights are zero")
    # u = w/w_max - 1, kept as expm1 so nearly constant weights lose no digits
    return np.expm1(lw - m), m


def _q_from_sums(n, s1, s2):
    # u shifted by its global mean c: s1 = sum(u - c), s2 = sum((u - c)^2)
    mean = s1 / n
    var = s2 / n - mean * mean
    return var, mean


def estimate_q(log_weights: Sequence[float]) -> QualityReport:
    """Q from weights exp(l_k - max l); jackknife standard error over contiguous batches."""
    u, m = _relative_weights(log_weights)
    n = u.size
    c = float(np.mean(u))
    z = u - c
    var = float(np.mean(z * z)) - float(np.mean(z)) ** 2
    var = max(var, 0.0)
    q = var / (1.0 + c) ** 2

    n_batches = min(JACKKNIFE_BATCHES, n)
    edges = np.linspace(0, n, n_batches + 1).astype(int)
    b1 = np.add.reduceat(z, edges[:-1])
    b2 = np.add.reduceat(z * z, edges[:-1])
    counts = np.diff(edges)
    n_loo = n - counts
    s1 = z.sum() - b1
    s2 = (z * z).sum() - b2
    v_loo, m_loo = _q_from_sums(n_loo, s1, s2)
    den = (1.0 + c + m_loo) ** 2
    if np.any(den <= 0):
        # some leave-out replicate has no weight mass left
        return QualityReport(q, math.inf, n, m, min(1.0, 1.0 / (1.0 + q)))
    q_loo = np.maximum(v_loo, 0.0) / den
    se = float(np.sqrt((n_batches - 1) / n_batches * np.sum((q_loo - q_loo.mean()) ** 2)))
    return QualityReport(q, se, n, m, min(1.0, 1.0 / (1.0 + q)))


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Least-squares line through (log x, log y); returns (slope, intercept)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size != y.size or x.size < 2:
        raise ValueError("need at least two paired points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    lx_bar, ly_bar = lx.mean(), ly.mean()
    dx = lx - lx_bar
    slope = float(np.sum(dx * (ly - ly_bar)) / np.sum(dx * dx))
    return slope, float(ly_bar - slope * lx_bar)


def variance_lemma_check(u1, u2, r: float, eps_grid) -> float:
    """max over eps of |Q(u) / (eps^(2r) var u1) - 1| for u = 1 + eps^r u1 + eps^(2r) u2."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if u1.shape != u2.shape:
        raise ValueError("u1 and u2 must have the same length")
    var1 = float(np.var(u1))
    if var1 == 0.0:
        raise ValueError("var(u1) is zero; the leading-order ratio is undefined")
    worst = 0.0
    for eps in eps_grid:
        a = eps**r
        dev = a * u1 + a * a * u2  # u - 1
        q = float(np.var(dev)) / (1.0 + float(np.mean(dev))) ** 2
        worst = max(worst, abs(q / (a * a * var1) - 1.0))
    return worst
