"""Dormand-Prince 4(5) with adaptive step control (the ode45 pair), compiled with numba."""

from __future__ import annotations

import numpy as np
from numba import njit

# Butcher tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# 5th minus embedded 4th order weights
E1 = 71 / 57600
E3 = -71 / 16695
E4 = 71 / 1920
E5 = -17253 / 339200
E6 = 22 / 525
E7 = -1 / 40

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
MAX_STEPS = 1_000_000


class StepSizeUnderflow(RuntimeError):
    pass


@njit(cache=True)
def lorenz_rhs(y, sigma, rho, beta):
    out = np.empty(3)
    out[0] = sigma * (y[1] - y[0])
    out[1] = y[0] * (rho - y[2]) - y[1]
    out[2] = y[0] * y[1] - beta * y[2]
    return out


@njit(cache=True)
def _err_norm(err, y0, y1, rtol, atol):
    acc = 0.0
    for i in range(err.size):
        sc = atol + rtol * max(abs(y0[i]), abs(y1[i]))
        acc += (err[i] / sc) ** 2
    return np.sqrt(acc / err.size)


@njit(cache=True, nogil=True)
def _dopri45_lorenz(y0, t_end, sigma, rho, beta, rtol, atol):
    """Returns (y(t_end), n_accepted, status); status 1 means step-size underflow."""
    y = y0.copy()
    if t_end == 0.0:
        return y, 0, 0
    f = lorenz_rhs(y, sigma, rho, beta)
    # initial step from the size of y and y' (Hairer, Norsett & Wanner II.4)
    d0 = 0.0
    d1 = 0.0
    for i in range(3):
        sc = atol + rtol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (f[i] / sc) ** 2
    d0 = np.sqrt(d0 / 3)
    d1 = np.sqrt(d1 / 3)
    h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h = min(h, t_end)
    t = 0.0
    n_acc = 0
    for _ in range(1_000_000):
        if t >= t_end:
            break
        if h < 16 * 2.220446049250313e-16 * max(abs(t), 1e-300) or h <= 0.0:
            return y, n_acc, 1
        last = t + h >= t_end
        if last:
            h = t_end - t
        k1 = f
        k2 = lorenz_rhs(y + h * (A21 * k1), sigma, rho, beta)
        k3 = lorenz_rhs(y + h * (A31 * k1 + A32 * k2), sigma, rho, beta)
        k4 = lorenz_rhs(y + h * (A41 * k1 + A42 * k2 + A43 * k3), sigma, rho, beta)
        k5 = lorenz_rhs(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4), sigma, rho, beta)
        k6 = lorenz_rhs(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5), sigma, rho, beta)
        y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = lorenz_rhs(y_new, sigma, rho, beta)
        err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        en = _err_norm(err, y, y_new, rtol, atol)
        if en <= 1.0:
            t = t_end if last else t + h
            y = y_new
            f = k7  # first-same-as-last
            n_acc += 1
            factor = MAX_FACTOR if en == 0.0 else min(MAX_FACTOR, SAFETY * en ** -0.2)
            h = h * factor
        else:
            h = h * max(MIN_FACTOR, SAFETY * en ** -0.2)
    return y, n_acc, 0


def dopri45_lorenz(y0, t_end: float, sigma: float, rho: float, beta: float, rtol: float, atol: float):
    """Integrate Lorenz '63 from t=0 to ``t_end``; returns ``(y, accepted_steps)``."""
    if t_end < 0:
        raise ValueError("integration time must be nonnegative")
    y, n_acc, status = _dopri45_lorenz(np.asarray(y0, dtype=float), float(t_end), sigma, rho, beta, rtol, atol)
    if status:
        raise StepSizeUnderflow(f"step size underflow after {n_acc} steps")
    return y, n_acc
