import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from implicit_samplers.problems import RandomWalkProblem, randomwalk_target
from implicit_samplers.target import ModeInfo, TargetDensity

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def poly_target(coeffs: dict, name: str = "poly1d") -> TargetDensity:
    """1D potential sum c_k x^k with analytic gradient and Hessian."""

    def potential(x):
        return float(sum(c * x[0] ** k for k, c in coeffs.items()))

    def gradient(x):
        return np.array([sum(k * c * x[0] ** (k - 1) for k, c in coeffs.items())])

    def hessian(x):
        return np.array([[sum(k * (k - 1) * c * x[0] ** (k - 2) for k, c in coeffs.items() if k >= 2)]])

    return TargetDensity(1, 1.0, potential, gradient, hessian, name)


def mode_at_zero(t: TargetDensity) -> ModeInfo:
    z = np.zeros(t.dim)
    return ModeInfo.from_hessian(z, float(t.potential(z)), t.hessian(z))


# confining 1D target with a cubic asymmetry; phi' has the sign of x
CUBIC_1D = {2: 0.5, 3: 0.2, 4: 0.05}


@pytest.fixture
def cubic_1d():
    t = poly_target(CUBIC_1D, "cubic1d")
    return t, mode_at_zero(t)


@pytest.fixture
def rw2():
    t = randomwalk_target(RandomWalkProblem(2, epsilon=1e-4))
    return t, mode_at_zero(t)


# --- acceptance report -------------------------------------------------------

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def record_criterion(request):
    """Log one PASS/FAIL line for an acceptance criterion; returns the verdict."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {detail}"
        request.config.stash[_ACCEPTANCE].append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
