import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from implicit_samplers.problems import RandomWalkProblem, randomwalk_target
from implicit_samplers.target import ModeInfo, TargetDensity, centered_quadratic, eval_gradient, eval_potential, quadratic_target

finite = st.floats(-50, 50, allow_nan=False)


def test_eval_potential_quadratic():
    t = quadratic_target(np.eye(2))
    assert eval_potential(t, [1.0, 1.0]) == 1.0


def test_eval_potential_random_walk_gaussian_part():
    t = randomwalk_target(RandomWalkProblem(1, epsilon=0.0))
    assert eval_potential(t, [2.0]) == 2.0


def test_eval_potential_dimension_mismatch():
    t = quadratic_target(np.eye(2))
    with pytest.raises(ValueError):
        eval_potential(t, [1.0, 2.0, 3.0])


def test_eval_gradient_falls_back_to_differences():
    t = TargetDensity(2, 1.0, lambda x: float(x @ x))
    np.testing.assert_allclose(eval_gradient(t, [1.0, -2.0]), [2.0, -4.0], rtol=1e-7)


def test_centered_quadratic_examples():
    m = ModeInfo.from_hessian(np.array([1.0, 2.0]), 0.0, np.eye(2))
    assert centered_quadratic(m, m.x_star) == 0.0
    assert centered_quadratic(m, m.x_star + [3.0, 4.0]) == pytest.approx(12.5, rel=1e-15)
    m2 = ModeInfo.from_hessian(np.zeros(2), 0.0, np.diag([2.0, 8.0]))
    assert centered_quadratic(m2, [1.0, 1.0]) == pytest.approx(5.0, rel=1e-15)


def test_mode_info_rejects_asymmetric_and_indefinite():
    with pytest.raises(ValueError):
        ModeInfo.from_hessian(np.zeros(2), 0.0, np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(np.linalg.LinAlgError):
        ModeInfo.from_hessian(np.zeros(2), 0.0, np.diag([1.0, -1.0]))


def test_mode_info_is_read_only():
    m = ModeInfo.from_hessian(np.zeros(2), 0.0, np.eye(2))
    with pytest.raises(ValueError):
        m.x_star[0] = 1.0


def test_potential_grows_at_large_radius():
    t = randomwalk_target(RandomWalkProblem(3, epsilon=1e-2))
    rng = np.random.default_rng(1)
    for _ in range(10):
        u = rng.standard_normal(3)
        u /= np.linalg.norm(u)
        assert eval_potential(t, 1e3 * u) > eval_potential(t, 10 * u) > 0


@given(arrays(float, 2, elements=finite))
def test_centered_quadratic_symmetric_about_mode(x):
    H = np.array([[3.0, 1.0], [1.0, 2.0]])
    m = ModeInfo.from_hessian(np.array([0.5, -1.5]), 0.0, H)
    assert centered_quadratic(m, x) == pytest.approx(centered_quadratic(m, 2 * m.x_star - x), rel=1e-12, abs=1e-12)


@given(arrays(float, 3, elements=finite))
def test_quadratic_target_matches_centered_form(x):
    H = np.array([[4.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 2.0]])
    c = np.array([1.0, -2.0, 0.5])
    t = quadratic_target(H, center=c, offset=3.0)
    m = ModeInfo.from_hessian(c, 3.0, H)
    assert eval_potential(t, x) - m.g_star == pytest.approx(centered_quadratic(m, x), rel=1e-12, abs=1e-9)
