import math

import numpy as np
import pytest
from conftest import mode_at_zero, poly_target
from hypothesis import given
from hypothesis import strategies as st
from oracles import double_factorial_odd, randomwalk_moment_mc

from implicit_samplers.asymptotics import (
    TaylorMoments,
    estimate_taylor_moments,
    predict_q,
    predict_q_symmetrized_random,
    random_map_factor,
    randomwalk_c3_polynomial,
    randomwalk_closed_form,
    randomwalk_exact_moments,
    randomwalk_wick_e_c3sq,
    slm_leading_relative_correction,
    taylor_ray_coefficients,
)
from implicit_samplers.gaussian import polynomial_expectation, poly_pow
from implicit_samplers.problems import RandomWalkProblem, randomwalk_target
from implicit_samplers.target import ModeInfo, quadratic_target

ZERO = TaylorMoments.from_raw(0.0, 0.0, 0.0, 0.0, 0.0)


def _rw(n_dim, eps, alpha=1.0, beta=1.0):
    t = randomwalk_target(RandomWalkProblem(n_dim, alpha=alpha, beta=beta, epsilon=eps))
    return t, mode_at_zero(t)


# --- ray coefficients ---------------------------------------------------------


def test_quadratic_target_has_no_higher_terms():
    h = np.array([[2.0, 0.3], [0.3, 1.0]])
    t = quadratic_target(h, center=np.array([1.0, -1.0]))
    m = ModeInfo.from_hessian(np.array([1.0, -1.0]), 0.0, h)
    c3, c4 = taylor_ray_coefficients(t, m, np.array([2.0, 0.5]))
    assert abs(c3) < 1e-8 and abs(c4) < 1e-8


def test_polynomial_ray_coefficients():
    t = poly_target({2: 0.5, 3: 0.3, 4: 0.05})
    c3, c4 = taylor_ray_coefficients(t, mode_at_zero(t), np.array([1.0]))
    assert c3 == pytest.approx(0.3, abs=1e-6)
    assert c4 == pytest.approx(0.05, abs=1e-6)


def test_randomwalk_ray_coefficients():
    # increments (1, 0): C3 = alpha sqrt(eps), C4 = beta eps
    for eps in (1e-4, 1e-2, 1.0):
        t, m = _rw(2, eps)
        c3, c4 = taylor_ray_coefficients(t, m, np.array([1.0, 1.0]))
        assert c3 == pytest.approx(math.sqrt(eps), rel=1e-6)
        assert c4 == pytest.approx(eps, rel=1e-6)


@given(st.floats(-0.5, 0.5), st.floats(0.0, 0.2), st.floats(0.2, 3.0))
def test_ray_coefficients_are_homogeneous(a, b, r):
    # C3(r x) = r^3 C3(x), C4(r x) = r^4 C4(x)
    t = poly_target({2: 0.5, 3: a, 4: b})
    m = mode_at_zero(t)
    c3, c4 = taylor_ray_coefficients(t, m, np.array([r]))
    assert c3 == pytest.approx(a * r**3, abs=1e-6 * max(1.0, r**4))
    assert c4 == pytest.approx(b * r**4, abs=1e-6 * max(1.0, r**4))


# --- moments ------------------------------------------------------------------


def test_quadratic_moments_vanish():
    h = np.diag([1.0, 4.0, 9.0])
    t = quadratic_target(h)
    mom = estimate_taylor_moments(t, ModeInfo.from_hessian(np.zeros(3), 0.0, h), 200, seed=0)
    for name in ("e_c3sq", "e_c4", "var_c4_minus_half_c3sq", "e_c3_4", "e_c3sq_c4", "e_c4sq"):
        assert abs(getattr(mom, name)) < 1e-8
    assert mom.n_used == 200


def test_randomwalk_e_c3sq_scaled():
    eps = 1e-3
    t, m = _rw(3, eps)
    mom = estimate_taylor_moments(t, m, 20_000, seed=1)
    assert abs(mom.e_c3sq - 15 * 3 * eps) < 3 * mom.se["e_c3sq"]
    exact = randomwalk_exact_moments(3, eps=eps)
    for name in ("e_c4", "e_c4sq", "e_c3sq_c4", "e_c3_4"):
        assert abs(getattr(mom, name) - getattr(exact, name)) < 4 * mom.se[name], name


def test_cubic_1d_e_c3sq():
    a = 0.2
    t = poly_target({2: 0.5, 3: a})
    mom = estimate_taylor_moments(t, mode_at_zero(t), 20_000, seed=2)
    assert abs(mom.e_c3sq - 15 * a * a) < 3 * mom.se["e_c3sq"]
    assert mom.e_c4 == pytest.approx(0.0, abs=1e-8)


def test_moment_estimates_are_reproducible_and_jensen():
    t, m = _rw(2, 1e-2)
    a = estimate_taylor_moments(t, m, 500, seed=9)
    b = estimate_taylor_moments(t, m, 500, seed=9)
    assert a == b
    assert a.e_c3sq >= 0
    assert a.e_c3_4 >= a.e_c3sq**2 - 3 * (a.se["e_c3_4"] + 2 * a.e_c3sq * a.se["e_c3sq"])


def test_moment_sample_floor():
    t, m = _rw(2, 1e-2)
    with pytest.raises(ValueError):
        estimate_taylor_moments(t, m, 99, seed=0)


def test_exact_moments_match_monte_carlo():
    mc = randomwalk_moment_mc(3, 400_000, seed=5)
    ex = randomwalk_exact_moments(3)
    assert abs(mc["e_c3sq"] - ex.e_c3sq) < 4 * mc["e_c3sq_se"]
    assert abs(mc["var_y"] - ex.var_c4_minus_half_c3sq) < 4 * mc["var_y_se"]


def test_exact_moments_small_case():
    ex = randomwalk_exact_moments(2)
    assert ex.e_c3sq == 30 and ex.e_c4 == 6
    assert ex.var_c4_minus_half_c3sq == pytest.approx(3702.0)
    # single increment: E Z^2k straight from the double factorial
    one = randomwalk_exact_moments(1)
    assert one.e_c3_4 == double_factorial_odd(12)
    assert one.e_c3sq_c4 == double_factorial_odd(10)
    assert one.e_c4sq == double_factorial_odd(8)


# --- predictors ---------------------------------------------------------------


def test_predict_q_randomwalk_examples():
    unfolded = randomwalk_exact_moments(2)
    assert predict_q("lm", 2, 1e-4, unfolded) == pytest.approx(3.0e-3, rel=1e-12)
    assert predict_q("rm", 2, 1e-4, unfolded) == pytest.approx(1.125e-3, rel=1e-12)
    assert randomwalk_closed_form("slm-leading", 200, 1.0, 1e-4) == pytest.approx(0.045, rel=1e-12)
    # folded moments with eps = 1 give the same numbers
    folded = randomwalk_exact_moments(2, eps=1e-4)
    assert predict_q("lm", 2, 1.0, folded) == pytest.approx(3.0e-3, rel=1e-12)
    assert predict_q("slm", 2, 1.0, folded) == pytest.approx(predict_q("slm", 2, 1e-4, unfolded), rel=1e-12)
    with pytest.raises(ValueError):
        predict_q("mh", 2, 1.0, folded)


def test_closed_forms():
    assert randomwalk_closed_form("lm", 2, 1.0, 1.0) == 30
    assert randomwalk_closed_form("rm", 2, 1.0, 1.0) == pytest.approx(11.25, rel=1e-14)
    assert randomwalk_closed_form("slm-leading", 200, 1.0, 1.0) == pytest.approx(4.5e6, rel=1e-14)
    with pytest.raises(ValueError):
        randomwalk_closed_form("srm", 2, 1.0, 1.0)


def test_slm_leading_term_correction_is_order_one_over_n():
    # exact over leading is 1 + O(1/N), not small at moderate N
    corr = [slm_leading_relative_correction(n) for n in (10, 100, 1000, 10000)]
    assert all(c > 0 for c in corr)
    for small, big in zip(corr, corr[1:]):
        assert small / big == pytest.approx(10, rel=0.1)
    assert slm_leading_relative_correction(200) == pytest.approx(0.0724, abs=5e-4)


def test_symmetrized_random_zero_moments():
    assert predict_q_symmetrized_random(3, 1.0, ZERO) == 0.0
    with pytest.raises(ValueError):
        predict_q_symmetrized_random(0, 1.0, ZERO)


def test_symmetrized_random_large_d_limit():
    mom = randomwalk_exact_moments(2)
    target = mom.var_c4_minus_half_c3sq
    ratios = [predict_q_symmetrized_random(d, 1.0, mom) / target for d in (10, 1000, 10**6)]
    assert abs(ratios[-1] - 1) < 1e-4
    assert abs(ratios[2] - 1) < abs(ratios[1] - 1) < abs(ratios[0] - 1)


@given(st.integers(1, 4), st.floats(0.2, 3.0))
def test_wick_matches_closed_form(n_dim, alpha):
    expected = randomwalk_closed_form("lm", n_dim, alpha, 1.0)
    assert randomwalk_wick_e_c3sq(n_dim, alpha) == pytest.approx(expected, rel=1e-12)


def test_wick_in_position_coordinates():
    for n_dim in (1, 2, 3):
        assert randomwalk_wick_e_c3sq(n_dim, coords="positions") == pytest.approx(15 * n_dim, rel=1e-10)


def test_wick_quartic_expectation():
    # E C4 = 3N in increments, via the same machinery
    c4 = {(k,) * 4: 1.0 for k in range(3)}
    assert polynomial_expectation(c4, np.eye(3)) == 9
    c3 = randomwalk_c3_polynomial(2)
    assert polynomial_expectation(poly_pow(c3, 4), np.eye(2)) == randomwalk_exact_moments(2).e_c3_4


@given(st.integers(1, 10**6))
def test_random_map_factor_bounds(d):
    f = random_map_factor(d)
    assert 0 < f < 1
    assert f < random_map_factor(d + 1)


def test_random_map_factor_limit():
    assert random_map_factor(10**8) == pytest.approx(1.0, abs=1e-7)
    assert random_map_factor(2) == pytest.approx(9 / 24)


def _gauss_hermite_moments(c3_coef, c4_coef, d):
    """Exact moments of homogeneous cubic/quartic forms under N(0, I_d) by tensor Gauss-Hermite."""
    nodes, weights = np.polynomial.hermite_e.hermegauss(7)
    weights = weights / weights.sum()
    grid = np.array(np.meshgrid(*[nodes] * d, indexing="ij")).reshape(d, -1).T
    w = np.prod(np.array(np.meshgrid(*[weights] * d, indexing="ij")).reshape(d, -1), axis=0)
    c3 = np.einsum("ijk,ni,nj,nk->n", c3_coef, grid, grid, grid)
    c4 = np.einsum("ijkl,ni,nj,nk,nl->n", c4_coef, grid, grid, grid, grid)
    e = lambda v: float(w @ v)  # noqa: E731
    return TaylorMoments.from_raw(e(c3**2), e(c4), e(c3**4), e(c3**2 * c4), e(c4**2))


@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_symmetrized_random_nonnegative(d, seed):
    rng = np.random.default_rng(seed)
    mom = _gauss_hermite_moments(rng.normal(size=(d,) * 3), rng.normal(size=(d,) * 4), d)
    assert mom.e_c3_4 >= mom.e_c3sq**2 * (1 - 1e-12)
    q = predict_q_symmetrized_random(d, 1.0, mom)
    assert q >= -1e-10 * (1.0 + mom.e_c3_4 + mom.e_c4sq)


def test_gauss_hermite_oracle_agrees_with_exact_walk():
    c3 = np.zeros((2, 2, 2))
    c4 = np.zeros((2, 2, 2, 2))
    for k in range(2):
        c3[k, k, k] = 1.0
        c4[k, k, k, k] = 1.0
    gh = _gauss_hermite_moments(c3, c4, 2)
    ex = randomwalk_exact_moments(2)
    for name in ("e_c3sq", "e_c4", "e_c3_4", "e_c3sq_c4", "e_c4sq"):
        assert getattr(gh, name) == pytest.approx(getattr(ex, name), rel=1e-10)
