import math
import random

import pytest

from ivim import (
    custom_multiplier,
    dlambda_ds_eval,
    exp_multiplier,
    g_term,
    h_integrand,
    lambda_eval,
)


def test_exp_multiplier_examples():
    m = exp_multiplier(-2)
    # lambda(s,t) = -e^{-2(s-t)} = -e^{2(t-s)}
    assert lambda_eval(m, 0.0, 1.0) == pytest.approx(-math.exp(2.0), rel=1e-15)
    m0 = exp_multiplier(0)
    for s, t in [(0.0, 0.0), (0.3, 2.0), (-1.0, 5.0)]:
        assert lambda_eval(m0, s, t) == -1.0
    assert lambda_eval(exp_multiplier(1), 0.0, 1.0) == pytest.approx(
        -math.exp(-1.0), rel=1e-15
    )


def test_exp_multiplier_rejects_nonfinite_alpha():
    with pytest.raises(ValueError):
        exp_multiplier(float("nan"))
    with pytest.raises(ValueError):
        exp_multiplier(float("inf"))


def test_lambda_on_diagonal_is_exactly_minus_one():
    m = exp_multiplier(-2)
    assert lambda_eval(m, 0.7, 0.7) == -1.0
    assert 1.0 + lambda_eval(m, 0.7, 0.7) == 0.0


def test_lambda_overflow_guard():
    m = exp_multiplier(-2)
    with pytest.raises(OverflowError):
        lambda_eval(m, 0.0, 400.0)


def test_dlambda_examples():
    m = exp_multiplier(-2)
    assert dlambda_ds_eval(m, 0.0, 1.0) == pytest.approx(2 * math.exp(2.0), rel=1e-15)
    m0 = exp_multiplier(0)
    assert dlambda_ds_eval(m0, 0.3, 0.9) == 0.0
    assert dlambda_ds_eval(exp_multiplier(3), 0.4, 0.4) == -3.0


def test_dlambda_is_alpha_times_lambda():
    rng = random.Random(7)
    for _ in range(200):
        alpha = rng.uniform(-5, 5)
        s = rng.uniform(-2, 2)
        t = rng.uniform(-2, 2)
        m = exp_multiplier(alpha)
        lam = lambda_eval(m, s, t)
        dl = dlambda_ds_eval(m, s, t)
        assert dl == pytest.approx(alpha * lam, rel=1e-14, abs=1e-300)


def test_g_term_vanishes_for_exponential_with_zero_start():
    m = exp_multiplier(-2)
    for t in (0.0, 0.3, 1.0):
        assert g_term(m, u_at_t=5.0, u_at_a=0.0, t=t, a=0.0) == 0.0


def test_g_term_custom():
    m = custom_multiplier(lambda s, t: -2.0, lambda s, t: 0.0)
    assert g_term(m, u_at_t=3.0, u_at_a=0.0, t=1.0, a=0.0) == -3.0
    assert g_term(m, u_at_t=0.0, u_at_a=1.0, t=1.0, a=0.0) == 2.0


def test_h_integrand_examples():
    m = exp_multiplier(-2)
    # Riccati rhs at u = 0: f(0, 0) = 1, so H(0, 1) = lambda(0,1) * 1 = -e^2
    assert h_integrand(m, rhs_value=1.0, u_value=0.0, s=0.0, t=1.0) == pytest.approx(
        -math.exp(2.0), rel=1e-15
    )
    m0 = exp_multiplier(0)
    for c in (0.5, -3.0):
        assert h_integrand(m0, rhs_value=c, u_value=9.9, s=0.2, t=0.8) == -c
    # cancellation on the diagonal when f = -alpha*u
    assert h_integrand(m, rhs_value=2.0, u_value=1.0, s=0.5, t=0.5) == 0.0


def test_h_integrand_matches_exponential_integrand_form():
    # With f = -alpha*u - N(t, u) + g(t), the integrand must equal
    # e^{alpha (s - t)} * (N(s, u) - g(s)) up to rounding.
    rng = random.Random(2024)

    def nonlin(t, u):
        return u * u + math.sin(t) * u

    def force(t):
        return 1.0 + 0.5 * math.cos(t)

    for _ in range(300):
        alpha = rng.uniform(-4, 4)
        s = rng.uniform(0, 2)
        t = rng.uniform(0, 2)
        u = rng.uniform(-3, 3)
        m = exp_multiplier(alpha)
        f = -alpha * u - nonlin(s, u) + force(s)
        lhs = h_integrand(m, rhs_value=f, u_value=u, s=s, t=t)
        rhs = math.exp(alpha * (s - t)) * (nonlin(s, u) - force(s))
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_custom_multiplier_evaluates_supplied_functions():
    m = custom_multiplier(lambda s, t: s - t, lambda s, t: 1.0)
    assert lambda_eval(m, 2.0, 0.5) == 1.5
    assert dlambda_ds_eval(m, 2.0, 0.5) == 1.0
    assert h_integrand(m, rhs_value=2.0, u_value=3.0, s=2.0, t=0.5) == pytest.approx(
        1.0 * 3.0 + 1.5 * 2.0
    )
