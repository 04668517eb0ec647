import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import fracorder as fr
from fracorder.errors import (
    DegenerateSignCondition,
    InvalidTime,
    NonConvergence,
    SpectralConditionViolation,
)
from fracorder.mlfunc import evaluate_detailed, monotone_map_caputo, monotone_map_rl


def ml_oracle(alpha, beta, z, dps=50):
    """Independent brute-force sum, direct term formula, fixed high precision."""
    z = complex(z)
    dps = dps + int(0.45 * abs(z) ** (1.0 / alpha))
    with mpmath.workdps(dps):
        am, bm, zm = mpmath.mpf(alpha), mpmath.mpf(beta), mpmath.mpc(z)
        total = mpmath.mpc(0)
        for k in range(100_000):
            term = zm**k / mpmath.gamma(am * k + bm)
            total += term
            if k > 8 and abs(term) < mpmath.mpf(10) ** (-dps + 8) * max(
                mpmath.mpf(1), abs(total)
            ):
                return complex(total)
    raise AssertionError("oracle did not converge")


# --------------------------------------------------------------- ml_series


def test_series_value_at_zero_is_one():
    assert fr.ml_series(0.7, 1.0, 0, 1e-14) == 1.0


def test_series_leading_term_one_over_gamma():
    got = fr.ml_series(0.5, 0.5, 0, 1e-14)
    assert got == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-13)


def test_series_exponential_point():
    got = fr.ml_series(1.0, 1.0, -1.0, 1e-14)
    assert got == pytest.approx(math.exp(-1.0), rel=1e-12)


def test_series_cap_rejected():
    with pytest.raises(NonConvergence):
        fr.ml_series(0.6, 1.0, -40.0, 1e-13)


@pytest.mark.parametrize("z", [-20.0, 20.0, -15 + 5j, 3 - 4j])
def test_series_exponential_route(z):
    # alpha = beta = 1 through the series machinery, not the closed form
    got = fr.ml_series(1.0, 1.0, z, 1e-14, policy=fr.MLRegimePolicy(series_radius=10.0))
    assert got == pytest.approx(cmath.exp(z), rel=1e-11)


def test_series_against_oracle_small_alpha():
    got = fr.ml_series(0.1, 1.0, -1.3, 1e-14)
    assert got == pytest.approx(ml_oracle(0.1, 1.0, -1.3), rel=1e-11)


# ------------------------------------------------------------ ml_one / two


def test_ml_one_zero_is_exactly_one():
    for beta in (0.15, 0.5, 0.99, 1.0):
        assert fr.ml_one(beta, 0.0) == 1.0


def test_ml_one_exponential_identity():
    z = complex(-3.0, 4.0)
    assert fr.ml_one(1.0, z) == pytest.approx(cmath.exp(z), rel=1e-14)


def test_ml_one_half_erfc_identity():
    got = fr.ml_one(0.5, -1.0)
    assert got == pytest.approx(math.e * math.erfc(1.0), rel=1e-11)
    assert got == pytest.approx(0.4275836, rel=1e-6)


def test_ml_two_reduces_to_ml_one():
    for alpha, z in [(0.4, -2.0), (0.85, 1 + 1j), (0.6, -4 + 0.3j)]:
        assert fr.ml_two(alpha, 1.0, z) == pytest.approx(fr.ml_one(alpha, z), rel=1e-13)


def test_ml_two_exponential_point():
    got = fr.ml_two(1.0, 1.0, 2j)
    assert got == pytest.approx(complex(math.cos(2.0), math.sin(2.0)), rel=1e-14)


def test_ml_two_at_zero():
    for beta in (0.5, 1.7, 3.2):
        assert fr.ml_two(0.6, beta, 0) == pytest.approx(1.0 / math.gamma(beta), rel=1e-13)


def test_ml_two_recurrence_point():
    # E_{a,b}(z) = z E_{a,a+b}(z) + 1/Gamma(b)
    alpha = beta = 0.5
    z = -1.0
    lhs = fr.ml_two(alpha, beta, z)
    rhs = z * fr.ml_two(alpha, alpha + beta, z) + 1.0 / math.gamma(beta)
    assert lhs == pytest.approx(rhs, rel=1e-11)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("beta", [0.5, 1.0])
def test_ml_two_recurrence_grid(alpha, beta):
    for z in [-5.0, -2.5, 1.5, 2j, -3 + 3j, 0.5 - 1j]:
        lhs = fr.ml_two(alpha, beta, z)
        rhs = z * fr.ml_two(alpha, alpha + beta, z) + 1.0 / math.gamma(beta)
        scale = 1.0 + abs(z * fr.ml_two(alpha, alpha + beta, z))
        assert abs(lhs - rhs) <= 1e-9 * scale


def test_dispatch_regimes_reported():
    assert evaluate_detailed(0.7, 1.0, 0).regime == "zero"
    assert evaluate_detailed(1.0, 1.0, -2.0).regime == "exp"
    assert evaluate_detailed(0.7, 1.0, -2.0).regime == "series"
    assert evaluate_detailed(0.7, 1.0, -30.0).regime == "contour"
    assert evaluate_detailed(0.5, 1.0, 8.0).regime == "series-hp"


def test_dispatch_rejects_uncoverable_point():
    # enormous positive argument: no contour, astronomical cancellation budget
    with pytest.raises(NonConvergence):
        fr.ml_two(0.05, 1.0, 50.0)


@given(
    r=st.floats(min_value=0.3, max_value=8.0),
    arg=st.floats(min_value=1.9, max_value=math.pi),
    sign=st.sampled_from([-1.0, 1.0]),
    alpha=st.sampled_from([0.35, 0.5, 0.75, 0.9]),
)
def test_dispatch_matches_oracle(r, arg, alpha, sign):
    z = r * cmath.exp(1j * sign * arg)
    got = fr.ml_two(alpha, 1.0, z)
    ref = ml_oracle(alpha, 1.0, z)
    assert abs(got - ref) <= 1e-9 * (1.0 + abs(ref))


# ------------------------------------------------------------- observables


def test_caputo_observable_exponential_cases():
    assert fr.caputo_observable(1.0, -1.0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-14)
    assert fr.caputo_observable(1.0, -2.0, math.e) == pytest.approx(
        math.exp(-2.0 * math.e), rel=1e-13
    )


def test_caputo_observable_matches_series():
    rho, lam, t0 = 0.8, complex(-2.0, 0.5), 3.0
    expected = fr.ml_series(rho, 1.0, lam * t0**rho, 1e-14)
    assert fr.caputo_observable(rho, lam, t0) == pytest.approx(expected, rel=1e-10)


def test_rl_observable_exponential_case():
    for t0 in (1.0, 2.5, 7.0):
        assert fr.rl_observable(1.0, -1.0, t0) == pytest.approx(math.exp(-t0), rel=1e-13)


def test_rl_observable_unit_time_collapses():
    rho, lam = 0.7, -2.5
    assert fr.rl_observable(rho, lam, 1.0) == pytest.approx(
        fr.ml_two(rho, rho, lam), rel=1e-13
    )


def test_rl_observable_power_prefactor():
    rho, lam, t0 = 0.6, -3.0, 2.0
    expected = t0 ** (rho - 1.0) * fr.ml_series(rho, rho, lam * t0**rho, 1e-14)
    assert fr.rl_observable(rho, lam, t0) == pytest.approx(expected, rel=1e-10)


def test_observable_requires_spectral_condition():
    with pytest.raises(SpectralConditionViolation):
        fr.caputo_observable(0.7, 1.0, 2.0)
    with pytest.raises(SpectralConditionViolation):
        fr.rl_observable(0.7, complex(0.5, 0.1), 2.0)


def test_observable_requires_t0_at_least_one():
    with pytest.raises(InvalidTime):
        fr.caputo_observable(0.7, -1.0, 0.5)


# ----------------------------------------------------------- monotone maps


def test_map_caputo_exponential_point():
    for t0 in (1.0, 2.0, 5.0):
        assert monotone_map_caputo(1.0, -1.0, t0) == pytest.approx(math.exp(-t0), rel=1e-13)


def test_map_caputo_dense_sampling_decreasing():
    # 1e4-point sweep: strictly decreasing and positive on [0.3, 1]
    lam, t0 = -2.0, 4.0
    betas = np.linspace(0.3, 1.0, 10_000)
    values = np.array([monotone_map_caputo(float(b), lam, t0) for b in betas])
    assert np.all(values > 0.0)
    assert np.all(np.diff(values) < 0.0)
    v03 = monotone_map_caputo(0.3, lam, t0)
    v065 = monotone_map_caputo(0.65, lam, t0)
    v1 = monotone_map_caputo(1.0, lam, t0)
    assert v03 > v065 > v1


def test_map_rl_sign_factor_positive():
    lam, t0 = complex(-1.0, 0.2), 2.0
    expected = cmath.exp(lam * t0).real
    assert monotone_map_rl(1.0, lam, t0) == pytest.approx(expected, rel=1e-13)


def test_map_rl_sign_factor_negative():
    lam = complex(-0.5, 2.0)
    assert fr.rl_sign_factor(lam) == -1.0
    got = monotone_map_rl(1.0, lam, 3.0)
    assert got == pytest.approx(-cmath.exp(lam * 3.0).real, rel=1e-13)


def test_map_rl_degenerate_sign_rejected():
    with pytest.raises(DegenerateSignCondition):
        monotone_map_rl(0.5, complex(-1.0, 1.0), 2.0)


def test_map_handles_underflow_at_unit_order():
    # mathematically positive endpoint value survives exp underflow
    v = monotone_map_caputo(1.0, -1.0, 7.4e8)
    assert v > 0.0
