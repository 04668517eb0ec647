import math

import numpy as np
import pytest

from fracorder.gammafn import gamma_real, lgamma_real, rgamma_real, sinpi


@pytest.mark.parametrize("x", np.linspace(0.02, 30.0, 211).tolist())
def test_gamma_matches_stdlib(x):
    assert gamma_real(x) == pytest.approx(math.gamma(x), rel=1e-13)


@pytest.mark.parametrize("x", [-0.5, -1.5, -2.7, -0.1, -5.3])
def test_gamma_reflection_negative(x):
    assert gamma_real(x) == pytest.approx(math.gamma(x), rel=1e-12)


def test_gamma_pole_raises():
    with pytest.raises(ValueError):
        gamma_real(0.0)
    with pytest.raises(ValueError):
        gamma_real(-3.0)


@pytest.mark.parametrize("x", np.linspace(0.05, 300.0, 97).tolist())
def test_lgamma_matches_stdlib(x):
    assert lgamma_real(x) == pytest.approx(math.lgamma(x), rel=1e-13, abs=1e-12)


def test_rgamma_poles_are_exact_zero():
    for x in (0.0, -1.0, -2.0, -7.0):
        assert rgamma_real(x) == 0.0


@pytest.mark.parametrize("x", [0.3, 1.0, 2.5, 10.0, 150.0, -0.5, -1.2])
def test_rgamma_reciprocal(x):
    assert rgamma_real(x) == pytest.approx(1.0 / math.gamma(x), rel=1e-12)


def test_rgamma_underflows_to_zero_for_huge_argument():
    assert rgamma_real(400.0) == 0.0


def test_sinpi_exact_at_integers():
    for n in range(-5, 6):
        assert sinpi(float(n)) == 0.0
    assert sinpi(0.5) == 1.0
    assert sinpi(1.5) == -1.0
    assert sinpi(2.25) == pytest.approx(math.sin(math.pi * 0.25), rel=1e-15)
