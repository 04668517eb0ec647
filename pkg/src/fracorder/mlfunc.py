"""Mittag-Leffler evaluation across magnitude regimes.

Two routes cover the complex plane for alpha in (0, 1]:

* power series  sum_k z^k / Gamma(alpha k + beta), summed in double
  precision when benign and in scaled working precision when the
  alternating cancellation (roughly exp(|z|^(1/alpha))) would destroy
  double floats;
* Hankel-path representation

      E_{a,b}(z) = -1/(z Gamma(b-a))
                   + 1/(2 pi i a z) * int_{delta(1;theta)}
                       e^{zeta^(1/a)} zeta^p / (zeta - z) dzeta,

  p = (1-b)/a + 1, valid for z to the left of the path (|arg z| > theta,
  pi a/2 < theta < min(pi a, pi)).  The rays are integrated in the
  variable u = s^(1/a), where the integrand decays like exp(-u sin eps)
  with a linear phase, and Gauss-Legendre panels are doubled until two
  refinements agree.

The module also exposes the scalar observables of the order-recovery
problem: beta |-> E_beta(lambda t0^beta) (Caputo initial data) and
beta |-> t0^(beta-1) E_{beta,beta}(lambda t0^beta) (Riemann-Liouville),
plus the sign-adjusted real-part maps that the bisection brackets.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import (
    ContourViolation,
    DegenerateSignCondition,
    InvalidTime,
    NonConvergence,
    QuadratureFailure,
    SpectralConditionViolation,
)
from .gammafn import gamma_real, lgamma_real, rgamma_real

__all__ = [
    "MLRegimePolicy",
    "HankelContour",
    "MLEvaluation",
    "DEFAULT_POLICY",
    "ml_series",
    "ml_contour",
    "ml_one",
    "ml_two",
    "evaluate_detailed",
    "caputo_observable",
    "rl_observable",
    "rl_sign_factor",
    "monotone_map_caputo",
    "monotone_map_rl",
    "spectral_margin",
]

TINY = 5e-324  # smallest positive subnormal; sign-preserving underflow clamp
_LOG10E = 0.4342944819032518
_HALF_PI = 0.5 * math.pi

# float summation is allowed this many decimal digits of cancellation
_FLOAT_CANCEL_DIGITS = 2.0
# working-precision summation gives up beyond this (dps would be huge)
_HP_CANCEL_DIGITS = 400.0

_GL_NODES, _GL_WEIGHTS = leggauss(12)


@dataclass(frozen=True)
class MLRegimePolicy:
    """Knobs for the regime dispatch and the contour quadrature."""

    series_radius: float = 5.0
    series_tol: float = 1e-13
    contour_nodes: int = 96
    contour_epsilon_fraction: float = 0.9

    def __post_init__(self):
        if self.series_radius < 1.0:
            raise ValueError("series_radius must be >= 1")
        if self.series_tol <= 0.0:
            raise ValueError("series_tol must be positive")
        if self.contour_nodes < 64:
            raise ValueError("contour_nodes must be >= 64")
        if not 0.0 < self.contour_epsilon_fraction < 1.0:
            raise ValueError("contour_epsilon_fraction must lie in (0, 1)")


DEFAULT_POLICY = MLRegimePolicy()


@dataclass(frozen=True)
class HankelContour:
    """Unit-radius keyhole path: rays at +-theta plus the arc |zeta| = 1."""

    theta: float
    node_count: int = 96
    radius: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.theta < math.pi:
            raise ValueError("theta must lie in (0, pi)")
        if self.node_count < 8:
            raise ValueError("node_count must be >= 8")
        if self.radius != 1.0:
            raise ValueError("only the unit-radius path is supported")

    @classmethod
    def for_argument(cls, alpha: float, z: complex, policy: MLRegimePolicy = DEFAULT_POLICY) -> "HankelContour":
        """Path with theta = (pi/2 + eps) alpha, eps a fraction of its admissible bound."""
        phi = abs(cmath.phase(complex(z)))
        bound = 0.5 * min(phi - _HALF_PI, _HALF_PI)
        if bound <= 0.0:
            raise ContourViolation(
                f"|arg z| = {phi:.6f} <= pi/2: no admissible Hankel path for this argument"
            )
        eps = policy.contour_epsilon_fraction * bound
        return cls(theta=(_HALF_PI + eps) * alpha, node_count=policy.contour_nodes)


@dataclass(frozen=True)
class MLEvaluation:
    value: complex
    regime: str
    error_estimate: float


def _cancellation_digits(alpha: float, z: complex) -> float:
    az = abs(z)
    if az == 0.0:
        return 0.0
    try:
        growth = az ** (1.0 / alpha)
    except OverflowError:
        return math.inf
    return _LOG10E * growth


def _series_budget(alpha: float, z: complex) -> int:
    az = abs(z)
    k_turn = max(10.0, az ** (1.0 / alpha) / alpha) if az > 1.0 else 50.0
    # small alpha makes the term ratio decay glacially; budget for it
    return min(int(8.0 * k_turn + 60.0 / alpha) + 1000, 200_000)


def _series_float(alpha: float, beta: float, z: complex, tol: float) -> tuple[complex, float]:
    budget = _series_budget(alpha, z)
    term = complex(rgamma_real(beta))
    total = 0j
    max_mag = 0.0
    a_prev = beta
    g_prev = gamma_real(beta)
    az = abs(z)
    for k in range(budget):
        total += term
        mag = abs(term)
        if mag > max_mag:
            max_mag = mag
        a_next = alpha * (k + 1) + beta
        if a_next < 170.0:
            # direct quotient avoids the lgamma-difference drift
            g_next = gamma_real(a_next)
            step = g_prev / g_next
            g_prev = g_next
        else:
            step = math.exp(lgamma_real(a_prev) - lgamma_real(a_next))
        a_prev = a_next
        ratio = az * step
        term = term * z * step
        if ratio < 1.0:
            # lgamma is convex, so the term ratio only decreases from here
            tail = abs(term) / (1.0 - ratio)
            scale = max(abs(total), 1e-300)
            if tail <= tol * scale:
                err = tail + (5e-16 + 1e-15 * k) * max_mag
                return total, err
    raise NonConvergence(
        f"series for E_({alpha},{beta}) at |z|={az:.3g} did not meet tol within {budget} terms"
    )


def _series_mp(alpha: float, beta: float, z: complex, digits: float) -> tuple[complex, float]:
    budget = _series_budget(alpha, z)
    dps = 35 + int(digits)
    with mpmath.workdps(dps):
        am = mpmath.mpf(alpha)
        bm = mpmath.mpf(beta)
        zm = mpmath.mpc(z)
        azm = abs(zm)
        # gamma arguments must be formed in working precision: a double-rounded
        # alpha*k+beta perturbs huge terms enough to wreck the cancellation
        g_prev = mpmath.gamma(bm)
        term = 1 / g_prev
        total = mpmath.mpc(0)
        thresh = mpmath.mpf(10) ** (-(dps - 10))
        small = 0
        for k in range(budget):
            total += term
            g_next = mpmath.gamma(am * (k + 1) + bm)
            ratio = azm * g_prev / g_next
            term = term * zm * (g_prev / g_next)
            g_prev = g_next
            if abs(term) <= thresh * max(mpmath.mpf(1), abs(total)) and ratio < 1:
                small += 1
                if small >= 3:
                    value = complex(total)
                    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                        raise NonConvergence(
                            f"E_({alpha},{beta})({z}) exceeds double-precision range"
                        )
                    return value, abs(value) * 3e-16 + 1e-300
            else:
                small = 0
    raise NonConvergence(
        f"high-precision series for E_({alpha},{beta}) at |z|={abs(z):.3g} "
        f"did not converge within {budget} terms"
    )


def _series_eval(
    alpha: float,
    beta: float,
    z: complex,
    tol: float,
    cap_radius: float | None,
) -> tuple[complex, float, str]:
    if alpha <= 0.0 or beta <= 0.0:
        raise ValueError("alpha and beta must be positive")
    z = complex(z)
    if z == 0:
        value = 1.0 + 0j if beta == 1.0 else complex(rgamma_real(beta))
        return value, abs(value) * 1e-15, "zero"
    if cap_radius is not None and abs(z) > cap_radius:
        raise NonConvergence(
            f"|z| = {abs(z):.4g} exceeds the series domain cap {cap_radius:.4g}"
        )
    digits = _cancellation_digits(alpha, z)
    if digits > _HP_CANCEL_DIGITS:
        raise NonConvergence(
            f"series cancellation ~{digits:.0f} digits at alpha={alpha}, |z|={abs(z):.3g} "
            "exceeds the precision budget"
        )
    if digits <= _FLOAT_CANCEL_DIGITS:
        value, err = _series_float(alpha, beta, z, tol)
        return value, err, "series"
    value, err = _series_mp(alpha, beta, z, digits)
    return value, err, "series-hp"


def ml_series(
    alpha: float,
    beta: float,
    z: complex,
    tol: float = 1e-14,
    policy: MLRegimePolicy = DEFAULT_POLICY,
) -> complex:
    """Power-series value of E_{alpha,beta}(z).

    Serves as the independent oracle for the contour route.  Capped at
    |z| <= 2 * series_radius; precision is escalated automatically when
    the alternating sum cancels more than double precision can carry.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    value, _, _ = _series_eval(alpha, beta, z, tol, cap_radius=2.0 * policy.series_radius)
    return value


def _ray_upper_limit(c1: float, q: float) -> float:
    u = 1.0 + 46.0 / c1
    if q > 0.0:
        u = 1.0 + (46.0 + q * math.log(u)) / c1
    return u


def _hankel_J(
    alpha: float,
    p: float,
    q: float,
    z: complex,
    theta: float,
    c1: float,
    c2: float,
    u_max: float,
    ray_panels: int,
    arc_panels: int,
) -> complex:
    gx = _GL_NODES
    gw = _GL_WEIGHTS
    edges = np.linspace(1.0, u_max, ray_panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    u = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    w = (half[:, None] * gw[None, :]).ravel()
    uq = u**q
    ua = u**alpha
    total = 0j
    for sgn in (1.0, -1.0):
        direction = cmath.exp(1j * sgn * theta)
        grow = np.exp(u * complex(-c1, sgn * c2))
        den = ua * direction - z
        ray = np.sum(grow * uq / den * w)
        total += sgn * alpha * cmath.exp(1j * sgn * theta * (p + 1.0)) * ray

    arc_edges = np.linspace(-theta, theta, arc_panels + 1)
    mid = 0.5 * (arc_edges[1:] + arc_edges[:-1])
    half = 0.5 * (arc_edges[1:] - arc_edges[:-1])
    y = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    wy = (half[:, None] * gw[None, :]).ravel()
    eiy = np.exp(1j * y)
    arc = np.exp(np.exp(1j * y / alpha)) * np.exp(1j * y * (p + 1.0)) / (eiy - z)
    total += 1j * np.sum(arc * wy)
    return complex(total)


def _contour_eval(
    alpha: float,
    beta: float,
    z: complex,
    contour: HankelContour | None,
    policy: MLRegimePolicy,
) -> tuple[complex, float]:
    if not 0.0 < alpha < 1.0:
        raise ContourViolation("contour representation requires 0 < alpha < 1")
    z = complex(z)
    if abs(z) < 1.0 - 1e-12:
        raise ContourViolation(f"|z| = {abs(z):.4g} < 1: use the series inside the unit disc")
    if contour is None:
        contour = HankelContour.for_argument(alpha, z, policy)
    theta = contour.theta
    phi = abs(cmath.phase(z))
    if theta <= _HALF_PI * alpha:
        raise ContourViolation(f"theta = {theta:.4f} <= pi*alpha/2: path angle too small")
    if theta >= min(math.pi * alpha, math.pi):
        raise ContourViolation(f"theta = {theta:.4f} >= min(pi*alpha, pi): path angle too large")
    if phi <= theta:
        raise ContourViolation(
            f"z with |arg z| = {phi:.4f} is not to the left of the contour (theta = {theta:.4f})"
        )

    p = (1.0 - beta) / alpha + 1.0
    q = 2.0 * alpha - beta
    eps_ang = theta / alpha - _HALF_PI
    c1 = math.sin(eps_ang)
    c2 = math.cos(eps_ang)
    u_max = _ray_upper_limit(c1, q)
    gamma_term = -rgamma_real(beta - alpha) / z
    prefactor = 1.0 / (2j * math.pi * alpha * z)

    ray_panels0 = max(8, int(0.35 * (u_max - 1.0) * c2) + 4, contour.node_count // 12)
    arc_panels0 = max(6, contour.node_count // 16)
    prev = None
    for level in range(6):
        J = _hankel_J(
            alpha, p, q, z, theta, c1, c2, u_max,
            ray_panels0 << level, arc_panels0 << level,
        )
        value = gamma_term + J * prefactor
        if prev is not None:
            delta = abs(value - prev)
            if delta <= 1e-12 * (1.0 + abs(value)):
                if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                    raise QuadratureFailure("contour quadrature produced a non-finite value")
                return value, delta + 1e-15 * (1.0 + abs(value))
        prev = value
    raise QuadratureFailure(
        f"node doubling did not stabilize for alpha={alpha}, beta={beta}, z={z}"
    )


def ml_contour(
    alpha: float,
    beta: float,
    z: complex,
    contour: HankelContour | None = None,
    policy: MLRegimePolicy = DEFAULT_POLICY,
) -> complex:
    """Hankel-path value of E_{alpha,beta}(z) for z left of the contour."""
    value, _ = _contour_eval(alpha, beta, z, contour, policy)
    return value


def evaluate_detailed(
    alpha: float,
    beta: float,
    z: complex,
    policy: MLRegimePolicy = DEFAULT_POLICY,
) -> MLEvaluation:
    """Regime-dispatching evaluation with the regime tag and an error estimate."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    z = complex(z)
    if z == 0:
        value = 1.0 + 0j if beta == 1.0 else complex(rgamma_real(beta))
        return MLEvaluation(value, "zero", abs(value) * 1e-15)
    if alpha == 1.0 and beta == 1.0:
        value = cmath.exp(z)
        return MLEvaluation(value, "exp", abs(value) * 3e-16)

    digits = _cancellation_digits(alpha, z)
    if abs(z) <= policy.series_radius and digits <= _FLOAT_CANCEL_DIGITS:
        value, err, regime = _series_eval(alpha, beta, z, policy.series_tol, cap_radius=None)
        return MLEvaluation(value, regime, err)
    if alpha < 1.0 and abs(z) >= 1.0 and abs(cmath.phase(z)) > _HALF_PI + 1e-12:
        value, err = _contour_eval(alpha, beta, z, None, policy)
        return MLEvaluation(value, "contour", err)
    if digits <= _HP_CANCEL_DIGITS:
        value, err, regime = _series_eval(alpha, beta, z, policy.series_tol, cap_radius=None)
        return MLEvaluation(value, regime, err)
    raise NonConvergence(
        f"no regime covers alpha={alpha}, beta={beta}, z={z}: "
        f"|arg z| <= pi/2 and the series would cancel ~{digits:.0f} digits"
    )


def ml_two(
    alpha: float,
    beta: float,
    z: complex,
    policy: MLRegimePolicy = DEFAULT_POLICY,
) -> complex:
    """Two-parameter Mittag-Leffler value E_{alpha,beta}(z)."""
    return evaluate_detailed(alpha, beta, z, policy).value


def ml_one(beta: float, z: complex, policy: MLRegimePolicy = DEFAULT_POLICY) -> complex:
    """One-parameter value E_beta(z); beta = 1 collapses to exp."""
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    if beta == 1.0:
        return cmath.exp(complex(z))
    return ml_two(beta, 1.0, z, policy)


# ------------------------------------------------------------ observables


def spectral_margin(lam: complex) -> float:
    """|arg lambda| - pi/2; positive iff the sector condition holds."""
    return abs(math.atan2(lam.imag, lam.real)) - _HALF_PI


def _check_observable_args(rho: float, lam: complex, t0: float) -> None:
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"order must lie in (0, 1], got {rho}")
    if t0 < 1.0:
        raise InvalidTime(f"observation time must satisfy t0 >= 1, got {t0}")
    margin = spectral_margin(complex(lam))
    if margin <= 0.0:
        raise SpectralConditionViolation(
            f"|arg lambda| = {margin + _HALF_PI:.6f} <= pi/2 for lambda = {lam}"
        )


def caputo_observable(
    rho: float, lam: complex, t0: float, policy: MLRegimePolicy = DEFAULT_POLICY
) -> complex:
    """E_rho(lambda t0^rho): the per-mode factor observed under Caputo data."""
    lam = complex(lam)
    _check_observable_args(rho, lam, t0)
    if rho == 1.0:
        return cmath.exp(lam * t0)
    return ml_one(rho, lam * t0**rho, policy)


def rl_observable(
    rho: float, lam: complex, t0: float, policy: MLRegimePolicy = DEFAULT_POLICY
) -> complex:
    """t0^(rho-1) E_{rho,rho}(lambda t0^rho): the Riemann-Liouville mode factor."""
    lam = complex(lam)
    _check_observable_args(rho, lam, t0)
    if rho == 1.0:
        return cmath.exp(lam * t0)
    return t0 ** (rho - 1.0) * ml_two(rho, rho, lam * t0**rho, policy)


def rl_sign_factor(lam: complex, tol: float = 1e-9) -> float:
    """sign(|Re lambda| - |Im lambda|); degenerate when they coincide."""
    lam = complex(lam)
    margin = abs(lam.real) - abs(lam.imag)
    if abs(margin) <= tol * (1.0 + abs(lam)):
        raise DegenerateSignCondition(
            f"|Re lambda| = |Im lambda| within tolerance for lambda = {lam}"
        )
    return 1.0 if margin > 0.0 else -1.0


def _re_exp_clamped(lam: complex, t: float) -> float:
    # Re(exp(lam*t)) with the mathematical sign preserved through underflow;
    # certificates need the sign at the beta = 1 endpoint, not the magnitude.
    x = lam.real * t
    c = math.cos(lam.imag * t)
    if x < -745.0:
        return math.copysign(TINY, c) if c != 0.0 else TINY
    v = math.exp(x) * c
    if v == 0.0 and c != 0.0:
        v = math.copysign(TINY, c)
    return v


def monotone_map_caputo(
    rho: float, lam: complex, t0: float, policy: MLRegimePolicy = DEFAULT_POLICY
) -> float:
    """Re E_rho(lambda t0^rho), the map bisected in the Caputo recovery."""
    lam = complex(lam)
    _check_observable_args(rho, lam, t0)
    if rho == 1.0:
        return _re_exp_clamped(lam, t0)
    return ml_one(rho, lam * t0**rho, policy).real


def monotone_map_rl(
    rho: float, lam: complex, t0: float, policy: MLRegimePolicy = DEFAULT_POLICY
) -> float:
    """sign(|Re l|-|Im l|) * Re(t0^(rho-1) E_{rho,rho}(lambda t0^rho))."""
    lam = complex(lam)
    _check_observable_args(rho, lam, t0)
    s = rl_sign_factor(lam)
    if rho == 1.0:
        return s * _re_exp_clamped(lam, t0)
    return s * (t0 ** (rho - 1.0) * ml_two(rho, rho, lam * t0**rho, policy)).real
