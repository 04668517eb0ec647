"""Real gamma function via the Lanczos approximation (g=7, 9 terms).

Relative error is ~1e-15 on [0.5, 30] and stays below 1e-13 after
reflection on (0, 0.5).  The reciprocal form absorbs the poles at the
non-positive integers (returns 0 there), which is what the series and
contour evaluators need.
"""

from __future__ import annotations

import math

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_series(x: float) -> float:
    # x >= 0.5 expected; series in the shifted variable x-1
    y = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i in range(1, 9):
        acc += _LANCZOS_COEF[i] / (y + i)
    return acc


def sinpi(x: float) -> float:
    """sin(pi*x) computed without the catastrophic loss near integers."""
    n = math.floor(x)
    r = x - n
    if r > 0.5:
        r -= 1.0
        n += 1
    s = math.sin(math.pi * r)
    return s if n % 2 == 0 else -s


def gamma_real(x: float) -> float:
    """Gamma(x) for real non-pole x."""
    if x == math.floor(x) and x <= 0.0:
        raise ValueError(f"gamma pole at x={x}")
    if x < 0.5:
        return math.pi / (sinpi(x) * gamma_real(1.0 - x))
    y = x - 1.0
    t = y + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (y + 0.5) * math.exp(-t) * _lanczos_series(x)


def lgamma_real(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if x <= 0.0:
        raise ValueError(f"lgamma_real needs x > 0, got {x}")
    if x < 0.5:
        # log reflection; sin(pi x) > 0 on (0, 1/2)
        return math.log(math.pi) - math.log(sinpi(x)) - lgamma_real(1.0 - x)
    y = x - 1.0
    t = y + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (y + 0.5) * math.log(t) - t + math.log(_lanczos_series(x))


def rgamma_real(x: float) -> float:
    """1/Gamma(x) for real x; exactly 0 at the poles x = 0, -1, -2, ..."""
    if x == math.floor(x) and x <= 0.0:
        return 0.0
    if x >= 0.5:
        lg = lgamma_real(x)
        if lg > 745.0:
            return 0.0
        return math.exp(-lg)
    # reflection: 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi
    return sinpi(x) * gamma_real(1.0 - x) / math.pi
