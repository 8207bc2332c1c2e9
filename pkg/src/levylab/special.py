"""Real Gamma, log-Gamma and digamma on the positive half line.

Only x > 0 is supported; the closed-form constants of the package never need
the reflection formula.
"""

import math

import numpy as np

from .errors import DomainError, OverflowDomainError

EULER_GAMMA = 0.57721566490153286060651209008240243

# Lanczos approximation, g = 607/128, 15 terms.
_LANCZOS_G_HALF = 671.0 / 128.0
_LANCZOS_COEF = (
    0.999999999999997092,
    57.1562356658629235,
    -59.5979603554754912,
    14.1360979747417471,
    -0.491913816097620199,
    0.339946499848118887e-4,
    0.465236289270485756e-4,
    -0.983744753048795646e-4,
    0.158088703224912494e-3,
    -0.210264441724104883e-3,
    0.217439618115212643e-3,
    -0.164318106536763890e-3,
    0.844182239838527433e-4,
    -0.261908384015814087e-4,
    0.368991826595316234e-5,
)
_SQRT_2PI = 2.5066282746310005024157652848110

_GAMMA_MAX_ARG = 170.0

# B_{2k} / (2k) for the asymptotic digamma series.
_DIGAMMA_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def _check_positive(x, name):
    if not (x > 0.0):
        raise DomainError(f"{name} requires x > 0, got {x!r}")


def _lanczos_series(x):
    s = _LANCZOS_COEF[0]
    for j, c in enumerate(_LANCZOS_COEF[1:], start=1):
        s += c / (x + j)
    return s


def gamma(x):
    """Gamma function for 0 < x <= 170."""
    x = float(x)
    _check_positive(x, "gamma")
    if x > _GAMMA_MAX_ARG:
        raise OverflowDomainError(f"gamma({x}) overflows double precision")
    if x < 0.5:
        return gamma(x + 1.0) / x
    if x == math.floor(x) and x <= 23.0:
        return float(math.factorial(int(x) - 1))
    t = x + _LANCZOS_G_HALF
    # pow in two halves keeps the intermediate finite up to x = 170
    half = pow(t, 0.5 * (x + 0.5))
    return _SQRT_2PI * half * (half * math.exp(-t)) * _lanczos_series(x) / x


def log_gamma(x):
    """Natural log of Gamma(x) for x > 0; finite for arguments far past 170."""
    x = float(x)
    _check_positive(x, "log_gamma")
    if x < 0.5:
        return log_gamma(x + 1.0) - math.log(x)
    if x <= 20.0:
        return math.log(gamma(x))
    t = x + _LANCZOS_G_HALF
    return (x + 0.5) * math.log(t) - t + math.log(_SQRT_2PI * _lanczos_series(x) / x)


def digamma(x):
    """Digamma psi = Gamma'/Gamma for x > 0."""
    x = float(x)
    _check_positive(x, "digamma")
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    for c in reversed(_DIGAMMA_ASYMPTOTIC):
        series = series * inv2 + c
    return acc + math.log(x) - 0.5 / x - series * inv2


def sphere_area(N):
    """Surface measure of the unit sphere in R^N (2 for N = 1)."""
    if int(N) != N or N < 1:
        raise DomainError(f"dimension must be a positive integer, got {N!r}")
    N = int(N)
    if N == 1:
        return 2.0
    if N == 2:
        return 2.0 * math.pi
    if N == 3:
        return 4.0 * math.pi
    return 2.0 * math.pi ** (N / 2.0) / gamma(N / 2.0)


def ball_volume(N):
    """Lebesgue measure of the unit ball in R^N."""
    return sphere_area(N) / N


gamma_vec = np.vectorize(gamma, otypes=[float])
digamma_vec = np.vectorize(digamma, otypes=[float])
