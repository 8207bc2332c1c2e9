"""Heat kernel of log(I - Laplacian), its Riesz counterpart and weak-L^p norms.

The flow ``u_t + log(I - Laplacian) u = 0`` has the Bessel potential kernel of
order ``2t`` as fundamental solution,

    H_t(r) = r^{2t-N} / (4^t pi^{N/2} Gamma(t)) * g(r),
    g(r)   = int_0^inf u^{N/2-t-1} e^{-u} e^{-r^2/(4u)} du,

and ``g(0) = Gamma(N/2 - t)`` turns the prefactor into the Riesz kernel
``R_t`` whenever ``t < N/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError
from .operators import _check_dim
from .quadrature import DEFAULT_QUAD, QuadratureSpec, QuadResult, integrate, subordination_integral
from .special import gamma, log_gamma, sphere_area


def _check_time(t):
    if not t > 0.0:
        raise DomainError(f"time must be positive, got {t}")


def riesz_constant(t: float, N: int) -> float:
    """``Gamma(N/2 - t) / (4^t pi^{N/2} Gamma(t))`` for ``0 < t < N/2``."""
    _check_dim(N)
    if not 0.0 < t < 0.5 * N:
        raise DomainError(f"Riesz kernel needs 0 < t < N/2 = {0.5 * N}, got t={t}")
    return math.exp(log_gamma(0.5 * N - t) - log_gamma(t) - t * math.log(4.0)) / math.pi ** (0.5 * N)


def bessel_heat_kernel(r: float, t: float, N: int, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``H_t(r)`` by quadrature of the changed-variable integral."""
    return bessel_heat_kernel_error(r, t, N, quad).value


def bessel_heat_kernel_error(r, t, N, quad: QuadratureSpec = DEFAULT_QUAD) -> QuadResult:
    _check_dim(N)
    _check_time(t)
    r = float(r)
    if r < 0.0:
        raise DomainError("r must be nonnegative")
    if r == 0.0:
        if t <= 0.5 * N:
            raise SingularityError(f"H_t is unbounded at the origin for t={t} <= N/2")
        val = math.exp(log_gamma(t - 0.5 * N) - log_gamma(t)) / (4.0 * math.pi) ** (0.5 * N)
        return QuadResult(val, 0.0)
    g = subordination_integral(0.5 * N - t, 0.25 * r * r, quad)
    pref = r ** (2.0 * t - N) / (4.0**t * math.pi ** (0.5 * N) * gamma(t))
    return QuadResult(pref * g.value, pref * g.error)


def gauss_kernel(r, tau, N):
    """Heat kernel of the Laplacian at time ``tau``."""
    return (4.0 * math.pi * tau) ** (-0.5 * N) * math.exp(-r * r / (4.0 * tau))


def transition_density(tau: float, t: float) -> float:
    """Gamma-subordinator density ``tau^{t-1} e^{-tau} / Gamma(t)``."""
    if not tau > 0.0:
        raise DomainError(f"tau must be positive, got {tau}")
    _check_time(t)
    return math.exp((t - 1.0) * math.log(tau) - tau - log_gamma(t))


def subordinated_heat_kernel(r: float, t: float, N: int, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``int_0^inf G_tau(r) Psi_t(tau) d tau``, an independent route to ``H_t(r)``.

    Integrated directly in ``tau`` on panels around the integrand's peak.
    """
    _check_dim(N)
    _check_time(t)
    if not r > 0.0:
        raise DomainError("r must be positive")

    def f(tau):
        return gauss_kernel(r, tau, N) * transition_density(tau, t)

    # log of the integrand is (t - N/2 - 1) log tau - tau - r^2/(4 tau) + const
    a = t - 0.5 * N - 1.0
    b = 0.25 * r * r
    peak = (a + math.sqrt(a * a + 4.0 * b)) / 2.0 if a >= 0 else 2.0 * b / (math.sqrt(a * a + 4.0 * b) - a)
    edges = sorted({0.0, peak / 64, peak / 8, peak, 8 * peak, 64 * peak + 50.0})
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += integrate(f, lo, hi, quad).value
    total += integrate(f, edges[-1], math.inf, quad).value
    return total


def riesz_kernel(r: float, t: float, N: int) -> float:
    """``R_t(r) = r^{2t-N} Gamma(N/2 - t) / (4^t pi^{N/2} Gamma(t))``."""
    c = riesz_constant(t, N)
    if not r > 0.0:
        raise DomainError("r must be positive")
    return c * r ** (2.0 * t - N)


def weak_norm_exact(N: int, t: float, which: str = "bessel") -> float:
    """Weak ``L^{N/(N-2t)}`` norm of ``H_t`` (``which='bessel'``) or ``R_t``.

    Both kernels share the value ``(omega/N)^{(N-2t)/N} Gamma(N/2-t)/(4^t pi^{N/2} Gamma(t))``.
    """
    if which not in ("bessel", "riesz"):
        raise DomainError(f"which must be 'bessel' or 'riesz', got {which!r}")
    c = riesz_constant(t, N)
    return (sphere_area(N) / N) ** ((N - 2.0 * t) / N) * c


def heat_kernel_mass(t: float, N: int, quad: QuadratureSpec = DEFAULT_QUAD, rmax: float = 80.0) -> float:
    """``int_{R^N} H_t`` by radial quadrature, ``omega int_0^inf r^{N-1} H_t(r) dr``.

    On ``[0, 1]`` with ``t < N/2`` the substitution ``w = r^{2t}`` removes the
    integrable ``r^{2t-1}`` singularity.
    """
    _check_dim(N)
    _check_time(t)
    omega = sphere_area(N)
    pref = 1.0 / (4.0**t * math.pi ** (0.5 * N) * gamma(t))

    def g(r):
        return subordination_integral(0.5 * N - t, 0.25 * r * r, quad).value

    if t < 0.5 * N:
        inv = 1.0 / (2.0 * t)
        core = integrate(lambda w: g(w**inv) if w > 0 else gamma(0.5 * N - t), 0.0, 1.0, quad).value * inv
    else:
        core = integrate(lambda r: r ** (2.0 * t - 1.0) * g(r), 0.0, 1.0, quad).value
    tail = integrate(lambda r: r ** (2.0 * t - 1.0) * g(r), 1.0, rmax, quad, points=(4.0, 16.0)).value
    return omega * pref * (core + tail)


@dataclass(frozen=True)
class RadialProfile:
    """Samples of a radially non-increasing, nonnegative function."""

    radii: np.ndarray
    values: np.ndarray
    N: int
    t: float

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "values", v)
        if r.shape != v.shape or r.ndim != 1:
            raise DomainError("radii and values must be 1-D arrays of equal length")
        if np.any(np.diff(r) <= 0) or np.any(r <= 0):
            raise DomainError("radii must be positive and strictly increasing")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise DomainError("profile values must be finite and nonnegative")

    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.values) <= 0))


def default_radii(rmin: float = 1e-5, rmax: float = 50.0, n: int = 2048) -> np.ndarray:
    return np.geomspace(rmin, rmax, n)


def bessel_profile(N, t, radii=None, quad: QuadratureSpec = DEFAULT_QUAD) -> RadialProfile:
    radii = default_radii() if radii is None else np.asarray(radii, dtype=float)
    vals = np.array([bessel_heat_kernel(r, t, N, quad) for r in radii])
    return RadialProfile(radii, vals, N, t)


def riesz_profile(N, t, radii=None) -> RadialProfile:
    radii = default_radii() if radii is None else np.asarray(radii, dtype=float)
    return RadialProfile(radii, riesz_constant(t, N) * radii ** (2.0 * t - N), N, t)


def weak_norm_estimate(profile: RadialProfile, p: float, refine: int = 4) -> float:
    """``sup_lambda lambda * |{f > lambda}|^{1/p}`` for a radial profile.

    The level-set radius ``r_lambda`` is read off the profile by linear
    interpolation of ``log r`` against ``log f``; ``refine`` extra levels are
    placed between consecutive samples.
    """
    if not p > 1.0:
        raise DomainError("p must exceed 1")
    if not profile.is_monotone():
        raise DomainError("weak_norm_estimate needs a non-increasing profile")
    pos = profile.values > 0
    if not np.any(pos):
        return 0.0
    r = profile.radii[pos]
    f = profile.values[pos]
    # strip flat runs so log f is strictly decreasing for interpolation
    keep = np.concatenate(([True], np.diff(f) < 0))
    r, f = r[keep], f[keep]
    c = sphere_area(profile.N) / profile.N
    if len(f) == 1:
        return float(f[0] * (c * r[0] ** profile.N) ** (1.0 / p))
    logf = np.log(f)[::-1]
    logr = np.log(r)[::-1]
    frac = np.linspace(0.0, 1.0, refine + 1, endpoint=False)
    levels = (logf[:-1, None] + frac[None, :] * np.diff(logf)[:, None]).ravel()
    levels = np.concatenate((levels, logf[-1:]))
    lr = np.interp(levels, logf, logr)
    est = np.exp(levels) * (c * np.exp(profile.N * lr)) ** (1.0 / p)
    return float(est.max())
