"""Adaptive quadrature helpers shared by the kernel, heat-kernel and ODE code.

Everything funnels through :func:`integrate`, a thin wrapper around QUADPACK
(``scipy.integrate.quad``) that turns silent accuracy warnings into
:class:`ConvergenceError` and always reports the error estimate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate as _sci

from .errors import ConvergenceError, InconclusiveError, SingularityError


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for every adaptive integral in the package.

    ``tail_cut`` is the fraction of the integrand peak below which a tail is
    dropped when an infinite range is truncated.
    """

    rtol: float = 1e-9
    atol: float = 0.0
    limit: int = 2**15
    tail_cut: float = 1e-16

    def looser(self, factor: float) -> "QuadratureSpec":
        return QuadratureSpec(self.rtol * factor, self.atol * factor, self.limit, self.tail_cut)


DEFAULT_QUAD = QuadratureSpec()


class QuadResult(NamedTuple):
    value: float
    error: float


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    quad: QuadratureSpec = DEFAULT_QUAD,
    *,
    points=None,
    weight: str | None = None,
    wvar=None,
    slack: float = 50.0,
) -> QuadResult:
    """Integrate ``f`` over ``[a, b]`` and fail loudly when QUADPACK gives up.

    QUADPACK often flags roundoff on integrals that are in fact converged to
    machine precision, so the returned error estimate is judged against
    ``slack`` times the requested tolerance rather than trusting the flag.
    """
    if a == b:
        return QuadResult(0.0, 0.0)
    kwargs = dict(epsabs=quad.atol, epsrel=quad.rtol, limit=quad.limit, full_output=1)
    if points is not None and weight is None and np.isfinite(a) and np.isfinite(b):
        pts = [p for p in points if a < p < b]
        if pts:
            kwargs["points"] = pts
    if weight is not None:
        kwargs["weight"] = weight
        kwargs["wvar"] = wvar
        if not np.isfinite(b):
            kwargs.pop("limit")
            kwargs["limlst"] = 200
            # QAWF ignores epsrel; size the absolute target by the first lobe
            lobe = abs(f(a)) * math.pi / abs(wvar)
            kwargs["epsabs"] = max(quad.atol, quad.rtol * lobe, 1e-300)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _sci.IntegrationWarning)
        out = _sci.quad(f, a, b, **kwargs)
    value, err = float(out[0]), float(out[1])
    ier = 0
    if len(out) > 3:
        ier = 1
        msg = out[3]
    if not np.isfinite(value):
        raise ConvergenceError(f"non-finite integral on [{a}, {b}]")
    budget = max(kwargs["epsabs"], quad.rtol * abs(value), 1e-300)
    if ier and err > slack * budget:
        raise ConvergenceError(
            f"quadrature on [{a}, {b}] missed tolerance: value={value:.6g}, err={err:.3g} ({msg})"
        )
    return QuadResult(value, err)


def _peak_log_var(a: float, b: float) -> float:
    """Location y* = e^{u*} of the maximum of a*u - e^u - b*e^{-u}."""
    root = math.sqrt(a * a + 4.0 * b)
    if a >= 0.0:
        return 0.5 * (a + root)
    return 2.0 * b / (root - a)


def subordination_integral(a: float, b: float, quad: QuadratureSpec = DEFAULT_QUAD) -> QuadResult:
    r"""Return :math:`\int_0^\infty s^{a-1} e^{-s} e^{-b/s}\,ds` for ``b >= 0``.

    Evaluated in the variable ``u = log s``, where the integrand
    ``exp(a u - e^u - b e^{-u})`` is a single smooth bump. The range is split
    at the bump and truncated where the integrand drops below
    ``quad.tail_cut`` of its peak.
    """
    if b < 0.0:
        raise ValueError("b must be nonnegative")
    if b == 0.0 and a <= 0.0:
        raise SingularityError(f"integral diverges at s=0 for a={a} <= 0 and b=0")
    y = _peak_log_var(a, b)
    u0 = math.log(y)

    def phi(u):
        return a * u - math.exp(u) - b * math.exp(-u)

    phi0 = phi(u0)
    floor = math.log(quad.tail_cut)
    width = 1.0 / math.sqrt(y + b / y)

    def edge(direction):
        step = width
        u = u0
        for _ in range(200):
            u_next = u + direction * step
            if phi(u_next) - phi0 < floor:
                return u_next
            u = u_next
            step *= 1.6
        raise ConvergenceError("could not bracket the integrand tail")

    lo, hi = edge(-1.0), edge(1.0)

    def f(u):
        return math.exp(phi(u) - phi0)

    left = integrate(f, lo, u0, quad)
    right = integrate(f, u0, hi, quad)
    scale = math.exp(phi0)
    return QuadResult((left.value + right.value) * scale, (left.error + right.error) * scale)


@dataclass(frozen=True)
class TailIntegral:
    """Outcome of an improper integral over ``[start, inf)``."""

    status: str  # "convergent" | "divergent" | "inconclusive"
    value: float
    error: float
    increments: tuple[float, ...]


def tail_integral(
    f: Callable[[float], float],
    start: float,
    quad: QuadratureSpec = DEFAULT_QUAD,
    *,
    ratio: float = 2.0,
    min_panels: int = 12,
    max_panels: int = 80,
) -> TailIntegral:
    """Classify and, when possible, evaluate ``int_start^inf f``.

    The range is cut into geometric panels ``[start*ratio^k, start*ratio^(k+1)]``.
    If the panel contributions settle into a stable geometric decay (a power
    law in the upper limit) the remaining tail is extrapolated in closed form;
    if they stop decaying the integral is declared divergent. Anything else is
    reported as inconclusive rather than guessed.
    """
    total = 0.0
    err = 0.0
    incs: list[float] = []
    lo = start
    for k in range(max_panels):
        hi = lo * ratio
        res = integrate(f, lo, hi, quad)
        total += res.value
        err += res.error
        incs.append(res.value)
        lo = hi
        if k + 1 < min_panels:
            continue
        last = incs[-6:]
        scale = max(abs(total), 1e-300)
        if all(abs(d) <= 1e-17 * scale for d in last):
            return TailIntegral("convergent", total, err, tuple(incs))
        if any(d == 0.0 for d in last) or not (all(d > 0 for d in last) or all(d < 0 for d in last)):
            continue
        rhos = [last[j + 1] / last[j] for j in range(len(last) - 1)]
        rho = rhos[-1]
        spread = max(rhos) - min(rhos)
        if rho <= 0.9 and spread <= 1e-3 * (1.0 - rho):
            tail = last[-1] * rho / (1.0 - rho)
            if abs(tail) <= quad.rtol * scale or k + 1 == max_panels:
                return TailIntegral("convergent", total + tail, err + abs(tail) * spread / (1.0 - rho), tuple(incs))
        if min(rhos) >= 0.97 and k + 1 >= 2 * min_panels:
            return TailIntegral("divergent", math.inf if total > 0 else -math.inf, math.inf, tuple(incs))
    return TailIntegral("inconclusive", total, math.inf, tuple(incs))


def improper_or_raise(f, start, quad=DEFAULT_QUAD, **kw) -> float:
    """Value of a convergent tail integral, ``inf`` if divergent, else raise."""
    res = tail_integral(f, start, quad, **kw)
    if res.status == "inconclusive":
        raise InconclusiveError(
            f"cannot classify tail integral from {start}: last increments {res.increments[-4:]}"
        )
    return res.value
