"""Lévy symbols, radial kernels and the kernel-to-symbol map.

A translation-invariant Lévy operator is described either by its radial
multiplier ``m(|xi|)`` (:class:`LevySymbol`) or by its kernel profile
``J(r) = ell(r) * r**-N`` (:class:`RadialKernel`). The two are linked by

    m(|xi|) = int (1 - cos(z . xi)) J(|z|) dz,

which :func:`levy_khintchine` evaluates as a one-dimensional radial integral.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize, special as sps

from .errors import ConvergenceError, DomainError, SymmetryError
from .quadrature import (
    DEFAULT_QUAD,
    QuadratureSpec,
    QuadResult,
    integrate,
    subordination_integral,
    tail_integral,
)
from .special import gamma, sphere_area

SUPPORTED_DIMS = (1, 2, 3)


def _check_dim(N):
    if N not in SUPPORTED_DIMS:
        raise DomainError(f"dimension must be one of {SUPPORTED_DIMS}, got {N!r}")


def _vectorize(func):
    """Apply a scalar function elementwise, keeping scalars scalar."""

    def wrapped(r):
        arr = np.asarray(r, dtype=float)
        if arr.ndim == 0:
            return float(func(float(arr)))
        out = np.empty(arr.shape)
        flat = arr.ravel()
        # many grids repeat the same distance; evaluate each once
        uniq, inv = np.unique(flat, return_inverse=True)
        vals = np.array([func(float(x)) for x in uniq])
        out.ravel()[:] = vals[inv]
        return out

    return wrapped


# ---------------------------------------------------------------------------
# Symbols


def _sym_laplacian(r):
    return np.asarray(r, dtype=float) ** 2


def _sym_fractional(r, sigma):
    return np.asarray(r, dtype=float) ** sigma


def _sym_log_bessel(r):
    return np.log1p(np.asarray(r, dtype=float) ** 2)


def _sym_log_riesz(r):
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(r**2)


def _sym_zero_order_gaussian(r, kappa, s):
    r = np.asarray(r, dtype=float)
    return -kappa * np.expm1(-s * r**2)


@dataclass(frozen=True)
class LevySymbol:
    """Radial Fourier multiplier ``m(r)``, ``r = |xi|``."""

    name: str
    func: Callable = field(repr=False, compare=False)
    is_levy: bool = True
    params: tuple = ()

    def eval(self, r):
        out = self.func(r)
        return float(out) if np.ndim(out) == 0 else out

    __call__ = eval


def builtin_symbol(kind: str, **params) -> LevySymbol:
    """Named symbols: laplacian, fractional(sigma), log_bessel, log_riesz,
    zero_order_gaussian(kappa, s)."""
    if kind == "laplacian":
        return LevySymbol("laplacian", _sym_laplacian)
    if kind == "fractional":
        sigma = float(params.get("sigma", 1.0))
        if not 0.0 < sigma < 2.0:
            raise DomainError(f"fractional order must lie in (0, 2), got {sigma}")
        return LevySymbol(
            f"fractional(sigma={sigma:g})",
            functools.partial(_sym_fractional, sigma=sigma),
            params=(("sigma", sigma),),
        )
    if kind in ("log_bessel", "log"):
        return LevySymbol("log_bessel", _sym_log_bessel)
    if kind == "log_riesz":
        return LevySymbol("log_riesz", _sym_log_riesz, is_levy=False)
    if kind == "zero_order_gaussian":
        kappa = float(params.get("kappa", 1.0))
        s = float(params.get("s", 1.0))
        if kappa <= 0 or s <= 0:
            raise DomainError("zero_order_gaussian needs kappa > 0 and s > 0")
        return LevySymbol(
            f"zero_order_gaussian(kappa={kappa:g},s={s:g})",
            functools.partial(_sym_zero_order_gaussian, kappa=kappa, s=s),
            params=(("kappa", kappa), ("s", s)),
        )
    raise DomainError(f"unknown symbol kind {kind!r}")


def sandwich_constants(symbol: LevySymbol, radii) -> tuple[float, float]:
    """Tightest C1, C2 with C1 min(1,r^2) <= m(r) <= C2 max(1,r^2) on ``radii``."""
    r = np.asarray(radii, dtype=float)
    r = r[r > 0]
    m = np.asarray(symbol.eval(r), dtype=float)
    lower = m / np.minimum(1.0, r**2)
    upper = m / np.maximum(1.0, r**2)
    return float(lower.min()), float(upper.max())


# ---------------------------------------------------------------------------
# Kernels


def kernel_log(r: float, N: int, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    r"""Kernel of log(I - Laplacian) in dimension ``N``.

    Uses ``J(r) = pi^{-N/2} r^{-N} int_0^inf s^{N/2-1} e^{-s} e^{-r^2/(4s)} ds``,
    the heat-kernel subordination integral after rescaling time.
    """
    _check_dim(N)
    r = float(r)
    if not r > 0.0:
        raise DomainError(f"kernel_log needs r > 0, got {r}")
    return _ell_log(r, N, quad) * r ** (-N)


def kernel_log_error(r: float, N: int, quad: QuadratureSpec = DEFAULT_QUAD) -> QuadResult:
    """Like :func:`kernel_log` but also returns the quadrature error estimate."""
    res = subordination_integral(0.5 * N, 0.25 * r * r, quad)
    scale = math.pi ** (-0.5 * N) * r ** (-N)
    return QuadResult(res.value * scale, res.error * scale)


def _ell_log(r, N, quad=DEFAULT_QUAD):
    if r == 0.0:
        return gamma(0.5 * N) / math.pi ** (0.5 * N)
    return subordination_integral(0.5 * N, 0.25 * r * r, quad).value * math.pi ** (-0.5 * N)


def fractional_constant(N: int, sigma: float) -> float:
    """Normalisation making ``C |z|^{-N-sigma}`` the kernel of ``|xi|^sigma``."""
    return (
        sigma
        * 2.0 ** (sigma - 1.0)
        * gamma(0.5 * (N + sigma))
        / (math.pi ** (0.5 * N) * gamma(1.0 - 0.5 * sigma))
    )


def _ell_power(r, c, alpha):
    return c * r ** (-alpha)


def _ell_const(r, c):
    return c


def _ell_inv_log(r):
    return 1.0 / math.log(math.e + 1.0 / r)


def _ell_gaussian(r, N, kappa, s):
    return kappa * r**N * (4.0 * math.pi * s) ** (-0.5 * N) * math.exp(-r * r / (4.0 * s))


@dataclass(frozen=True)
class RadialKernel:
    """Radial kernel ``J(r) = ell(r) r^{-N}``, optionally supported in ``r < cutoff``."""

    name: str
    ell_func: Callable = field(repr=False)
    N: int = 1
    cutoff: Optional[float] = None

    def __post_init__(self):
        _check_dim(self.N)
        if self.cutoff is not None and not self.cutoff > 0:
            raise DomainError("cutoff must be positive")

    def ell(self, r):
        def one(x):
            if x <= 0.0:
                raise DomainError("ell is defined for r > 0")
            if self.cutoff is not None and x >= self.cutoff:
                return 0.0
            return self.ell_func(x)

        return _vectorize(one)(r)

    def J(self, r):
        r_arr = np.asarray(r, dtype=float)
        return self.ell(r_arr) * r_arr ** (-self.N)

    __call__ = J


def radial_kernel(kind: str, N: int = 1, **params) -> RadialKernel:
    """Named kernels.

    ``log``: kernel of log(I - Laplacian);
    ``fractional(sigma)``: normalised kernel of ``|xi|^sigma``;
    ``truncated(c)``: ``ell = c`` on ``r < 1``;
    ``power_truncated(alpha)``: ``ell = r^-alpha`` on ``r < 1``;
    ``inv_log_truncated``: ``ell = 1/log(e + 1/r)`` on ``r < 1``;
    ``zero_order_gaussian(kappa, s)``: bounded kernel with symbol ``kappa(1 - e^{-s r^2})``.
    """
    _check_dim(N)
    if kind == "log":
        quad = params.get("quad", DEFAULT_QUAD)
        return RadialKernel(f"log(N={N})", functools.partial(_ell_log, N=N, quad=quad), N)
    if kind == "fractional":
        sigma = float(params.get("sigma", 1.0))
        if not 0.0 < sigma < 2.0:
            raise DomainError(f"fractional order must lie in (0, 2), got {sigma}")
        c = fractional_constant(N, sigma)
        return RadialKernel(
            f"fractional(sigma={sigma:g},N={N})", functools.partial(_ell_power, c=c, alpha=sigma), N
        )
    if kind == "truncated":
        c = float(params.get("c", 1.0))
        return RadialKernel(f"truncated(c={c:g},N={N})", functools.partial(_ell_const, c=c), N, 1.0)
    if kind == "power_truncated":
        alpha = float(params.get("alpha", 0.5))
        return RadialKernel(
            f"power_truncated(alpha={alpha:g},N={N})",
            functools.partial(_ell_power, c=1.0, alpha=alpha),
            N,
            1.0,
        )
    if kind == "inv_log_truncated":
        return RadialKernel(f"inv_log_truncated(N={N})", _ell_inv_log, N, 1.0)
    if kind == "zero_order_gaussian":
        kappa = float(params.get("kappa", 1.0))
        s = float(params.get("s", 1.0))
        return RadialKernel(
            f"zero_order_gaussian(kappa={kappa:g},s={s:g},N={N})",
            functools.partial(_ell_gaussian, N=N, kappa=kappa, s=s),
            N,
        )
    raise DomainError(f"unknown kernel kind {kind!r}")


@dataclass(frozen=True)
class GeneralKernel:
    """Kernel ``J(x, y)`` on point arrays of shape ``(..., N)``; symmetric by contract."""

    name: str
    func: Callable = field(repr=False)
    N: int = 1

    def eval(self, x, y):
        return np.asarray(self.func(np.asarray(x, float), np.asarray(y, float)), dtype=float)

    __call__ = eval

    def symmetry_defect(self, n_pairs: int = 10_000, scale: float = 5.0, seed: int = 0) -> float:
        """Max relative |J(x,y) - J(y,x)| over random pairs in ``[-scale, scale]^N``."""
        rng = np.random.default_rng(seed)
        x = rng.uniform(-scale, scale, size=(n_pairs, self.N))
        y = rng.uniform(-scale, scale, size=(n_pairs, self.N))
        a, b = self.eval(x, y), self.eval(y, x)
        denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300)
        return float(np.max(np.abs(a - b) / denom))

    def check_symmetric(self, tol: float = 1e-10, **kw) -> None:
        defect = self.symmetry_defect(**kw)
        if defect > tol:
            raise SymmetryError(f"kernel {self.name} asymmetry {defect:.3g} exceeds {tol:g}")


def _translation_invariant(x, y, radial):
    d = np.linalg.norm(np.asarray(x) - np.asarray(y), axis=-1)
    out = np.zeros(d.shape)
    pos = d > 0
    out[pos] = radial.J(d[pos])
    return out


def translation_invariant(radial: RadialKernel) -> GeneralKernel:
    """``J(x, y) = J(|x - y|)`` as a general kernel."""
    return GeneralKernel(
        f"ti[{radial.name}]", functools.partial(_translation_invariant, radial=radial), radial.N
    )


# ---------------------------------------------------------------------------
# Kernel -> symbol


def _one_minus_angular_average(N, x):
    """1 - (mean of cos(z . xi) over the sphere |z| = rho), ``x = rho |xi|``."""
    if N == 1:
        s = math.sin(0.5 * x)
        return 2.0 * s * s
    if N == 2:
        if x < 1e-3:
            x2 = x * x
            return x2 / 4.0 - x2 * x2 / 64.0
        return 1.0 - float(sps.j0(x))
    if x < 1e-3:
        x2 = x * x
        return x2 / 6.0 - x2 * x2 / 120.0
    return 1.0 - math.sin(x) / x


@functools.lru_cache(maxsize=256)
def tail_radius(kernel: RadialKernel, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Radius past which ``ell`` is below ``quad.tail_cut`` of its size near 1.

    Only exponentially fast tails are truncated; if ``ell`` is still above the
    cut at ``rho = 2^10`` the tail is treated as algebraic and kept infinite.
    """
    if kernel.cutoff is not None:
        return kernel.cutoff
    ref = abs(kernel.ell_func(1.0))
    for k in range(1, 11):
        rho = 2.0**k
        val = abs(kernel.ell_func(rho))
        ref = max(ref, val)
        if val <= quad.tail_cut * ref:
            return rho
    return math.inf


@functools.lru_cache(maxsize=256)
def levy_condition(kernel: RadialKernel, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Return ``int J(|z|) min(1, |z|^2) dz``; raise DomainError when it diverges."""
    omega = sphere_area(kernel.N)

    def inner(rho):
        return rho * kernel.ell_func(rho)

    def outer(rho):
        return kernel.ell_func(rho) / rho

    # panels [2^-(k+1), 2^-k] deep in the origin must keep shrinking
    deep = [integrate(inner, 2.0 ** -(k + 1), 2.0**-k, quad).value for k in (40, 41)]
    if deep[0] > 0 and not deep[1] < (1.0 - 1e-6) * deep[0]:
        raise DomainError(f"Lévy condition fails near the origin for {kernel.name}")
    try:
        near = integrate(inner, 0.0, min(1.0, kernel.cutoff or 1.0), quad).value
    except ConvergenceError as exc:
        raise DomainError(f"Lévy condition fails near the origin for {kernel.name}") from exc
    far = 0.0
    R = tail_radius(kernel, quad)
    if R > 1.0:
        if math.isfinite(R):
            far = integrate(outer, 1.0, R, quad).value
        else:
            res = tail_integral(outer, 1.0, quad)
            if res.status != "convergent":
                raise DomainError(f"Lévy condition tail is {res.status} for {kernel.name}")
            far = res.value
    total = omega * (near + far)
    if not math.isfinite(total):
        raise DomainError(f"Lévy condition fails for {kernel.name}")
    return total


@functools.lru_cache(maxsize=4)
def _j0_zeros(count):
    return sps.jn_zeros(0, count)


def _bessel_oscillatory(f, a, R, r, quad, max_chunks=4000):
    """``int_a^R J0(rho r) f(rho) d rho`` by zero-to-zero panels and partial-sum averaging."""
    zeros = _j0_zeros(max_chunks) / r
    breaks = [a] + [z for z in zeros if a < z < R]
    if math.isfinite(R):
        breaks.append(R)

    def g(rho):
        return float(sps.j0(rho * r)) * f(rho)

    partial = []
    total = 0.0
    err = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        res = integrate(g, lo, hi, quad)
        total += res.value
        err += res.error
        partial.append(total)
    if math.isfinite(R) and breaks[-1] == R:
        return QuadResult(total, err)
    # alternating tail: repeated averaging of consecutive partial sums
    seq = np.array(partial[-16:])
    prev = seq
    while len(seq) > 2:
        prev = seq
        seq = 0.5 * (seq[1:] + seq[:-1])
    est = float(seq[-1])
    extrap_err = float(abs(seq[-1] - prev[-1]))
    if extrap_err > max(1e3 * quad.rtol * abs(est), 1e-14):
        raise ConvergenceError(f"Bessel tail did not settle: err {extrap_err:.3g}")
    return QuadResult(est, err + extrap_err)


def levy_khintchine(kernel: RadialKernel, r: float, quad: QuadratureSpec = DEFAULT_QUAD) -> QuadResult:
    r"""Symbol of a radial Lévy kernel at ``|xi| = r``.

    ``m(r) = omega_{N-1} int_0^inf (1 - A_N(rho r)) ell(rho) / rho d rho`` with the
    spherical average ``A_1 = cos``, ``A_2 = J_0``, ``A_3 = sinc``. The range
    is split at ``rho = 1/r``: below it the integrand is smooth, above it the
    non-oscillatory and oscillatory parts are integrated separately, the
    latter with QUADPACK's Fourier weights (N = 1, 3) or zero-to-zero Bessel
    panels (N = 2).
    """
    r = float(r)
    if r < 0.0:
        raise DomainError("levy_khintchine needs r >= 0")
    if r == 0.0:
        return QuadResult(0.0, 0.0)
    levy_condition(kernel, quad)
    N = kernel.N
    omega = sphere_area(N)
    ell = kernel.ell_func
    R = tail_radius(kernel, quad)
    a = min(R, 1.0 / r)

    def near_f(rho):
        return _one_minus_angular_average(N, rho * r) * ell(rho) / rho

    near = integrate(near_f, 0.0, a, quad)
    value, err = near.value, near.error
    if a < R:

        def plain_f(rho):
            return ell(rho) / rho

        plain = integrate(plain_f, a, R, quad)
        if N == 1:
            osc = integrate(plain_f, a, R, quad, weight="cos", wvar=r)
        elif N == 3:
            osc = integrate(lambda rho: ell(rho) / (rho * rho * r), a, R, quad, weight="sin", wvar=r)
        else:
            osc = _bessel_oscillatory(plain_f, a, R, r, quad)
        value += plain.value - osc.value
        err += plain.error + osc.error
    return QuadResult(omega * value, omega * err)


def symbol_from_kernel(kernel: RadialKernel, quad: QuadratureSpec = DEFAULT_QUAD) -> LevySymbol:
    """Wrap :func:`levy_khintchine` as a (slow) :class:`LevySymbol`."""

    def m(r, kernel=kernel, quad=quad):
        return levy_khintchine(kernel, r, quad).value

    return LevySymbol(f"lk[{kernel.name}]", _vectorize(m))


# ---------------------------------------------------------------------------
# Multiplier bounds


def psi1(kernel: RadialKernel, r: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``int_r^1 ell(s)/s ds`` for ``0 < r < 1``."""
    if not 0.0 < r < 1.0:
        raise DomainError("psi1 needs 0 < r < 1")
    return integrate(lambda s: kernel.ell(s) / s, r, 1.0, quad).value


def psi2(kernel: RadialKernel, r: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``r^-2 int_0^r s ell(s) ds`` for ``r > 0``."""
    if not r > 0.0:
        raise DomainError("psi2 needs r > 0")
    pts = [kernel.cutoff] if kernel.cutoff is not None else None
    return integrate(lambda s: s * kernel.ell(s), 0.0, r, quad, points=pts).value / (r * r)


@dataclass(frozen=True)
class PsiBoundFit:
    """Fitted constants in ``m(1/r) <= c1 psi1(r) + c2 psi2(r)`` and the calibration data."""

    c1: float
    c2: float
    radii: tuple
    m: tuple
    psi1: tuple
    psi2: tuple

    def slack(self):
        """Per-radius ``c1 psi1 + c2 psi2 - m``; nonnegative on the calibration grid."""
        return tuple(self.c1 * a + self.c2 * b - mm for a, b, mm in zip(self.psi1, self.psi2, self.m))


def fit_psi_bound(kernel: RadialKernel, radii=None, quad: QuadratureSpec = DEFAULT_QUAD) -> PsiBoundFit:
    """Smallest ``c1 + c2`` (both >= 0) making the psi bound hold on ``radii``."""
    if radii is None:
        radii = np.geomspace(1e-3, 0.9, 12)
    radii = [float(x) for x in radii]
    m = [levy_khintchine(kernel, 1.0 / x, quad).value for x in radii]
    p1 = [psi1(kernel, x, quad) for x in radii]
    p2 = [psi2(kernel, x, quad) for x in radii]
    A = -np.column_stack([p1, p2])
    res = optimize.linprog(c=[1.0, 1.0], A_ub=A, b_ub=-np.array(m), bounds=[(0, None), (0, None)])
    if not res.success:
        raise ConvergenceError(f"psi bound fit failed: {res.message}")
    # nudge up so the fitted bound holds despite solver round-off
    c1, c2 = (float(v) * (1.0 + 1e-9) for v in res.x)
    return PsiBoundFit(c1, c2, tuple(radii), tuple(m), tuple(p1), tuple(p2))
