"""Hypercontractivity machinery: exponent ODE, blow-up times, constants, loops.

Conventions: a p-log-Sobolev family ``(C, D)`` drives the exponent ODE
``q' = q^2 / D(q)``, ``q(0) = p``, and the bound
``A_p(t) = exp(int_p^{q(t)} C(a)/a^2 da)``. For log(I - Laplacian) the family
is ``C(p) = A_p'(0) N/2``, ``D = N/2`` and ``q(t) = Np / (N - 2pt)``.
"""

from __future__ import annotations

import functools
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, DomainError, InconclusiveError, LeakageError
from .functionals import LogSobFamily
from .operators import LevySymbol, RadialKernel, _check_dim, levy_khintchine
from .quadrature import DEFAULT_QUAD, QuadratureSpec, TailIntegral, integrate, tail_integral
from .spectral import LeakageWarning, ScalarField, evolve_spectral, leakage_fraction
from .special import EULER_GAMMA, digamma, log_gamma, sphere_area

Q_MAX_DEFAULT = 1e4


# ---------------------------------------------------------------------------
# Exponent ODE


@dataclass(frozen=True)
class QTrace:
    """Solution of the exponent ODE; ``q(t)`` is available on ``[0, t_stop]``."""

    t: np.ndarray
    q: np.ndarray
    hit_q_max: bool
    t_stop: float
    _sol: Callable = field(repr=False, compare=False)

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0) or np.any(t_arr > self.t_stop * (1 + 1e-12)):
            raise DomainError(f"q(t) is only known on [0, {self.t_stop}]")
        w = self._sol(t_arr)[0]
        out = 1.0 / w
        return float(out) if out.ndim == 0 else out


def q_ode_solve(
    D: Callable[[float], float],
    p: float,
    t_end: float,
    q_max: float = Q_MAX_DEFAULT,
    rtol: float = 1e-13,
    atol: float = 1e-16,
) -> QTrace:
    """Integrate ``q' = q^2/D(q)``, ``q(0) = p`` up to ``t_end`` or until ``q >= q_max``.

    The ODE is advanced in the reciprocal ``w = 1/q``, where it reads
    ``w' = -1/D(1/w)``: blow-up of ``q`` becomes a regular zero crossing of
    ``w``, so adaptive DOP853 steps stay well conditioned right up to ``q_max``.
    """
    if not p > 0 or not t_end >= 0:
        raise DomainError("need p > 0 and t_end >= 0")
    w_min = 1.0 / q_max

    def rhs(_, w):
        q = 1.0 / w[0]
        d = D(q)
        if not d > 0:
            raise DomainError(f"D({q}) = {d} must be positive")
        return [-1.0 / d]

    def reached(_, w):
        return w[0] - w_min

    reached.terminal = True
    reached.direction = -1
    if t_end == 0:
        return QTrace(np.array([0.0]), np.array([p]), False, 0.0, lambda t: np.full((1,) + np.shape(t), 1.0 / p))
    sol = solve_ivp(
        rhs, (0.0, t_end), [1.0 / p], method="DOP853", rtol=rtol, atol=atol, dense_output=True, events=reached
    )
    if sol.status == -1:
        raise ConvergenceError(f"exponent ODE failed: {sol.message}")
    hit = sol.status == 1
    return QTrace(sol.t, 1.0 / sol.y[0], hit, float(sol.t[-1]), sol.sol)


def _integral_or_raise(res: TailIntegral, what: str) -> float:
    if res.status == "inconclusive":
        raise InconclusiveError(f"{what}: tail behaviour could not be classified")
    return res.value


def blowup_time(D: Callable[[float], float], p: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``t_inf = int_p^inf D(a)/a^2 da``; ``math.inf`` when the integral diverges."""
    res = tail_integral(lambda a: D(a) / (a * a), p, quad)
    if res.status == "divergent":
        return math.inf
    return _integral_or_raise(res, "blow-up time")


def exponent_integral(C: Callable[[float], float], p: float, quad: QuadratureSpec = DEFAULT_QUAD) -> TailIntegral:
    """Classify ``int_p^inf C(a)/a^2 da`` (finite means eventually ultracontractive)."""
    return tail_integral(lambda a: C(a) / (a * a), p, quad)


def time_to_reach(D: Callable[[float], float], p: float, q: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Time for the exponent to climb from ``p`` to ``q``: ``int_p^q D(a)/a^2 da``."""
    return integrate(lambda a: D(a) / (a * a), p, q, quad).value


# ---------------------------------------------------------------------------
# Constants for log(I - Laplacian)


def q_log(p: float, t: float, N: int) -> float:
    """Exponent ``Np/(N - 2pt)`` reached by the log(I - Laplacian) flow."""
    if not 0 <= t < N / (2.0 * p):
        raise DomainError(f"t must lie in [0, N/(2p)) = [0, {N / (2 * p)})")
    return N * p / (N - 2.0 * p * t)


def _riesz_log_prefactor(t, N):
    return log_gamma(0.5 * N - t) - log_gamma(t) - t * math.log(4.0) - 0.5 * N * math.log(math.pi)


def _log_g_p(p, t, N):
    omega = sphere_area(N)
    e = (N - 2.0 * t) / N
    bracket = (p * (N - 2 * t) / (N - 2 * p * t)) ** e + (p * (N - 2 * t) / (N * (p - 1))) ** e
    return (
        -math.log(2.0 * t)
        + e * math.log(omega / N)
        + math.log((N * (p - 1) + 2 * p * t) / (p * p))
        + math.log(bracket)
    )


def A_p_bound(p: float, t: float, N: int) -> float:
    """Hypercontractivity constant of ``|u(t)|_{Np/(N-2pt)} <= A_p(t) |u0|_p``.

    Sharp for ``p = 2``; otherwise the weak-Young/Hardy-Littlewood-Sobolev
    upper bound ``F(t) g_p(t)``. The value at ``t = 0`` is the limit 1.
    """
    _check_dim(N)
    if not p > 1:
        raise DomainError("p must exceed 1")
    if not 0 <= t < N / (2.0 * p):
        raise DomainError(f"t must lie in [0, N/(2p)) = [0, {N / (2 * p)})")
    if t == 0:
        return 1.0
    if p == 2:
        log_a = (
            -t * math.log(4 * math.pi)
            + 0.5 * (log_gamma(0.5 * N - 2 * t) - log_gamma(0.5 * N + 2 * t))
            + (2 * t / N) * (log_gamma(N) - log_gamma(0.5 * N))
        )
        return math.exp(log_a)
    return math.exp(_riesz_log_prefactor(t, N) + _log_g_p(p, t, N))


def A_p_prime_zero(p: float, N: int) -> float:
    """``d/dt A_p(t)`` at ``t = 0`` in closed form.

    For ``p = 2`` this is ``-2 psi(N/2) - log(4 pi) + (2/N) log(Gamma(N)/Gamma(N/2))``.
    For other ``p`` it is the derivative of the ``F g_p`` bound; note the
    ``gamma N p (p - 1)`` term, checked against high-precision finite
    differences of :func:`A_p_bound`.
    """
    _check_dim(N)
    if not p > 1:
        raise DomainError("p must exceed 1")
    psi = digamma(0.5 * N)
    if p == 2:
        return -2.0 * psi - math.log(4 * math.pi) + (2.0 / N) * (log_gamma(N) - log_gamma(0.5 * N))
    g = EULER_GAMMA
    l2 = math.log(2.0)
    lp = math.log(p)
    lw = math.log(sphere_area(N) / N)
    lq = math.log(p / (p - 1.0))
    num = (
        -N * p * p * psi
        - 2 * N * p * p * l2
        + g * N * p * p
        + N * p * psi
        - g * N * p
        + 2 * N * p * l2
        + 2 * p**3
        - 2 * p * p * lp
        - 2 * p * p * lw
        - 4 * p * p
        + 4 * p * lp
        + 2 * p * lw
        - 2 * p * lq
        + 4 * p
        - 2 * lp
        + 2 * lq
    )
    return num / (N * p * (p - 1.0))


def _log_bessel_C(p, N):
    return A_p_prime_zero(p, N) * 0.5 * N


def _const(p, value):
    return value


def log_bessel_family(N: int) -> LogSobFamily:
    """``C(p) = A_p'(0) N/2``, ``D(p) = N/2`` for log(I - Laplacian)."""
    _check_dim(N)
    return LogSobFamily(
        f"logIminusDelta(N={N})", functools.partial(_log_bessel_C, N=N), functools.partial(_const, value=0.5 * N)
    )


def constant_family(C: float, D: float) -> LogSobFamily:
    return LogSobFamily(f"const(C={C:g},D={D:g})", functools.partial(_const, value=C), functools.partial(_const, value=D))


# ---------------------------------------------------------------------------
# Gross loop

# one-sided fourth-order stencil for f'(0)
_FD5 = (-25.0, 48.0, -36.0, 16.0, -3.0)


def derivative_at_zero(f: Callable[[float], float], h: float = 1e-4) -> float:
    return sum(c * f(k * h) for k, c in enumerate(_FD5)) / (12.0 * h)


def gross_forward(
    A_p: Callable[[float], float],
    q: Callable[[float], float],
    p: float,
    *,
    dA0: Optional[float] = None,
    h: float = 1e-4,
) -> tuple[float, float]:
    """``(C(p), D(p)) = (p^2 A_p'(0)/q'(0), p^2/q'(0))`` from a hypercontractive pair."""
    dq = derivative_at_zero(q, h)
    if not dq > 0:
        raise DomainError(f"degenerate exponent: q'(0) = {dq}")
    da = derivative_at_zero(A_p, h) if dA0 is None else dA0
    return p * p * da / dq, p * p / dq


def _gross_C(alpha, A_of, q_of, h):
    return gross_forward(A_of(alpha), q_of(alpha), alpha, h=h)[0]


def _gross_D(alpha, A_of, q_of, h):
    return gross_forward(A_of(alpha), q_of(alpha), alpha, h=h)[1]


def gross_family(A_of: Callable, q_of: Callable, h: float = 1e-4, name: str = "gross") -> LogSobFamily:
    """Family obtained by applying :func:`gross_forward` at every exponent.

    ``A_of(alpha)`` and ``q_of(alpha)`` return the functions ``t -> A_alpha(t)``
    and ``t -> q_alpha(t)``.
    """
    return LogSobFamily(
        name,
        functools.partial(_gross_C, A_of=A_of, q_of=q_of, h=h),
        functools.partial(_gross_D, A_of=A_of, q_of=q_of, h=h),
    )


def gross_backward(
    fam: LogSobFamily, p: float, t: float, quad: QuadratureSpec = DEFAULT_QUAD, q_max: float = Q_MAX_DEFAULT
) -> float:
    """``exp(int_p^{q(t)} C(a)/a^2 da)`` with ``q`` from the family's exponent ODE."""
    if t == 0:
        return 1.0
    tr = q_ode_solve(fam.D, p, t, q_max)
    if tr.hit_q_max:
        raise DomainError(f"exponent blew up before t={t}")
    qt = tr(t)
    return math.exp(integrate(lambda a: fam.C(a) / (a * a), p, qt, quad).value)


def gross_loop_time_form(p: float, t: float, N: int, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``exp(int_0^t A'_{q(s)}(0) ds)`` with ``q(s) = Np/(N - 2ps)``, the loop in the time variable."""
    if t == 0:
        return 1.0
    return math.exp(integrate(lambda s: A_p_prime_zero(q_log(p, s, N), N), 0.0, t, quad).value)


# ---------------------------------------------------------------------------
# Super- and ultracontractivity conversions


def super_beta(B: Callable[[float, float], float], q: float, eps: float) -> float:
    """``beta(eps) = (1 - 2/q)^{-1} log B(eps (1 - 2/q), q)``."""
    if not q > 2:
        raise DomainError("q must exceed 2")
    if not eps > 0:
        raise DomainError("eps must be positive")
    k = 1.0 - 2.0 / q
    return math.log(B(eps * k, q)) / k


def ultra_M(beta: Callable[[float], float], t: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``M(t) = (1/t) int_0^t beta(s) ds``; raises ConvergenceError if it diverges."""
    if not t > 0:
        raise DomainError("t must be positive")
    res = integrate(beta, 0.0, t, quad)
    # a 1/s singularity fools QUADPACK into a finite but wildly uncertain value
    if not res.error <= 1e-6 * max(1.0, abs(res.value)):
        raise ConvergenceError(f"M integral did not converge (err {res.error:.3g})")
    return res.value / t


# ---------------------------------------------------------------------------
# Verification runs


@dataclass(frozen=True)
class HyperRecord:
    t: float
    q: float
    norm: float
    bound: float
    ratio: float


@dataclass
class HyperTrace:
    records: list
    metadata: dict

    COLUMNS = ("t", "q", "norm", "bound", "ratio")

    def __post_init__(self):
        qs = [r.q for r in self.records]
        if qs and any(b <= a for a, b in zip(qs[:-1], qs[1:])):
            raise DomainError("q must increase strictly along a trace")
        for r in self.records:
            if not (math.isfinite(r.ratio) and r.ratio > 0):
                raise DomainError(f"ratio at t={r.t} must be finite and positive")

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    def csv_text(self, comments=()) -> str:
        lines = [f"# {line}" for line in comments]
        lines.append(",".join(self.COLUMNS))
        for r in self.records:
            lines.append(",".join(repr(float(getattr(r, c))) for c in self.COLUMNS))
        return "\n".join(lines) + "\n"

    def to_csv(self, path, comments=()) -> None:
        with open(path, "w") as fh:
            fh.write(self.csv_text(comments))

    def to_json(self) -> str:
        return json.dumps({"metadata": self.metadata, "records": [asdict(r) for r in self.records]}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "HyperTrace":
        data = json.loads(text)
        return cls([HyperRecord(**r) for r in data["records"]], data["metadata"])


LEAKAGE_ERROR_FRACTION = 1e-2


def run_hyper_experiment(
    symbol: LevySymbol,
    u0: ScalarField,
    p: float,
    times: Sequence[float],
    fam: Optional[LogSobFamily] = None,
    q_max: float = Q_MAX_DEFAULT,
) -> HyperTrace:
    """Evolve ``u0`` and compare ``|u(t)|_{q(t)}`` with ``A_p(t) |u0|_p``.

    For the log_bessel symbol without an explicit family the exponent is
    ``Np/(N - 2pt)`` and the bound :func:`A_p_bound`; otherwise ``q`` solves the
    family's exponent ODE and the bound is :func:`gross_backward`.
    """
    N = u0.grid.N
    times = sorted(float(t) for t in times)
    base = u0.norm(p)
    if base == 0:
        raise DomainError("u0 must be nonzero")
    if fam is None and symbol.name != "log_bessel":
        raise DomainError("a log-Sobolev family is needed for symbols other than log_bessel")
    trace = None
    if fam is not None:
        trace = q_ode_solve(fam.D, p, max(times), q_max)
        if trace.hit_q_max and trace.t_stop < max(times):
            raise DomainError(f"exponent reaches q_max at t={trace.t_stop:.6g}")
    records = []
    for t in times:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LeakageWarning)
            u = evolve_spectral(symbol, u0, t, leakage=False)
        frac = leakage_fraction(u)
        if frac > LEAKAGE_ERROR_FRACTION:
            raise LeakageError(f"{100 * frac:.2f}% of the mass reached the outer half of the box at t={t}")
        if frac > 1e-4:
            warnings.warn(f"leakage {frac:.3g} at t={t}", LeakageWarning, stacklevel=2)
        if fam is None:
            q = q_log(p, t, N)
            bound = A_p_bound(p, t, N) * base
        else:
            q = trace(t) if t > 0 else p
            bound = gross_backward(fam, p, t, q_max=q_max) * base
        norm = u.norm(q)
        records.append(HyperRecord(t, q, norm, bound, norm / bound))
    meta = {
        "symbol": symbol.name,
        "p": p,
        "family": fam.name if fam is not None else "A_p_bound",
        "grid": {"N": N, "L": u0.grid.L, "n": u0.grid.n},
    }
    return HyperTrace(records, meta)


@dataclass(frozen=True)
class DualityResult:
    forward_ratio: float
    dual_ratio: float
    bound: float


def duality_check(symbol: LevySymbol, u0: ScalarField, p: float, t: float) -> DualityResult:
    """Run the flow in both exponent directions at time ``t``.

    Forward: ``|S u0|_q / |u0|_p``. Dual: apply the flow to the norming
    functional ``v0 = |S u0|^{q-1} sign(S u0)`` and measure
    ``|S v0|_{p'} / |v0|_{q'}``; self-adjointness makes the same ``A_p(t)``
    bound the dual ratio, and Hölder puts it above the forward ratio.
    """
    N = u0.grid.N
    q = q_log(p, t, N)
    Su = evolve_spectral(symbol, u0, t, leakage=False)
    fwd = Su.norm(q) / u0.norm(p)
    v0 = Su.with_values(np.sign(Su.values) * np.abs(Su.values) ** (q - 1.0))
    Sv = evolve_spectral(symbol, v0, t, leakage=False)
    pc, qc = p / (p - 1.0), q / (q - 1.0)
    dual = Sv.norm(pc) / v0.norm(qc)
    return DualityResult(fwd, dual, A_p_bound(p, t, N))


# ---------------------------------------------------------------------------
# Threshold trichotomy

ULTRACONTRACTIVE = "ultracontractive"
STRONG_HYPER = "strong_hyper_eventual_ultra"
NOT_EVENTUALLY_ULTRA = "not_eventually_ultra"


@dataclass(frozen=True)
class ThresholdProbes:
    """Probe schedule: ``ell`` at ``r = 2^-k`` and the symbol on ``[xi_min, xi_max]``."""

    kmin: int = 4
    kmax: int = 24
    xi_min: float = 1e2
    xi_max: float = 1e4
    n_xi: int = 9
    times: tuple = (1.0, 2.0, 4.0)
    # increments of log ell decaying faster than k^-split sum to a finite limit
    split: float = 1.5
    flat_tol: float = 1e-9


@dataclass(frozen=True)
class ThresholdVerdict:
    verdict: str
    trend: str
    radii: tuple
    ell: tuple
    increment_decay: float
    xi: tuple
    m: tuple
    decay_exponents: dict
    m_log_slopes: tuple

    @property
    def decay_exponent_growth(self) -> float:
        """Late over early slope of ``m`` against ``log xi``: > 1 super-logarithmic, < 1 sub-logarithmic."""
        early, late = self.m_log_slopes
        return late / early if early else math.inf

    def to_dict(self):
        return asdict(self)


def _fit_slope(x, y):
    return float(np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)[0])


def classify_ell_limit(ell_values, probes: ThresholdProbes = ThresholdProbes()) -> tuple[str, float]:
    """Trend of ``ell(2^-k)`` as ``k`` grows: 'infinite', 'positive' or 'zero'.

    Increments of ``log ell`` between consecutive scales are examined: if they
    vanish, or shrink fast enough (power law steeper than ``k^-split``) to be
    summable, the limit is a positive constant; if they keep one sign and are
    not summable, ``log ell`` drifts to ``+-inf``. Mixed signs are inconclusive.
    """
    v = np.asarray(ell_values, dtype=float)
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        return ("zero" if np.any(v == 0) else "inconclusive"), math.nan
    d = np.diff(np.log(v))
    if np.all(np.abs(d) <= probes.flat_tol):
        return "positive", math.inf
    tail = d[len(d) // 2 :]
    if not (np.all(tail > 0) or np.all(tail < 0)):
        raise InconclusiveError("ell oscillates across probe scales")
    k = np.arange(len(d)) + probes.kmin
    ks, ds = k[len(d) // 2 :], np.abs(tail)
    decay = -_fit_slope(np.log(ks), np.log(ds))
    if decay >= probes.split:
        return "positive", decay
    return ("infinite" if tail[-1] > 0 else "zero"), decay


def classify_kernel_threshold(
    kernel: RadialKernel, probes: ThresholdProbes = ThresholdProbes(), quad: QuadratureSpec = DEFAULT_QUAD
) -> ThresholdVerdict:
    """Trichotomy by ``lim_{r -> 0} ell(r)``, corroborated by symbol growth.

    The Fourier probe fits ``e^{-t m(xi)} ~ xi^{-s(t)}`` on ``[xi_min, xi_max]``;
    ``s(t)`` grows linearly in ``t`` when ``m`` is logarithmic.
    """
    ks = np.arange(probes.kmin, probes.kmax + 1)
    radii = 2.0 ** (-ks.astype(float))
    ell = np.array([kernel.ell(r) for r in radii])
    trend, decay = classify_ell_limit(ell, probes)
    if trend == "inconclusive":
        raise InconclusiveError("ell limit could not be classified")
    verdict = {"infinite": ULTRACONTRACTIVE, "positive": STRONG_HYPER, "zero": NOT_EVENTUALLY_ULTRA}[trend]
    xi = np.geomspace(probes.xi_min, probes.xi_max, probes.n_xi)
    m = np.array([levy_khintchine(kernel, x, quad).value for x in xi])
    exps = {float(t): -_fit_slope(np.log(xi), -t * m) for t in probes.times}
    half = len(xi) // 2
    slopes = (_fit_slope(np.log(xi[: half + 1]), m[: half + 1]), _fit_slope(np.log(xi[half:]), m[half:]))
    return ThresholdVerdict(
        verdict, trend, tuple(radii), tuple(ell), float(decay), tuple(xi), tuple(m), exps, slopes
    )
