"""Entropy, Dirichlet forms and log-Sobolev residuals on grid fields."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, NamedTuple, Union

import numpy as np
from scipy.special import xlogy

from .errors import DomainError, PositivityError
from .operators import GeneralKernel, LevySymbol, RadialKernel
from .spectral import KernelMatrix, ScalarField, _as_matrix, _same_grid, evolve_spectral

_ROW_BLOCK = 512


def _phi(s):
    return xlogy(s, s)


def entropy(f: ScalarField, p: float = 1.0) -> float:
    """``Ent(|f|^p) = sum Phi(|f|^p) h^N - Phi(sum |f|^p h^N)``, ``Phi(s) = s log s``."""
    if not p >= 1.0:
        raise DomainError("entropy needs p >= 1")
    a = np.abs(f.values) ** p
    cell = f.grid.cell
    return float(np.sum(_phi(a)) * cell - _phi(np.sum(a) * cell))


def _check_symbol(symbol):
    if not symbol.is_levy:
        raise DomainError(f"{symbol.name} does not define a Dirichlet form")


def dirichlet_form_fourier(symbol: LevySymbol, f: ScalarField, g: ScalarField) -> float:
    """``E(f, g) = (h^N / n^N) sum_xi m(|xi|) Re(F f conj F g)``, the Plancherel side."""
    _check_symbol(symbol)
    _same_grid(f, g)
    grid = f.grid
    m = np.asarray(symbol.eval(grid.wavenumbers()), dtype=float)
    fh = np.fft.fftn(f.values)
    gh = fh if g is f else np.fft.fftn(g.values)
    return float(np.sum(m * (fh * np.conj(gh)).real) * grid.cell / grid.n**grid.N)


def _pairwise_sum(W, a, b, combine=None):
    """``1/2 sum_ij W_ij c(a, b)_ij`` with ``c = (a_i - a_j)(b_i - b_j)`` by default.

    Blocked over rows so memory stays bounded on larger grids.
    """
    total = 0.0
    M = W.shape[0]
    for start in range(0, M, _ROW_BLOCK):
        stop = min(M, start + _ROW_BLOCK)
        if combine is None:
            block = (a[start:stop, None] - a[None, :]) * (b[start:stop, None] - b[None, :])
        else:
            block = combine(slice(start, stop))
        total += float(np.sum(W[start:stop] * block))
    return 0.5 * total


def dirichlet_form_kernel(
    kernel: Union[RadialKernel, GeneralKernel, KernelMatrix], f: ScalarField, g: ScalarField
) -> float:
    """``1/2 sum_i sum_{j != i} (f_i - f_j)(g_i - g_j) J(x_i, x_j) h^{2N}``, periodic distance."""
    _same_grid(f, g)
    K = _as_matrix(kernel, f.grid)
    a = f.values.ravel()
    b = g.values.ravel()
    return _pairwise_sum(K.W, a, b) * f.grid.cell


class FourierForm:
    """Dirichlet form of a translation-invariant symbol, evaluated spectrally."""

    def __init__(self, symbol: LevySymbol):
        _check_symbol(symbol)
        self.symbol = symbol
        self.name = f"fourier[{symbol.name}]"

    def __call__(self, f, g):
        return dirichlet_form_fourier(self.symbol, f, g)


class KernelForm:
    """Dirichlet form of a sampled kernel; the matrix is assembled once per grid."""

    def __init__(self, kernel, rho_max=None):
        self.kernel = kernel
        self.rho_max = rho_max
        self._cache = {}
        self.name = f"kernel[{getattr(kernel, 'name', '?')}]"

    def matrix(self, grid) -> KernelMatrix:
        if isinstance(self.kernel, KernelMatrix):
            return _as_matrix(self.kernel, grid)
        if grid not in self._cache:
            self._cache[grid] = _as_matrix(self.kernel, grid, self.rho_max)
        return self._cache[grid]

    def __call__(self, f, g):
        return dirichlet_form_kernel(self.matrix(f.grid), f, g)


DirichletForm = Union[FourierForm, KernelForm]


@dataclass(frozen=True)
class LogSobFamily:
    """Coefficients of ``Ent(|f|^p) <= C(p) |f|_p^p + D(p) E(|f|^{p-2} f, f)``."""

    name: str
    C: Callable[[float], float]
    D: Callable[[float], float]

    def check(self, ps) -> None:
        for p in ps:
            if not self.D(p) > 0:
                raise DomainError(f"D({p}) must be positive")


class LogSobTerms(NamedTuple):
    entropy: float
    mass_term: float
    energy: float
    residual: float


def _signed_power(values, e):
    return np.sign(values) * np.abs(values) ** e


def plog_sobolev_terms(f: ScalarField, p: float, fam: LogSobFamily, form: DirichletForm) -> LogSobTerms:
    if not p >= 2.0:
        raise DomainError("p-log-Sobolev residuals need p >= 2")
    ent = entropy(f, p)
    mass = fam.C(p) * f.norm(p) ** p
    energy = fam.D(p) * form(f.with_values(_signed_power(f.values, p - 1.0)), f)
    return LogSobTerms(ent, mass, energy, ent - mass - energy)


def plog_sobolev_residual(f: ScalarField, p: float, fam: LogSobFamily, form: DirichletForm) -> float:
    """``Ent(|f|^p) - C(p)|f|_p^p - D(p) E(|f|^{p-2} f, f)``; the inequality holds iff <= 0."""
    return plog_sobolev_terms(f, p, fam, form).residual


def stroock_varopoulos_gap(f: ScalarField, p: float, form: DirichletForm) -> float:
    """``p^2/(4(p-1)) E(f^{p-1}, f) - E(f^{p/2}, f^{p/2})`` for ``f >= 0``.

    With a kernel form the two energies are combined pair by pair, where each
    term is nonnegative, so the discrete gap is nonnegative up to rounding.
    """
    if not p > 1.0:
        raise DomainError("Stroock-Varopoulos needs p > 1")
    if np.any(f.values < 0):
        raise DomainError("Stroock-Varopoulos gap is defined for f >= 0")
    c = p * p / (4.0 * (p - 1.0))
    a = f.values.ravel()
    if isinstance(form, KernelForm):
        W = form.matrix(f.grid).W
        ap1 = a ** (p - 1.0)
        ah = a ** (0.5 * p)

        def combine(rows):
            d = a[rows, None] - a[None, :]
            d1 = ap1[rows, None] - ap1[None, :]
            dh = ah[rows, None] - ah[None, :]
            return c * d1 * d - dh * dh

        return _pairwise_sum(W, None, None, combine) * f.grid.cell
    fp1 = f.with_values(f.values ** (p - 1.0))
    fh = f.with_values(f.values ** (0.5 * p))
    return c * form(fp1, f) - form(fh, fh)


def ddt_identity_check(
    symbol: LevySymbol, u0: ScalarField, q: Callable[[float], float], t: float, step: float = 1e-3
) -> float:
    """Mismatch in ``d/dt int u^q + q E(u^{q-1}, u) = (q'/q)(Ent(u^q) + F log F)``.

    ``F(t) = int u(t)^{q(t)}``; its derivative is a centred difference with
    the given step, so the mismatch is second order in it. ``q'`` uses the
    fourth-order centred stencil, since ``q`` is cheap and often stiff.
    """
    if np.any(u0.values <= 0):
        raise PositivityError("identity check needs strictly positive data")
    if t - 2.0 * step < 0:
        raise DomainError("t must be at least twice the difference step")

    def F(s):
        u = evolve_spectral(symbol, u0, s, leakage=False)
        return float(np.sum(u.values ** q(s)) * u0.grid.cell)

    lhs_dt = (F(t + step) - F(t - step)) / (2.0 * step)
    dq = (8.0 * (q(t + step) - q(t - step)) - (q(t + 2 * step) - q(t - 2 * step))) / (12.0 * step)
    u = evolve_spectral(symbol, u0, t, leakage=False)
    qt = q(t)
    energy = dirichlet_form_fourier(symbol, u.with_values(u.values ** (qt - 1.0)), u)
    Ft = float(np.sum(u.values**qt) * u0.grid.cell)
    rhs = dq / qt * (entropy(u, qt) + _phi(Ft))
    return abs(lhs_dt + qt * energy - rhs)


RESIDUAL_COLUMNS = ("field-id", "p", "entropy", "mass-term", "energy", "residual")


def residual_csv_text(rows, comments=()) -> str:
    """CSV for rows of ``(field_id, p, LogSobTerms)``, preceded by ``# `` comment lines."""
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESIDUAL_COLUMNS)
    for fid, p, terms in rows:
        w.writerow([fid, repr(float(p))] + [repr(float(x)) for x in terms])
    return buf.getvalue()


def write_residual_csv(path, rows, comments=()) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(residual_csv_text(rows, comments))


def plancherel_defect(f: ScalarField) -> float:
    """Relative gap between ``|f|_2^2`` computed in physical and frequency space."""
    phys = float(np.sum(f.values**2) * f.grid.cell)
    spec = float(np.sum(np.abs(np.fft.fftn(f.values)) ** 2) * f.grid.cell / f.grid.n**f.grid.N)
    return abs(phys - spec) / max(phys, 1e-300)
