"""Evolution of u_t + L u = 0 on a periodic box standing in for R^N.

Two solvers share the grid types:

* :func:`evolve_spectral` multiplies Fourier coefficients by ``exp(-t m)``,
  exact in time for translation-invariant operators;
* :func:`evolve_kernel_stepper` runs forward Euler on the dense discrete
  operator ``(L f)_i = sum_{j != i} (f_i - f_j) J(x_i, x_j) h^N``, for kernels
  that need not be translation invariant.
"""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import DomainError, SingularityError, StabilityError, SymmetryError
from .operators import GeneralKernel, LevySymbol, RadialKernel, _check_dim
from .quadrature import DEFAULT_QUAD, integrate, tail_integral
from .special import sphere_area


class LeakageWarning(UserWarning):
    """Mass has reached the outer half of the periodic box."""


LEAKAGE_TOLERANCE = 1e-4


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid with ``n`` points per axis on ``[-L/2, L/2)^N``."""

    N: int
    L: float
    n: int

    def __post_init__(self):
        _check_dim(self.N)
        if not self.L > 0:
            raise DomainError("box length must be positive")
        if self.n < 2 or self.n & (self.n - 1):
            raise DomainError(f"points per axis must be a power of two, got {self.n}")

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.N

    @property
    def cell(self) -> float:
        return self.h**self.N

    def axis(self) -> np.ndarray:
        return -0.5 * self.L + self.h * np.arange(self.n)

    def coords(self) -> list:
        return np.meshgrid(*([self.axis()] * self.N), indexing="ij")

    def points(self) -> np.ndarray:
        """Grid points as an ``(n^N, N)`` array in row-major order."""
        return np.stack([c.ravel() for c in self.coords()], axis=-1)

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.coords()))

    def wavenumbers(self) -> np.ndarray:
        """``|xi|`` on the FFT layout, ``xi_k = 2 pi k / L``."""
        k = 2.0 * math.pi * np.fft.fftfreq(self.n, d=self.h)
        ks = np.meshgrid(*([k] * self.N), indexing="ij")
        return np.sqrt(sum(kk * kk for kk in ks))

    def field(self, values) -> "ScalarField":
        return ScalarField(self, values)

    def sample(self, func) -> "ScalarField":
        """Field from ``func(*coords)``."""
        return ScalarField(self, func(*self.coords()))


@dataclass(frozen=True)
class ScalarField:
    """Real samples on a :class:`TorusGrid`; value semantics (the array is copied)."""

    grid: TorusGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.size != self.grid.n**self.grid.N:
            raise DomainError(f"expected {self.grid.n ** self.grid.N} samples, got {v.size}")
        v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise DomainError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def norm(self, p: float = 2.0) -> float:
        return lp_norm(self.values, self.grid.cell, p)

    def mean(self) -> float:
        return float(self.values.mean())

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.cell)

    def inner(self, other: "ScalarField") -> float:
        _same_grid(self, other)
        return float(np.sum(self.values * other.values) * self.grid.cell)

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.grid, values)

    def __sub__(self, other):
        _same_grid(self, other)
        return self.with_values(self.values - other.values)


def _same_grid(f, g):
    if f.grid != g.grid:
        raise DomainError("fields live on different grids")


def lp_norm(values, cell: float, p: float) -> float:
    """``(sum |f|^p cell)^{1/p}``, or ``max |f|`` for ``p = inf``; safe for large ``p``."""
    a = np.abs(np.asarray(values, dtype=float))
    top = float(a.max()) if a.size else 0.0
    if top == 0.0:
        return 0.0
    if math.isinf(p):
        return top
    if not p > 0:
        raise DomainError("p must be positive")
    return top * float(np.sum((a / top) ** p) * cell) ** (1.0 / p)


def leakage_fraction(u: ScalarField) -> float:
    """Share of the L^1 mass outside the central half ``|x_k| < L/4`` of the box."""
    a = np.abs(u.values)
    total = a.sum()
    if total == 0.0:
        return 0.0
    inside = np.ones(u.grid.shape, dtype=bool)
    for c in u.grid.coords():
        inside &= np.abs(c) < 0.25 * u.grid.L
    return float(a[~inside].sum() / total)


def check_leakage(u: ScalarField, tol: float = LEAKAGE_TOLERANCE) -> float:
    frac = leakage_fraction(u)
    if frac > tol:
        warnings.warn(
            f"{100 * frac:.4f}% of the mass lies in the outer half of the box", LeakageWarning, stacklevel=3
        )
    return frac


# ---------------------------------------------------------------------------
# Spectral path


def evolve_spectral(symbol: LevySymbol, u0: ScalarField, t: float, *, leakage: bool = True) -> ScalarField:
    """``u(t) = F^{-1}[exp(-t m(|xi|)) F u0]`` in one exact step."""
    if not t >= 0.0:
        raise DomainError("time must be nonnegative")
    grid = u0.grid
    k = grid.wavenumbers()
    uh = np.fft.fftn(u0.values)
    if symbol.is_levy:
        mult = np.exp(-t * np.asarray(symbol.eval(k), dtype=float))
    else:
        # only the log(-Laplacian) flow lands here; it is defined up to t = N/(2p)
        # and, with the zero mode excluded, for mean-free L^2 data
        if t >= 0.25 * grid.N:
            raise DomainError(f"{symbol.name} flow of L^2 data is undefined past t = N/4")
        dc = abs(uh.flat[0]) / max(1.0, np.abs(uh).max())
        if t > 0 and dc > 1e-12:
            raise SingularityError(f"{symbol.name} flow needs mean-free data")
        mult = np.zeros_like(k)
        nz = k > 0
        mult[nz] = np.exp(-t * np.asarray(symbol.eval(k[nz]), dtype=float))
        if t == 0:
            mult[~nz] = 1.0
    if not np.all(np.isfinite(mult)):
        raise DomainError("symbol produced non-finite multipliers")
    out = np.fft.ifftn(uh * mult).real
    u = ScalarField(grid, out)
    if leakage:
        check_leakage(u)
    return u


# ---------------------------------------------------------------------------
# Kernel path


@dataclass(frozen=True)
class KernelMatrix:
    """Dense weights ``W_ij = J(x_i, x_j) h^N`` (zero diagonal) on a grid.

    ``discarded`` is the L^1 kernel mass dropped by the interaction radius.
    """

    grid: TorusGrid
    W: np.ndarray = field(repr=False)
    rho_max: float
    discarded: float
    name: str = ""

    def rowsum_max(self) -> float:
        return float(self.W.sum(axis=1).max())

    def apply(self, f: np.ndarray) -> np.ndarray:
        """``(L f)_i = sum_j W_ij (f_i - f_j)`` on the flattened field."""
        return self.W.sum(axis=1) * f - self.W @ f

    def modulated(self, theta: np.ndarray) -> "KernelMatrix":
        """Pointwise weights ``W_ij (1 + theta_ij)``; ``theta`` must be symmetric."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != self.W.shape:
            raise DomainError("theta must match the kernel matrix shape")
        W = self.W * (1.0 + theta)
        _check_matrix_symmetry(W, self.name)
        return KernelMatrix(self.grid, W, self.rho_max, self.discarded, f"{self.name}*(1+theta)")


def _check_matrix_symmetry(W, name, tol=1e-10):
    scale = float(np.abs(W).max()) or 1.0
    defect = float(np.abs(W - W.T).max()) / scale
    if defect > tol:
        raise SymmetryError(f"kernel {name} asymmetry {defect:.3g} exceeds {tol:g}")


def periodic_displacements(grid: TorusGrid) -> np.ndarray:
    """Nearest-image displacement ``x_j - x_i`` for every pair, shape ``(M, M, N)``."""
    pts = grid.points()
    d = pts[None, :, :] - pts[:, None, :]
    d -= grid.L * np.round(d / grid.L)
    return d


def assemble_kernel_matrix(
    kernel: Union[RadialKernel, GeneralKernel], grid: TorusGrid, rho_max: Optional[float] = None
) -> KernelMatrix:
    """Sample the kernel on all pairs at nearest periodic images, truncated at ``rho_max``.

    A general kernel is evaluated as ``J(x_i, x_i + d_ij)`` with ``d_ij`` the
    nearest-image displacement; the result must be symmetric to 1e-10.
    """
    if kernel.N != grid.N:
        raise DomainError("kernel and grid dimensions differ")
    rho_max = 0.25 * grid.L if rho_max is None else float(rho_max)
    d = periodic_displacements(grid)
    dist = np.linalg.norm(d, axis=-1)
    mask = (dist > 0) & (dist <= rho_max)
    W = np.zeros(dist.shape)
    if isinstance(kernel, RadialKernel):
        W[mask] = kernel.J(dist[mask]) * grid.cell
        omega = sphere_area(grid.N)
        ell = kernel.ell_func
        R = kernel.cutoff if kernel.cutoff is not None else math.inf
        if rho_max >= R:
            discarded = 0.0
        elif math.isinf(R):
            res = tail_integral(lambda r: ell(r) / r, rho_max, DEFAULT_QUAD.looser(100))
            discarded = omega * res.value
        else:
            discarded = omega * integrate(lambda r: ell(r) / r, rho_max, R).value
    else:
        pts = grid.points()
        x = np.broadcast_to(pts[:, None, :], d.shape)
        full = np.zeros(dist.shape)
        off = dist > 0
        full[off] = kernel.eval(x[off], (x + d)[off]) * grid.cell
        _check_matrix_symmetry(full, kernel.name)
        W[mask] = full[mask]
        discarded = float(np.where(mask | ~off, 0.0, full).sum(axis=1).max())
    if np.any(W < 0):
        raise DomainError("kernel must be nonnegative")
    _check_matrix_symmetry(W, kernel.name)
    return KernelMatrix(grid, W, rho_max, float(discarded), kernel.name)


def _as_matrix(kernel, grid, rho_max=None) -> KernelMatrix:
    if isinstance(kernel, KernelMatrix):
        if kernel.grid != grid:
            raise DomainError("kernel matrix assembled on a different grid")
        return kernel
    return assemble_kernel_matrix(kernel, grid, rho_max)


def stable_dt(kernel, grid: TorusGrid) -> float:
    """Largest forward-Euler step allowed by ``dt * max_i sum_j W_ij <= 1``."""
    return 1.0 / _as_matrix(kernel, grid).rowsum_max()


def evolve_kernel_stepper(
    kernel: Union[RadialKernel, GeneralKernel, KernelMatrix],
    u0: ScalarField,
    dt: float,
    steps: int,
    *,
    rho_max: Optional[float] = None,
) -> ScalarField:
    """Forward Euler for ``u_t + L u = 0`` with the dense discrete operator.

    The singular diagonal is excluded outright: grid points come in symmetric
    pairs around ``x_i``, so the odd part of the principal value cancels.
    """
    if not dt > 0 or steps < 0:
        raise DomainError("need dt > 0 and steps >= 0")
    K = _as_matrix(kernel, u0.grid, rho_max)
    bound = dt * K.rowsum_max()
    if bound > 1.0 + 1e-12:
        raise StabilityError(f"dt * max rowsum = {bound:.4g} exceeds 1")
    rows = K.W.sum(axis=1)
    diag = 1.0 - dt * rows
    u = u0.values.ravel().copy()
    for _ in range(steps):
        u = diag * u + dt * (K.W @ u)
    return ScalarField(u0.grid, u)


def semigroup_adjoint_check(op, u0: ScalarField, v0: ScalarField, t: float, *, dt: Optional[float] = None) -> float:
    """``|<u0, S_t v0> - <S_t u0, v0>| / (|u0|_2 |v0|_2)`` for either solver.

    ``op`` is a :class:`LevySymbol` (spectral) or a kernel (stepper, with
    ``steps = round(t / dt)``).
    """
    _same_grid(u0, v0)
    if isinstance(op, LevySymbol):

        def S(f):
            return evolve_spectral(op, f, t, leakage=False)

    else:
        K = _as_matrix(op, u0.grid)
        step = dt if dt is not None else 0.5 / K.rowsum_max()
        n = max(1, int(round(t / step)))
        step = t / n

        def S(f):
            return evolve_kernel_stepper(K, f, step, n)

    denom = u0.norm(2) * v0.norm(2)
    if denom == 0.0:
        return 0.0
    return abs(u0.inner(S(v0)) - S(u0).inner(v0)) / denom


# ---------------------------------------------------------------------------
# Serialisation

_HEADER = struct.Struct("<qqd")


def write_field(path, u: ScalarField) -> None:
    """Flat binary layout: int64 N, int64 n, float64 L, then row-major float64 samples."""
    g = u.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(g.N, g.n, g.L))
        fh.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())


def read_field(path) -> ScalarField:
    with open(path, "rb") as fh:
        raw = fh.read()
    N, n, L = _HEADER.unpack_from(raw)
    grid = TorusGrid(int(N), float(L), int(n))
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    return ScalarField(grid, data)


def write_field_csv(path, u: ScalarField) -> None:
    if u.grid.N != 1:
        raise DomainError("CSV export is for one-dimensional fields")
    with open(path, "w") as fh:
        fh.write("x,u\n")
        for x, v in zip(u.grid.axis(), u.values):
            fh.write(f"{x!r},{float(v)!r}\n")
