import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from levylab.errors import DomainError, SingularityError, StabilityError, SymmetryError
from levylab.operators import GeneralKernel, builtin_symbol, radial_kernel, translation_invariant
from levylab.spectral import (
    LeakageWarning,
    TorusGrid,
    assemble_kernel_matrix,
    evolve_kernel_stepper,
    evolve_spectral,
    leakage_fraction,
    read_field,
    semigroup_adjoint_check,
    stable_dt,
    write_field,
)

LOG = builtin_symbol("log_bessel")
seeds = st.integers(min_value=0, max_value=2**31 - 1)


def _bump(grid, width=1.0, shift=0.0):
    return grid.sample(lambda *c: np.exp(-sum((x - shift) ** 2 for x in c) / (2 * width**2)))


def _random_bump(grid, rng):
    x = grid.axis()
    coef = rng.standard_normal(6)
    vals = sum(c * np.exp(-((x - s) ** 2) / 2) for c, s in zip(coef, rng.uniform(-3, 3, 6)))
    return grid.field(vals)


@pytest.fixture(scope="module")
def kgrid():
    return TorusGrid(1, 40.0, 256)


@pytest.fixture(scope="module")
def kmat(kgrid):
    return assemble_kernel_matrix(radial_kernel("log", 1), kgrid)


class TestGrid:
    def test_power_of_two(self):
        with pytest.raises(DomainError):
            TorusGrid(1, 10.0, 100)

    def test_field_is_immutable_copy(self, grid1):
        a = np.zeros(grid1.n)
        f = grid1.field(a)
        a[0] = 5.0
        assert f.values[0] == 0.0
        with pytest.raises(ValueError):
            f.values[0] = 1.0

    def test_rejects_nan(self, grid1):
        with pytest.raises(DomainError):
            grid1.field(np.full(grid1.n, np.nan))

    def test_norm_convention(self, grid1):
        f = grid1.field(np.ones(grid1.n))
        assert_allclose(f.norm(1), 40.0)
        assert_allclose(f.norm(2), math.sqrt(40.0))
        assert f.norm(np.inf) == 1.0

    def test_binary_round_trip(self, tmp_path, grid1, gaussian):
        path = tmp_path / "u.bin"
        write_field(path, gaussian)
        back = read_field(path)
        assert back.grid == grid1
        assert np.array_equal(back.values, gaussian.values)


class TestSpectral:
    def test_identity_at_zero(self, gaussian):
        u = evolve_spectral(LOG, gaussian, 0.0)
        assert np.max(np.abs(u.values - gaussian.values)) <= 1e-13 * np.max(np.abs(gaussian.values))

    def test_laplacian_eigenmode(self, grid1):
        L = grid1.L
        u0 = grid1.sample(lambda x: np.cos(2 * np.pi * x / L))
        t = 0.7
        u = evolve_spectral(builtin_symbol("laplacian"), u0, t, leakage=False)
        assert_allclose(u.values, math.exp(-t * (2 * np.pi / L) ** 2) * u0.values, atol=1e-13)

    @given(seeds, st.floats(min_value=0.0, max_value=3.0))
    def test_mean_and_contraction(self, seed, t):
        grid = TorusGrid(1, 40.0, 512)
        u0 = _random_bump(grid, np.random.default_rng(seed))
        u = evolve_spectral(LOG, u0, t, leakage=False)
        assert abs(u.mean() - u0.mean()) <= 1e-12 * max(1.0, np.abs(u0.values).max())
        for p in (1, 2, np.inf):
            assert u.norm(p) <= u0.norm(p) * (1 + 1e-12) + 1e-14

    @given(seeds, st.floats(min_value=0.01, max_value=1.0), st.floats(min_value=0.01, max_value=1.0))
    def test_semigroup(self, seed, t1, t2):
        grid = TorusGrid(1, 40.0, 512)
        u0 = _random_bump(grid, np.random.default_rng(seed))
        a = evolve_spectral(LOG, u0, t1 + t2, leakage=False)
        b = evolve_spectral(LOG, evolve_spectral(LOG, u0, t1, leakage=False), t2, leakage=False)
        assert (a - b).norm(2) <= 1e-12 * u0.norm(2)

    def test_positivity(self, gaussian):
        u = evolve_spectral(LOG, gaussian, 0.5)
        assert u.values.min() >= -1e-12 * gaussian.norm(np.inf)

    def test_bessel_space_identity(self, gaussian):
        t = 0.3
        u = evolve_spectral(LOG, gaussian, t)
        xi = gaussian.grid.wavenumbers()
        lhs = np.sum((1 + xi**2) ** (2 * t) * np.abs(np.fft.fft(u.values)) ** 2)
        rhs = np.sum(np.abs(np.fft.fft(gaussian.values)) ** 2)
        assert_allclose(lhs, rhs, rtol=1e-10)

    def test_leakage_warning(self, grid1):
        wide = _bump(grid1, width=8.0)
        with pytest.warns(LeakageWarning):
            evolve_spectral(LOG, wide, 0.1)
        assert leakage_fraction(wide) > 1e-4

    def test_negative_time(self, gaussian):
        with pytest.raises(DomainError):
            evolve_spectral(LOG, gaussian, -1.0)

    def test_log_riesz_guards(self, grid1, gaussian):
        riesz = builtin_symbol("log_riesz")
        x = grid1.axis()
        mean_free = grid1.field(-x * np.exp(-0.5 * x**2))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LeakageWarning)
            evolve_spectral(riesz, mean_free, 0.1)
        with pytest.raises(DomainError):
            evolve_spectral(riesz, mean_free, 0.3)
        with pytest.raises(SingularityError):
            evolve_spectral(riesz, gaussian, 0.1)

    def test_spectral_adjoint(self, grid1, gaussian):
        v0 = _bump(grid1, 0.7, shift=1.5)
        assert semigroup_adjoint_check(LOG, gaussian, v0, 0.4) <= 1e-10
        assert semigroup_adjoint_check(LOG, gaussian, gaussian, 0.4) == 0.0


class TestKernelStepper:
    def test_constant_preserved(self, kgrid, kmat):
        u0 = kgrid.field(np.full(kgrid.n, 3.25))
        u = evolve_kernel_stepper(kmat, u0, stable_dt(kmat, kgrid), 25)
        assert_allclose(u.values, 3.25, rtol=1e-13)

    def test_matrix_symmetric_and_truncation_reported(self, kmat):
        assert np.array_equal(kmat.W, kmat.W.T)
        assert kmat.rho_max == 10.0
        assert 0.0 < kmat.discarded < 1e-4

    def test_stability_error(self, kgrid, kmat):
        u0 = _bump(kgrid)
        with pytest.raises(StabilityError):
            evolve_kernel_stepper(kmat, u0, 2.0 * stable_dt(kmat, kgrid), 1)

    def test_asymmetric_kernel_rejected(self, kgrid):
        skew = GeneralKernel(
            "skew", lambda x, y: np.exp(-np.abs(x - y).sum(-1)) * (1 + 0.1 * np.tanh(x[..., 0])), 1
        )
        with pytest.raises(SymmetryError):
            evolve_kernel_stepper(skew, _bump(kgrid), 1e-3, 1)

    def test_general_kernel_matches_radial(self, kgrid, kmat):
        gk = assemble_kernel_matrix(translation_invariant(radial_kernel("log", 1)), kgrid)
        assert_allclose(gk.W, kmat.W, rtol=1e-12)

    def test_stepper_adjoint(self, kgrid, kmat):
        rng = np.random.default_rng(3)
        u0, v0 = _random_bump(kgrid, rng), _random_bump(kgrid, rng)
        assert semigroup_adjoint_check(kmat, u0, v0, 0.1) <= 1e-8

    @given(seeds)
    def test_contraction_and_positivity(self, seed):
        grid = TorusGrid(1, 40.0, 128)
        K = assemble_kernel_matrix(radial_kernel("log", 1), grid)
        rng = np.random.default_rng(seed)
        u0 = grid.field(np.abs(_random_bump(grid, rng).values))
        u = evolve_kernel_stepper(K, u0, stable_dt(K, grid), 10)
        assert u.values.min() >= 0.0
        for p in (1, 2, np.inf):
            assert u.norm(p) <= u0.norm(p) * (1 + 1e-12)
        assert_allclose(u.integral(), u0.integral(), rtol=1e-12)
