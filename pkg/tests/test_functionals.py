import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from levylab.corpus import default_corpus, random_nonnegative_fields
from levylab.errors import DomainError, PositivityError
from levylab.functionals import (
    FourierForm,
    KernelForm,
    ddt_identity_check,
    dirichlet_form_fourier,
    dirichlet_form_kernel,
    entropy,
    plancherel_defect,
    plog_sobolev_residual,
    plog_sobolev_terms,
    residual_csv_text,
    stroock_varopoulos_gap,
)
from levylab.hyperlab import log_bessel_family
from levylab.operators import builtin_symbol, radial_kernel
from levylab.spectral import TorusGrid

LOG = builtin_symbol("log_bessel")
# Ent(|f|^2) for f = exp(-x^2/2) on R, from a 50-digit quadrature
GAUSS_ENTROPY_P2 = -1.9007173726629585724


@pytest.fixture(scope="module")
def sgrid():
    return TorusGrid(1, 40.0, 256)


@pytest.fixture(scope="module")
def log_form():
    return KernelForm(radial_kernel("log", 1))


class TestEntropy:
    def test_flat_region(self):
        grid = TorusGrid(1, 32.0, 1024)  # h = 1/32
        vals = np.zeros(grid.n)
        vals[100:132] = 3.0 ** 0.5
        assert abs(entropy(grid.field(vals), 2.0)) <= 1e-14

    def test_zero(self, grid1):
        assert entropy(grid1.field(np.zeros(grid1.n)), 3.0) == 0.0

    def test_gaussian_golden(self, gaussian):
        assert_allclose(entropy(gaussian, 2.0), GAUSS_ENTROPY_P2, atol=1e-8)

    @given(st.floats(min_value=0.1, max_value=10.0))
    def test_degree_one_homogeneous(self, lam):
        grid = TorusGrid(1, 40.0, 256)
        f = default_corpus(grid, n_random=1)[-1].field
        a = entropy(f, 2.0)
        assert_allclose(entropy(f.with_values(lam * f.values), 2.0), lam**2 * a, rtol=1e-10, atol=1e-14)

    def test_shift_invariant(self, sgrid):
        for e in default_corpus(sgrid, n_random=5):
            rolled = e.field.with_values(np.roll(e.field.values, 17))
            assert_allclose(entropy(rolled, 3.0), entropy(e.field, 3.0), rtol=1e-12, atol=1e-14)


class TestForms:
    def test_fourier_constant(self, grid1, gaussian):
        c = grid1.field(np.full(grid1.n, 2.0))
        assert abs(dirichlet_form_fourier(LOG, c, gaussian)) <= 1e-12

    @pytest.mark.parametrize("k", [1, 3, 10])
    def test_fourier_eigenmode(self, grid1, k):
        L = grid1.L
        f = grid1.sample(lambda x: np.cos(2 * np.pi * k * x / L))
        expected = math.log1p((2 * np.pi * k / L) ** 2) * f.norm(2) ** 2
        assert_allclose(dirichlet_form_fourier(LOG, f, f), expected, rtol=1e-12)

    def test_non_levy_rejected(self, gaussian):
        with pytest.raises(DomainError):
            dirichlet_form_fourier(builtin_symbol("log_riesz"), gaussian, gaussian)

    def test_kernel_constant(self, sgrid, log_form):
        c = sgrid.field(np.full(sgrid.n, 1.5))
        assert log_form(c, c) == 0.0

    def test_kernel_vs_fourier(self, sgrid, log_form):
        f = sgrid.sample(lambda x: np.exp(-0.5 * x**2))
        assert_allclose(log_form(f, f), dirichlet_form_fourier(LOG, f, f), rtol=1e-2)

    @given(st.integers(0, 2**31 - 1))
    def test_kernel_form_nonnegative(self, seed):
        grid = TorusGrid(1, 40.0, 128)
        rng = np.random.default_rng(seed)
        f = grid.field(rng.standard_normal(grid.n))
        assert dirichlet_form_kernel(radial_kernel("log", 1), f, f) >= 0.0

    def test_plancherel(self, gaussian):
        assert plancherel_defect(gaussian) <= 1e-13


class TestLogSobolev:
    def test_zero_field(self, grid1):
        z = grid1.field(np.zeros(grid1.n))
        assert plog_sobolev_residual(z, 2.0, log_bessel_family(1), FourierForm(LOG)) == 0.0

    def test_gaussian_holds(self, gaussian):
        assert plog_sobolev_residual(gaussian, 2.0, log_bessel_family(1), FourierForm(LOG)) <= 0.0

    def test_terms_add_up(self, gaussian):
        t = plog_sobolev_terms(gaussian, 3.0, log_bessel_family(1), FourierForm(LOG))
        assert_allclose(t.residual, t.entropy - t.mass_term - t.energy)

    def test_p_below_two(self, gaussian):
        with pytest.raises(DomainError):
            plog_sobolev_residual(gaussian, 1.5, log_bessel_family(1), FourierForm(LOG))

    def test_csv(self, gaussian):
        t = plog_sobolev_terms(gaussian, 2.0, log_bessel_family(1), FourierForm(LOG))
        text = residual_csv_text([("gauss", 2.0, t)], ["note"])
        lines = text.splitlines()
        assert lines[0] == "# note"
        assert lines[1] == "field-id,p,entropy,mass-term,energy,residual"
        assert float(lines[2].split(",")[-1]) == t.residual


class TestStroockVaropoulos:
    def test_p2_zero(self, sgrid, log_form):
        f = random_nonnegative_fields(sgrid, 1, seed=4)[0]
        assert abs(stroock_varopoulos_gap(f, 2.0, log_form)) <= 1e-12 * f.norm(2) ** 2

    def test_p3_kernel(self, sgrid, log_form):
        for f in random_nonnegative_fields(sgrid, 5, seed=5):
            assert stroock_varopoulos_gap(f, 3.0, log_form) >= 0.0

    def test_fourier_form(self, grid1):
        for f in random_nonnegative_fields(grid1, 3, seed=6):
            assert stroock_varopoulos_gap(f, 4.0, FourierForm(LOG)) >= -1e-12 * f.norm(2) ** 2

    def test_negative_field_rejected(self, gaussian):
        with pytest.raises(DomainError):
            stroock_varopoulos_gap(gaussian.with_values(-gaussian.values), 3.0, FourierForm(LOG))


class TestDdtIdentity:
    @pytest.fixture
    def positive(self, grid1):
        return grid1.sample(lambda x: np.exp(-0.5 * x**2) + 1e-3)

    def test_second_order(self, positive):
        q = lambda t: 2.0 / (1.0 - 2.0 * t)  # noqa: E731
        a = ddt_identity_check(LOG, positive, q, 0.1, 1e-3)
        b = ddt_identity_check(LOG, positive, q, 0.1, 5e-4)
        assert a <= 1e-5
        assert_allclose(a / b, 4.0, rtol=0.2)

    def test_constant_data(self, grid1):
        c = grid1.field(np.full(grid1.n, 1.7))
        assert ddt_identity_check(LOG, c, lambda t: 3.0, 0.1) <= 1e-10
        one = grid1.field(np.ones(grid1.n))
        assert ddt_identity_check(LOG, one, lambda t: 2.0 / (1.0 - 2.0 * t), 0.1) <= 1e-10

    def test_positivity_required(self, gaussian):
        with pytest.raises(PositivityError):
            ddt_identity_check(LOG, gaussian.with_values(gaussian.values - 0.5), lambda t: 2.0, 0.1)
