"""Acceptance criteria 1-13, one test each, with the stated tolerances and runtimes.

Each test prints a single ``PASS``/``FAIL`` line (collected again in the
terminal summary) with the worst observed error next to its tolerance.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from levylab.corpus import default_corpus, random_nonnegative_fields
from levylab.functionals import FourierForm, KernelForm, plog_sobolev_residual, stroock_varopoulos_gap
from levylab.fundamental import (
    bessel_profile,
    heat_kernel_mass,
    riesz_constant,
    riesz_profile,
    weak_norm_estimate,
    weak_norm_exact,
)
from levylab.hyperlab import (
    NOT_EVENTUALLY_ULTRA,
    STRONG_HYPER,
    ULTRACONTRACTIVE,
    A_p_bound,
    A_p_prime_zero,
    blowup_time,
    classify_kernel_threshold,
    derivative_at_zero,
    exponent_integral,
    gross_backward,
    gross_family,
    gross_loop_time_form,
    log_bessel_family,
    q_log,
    q_ode_solve,
    run_hyper_experiment,
)
from levylab.operators import builtin_symbol, kernel_log, levy_khintchine, radial_kernel
from levylab.quadrature import integrate
from levylab.special import EULER_GAMMA, gamma, sphere_area
from levylab.spectral import (
    TorusGrid,
    assemble_kernel_matrix,
    evolve_kernel_stepper,
    evolve_spectral,
    semigroup_adjoint_check,
    stable_dt,
)

pytestmark = pytest.mark.acceptance

LOG = builtin_symbol("log_bessel")


@contextmanager
def criterion(number, title, budget):
    """Time the block, enforce the runtime budget and print one status line."""
    info = {}
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield info
        elapsed = time.perf_counter() - start
        info["runtime"] = f"{elapsed:.2f}s/{budget:g}s"
        assert elapsed < budget, f"runtime {elapsed:.2f}s exceeds {budget}s"
        status = "PASS"
    finally:
        if "runtime" not in info:
            info["runtime"] = f"{time.perf_counter() - start:.2f}s/{budget:g}s"
        detail = "; ".join(f"{k}={v}" for k, v in info.items())
        line = f"criterion {number}: {status} {title} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)


def _unit_bump(grid, width=1.0):
    u = grid.sample(lambda *c: np.exp(-sum(x * x for x in c) / (2 * width**2)))
    return u.with_values(u.values / u.norm(2))


def test_01_kernel_asymptotics():
    with criterion(1, "kernel asymptotics", 1.0) as info:
        small = [
            abs(1e-3**N * kernel_log(1e-3, N) * math.pi ** (N / 2) / gamma(N / 2) - 1) for N in (1, 2, 3)
        ]
        large = abs(20.0 * math.exp(20.0) * kernel_log(20.0, 1) - 1)
        info["small_r_err"] = f"{max(small):.2e}<=1e-2"
        info["large_r_err"] = f"{large:.2e}<=5e-2"
        assert max(small) <= 1e-2
        assert large <= 5e-2


def test_02_heat_kernel_mass():
    with criterion(2, "mass of H_t", 5.0) as info:
        errs = [abs(heat_kernel_mass(t, N) - 1) for t in (0.1, 0.5, 1.0, 2.0) for N in (1, 2, 3)]
        info["worst"] = f"{max(errs):.2e}<=1e-6"
        assert max(errs) <= 1e-6


def test_03_weak_norm():
    with criterion(3, "weak norm of H_t", 10.0) as info:
        worst = 0.0
        coincide = 0.0
        for N, t in [(1, 0.25), (2, 0.2), (2, 0.5), (2, 0.8), (3, 1.0)]:
            p = N / (N - 2 * t)
            exact = weak_norm_exact(N, t)
            est = weak_norm_estimate(bessel_profile(N, t), p)
            worst = max(worst, abs(est / exact - 1))
            # Riesz side from its level sets: |{R_t > lam}| is a ball of radius (c/lam)^(1/(N-2t))
            c = riesz_constant(t, N)
            for lam in (1e-2, 1.0, 1e2):
                rho = (c / lam) ** (1.0 / (N - 2 * t))
                riesz = lam * (sphere_area(N) / N * rho**N) ** (1.0 / p)
                coincide = max(coincide, abs(riesz - exact) / exact)
            coincide = max(coincide, abs(weak_norm_estimate(riesz_profile(N, t), p) - exact) / exact)
        info["worst_rel"] = f"{worst:.2e}<=2e-2"
        info["riesz_vs_bessel"] = f"{coincide:.1e}<=1e-12"
        assert worst <= 2e-2
        assert coincide <= 1e-12


def test_04_levy_khintchine_round_trip():
    with criterion(4, "Levy-Khintchine round trip", 30.0) as info:
        k = radial_kernel("log", 1)
        worst = 0.0
        for r in np.geomspace(0.1, 20.0, 40):
            target = math.log1p(r * r)
            err = abs(levy_khintchine(k, r).value - target) / (1 + target)
            worst = max(worst, err)
        info["worst_scaled"] = f"{worst:.2e}<=1e-3"
        assert worst <= 1e-3


def test_05_hypercontractivity_run():
    with criterion(5, "hypercontractivity run", 10.0) as info:
        grid = TorusGrid(1, 40.0, 4096)
        u0 = _unit_bump(grid)
        times = [0.05, 0.1, 0.15, 0.2]
        trace = run_hyper_experiment(LOG, u0, 2.0, times)
        ratios = trace.column("ratio")
        for rec in trace.records:
            assert rec.q == pytest.approx(2.0 / (1.0 - 4.0 * rec.t), rel=1e-14)
        l2 = [evolve_spectral(LOG, u0, t).norm(2) for t in times]
        means = [abs(evolve_spectral(LOG, u0, t).mean() - u0.mean()) for t in times]
        info["ratios"] = ",".join(f"{r:.3f}" for r in ratios) + "<=1.05"
        info["max_L2"] = f"{max(l2):.4f}<=1"
        info["mean_drift"] = f"{max(means):.1e}<=1e-12"
        assert np.all(ratios <= 1.05)
        assert max(l2) <= 1.0
        assert max(means) <= 1e-12


def test_06_plog_sobolev_sweep():
    with criterion(6, "p-log-Sobolev sweep", 30.0) as info:
        grid = TorusGrid(1, 40.0, 1024)
        corpus = default_corpus(grid)
        assert len(corpus) == 26
        fam = log_bessel_family(1)
        form = FourierForm(LOG)
        worst = -math.inf
        for entry in corpus:
            for p in (2.0, 3.0, 4.0):
                scale = entry.field.norm(p) ** p
                worst = max(worst, plog_sobolev_residual(entry.field, p, fam, form) / scale)
        info["worst_residual/|f|_p^p"] = f"{worst:.3f}<=1e-3"
        assert worst <= 1e-3


def test_07_stroock_varopoulos():
    with criterion(7, "Stroock-Varopoulos", 60.0) as info:
        grid = TorusGrid(1, 40.0, 256)
        form = KernelForm(radial_kernel("log", 1))
        rng = np.random.default_rng(7)
        fields = random_nonnegative_fields(grid, 1000, seed=77)
        worst = math.inf
        for f in fields:
            p = rng.uniform(1.1, 8.0)
            # both energies are homogeneous of degree p in f
            worst = min(worst, stroock_varopoulos_gap(f, p, form) / f.norm(p) ** p)
        info["min_gap/scale"] = f"{worst:.2e}>=-1e-12"
        assert worst >= -1e-12


def test_08_comparison_transfer():
    with criterion(8, "kernel comparison transfer", 60.0) as info:
        grid = TorusGrid(1, 40.0, 256)
        base = assemble_kernel_matrix(radial_kernel("log", 1), grid)
        rng = np.random.default_rng(8)
        theta = rng.uniform(0.0, 1.0, base.W.shape)
        theta = np.triu(theta) + np.triu(theta, 1).T
        bigger = base.modulated(theta)
        fam = log_bessel_family(1)
        corpus = default_corpus(grid, n_random=44)
        assert len(corpus) == 50
        passed = 0
        worst = -math.inf
        for entry in corpus:
            for p in (2.0, 3.0):
                r0 = plog_sobolev_residual(entry.field, p, fam, KernelForm(base))
                r1 = plog_sobolev_residual(entry.field, p, fam, KernelForm(bigger))
                worst = max(worst, r1 - r0)
                passed += r1 <= r0
        info["cases"] = f"{passed}/100"
        info["max(R_mod-R_log)"] = f"{worst:.2e}<=0"
        assert passed == 100


def test_09_exponent_ode_and_times():
    with criterion(9, "exponent ODE and blow-up times", 5.0) as info:
        worst_q = 0.0
        for N in (1, 2, 3):
            for p in (2.0, 3.0, 5.0):
                tr = q_ode_solve(lambda a, N=N: 0.5 * N, p, 1.0, q_max=1e3)
                ts = np.linspace(0.0, tr.t_stop, 200)
                worst_q = max(worst_q, float(np.max(np.abs(tr(ts) / (N * p / (N - 2 * p * ts)) - 1))))
        worst_t = max(
            abs(blowup_time(lambda a, N=N: 0.5 * N, p) - N / (2 * p)) for N in (1, 2, 3) for p in (2.0, 3.0, 5.0)
        )
        statuses = [exponent_integral(log_bessel_family(N).C, 2.0).status for N in (1, 2, 3)]
        const = exponent_integral(lambda a: 2.5, 2.0)
        info["q_rel"] = f"{worst_q:.1e}<=1e-6"
        info["t_inf"] = f"{worst_t:.1e}<=1e-8"
        info["log_family"] = "/".join(statuses)
        info["const_C"] = f"{abs(const.value - 1.25):.1e}<=1e-8"
        assert worst_q <= 1e-6
        assert worst_t <= 1e-8
        assert statuses == ["divergent"] * 3
        assert const.status == "convergent" and abs(const.value - 1.25) <= 1e-8


def test_10_gross_loop():
    with criterion(10, "Gross loop", 10.0) as info:
        N, p = 1, 2.0
        fam = gross_family(lambda a: (lambda t: A_p_bound(a, t, N)), lambda a: (lambda t: q_log(a, t, N)))
        worst = 0.0
        literal_gap = math.inf
        for t in (0.05, 0.1):
            loop = gross_backward(fam, p, t)
            time_form = gross_loop_time_form(p, t, N)
            q_t = q_log(p, t, N)
            # d alpha / ds = alpha^2 / D(alpha) with D = N/2 turns the time form into this
            alpha_form = math.exp(integrate(lambda a: A_p_prime_zero(a, N) * (0.5 * N) / a**2, p, q_t).value)
            literal = math.exp(integrate(lambda a: A_p_prime_zero(a, N) / a**2, p, q_t).value)
            worst = max(worst, abs(loop / time_form - 1), abs(loop / alpha_form - 1))
            literal_gap = min(literal_gap, abs(literal / time_form - 1))
            info[f"t={t}"] = f"{loop:.6f}"
        fd = max(
            abs(derivative_at_zero(lambda t: A_p_bound(q, t, n)) - A_p_prime_zero(q, n))
            for q in (2.0, 3.0, 4.0)
            for n in (1, 2, 3)
        )
        info["loop_rel"] = f"{worst:.1e}<=1e-8"
        info["no_D_form_gap"] = f"{literal_gap:.2f}"
        info["fd_slope"] = f"{fd:.1e}<=1e-6"
        assert worst <= 1e-8
        assert fd <= 1e-6
        # the alpha-form without the D = N/2 Jacobian is a different number for N = 1
        assert literal_gap > 1e-2


def test_11_constants():
    with criterion(11, "constants", 1.0) as info:
        err = abs(A_p_prime_zero(2.0, 2) - (2 * EULER_GAMMA - math.log(4 * math.pi)))
        at_zero = all(A_p_bound(p, 0.0, N) == 1.0 for p in (1.5, 2.0, 2.5, 3.0, 4.0, 10.0, 100.0) for N in (1, 2, 3))
        info["A2'(0)_err"] = f"{err:.1e}<=1e-10"
        info["A_p(0)=1"] = str(at_zero)
        assert err <= 1e-10
        assert at_zero


def test_12_threshold_trichotomy():
    with criterion(12, "threshold trichotomy", 30.0) as info:
        cases = [
            (radial_kernel("power_truncated", 1, alpha=0.5), ULTRACONTRACTIVE),
            (radial_kernel("truncated", 1), STRONG_HYPER),
            (radial_kernel("inv_log_truncated", 1), NOT_EVENTUALLY_ULTRA),
        ]
        got = []
        exponent = None
        for kernel, expected in cases:
            v = classify_kernel_threshold(kernel)
            got.append(v.verdict)
            if expected == STRONG_HYPER:
                exponent = v.decay_exponents[2.0]
        info["verdicts"] = "/".join(got)
        info["decay_exp(t=2)"] = f"{exponent:.4f} vs 4 (10%)"
        assert got == [e for _, e in cases]
        assert abs(exponent - 4.0) <= 0.4


def test_13_solver_cross_validation():
    with criterion(13, "solver cross-validation and invariants", 60.0) as info:
        grid = TorusGrid(1, 40.0, 1024)
        K = assemble_kernel_matrix(radial_kernel("log", 1), grid)
        u0 = _unit_bump(grid)
        dt, steps = 1e-3, 100
        assert dt <= stable_dt(K, grid)
        us = evolve_spectral(LOG, u0, dt * steps)
        uk = evolve_kernel_stepper(K, u0, dt, steps)
        agree = (uk - us).norm(2) / us.norm(2)

        small = TorusGrid(1, 40.0, 256)
        Ks = assemble_kernel_matrix(radial_kernel("log", 1), small)
        h = stable_dt(Ks, small)
        rng = np.random.default_rng(13)
        tcontr = 0.0
        maxp = True
        for v0, extra in zip(
            random_nonnegative_fields(small, 20, seed=131), random_nonnegative_fields(small, 20, seed=132)
        ):
            w0 = small.field(np.roll(v0.values, int(rng.integers(small.n))) * rng.uniform(0.5, 2.0))
            v, w = evolve_kernel_stepper(Ks, v0, h, 20), evolve_kernel_stepper(Ks, w0, h, 20)
            before = np.maximum(v0.values - w0.values, 0).sum() * small.cell
            after = np.maximum(v.values - w.values, 0).sum() * small.cell
            tcontr = max(tcontr, after - before * (1 + 1e-12))
            # ordered data stays ordered
            upper0 = v0.with_values(v0.values + extra.values)
            upper = evolve_kernel_stepper(Ks, upper0, h, 20)
            maxp &= bool(np.all(upper.values >= v.values - 1e-14))
            maxp &= bool(v.values.max() <= v0.values.max() + 1e-14 and v.values.min() >= v0.values.min() - 1e-14)

        v1 = _unit_bump(grid, 0.7).with_values(np.roll(_unit_bump(grid, 0.7).values, 40))
        adj_spec = semigroup_adjoint_check(LOG, u0, v1, 0.1)
        a0 = random_nonnegative_fields(small, 2, seed=5)
        adj_step = semigroup_adjoint_check(Ks, a0[0], a0[1], 0.1)
        info["stepper_vs_spectral"] = f"{agree:.1e}<=2e-2"
        info["T_contraction_excess"] = f"{tcontr:.1e}<=0"
        info["max_principle"] = str(maxp)
        info["adjoint"] = f"{adj_spec:.1e}<=1e-10,{adj_step:.1e}<=1e-8"
        assert agree <= 2e-2
        assert tcontr <= 0.0
        assert maxp
        assert adj_spec <= 1e-10
        assert adj_step <= 1e-8


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
