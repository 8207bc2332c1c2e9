"""Numerical laboratory for nonlocal diffusion driven by Lévy operators."""

from .errors import (
    ConvergenceError,
    DomainError,
    InconclusiveError,
    LeakageError,
    LevyLabError,
    OverflowDomainError,
    PositivityError,
    SingularityError,
    StabilityError,
    SymmetryError,
)
from .functionals import (
    FourierForm,
    KernelForm,
    LogSobFamily,
    ddt_identity_check,
    dirichlet_form_fourier,
    dirichlet_form_kernel,
    entropy,
    plog_sobolev_residual,
    stroock_varopoulos_gap,
)
from .fundamental import (
    RadialProfile,
    bessel_heat_kernel,
    riesz_kernel,
    transition_density,
    weak_norm_estimate,
    weak_norm_exact,
)
from .hyperlab import (
    A_p_bound,
    A_p_prime_zero,
    HyperTrace,
    blowup_time,
    classify_kernel_threshold,
    gross_backward,
    gross_forward,
    log_bessel_family,
    q_ode_solve,
    run_hyper_experiment,
    super_beta,
    ultra_M,
)
from .operators import (
    GeneralKernel,
    LevySymbol,
    RadialKernel,
    builtin_symbol,
    kernel_log,
    levy_khintchine,
    psi1,
    psi2,
    radial_kernel,
)
from .quadrature import QuadratureSpec
from .spectral import (
    ScalarField,
    TorusGrid,
    evolve_kernel_stepper,
    evolve_spectral,
    semigroup_adjoint_check,
)
from .special import EULER_GAMMA, digamma, gamma, log_gamma, sphere_area

__version__ = "0.1.0"

__all__ = [
    "A_p_bound",
    "A_p_prime_zero",
    "ConvergenceError",
    "DomainError",
    "EULER_GAMMA",
    "FourierForm",
    "GeneralKernel",
    "HyperTrace",
    "InconclusiveError",
    "KernelForm",
    "LeakageError",
    "LevyLabError",
    "LevySymbol",
    "LogSobFamily",
    "OverflowDomainError",
    "PositivityError",
    "QuadratureSpec",
    "RadialKernel",
    "RadialProfile",
    "ScalarField",
    "SingularityError",
    "StabilityError",
    "SymmetryError",
    "TorusGrid",
    "bessel_heat_kernel",
    "blowup_time",
    "builtin_symbol",
    "classify_kernel_threshold",
    "ddt_identity_check",
    "digamma",
    "dirichlet_form_fourier",
    "dirichlet_form_kernel",
    "entropy",
    "evolve_kernel_stepper",
    "evolve_spectral",
    "gamma",
    "gross_backward",
    "gross_forward",
    "kernel_log",
    "levy_khintchine",
    "log_bessel_family",
    "log_gamma",
    "plog_sobolev_residual",
    "psi1",
    "psi2",
    "q_ode_solve",
    "radial_kernel",
    "riesz_kernel",
    "run_hyper_experiment",
    "semigroup_adjoint_check",
    "sphere_area",
    "stroock_varopoulos_gap",
    "super_beta",
    "transition_density",
    "ultra_M",
    "weak_norm_estimate",
    "weak_norm_exact",
]
