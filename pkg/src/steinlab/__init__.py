"""steinlab: Stein factors for the standard normal Stein equation, numerically."""

__version__ = "0.1.0"

from .errors import (
    DomainOverflow,
    InvalidParameter,
    KinkError,
    MomentMismatch,
    NotConverged,
    SteinLabError,
    SupportTooLarge,
)
from .normal_kernel import (
    gaussian_moment,
    half_integer_gamma,
    mills_z,
    normal_cdf,
    phi,
    z_derivatives,
)
from .quadrature import IntegrationResult, QuadratureSpec, gaussian_expectation, integrate
from .test_functions import (
    PiecewisePolynomial,
    TestFunction,
    abs_family,
    monomial,
    ramp_family,
    smooth_probe,
)
from .stein_solver import (
    derivative_daly,
    derivative_semigroup,
    expectation_nh,
    finite_difference,
    kernel_integral,
    sharp_constant,
    solve_f,
    solve_polynomial,
    sup_norm_estimate,
)
from .distributions_clt import (
    LatticeDistribution,
    convolve_iid,
    lemma1_compare,
    moment_identity_check,
    rademacher,
    twopoint_asym,
)

__all__ = [
    "DomainOverflow",
    "IntegrationResult",
    "InvalidParameter",
    "KinkError",
    "LatticeDistribution",
    "MomentMismatch",
    "NotConverged",
    "PiecewisePolynomial",
    "QuadratureSpec",
    "SteinLabError",
    "SupportTooLarge",
    "TestFunction",
    "abs_family",
    "convolve_iid",
    "derivative_daly",
    "derivative_semigroup",
    "expectation_nh",
    "finite_difference",
    "gaussian_expectation",
    "gaussian_moment",
    "half_integer_gamma",
    "integrate",
    "kernel_integral",
    "lemma1_compare",
    "mills_z",
    "moment_identity_check",
    "monomial",
    "normal_cdf",
    "phi",
    "rademacher",
    "ramp_family",
    "sharp_constant",
    "smooth_probe",
    "solve_f",
    "solve_polynomial",
    "sup_norm_estimate",
    "twopoint_asym",
    "z_derivatives",
]
