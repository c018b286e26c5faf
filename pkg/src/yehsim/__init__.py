"""Simulation and verification of Gaussian additive processes.

A process here is determined by a bounded-variation drift lambda and a
continuous strictly increasing variance function rho: increments over [s, t]
are Normal(lambda(t) - lambda(s), rho(t) - rho(s)).  The package samples such
processes exactly on grids and by truncated random series, computes Wiener
integrals against the paths, and verifies the moment, distribution,
martingale, and series-expansion identities they satisfy.
"""

from .errors import (
    BadGridError,
    ConfigError,
    DegenerateReferenceError,
    GridMismatchError,
    MissingBVCertificateError,
    NegativeVarianceError,
    NonFiniteDrawError,
    NonFiniteValueError,
    NotCenteredError,
    OutOfDomainError,
    OutOfRangeError,
    PartitionNotOnGridError,
    PartitionOutOfDomainError,
    YehError,
)
from .funcspace import (
    BasisFamily,
    Integrand,
    StepFunction,
    as_integrand,
    fourier_coeffs,
    gram_matrix,
    inner_lambda_rho,
    inner_rho,
    norm_sq_rho,
    project_to_steps,
    step_combine,
)
from .integral import (
    WienerIntegralResult,
    integral_covariance,
    integral_distribution,
    integral_mean,
    integrate_l2,
    integrate_pathwise_rs,
    integrate_step,
)
from .martingale import (
    MartingaleVerdict,
    classify,
    conditional_increment_mean,
    mc_martingale_test,
)
from .process import (
    DEFAULT_GRID_POINTS,
    DEFAULT_TRUNCATION,
    EmpiricalMoments,
    SamplePath,
    YehSpec,
    center,
    empirical_moments,
    make_grid,
    path_to_csv,
    sample_increments,
    sample_series,
)
from .series import (
    ExpansionReport,
    expand_integral,
    expand_integral_uncentered,
    parseval_defect,
    series_variance_defect,
)
from .stats import KSReport, MCEstimate, ks_test, mc_estimate, merge_estimates
from .stieltjes import (
    DEFAULT_CANTOR_DEPTH,
    DEFAULT_RESOLUTION,
    Interval,
    MeanFunction,
    QuadResult,
    VarianceFunction,
    cantor_eval,
    rho_inverse,
    stieltjes_quad,
    stieltjes_step,
    total_variation,
)
from .streams import GaussianStream, normal_matrix

__version__ = "0.1.0"
