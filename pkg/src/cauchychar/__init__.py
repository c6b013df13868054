"""Cauchy-law characterizations by Möbius and Mellin transforms.

Transform statistics, fixed-point and fractional-moment estimators,
circular and mixture extensions, goodness-of-fit tests and a quadrature
oracle for the underlying identities.
"""

from .errors import (
    CauchyCharError,
    ConvergenceError,
    DegenerateSampleError,
    DomainError,
    EstimationError,
    NumericalError,
)
from .halfplane import (
    cpow,
    disk_param,
    format_complex,
    halfplane_param,
    mobius_to_disk,
    mobius_to_halfplane,
    parse_complex,
    principal_log,
)
from .distributions import (
    Cauchy,
    CircularCauchy,
    MixtureCauchy,
    MixtureParams,
    SampleSet,
    cauchy_cdf,
    cauchy_pdf,
    cauchy_quantile,
    circular_pdf,
    log_likelihood,
    mixture_pdf,
    sample,
)
from .transforms import (
    circular_stat,
    g_closed_form,
    mellin_empirical,
    mellin_split_g,
    mobius_stat,
    poisson_smooth,
    stieltjes_transform,
)
from .oracle import QuadratureConfig, expectation, verify_identities

__version__ = "0.1.0"
