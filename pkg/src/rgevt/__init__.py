"""Renormalization-group approach to extreme value statistics.

Exact RG transforms ``T_s mu(x) = mu(g_s(x))**n`` under support-preserving
rescalings, their fixed points, a Case-2 basin-of-attraction classifier,
perturbative finite-size corrections around ``exp(-lam (-log x)**alpha)``,
and Monte Carlo block maxima to check them against.
"""

from .attraction import AttractionVerdict, classify, estimate_alpha, estimate_lambda
from .distributions import (
    Case,
    Distribution,
    FixedPoint,
    Support,
    get_distribution,
    make_fixed_point,
    make_salpeter_mass,
    make_salpeter_rescaled,
    make_tent,
    make_uniform,
    make_valley,
    to_unit_interval,
)
from .engine import TransformedDistribution, apply, fixed_point_residual, l1_distance
from .errors import (
    BasinError,
    ConfigurationError,
    DomainError,
    ExtractionError,
    ParameterError,
    QuadratureError,
    RGError,
    TruncationError,
    UnknownIdentifierError,
)
from .montecarlo import ExperimentConfig, ExperimentResult, compare, run_experiment
from .perturbation import (
    CorrectionSeries,
    PerturbationExpansion,
    analytic_expansion,
    eigenvalue,
    extract_expansion,
    predict_corrections,
)
from .rescaling import RescalingGroup, generator, parse_group, rescale

__version__ = "0.1.0"
