"""Minimax-CRB design and evaluation of one-bit quantizers for distributed estimation."""

from .noise import (
    NoDensity,
    NoiseDensity,
    NotDifferentiable,
    check_threshold_optimality_condition,
    gaussian,
    generalized_gaussian,
    laplacian,
    parse_noise_spec,
    point_mass,
    threshold_condition_witness,
)
from .quantizers import (
    DitheredQuantizer,
    InvalidParameter,
    InvalidSlopes,
    PiecewiseLinearQuantizer,
    Quantizer,
    SineQuantizer,
    TabulatedQuantizer,
    ThresholdQuantizer,
    TruncatedQuantizer,
    dithered,
    parse_quantizer_spec,
    piecewise_linear,
    sine,
    threshold,
    truncate_to_unit_support,
)
from .crb import (
    CrbProfile,
    DegenerateProbability,
    NumericalFailure,
    OptimizationFailure,
    crb,
    critical_sigma,
    default_grid_size,
    dominates,
    fisher_information,
    g_antisymmetric_form,
    g_of_theta,
    g_prime,
    is_admissible,
    max_crb,
    sine_high_snr_limit,
    sine_limit_from_one_sided_mean,
)
from .design import (
    AuplCoefficients,
    DesignOptions,
    DesignResult,
    InadmissibleIterate,
    design,
    design_grid_size,
    objective,
    objective_subgradient,
    precompute_coefficients,
    starting_points,
)
from .simulate import Inadmissible, SimConfig, SimReport, g_inverse, run, run_trial, trial_rng

__version__ = "0.1.0"
