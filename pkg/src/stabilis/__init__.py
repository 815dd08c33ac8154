"""stabilis: soft floating point and numerical-stability analysis in the
coordinatewise relative-error metric."""

__version__ = "0.1.0"

from .fpcore import (
    FpDivisionByZero,
    FpError,
    FpNumber,
    Precision,
    fl,
    fp_add,
    fp_div,
    fp_mul,
    fp_sub,
    fp_zero,
    round_to_nearest,
    to_exact,
)
from .reals import CertifiedReal, ExactReal, Interval, PrecisionError, pi_real
from .relmetric import (
    DimensionMismatch,
    InfiniteDistanceError,
    RelPoint,
    abs_dist,
    geodesic_point,
    rel_ball_sample,
    rel_dist,
    rel_sphere_sample,
)
from .catalog import (
    CatalogFunction,
    DomainError,
    NumericalAlgorithm,
    algorithm,
    babylonian_sqrt,
    catalog_function,
    high_precision_sin,
    sin_in_precision,
    strassen_input,
)
from .condition import (
    ConditionReport,
    composition_upper_bound,
    kappa_closed_form,
    kappa_from_jacobian,
    kappa_jacobian,
    kappa_sampled,
    spectral_norm,
    stacking_bounds,
)
from .amenability import (
    AmenabilityVerdict,
    ExcessFactorReport,
    amenability_probe,
    composite_function,
    excess_factor,
    gradient_criterion,
    smallest_passing_constant,
    strassen_excess_closed_form,
)
from .harness import (
    LopRecord,
    PercentileRow,
    StabilityVerdict,
    backward_check_product,
    forward_stability_check,
    log_spaced,
    nearest_rank,
    sine_experiment,
    sine_true_input,
    spearman_rho,
    strassen_experiment,
)

__all__ = [
    "AmenabilityVerdict",
    "CatalogFunction",
    "CertifiedReal",
    "ConditionReport",
    "DimensionMismatch",
    "DomainError",
    "ExactReal",
    "ExcessFactorReport",
    "FpDivisionByZero",
    "FpError",
    "FpNumber",
    "InfiniteDistanceError",
    "Interval",
    "LopRecord",
    "NumericalAlgorithm",
    "PercentileRow",
    "Precision",
    "PrecisionError",
    "RelPoint",
    "StabilityVerdict",
    "abs_dist",
    "algorithm",
    "amenability_probe",
    "babylonian_sqrt",
    "backward_check_product",
    "catalog_function",
    "composite_function",
    "composition_upper_bound",
    "excess_factor",
    "fl",
    "forward_stability_check",
    "fp_add",
    "fp_div",
    "fp_mul",
    "fp_sub",
    "fp_zero",
    "geodesic_point",
    "gradient_criterion",
    "high_precision_sin",
    "kappa_closed_form",
    "kappa_from_jacobian",
    "kappa_jacobian",
    "kappa_sampled",
    "log_spaced",
    "nearest_rank",
    "pi_real",
    "rel_ball_sample",
    "rel_dist",
    "rel_sphere_sample",
    "round_to_nearest",
    "sin_in_precision",
    "sine_experiment",
    "sine_true_input",
    "smallest_passing_constant",
    "spearman_rho",
    "spectral_norm",
    "stacking_bounds",
    "strassen_excess_closed_form",
    "strassen_experiment",
    "strassen_input",
    "to_exact",
]
