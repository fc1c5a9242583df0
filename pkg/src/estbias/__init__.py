"""Measuring effort-estimation bias with measures that match the estimate type."""

__version__ = "0.1.0"

from .analysis import (
    ElicitationResult,
    PertInputs,
    RatioMoments,
    RootFindingError,
    elicitation_scan,
    pert_mean,
    ratio_expectation_approx,
    re_act_bias_of_mean_estimate,
    solve,
    zero_bias_estimate,
)
from .calibration import HitRateReport, invert_cdf, percentile_hit_rate
from .distributions import (
    DiceProduct,
    EffortDistribution,
    Empirical,
    LogNormalEffort,
    dice_enumerate,
    lognormal_from_mean_median,
    lognormal_from_mean_sd,
    parse_dist_spec,
)
from .measures import (
    ALL_MEASURES,
    MATCH_TABLE,
    BiasMeasure,
    BiasReport,
    DomainError,
    EstimateType,
    EstimationRecord,
    Functional,
    RecordForm,
    bias_suite,
    compute_bias,
    per_record_score,
)
from .simulation import (
    BiasCurvePoint,
    SimulationConfig,
    bias_curve,
    expected_bias,
    reference_scenario,
    simulate_expected_bias,
)

__all__ = [
    "ALL_MEASURES",
    "BiasCurvePoint",
    "BiasMeasure",
    "BiasReport",
    "DiceProduct",
    "DomainError",
    "EffortDistribution",
    "ElicitationResult",
    "Empirical",
    "EstimateType",
    "EstimationRecord",
    "Functional",
    "HitRateReport",
    "LogNormalEffort",
    "MATCH_TABLE",
    "PertInputs",
    "RatioMoments",
    "RecordForm",
    "RootFindingError",
    "SimulationConfig",
    "bias_curve",
    "bias_suite",
    "compute_bias",
    "dice_enumerate",
    "elicitation_scan",
    "expected_bias",
    "invert_cdf",
    "lognormal_from_mean_median",
    "lognormal_from_mean_sd",
    "parse_dist_spec",
    "per_record_score",
    "percentile_hit_rate",
    "pert_mean",
    "ratio_expectation_approx",
    "re_act_bias_of_mean_estimate",
    "reference_scenario",
    "simulate_expected_bias",
    "solve",
    "zero_bias_estimate",
]
