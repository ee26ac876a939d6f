"""Counterfactual outcome state transition (COST) calculus for binary outcomes."""

from .cost import (
    CollapsibilityError,
    CollapsibilityStratum,
    CostIntroduce,
    CostRemove,
    ResponseTypeDistribution,
    collapse_cost,
    cost_introduce,
    cost_remove,
    recode_exposure,
    recode_outcome,
    risks_from_distribution,
)
from .measures import (
    ArmCounts,
    EffectSummary,
    RiskPair,
    Undefined,
    is_defined,
    measures_from_risks,
    odds_ratio,
    risk_difference,
    risks_from_counts,
    rr_minus,
    rr_plus,
)
from .meta import (
    StudyRecord,
    pool_studies,
    rd_substitution_check,
    scale_deviations,
    switched_proportion,
    switched_proportion_exhaustive,
)
from .transport import (
    BiasReport,
    IdentificationError,
    Monotonicity,
    MonotonicityViolation,
    TransportResult,
    bias_surface,
    bias_under_nonmonotonicity,
    compare_measures,
    identify_g_under_decrease,
    identify_h_under_increase,
    identify_i_under_increase,
    identify_j_under_decrease,
    predict_introduce,
    predict_remove,
    transport_rr,
    transport_rr_remove,
)

__version__ = "0.1.0"

__all__ = [
    "ArmCounts",
    "BiasReport",
    "CollapsibilityError",
    "CollapsibilityStratum",
    "CostIntroduce",
    "CostRemove",
    "EffectSummary",
    "IdentificationError",
    "Monotonicity",
    "MonotonicityViolation",
    "ResponseTypeDistribution",
    "RiskPair",
    "StudyRecord",
    "TransportResult",
    "Undefined",
    "bias_surface",
    "bias_under_nonmonotonicity",
    "collapse_cost",
    "compare_measures",
    "cost_introduce",
    "cost_remove",
    "identify_g_under_decrease",
    "identify_h_under_increase",
    "identify_i_under_increase",
    "identify_j_under_decrease",
    "is_defined",
    "measures_from_risks",
    "odds_ratio",
    "pool_studies",
    "predict_introduce",
    "predict_remove",
    "rd_substitution_check",
    "recode_exposure",
    "recode_outcome",
    "risk_difference",
    "risks_from_counts",
    "risks_from_distribution",
    "rr_minus",
    "rr_plus",
    "scale_deviations",
    "switched_proportion",
    "switched_proportion_exhaustive",
    "transport_rr",
    "transport_rr_remove",
]
