"""Perceptual-variability scoring for sets of image embeddings.

Pipeline: raw pairwise distances in an embedding space, an empirical-CDF
transform onto [0, 1], U-statistic aggregation into set-level scores, and
human-calibrated similarity levels, plus evaluation harnesses (2AFC,
reusability curves, MDS, rank correlation, prompt splitting).
"""

from .analysis import (
    PromptSplit,
    ReusabilityCurve,
    classical_mds,
    reusability_curve,
    reuse_limit,
    spearman,
    split_prompt,
)
from .calibration import (
    DEFAULT_CUTOFFS,
    CalibrationCutoffs,
    LabeledScore,
    accuracy,
    classify,
    cross_validate,
    fit_cutoffs,
    fit_cutoffs_detailed,
    load_cutoffs,
    save_cutoffs,
)
from .core import (
    DistanceMatrix,
    EmbeddingSet,
    GradedJudgment,
    JudgmentRecords,
    TripletJudgment,
    read_embeddings,
    read_judgments,
    write_embeddings,
)
from .distance import (
    MetricKind,
    cosine_distance,
    euclidean,
    pairwise_matrix,
    squared_euclidean,
)
from .errors import (
    CalibrationError,
    CapacityError,
    FormatError,
    UndefinedCorrelationError,
    ValidationError,
    W1kpError,
)
from .evaluation import (
    TripletOutcome,
    evaluate_triplets,
    majority_accuracy,
    metric_preference,
    oracle_bounds,
    twoafc_score,
)
from .normalization import (
    FittedCdf,
    apply_cdf,
    fit_cdf,
    ks_critical_value,
    ks_statistic_uniform,
    load_cdf,
    normalize_matrix,
    save_cdf,
)
from .variability import (
    VariabilityScore,
    eta_k_exact,
    eta_k_monte_carlo,
    eta_mean,
    total_variance_identity_check,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationCutoffs",
    "CalibrationError",
    "CapacityError",
    "DEFAULT_CUTOFFS",
    "DistanceMatrix",
    "EmbeddingSet",
    "FittedCdf",
    "FormatError",
    "GradedJudgment",
    "JudgmentRecords",
    "LabeledScore",
    "MetricKind",
    "PromptSplit",
    "ReusabilityCurve",
    "TripletJudgment",
    "TripletOutcome",
    "UndefinedCorrelationError",
    "ValidationError",
    "VariabilityScore",
    "W1kpError",
    "accuracy",
    "apply_cdf",
    "classical_mds",
    "classify",
    "cosine_distance",
    "cross_validate",
    "eta_k_exact",
    "eta_k_monte_carlo",
    "eta_mean",
    "euclidean",
    "evaluate_triplets",
    "fit_cdf",
    "fit_cutoffs",
    "fit_cutoffs_detailed",
    "ks_critical_value",
    "ks_statistic_uniform",
    "load_cdf",
    "load_cutoffs",
    "majority_accuracy",
    "metric_preference",
    "normalize_matrix",
    "oracle_bounds",
    "pairwise_matrix",
    "read_embeddings",
    "read_judgments",
    "reusability_curve",
    "reuse_limit",
    "save_cdf",
    "save_cutoffs",
    "spearman",
    "split_prompt",
    "squared_euclidean",
    "total_variance_identity_check",
    "twoafc_score",
    "write_embeddings",
]
