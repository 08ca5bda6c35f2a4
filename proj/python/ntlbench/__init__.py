"""Non-technical loss detection toolkit (Python bindings)."""

from ._ntlbench import (
    Dataset,
    NtlError,
    attributes,
    classify_boolean,
    cli,
    default_levels,
    defuzzify_centroid,
    feature_matrix,
    generate_synthetic,
    load_dataset,
    metrics,
    normalize_rules,
    run_experiment,
    shipped_rules,
    single_point_auc,
    subsample,
    svm_decision,
    train_svm,
)

__all__ = [
    "Dataset",
    "NtlError",
    "attributes",
    "classify_boolean",
    "cli",
    "default_levels",
    "defuzzify_centroid",
    "feature_matrix",
    "generate_synthetic",
    "load_dataset",
    "metrics",
    "normalize_rules",
    "run_experiment",
    "shipped_rules",
    "single_point_auc",
    "subsample",
    "svm_decision",
    "train_svm",
]
