"""Python bindings for the langtraj C++ core."""

from ._core import (
    __version__,
    bh_adjust,
    extract_ngrams,
    fisher_ci,
    fit_subject_trajectory,
    format_estimate,
    meta_features,
    pearson_r,
    run_pipeline,
    simulate,
    standardize,
    tokenize,
)

__all__ = [
    "__version__",
    "bh_adjust",
    "extract_ngrams",
    "fisher_ci",
    "fit_subject_trajectory",
    "format_estimate",
    "meta_features",
    "pearson_r",
    "run_pipeline",
    "simulate",
    "standardize",
    "tokenize",
]
