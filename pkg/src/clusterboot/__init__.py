"""Two-stage cluster sampling: estimation, bootstrap schemes, diagnostics.

A library and CLI for point/variance estimation under a two-stage cluster
(superpopulation) model, four bootstrap resampling schemes with exact
bootstrap moments and an exhaustive enumeration oracle, one-term Edgeworth
and Berry-Esseen second-order diagnostics, and a reproducible Monte Carlo
harness that checks the asymptotic claims empirically.
"""

from .model import (ClusterDataset, DesignParams, Population, TruthParams,
                    Normal, ShiftedExponential, ShiftedLognormal,
                    GammaUnitMean, generate_dataset, subsample_sizes)
from .estimators import (ClusterSummary, EstimateReport, TruthVariances,
                         summarize, grand_means, design_constants,
                         variance_components, variance_estimates,
                         estimate_report, studentized_stats, decomposed_stats,
                         theoretical_variances)
from .bootstrap import (SchemeTag, BootstrapMoments, BootstrapRun,
                        IntervalEstimate, resample_b2, resample_b1_uniform,
                        resample_b1_weighted, resample_b3, bootstrap_moments,
                        bootstrap_variance_estimators, run_bootstrap,
                        confidence_interval, enumerate_bootstrap)
from .asymptotics import (normal_cdf, normal_pdf, EdgeworthKind,
                          EdgeworthInputs, edgeworth_cdf, corrected_quantile,
                          abs_third_moment, berry_esseen_bound, sup_distance)
from .montecarlo import (ExperimentConfig, ExperimentReport, run_experiment,
                         rate_table, scheme_comparison,
                         conditional_normality_ks)
from .kernels import backend_name

__version__ = "0.1.0"

__all__ = [
    "ClusterDataset", "DesignParams", "Population", "TruthParams",
    "Normal", "ShiftedExponential", "ShiftedLognormal", "GammaUnitMean",
    "generate_dataset", "subsample_sizes",
    "ClusterSummary", "EstimateReport", "TruthVariances", "summarize",
    "grand_means", "design_constants", "variance_components",
    "variance_estimates", "estimate_report", "studentized_stats",
    "decomposed_stats", "theoretical_variances",
    "SchemeTag", "BootstrapMoments", "BootstrapRun", "IntervalEstimate",
    "resample_b2", "resample_b1_uniform", "resample_b1_weighted",
    "resample_b3", "bootstrap_moments", "bootstrap_variance_estimators",
    "run_bootstrap", "confidence_interval", "enumerate_bootstrap",
    "normal_cdf", "normal_pdf", "EdgeworthKind", "EdgeworthInputs",
    "edgeworth_cdf", "corrected_quantile", "abs_third_moment",
    "berry_esseen_bound", "sup_distance",
    "ExperimentConfig", "ExperimentReport", "run_experiment", "rate_table",
    "scheme_comparison", "conditional_normality_ks",
    "backend_name",
]
