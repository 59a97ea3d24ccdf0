"""Convergence diagnostics and limit-constant solvers."""

from .constants import (
    ChiEstimate,
    CmjConstants,
    NonMalthusian,
    chi_closed_form,
    chi_of_split,
    cmj_char_size,
    condensation_kappa,
    malthusian_alpha,
    split_char_size,
)
from .convergence import (
    CondensationProfile,
    DistanceSamples,
    Scaling,
    SlopeFit,
    TightnessReport,
    condensation_profile,
    fit_slope,
    geometric1_pmf,
    lca_depth_profile,
    scaled_distance_samples,
    slope_vs_logn,
    tail_probabilities,
    tightness_report,
    tv_to_geometric1,
)
from .stats import EmpiricalTau, energy_distance_tau, ks_null_quantile, ks_statistic, total_variation_discrete
from .studies import Check, ConvergenceReport, limit_family, log_target, run_study

__all__ = [
    "ChiEstimate", "Check", "CmjConstants", "CondensationProfile", "ConvergenceReport",
    "DistanceSamples", "EmpiricalTau", "NonMalthusian", "Scaling", "SlopeFit", "TightnessReport",
    "chi_closed_form", "chi_of_split", "cmj_char_size", "condensation_kappa", "condensation_profile",
    "energy_distance_tau", "fit_slope", "geometric1_pmf", "ks_null_quantile", "ks_statistic",
    "lca_depth_profile", "limit_family", "log_target", "malthusian_alpha", "run_study",
    "scaled_distance_samples", "slope_vs_logn", "split_char_size", "tail_probabilities",
    "tightness_report", "total_variation_discrete", "tv_to_geometric1",
]
