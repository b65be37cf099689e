"""Seeded Monte-Carlo experiments and scaling-law fits."""

from .config import ExperimentConfig, config_hash
from .report import FitReport, scaling_fit
from .experiments import (
    besov_sobolev_gain_experiment,
    linfty_scaling_experiment,
    lipschitz_concentration_experiment,
    lr_median_scaling_experiment,
    mean_median_gap_experiment,
    norm_concentration_experiment,
    norm_statistics_experiment,
    paley_zygmund_khinchin_check,
    run_experiment,
    tail_experiment,
)

__all__ = [
    "ExperimentConfig",
    "FitReport",
    "besov_sobolev_gain_experiment",
    "config_hash",
    "linfty_scaling_experiment",
    "lipschitz_concentration_experiment",
    "lr_median_scaling_experiment",
    "mean_median_gap_experiment",
    "norm_concentration_experiment",
    "norm_statistics_experiment",
    "paley_zygmund_khinchin_check",
    "run_experiment",
    "scaling_fit",
    "tail_experiment",
]
