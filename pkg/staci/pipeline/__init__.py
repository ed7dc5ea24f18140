"""
Pipeline Module

This module provides tools for:
- Loading, validating and exporting space-time datasets
- Random and per-time-step split protocols
- Coordinate scaling and response normalization
- Synthetic data from the exact Matern model
- Experiment configuration, orchestration and grid export
"""

from .dataset import COLUMNS, SPLIT_TAGS, Dataset, load_csv
from .experiment import (
    ARTIFACTS,
    PROFILES,
    ExperimentConfig,
    ExperimentResult,
    FitArtifacts,
    calibrate,
    evaluate_predictions,
    export_grid,
    fit_model,
    load_fit,
    oracle_report,
    prepare_dataset,
    run_experiment,
    save_fit,
    stage,
)
from .simulate import (
    LATENT_PRESETS,
    SIM_KINDS,
    latent_preset,
    simulate_dataset,
    simulation_coords,
)
from .splits import split_per_time, split_random
from .transforms import CoordinateScaler, ResponseNormalizer

__all__ = [
    'COLUMNS',
    'SPLIT_TAGS',
    'Dataset',
    'load_csv',
    'ARTIFACTS',
    'PROFILES',
    'ExperimentConfig',
    'ExperimentResult',
    'FitArtifacts',
    'calibrate',
    'evaluate_predictions',
    'export_grid',
    'fit_model',
    'load_fit',
    'oracle_report',
    'prepare_dataset',
    'run_experiment',
    'save_fit',
    'stage',
    'LATENT_PRESETS',
    'SIM_KINDS',
    'latent_preset',
    'simulate_dataset',
    'simulation_coords',
    'split_per_time',
    'split_random',
    'CoordinateScaler',
    'ResponseNormalizer',
]
