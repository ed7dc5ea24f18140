"""
Experiment Orchestration

Runs ingest or simulation, splitting, SVGD fitting, conformal calibration,
prediction and evaluation, writing every artifact into one output directory.
All randomness is derived from the master seed.
"""

import logging
import os
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from ..kernels.exact_gp import DEFAULT_MAX_POINTS, exact_gp_predict
from ..kernels.matern import CovarianceParams
from ..latent.inr import BACKBONES, INRConfig
from ..metrics.report import EvalReport, evaluate, write_reports
from ..model.config import ModelConfig
from ..model.network import StaciModel
from ..predict.predictor import CALIBRATIONS, StaciPredictor
from ..predict.summary import credible_interval
from ..svgd.config import SVGDConfig
from ..svgd.ensemble import Ensemble, load_ensemble, save_ensemble
from ..svgd.trainer import train
from ..utils.config import derive_seeds, read_key_value_file, write_key_value_file
from ..utils.errors import ConfigError, DataError, ParameterError, StaciError
from .dataset import Dataset
from .simulate import SIM_KINDS, latent_preset, simulate_dataset
from .splits import split_per_time, split_random
from .transforms import CoordinateScaler, ResponseNormalizer

logger = logging.getLogger(__name__)

PROFILES = {
    "desk": {"layers": 3, "width": 64, "latent_dim": 8, "J": 200, "M": 5, "lr": 1e-3,
             "hyper_lr_scale": 10.0, "epochs": 50, "batch_size": 32,
             "ffnp_freq_constant": 30.0, "ffnp_freq_count": 16, "ffng_encode_size": 64,
             "calibration": "loo"},
    "paper": {"layers": 5, "width": 1024, "latent_dim": 128, "J": 5000, "M": 10, "lr": 1e-5,
              "hyper_lr_scale": 1.0, "epochs": 15, "batch_size": 1024,
              "ffnp_freq_constant": 30.0, "ffnp_freq_count": 1024, "ffng_encode_size": 1024,
              "calibration": "fitted"},
}
SPLITS = ("random", "per_time")

ARTIFACTS = {
    "config": "config.txt",
    "dataset": "dataset.csv",
    "scaling": "scaling.txt",
    "ensemble": "ensemble.bin",
    "trace": "trace.csv",
    "calibration": "calibration.txt",
    "predictions": "predictions.csv",
    "report": "report.csv",
    "report_text": "report.txt",
    "grid": "grid.csv",
    "theorem1": "theorem1.csv",
}


@dataclass
class ExperimentConfig:
    """
    Everything one experiment needs. Fields left as None take their value
    from the selected profile.
    """

    profile: str = "desk"
    seed: int = 0
    # data
    data_path: Optional[str] = None
    sim_kind: str = "stationary"
    sim_n: int = 2000
    sim_latent: str = "sine"
    sim_amplitude: float = 1.0
    sim_n_times: Optional[int] = None
    true_sigma2: float = 1.0
    true_tau2: float = 0.1
    true_nu: float = 1.5
    true_rho_s: float = 0.1
    true_rho_t: float = 0.3
    true_rho_l: float = 0.5
    # split
    split: str = "random"
    split_fractions: List[float] = field(default_factory=lambda: [0.8, 0.1, 0.1])
    train_frac: float = 0.1
    val_times: List[float] = field(default_factory=list)
    test_times: List[float] = field(default_factory=list)
    # model
    backbone: str = "resmlp"
    layers: Optional[int] = None
    width: Optional[int] = None
    latent_dim: Optional[int] = None
    J: Optional[int] = None
    ffnp_freq_constant: Optional[float] = None
    ffnp_freq_count: Optional[int] = None
    ffng_sigma: float = 1.0
    ffng_encode_size: Optional[int] = None
    df_multiplier: float = 2.0
    freeze_frequencies: bool = False
    freeze_hyper: bool = False
    # sampler
    M: Optional[int] = None
    lr: Optional[float] = None
    hyper_lr_scale: Optional[float] = None
    epochs: Optional[int] = None
    batch_size: Optional[int] = None
    optimizer: str = "adam"
    weight_decay: float = 0.0
    # calibration and evaluation
    D: int = 50
    D_candidates: List[int] = field(default_factory=lambda: [30, 40, 50, 60, 70, 80])
    choose_D: bool = True
    calibration: Optional[str] = None
    alpha: float = 0.05
    nll_mode: str = "pointwise"
    oracle: bool = True
    grid_size: int = 50
    grid_t: float = 0.5
    verify_J: int = 500
    verify_reps: int = 2000

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown profile '{self.profile}'; choose from {sorted(PROFILES)}")
        for key, value in PROFILES[self.profile].items():
            if getattr(self, key) is None:
                setattr(self, key, value)
        if self.J < 1:
            raise ConfigError(f"J must be at least 1, got {self.J}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.split not in SPLITS:
            raise ConfigError(f"split must be one of {SPLITS}, got '{self.split}'")
        if self.sim_kind not in SIM_KINDS:
            raise ConfigError(f"sim_kind must be one of {SIM_KINDS}, got '{self.sim_kind}'")
        if self.backbone not in BACKBONES:
            raise ConfigError(f"backbone must be one of {BACKBONES}, got '{self.backbone}'")
        if self.latent_dim < 0:
            raise ConfigError("latent_dim must be non-negative")
        if self.calibration not in CALIBRATIONS:
            raise ConfigError(f"calibration must be one of {CALIBRATIONS}, "
                              f"got '{self.calibration}'")
        if not self.hyper_lr_scale > 0:
            raise ConfigError(f"hyper_lr_scale must be positive, got {self.hyper_lr_scale}")
        if self.D < 1 or not self.D_candidates:
            raise ConfigError("D must be positive and D_candidates nonempty")

    @classmethod
    def field_names(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, values: Dict, **overrides) -> 'ExperimentConfig':
        merged = dict(values)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        unknown = sorted(set(merged) - set(cls.field_names()))
        if unknown:
            raise ConfigError(f"unknown config keys {unknown}")
        try:
            return cls(**merged)
        except (TypeError, ParameterError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid configuration: {exc}") from exc

    @classmethod
    def from_file(cls, path: str, **overrides) -> 'ExperimentConfig':
        """Read a key = value file; keyword overrides win over file values."""
        return cls.from_dict(read_key_value_file(path), **overrides)

    def to_file(self, path: str) -> None:
        write_key_value_file(path, asdict(self))

    def true_params(self) -> CovarianceParams:
        return CovarianceParams(sigma2=self.true_sigma2, tau2=self.true_tau2, nu=self.true_nu,
                                rho_s=self.true_rho_s, rho_t=self.true_rho_t,
                                rho_l=self.true_rho_l)

    def model_config(self) -> ModelConfig:
        inr = None
        if self.latent_dim > 0:
            inr = INRConfig(backbone=self.backbone, layers=self.layers, width=self.width,
                            latent_dim=self.latent_dim,
                            ffnp_freq_constant=self.ffnp_freq_constant,
                            ffnp_freq_count=self.ffnp_freq_count, ffng_sigma=self.ffng_sigma,
                            ffng_encode_size=self.ffng_encode_size)
        return ModelConfig(J=self.J, inr=inr, df_multiplier=self.df_multiplier,
                           freeze_frequencies=self.freeze_frequencies,
                           freeze_hyper=self.freeze_hyper)

    def svgd_config(self, seed: int) -> SVGDConfig:
        return SVGDConfig(M=self.M, step_size=self.lr, epochs=self.epochs,
                          batch_size=self.batch_size, optimizer=self.optimizer,
                          weight_decay=self.weight_decay, hyper_step_scale=self.hyper_lr_scale,
                          seed=seed)

    def seeds(self) -> Dict[str, int]:
        """Stage seeds split from the master seed."""
        names = ("data", "split", "svgd", "calibrate", "verify")
        return dict(zip(names, derive_seeds(self.seed, len(names))))


@contextmanager
def stage(label: str):
    """Log a pipeline stage and prefix package errors raised inside it."""
    logger.info("[%s] start", label)
    try:
        yield
    except StaciError as exc:
        if exc.args and isinstance(exc.args[0], str):
            exc.args = (f"[{label}] {exc.args[0]}",) + exc.args[1:]
        logger.error("%s", exc)
        raise
    logger.info("[%s] done", label)


def prepare_dataset(config: ExperimentConfig) -> Dataset:
    """Load or simulate the data and apply the split protocol."""
    seeds = config.seeds()
    with stage("data"):
        if config.data_path:
            dataset = Dataset.from_csv(config.data_path)
        else:
            dataset = simulate_dataset(config.sim_kind, config.sim_n, config.true_params(),
                                       config.sim_latent, config.sim_amplitude, seeds["data"],
                                       n_times=config.sim_n_times)
    with stage("split"):
        if config.split == "random":
            dataset = split_random(dataset, tuple(config.split_fractions), seeds["split"])
        else:
            dataset = split_per_time(dataset, config.train_frac, config.val_times,
                                     config.test_times, seeds["split"])
        if not dataset.mask("train").any():
            raise DataError("the split left no training rows")
    return dataset


@dataclass
class FitArtifacts:
    """A fitted model together with the data transforms it was trained under."""

    config: ExperimentConfig
    dataset: Dataset
    scaler: CoordinateScaler
    normalizer: ResponseNormalizer
    model: StaciModel
    ensemble: Ensemble
    trace: pd.DataFrame
    D: Optional[int] = None

    def scaled(self, coords: np.ndarray) -> np.ndarray:
        return self.scaler.transform(coords)

    def predictor(self) -> StaciPredictor:
        train = self.dataset.subset("train")
        return StaciPredictor(self.model, self.ensemble, self.scaled(train.coords),
                              self.normalizer.transform(train.y), alpha=self.config.alpha,
                              D=self.D or self.config.D, calibration=self.config.calibration)

    def predict_table(self, predictor: StaciPredictor, coords: np.ndarray,
                      y_true: Optional[np.ndarray] = None) -> pd.DataFrame:
        """Predictions at original-unit coordinates, reported in original units."""
        table = predictor.predict(self.scaled(coords))
        table["s1"], table["s2"], table["t"] = coords[:, 0], coords[:, 1], coords[:, 2]
        table["y_true"] = np.nan if y_true is None else np.asarray(y_true, dtype=float)
        for col in ("mean", "bayes_lo", "bayes_hi", "conf_lo", "conf_hi"):
            table[col] = self.normalizer.inverse(table[col].to_numpy())
        table["sd"] = self.normalizer.inverse_scale(table["sd"].to_numpy())
        return table


def fit_model(config: ExperimentConfig, dataset: Dataset) -> FitArtifacts:
    """Normalize the training rows and run SVGD."""
    with stage("fit"):
        train_mask = dataset.mask("train")
        scaler = CoordinateScaler.fit(dataset.coords)
        normalizer = ResponseNormalizer.fit(dataset.y, train_mask)
        X = scaler.transform(dataset.coords[train_mask])
        y = normalizer.transform(dataset.y[train_mask])
        model, result = train(X, config.svgd_config(config.seeds()["svgd"]),
                              config.model_config(), y=y)
    return FitArtifacts(config, dataset, scaler, normalizer, model, result.ensemble,
                        result.trace)


def save_fit(fit: FitArtifacts, out_dir: str) -> Dict[str, str]:
    """Write config, tagged dataset, scaling, ensemble and trace."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {key: os.path.join(out_dir, ARTIFACTS[key])
             for key in ("config", "dataset", "scaling", "ensemble", "trace")}
    fit.config.to_file(paths["config"])
    fit.dataset.to_csv(paths["dataset"])
    write_key_value_file(paths["scaling"], {**fit.scaler.to_dict(), **fit.normalizer.to_dict()})
    save_ensemble(paths["ensemble"], fit.model, fit.ensemble)
    fit.trace.to_csv(paths["trace"], index=False)
    return paths


def load_fit(out_dir: str) -> FitArtifacts:
    """Reload the artifacts written by :func:`save_fit`."""
    path = lambda key: os.path.join(out_dir, ARTIFACTS[key])  # noqa: E731
    config = ExperimentConfig.from_file(path("config"))
    dataset = Dataset.from_csv(path("dataset"))
    if dataset.split is None:
        raise DataError(f"{path('dataset')} carries no split column")
    scaling = read_key_value_file(path("scaling"))
    model = StaciModel(config.model_config())
    ensemble = load_ensemble(path("ensemble"), model)
    trace = pd.read_csv(path("trace")) if os.path.exists(path("trace")) else pd.DataFrame()
    D = None
    if os.path.exists(path("calibration")):
        D = int(read_key_value_file(path("calibration"))["D"])
    return FitArtifacts(config, dataset, CoordinateScaler.from_dict(scaling),
                        ResponseNormalizer.from_dict(scaling), model, ensemble, trace, D)


def calibrate(fit: FitArtifacts, predictor: StaciPredictor) -> int:
    """Choose the neighbour count when enabled, otherwise keep the configured one."""
    with stage("calibrate"):
        if fit.config.choose_D:
            D = predictor.choose_D(fit.config.D_candidates, seed=fit.config.seeds()["calibrate"])
        else:
            D = fit.config.D
        predictor.D = D
        fit.D = D
    return D


def evaluate_predictions(table: pd.DataFrame, alpha: float,
                         nll_mode: str = "pointwise") -> List[EvalReport]:
    """Score the Bayesian and conformal intervals of a prediction table."""
    rows = table.dropna(subset=["y_true"])
    if rows.empty:
        raise DataError("predictions carry no observed responses to evaluate")
    y, mean, sd = rows["y_true"], rows["mean"], rows["sd"]
    return [
        evaluate(y, mean, sd, rows["bayes_lo"], rows["bayes_hi"], alpha, nll_mode, "bayes"),
        evaluate(y, mean, sd, rows["conf_lo"], rows["conf_hi"], alpha, nll_mode, "conformal"),
    ]


def oracle_report(config: ExperimentConfig, dataset: Dataset) -> Optional[EvalReport]:
    """Exact-GP kriging with the true parameters, for simulated data only."""
    params = dataset.metadata.get("params")
    train, test = dataset.subset("train"), dataset.subset("test")
    if params is None or len(test) == 0:
        return None
    if len(train) > DEFAULT_MAX_POINTS:
        logger.info("skipping oracle: %d training rows exceed the exact-GP cap", len(train))
        return None
    latent_fn = None
    if dataset.metadata.get("kind") == "expanded":
        latent_fn = latent_preset(dataset.metadata["latent"], dataset.metadata["amplitude"])
    mean, var = exact_gp_predict(train.coords, test.coords, CovarianceParams(**params),
                                 latent_fn, y=train.y)
    sd = np.sqrt(var)
    lower, upper = credible_interval(mean, sd, config.alpha)
    return evaluate(test.y, mean, sd, lower, upper, config.alpha, config.nll_mode, "oracle")


def export_grid(fit: FitArtifacts, predictor: StaciPredictor, path: str,
                t: Optional[float] = None, n_side: Optional[int] = None) -> pd.DataFrame:
    """
    Predictions on a regular spatial grid at one time, for external plotting.

    Args:
        fit: Fitted artifacts
        predictor: Predictor over the fit
        path: Output CSV
        t: Time in scaled units (0 = first time, 1 = last); defaults to config.grid_t
        n_side: Grid points per spatial axis; defaults to config.grid_size

    Returns:
        The written table
    """
    t = fit.config.grid_t if t is None else t
    n_side = fit.config.grid_size if n_side is None else n_side
    if n_side < 2:
        raise ParameterError("n_side must be at least 2")
    u = np.linspace(0.0, 1.0, n_side)
    g1, g2 = np.meshgrid(u, u, indexing="ij")
    scaled = np.column_stack([g1.ravel(), g2.ravel(), np.full(g1.size, float(t))])
    table = fit.predict_table(predictor, fit.scaler.inverse(scaled))
    table = table.drop(columns=["y_true"])
    table.to_csv(path, index=False)
    logger.info("wrote %d grid predictions to %s", len(table), path)
    return table


@dataclass
class ExperimentResult:
    """Paths of the written artifacts and the evaluation reports."""

    out_dir: str
    paths: Dict[str, str]
    reports: List[EvalReport]
    D: Optional[int] = None
    trace: Optional[pd.DataFrame] = None


def run_experiment(config: ExperimentConfig, out_dir: str,
                   validate_only: bool = False) -> ExperimentResult:
    """
    Run the full pipeline.

    Args:
        config: Experiment configuration
        out_dir: Directory owned by this experiment
        validate_only: Write the resolved config and stop before any work

    Returns:
        ExperimentResult
    """
    os.makedirs(out_dir, exist_ok=True)
    config_path = os.path.join(out_dir, ARTIFACTS["config"])
    config.to_file(config_path)
    if validate_only:
        logger.info("configuration valid (%s profile); stopping before training", config.profile)
        return ExperimentResult(out_dir, {"config": config_path}, [])

    dataset = prepare_dataset(config)
    fit = fit_model(config, dataset)
    paths = save_fit(fit, out_dir)
    predictor = fit.predictor()
    D = calibrate(fit, predictor)
    paths["calibration"] = os.path.join(out_dir, ARTIFACTS["calibration"])
    write_key_value_file(paths["calibration"], {"D": D})

    with stage("predict"):
        test = dataset.subset("test")
        if len(test) == 0:
            raise DataError("the split left no test rows")
        table = fit.predict_table(predictor, test.coords, test.y)
        paths["predictions"] = os.path.join(out_dir, ARTIFACTS["predictions"])
        table.to_csv(paths["predictions"], index=False)

    with stage("evaluate"):
        reports = evaluate_predictions(table, config.alpha, config.nll_mode)
        if config.oracle:
            oracle = oracle_report(config, dataset)
            if oracle is not None:
                reports.append(oracle)
        paths["report"] = os.path.join(out_dir, ARTIFACTS["report"])
        paths["report_text"] = os.path.join(out_dir, ARTIFACTS["report_text"])
        write_reports(paths["report"], paths["report_text"], *reports)
    return ExperimentResult(out_dir, paths, reports, D, fit.trace)
