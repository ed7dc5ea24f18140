"""
Command-line interface.

    staci [flags] {simulate,fit,calibrate,predict,evaluate,verify-theorem1,export-grid,run}

Exit codes: 0 success, 2 configuration or data error, 3 numerical failure.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

import pandas as pd

from .pipeline.dataset import Dataset
from .pipeline.experiment import (
    ARTIFACTS,
    ExperimentConfig,
    calibrate,
    evaluate_predictions,
    export_grid,
    fit_model,
    load_fit,
    prepare_dataset,
    run_experiment,
    save_fit,
    stage,
)
from .pipeline.simulate import simulate_dataset
from .metrics.report import write_reports
from .spectral.verifier import default_lag_grid, verify_theorem1
from .utils.config import write_key_value_file
from .utils.errors import NumericalError, StaciError
from .utils.log import configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

COMMANDS = ("simulate", "fit", "calibrate", "predict", "evaluate", "verify-theorem1",
            "export-grid", "run")


def _common_flags(suppress: bool = False) -> argparse.ArgumentParser:
    """Flags accepted before or after the subcommand."""
    default = (lambda value: argparse.SUPPRESS) if suppress else (lambda value: value)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=default(None), help="key = value configuration file")
    common.add_argument("--seed", type=int, default=default(None), help="master seed")
    common.add_argument("--profile", choices=["desk", "paper"], default=default(None),
                        help="size profile")
    common.add_argument("--out", default=default("staci-out"), help="output directory")
    common.add_argument("--alpha", type=float, default=default(None), help="miscoverage level")
    common.add_argument("--validate-only", action="store_true", default=default(False),
                        help="resolve and echo the configuration, then stop")
    common.add_argument("-v", "--verbose", action="store_true", default=default(False),
                        help="debug logging")
    return common


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command-line arguments."""
    parser = argparse.ArgumentParser(prog="staci", parents=[_common_flags()],
                                     description="Spatio-temporal conformal inference")
    commands = parser.add_subparsers(dest="command", required=True)
    sub_flags = _common_flags(suppress=True)
    for name in COMMANDS:
        sub = commands.add_parser(name, parents=[sub_flags])
        if name == "predict":
            sub.add_argument("--points", help="CSV with s1,s2,t[,y] to predict at")
        if name == "export-grid":
            sub.add_argument("--time", type=float, help="scaled time of the grid slice")
            sub.add_argument("--n-side", type=int, help="grid points per spatial axis")
    return parser.parse_args(argv)


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {"seed": args.seed, "profile": args.profile, "alpha": args.alpha}
    if args.config:
        return ExperimentConfig.from_file(args.config, **overrides)
    return ExperimentConfig.from_dict({}, **overrides)


def _path(args, key: str) -> str:
    return os.path.join(args.out, ARTIFACTS[key])


def cmd_simulate(args, config: ExperimentConfig) -> None:
    dataset = simulate_dataset(config.sim_kind, config.sim_n, config.true_params(),
                               config.sim_latent, config.sim_amplitude, config.seeds()["data"],
                               n_times=config.sim_n_times)
    path = os.path.join(args.out, "data.csv")
    dataset.to_csv(path)
    print(f"wrote {len(dataset)} rows to {path}")


def cmd_fit(args, config: ExperimentConfig) -> None:
    fit = fit_model(config, prepare_dataset(config))
    paths = save_fit(fit, args.out)
    print(f"wrote {paths['ensemble']}")


def cmd_calibrate(args, config: ExperimentConfig) -> None:
    fit = load_fit(args.out)
    if args.alpha is not None:
        fit.config.alpha = args.alpha
    D = calibrate(fit, fit.predictor())
    write_key_value_file(_path(args, "calibration"), {"D": D})
    print(f"D = {D}")


def cmd_predict(args, config: ExperimentConfig) -> None:
    fit = load_fit(args.out)
    if args.alpha is not None:
        fit.config.alpha = args.alpha
    predictor = fit.predictor()
    with stage("predict"):
        if args.points:
            frame = pd.read_csv(args.points, float_precision="round_trip")
            if "y" not in frame.columns:
                frame["y"] = 0.0
                y_true = None
            else:
                y_true = frame["y"].to_numpy()
            points = Dataset.from_dataframe(frame, args.points)
            table = fit.predict_table(predictor, points.coords, y_true)
        else:
            test = fit.dataset.subset("test")
            table = fit.predict_table(predictor, test.coords, test.y)
    table.to_csv(_path(args, "predictions"), index=False)
    print(f"wrote {len(table)} predictions to {_path(args, 'predictions')}")


def cmd_evaluate(args, config: ExperimentConfig) -> None:
    alpha = config.alpha
    nll_mode = config.nll_mode
    if os.path.exists(_path(args, "config")):
        saved = ExperimentConfig.from_file(_path(args, "config"))
        alpha = args.alpha if args.alpha is not None else saved.alpha
        nll_mode = saved.nll_mode
    with stage("evaluate"):
        table = pd.read_csv(_path(args, "predictions"), float_precision="round_trip")
        reports = evaluate_predictions(table, alpha, nll_mode)
    write_reports(_path(args, "report"), _path(args, "report_text"), *reports)
    for report in reports:
        print(report.to_text())


def cmd_verify(args, config: ExperimentConfig) -> None:
    params = config.true_params()
    with stage("verify"):
        report = verify_theorem1(default_lag_grid(params), config.verify_J, config.verify_reps,
                                 params, seed=config.seeds()["verify"],
                                 df_multiplier=config.df_multiplier)
    report.to_csv(_path(args, "theorem1"), index=False)
    print(report.to_string(index=False))
    flagged = int(report["flagged"].sum())
    print(f"{flagged} of {len(report)} lags flagged")


def cmd_export_grid(args, config: ExperimentConfig) -> None:
    fit = load_fit(args.out)
    export_grid(fit, fit.predictor(), _path(args, "grid"), args.time, args.n_side)
    print(f"wrote {_path(args, 'grid')}")


def cmd_run(args, config: ExperimentConfig) -> None:
    result = run_experiment(config, args.out)
    for report in result.reports:
        print(report.to_text())


HANDLERS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "calibrate": cmd_calibrate,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "verify-theorem1": cmd_verify,
    "export-grid": cmd_export_grid,
    "run": cmd_run,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    args = parse_args(argv)
    configure_logging(logging.DEBUG if args.verbose else logging.INFO)
    try:
        config = load_config(args)
        if args.validate_only:
            for key, value in sorted(vars(config).items()):
                print(f"{key} = {value}")
            return EXIT_OK
        os.makedirs(args.out, exist_ok=True)
        HANDLERS[args.command](args, config)
    except NumericalError as exc:
        logger.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except (StaciError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
