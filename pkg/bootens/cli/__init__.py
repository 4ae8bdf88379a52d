import ast
import json
import logging
import shutil
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Type

import numpy as np
import typer
from rich.logging import RichHandler
from tabulate import tabulate

from .. import __version__
from ..config import (
    TEMPLATE,
    ConfigFile,
    ExperimentConfig,
    config_from_dict,
    load_experiment_config,
)
from ..core import NoiseKind, RngStream
from ..ensemble import (
    BootstrappedEnsemble,
    load_ensemble,
    predict_members,
    save_ensemble,
    train_bootstrapped_ensemble,
    train_deep_ensemble,
    train_naive_bootstrap,
)
from ..errors import ConfigError, DatasetError, InvariantViolation, TrainingDivergedError
from ..evaluation import alpha_key, rmse
from ..experiments import (
    build_ground_truth,
    load_dataset,
    read_summary,
    render_summary,
    run_exp1,
    run_exp2,
    run_exp3,
    run_exp4,
    run_experiment,
    run_variants,
)
from ..intervals import BdeStatistics, IntervalKind, Method, bde_intervals, de_intervals
from ..simulate import dataset_digest, load_csv, save_ground_truth
from ..utils import write_rows

DEFAULT_CONFIG_FILE = Path("experiment.toml")


class ErrorHandlingTyper(typer.Typer):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.error_handlers: Dict[Type[Exception], Callable[[Exception], int]] = {}

    def error_handler(self, exc: Type[Exception]):
        def decorator(f: Callable[[Exception], int]):
            self.error_handlers[exc] = f
            return f

        return decorator

    def handler_for(self, exc: Exception) -> Optional[Callable[[Exception], int]]:
        for klass in type(exc).__mro__:
            if klass in self.error_handlers:
                return self.error_handlers[klass]
        return None

    def __call__(self, *args, **kwargs):
        try:
            super(ErrorHandlingTyper, self).__call__(*args, **kwargs)
        except Exception as e:
            callback = self.handler_for(e)
            if callback is None:
                raise
            sys.exit(callback(e))


app = ErrorHandlingTyper(
    add_completion=False,
    name="bootens",
    no_args_is_help=True,
    rich_markup_mode="rich",
)


def debug_callback(flag: bool):
    if not flag:
        app.pretty_exceptions_enable = False

        def exception_handler(exception_type, exception, _):
            print(f"{exception_type.__name__}: {exception}")

        sys.excepthook = exception_handler


def setup_logging(level: int):
    logger = logging.getLogger("bootens")
    logger.setLevel(level)
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        logger.addHandler(RichHandler(show_path=False, rich_tracebacks=level <= logging.DEBUG))


@app.callback()
def main(
    ctx: typer.Context,
    debug: bool = typer.Option(
        None, callback=debug_callback, help="Log at DEBUG level and show full tracebacks"
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress at INFO level"),
):
    if debug:
        setup_logging(logging.DEBUG)
    elif verbose:
        setup_logging(logging.INFO)
    else:
        setup_logging(logging.WARNING)


@app.error_handler(ConfigError)
def config_error_handler(e) -> int:
    typer.echo(str(e), err=True)
    return 2


@app.error_handler(DatasetError)
@app.error_handler(OSError)
def io_error_handler(e) -> int:
    typer.echo(f"I/O error: {e}", err=True)
    return 3


@app.error_handler(TrainingDivergedError)
def diverged_error_handler(e) -> int:
    typer.echo(str(e), err=True)
    typer.echo("Try a smaller learning rate or a larger variance floor", err=True)
    return 4


@app.error_handler(InvariantViolation)
def invariant_error_handler(e) -> int:
    typer.echo(f"Invariant violated: {e}", err=True)
    return 5


CONFIG = typer.Option(
    None,
    "--config",
    "-c",
    dir_okay=False,
    help="Experiment configuration (TOML); defaults to $BOOTENS_CONFIG or the packaged template",
)
SEED = typer.Option(None, "--seed", min=0, max=2**64 - 1, help="Master seed")
OUT = typer.Option(None, "--out", "-o", help="Output directory")
JOBS = typer.Option(None, "--jobs", "-j", min=1, help="Worker processes")
N_SIM = typer.Option(None, "--n-sim", min=1, help="Simulated replicates")
M = typer.Option(None, "--m", min=2, help="Ensemble members")
R = typer.Option(None, "--r", min=0.0, max=1.0, help="Retraining fraction")
ALPHA = typer.Option(None, "--alpha", help="Miscoverage level; repeat for several")
METHOD = typer.Option(None, "--method", help="BDE, DE or NB; repeat for several")
NOISE = typer.Option(None, "--noise", help="Noise model of the simulated targets")
SIMULATOR = typer.Option(None, "--simulator", help="Ground-truth simulator: rf or nn")


def load_config(
    config: Optional[Path],
    experiment: Optional[str] = None,
    seed: Optional[int] = None,
    out: Optional[Path] = None,
    jobs: Optional[int] = None,
    n_sim: Optional[int] = None,
    m: Optional[int] = None,
    r: Optional[float] = None,
    alpha: Optional[List[float]] = None,
    method: Optional[List[Method]] = None,
    noise: Optional[NoiseKind] = None,
    simulator: Optional[str] = None,
) -> ExperimentConfig:
    overrides: Dict[str, Any] = {
        "experiment": experiment,
        "seed": seed,
        "output": str(out) if out is not None else None,
        "jobs": jobs,
        "n_sim": n_sim,
        "ensemble.m": m,
        "ensemble.retrain_fraction": r,
        "alphas": list(alpha) if alpha else None,
        "methods": [x.value for x in method] if method else None,
        "noise": noise.value if noise is not None else None,
        "simulator": simulator,
    }
    return load_experiment_config(config, overrides)


@app.command()
def version():
    """Print version of the bootens executable"""
    typer.echo(f"bootens {__version__}")


@app.command()
def init(
    path: Path = typer.Argument(
        DEFAULT_CONFIG_FILE, help="Where to write the configuration", dir_okay=False
    ),
):
    """
    Write the default experiment configuration to a file
    """
    if path.exists():
        typer.confirm(f"{path} already exists and will be overwritten. Continue?", abort=True)
    path.parent.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(TEMPLATE, path)
    typer.echo(f"Wrote {path}")


@app.command()
def config(
    property_path: Optional[str] = typer.Argument(
        None, help="Nested keys of a config value, joined by `.`", show_default=False
    ),
    value: Optional[str] = typer.Argument(None, help="Update old value with provided value"),
    file: Path = typer.Option(DEFAULT_CONFIG_FILE, "--file", "-f", help="Configuration file"),
):
    """
    Query or update an experiment configuration file
    """
    if value is None:
        with ConfigFile(file, read_only=True) as cfg:
            found = cfg.query(property_path)
        if hasattr(found, "unwrap"):
            found = found.unwrap()
        typer.echo(json.dumps({property_path: found} if property_path else found, indent=2))
        return
    try:
        parsed = ast.literal_eval(value)
    except (SyntaxError, ValueError):
        parsed = value
    with ConfigFile(file) as cfg:
        cfg.update(property_path, parsed)
        config_from_dict(cfg.unwrap())


@app.command()
def simulate(
    config: Optional[Path] = CONFIG,
    seed: Optional[int] = SEED,
    out: Optional[Path] = OUT,
    noise: Optional[NoiseKind] = NOISE,
    simulator: Optional[str] = SIMULATOR,
):
    """
    Fit a ground truth to the dataset and save it
    """
    cfg = load_config(config, seed=seed, noise=noise, simulator=simulator)
    gt = build_ground_truth(cfg, load_dataset(cfg))
    path = out if out is not None else cfg.output_dir / "ground_truth"
    save_ground_truth(path, gt)
    typer.echo(
        f"Saved {gt.kind} ground truth ({len(gt.X_train)} training / {len(gt.X_test)} test "
        f"covariates, {gt.noise.tag} noise) to {path}"
    )


@app.command()
def train(
    config: Optional[Path] = CONFIG,
    seed: Optional[int] = SEED,
    out: Optional[Path] = OUT,
    jobs: Optional[int] = JOBS,
    m: Optional[int] = M,
    r: Optional[float] = R,
    method: Optional[List[Method]] = METHOD,
):
    """
    Train ensembles on the dataset and save them, one directory per method
    """
    cfg = load_config(config, seed=seed, jobs=jobs, m=m, r=r, method=method)
    data = load_dataset(cfg)
    xy = (data.X, data.y)
    root = out if out is not None else cfg.output_dir / "ensembles"
    for name in cfg.methods:
        match name:
            case "BDE":
                ensemble = train_bootstrapped_ensemble(cfg.ensemble, xy, cfg.jobs)
            case "DE":
                ensemble = train_deep_ensemble(cfg.ensemble, xy, cfg.jobs)
            case "NB":
                ensemble = train_naive_bootstrap(cfg.ensemble, xy, cfg.jobs)
        save_ensemble(root / name, ensemble, cfg.ensemble, dataset_digest(data))
        typer.echo(f"Saved {name} ensemble of {cfg.ensemble.m} members to {root / name}")


@app.command(no_args_is_help=True)
def evaluate(
    ensemble_dir: Path = typer.Argument(..., help="Directory written by `bootens train`"),
    data: Optional[Path] = typer.Option(
        None, "--data", help="CSV of inputs and targets; defaults to the configured dataset"
    ),
    config: Optional[Path] = CONFIG,
    seed: Optional[int] = SEED,
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="CSV of per-point intervals"),
    alpha: Optional[List[float]] = ALPHA,
):
    """
    Confidence and prediction intervals of a saved ensemble on a CSV
    """
    cfg = load_config(config, seed=seed, alpha=alpha)
    dataset = load_csv(data) if data is not None else load_dataset(cfg)
    ensemble, _ = load_ensemble(ensemble_dir)
    match ensemble:
        case BootstrappedEnsemble():
            means, variances = predict_members(ensemble.original_ensemble(), dataset.X)
            retrained, _ = predict_members(ensemble.retrained_ensemble(), dataset.X)
            stats = BdeStatistics.from_predictions(means, variances, retrained)
            rng = RngStream(cfg.seed).child("evaluate")
            intervals = bde_intervals(stats, cfg.alphas, cfg.n_t, rng)
        case _:
            means, variances = predict_members(ensemble, dataset.X)
            method = Method(ensemble.method)
            intervals = de_intervals(means, variances, cfg.alphas, method=method)
    f_star = means.mean(axis=0)

    rows = []
    for a in cfg.alphas:
        ci = intervals[(IntervalKind.CONFIDENCE, a)]
        pi = intervals[(IntervalKind.PREDICTION, a)]
        rows.append(
            [
                a,
                f"{float(np.mean(pi.contains(dataset.y))):.3f}",
                f"{float(np.mean(ci.width)):.4g}",
                f"{float(np.mean(pi.width)):.4g}",
            ]
        )
    error = rmse(f_star, dataset.y)
    typer.echo(f"{ensemble.method} ensemble, {len(dataset)} points, RMSE {error:.4g}")
    typer.echo(tabulate(rows, headers=["alpha", "PI coverage", "CI width", "PI width"]))

    if out is not None:
        kinds = (IntervalKind.CONFIDENCE, IntervalKind.PREDICTION)
        keys = [(kind, a) for a in cfg.alphas for kind in kinds]
        header = ["point", "y", "f_star"]
        for kind, a in keys:
            header += [f"{kind.short}{alpha_key(a)}_lower", f"{kind.short}{alpha_key(a)}_upper"]

        def cells():
            for j in range(len(dataset)):
                row = [j, dataset.y[j], f_star[j]]
                for key in keys:
                    row += [intervals[key].lower[j], intervals[key].upper[j]]
                yield row

        out.parent.mkdir(parents=True, exist_ok=True)
        write_rows(out, header, cells())
        typer.echo(f"Wrote {out}")


def _run(runner: Callable[[ExperimentConfig], Any], cfg: ExperimentConfig):
    runner(cfg)
    typer.echo(f"Results in {cfg.output_dir}")


@app.command()
def exp1(
    config: Optional[Path] = CONFIG,
    seed: Optional[int] = SEED,
    out: Optional[Path] = OUT,
    jobs: Optional[int] = JOBS,
    n_sim: Optional[int] = N_SIM,
    m: Optional[int] = M,
    r: Optional[float] = R,
    alpha: Optional[List[float]] = ALPHA,
    method: Optional[List[Method]] = METHOD,
    noise: Optional[NoiseKind] = NOISE,
    simulator: Optional[str] = SIMULATOR,
):
    """
    Coverage of BDE, DE and NB on simulated replicates of a dataset
    """
    cfg = load_config(
        config, "exp1", seed, out, jobs, n_sim, m, r, alpha, method, noise, simulator
    )
    _run(run_exp1, cfg)


@app.command()
def exp2(
    config: Optional[Path] = CONFIG,
    seed: Optional[int] = SEED,
    out: Optional[Path] = OUT,
    jobs: Optional[int] = JOBS,
    noise: Optional[NoiseKind] = NOISE,
    simulator: Optional[str] = SIMULATOR,
):
    """
    Training variance and data variance against the training-set size
    """
    cfg = load_config(config, "exp2", seed, out, jobs, noise=noise, simulator=simulator)
    _run(run_exp2, cfg)


@app.command()
def exp3(
    config: Optional[Path] = CONFIG,
    seed: Optional[int] = SEED,
    out: Optional[Path] = OUT,
    jobs: Optional[int] = JOBS,
    r: Optional[float] = R,
    noise: Optional[NoiseKind] = NOISE,
    simulator: Optional[str] = SIMULATOR,
):
    """
    BDE variance estimates against a random-target oracle
    """
    cfg = load_config(config, "exp3", seed, out, jobs, r=r, noise=noise, simulator=simulator)
    _run(run_exp3, cfg)


@app.command()
def exp4(
    config: Optional[Path] = CONFIG,
    seed: Optional[int] = SEED,
    out: Optional[Path] = OUT,
    jobs: Optional[int] = JOBS,
    m: Optional[int] = M,
    r: Optional[float] = R,
):
    """
    Confidence intervals of an overfitting network on a few points
    """
    cfg = load_config(config, "exp4", seed, out, jobs, m=m, r=r)
    _run(run_exp4, cfg)


@app.command()
def variants(
    config: Optional[Path] = CONFIG,
    seed: Optional[int] = SEED,
    out: Optional[Path] = OUT,
    jobs: Optional[int] = JOBS,
    n_sim: Optional[int] = N_SIM,
    m: Optional[int] = M,
    alpha: Optional[List[float]] = ALPHA,
    method: Optional[List[Method]] = METHOD,
):
    """
    The coverage benchmark with other noise, no weight decay, a network
    simulator and a sweep over the retraining fraction
    """
    cfg = load_config(
        config, "variants", seed, out, jobs, n_sim, m, alpha=alpha, method=method
    )
    _run(run_variants, cfg)


@app.command()
def run(
    config: Optional[Path] = CONFIG,
    seed: Optional[int] = SEED,
    out: Optional[Path] = OUT,
    jobs: Optional[int] = JOBS,
    n_sim: Optional[int] = N_SIM,
    m: Optional[int] = M,
    r: Optional[float] = R,
    alpha: Optional[List[float]] = ALPHA,
    method: Optional[List[Method]] = METHOD,
    noise: Optional[NoiseKind] = NOISE,
    simulator: Optional[str] = SIMULATOR,
):
    """
    Run the experiment named by the `experiment` key of the configuration
    """
    cfg = load_config(
        config, None, seed, out, jobs, n_sim, m, r, alpha, method, noise, simulator
    )
    _run(run_experiment, cfg)


@app.command(no_args_is_help=True)
def report(
    path: Path = typer.Argument(..., help="Finished experiment output directory"),
    alpha: Optional[List[float]] = typer.Option(
        None, "--alpha", help="Levels to tabulate; repeat for several [default: 0.2]"
    ),
    tablefmt: str = typer.Option("simple", help="Any tabulate table format"),
):
    """
    Print the tables of a finished experiment
    """
    summary = read_summary(path)
    typer.echo(render_summary(summary, list(alpha) if alpha else [0.2], tablefmt))
