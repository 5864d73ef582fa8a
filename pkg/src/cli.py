"""Command-line front end: train, predict, cv, bench, extract-pi and detect-eval."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src import benchmarks
from src.datasets import DISTANCE_RULES, FORMATS, Hyperparams, load_dataset, standardize
from src.detection import missrate_fppi_curve, read_boxes
from src.errors import ConfigError, PinTwsvmError, describe, from_exception
from src.evaluation import HyperparamGrid, accuracy, kfold_cv, write_cv_report, write_records
from src.kernels import KERNELS, KernelSpec
from src.model_store import StoredModel, load_model, save_model
from src.privileged_pca import Components, extract_privileged, fit_pca
from src.qp_solver import SolverConfig
from src.settings import Settings, load_settings
from src.trainer import METHODS, PRIVILEGED_METHODS, OneVsRestModel, decision_distances, fit_model, predict, relative_distances

LOGGER = logging.getLogger("pin_twsvmpi.cli")

COMMANDS = ("train", "predict", "cv", "bench", "extract-pi", "detect-eval")
REQUIRED = {
    "train": ("data", "model_path"),
    "predict": ("data", "model_path", "output"),
    "cv": ("data", "output"),
    "bench": ("output",),
    "extract-pi": ("data", "output"),
    "detect-eval": ("detections", "ground_truth", "output"),
}
FLAG_NAMES = {"model_path": "--model", "ground_truth": "--ground-truth"}


@dataclass(frozen=True)
class RunConfig:
    command: str
    settings: Settings
    data: Optional[Path] = None
    data_format: str = "csv"
    privileged_columns: Tuple[int, ...] = ()
    model_path: Optional[Path] = None
    output: Optional[Path] = None
    basis_path: Optional[Path] = None
    suite: str = "all"
    n_seeds: int = 20
    with_timings: bool = False
    detections: Optional[Path] = None
    ground_truth: Optional[Path] = None
    overlap: float = 0.5
    thresholds: Optional[Tuple[float, ...]] = None

    @property
    def hyperparams(self) -> Hyperparams:
        return self.settings.hyperparams

    @property
    def solver(self) -> SolverConfig:
        return self.settings.solver


def _floats(text: Optional[str], flag: str) -> Optional[Tuple[float, ...]]:
    if text is None:
        return None
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"{flag} expects comma-separated numbers, got '{text}'") from exc
    if not values:
        raise ConfigError(f"{flag} needs at least one value")
    return values


def _single(values: Optional[Tuple[float, ...]], flag: str, command: str) -> Optional[float]:
    if values is None:
        return None
    if len(values) != 1:
        raise ConfigError(f"{flag} takes a single value for '{command}'")
    return values[0]


def _components(text: Optional[str]) -> Optional[Components]:
    if text is None:
        return None
    try:
        if any(ch in text for ch in ".eE"):
            return float(text)
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"--pca-components expects a count or a fraction, got '{text}'") from exc


def _columns(text: Optional[str]) -> Tuple[int, ...]:
    if not text:
        return ()
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"--privileged-columns expects comma-separated indices, got '{text}'") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Pinball-loss twin SVM with privileged information."
    )
    parser.add_argument("command", choices=COMMANDS, help="What to run.")
    parser.add_argument("--config", type=Path, default=None, help="Alternate defaults JSON.")
    parser.add_argument("--data", type=Path, help="Dataset file (csv or sparse).")
    parser.add_argument("--format", dest="data_format", choices=FORMATS, default="csv")
    parser.add_argument(
        "--privileged-columns",
        help="Comma-separated 0-based feature columns to use as privileged information.",
    )
    parser.add_argument("--model", dest="model_path", type=Path, help="Model document path.")
    parser.add_argument("--output", type=Path, help="Output file (or directory for bench).")
    parser.add_argument("--basis", dest="basis_path", type=Path, help="PCA basis output for extract-pi.")
    parser.add_argument("--method", choices=METHODS, default=None)

    hyper = parser.add_argument_group("hyperparameters (comma-separated grids for cv/bench)")
    for flag in ("--c1", "--c2", "--gamma", "--tau", "--sigma"):
        hyper.add_argument(flag)
    hyper.add_argument("--kernel", choices=KERNELS, default=None)
    hyper.add_argument("--distance-rule", choices=DISTANCE_RULES, default=None)
    hyper.add_argument("--pca-components", help="Component count (int) or variance fraction (float).")
    hyper.add_argument("--no-standardize", action="store_true", help="Skip feature standardization.")

    run = parser.add_argument_group("run control")
    run.add_argument("--folds", type=int, default=None)
    run.add_argument("--tol", type=float, default=None)
    run.add_argument("--max-iter", type=int, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--workers", type=int, default=None)
    run.add_argument("--verbose-solver", action="store_true", help="Log solver_step records.")
    run.add_argument("--with-timings", action="store_true", help="Include wall-clock times in cv output.")
    run.add_argument("--suite", choices=("all",) + benchmarks.SUITES, default="all")
    run.add_argument("--seeds", dest="n_seeds", type=int, default=20, help="Seeds per bench suite.")

    det = parser.add_argument_group("detection evaluation")
    det.add_argument("--detections", type=Path)
    det.add_argument("--ground-truth", dest="ground_truth", type=Path)
    det.add_argument("--overlap", type=float, default=0.5)
    det.add_argument("--thresholds", help="Comma-separated score thresholds (default: every score).")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def config_from_args(args: argparse.Namespace, settings: Settings) -> RunConfig:
    """Merge flags over settings and check the command's required flags before any compute."""
    missing = [
        FLAG_NAMES.get(name, "--" + name.replace("_", "-"))
        for name in REQUIRED[args.command]
        if getattr(args, name) is None
    ]
    if missing:
        raise ConfigError(f"'{args.command}' requires {', '.join(missing)}")

    grid_command = args.command in ("cv", "bench")
    values = {name: _floats(getattr(args, name), "--" + name) for name in ("c1", "c2", "gamma", "tau", "sigma")}
    hp = settings.hyperparams
    kernel = KernelSpec(
        kind=args.kernel or hp.kernel.kind,
        sigma=values["sigma"][0] if values["sigma"] else hp.kernel.sigma,
    )
    first = {name: (vals[0] if vals else None) for name, vals in values.items()}
    if not grid_command:
        first = {name: _single(vals, "--" + name, args.command) for name, vals in values.items()}
    c1 = first["c1"] if first["c1"] is not None else hp.c1
    seed = args.seed if args.seed is not None else settings.seed
    hp = replace(
        hp,
        c1=c1,
        c2=first["c2"] if first["c2"] is not None else (c1 if first["c1"] is not None else hp.c2),
        gamma=first["gamma"] if first["gamma"] is not None else hp.gamma,
        tau=first["tau"] if first["tau"] is not None else hp.tau,
        kernel=kernel,
        distance_rule=args.distance_rule or hp.distance_rule,
        seed=seed,
    )

    grid = settings.grid
    if grid_command:
        grid = HyperparamGrid(
            c1=values["c1"] or grid.c1,
            c2=values["c2"] if values["c2"] else (None if values["c1"] else grid.c2),
            gamma=values["gamma"] or grid.gamma,
            tau=values["tau"] or grid.tau,
            sigma=values["sigma"] or grid.sigma,
        )

    solver = replace(
        settings.solver,
        tol=args.tol if args.tol is not None else settings.solver.tol,
        max_iter=args.max_iter if args.max_iter is not None else settings.solver.max_iter,
        verbose=args.verbose_solver or settings.solver.verbose,
    )
    merged = replace(
        settings,
        hyperparams=hp,
        grid=grid,
        solver=solver,
        pca_components=_components(args.pca_components) or settings.pca_components,
        standardize=settings.standardize and not args.no_standardize,
        folds=args.folds if args.folds is not None else settings.folds,
        method=args.method or settings.method,
        seed=seed,
        workers=args.workers if args.workers is not None else settings.workers,
    )
    if merged.workers < 1:
        raise ConfigError("--workers must be >= 1")
    if args.n_seeds < 1:
        raise ConfigError("--seeds must be >= 1")

    return RunConfig(
        command=args.command,
        settings=merged,
        data=args.data,
        data_format=args.data_format,
        privileged_columns=_columns(args.privileged_columns),
        model_path=args.model_path,
        output=args.output,
        basis_path=args.basis_path,
        suite=args.suite,
        n_seeds=args.n_seeds,
        with_timings=args.with_timings,
        detections=args.detections,
        ground_truth=args.ground_truth,
        overlap=args.overlap,
        thresholds=_floats(args.thresholds, "--thresholds"),
    )


def _load(config: RunConfig):
    return load_dataset(config.data, config.data_format, config.privileged_columns)


def _run_train(config: RunConfig) -> int:
    settings = config.settings
    ds = _load(config)
    scaling = None
    if settings.standardize:
        ds, scaling = standardize(ds)
    basis = None
    if settings.method in PRIVILEGED_METHODS and ds.privileged is None:
        basis = fit_pca(ds.features, settings.pca_components)
        ds = ds.with_privileged(extract_privileged(ds.features, basis))

    model = fit_model(ds, config.hyperparams, config.solver, settings.method, settings.workers)
    train_accuracy = accuracy(predict(model, ds.features), ds.labels)
    save_model(StoredModel(model=model, scaling=scaling, pca=basis), config.model_path)
    print(f"train_accuracy={train_accuracy!r}")
    return 0


def _run_predict(config: RunConfig) -> int:
    stored = load_model(config.model_path)
    ds = _load(config)
    X = stored.transform(ds.features)
    labels = np.atleast_1d(predict(stored.model, X))

    rows: List[dict] = []
    if isinstance(stored.model, OneVsRestModel):
        rel = relative_distances(stored.model, X)
        for i, label in enumerate(labels):
            row = {"index": i, "label": int(label)}
            row.update({f"rel_{c}": repr(float(rel[i, k])) for k, c in enumerate(stored.model.classes)})
            rows.append(row)
    else:
        dist = decision_distances(stored.model, X)
        for i, label in enumerate(labels):
            rows.append({"index": i, "label": int(label), "d_pos": repr(float(dist[i, 0])), "d_neg": repr(float(dist[i, 1]))})
    benchmarks.write_table(rows, config.output)
    print(f"accuracy={accuracy(labels, ds.labels)!r}")
    return 0


def _run_cv(config: RunConfig) -> int:
    settings = config.settings
    report = kfold_cv(
        _load(config),
        settings.grid,
        settings.folds,
        config.solver,
        settings.seed,
        base=config.hyperparams,
        method=settings.method,
        pca_components=settings.pca_components,
        scale=settings.standardize,
        tuning_fraction=settings.tuning_fraction,
        workers=settings.workers,
    )
    write_cv_report(report, config.output, include_timings=config.with_timings)
    print(f"mean_accuracy={report.mean_accuracy!r} std_accuracy={report.std_accuracy!r}")
    return 0


def _run_bench(config: RunConfig) -> int:
    settings = config.settings
    names = [s for s in benchmarks.SUITES if s != "dataset"] if config.suite == "all" else [config.suite]
    if config.suite == "all" and config.data is not None:
        names.append("dataset")
    dataset = _load(config) if "dataset" in names else None
    seeds = list(range(settings.seed, settings.seed + config.n_seeds))

    tables = {}
    for name in names:
        LOGGER.info("Running bench suite %s", name)
        tables.update(benchmarks.run_suite(name, settings, seeds, dataset))

    config.output.mkdir(parents=True, exist_ok=True)
    for table, rows in tables.items():
        benchmarks.write_table(rows, config.output / f"{table}.tsv")
    print(f"tables={','.join(sorted(tables))} dir={config.output}")
    return 0


def _run_extract_pi(config: RunConfig) -> int:
    settings = config.settings
    ds = _load(config)
    scaling = None
    if settings.standardize:
        ds, scaling = standardize(ds)
    basis = fit_pca(ds.features, settings.pca_components)
    privileged = extract_privileged(ds.features, basis)

    rows = [{f"pc{j + 1}": repr(float(v)) for j, v in enumerate(row)} for row in privileged]
    basis_path = config.basis_path or config.output.with_suffix(".basis.json")
    benchmarks.write_table(rows, config.output, delimiter=",")
    document = {"pca": basis.to_dict(), "scaling": None if scaling is None else scaling.to_dict()}
    basis_path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"components={basis.n_components} basis={basis_path}")
    return 0


def _run_detect_eval(config: RunConfig) -> int:
    curve = missrate_fppi_curve(
        read_boxes(config.detections, scored=True),
        read_boxes(config.ground_truth, scored=False),
        config.thresholds,
        config.overlap,
    )
    write_records((point.to_record() for point in curve), config.output)
    print(f"points={len(curve)}")
    return 0


HANDLERS = {
    "train": _run_train,
    "predict": _run_predict,
    "cv": _run_cv,
    "bench": _run_bench,
    "extract-pi": _run_extract_pi,
    "detect-eval": _run_detect_eval,
}


def run(config: RunConfig) -> int:
    return HANDLERS[config.command](config)


def log_level() -> str:
    """LOG_LEVEL from the environment, defaulting to INFO; unknown names are a config error."""
    level = os.getenv("LOG_LEVEL", "INFO").strip().upper()
    if not isinstance(logging.getLevelName(level), int):
        raise ConfigError(f"LOG_LEVEL must be one of DEBUG, INFO, WARNING, ERROR, CRITICAL; got '{level}'")
    return level


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    try:
        settings = load_settings(args.config)
        logging.basicConfig(level=log_level())
        return run(config_from_args(args, settings))
    except (PinTwsvmError, OSError, ValueError) as exc:
        error = from_exception(exc)
        if error is not exc:
            LOGGER.debug("Wrapped %s", type(exc).__name__, exc_info=exc)
        print(describe(error), file=sys.stderr)
        return error.exit_code
