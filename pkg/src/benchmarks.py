"""Benchmark suites behind `bench`: accuracy and timing tables for the twin classifiers."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.model_selection import train_test_split

from src.datasets import Dataset, Hyperparams, partition_by_class
from src.dual_assembly import assemble_pin_twsvmpi_dual
from src.errors import ConfigError
from src.evaluation import HyperparamGrid, fit_and_score, kfold_cv, prepare_split
from src.kernels import KernelSpec
from src.privileged_pca import extract_privileged, fit_pca
from src.qp_solver import solve_decomposition, solve_dense_oracle
from src.settings import Settings
from src.synthetic import binary_blobs, flip_labels, iris

LOGGER = logging.getLogger("pin_twsvmpi.bench")

SUITES = ("blobs", "noise", "iris", "speed", "dataset")
NOISE_RATES = (0.0, 0.05, 0.1, 0.15, 0.2)
Row = Dict[str, object]


def comparison_arms(hp: Hyperparams) -> List[Tuple[str, Hyperparams]]:
    """Pin-TWSVMPI and Pin-TWSVM at the configured tau, then the hinge arms: TWSVMPI and the tau = 0 baseline."""
    tau = hp.tau if hp.tau > 0 else 0.5
    return [
        ("pin_twsvmpi", replace(hp, tau=tau)),
        ("pin_twsvm", replace(hp, tau=tau)),
        ("twsvmpi", replace(hp, tau=0.0)),
        ("pin_twsvm", replace(hp, tau=0.0)),
    ]


def _holdout(ds: Dataset, seed: int, test_size: float = 0.5) -> Tuple[Dataset, Dataset]:
    train_idx, test_idx = train_test_split(
        np.arange(ds.n_samples), test_size=test_size, stratify=ds.labels, random_state=seed
    )
    return ds.subset(np.sort(train_idx)), ds.subset(np.sort(test_idx))


def _score_arms(train: Dataset, test: Dataset, settings: Settings, scale: bool) -> List[Row]:
    rows = []
    for method, hp in comparison_arms(settings.hyperparams):
        split = prepare_split(train, test, method, settings.pca_components, scale)
        acc, f1, seconds, _ = fit_and_score(split.train, split.test, hp, settings.solver, method)
        rows.append({"method": method, "tau": hp.tau, "accuracy": acc, "f1": f1, "train_seconds": seconds})
    return rows


def blobs_suite(settings: Settings, seeds: Sequence[int], n: int = 200, separation: float = 6.0) -> List[Row]:
    rows: List[Row] = []
    for seed in seeds:
        train, test = _holdout(binary_blobs(2 * n, separation, seed), seed)
        for row in _score_arms(train, test, settings, scale=False):
            rows.append({"suite": "blobs", "seed": seed, "n": n, **row})
    return rows


def noise_suite(
    settings: Settings,
    seeds: Sequence[int],
    rates: Sequence[float] = NOISE_RATES,
    n: int = 200,
    separation: float = 3.0,
) -> Tuple[List[Row], List[Row]]:
    """Label flips on the training half only; returns per-run rows and per-arm means."""
    rows: List[Row] = []
    for rate in rates:
        for seed in seeds:
            train, test = _holdout(binary_blobs(2 * n, separation, seed), seed)
            noisy = flip_labels(train, rate, seed)
            for row in _score_arms(noisy, test, settings, scale=False):
                rows.append({"suite": "noise", "flip_rate": rate, "seed": seed, **row})

    summary: List[Row] = []
    for rate in rates:
        for method, hp in comparison_arms(settings.hyperparams):
            accs = [
                r["accuracy"]
                for r in rows
                if r["flip_rate"] == rate and r["method"] == method and r["tau"] == hp.tau
            ]
            summary.append(
                {
                    "suite": "noise_summary",
                    "flip_rate": rate,
                    "method": method,
                    "tau": hp.tau,
                    "runs": len(accs),
                    "mean_accuracy": float(np.mean(accs)),
                    "std_accuracy": float(np.std(accs)),
                }
            )
    return rows, summary


def iris_suite(settings: Settings, grid: Optional[HyperparamGrid] = None) -> List[Row]:
    base = replace(settings.hyperparams, kernel=KernelSpec("rbf", settings.hyperparams.kernel.sigma))
    report = kfold_cv(
        iris(),
        grid or settings.grid,
        settings.folds,
        settings.solver,
        settings.seed,
        base=base,
        method=settings.method,
        pca_components=settings.pca_components,
        scale=True,
        tuning_fraction=settings.tuning_fraction,
        workers=settings.workers,
    )
    return [
        {
            "suite": "iris",
            "method": settings.method,
            "k": settings.folds,
            "mean_accuracy": report.mean_accuracy,
            "std_accuracy": report.std_accuracy,
            "mean_f1": report.mean_f1,
        }
    ]


def speed_suite(settings: Settings, m: int = 250, seed: int = 0) -> List[Row]:
    """Same class-1 dual solved by decomposition and by the dense oracle."""
    ds = binary_blobs(2 * m, separation=3.0, seed=seed)
    ds = ds.with_privileged(extract_privileged(ds.features, fit_pca(ds.features, settings.pca_components)))
    hp = replace(settings.hyperparams, tau=settings.hyperparams.tau or 0.5)
    qp = assemble_pin_twsvmpi_dual("class1", partition_by_class(ds), hp)

    started = time.perf_counter()
    decomposition = solve_decomposition(qp, settings.solver)
    decomposition_seconds = time.perf_counter() - started
    started = time.perf_counter()
    oracle = solve_dense_oracle(qp)
    oracle_seconds = time.perf_counter() - started
    LOGGER.info("speed m=%d decomposition=%.3fs oracle=%.3fs", m, decomposition_seconds, oracle_seconds)
    return [
        {
            "suite": "speed",
            "m1": m,
            "m2": m,
            "n": qp.n,
            "decomposition_seconds": decomposition_seconds,
            "oracle_seconds": oracle_seconds,
            "ratio": decomposition_seconds / oracle_seconds if oracle_seconds > 0 else float("nan"),
            "decomposition_objective": decomposition.objective,
            "oracle_objective": oracle.objective,
            "decomposition_iterations": decomposition.iterations,
        }
    ]


def dataset_suite(settings: Settings, ds: Dataset) -> List[Row]:
    rows: List[Row] = []
    for method in ("pin_twsvmpi", "pin_twsvm", "twsvmpi"):
        report = kfold_cv(
            ds,
            settings.grid,
            settings.folds,
            settings.solver,
            settings.seed,
            base=settings.hyperparams,
            method=method,
            pca_components=settings.pca_components,
            scale=settings.standardize,
            tuning_fraction=settings.tuning_fraction,
            workers=settings.workers,
        )
        rows.append(
            {
                "suite": "dataset",
                "method": method,
                "k": settings.folds,
                "mean_accuracy": report.mean_accuracy,
                "std_accuracy": report.std_accuracy,
                "mean_f1": report.mean_f1,
                "train_seconds": float(sum(f.train_seconds for f in report.folds)),
            }
        )
    return rows


def write_table(rows: Sequence[Row], path, delimiter: str = "\t") -> None:
    """Delimiter-separated table with a header row; columns in first-seen order."""
    columns: List[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns, delimiter=delimiter, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: row.get(key, "") for key in columns})


def run_suite(
    name: str,
    settings: Settings,
    seeds: Sequence[int],
    dataset: Optional[Dataset] = None,
) -> Dict[str, List[Row]]:
    """Returns table name -> rows; the caller decides where tables are written."""
    if name == "blobs":
        return {"blobs": blobs_suite(settings, seeds)}
    if name == "noise":
        rows, summary = noise_suite(settings, seeds)
        return {"noise": rows, "noise_summary": summary}
    if name == "iris":
        return {"iris": iris_suite(settings)}
    if name == "speed":
        return {"speed": speed_suite(settings, seed=seeds[0] if seeds else 0)}
    if name == "dataset":
        if dataset is None:
            raise ConfigError("the dataset suite needs --data")
        return {"dataset": dataset_suite(settings, dataset)}
    raise ConfigError(f"Unknown suite '{name}'; expected one of {SUITES}")
