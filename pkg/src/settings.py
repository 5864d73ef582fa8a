"""Configuration loading: JSON defaults, .env overrides and preflight validation."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Union

from dotenv import load_dotenv

from src.datasets import DISTANCE_RULES, Hyperparams
from src.errors import ConfigError, PinTwsvmError
from src.evaluation import HyperparamGrid
from src.kernels import KERNELS, KernelSpec
from src.qp_solver import SolverConfig
from src.trainer import METHODS

ROOT = Path(__file__).resolve().parents[1]
CONFIG_PATH = ROOT / "config" / "defaults.json"
ENV_PATH = Path(".env")


@dataclass(frozen=True)
class Settings:
    hyperparams: Hyperparams
    grid: HyperparamGrid
    solver: SolverConfig
    pca_components: Union[int, float]
    standardize: bool
    folds: int
    tuning_fraction: float
    method: str
    seed: int
    workers: int


def load_config(path: Path = CONFIG_PATH) -> Dict:
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")

    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Invalid JSON in {path}: {exc}") from exc


def _positive_list(values, name: str, issues: List[str]) -> None:
    if not isinstance(values, list) or not values:
        issues.append(f"grid.{name} must be a non-empty list")
        return
    for value in values:
        if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
            issues.append(f"grid.{name} entries must be positive numbers, got {value!r}")


def validate_config(config: Dict) -> List[str]:
    """Return a list of configuration issues; empty list means the config is usable."""
    issues: List[str] = []
    for section in ("hyperparams", "grid", "solver", "privileged", "data", "cv", "runtime"):
        if not isinstance(config.get(section), dict):
            issues.append(f"Missing section '{section}'")
    if issues:
        return issues

    hp = config["hyperparams"]
    for key in ("c1", "c2", "gamma", "sigma"):
        value = hp.get(key)
        if not isinstance(value, (int, float)) or value <= 0:
            issues.append(f"hyperparams.{key} must be positive, got {value!r}")
    tau = hp.get("tau")
    if not isinstance(tau, (int, float)) or not 0 <= tau <= 1:
        issues.append(f"hyperparams.tau must lie in [0, 1], got {tau!r}")
    if hp.get("kernel") not in KERNELS:
        issues.append(f"hyperparams.kernel must be one of {KERNELS}")
    if hp.get("distance_rule") not in DISTANCE_RULES:
        issues.append(f"hyperparams.distance_rule must be one of {DISTANCE_RULES}")

    grid = config["grid"]
    for key in ("c1", "gamma", "sigma"):
        _positive_list(grid.get(key), key, issues)
    if grid.get("c2") is not None:
        _positive_list(grid.get("c2"), "c2", issues)
    taus = grid.get("tau")
    if not isinstance(taus, list) or not taus or any(
        not isinstance(t, (int, float)) or not 0 < t <= 1 for t in taus
    ):
        issues.append("grid.tau must be a non-empty list of values in (0, 1]")

    solver = config["solver"]
    if not isinstance(solver.get("tol"), (int, float)) or solver.get("tol", 0) <= 0:
        issues.append("solver.tol must be positive")
    if not isinstance(solver.get("max_iter"), int) or solver.get("max_iter", 0) < 1:
        issues.append("solver.max_iter must be a positive integer")
    if not isinstance(solver.get("working_set_size"), int) or solver.get("working_set_size", 0) < 3:
        issues.append("solver.working_set_size must be an integer >= 3")

    pca = config["privileged"].get("pca_components")
    if isinstance(pca, bool) or not isinstance(pca, (int, float)) or pca <= 0:
        issues.append("privileged.pca_components must be a positive count or a fraction in (0, 1]")
    elif isinstance(pca, float) and pca > 1:
        issues.append("privileged.pca_components as a fraction must not exceed 1")

    folds = config["cv"].get("folds")
    if not isinstance(folds, int) or folds < 2:
        issues.append("cv.folds must be an integer >= 2")
    frac = config["cv"].get("tuning_fraction")
    if not isinstance(frac, (int, float)) or not 0 < frac < 1:
        issues.append("cv.tuning_fraction must lie in (0, 1)")

    runtime = config["runtime"]
    if runtime.get("method") not in METHODS:
        issues.append(f"runtime.method must be one of {METHODS}")
    if not isinstance(runtime.get("workers"), int) or runtime.get("workers", 0) < 1:
        issues.append("runtime.workers must be a positive integer")
    return issues


def settings_from_config(config: Dict) -> Settings:
    issues = validate_config(config)
    if issues:
        raise ConfigError("; ".join(issues))

    hp_cfg = config["hyperparams"]
    runtime = config["runtime"]
    try:
        hyperparams = Hyperparams(
            c1=float(hp_cfg["c1"]),
            c2=float(hp_cfg["c2"]),
            gamma=float(hp_cfg["gamma"]),
            tau=float(hp_cfg["tau"]),
            kernel=KernelSpec(kind=hp_cfg["kernel"], sigma=float(hp_cfg["sigma"])),
            seed=int(runtime.get("seed", 0)),
            distance_rule=hp_cfg["distance_rule"],
            ridge=hp_cfg.get("ridge"),
            nonnegative_proximal_multipliers=bool(hp_cfg.get("nonnegative_proximal_multipliers", False)),
        )
        grid_cfg = config["grid"]
        grid = HyperparamGrid(
            c1=tuple(float(v) for v in grid_cfg["c1"]),
            c2=None if grid_cfg.get("c2") is None else tuple(float(v) for v in grid_cfg["c2"]),
            gamma=tuple(float(v) for v in grid_cfg["gamma"]),
            tau=tuple(float(v) for v in grid_cfg["tau"]),
            sigma=tuple(float(v) for v in grid_cfg["sigma"]),
        )
        solver_cfg = config["solver"]
        solver = SolverConfig(
            tol=float(solver_cfg["tol"]),
            max_iter=int(solver_cfg["max_iter"]),
            working_set_size=int(solver_cfg["working_set_size"]),
            oracle_threshold=int(solver_cfg.get("oracle_threshold", 64)),
            verbose=bool(solver_cfg.get("verbose", False)),
            log_every=int(solver_cfg.get("log_every", 1000)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"Malformed configuration: {exc}") from exc

    return Settings(
        hyperparams=hyperparams,
        grid=grid,
        solver=solver,
        pca_components=config["privileged"]["pca_components"],
        standardize=bool(config["data"].get("standardize", True)),
        folds=int(config["cv"]["folds"]),
        tuning_fraction=float(config["cv"]["tuning_fraction"]),
        method=runtime["method"],
        seed=int(runtime.get("seed", 0)),
        workers=int(runtime["workers"]),
    )


def load_settings(path: Optional[Path] = None) -> Settings:
    """Defaults from config JSON, then PTW_CONFIG / PTW_WORKERS from the environment (.env honoured)."""
    load_dotenv(dotenv_path=ENV_PATH)
    config_path = path or Path(os.getenv("PTW_CONFIG", "") or CONFIG_PATH)
    settings = settings_from_config(load_config(Path(config_path)))

    workers = os.getenv("PTW_WORKERS", "").strip()
    if workers:
        try:
            count = int(workers)
        except ValueError as exc:
            raise ConfigError(f"PTW_WORKERS must be an integer, got '{workers}'") from exc
        if count < 1:
            raise ConfigError("PTW_WORKERS must be >= 1")
        settings = replace(settings, workers=count)
    return settings


def preflight(path: Optional[Path] = None) -> List[str]:
    load_dotenv(dotenv_path=ENV_PATH)
    config_path = Path(path or os.getenv("PTW_CONFIG", "") or CONFIG_PATH)
    try:
        return validate_config(load_config(config_path))
    except PinTwsvmError as exc:
        return [str(exc)]
