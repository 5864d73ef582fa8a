"""Classification metrics and stratified k-fold cross-validation with per-fold grid tuning."""

from __future__ import annotations

import itertools
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
from sklearn.model_selection import StratifiedKFold, train_test_split

from src.datasets import Dataset, Hyperparams, ScalingParams, standardize
from src.errors import ConfigError, CrossValidationError, DimensionError, PinTwsvmError
from src.kernels import KernelSpec
from src.privileged_pca import Components, PCABasis, extract_privileged, fit_pca
from src.qp_solver import SolverConfig
from src.trainer import METHODS, PRIVILEGED_METHODS, Model, fit_model, predict

LOGGER = logging.getLogger("pin_twsvmpi.evaluation")


def _paired(preds, truth) -> Tuple[np.ndarray, np.ndarray]:
    p = np.asarray(preds).ravel()
    t = np.asarray(truth).ravel()
    if p.shape != t.shape:
        raise DimensionError(f"prediction and truth lengths differ: {p.size} vs {t.size}")
    if p.size == 0:
        raise DimensionError("metrics need at least one prediction")
    return p, t


def accuracy(preds, truth) -> float:
    p, t = _paired(preds, truth)
    return float(np.mean(p == t))


def f1_score(preds, truth, positive_label: int = 1) -> float:
    """Harmonic mean of precision and recall; 0 when both vanish or are undefined."""
    p, t = _paired(preds, truth)
    tp = int(np.sum((p == positive_label) & (t == positive_label)))
    fp = int(np.sum((p == positive_label) & (t != positive_label)))
    fn = int(np.sum((p != positive_label) & (t == positive_label)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def macro_f1(preds, truth, labels: Optional[Sequence[int]] = None) -> float:
    p, t = _paired(preds, truth)
    labels = sorted(set(t.tolist())) if labels is None else list(labels)
    return float(np.mean([f1_score(p, t, label) for label in labels]))


def classification_f1(preds, truth) -> float:
    """F1 of class +1 for {+1, −1} truth, macro one-vs-rest average otherwise."""
    _, t = _paired(preds, truth)
    if set(np.unique(t).tolist()) <= {-1, 1}:
        return f1_score(preds, truth, 1)
    return macro_f1(preds, truth)


@dataclass(frozen=True)
class HyperparamGrid:
    c1: Tuple[float, ...]
    c2: Optional[Tuple[float, ...]] = None
    gamma: Tuple[float, ...] = (1.0,)
    tau: Tuple[float, ...] = (0.1, 0.25, 0.5, 0.75, 1.0)
    sigma: Tuple[float, ...] = (1.0,)

    def points(self, base: Hyperparams) -> List[Hyperparams]:
        """Grid order: c1, c2 (tied to c1 when unset), gamma, tau, sigma (ignored for linear)."""
        sigmas = self.sigma if base.kernel.kind == "rbf" else (base.kernel.sigma,)
        out = []
        for c1, c2, gamma, tau, sigma in itertools.product(
            self.c1, self.c2 or (None,), self.gamma, self.tau, sigmas
        ):
            out.append(
                replace(
                    base,
                    c1=c1,
                    c2=c1 if c2 is None else c2,
                    gamma=gamma,
                    tau=tau,
                    kernel=KernelSpec(base.kernel.kind, sigma),
                )
            )
        return out

    @classmethod
    def single(cls, hp: Hyperparams) -> "HyperparamGrid":
        return cls(c1=(hp.c1,), c2=(hp.c2,), gamma=(hp.gamma,), tau=(hp.tau,), sigma=(hp.kernel.sigma,))


@dataclass(frozen=True)
class PreparedSplit:
    train: Dataset
    test: Dataset
    scaling: Optional[ScalingParams]
    basis: Optional[PCABasis]


def prepare_split(
    train: Dataset,
    test: Dataset,
    method: str = "pin_twsvmpi",
    pca_components: Components = 0.95,
    scale: bool = True,
) -> PreparedSplit:
    """Fit scaling and the PCA basis on the training part only, then apply both to the test part."""
    scaling = None
    if scale:
        train, scaling = standardize(train)
        test = scaling.apply_to(test)
    basis = None
    if method in PRIVILEGED_METHODS and train.privileged is None:
        basis = fit_pca(train.features, pca_components)
        train = train.with_privileged(extract_privileged(train.features, basis))
        test = test.with_privileged(extract_privileged(test.features, basis))
    return PreparedSplit(train=train, test=test, scaling=scaling, basis=basis)


@dataclass(frozen=True)
class FoldResult:
    fold: int
    accuracy: float
    f1: float
    hyperparams: Hyperparams
    train_seconds: float
    n_train: int
    n_test: int

    def to_record(self, include_timings: bool) -> Dict:
        record = {
            "record": "fold",
            "fold": self.fold,
            "accuracy": self.accuracy,
            "f1": self.f1,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "hyperparams": self.hyperparams.to_dict(),
        }
        if include_timings:
            record["train_seconds"] = self.train_seconds
        return record


@dataclass(frozen=True)
class CVReport:
    method: str
    folds: Tuple[FoldResult, ...]
    seed: int

    @property
    def accuracies(self) -> np.ndarray:
        return np.array([fold.accuracy for fold in self.folds])

    @property
    def f1_scores(self) -> np.ndarray:
        return np.array([fold.f1 for fold in self.folds])

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std_accuracy(self) -> float:
        return float(np.std(self.accuracies))

    @property
    def mean_f1(self) -> float:
        return float(np.mean(self.f1_scores))

    def to_records(self, include_timings: bool = False) -> List[Dict]:
        records = [fold.to_record(include_timings) for fold in self.folds]
        summary = {
            "record": "summary",
            "method": self.method,
            "k": len(self.folds),
            "seed": self.seed,
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "mean_f1": self.mean_f1,
        }
        if include_timings:
            summary["total_train_seconds"] = float(sum(fold.train_seconds for fold in self.folds))
        records.append(summary)
        return records


def write_records(records: Iterable[Dict], out: Union[Path, str, TextIO]) -> None:
    """One JSON object per line, keys sorted."""
    lines = "".join(json.dumps(record, sort_keys=True) + "\n" for record in records)
    if isinstance(out, (str, Path)):
        Path(out).write_text(lines, encoding="utf-8")
    else:
        out.write(lines)


def write_cv_report(report: CVReport, out: Union[Path, str, TextIO], include_timings: bool = False) -> None:
    write_records(report.to_records(include_timings), out)


def stratified_folds(labels: np.ndarray, k: int, seed: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    labels = np.asarray(labels)
    if k < 2:
        raise ConfigError(f"k must be >= 2, got {k}")
    if labels.size < k:
        raise CrossValidationError(f"{labels.size} samples cannot fill {k} folds")
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    folds = [(train, test) for train, test in splitter.split(np.zeros(labels.size), labels)]
    for index, (_, test) in enumerate(folds):
        if np.unique(labels[test]).size < 2:
            raise CrossValidationError(f"test fold {index} holds a single class")
    return folds


def fit_and_score(
    train: Dataset,
    test: Dataset,
    hp: Hyperparams,
    cfg: SolverConfig,
    method: str,
    allow_unconverged: bool = False,
) -> Tuple[float, float, float, Model]:
    """Train on prepared data; returns (accuracy, f1, seconds, model)."""
    started = time.perf_counter()
    model = fit_model(train, hp, cfg, method, allow_unconverged=allow_unconverged)
    seconds = time.perf_counter() - started
    preds = predict(model, test.features)
    return accuracy(preds, test.labels), classification_f1(preds, test.labels), seconds, model


def _tuning_split(ds: Dataset, fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    n_classes = len(ds.classes)
    n_tune = max(n_classes, math.ceil(fraction * ds.n_samples))
    indices = np.arange(ds.n_samples)
    try:
        fit_idx, tune_idx = train_test_split(
            indices, test_size=n_tune, stratify=ds.labels, random_state=seed
        )
    except ValueError:
        fit_idx, tune_idx = train_test_split(indices, test_size=n_tune, random_state=seed)
    return np.sort(fit_idx), np.sort(tune_idx)


def select_hyperparams(
    ds: Dataset,
    candidates: Sequence[Hyperparams],
    cfg: SolverConfig,
    method: str,
    seed: int,
    tuning_fraction: float = 0.1,
) -> Hyperparams:
    """Best tuning-subset accuracy; ties go to smaller c1+c2, then smaller sigma, then grid order."""
    if len(candidates) == 1:
        LOGGER.debug("Single grid point; tuning skipped")
        return candidates[0]
    fit_idx, tune_idx = _tuning_split(ds, tuning_fraction, seed)
    fit_ds, tune_ds = ds.subset(fit_idx), ds.subset(tune_idx)

    best_key = None
    best = candidates[0]
    for index, hp in enumerate(candidates):
        try:
            score = fit_and_score(fit_ds, tune_ds, hp, cfg, method, allow_unconverged=True)[0]
        except PinTwsvmError as exc:
            LOGGER.warning("Grid point %d skipped: %s", index, exc)
            continue
        key = (-score, hp.c1 + hp.c2, hp.kernel.sigma, index)
        if best_key is None or key < best_key:
            best_key, best = key, hp
    if best_key is None:
        raise CrossValidationError(f"every one of the {len(candidates)} grid points failed to train")
    return best


def kfold_cv(
    ds: Dataset,
    grid: HyperparamGrid,
    k: int,
    cfg: SolverConfig,
    seed: int,
    base: Optional[Hyperparams] = None,
    method: str = "pin_twsvmpi",
    pca_components: Components = 0.95,
    scale: bool = True,
    tuning_fraction: float = 0.1,
    workers: int = 1,
) -> CVReport:
    if method not in METHODS:
        raise ConfigError(f"Unknown method '{method}'; expected one of {METHODS}")
    base = base or Hyperparams(seed=seed)
    candidates = grid.points(base)
    folds = stratified_folds(ds.labels, k, seed)

    def run_fold(index: int) -> FoldResult:
        train_idx, test_idx = folds[index]
        split = prepare_split(ds.subset(train_idx), ds.subset(test_idx), method, pca_components, scale)
        hp = select_hyperparams(split.train, candidates, cfg, method, seed + index, tuning_fraction)
        acc, f1, seconds, _ = fit_and_score(split.train, split.test, hp, cfg, method)
        LOGGER.info("fold=%d accuracy=%.4f f1=%.4f c1=%g tau=%g sigma=%g", index, acc, f1, hp.c1, hp.tau, hp.kernel.sigma)
        return FoldResult(
            fold=index,
            accuracy=acc,
            f1=f1,
            hyperparams=hp,
            train_seconds=seconds,
            n_train=int(train_idx.size),
            n_test=int(test_idx.size),
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_fold, range(k)))
    else:
        results = [run_fold(index) for index in range(k)]
    return CVReport(method=method, folds=tuple(sorted(results, key=lambda r: r.fold)), seed=seed)
