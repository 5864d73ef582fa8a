"""Dataset representation, loading, class partitioning and standardization."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.preprocessing import StandardScaler

from src.errors import ConfigError, DatasetError, DegenerateDatasetError, DimensionError
from src.kernels import KernelSpec

LOGGER = logging.getLogger("pin_twsvmpi.datasets")

FORMATS = ("csv", "sparse")
DISTANCE_RULES = ("paper_squared_norm", "euclidean")
MISSING_TOKENS = {"", "?", "na", "nan", "null"}


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    privileged: Optional[np.ndarray] = None
    feature_names: Optional[Tuple[str, ...]] = None

    def __post_init__(self) -> None:
        features = _frozen(np.atleast_2d(self.features))
        labels = np.array(self.labels, dtype=int, copy=True).ravel()
        labels.setflags(write=False)
        if features.shape[0] != labels.shape[0]:
            raise DimensionError(
                f"Feature rows ({features.shape[0]}) and labels ({labels.shape[0]}) disagree."
            )
        if not np.all(np.isfinite(features)):
            raise DatasetError("Features contain NaN or Inf after loading.")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

        if self.privileged is not None:
            privileged = _frozen(np.atleast_2d(self.privileged))
            if privileged.shape[0] != features.shape[0]:
                raise DimensionError(
                    f"Privileged rows ({privileged.shape[0]}) must match samples ({features.shape[0]})."
                )
            if not np.all(np.isfinite(privileged)):
                raise DatasetError("Privileged matrix contains NaN or Inf.")
            object.__setattr__(self, "privileged", privileged)

        if self.feature_names is not None:
            names = tuple(str(n) for n in self.feature_names)
            if len(names) != features.shape[1]:
                raise DimensionError("feature_names length must equal the feature count.")
            object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def classes(self) -> Tuple[int, ...]:
        return tuple(int(c) for c in np.unique(self.labels))

    def is_binary(self) -> bool:
        return set(self.classes) <= {-1, 1}

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        privileged = None if self.privileged is None else self.privileged[idx]
        return Dataset(self.features[idx], self.labels[idx], privileged, self.feature_names)

    def with_privileged(self, privileged: Optional[np.ndarray]) -> "Dataset":
        return replace(self, privileged=privileged)

    def with_labels(self, labels: np.ndarray) -> "Dataset":
        return replace(self, labels=labels)


@dataclass(frozen=True)
class ClassPartition:
    A: np.ndarray
    B: np.ndarray
    A_star: Optional[np.ndarray]
    B_star: Optional[np.ndarray]
    index_pos: np.ndarray
    index_neg: np.ndarray

    @property
    def m1(self) -> int:
        return int(self.A.shape[0])

    @property
    def m2(self) -> int:
        return int(self.B.shape[0])

    @property
    def has_privileged(self) -> bool:
        return self.A_star is not None and self.B_star is not None

    def support(self) -> np.ndarray:
        """Training rows in partition order (class +1 first); kernel columns use this order."""
        return np.vstack([self.A, self.B])

    def privileged_support(self) -> np.ndarray:
        if not self.has_privileged:
            raise DatasetError("Partition carries no privileged information.")
        return np.vstack([self.A_star, self.B_star])

    def reassemble(self) -> np.ndarray:
        out = np.empty((self.m1 + self.m2, self.A.shape[1]), dtype=float)
        out[self.index_pos] = self.A
        out[self.index_neg] = self.B
        return out


@dataclass(frozen=True)
class Hyperparams:
    c1: float = 1.0
    c2: float = 1.0
    gamma: float = 1.0
    tau: float = 0.5
    kernel: KernelSpec = field(default_factory=KernelSpec)
    seed: int = 0
    distance_rule: str = "paper_squared_norm"
    ridge: Optional[float] = None
    nonnegative_proximal_multipliers: bool = False

    def __post_init__(self) -> None:
        for name in ("c1", "c2", "gamma"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(f"Hyperparameter {name} must be positive, got {value}.")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError(f"tau must lie in [0, 1], got {self.tau}.")
        if self.distance_rule not in DISTANCE_RULES:
            raise ConfigError(
                f"Unknown distance rule '{self.distance_rule}'; expected one of {DISTANCE_RULES}."
            )
        if self.ridge is not None and self.ridge < 0:
            raise ConfigError(f"ridge must be non-negative, got {self.ridge}.")

    def to_dict(self) -> Dict:
        return {
            "c1": self.c1,
            "c2": self.c2,
            "gamma": self.gamma,
            "tau": self.tau,
            "kernel": self.kernel.to_dict(),
            "seed": self.seed,
            "distance_rule": self.distance_rule,
            "ridge": self.ridge,
            "nonnegative_proximal_multipliers": self.nonnegative_proximal_multipliers,
        }

    @classmethod
    def from_dict(cls, payload: Dict) -> "Hyperparams":
        return cls(
            c1=float(payload["c1"]),
            c2=float(payload["c2"]),
            gamma=float(payload["gamma"]),
            tau=float(payload["tau"]),
            kernel=KernelSpec.from_dict(payload.get("kernel", {})),
            seed=int(payload.get("seed", 0)),
            distance_rule=payload.get("distance_rule", "paper_squared_norm"),
            ridge=payload.get("ridge"),
            nonnegative_proximal_multipliers=bool(
                payload.get("nonnegative_proximal_multipliers", False)
            ),
        )


@dataclass(frozen=True)
class ScalingParams:
    mean: np.ndarray
    scale: np.ndarray

    def apply(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.mean.shape[0]:
            raise DimensionError(
                f"Scaling expects {self.mean.shape[0]} features, got {X.shape[1]}."
            )
        return (X - self.mean) / self.scale

    def apply_to(self, ds: Dataset) -> Dataset:
        return replace(ds, features=self.apply(ds.features))

    def to_dict(self) -> Dict:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, payload: Dict) -> "ScalingParams":
        return cls(mean=np.asarray(payload["mean"], dtype=float), scale=np.asarray(payload["scale"], dtype=float))


def _parse_label(token: str, line: int) -> int:
    try:
        value = float(token)
    except ValueError as exc:
        raise DatasetError(f"label '{token}' is not numeric", line=line) from exc
    if not math.isfinite(value) or value != int(value):
        raise DatasetError(f"label '{token}' is not an integer class id", line=line)
    return int(value)


def _impute_column_means(rows: List[List[float]], line_numbers: List[int]) -> np.ndarray:
    X = np.asarray(rows, dtype=float)
    missing = np.isnan(X)
    if missing.any():
        for j in np.flatnonzero(missing.any(axis=0)):
            present = X[~missing[:, j], j]
            if present.size == 0:
                raise DatasetError(
                    f"column {j + 1} is blank through line {line_numbers[-1]}; no values to impute from",
                    line=line_numbers[0],
                )
            X[missing[:, j], j] = present.mean()
        LOGGER.info("Imputed %d missing cells with column means", int(missing.sum()))
        imputed_lines = [line_numbers[i] for i in np.flatnonzero(missing.any(axis=1))]
        LOGGER.debug("Rows with imputed cells: lines %s", imputed_lines)
    return X


def _load_csv(path: Path) -> Tuple[np.ndarray, np.ndarray, Optional[Tuple[str, ...]]]:
    rows: List[List[float]] = []
    labels: List[int] = []
    line_numbers: List[int] = []
    header: Optional[Tuple[str, ...]] = None
    width: Optional[int] = None

    with path.open(newline="", encoding="utf-8") as handle:
        for line_no, raw in enumerate(csv.reader(handle), start=1):
            cells = [cell.strip() for cell in raw]
            if not cells or all(not cell for cell in cells):
                continue
            if width is None and header is None and not rows:
                if all(_is_text(cell) for cell in cells):
                    header = tuple(cells[:-1])
                    width = len(cells)
                    continue
            if width is None:
                width = len(cells)
            if len(cells) != width:
                raise DatasetError(
                    f"expected {width} columns, found {len(cells)}", line=line_no
                )
            if width < 2:
                raise DatasetError("need at least one feature column and a label column", line=line_no)
            row: List[float] = []
            for cell in cells[:-1]:
                if cell.lower() in MISSING_TOKENS:
                    row.append(math.nan)
                    continue
                try:
                    row.append(float(cell))
                except ValueError as exc:
                    raise DatasetError(f"non-numeric feature token '{cell}'", line=line_no) from exc
                if not math.isfinite(row[-1]):
                    raise DatasetError(f"non-finite feature token '{cell}'", line=line_no)
            rows.append(row)
            labels.append(_parse_label(cells[-1], line_no))
            line_numbers.append(line_no)

    if not rows:
        raise DatasetError(f"no data rows in {path}")
    return _impute_column_means(rows, line_numbers), np.asarray(labels, dtype=int), header


def _is_text(cell: str) -> bool:
    if cell.lower() in MISSING_TOKENS:
        return False
    try:
        float(cell)
    except ValueError:
        return True
    return False


def _load_sparse(path: Path, n_features: Optional[int]) -> Tuple[np.ndarray, np.ndarray]:
    entries: List[Dict[int, float]] = []
    labels: List[int] = []
    max_index = 0
    with path.open(encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            labels.append(_parse_label(tokens[0], line_no))
            row: Dict[int, float] = {}
            for token in tokens[1:]:
                idx_text, sep, val_text = token.partition(":")
                if not sep:
                    raise DatasetError(f"malformed token '{token}' (expected idx:val)", line=line_no)
                try:
                    idx = int(idx_text)
                    val = float(val_text)
                except ValueError as exc:
                    raise DatasetError(f"malformed token '{token}'", line=line_no) from exc
                if idx < 1:
                    raise DatasetError(f"feature index {idx} must be 1-based", line=line_no)
                if idx in row:
                    raise DatasetError(f"duplicate feature index {idx}", line=line_no)
                if not math.isfinite(val):
                    raise DatasetError(f"non-finite value in '{token}'", line=line_no)
                row[idx] = val
                max_index = max(max_index, idx)
            entries.append(row)

    if not entries:
        raise DatasetError(f"no data rows in {path}")
    width = n_features or max_index
    if max_index > width:
        raise DatasetError(f"feature index {max_index} exceeds declared width {width}")
    X = np.zeros((len(entries), width), dtype=float)
    for i, row in enumerate(entries):
        for idx, val in row.items():
            X[i, idx - 1] = val
    return X, np.asarray(labels, dtype=int)


def load_dataset(
    path,
    fmt: str = "csv",
    privileged_columns: Optional[Sequence[int]] = None,
    n_features: Optional[int] = None,
) -> Dataset:
    """Load a dataset; `privileged_columns` moves those feature columns into the privileged matrix."""
    path = Path(path)
    if fmt not in FORMATS:
        raise ConfigError(f"Unknown dataset format '{fmt}'; expected one of {FORMATS}.")
    if not path.exists():
        raise DatasetError(f"dataset file not found: {path}")
    try:
        if fmt == "csv":
            X, y, names = _load_csv(path)
        else:
            X, y = _load_sparse(path, n_features)
            names = None
    except (OSError, UnicodeDecodeError) as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc

    privileged = None
    if privileged_columns:
        cols = sorted(set(int(c) for c in privileged_columns))
        if cols[0] < 0 or cols[-1] >= X.shape[1]:
            raise DatasetError(f"privileged columns {cols} out of range for {X.shape[1]} features")
        keep = [j for j in range(X.shape[1]) if j not in cols]
        if not keep:
            raise DatasetError("privileged columns leave no ordinary features")
        privileged = X[:, cols]
        X = X[:, keep]
        if names is not None:
            names = tuple(names[j] for j in keep)

    LOGGER.info("Loaded %s: %d samples, %d features", path, X.shape[0], X.shape[1])
    return Dataset(features=X, labels=y, privileged=privileged, feature_names=names)


def partition_by_class(ds: Dataset) -> ClassPartition:
    if not ds.is_binary():
        raise DatasetError(f"binary labels in {{+1, -1}} required, found {ds.classes}")
    index_pos = np.flatnonzero(ds.labels == 1)
    index_neg = np.flatnonzero(ds.labels == -1)
    if index_pos.size == 0 or index_neg.size == 0:
        raise DegenerateDatasetError(
            f"both classes need members (found {index_pos.size} positive, {index_neg.size} negative)"
        )
    A_star = B_star = None
    if ds.privileged is not None:
        A_star = ds.privileged[index_pos]
        B_star = ds.privileged[index_neg]
    return ClassPartition(
        A=ds.features[index_pos],
        B=ds.features[index_neg],
        A_star=A_star,
        B_star=B_star,
        index_pos=index_pos,
        index_neg=index_neg,
    )


def standardize(ds: Dataset) -> Tuple[Dataset, ScalingParams]:
    """Zero-mean, unit-variance feature columns; constant columns are only centered."""
    if ds.n_samples < 2:
        raise DatasetError("standardization needs at least two samples")
    scaler = StandardScaler().fit(ds.features)
    params = ScalingParams(mean=np.asarray(scaler.mean_, dtype=float), scale=np.asarray(scaler.scale_, dtype=float))
    return params.apply_to(ds), params
