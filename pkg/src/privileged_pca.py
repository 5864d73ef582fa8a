"""Principal-component privileged features for datasets without expert side information."""

from __future__ import annotations

import logging
import numbers
from dataclasses import dataclass
from typing import Dict, Union

import numpy as np
from scipy.linalg import eigh

from src.errors import ConfigError, DegenerateDatasetError, DimensionError

LOGGER = logging.getLogger("pin_twsvmpi.pca")

Components = Union[int, float]


@dataclass(frozen=True)
class PCABasis:
    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    total_variance: float

    @property
    def n_components(self) -> int:
        return int(self.components.shape[0])

    @property
    def explained_ratio(self) -> np.ndarray:
        return self.explained_variance / self.total_variance

    def to_dict(self) -> Dict:
        return {
            "mean": self.mean.tolist(),
            "components": self.components.tolist(),
            "explained_variance": self.explained_variance.tolist(),
            "total_variance": self.total_variance,
        }

    @classmethod
    def from_dict(cls, payload: Dict) -> "PCABasis":
        return cls(
            mean=np.asarray(payload["mean"], dtype=float),
            components=np.atleast_2d(np.asarray(payload["components"], dtype=float)),
            explained_variance=np.asarray(payload["explained_variance"], dtype=float),
            total_variance=float(payload["total_variance"]),
        )


def _component_count(k: Components, eigenvalues: np.ndarray, limit: int) -> int:
    if isinstance(k, bool) or not isinstance(k, numbers.Real):
        raise ConfigError(f"pca components must be a count or a fraction, got {k!r}")
    if isinstance(k, numbers.Integral):
        if not 1 <= k <= limit:
            raise ConfigError(f"pca component count {k} outside [1, {limit}]")
        return int(k)
    if not 0.0 < k <= 1.0:
        raise ConfigError(f"pca variance fraction must lie in (0, 1], got {k}")
    ratio = np.cumsum(eigenvalues) / eigenvalues.sum()
    count = int(np.searchsorted(ratio, k - 1e-12) + 1)
    return min(count, limit)


def fit_pca(X, k: Components = 0.95) -> PCABasis:
    """Sample-covariance eigendecomposition; an int k is a count, a float k a variance fraction."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    l, d = X.shape
    if l < 2:
        raise DegenerateDatasetError("PCA needs at least two rows")
    mean = X.mean(axis=0)
    cov = np.atleast_2d(np.cov(X, rowvar=False, ddof=1))
    eigenvalues, eigenvectors = eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.clip(eigenvalues[order], 0.0, None)
    eigenvectors = eigenvectors[:, order]
    total = float(np.trace(cov))
    if total <= 1e-12 * max(1.0, float(np.abs(X).max())) ** 2:
        raise DegenerateDatasetError("all rows are identical; covariance is zero")

    count = _component_count(k, eigenvalues, min(l - 1, d))
    components = eigenvectors[:, :count].T.copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    LOGGER.info("PCA kept %d of %d components (%.4f of variance)", count, d, eigenvalues[:count].sum() / total)
    return PCABasis(
        mean=mean,
        components=components,
        explained_variance=eigenvalues[:count].copy(),
        total_variance=total,
    )


def extract_privileged(X, basis: PCABasis) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != basis.mean.shape[0]:
        raise DimensionError(f"basis expects {basis.mean.shape[0]} features, got {X.shape[1]}")
    return (X - basis.mean) @ basis.components.T


def reconstruct(Z, basis: PCABasis) -> np.ndarray:
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if Z.shape[1] != basis.n_components:
        raise DimensionError(f"basis has {basis.n_components} components, got {Z.shape[1]}")
    return Z @ basis.components + basis.mean
