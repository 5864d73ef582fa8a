"""Synthetic fixtures: Gaussian blobs, label-flip noise and the bundled Iris data."""

from __future__ import annotations

import numpy as np
from sklearn.datasets import load_iris, make_blobs

from src.datasets import Dataset
from src.errors import ConfigError


def binary_blobs(n: int = 200, separation: float = 6.0, seed: int = 0, dim: int = 2, sigma: float = 1.0) -> Dataset:
    """Two isotropic clusters whose centres lie `separation`·σ apart on the first axis; labels ±1."""
    if n < 2:
        raise ConfigError("blobs need at least two samples")
    offset = np.zeros(dim)
    offset[0] = 0.5 * separation * sigma
    X, y = make_blobs(
        n_samples=[n - n // 2, n // 2],
        centers=np.vstack([offset, -offset]),
        cluster_std=sigma,
        random_state=seed,
    )
    return Dataset(features=X, labels=np.where(y == 0, 1, -1))


def multiclass_blobs(k: int = 3, n_per_class: int = 50, separation: float = 8.0, seed: int = 0, sigma: float = 1.0) -> Dataset:
    """k clusters on a circle, adjacent centres `separation`·σ apart; labels 0..k-1."""
    if k < 2:
        raise ConfigError("multiclass blobs need k >= 2")
    radius = 0.5 * separation * sigma / np.sin(np.pi / k)
    angles = 2 * np.pi * np.arange(k) / k
    centers = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    X, y = make_blobs(n_samples=[n_per_class] * k, centers=centers, cluster_std=sigma, random_state=seed)
    return Dataset(features=X, labels=y)


def flip_labels(ds: Dataset, rate: float, seed: int) -> Dataset:
    """Flip the sign of a `rate` fraction of binary labels, chosen without replacement."""
    if not 0.0 <= rate <= 1.0:
        raise ConfigError(f"flip rate must lie in [0, 1], got {rate}")
    rng = np.random.default_rng(seed)
    count = int(round(rate * ds.n_samples))
    labels = ds.labels.copy()
    flipped = rng.choice(ds.n_samples, size=count, replace=False)
    labels[flipped] = -labels[flipped]
    return ds.with_labels(labels)


def iris() -> Dataset:
    bunch = load_iris()
    return Dataset(features=bunch.data, labels=bunch.target, feature_names=tuple(bunch.feature_names))
