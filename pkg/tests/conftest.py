import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from src.datasets import ClassPartition, Dataset, partition_by_class  # noqa: E402
from src.privileged_pca import extract_privileged, fit_pca  # noqa: E402
from src.synthetic import binary_blobs  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: banded benchmark targets that train many models (deselect with -m 'not slow')")


def _random_partition(rng: np.random.Generator, m1: int, m2: int, d: int = 2, d_star: int = 2) -> ClassPartition:
    X = np.vstack([rng.normal(1.0, 1.0, (m1, d)), rng.normal(-1.0, 1.0, (m2, d))])
    X_star = np.vstack([rng.normal(0.5, 1.0, (m1, d_star)), rng.normal(-0.5, 1.0, (m2, d_star))])
    labels = np.concatenate([np.ones(m1, dtype=int), -np.ones(m2, dtype=int)])
    return partition_by_class(Dataset(features=X, labels=labels, privileged=X_star))


@pytest.fixture
def make_partition():
    """Factory for small random two-class partitions with privileged features."""
    return _random_partition


@pytest.fixture
def blobs_with_pi() -> Dataset:
    ds = binary_blobs(n=100, separation=6.0, seed=3)
    return ds.with_privileged(extract_privileged(ds.features, fit_pca(ds.features, 0.95)))


def write_csv(path: Path, X: np.ndarray, y: np.ndarray) -> Path:
    lines = [",".join([*(repr(float(v)) for v in row), str(int(label))]) for row, label in zip(X, y)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def csv_writer():
    return write_csv
