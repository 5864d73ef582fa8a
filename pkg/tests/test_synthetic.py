import numpy as np
import pytest

from src.errors import ConfigError
from src.synthetic import binary_blobs, flip_labels, iris, multiclass_blobs


class TestBlobs:
    def test_binary_balance_and_labels(self):
        ds = binary_blobs(n=21, seed=0)
        assert ds.n_samples == 21
        assert set(ds.labels.tolist()) == {-1, 1}
        assert int(np.sum(ds.labels == 1)) == 11

    def test_seeded(self):
        np.testing.assert_array_equal(binary_blobs(seed=4).features, binary_blobs(seed=4).features)

    def test_multiclass(self):
        ds = multiclass_blobs(k=4, n_per_class=10)
        assert np.bincount(ds.labels).tolist() == [10, 10, 10, 10]

    def test_errors(self):
        with pytest.raises(ConfigError):
            binary_blobs(n=1)
        with pytest.raises(ConfigError):
            multiclass_blobs(k=1)


class TestFlipLabels:
    def test_exact_count(self):
        ds = binary_blobs(n=100, seed=1)
        noisy = flip_labels(ds, 0.2, seed=3)
        assert int(np.sum(noisy.labels != ds.labels)) == 20
        np.testing.assert_array_equal(noisy.features, ds.features)

    def test_rate_bounds(self):
        with pytest.raises(ConfigError):
            flip_labels(binary_blobs(n=10), 1.5, seed=0)


def test_iris_shape():
    ds = iris()
    assert ds.features.shape == (150, 4)
    np.testing.assert_array_equal(ds.classes, [0, 1, 2])
