import numpy as np
import pytest

from src.errors import ConfigError, DimensionError
from src.kernels import KernelSpec, gram, kernel_eval

LINEAR = KernelSpec("linear")
RBF = KernelSpec("rbf", sigma=1.0)


class TestKernelEval:
    def test_linear_orthogonal(self):
        assert kernel_eval(LINEAR, [1.0, 0.0], [0.0, 1.0]) == 0.0

    @pytest.mark.parametrize("sigma", [0.1, 1.0, 7.5])
    def test_rbf_same_point(self, sigma):
        assert kernel_eval(KernelSpec("rbf", sigma), [0.3, -2.0], [0.3, -2.0]) == 1.0

    def test_rbf_distance_two(self):
        assert kernel_eval(RBF, [0.0, 0.0], [2.0, 0.0]) == pytest.approx(np.exp(-2.0))
        assert kernel_eval(RBF, [0.0, 0.0], [2.0, 0.0]) == pytest.approx(0.135335, abs=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            kernel_eval(LINEAR, [1.0, 2.0], [1.0])


class TestGram:
    def test_linear_identity(self):
        np.testing.assert_array_equal(gram(LINEAR, np.eye(3), np.eye(3)), np.eye(3))

    def test_rbf_symmetric_unit_diagonal(self):
        X = np.random.default_rng(0).normal(size=(12, 4))
        G = gram(RBF, X, X)
        np.testing.assert_allclose(G, G.T)
        np.testing.assert_allclose(np.diag(G), 1.0)

    @pytest.mark.parametrize("spec", [LINEAR, KernelSpec("rbf", 0.7)])
    def test_transpose(self, spec):
        rng = np.random.default_rng(1)
        Xa, Xb = rng.normal(size=(5, 3)), rng.normal(size=(7, 3))
        np.testing.assert_allclose(gram(spec, Xa, Xb), gram(spec, Xb, Xa).T)

    def test_single_row_matches_kernel_eval(self):
        rng = np.random.default_rng(2)
        x, Xb = rng.normal(size=3), rng.normal(size=(6, 3))
        row = gram(RBF, x[None, :], Xb)[0]
        np.testing.assert_allclose(row, [kernel_eval(RBF, x, z) for z in Xb])

    def test_rbf_positive_semidefinite(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(40, 3))
        G = gram(KernelSpec("rbf", 0.5), X, X)
        forms = [v @ G @ v for v in rng.normal(size=(200, 40))]
        assert min(forms) >= -1e-8 * X.shape[0]

    def test_column_mismatch(self):
        with pytest.raises(DimensionError):
            gram(LINEAR, np.ones((2, 3)), np.ones((2, 2)))


class TestKernelSpec:
    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            KernelSpec("poly")

    def test_sigma_positive(self):
        with pytest.raises(ConfigError):
            KernelSpec("rbf", sigma=0.0)

    def test_dict_records_convention(self):
        spec = KernelSpec("rbf", 2.0)
        assert "convention" in spec.to_dict()
        assert KernelSpec.from_dict(spec.to_dict()) == spec

    def test_foreign_convention_rejected(self):
        with pytest.raises(ConfigError):
            KernelSpec.from_dict({"kind": "rbf", "sigma": 1.0, "convention": "exp(-gamma*||x-z||^2)"})
