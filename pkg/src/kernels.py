"""Kernel evaluation and Gram matrices for the nonlinear path."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

import numpy as np
from scipy.spatial.distance import cdist

from src.errors import ConfigError, DimensionError

KERNELS = ("linear", "rbf")
RBF_CONVENTION = "exp(-||x-z||^2/(2*sigma^2))"


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "linear"
    sigma: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in KERNELS:
            raise ConfigError(f"Unknown kernel '{self.kind}'; expected one of {KERNELS}.")
        if not self.sigma > 0:
            raise ConfigError(f"Kernel width sigma must be positive, got {self.sigma}.")

    def to_dict(self) -> Dict:
        out: Dict = {"kind": self.kind}
        if self.kind == "rbf":
            out["sigma"] = self.sigma
            out["convention"] = RBF_CONVENTION
        return out

    @classmethod
    def from_dict(cls, payload: Dict) -> "KernelSpec":
        convention = payload.get("convention")
        if convention is not None and convention != RBF_CONVENTION:
            raise ConfigError(f"Unsupported rbf convention in stored kernel: {convention}")
        return cls(kind=payload.get("kind", "linear"), sigma=float(payload.get("sigma", 1.0)))


def _as_rows(X, name: str) -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be a vector or a matrix, got shape {arr.shape}.")
    return arr


def gram(spec: KernelSpec, Xa, Xb) -> np.ndarray:
    """Entry (i, j) is the kernel between row i of Xa and row j of Xb."""
    A = _as_rows(Xa, "Xa")
    B = _as_rows(Xb, "Xb")
    if A.shape[1] != B.shape[1]:
        raise DimensionError(
            f"Kernel inputs disagree on dimension: {A.shape[1]} vs {B.shape[1]}."
        )
    if spec.kind == "linear":
        return A @ B.T
    sq = cdist(A, B, metric="sqeuclidean")
    return np.exp(-sq / (2.0 * spec.sigma**2))


def kernel_eval(spec: KernelSpec, x, z) -> float:
    xv = np.asarray(x, dtype=float).ravel()
    zv = np.asarray(z, dtype=float).ravel()
    if xv.shape != zv.shape:
        raise DimensionError(f"Kernel inputs disagree on dimension: {xv.size} vs {zv.size}.")
    return float(gram(spec, xv, zv)[0, 0])
