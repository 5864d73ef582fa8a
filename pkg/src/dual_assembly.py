"""Dual QP construction for Pin-TWSVMPI (linear and kernel) and the Pin-TWSVM baseline.

Every block is obtained by expanding the Wolfe dual in matrix form: the class-1
objective is ``½‖P x‖² + (1/2γ)‖R x + r0‖² + ½‖α₁‖² + (1/2γ)‖α₂‖² + e₂ᵀ(α₄ − α₃)``
with ``P = [−Aᵀ, 0, −Bᵀ, Bᵀ]`` and ``R = [0, −A*ᵀ, B*ᵀ, (1/τ)B*ᵀ]``. Class 2 is the
same construction with the class roles swapped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from src.datasets import ClassPartition, Hyperparams
from src.errors import AssemblyError, DegenerateDatasetError, DimensionError
from src.kernels import KernelSpec, gram

LOGGER = logging.getLogger("pin_twsvmpi.assembly")

WHICH = ("class1", "class2")
RIDGE_SCALE = 1e-7


@dataclass(frozen=True)
class GeneralQP:
    """minimize ½xᵀQx + fᵀx subject to Cx = D and x ≥ 0 outside `free_mask`."""

    Q: np.ndarray
    f: np.ndarray
    C: np.ndarray
    D: np.ndarray
    block_layout: Tuple[int, ...] = ()
    free_mask: Optional[np.ndarray] = None
    constant: float = 0.0
    kind: str = "generic"
    meta: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        f = np.array(self.f, dtype=float).ravel()
        C = np.array(np.atleast_2d(self.C), dtype=float)
        D = np.array(self.D, dtype=float).ravel()
        n = f.shape[0]
        if Q.shape != (n, n):
            raise DimensionError(f"Q must be {n}x{n}, got {Q.shape}")
        if C.shape[1] != n or C.shape[0] != D.shape[0]:
            raise DimensionError(f"C {C.shape} and D {D.shape} inconsistent with n={n}")
        if self.block_layout and sum(self.block_layout) != n:
            raise DimensionError(f"block_layout {self.block_layout} does not cover n={n}")
        free = np.zeros(n, dtype=bool) if self.free_mask is None else np.array(self.free_mask, dtype=bool)
        if free.shape != (n,):
            raise DimensionError("free_mask must have one entry per variable")
        Q = 0.5 * (Q + Q.T)
        for arr in (Q, f, C, D, free):
            arr.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "free_mask", free)
        object.__setattr__(self, "block_layout", tuple(int(b) for b in self.block_layout))

    @property
    def n(self) -> int:
        return int(self.f.shape[0])

    @property
    def bounded(self) -> np.ndarray:
        return ~self.free_mask

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ (self.Q @ x) + self.f @ x)

    def blocks(self, x: np.ndarray) -> Tuple[np.ndarray, ...]:
        if not self.block_layout:
            return (x,)
        cuts = np.cumsum(self.block_layout)[:-1]
        return tuple(np.split(np.asarray(x, dtype=float), cuts))


@dataclass(frozen=True)
class KernelMaps:
    """Augmented Gram features M, N, M*, N* against the stacked training rows."""

    M: np.ndarray
    N: np.ndarray
    M_star: np.ndarray
    N_star: np.ndarray
    support: np.ndarray
    privileged_support: np.ndarray


@dataclass(frozen=True)
class BaselineMaps:
    H: np.ndarray
    G: np.ndarray
    support: Optional[np.ndarray] = None


def _check_which(which: str) -> None:
    if which not in WHICH:
        raise AssemblyError(f"which must be one of {WHICH}, got '{which}'")


def _require_tau(hp: Hyperparams) -> None:
    if hp.tau <= 0:
        raise AssemblyError("tau = 0 leaves the dual undefined; use the primal-oracle path")


def _augment(K: np.ndarray) -> np.ndarray:
    return np.hstack([K, np.ones((K.shape[0], 1))])


def assemble_from_features(
    FA: np.ndarray,
    FB: np.ndarray,
    FA_star: np.ndarray,
    FB_star: np.ndarray,
    c: float,
    hp: Hyperparams,
) -> GeneralQP:
    """Class-1 dual for own-class rows FA and other-class rows FB (any feature map)."""
    _require_tau(hp)
    m1, m2 = FA.shape[0], FB.shape[0]
    if m1 == 0 or m2 == 0:
        raise DegenerateDatasetError("both classes need members to assemble a dual")
    if FA.shape[1] != FB.shape[1] or FA_star.shape[1] != FB_star.shape[1]:
        raise DimensionError("class feature blocks disagree on dimension")
    if FA_star.shape[0] != m1 or FB_star.shape[0] != m2:
        raise DimensionError("privileged rows must match ordinary rows per class")
    gamma, tau = hp.gamma, hp.tau

    P = np.hstack([-FA.T, np.zeros((FA.shape[1], m1)), -FB.T, FB.T])
    R = np.hstack([np.zeros((FA_star.shape[1], m1)), -FA_star.T, FB_star.T, FB_star.T / tau])
    r0 = -c * FB_star.sum(axis=0)

    Q = P.T @ P + (R.T @ R) / gamma
    idx1 = np.arange(m1)
    idx2 = np.arange(m1, 2 * m1)
    Q[idx1, idx1] += 1.0
    Q[idx2, idx2] += 1.0 / gamma

    f = (R.T @ r0) / gamma
    f[2 * m1 : 2 * m1 + m2] -= 1.0
    f[2 * m1 + m2 :] += 1.0

    e1, e2 = np.ones(m1), np.ones(m2)
    z1 = np.zeros(m1)
    C = np.vstack(
        [
            np.concatenate([e1, z1, e2, -e2]),
            np.concatenate([z1, e1, -e2, -e2 / tau]),
        ]
    )
    D = np.array([0.0, -c * m2])

    free = np.zeros(2 * m1 + 2 * m2, dtype=bool)
    if not hp.nonnegative_proximal_multipliers:
        free[: 2 * m1] = True

    return GeneralQP(
        Q=Q,
        f=f,
        C=C,
        D=D,
        block_layout=(m1, m1, m2, m2),
        free_mask=free,
        constant=float(r0 @ r0) / (2.0 * gamma),
        kind="pin_twsvmpi",
        meta={"c": float(c), "tau": float(tau), "gamma": float(gamma)},
    )


def _class_arguments(which: str, part: ClassPartition, hp: Hyperparams):
    if not part.has_privileged:
        raise AssemblyError("Pin-TWSVMPI needs privileged matrices in the partition")
    if which == "class1":
        return part.A, part.B, part.A_star, part.B_star, hp.c1
    return part.B, part.A, part.B_star, part.A_star, hp.c2


def assemble_pin_twsvmpi_dual(which: str, part: ClassPartition, hp: Hyperparams) -> GeneralQP:
    _check_which(which)
    _require_tau(hp)
    FA, FB, FAs, FBs, c = _class_arguments(which, part, hp)
    qp = assemble_from_features(FA, FB, FAs, FBs, c, hp)
    LOGGER.debug("Assembled linear %s dual: n=%d", which, qp.n)
    return qp


def kernel_feature_maps(part: ClassPartition, kernel: KernelSpec) -> KernelMaps:
    X = part.support()
    X_star = part.privileged_support()
    return KernelMaps(
        M=_augment(gram(kernel, part.A, X)),
        N=_augment(gram(kernel, part.B, X)),
        M_star=_augment(gram(kernel, part.A_star, X_star)),
        N_star=_augment(gram(kernel, part.B_star, X_star)),
        support=X,
        privileged_support=X_star,
    )


def assemble_pin_twsvmpi_kernel_dual(
    which: str,
    part: ClassPartition,
    hp: Hyperparams,
    maps: Optional[KernelMaps] = None,
) -> GeneralQP:
    _check_which(which)
    _require_tau(hp)
    if not part.has_privileged:
        raise AssemblyError("Pin-TWSVMPI needs privileged matrices in the partition")
    maps = maps or kernel_feature_maps(part, hp.kernel)
    if which == "class1":
        qp = assemble_from_features(maps.M, maps.N, maps.M_star, maps.N_star, hp.c1, hp)
    else:
        qp = assemble_from_features(maps.N, maps.M, maps.N_star, maps.M_star, hp.c2, hp)
    LOGGER.debug("Assembled kernel %s dual: n=%d", which, qp.n)
    return qp


def baseline_feature_maps(part: ClassPartition, kernel: Optional[KernelSpec] = None) -> BaselineMaps:
    """H = [A e₁], G = [B e₂], or their Gram versions against the stacked training rows."""
    if kernel is None:
        return BaselineMaps(H=_augment(part.A), G=_augment(part.B))
    X = part.support()
    return BaselineMaps(H=_augment(gram(kernel, part.A, X)), G=_augment(gram(kernel, part.B, X)), support=X)


def default_ridge(gram_matrix: np.ndarray) -> float:
    n = gram_matrix.shape[0]
    return RIDGE_SCALE * float(np.trace(gram_matrix)) / n


def regularized_solver(own: np.ndarray, ridge: Optional[float]):
    """Cholesky factor of ownᵀown + ridge·I; returns (factor, ridge actually used)."""
    HtH = own.T @ own
    ridge = default_ridge(HtH) if ridge is None else float(ridge)
    try:
        factor = cho_factor(HtH + ridge * np.eye(HtH.shape[0]), lower=True)
    except LinAlgError as exc:
        raise AssemblyError(
            f"HᵀH + {ridge:g}·I is singular; pass a positive ridge"
        ) from exc
    return factor, ridge


def assemble_pin_twsvm_dual(
    which: str,
    part: ClassPartition,
    hp: Hyperparams,
    ridge: Optional[float] = None,
    maps: Optional[BaselineMaps] = None,
) -> GeneralQP:
    """Baseline dual over (α, β) with one coupling row c − α_i − β_i/τ = 0 per other-class sample."""
    _check_which(which)
    _require_tau(hp)
    maps = maps or baseline_feature_maps(part, hp.kernel if hp.kernel.kind != "linear" else None)
    ridge = hp.ridge if ridge is None else ridge
    if which == "class1":
        own, other, c = maps.H, maps.G, hp.c1
    else:
        own, other, c = maps.G, maps.H, hp.c2

    factor, used_ridge = regularized_solver(own, ridge)
    K = other @ cho_solve(factor, other.T)
    m = other.shape[0]
    e = np.ones(m)
    Q = np.block([[K, -K], [-K, K]])
    f = np.concatenate([-e, e])
    C = np.hstack([np.eye(m), np.eye(m) / hp.tau])
    D = c * e
    LOGGER.debug("Assembled baseline %s dual: n=%d ridge=%g", which, 2 * m, used_ridge)
    return GeneralQP(
        Q=Q,
        f=f,
        C=C,
        D=D,
        block_layout=(m, m),
        kind="pin_twsvm",
        meta={"c": float(c), "tau": float(hp.tau), "ridge": used_ridge},
    )
