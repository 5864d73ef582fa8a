"""Training, primal recovery and prediction for Pin-TWSVMPI and the Pin-TWSVM baseline."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import cho_solve

from src.datasets import ClassPartition, Dataset, Hyperparams, partition_by_class
from src.dual_assembly import (
    WHICH,
    BaselineMaps,
    GeneralQP,
    assemble_pin_twsvm_dual,
    assemble_pin_twsvmpi_dual,
    assemble_pin_twsvmpi_kernel_dual,
    baseline_feature_maps,
    kernel_feature_maps,
    regularized_solver,
)
from src.errors import (
    AssemblyError,
    ConvergenceError,
    DatasetError,
    DegenerateModelError,
    DimensionError,
)
from src.kernels import KernelSpec, gram
from src.qp_solver import DualSolution, SolverConfig, solve, solve_dense_oracle

LOGGER = logging.getLogger("pin_twsvmpi.trainer")

METHODS = ("pin_twsvmpi", "pin_twsvm", "twsvmpi")
PRIVILEGED_METHODS = ("pin_twsvmpi", "twsvmpi")
VARIANTS = ("linear", "kernel")


@dataclass(frozen=True)
class Hyperplane:
    """Decision plane (w or μ, b or ν) plus the correcting function that shaped it."""

    weights: np.ndarray
    intercept: float
    correcting_weights: Optional[np.ndarray] = None
    correcting_intercept: Optional[float] = None

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.weights))

    @property
    def has_correcting(self) -> bool:
        return self.correcting_weights is not None

    def flipped(self) -> "Hyperplane":
        return Hyperplane(-self.weights, -self.intercept, self.correcting_weights, self.correcting_intercept)


@dataclass(frozen=True)
class TwinModel:
    method: str
    variant: str
    kernel: KernelSpec
    positive: Hyperplane
    negative: Hyperplane
    hyperparams: Hyperparams
    n_features: int
    n_privileged: int = 0
    support: Optional[np.ndarray] = None
    privileged_support: Optional[np.ndarray] = None
    diagnostics: Tuple[Dict, ...] = ()

    @property
    def distance_rule(self) -> str:
        return self.hyperparams.distance_rule


@dataclass(frozen=True)
class OneVsRestModel:
    classes: Tuple[int, ...]
    models: Tuple[TwinModel, ...]

    @property
    def n_features(self) -> int:
        return self.models[0].n_features


Model = Union[TwinModel, OneVsRestModel]


def pinball_loss(tau: float, y, score):
    """max(u, −τu) with u = 1 − y·score; τ = 0 is the hinge loss."""
    u = 1.0 - np.asarray(y, dtype=float) * np.asarray(score, dtype=float)
    loss = np.maximum(u, -tau * u)
    return float(loss) if np.ndim(loss) == 0 else loss


def _resolve_variant(hp: Hyperparams, variant: Optional[str]) -> str:
    variant = variant or ("kernel" if hp.kernel.kind == "rbf" else "linear")
    if variant not in VARIANTS:
        raise AssemblyError(f"variant must be one of {VARIANTS}, got '{variant}'")
    if variant == "linear" and hp.kernel.kind != "linear":
        raise AssemblyError("the linear variant cannot use a nonlinear kernel")
    return variant


def _solve_all(qps: Sequence[GeneralQP], solver: Callable[[GeneralQP], DualSolution], workers: int) -> List[DualSolution]:
    if workers > 1 and len(qps) > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(qps))) as pool:
            return list(pool.map(solver, qps))
    return [solver(qp) for qp in qps]


def _check_converged(which: str, sol: DualSolution, allow_unconverged: bool) -> None:
    if sol.converged:
        return
    message = (
        f"{which} solve did not converge after {sol.iterations} iterations "
        f"(kkt_residual={sol.kkt_residual:.3e})"
    )
    if not allow_unconverged:
        raise ConvergenceError(message, solution=sol)
    LOGGER.warning("%s; keeping the last iterate", message)


def _check_plane(which: str, plane: Hyperplane) -> None:
    if not np.all(np.isfinite(plane.weights)) or plane.norm <= 1e-12:
        raise DegenerateModelError(f"{which} hyperplane has zero normal vector")


def _recover_privileged(qp: GeneralQP, x: np.ndarray, FA, FB, FA_star, FB_star, c: float, hp: Hyperparams, augmented: bool) -> Hyperplane:
    a1, a2, a3, a4 = qp.blocks(x)
    s = a4 - a3
    t = a3 + a4 / hp.tau - c
    w = FB.T @ s - FA.T @ a1
    w_star = (FB_star.T @ t - FA_star.T @ a2) / hp.gamma
    if augmented:
        w, w_star = w[:-1], w_star[:-1]
        FA, FA_star = FA[:, :-1], FA_star[:, :-1]
    b = float(np.mean(a1 - FA @ w))
    b_star = float(np.mean(a2 / hp.gamma - FA_star @ w_star))
    return Hyperplane(w, b, w_star, b_star)


def _diagnostics(which: str, qp: GeneralQP, sol: DualSolution) -> Dict:
    out = {"which": which, **sol.diagnostics(), "constant": qp.constant}
    out["dual_objective"] = -(sol.objective + qp.constant)
    return out


def train_pin_twsvmpi(
    part: ClassPartition,
    hp: Hyperparams,
    cfg: SolverConfig = SolverConfig(),
    variant: Optional[str] = None,
    workers: int = 1,
    allow_unconverged: bool = False,
) -> TwinModel:
    variant = _resolve_variant(hp, variant)
    if hp.tau <= 0:
        raise AssemblyError("Pin-TWSVMPI needs tau > 0")
    if not part.has_privileged:
        raise DatasetError("Pin-TWSVMPI training needs privileged features")

    support = privileged_support = None
    if variant == "linear":
        qps = [assemble_pin_twsvmpi_dual(which, part, hp) for which in WHICH]
        features = [
            (part.A, part.B, part.A_star, part.B_star, hp.c1),
            (part.B, part.A, part.B_star, part.A_star, hp.c2),
        ]
    else:
        maps = kernel_feature_maps(part, hp.kernel)
        qps = [assemble_pin_twsvmpi_kernel_dual(which, part, hp, maps) for which in WHICH]
        features = [
            (maps.M, maps.N, maps.M_star, maps.N_star, hp.c1),
            (maps.N, maps.M, maps.N_star, maps.M_star, hp.c2),
        ]
        support, privileged_support = maps.support, maps.privileged_support

    solutions = _solve_all(qps, lambda qp: solve(qp, cfg), workers)
    planes = []
    for which, qp, sol, args in zip(WHICH, qps, solutions, features):
        _check_converged(which, sol, allow_unconverged)
        planes.append(_recover_privileged(qp, sol.x, *args, hp, augmented=variant == "kernel"))
    planes[1] = planes[1].flipped()
    for which, plane in zip(WHICH, planes):
        _check_plane(which, plane)

    LOGGER.info(
        "Trained pin_twsvmpi (%s): m1=%d m2=%d iterations=%s",
        variant,
        part.m1,
        part.m2,
        [sol.iterations for sol in solutions],
    )
    return TwinModel(
        method="pin_twsvmpi",
        variant=variant,
        kernel=hp.kernel,
        positive=planes[0],
        negative=planes[1],
        hyperparams=hp,
        n_features=int(part.A.shape[1]),
        n_privileged=int(part.A_star.shape[1]),
        support=support,
        privileged_support=privileged_support,
        diagnostics=tuple(_diagnostics(w, qp, sol) for w, qp, sol in zip(WHICH, qps, solutions)),
    )


def baseline_primal_qp(own: np.ndarray, other: np.ndarray, c: float, tau: float, ridge: float) -> Tuple[GeneralQP, np.ndarray]:
    """Class-1 baseline primal in slack form over [u, ξ, s₁, s₂]; returns the QP and a feasible start."""
    p = own.shape[1]
    m = other.shape[0]
    I = np.eye(m)
    Z = np.zeros((m, m))
    e = np.ones(m)
    with_upper = tau > 0
    n = p + (3 if with_upper else 2) * m

    Q = np.zeros((n, n))
    Q[:p, :p] = own.T @ own + ridge * np.eye(p)
    f = np.zeros(n)
    f[p : p + m] = c

    rows = [np.hstack([-other, I, -I] + ([Z] if with_upper else []))]
    rhs = [e]
    if with_upper:
        rows.append(np.hstack([other, I / tau, Z, -I]))
        rhs.append(-e)

    free = np.zeros(n, dtype=bool)
    free[:p] = True
    if with_upper:
        free[p : p + m] = True

    x0 = np.zeros(n)
    x0[p : p + m] = 1.0
    if with_upper:
        x0[p + 2 * m :] = 1.0 + 1.0 / tau
    layout = (p, m, m, m) if with_upper else (p, m, m)
    qp = GeneralQP(
        Q=Q,
        f=f,
        C=np.vstack(rows),
        D=np.concatenate(rhs),
        block_layout=layout,
        free_mask=free,
        kind="pin_twsvm_primal",
        meta={"c": float(c), "tau": float(tau), "ridge": float(ridge)},
    )
    return qp, x0


def _baseline_roles(which: str, maps: BaselineMaps, hp: Hyperparams):
    if which == "class1":
        return maps.H, maps.G, hp.c1
    return maps.G, maps.H, hp.c2


def train_pin_twsvm(
    part: ClassPartition,
    hp: Hyperparams,
    cfg: SolverConfig = SolverConfig(),
    variant: Optional[str] = None,
    ridge: Optional[float] = None,
    workers: int = 1,
    allow_unconverged: bool = False,
) -> TwinModel:
    """Baseline without privileged terms; τ = 0 goes through the primal oracle."""
    variant = _resolve_variant(hp, variant)
    maps = baseline_feature_maps(part, hp.kernel if variant == "kernel" else None)
    ridge = hp.ridge if ridge is None else ridge

    planes: List[Hyperplane] = []
    diagnostics: List[Dict] = []
    if hp.tau == 0:
        for which in WHICH:
            own, other, c = _baseline_roles(which, maps, hp)
            _, used_ridge = regularized_solver(own, ridge)
            qp, x0 = baseline_primal_qp(own, other, c, hp.tau, used_ridge)
            sol = solve_dense_oracle(qp, tol=min(cfg.tol, 1e-9), x0=x0)
            _check_converged(which, sol, allow_unconverged)
            u = sol.x[: own.shape[1]]
            planes.append(Hyperplane(u[:-1].copy(), float(u[-1])))
            diagnostics.append({"which": which, **sol.diagnostics(), "path": "primal_oracle"})
    else:
        qps = [assemble_pin_twsvm_dual(which, part, hp, ridge, maps) for which in WHICH]
        solutions = _solve_all(qps, lambda qp: solve(qp, cfg), workers)
        for which, qp, sol in zip(WHICH, qps, solutions):
            _check_converged(which, sol, allow_unconverged)
            own, other, _ = _baseline_roles(which, maps, hp)
            factor, _ = regularized_solver(own, qp.meta["ridge"])
            alpha, beta = qp.blocks(sol.x)
            u = -cho_solve(factor, other.T @ (alpha - beta))
            planes.append(Hyperplane(u[:-1], float(u[-1])))
            diagnostics.append({"which": which, **sol.diagnostics(), "path": "dual"})
    planes[1] = planes[1].flipped()
    for which, plane in zip(WHICH, planes):
        _check_plane(which, plane)

    LOGGER.info("Trained pin_twsvm (%s, tau=%g): m1=%d m2=%d", variant, hp.tau, part.m1, part.m2)
    return TwinModel(
        method="pin_twsvm",
        variant=variant,
        kernel=hp.kernel,
        positive=planes[0],
        negative=planes[1],
        hyperparams=hp,
        n_features=int(part.A.shape[1]),
        support=maps.support,
        diagnostics=tuple(diagnostics),
    )


def _with_ones(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((X.shape[0], 1))])


def privileged_primal_qp(
    own: np.ndarray,
    other: np.ndarray,
    own_star: np.ndarray,
    other_star: np.ndarray,
    c: float,
    gamma: float,
) -> Tuple[GeneralQP, np.ndarray]:
    """Class-1 hinge-loss primal with a correcting function, over [u, v, s₁, s₂] with u = (w, b), v = (w*, b*).

    All four feature blocks carry a trailing ones column. Rows −Gu + G*v − s₁ = e hold the other
    class beyond its margin up to the correcting slack G*v, and G*v − s₂ = 0 keeps that slack
    nonnegative. Returns the QP and a feasible start.
    """
    p, q = own.shape[1], own_star.shape[1]
    m = other.shape[0]
    if other_star.shape[0] != m or own_star.shape[0] != own.shape[0]:
        raise DimensionError("privileged rows must match ordinary rows per class")
    I, Z = np.eye(m), np.zeros((m, m))
    n = p + q + 2 * m

    Q = np.zeros((n, n))
    Q[:p, :p] = own.T @ own + np.diag(np.r_[np.ones(p - 1), 0.0])
    Q[p : p + q, p : p + q] = gamma * (own_star.T @ own_star + np.diag(np.r_[np.ones(q - 1), 0.0]))
    f = np.zeros(n)
    f[p : p + q] = c * other_star.sum(axis=0)
    C = np.vstack(
        [
            np.hstack([-other, other_star, -I, Z]),
            np.hstack([np.zeros((m, p)), other_star, Z, -I]),
        ]
    )
    D = np.concatenate([np.ones(m), np.zeros(m)])
    free = np.zeros(n, dtype=bool)
    free[: p + q] = True

    x0 = np.zeros(n)
    x0[p + q - 1] = 1.0
    x0[p + q + m :] = 1.0
    qp = GeneralQP(
        Q=Q,
        f=f,
        C=C,
        D=D,
        block_layout=(p, q, m, m),
        free_mask=free,
        kind="twsvmpi_primal",
        meta={"c": float(c), "gamma": float(gamma)},
    )
    return qp, x0


def train_twsvmpi(
    part: ClassPartition,
    hp: Hyperparams,
    cfg: SolverConfig = SolverConfig(),
    variant: Optional[str] = None,
    allow_unconverged: bool = False,
) -> TwinModel:
    """Hinge-loss twin model with privileged correcting functions; tau plays no part."""
    variant = _resolve_variant(hp, variant)
    if not part.has_privileged:
        raise DatasetError("TWSVMPI training needs privileged features")

    support = privileged_support = None
    if variant == "linear":
        H, G = _with_ones(part.A), _with_ones(part.B)
        H_star, G_star = _with_ones(part.A_star), _with_ones(part.B_star)
    else:
        maps = kernel_feature_maps(part, hp.kernel)
        H, G, H_star, G_star = maps.M, maps.N, maps.M_star, maps.N_star
        support, privileged_support = maps.support, maps.privileged_support
    roles = [(H, G, H_star, G_star, hp.c1), (G, H, G_star, H_star, hp.c2)]

    planes: List[Hyperplane] = []
    diagnostics: List[Dict] = []
    for which, (own, other, own_s, other_s, c) in zip(WHICH, roles):
        qp, x0 = privileged_primal_qp(own, other, own_s, other_s, c, hp.gamma)
        sol = solve_dense_oracle(qp, tol=min(cfg.tol, 1e-9), x0=x0)
        _check_converged(which, sol, allow_unconverged)
        u, v, _, _ = qp.blocks(sol.x)
        planes.append(Hyperplane(u[:-1].copy(), float(u[-1]), v[:-1].copy(), float(v[-1])))
        diagnostics.append({"which": which, **sol.diagnostics(), "path": "primal_oracle"})
    planes[1] = planes[1].flipped()
    for which, plane in zip(WHICH, planes):
        _check_plane(which, plane)

    LOGGER.info("Trained twsvmpi (%s): m1=%d m2=%d", variant, part.m1, part.m2)
    return TwinModel(
        method="twsvmpi",
        variant=variant,
        kernel=hp.kernel,
        positive=planes[0],
        negative=planes[1],
        hyperparams=hp,
        n_features=int(part.A.shape[1]),
        n_privileged=int(part.A_star.shape[1]),
        support=support,
        privileged_support=privileged_support,
        diagnostics=tuple(diagnostics),
    )


def train_binary(
    part: ClassPartition,
    hp: Hyperparams,
    cfg: SolverConfig = SolverConfig(),
    method: str = "pin_twsvmpi",
    workers: int = 1,
    allow_unconverged: bool = False,
) -> TwinModel:
    if method == "pin_twsvmpi":
        return train_pin_twsvmpi(part, hp, cfg, workers=workers, allow_unconverged=allow_unconverged)
    if method == "pin_twsvm":
        return train_pin_twsvm(part, hp, cfg, workers=workers, allow_unconverged=allow_unconverged)
    if method == "twsvmpi":
        return train_twsvmpi(part, hp, cfg, allow_unconverged=allow_unconverged)
    raise AssemblyError(f"Unknown method '{method}'; expected one of {METHODS}")


def _rows(model: Model, X) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(X, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.ndim != 2 or arr.shape[1] != model.n_features:
        raise DimensionError(f"model expects {model.n_features} features, got shape {np.shape(X)}")
    return arr, single


def decision_scores(model: TwinModel, X) -> np.ndarray:
    """Signed plane scores, one column per class plane."""
    X, _ = _rows(model, X)
    features = gram(model.kernel, X, model.support) if model.variant == "kernel" else X
    return np.column_stack(
        [
            features @ model.positive.weights + model.positive.intercept,
            features @ model.negative.weights + model.negative.intercept,
        ]
    )


def decision_distances(model: TwinModel, X) -> np.ndarray:
    scores = decision_scores(model, X)
    norms = np.array([model.positive.norm, model.negative.norm])
    if np.any(norms <= 0):
        raise DegenerateModelError("model has a zero normal vector")
    denom = norms**2 if model.distance_rule == "paper_squared_norm" else norms
    return np.abs(scores) / denom


def predict(model: Model, x):
    """Label per row (or a single int for a vector); equal distances go to +1."""
    if isinstance(model, OneVsRestModel):
        return predict_multiclass(model, x)
    _, single = _rows(model, x)
    dist = decision_distances(model, x)
    labels = np.where(dist[:, 0] <= dist[:, 1], 1, -1)
    return int(labels[0]) if single else labels


def correcting_values(model: TwinModel, X_star, which: str = "positive") -> np.ndarray:
    plane = model.positive if which == "positive" else model.negative
    if not plane.has_correcting:
        raise DegenerateModelError("model carries no correcting function")
    X_star = np.atleast_2d(np.asarray(X_star, dtype=float))
    if X_star.shape[1] != model.n_privileged:
        raise DimensionError(f"model expects {model.n_privileged} privileged features, got {X_star.shape[1]}")
    features = gram(model.kernel, X_star, model.privileged_support) if model.variant == "kernel" else X_star
    return features @ plane.correcting_weights + plane.correcting_intercept


def _class_counts(labels: np.ndarray) -> Dict[int, int]:
    values, counts = np.unique(labels, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def train_multiclass(
    ds: Dataset,
    hp: Hyperparams,
    cfg: SolverConfig = SolverConfig(),
    method: str = "pin_twsvmpi",
    workers: int = 1,
    allow_unconverged: bool = False,
) -> OneVsRestModel:
    """One binary model per class, that class as +1 against the rest."""
    counts = _class_counts(ds.labels)
    if len(counts) < 2:
        raise DatasetError(f"one-vs-rest needs at least two classes, found {sorted(counts)}")
    small = [label for label, count in counts.items() if count < 2]
    if small:
        raise DatasetError(f"classes with fewer than 2 samples: {small}")

    classes = tuple(sorted(counts))

    def fit_one(label: int) -> TwinModel:
        binary = ds.with_labels(np.where(ds.labels == label, 1, -1))
        return train_binary(partition_by_class(binary), hp, cfg, method, allow_unconverged=allow_unconverged)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            models = tuple(pool.map(fit_one, classes))
    else:
        models = tuple(fit_one(label) for label in classes)
    LOGGER.info("Trained one-vs-rest %s over classes %s", method, list(classes))
    return OneVsRestModel(classes=classes, models=models)


def relative_distances(model: OneVsRestModel, X) -> np.ndarray:
    """d₊/(d₊+d₋) per class model; 0.5 where both distances vanish."""
    columns = []
    for sub in model.models:
        dist = decision_distances(sub, X)
        total = dist.sum(axis=1)
        rel = np.divide(dist[:, 0], total, out=np.full(total.shape, 0.5), where=total > 0)
        columns.append(rel)
    return np.column_stack(columns)


def predict_multiclass(model: OneVsRestModel, x):
    X, single = _rows(model, x)
    classes = np.asarray(model.classes)
    if classes.size == 2:
        binary = predict(model.models[1], X)
        labels = np.where(binary == 1, classes[1], classes[0])
    else:
        labels = classes[np.argmin(relative_distances(model, X), axis=1)]
    return int(labels[0]) if single else labels


def fit_model(
    ds: Dataset,
    hp: Hyperparams,
    cfg: SolverConfig = SolverConfig(),
    method: str = "pin_twsvmpi",
    workers: int = 1,
    allow_unconverged: bool = False,
) -> Model:
    """Binary model for {+1, −1} labels, one-vs-rest otherwise."""
    if method not in METHODS:
        raise AssemblyError(f"Unknown method '{method}'; expected one of {METHODS}")
    if ds.is_binary() and len(ds.classes) == 2:
        return train_binary(partition_by_class(ds), hp, cfg, method, workers, allow_unconverged)
    return train_multiclass(ds, hp, cfg, method, workers, allow_unconverged)


def _mirrored_problem(model: TwinModel, part: ClassPartition, which: str):
    """Own/other features, trade-off and plane of `which`, expressed as a class-1 problem."""
    hp = model.hyperparams
    if which == "class1":
        own, other, own_s, other_s, c, plane = part.A, part.B, part.A_star, part.B_star, hp.c1, model.positive
    elif which == "class2":
        own, other, own_s, other_s, c, plane = part.B, part.A, part.B_star, part.A_star, hp.c2, model.negative.flipped()
    else:
        raise AssemblyError(f"which must be one of {WHICH}")
    if not plane.has_correcting:
        raise DegenerateModelError("audits need a model with correcting functions")
    if model.variant == "kernel":
        own, other = gram(model.kernel, own, model.support), gram(model.kernel, other, model.support)
        own_s = gram(model.kernel, own_s, model.privileged_support)
        other_s = gram(model.kernel, other_s, model.privileged_support)
    return own, other, own_s, other_s, c, plane


def primal_objective(model: TwinModel, part: ClassPartition, which: str = "class1") -> float:
    """½‖w‖² + (γ/2)‖w*‖² + ½‖Aw+b‖² + (γ/2)‖A*w*+b*‖² + c·Σ(B*w*+b*) for the chosen plane."""
    own, other, own_s, other_s, c, plane = _mirrored_problem(model, part, which)
    gamma = model.hyperparams.gamma
    w, b = plane.weights, plane.intercept
    ws, bs = plane.correcting_weights, plane.correcting_intercept
    proximal = own @ w + b
    privileged = own_s @ ws + bs
    correcting = other_s @ ws + bs
    return float(
        0.5 * w @ w
        + 0.5 * gamma * ws @ ws
        + 0.5 * proximal @ proximal
        + 0.5 * gamma * privileged @ privileged
        + c * correcting.sum()
    )


def constraint_residuals(model: TwinModel, part: ClassPartition, which: str = "class1") -> Dict[str, float]:
    """Largest violation of the two margin constraints (0 when satisfied); the hinge variant's upper one is slack ≥ 0."""
    own, other, own_s, other_s, c, plane = _mirrored_problem(model, part, which)
    score = other @ plane.weights + plane.intercept
    slack = other_s @ plane.correcting_weights + plane.correcting_intercept
    lower = -score - 1.0 + slack
    upper = slack if model.method == "twsvmpi" else 1.0 + slack / model.hyperparams.tau + score
    return {
        "lower": float(max(0.0, -lower.min())),
        "upper": float(max(0.0, -upper.min())),
    }


def duality_gap(model: TwinModel, part: ClassPartition, which: str = "class1") -> float:
    index = WHICH.index(which)
    dual = model.diagnostics[index].get("dual_objective")
    if dual is None:
        raise DegenerateModelError("model diagnostics carry no dual objective")
    return primal_objective(model, part, which) - float(dual)
