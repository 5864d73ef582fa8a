"""Solvers for GeneralQP: working-set decomposition, a dense active-set oracle, KKT diagnostics."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import eigh, null_space
from scipy.optimize import linprog

from src.dual_assembly import GeneralQP
from src.errors import (
    ConfigError,
    ConvergenceError,
    InfeasibleProblemError,
    NonConvexProblemError,
    UnboundedProblemError,
)

LOGGER = logging.getLogger("pin_twsvmpi.solver")

ORACLE_TOL = 1e-10
MAX_DECOMPOSITION_ROWS = 2
MAX_CIRCUITS = 50_000
REFRESH_EVERY = 1000
NEAR_MAXIMAL = 0.5
CURVATURE_EPS = 1e-13
STEP_EPS = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-6
    max_iter: int = 100_000
    working_set_size: int = 3
    oracle_threshold: int = 64
    verbose: bool = False
    log_every: int = 1000

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.working_set_size < 3:
            raise ConfigError("working_set_size must be >= 3 for two coupled equality constraints")
        if self.log_every < 1:
            raise ConfigError("log_every must be >= 1")


@dataclass(frozen=True)
class DualSolution:
    x: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    converged: bool
    method: str = "oracle"
    equality_residual: float = 0.0
    trace: Tuple[Dict, ...] = ()

    def diagnostics(self) -> Dict:
        return {
            "objective": self.objective,
            "kkt_residual": self.kkt_residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "method": self.method,
            "equality_residual": self.equality_residual,
        }


@dataclass(frozen=True)
class KKTReport:
    equality: float
    min_x: float
    stationarity: float
    complementarity: float
    multipliers: np.ndarray

    def max_residual(self) -> float:
        return max(self.equality, max(0.0, -self.min_x), self.stationarity, self.complementarity)

    def to_dict(self) -> Dict:
        return {
            "equality": self.equality,
            "min_x": self.min_x,
            "stationarity": self.stationarity,
            "complementarity": self.complementarity,
        }


def _violations(rho: np.ndarray, inactive: np.ndarray) -> np.ndarray:
    return np.where(inactive, np.abs(rho), np.maximum(0.0, -rho))


def _reduced_gradient(C: np.ndarray, g: np.ndarray, inactive: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Least-squares multipliers over the inactive columns and the reduced gradient g − Cᵀλ."""
    r = C.shape[0]
    if r == 0:
        return np.zeros(0), g.copy()
    cols = np.flatnonzero(inactive)
    if cols.size == 0:
        lam = np.zeros(r)
    else:
        lam = np.linalg.lstsq(C[:, cols].T, g[cols], rcond=None)[0]
    return lam, g - C.T @ lam


def exact_multipliers(C: np.ndarray, g: np.ndarray, inactive: np.ndarray) -> Tuple[np.ndarray, float]:
    """Multipliers minimizing the largest projected-gradient violation (a small LP)."""
    lam_ls, rho_ls = _reduced_gradient(C, g, inactive)
    best = (lam_ls, float(_violations(rho_ls, inactive).max(initial=0.0)))
    r = C.shape[0]
    if r == 0 or best[1] == 0.0:
        return best

    cols = np.flatnonzero(inactive)
    upper = np.hstack([-C[:, cols].T, -np.ones((cols.size, 1))])
    lower = np.hstack([C.T, -np.ones((C.shape[1], 1))])
    res = linprog(
        c=np.concatenate([np.zeros(r), [1.0]]),
        A_ub=np.vstack([upper, lower]),
        b_ub=np.concatenate([-g[cols], g]),
        bounds=[(None, None)] * r + [(0, None)],
        method="highs",
    )
    if res.status != 0:
        return best
    lam = res.x[:r]
    value = float(_violations(g - C.T @ lam, inactive).max(initial=0.0))
    if value < best[1]:
        return lam, value
    return best


def kkt_report(qp: GeneralQP, x) -> KKTReport:
    x = np.asarray(x, dtype=float)
    g = qp.Q @ x + qp.f
    bounded = qp.bounded
    equality = float(np.abs(qp.C @ x - qp.D).max(initial=0.0))
    min_x = float(x[bounded].min()) if bounded.any() else 0.0
    inactive = qp.free_mask | (x > 0)
    lam, stationarity = exact_multipliers(qp.C, g, inactive)
    rho = g - qp.C.T @ lam
    comp = x[bounded] * np.maximum(0.0, rho[bounded])
    complementarity = float(np.abs(comp).max(initial=0.0))
    return KKTReport(
        equality=equality,
        min_x=min_x,
        stationarity=stationarity,
        complementarity=complementarity,
        multipliers=lam,
    )


def ensure_descent(delta: float, objective: float) -> None:
    """Every accepted step must lower the objective, up to rounding."""
    if delta > 1e-12 * (1.0 + abs(objective)):
        raise ConvergenceError(f"step raised the objective by {delta:.3e} (objective {objective:.6e})")


def _repair_equalities(qp: GeneralQP, x: np.ndarray) -> np.ndarray:
    resid = qp.C @ x - qp.D
    if qp.C.shape[0] == 0 or not np.any(resid):
        return x
    cols = np.flatnonzero(qp.free_mask | (x > 0))
    if cols.size:
        x = x.copy()
        x[cols] -= np.linalg.lstsq(qp.C[:, cols], resid, rcond=None)[0]
        x[qp.bounded & (x < 0)] = 0.0
    return x


def phase_one(qp: GeneralQP) -> np.ndarray:
    bounds = [(None, None) if free else (0, None) for free in qp.free_mask]
    res = linprog(
        c=np.zeros(qp.n),
        A_eq=qp.C if qp.C.shape[0] else None,
        b_eq=qp.D if qp.C.shape[0] else None,
        bounds=bounds,
        method="highs",
    )
    if res.status == 2:
        raise InfeasibleProblemError("no x >= 0 satisfies Cx = D")
    if res.status != 0:
        raise InfeasibleProblemError(f"phase-1 feasibility solve failed: {res.message}")
    x = np.array(res.x, dtype=float)
    x[qp.bounded & (x < 0)] = 0.0
    return _repair_equalities(qp, x)


def initial_feasible_point(qp: GeneralQP) -> np.ndarray:
    """Closed-form start for the twin duals, phase-1 LP otherwise."""
    c = qp.meta.get("c")
    tau = qp.meta.get("tau")
    if qp.kind == "pin_twsvmpi" and len(qp.block_layout) == 4 and c is not None and tau:
        m1, _, m2, _ = qp.block_layout
        return np.concatenate(
            [
                np.full(m1, m2 * c * tau / m1),
                np.zeros(m1),
                np.zeros(m2),
                np.full(m2, c * tau),
            ]
        )
    if qp.kind == "pin_twsvm" and len(qp.block_layout) == 2 and c is not None:
        m = qp.block_layout[0]
        return np.concatenate([np.full(m, c), np.zeros(m)])
    LOGGER.debug("No closed-form start for kind=%s; running phase 1", qp.kind)
    return phase_one(qp)


def _start_point(qp: GeneralQP, x0) -> np.ndarray:
    if x0 is None:
        return initial_feasible_point(qp)
    x = np.array(x0, dtype=float).ravel()
    if x.shape != (qp.n,):
        raise ConfigError(f"start point has {x.size} entries, expected {qp.n}")
    scale = 1.0 + float(np.abs(qp.D).max(initial=0.0))
    if np.abs(qp.C @ x - qp.D).max(initial=0.0) > 1e-9 * scale or np.any(x[qp.bounded] < -1e-9):
        raise InfeasibleProblemError("start point violates Cx = D or x >= 0")
    x[qp.bounded & (x < 0)] = 0.0
    return x


def _equality_step(H: np.ndarray, g: np.ndarray, A: np.ndarray) -> Tuple[np.ndarray, bool]:
    """Minimize ½pᵀHp + gᵀp over Ap = 0; returns (step, is_ray) where a ray has zero curvature."""
    k = H.shape[0]
    if k == 0:
        return np.zeros(0), False
    Z = null_space(A) if A.shape[0] else np.eye(k)
    if Z.shape[1] == 0:
        return np.zeros(k), False
    Hr = Z.T @ H @ Z
    gr = Z.T @ g
    w, V = eigh(Hr)
    wmax = max(float(np.abs(w).max()), 1.0)
    if w.min() < -1e-8 * wmax:
        raise NonConvexProblemError(f"Q has negative curvature {w.min():.3e} on the feasible subspace")
    positive = w > 1e-10 * wmax
    coef = V.T @ gr
    flat = coef[~positive]
    if flat.size and np.abs(flat).max() > 1e-10 * (1.0 + np.abs(gr).max()):
        return -Z @ (V[:, ~positive] @ flat), True
    y = -V[:, positive] @ (coef[positive] / w[positive])
    return Z @ y, False


def _ratio_test(x: np.ndarray, p: np.ndarray, candidates: np.ndarray) -> Tuple[float, int]:
    """Longest step before a shrinking candidate reaches zero; ties go to the lowest index."""
    shrinking = np.flatnonzero(candidates & (p < 0))
    if shrinking.size == 0:
        return np.inf, -1
    ratios = x[shrinking] / -p[shrinking]
    k = int(np.argmin(ratios))
    return float(ratios[k]), int(shrinking[k])


def _exact_step(Q: np.ndarray, g: np.ndarray, p: np.ndarray) -> float:
    """Minimizer of the objective along p, infinite when p carries no curvature."""
    curvature = float(p @ Q @ p)
    if curvature > CURVATURE_EPS * max(1.0, float(np.abs(Q).max(initial=0.0))) * float(p @ p):
        return max(0.0, -float(g @ p) / curvature)
    return np.inf


def _bound_multipliers(C: np.ndarray, g: np.ndarray, working: np.ndarray, tol: float) -> np.ndarray:
    """g − Cᵀλ from least squares, or from the max-violation LP when least squares leaves a bound negative."""
    _, rho = _reduced_gradient(C, g, ~working)
    if rho[working].min(initial=0.0) >= -tol:
        return rho
    lam, _ = exact_multipliers(C, g, ~working)
    return g - C.T @ lam


def _descent_direction(qp: GeneralQP, g: np.ndarray, at_bound: np.ndarray) -> np.ndarray:
    """Steepest feasible direction in the unit box: minimize gᵀd over Cd = 0 with d ≥ 0 on variables at zero."""
    rows = qp.C.shape[0]
    res = linprog(
        c=g,
        A_eq=qp.C if rows else None,
        b_eq=np.zeros(rows) if rows else None,
        bounds=[(0.0, 1.0) if fixed else (-1.0, 1.0) for fixed in at_bound],
        method="highs",
    )
    if res.status != 0:
        return np.zeros(qp.n)
    d = np.array(res.x, dtype=float)
    movable = np.flatnonzero(~at_bound)
    if rows and movable.size:
        d[movable] -= np.linalg.lstsq(qp.C[:, movable], qp.C @ d, rcond=None)[0]
    d[at_bound & (d < 0)] = 0.0
    return d


def _move(x: np.ndarray, step: float, p: np.ndarray, blocking: int, bounded: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    x = x + step * p
    if blocking >= 0:
        x[blocking] = 0.0
    clipped = bounded & (x < 0)
    x[clipped] = 0.0
    return x, clipped


def _finish(qp: GeneralQP, x: np.ndarray, iterations: int, converged: bool, method: str, trace) -> DualSolution:
    report = kkt_report(qp, x)
    return DualSolution(
        x=x,
        objective=qp.objective(x),
        kkt_residual=report.max_residual(),
        iterations=iterations,
        converged=converged,
        method=method,
        equality_residual=report.equality,
        trace=tuple(trace),
    )


def solve_dense_oracle(qp: GeneralQP, tol: float = ORACLE_TOL, x0=None, max_iter: Optional[int] = None) -> DualSolution:
    """Primal active-set method on the sign constraints with null-space equality handling.

    The working set holds bounded variables pinned at zero. Each iteration minimizes over the
    remaining face, blocks on the first variable to reach zero (lowest index on ties), and at a
    face minimum releases the most negative bound multiplier. After a zero-length step the
    release is replaced by a step along the LP-steepest feasible direction, which strictly lowers
    the objective, so no working set repeats.
    """
    Q, f, C = qp.Q, qp.f, qp.C
    bounded = qp.bounded
    x = _start_point(qp, x0)
    working = bounded & (x <= 0.0)
    x[working] = 0.0
    budget = max_iter or 50 * qp.n + 200
    converged = False
    face_minimum = False
    degenerate = False
    iterations = 0

    for iterations in range(1, budget + 1):
        g = Q @ x + f
        if not face_minimum:
            free_idx = np.flatnonzero(~working)
            p_free, is_ray = _equality_step(Q[np.ix_(free_idx, free_idx)], g[free_idx], C[:, free_idx])
            face_minimum = not is_ray and np.abs(p_free).max(initial=0.0) <= STEP_EPS * (
                1.0 + np.abs(x).max(initial=0.0)
            )

        if face_minimum:
            at_bound = np.flatnonzero(working)
            if at_bound.size == 0:
                converged = True
                break
            rho = _bound_multipliers(C, g, working, tol)
            if rho[at_bound].min() >= -tol:
                converged = True
                break
            face_minimum = False
            if not degenerate:
                working[at_bound[np.argmin(rho[at_bound])]] = False
                continue

            d = _descent_direction(qp, g, bounded & (x <= 0.0))
            if float(g @ d) >= -tol:
                converged = True
                break
            limit, blocking = _ratio_test(x, d, bounded & (x > 0.0))
            step = _exact_step(Q, g, d)
            if limit <= step:
                step = limit
            else:
                blocking = -1
            if not np.isfinite(step):
                raise UnboundedProblemError("objective decreases without bound along a feasible ray")
            x, _ = _move(x, step, d, blocking, bounded)
            x = _repair_equalities(qp, x)
            working = bounded & (x <= 0.0)
            degenerate = False
            continue

        p = np.zeros(qp.n)
        p[free_idx] = p_free
        limit, blocking = _ratio_test(x, p, bounded & ~working)
        step = _exact_step(Q, g, p) if is_ray else 1.0
        if limit <= step:
            step = limit
        else:
            blocking = -1
        if not np.isfinite(step):
            raise UnboundedProblemError("objective decreases without bound along a feasible ray")
        x, clipped = _move(x, step, p, blocking, bounded)
        working |= clipped
        if blocking >= 0:
            working[blocking] = True
        degenerate = step == 0.0
        face_minimum = blocking < 0 and not is_ray

    if not converged:
        LOGGER.warning("Dense oracle stopped after %d iterations without certifying optimality", iterations)
    return _finish(qp, x, iterations, converged, "oracle", ())


def _distinct_columns(C: np.ndarray) -> Tuple[np.ndarray, int]:
    if C.shape[0] == 0:
        return np.zeros(C.shape[1], dtype=int), min(C.shape[1], 1)
    _, inverse = np.unique(np.round(C.T, 12), axis=0, return_inverse=True)
    ids = np.asarray(inverse).ravel()
    return ids, int(ids.max(initial=-1)) + 1


def decomposable(C: np.ndarray) -> bool:
    """True when C has at most two rows and few enough column groups to enumerate every circuit."""
    if C.shape[0] > MAX_DECOMPOSITION_ROWS:
        return False
    _, count = _distinct_columns(C)
    return 2 * (count + comb(count, 2) + comb(count, 3)) <= MAX_CIRCUITS


def _parallel(a: np.ndarray, b: np.ndarray) -> bool:
    if a.size < 2:
        return True
    return abs(a[0] * b[1] - a[1] * b[0]) <= 1e-12 * float(np.linalg.norm(a) * np.linalg.norm(b))


@dataclass(frozen=True)
class _Candidates:
    members: np.ndarray
    coefs: np.ndarray
    step: np.ndarray
    blocked: np.ndarray
    gain: np.ndarray
    violation: np.ndarray

    @property
    def max_violation(self) -> float:
        return float(self.violation.max(initial=0.0))

    def choose(self) -> int:
        """Largest exact decrease among the near-maximal violators, over every circuit if none of those moves."""
        near = (self.violation >= NEAR_MAXIMAL * self.max_violation) & (self.gain > 0)
        if near.any():
            return int(np.argmax(np.where(near, self.gain, -np.inf)))
        if np.any(self.gain > 0):
            return int(np.argmax(self.gain))
        return -1

    def direction(self, k: int) -> Tuple[np.ndarray, np.ndarray, int]:
        used = self.coefs[k] != 0
        return self.members[k][used], self.step[k] * self.coefs[k][used], int(self.blocked[k])


class _Circuits:
    """Minimal feasible directions of Cx = D, built over groups of variables with identical columns.

    A circuit lists up to three groups and the coefficients of a null vector of their columns.
    Evaluating it picks the cheapest member of each group to increase and the dearest movable
    member to decrease.
    """

    def __init__(self, C: np.ndarray) -> None:
        if C.shape[0] > MAX_DECOMPOSITION_ROWS:
            raise ConfigError(f"decomposition handles at most {MAX_DECOMPOSITION_ROWS} equality rows, got {C.shape[0]}")
        self.ids, count = _distinct_columns(C)
        self.members: List[np.ndarray] = [np.flatnonzero(self.ids == gid) for gid in range(count)]
        columns = [C[:, members[0]] for members in self.members]
        scale = max(1.0, float(np.abs(C).max(initial=0.0)))
        zero = [float(np.abs(col).max(initial=0.0)) <= 1e-12 * scale for col in columns]
        nonzero = [gid for gid in range(count) if not zero[gid]]

        groups: List[Tuple[int, ...]] = []
        coefs: List[Tuple[float, ...]] = []

        def add(gids: Tuple[int, ...], z: Tuple[float, ...], both: bool) -> None:
            z = np.asarray(z, dtype=float) / float(np.abs(z).max())
            for sign in (1.0, -1.0) if both else (1.0,):
                groups.append(tuple(gids) + (0,) * (3 - len(gids)))
                coefs.append(tuple(sign * z) + (0.0,) * (3 - len(gids)))

        for gid in range(count):
            if zero[gid]:
                add((gid,), (1.0,), True)
            elif self.members[gid].size > 1:
                add((gid, gid), (1.0, -1.0), False)
        parallel = {pair: _parallel(columns[pair[0]], columns[pair[1]]) for pair in combinations(nonzero, 2)}
        for a, b in combinations(nonzero, 2):
            if parallel[(a, b)]:
                ratio = float(columns[a] @ columns[b]) / float(columns[a] @ columns[a])
                add((a, b), (ratio, -1.0), True)
        if C.shape[0] == 2:
            for a, b, c in combinations(nonzero, 3):
                if parallel[(a, b)] or parallel[(a, c)] or parallel[(b, c)]:
                    continue
                ca, cb, cc = columns[a], columns[b], columns[c]
                z = (
                    cb[0] * cc[1] - cb[1] * cc[0],
                    cc[0] * ca[1] - cc[1] * ca[0],
                    ca[0] * cb[1] - ca[1] * cb[0],
                )
                add((a, b, c), z, True)

        self.groups = np.array(groups, dtype=int).reshape(-1, 3)
        self.coefs = np.array(coefs, dtype=float).reshape(-1, 3)

    @property
    def size(self) -> int:
        return int(self.coefs.shape[0])

    def _extremes(self, g: np.ndarray, movable: np.ndarray):
        count = len(self.members)
        lo_val, lo_idx = np.empty(count), np.empty(count, dtype=int)
        hi_val, hi_idx = np.zeros(count), np.full(count, -1)
        for gid, members in enumerate(self.members):
            values = g[members]
            k = int(np.argmin(values))
            lo_val[gid], lo_idx[gid] = values[k], members[k]
            mask = movable[members]
            if mask.any():
                k = int(np.argmax(np.where(mask, values, -np.inf)))
                hi_val[gid], hi_idx[gid] = values[k], members[k]
        return lo_val, lo_idx, hi_val, hi_idx

    def evaluate(self, Q: np.ndarray, g: np.ndarray, x: np.ndarray, movable: np.ndarray, bounded: np.ndarray, scale: float) -> _Candidates:
        lo_val, lo_idx, hi_val, hi_idx = self._extremes(g, movable)
        Z, G = self.coefs, self.groups
        up, down = Z > 0, Z < 0
        members = np.where(up, lo_idx[G], np.where(down, hi_idx[G], -1))
        valid = ~np.any(down & (members < 0), axis=1)
        slope = np.sum(Z * np.where(up, lo_val[G], np.where(down, hi_val[G], 0.0)), axis=1)
        idx = np.maximum(members, 0)

        curvature = np.zeros(self.size)
        for a in range(3):
            for b in range(3):
                curvature += Z[:, a] * Z[:, b] * Q[idx[:, a], idx[:, b]]

        shrinking = down & bounded[idx]
        limits = np.full(Z.shape, np.inf)
        limits[shrinking] = x[idx][shrinking] / -Z[shrinking]
        column = np.argmin(limits, axis=1)
        rows = np.arange(self.size)
        limit = limits[rows, column]

        descent = valid & (slope < 0)
        flat = curvature <= CURVATURE_EPS * scale * np.sum(Z * Z, axis=1)
        if np.any(descent & flat & np.isinf(limit)):
            raise UnboundedProblemError("objective decreases without bound along a feasible circuit")
        newton = np.full(self.size, np.inf)
        np.divide(-slope, curvature, out=newton, where=~flat)
        step = np.where(descent, np.minimum(limit, newton), 0.0)
        blocked = np.where(descent & (limit <= newton), idx[rows, column], -1)
        gain = np.where(descent, -step * slope - 0.5 * step * step * curvature, -np.inf)
        norm = np.abs(Z).sum(axis=1)
        violation = np.where(descent, -slope / norm, 0.0)
        return _Candidates(members=members, coefs=Z, step=step, blocked=blocked, gain=gain, violation=violation)


def solve_decomposition(qp: GeneralQP, cfg: SolverConfig = SolverConfig(), x0=None) -> DualSolution:
    """Working-set decomposition along the circuits of C, each step an exact clipped line search.

    Stops once no circuit violates first-order optimality by more than the current threshold and
    the max-violation multiplier LP confirms stationarity to cfg.tol; otherwise the threshold
    tightens and the sweep continues.
    """
    Q, f, C = qp.Q, qp.f, qp.C
    if C.shape[0] + 1 > cfg.working_set_size:
        raise ConfigError(f"{C.shape[0]} equality rows need working sets of {C.shape[0] + 1} variables")
    if not decomposable(C):
        raise ConfigError("too many distinct constraint columns to enumerate circuits; use the dense oracle")
    circuits = _Circuits(C)
    bounded = qp.bounded
    free = qp.free_mask
    scale = max(1.0, float(np.abs(np.diag(Q)).max(initial=0.0)))
    x = _start_point(qp, x0)
    g = Q @ x + f
    objective = qp.objective(x)
    threshold = cfg.tol
    trace: List[Dict] = []
    converged = False
    iteration = 0
    violation = np.inf

    while iteration < cfg.max_iter:
        candidates = circuits.evaluate(Q, g, x, free | (x > 0), bounded, scale)
        violation = candidates.max_violation
        if violation <= threshold:
            g = Q @ x + f
            objective = qp.objective(x)
            if exact_multipliers(C, g, free | (x > 0))[1] <= cfg.tol:
                converged = True
                break
            if violation <= 0.0:
                LOGGER.warning("Decomposition found no descent circuit at iteration %d", iteration)
                break
            threshold = violation / 10.0
            continue

        k = candidates.choose()
        if k < 0:
            LOGGER.warning("Decomposition stalled at iteration %d (violation %.3e)", iteration, violation)
            break
        W, d, blocking = candidates.direction(k)
        old = x[W].copy()
        x[W] = old + d
        if blocking >= 0:
            x[blocking] = 0.0
        x[W] = np.where(bounded[W] & (x[W] < 0), 0.0, x[W])
        d = x[W] - old
        delta = float(g[W] @ d + 0.5 * d @ (Q[np.ix_(W, W)] @ d))
        ensure_descent(delta, objective)
        g += Q[:, W] @ d
        objective += delta
        iteration += 1

        if iteration % REFRESH_EVERY == 0:
            x = _repair_equalities(qp, x)
            g = Q @ x + f
            objective = qp.objective(x)
        if cfg.verbose and iteration % cfg.log_every == 0:
            record = {
                "iteration": iteration,
                "objective": objective,
                "violation": violation,
                "equality_residual": float(np.abs(C @ x - qp.D).max(initial=0.0)),
                "working_set": [int(j) for j in W],
            }
            trace.append(record)
            LOGGER.info("solver_step %s", json.dumps(record, sort_keys=True))

    if not converged:
        LOGGER.warning("Decomposition stopped after %d iterations (violation %.3e)", iteration, violation)
    return _finish(qp, x, iteration, converged, "decomposition", trace)


def solve(qp: GeneralQP, cfg: SolverConfig = SolverConfig()) -> DualSolution:
    """Small problems and those with more than two coupling rows go to the dense oracle, the rest to decomposition."""
    if qp.n < cfg.oracle_threshold or not decomposable(qp.C):
        return solve_dense_oracle(qp, tol=min(cfg.tol, 1e-9))
    return solve_decomposition(qp, cfg)
