import numpy as np
import pytest

from src.datasets import Hyperparams, partition_by_class
from src.dual_assembly import GeneralQP, assemble_pin_twsvm_dual, assemble_pin_twsvmpi_dual
from src.errors import (
    ConfigError,
    ConvergenceError,
    InfeasibleProblemError,
    NonConvexProblemError,
    UnboundedProblemError,
)
from src.privileged_pca import extract_privileged, fit_pca
from src.qp_solver import (
    SolverConfig,
    decomposable,
    ensure_descent,
    initial_feasible_point,
    kkt_report,
    solve,
    solve_decomposition,
    solve_dense_oracle,
)
from src.synthetic import binary_blobs
from src.trainer import baseline_primal_qp

MIDPOINT = GeneralQP(Q=np.eye(2), f=np.zeros(2), C=[[1.0, 1.0]], D=[1.0])
CORNER = GeneralQP(Q=np.eye(2), f=[-1.0, 0.0], C=[[1.0, 1.0]], D=[1.0])


def random_pin_dual(rng, make_partition):
    m1, m2 = rng.integers(2, 11, size=2)
    part = make_partition(rng, int(m1), int(m2))
    hp = Hyperparams(
        c1=float(rng.uniform(0.1, 5.0)),
        gamma=float(rng.uniform(0.2, 3.0)),
        tau=float(rng.uniform(0.1, 1.0)),
    )
    return assemble_pin_twsvmpi_dual("class1", part, hp)


class TestSmallProblems:
    @pytest.mark.parametrize("qp, expected", [(MIDPOINT, [0.5, 0.5]), (CORNER, [1.0, 0.0])])
    def test_decomposition(self, qp, expected):
        sol = solve_decomposition(qp, SolverConfig(tol=1e-10))
        assert sol.converged
        np.testing.assert_allclose(sol.x, expected, atol=1e-8)

    @pytest.mark.parametrize("qp, expected", [(MIDPOINT, [0.5, 0.5]), (CORNER, [1.0, 0.0])])
    def test_oracle(self, qp, expected):
        sol = solve_dense_oracle(qp)
        assert sol.converged
        np.testing.assert_allclose(sol.x, expected, atol=1e-8)

    def test_interior_optimum_solves_linear_system(self):
        Q = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 3.0]])
        f = np.array([-1.0, -2.0, -0.5])
        qp = GeneralQP(Q=Q, f=f, C=np.zeros((0, 3)), D=np.zeros(0), free_mask=[True, True, True])
        sol = solve_dense_oracle(qp, x0=np.zeros(3))
        np.testing.assert_allclose(sol.x, np.linalg.solve(Q, -f), atol=1e-12)


class TestInitialFeasiblePoint:
    def test_single_pair(self):
        part_qp = GeneralQP(
            Q=np.eye(4),
            f=np.zeros(4),
            C=[[1, 0, 1, -1], [0, 1, -1, -2]],
            D=[0.0, -1.0],
            block_layout=(1, 1, 1, 1),
            kind="pin_twsvmpi",
            meta={"c": 1.0, "tau": 0.5},
        )
        x = initial_feasible_point(part_qp)
        np.testing.assert_allclose(x, [0.5, 0.0, 0.0, 0.5])
        np.testing.assert_allclose(part_qp.C @ x, part_qp.D)

    def test_assembled_dual(self, make_partition):
        rng = np.random.default_rng(0)
        part = make_partition(rng, 2, 4)
        qp = assemble_pin_twsvmpi_dual("class1", part, Hyperparams(c1=2.0, tau=1.0))
        x = initial_feasible_point(qp)
        a1, a2, a3, a4 = qp.blocks(x)
        np.testing.assert_allclose(a4, 2.0)
        np.testing.assert_allclose(a1, 4.0)
        np.testing.assert_allclose(qp.C @ x, qp.D, atol=1e-12)
        assert x.min() >= 0.0

    def test_phase_one_for_generic_problems(self):
        x = initial_feasible_point(CORNER)
        np.testing.assert_allclose(CORNER.C @ x, CORNER.D)
        assert x.min() >= 0.0


class TestKKTReport:
    def test_exact_solution(self):
        report = kkt_report(MIDPOINT, np.array([0.5, 0.5]))
        assert report.max_residual() <= 1e-10

    def test_perturbed_point(self):
        report = kkt_report(MIDPOINT, np.array([0.501, 0.499]))
        assert 5e-4 <= report.stationarity <= 5e-3

    def test_infeasible_point(self):
        report = kkt_report(MIDPOINT, np.array([1.0, 1.0]))
        assert report.equality == 1.0


class TestFailures:
    def test_infeasible(self):
        qp = GeneralQP(Q=np.eye(2), f=np.zeros(2), C=[[1.0, 1.0]], D=[-1.0])
        with pytest.raises(InfeasibleProblemError):
            solve_dense_oracle(qp)

    def test_non_convex(self):
        qp = GeneralQP(Q=-np.eye(2), f=np.zeros(2), C=[[1.0, 1.0]], D=[1.0])
        with pytest.raises(NonConvexProblemError):
            solve_dense_oracle(qp, x0=[0.5, 0.5])

    def test_unbounded(self):
        qp = GeneralQP(Q=np.zeros((2, 2)), f=[-1.0, 0.0], C=[[1.0, -1.0]], D=[0.0])
        with pytest.raises(UnboundedProblemError):
            solve_dense_oracle(qp, x0=[0.0, 0.0])

    def test_bad_start_point(self):
        with pytest.raises(InfeasibleProblemError):
            solve_dense_oracle(MIDPOINT, x0=[1.0, 1.0])
        with pytest.raises(ConfigError):
            solve_dense_oracle(MIDPOINT, x0=[1.0])

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            SolverConfig(working_set_size=2)
        with pytest.raises(ConfigError):
            SolverConfig(tol=0.0)


class TestDecomposition:
    def test_objective_never_increases(self, make_partition):
        qp = assemble_pin_twsvmpi_dual("class1", make_partition(np.random.default_rng(1), 6, 7), Hyperparams())
        start = qp.objective(initial_feasible_point(qp))
        sol = solve_decomposition(qp, SolverConfig(tol=1e-8, verbose=True, log_every=1))
        objectives = [step["objective"] for step in sol.trace]
        assert objectives
        for before, after in zip(objectives, objectives[1:]):
            assert after <= before + 1e-9 * (1.0 + abs(before))
        assert sol.objective <= start + 1e-12

    def test_feasibility_preserved(self, make_partition):
        qp = assemble_pin_twsvmpi_dual("class1", make_partition(np.random.default_rng(2), 8, 5), Hyperparams(tau=0.3))
        sol = solve_decomposition(qp, SolverConfig(tol=1e-8, verbose=True, log_every=1))
        assert max(step["equality_residual"] for step in sol.trace) <= 1e-9
        assert sol.x[qp.bounded].min() >= -1e-12

    def test_random_generic_problems_match_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(3):
            M = rng.normal(size=(20, 20))
            C = rng.uniform(0.5, 1.5, size=(2, 20))
            qp = GeneralQP(Q=M @ M.T / 20.0, f=rng.normal(size=20), C=C, D=C @ rng.uniform(0.0, 1.0, 20))
            decomposition = solve_decomposition(qp, SolverConfig(tol=1e-8))
            oracle = solve_dense_oracle(qp)
            assert decomposition.converged and oracle.converged
            assert abs(decomposition.objective - oracle.objective) <= 1e-6 * (1.0 + abs(oracle.objective))

    def test_fifty_random_duals_match_oracle(self, make_partition):
        rng = np.random.default_rng(4)
        for _ in range(50):
            qp = random_pin_dual(rng, make_partition)
            decomposition = solve_decomposition(qp, SolverConfig(tol=1e-8))
            oracle = solve_dense_oracle(qp)
            assert decomposition.converged and oracle.converged
            assert abs(decomposition.objective - oracle.objective) <= 1e-6 * (1.0 + abs(oracle.objective))

    def test_converged_solves_are_certified(self, make_partition):
        rng = np.random.default_rng(5)
        for _ in range(10):
            qp = random_pin_dual(rng, make_partition)
            for sol in (solve_decomposition(qp, SolverConfig(tol=1e-8)), solve_dense_oracle(qp)):
                assert sol.converged
                report = kkt_report(qp, sol.x)
                assert report.equality <= 1e-9
                assert report.min_x >= -1e-9
                assert report.stationarity <= 1e-6

    def test_max_iter_reports_unconverged(self, make_partition):
        qp = assemble_pin_twsvmpi_dual("class1", make_partition(np.random.default_rng(6), 9, 9), Hyperparams())
        sol = solve_decomposition(qp, SolverConfig(tol=1e-12, max_iter=1))
        assert not sol.converged
        assert sol.iterations == 1


class TestDispatch:
    def test_small_problems_use_oracle(self):
        assert solve(MIDPOINT, SolverConfig()).method == "oracle"

    def test_threshold_routes_to_decomposition(self, make_partition):
        qp = assemble_pin_twsvmpi_dual("class1", make_partition(np.random.default_rng(7), 4, 4), Hyperparams())
        sol = solve(qp, SolverConfig(oracle_threshold=1))
        assert sol.method == "decomposition"
        assert sol.converged


def blobs_dual(n: int = 200, seed: int = 0):
    ds = binary_blobs(n=n, separation=6.0, seed=seed)
    ds = ds.with_privileged(extract_privileged(ds.features, fit_pca(ds.features, 0.95)))
    return assemble_pin_twsvmpi_dual("class1", partition_by_class(ds), Hyperparams())


class TestCircuitSteps:
    def test_blobs_dual_converges_and_is_certified(self):
        qp = blobs_dual()
        assert qp.n >= 400
        sol = solve_decomposition(qp, SolverConfig())
        assert sol.converged
        report = kkt_report(qp, sol.x)
        assert report.equality <= 1e-9
        assert report.min_x >= -1e-9
        assert report.stationarity <= 1e-6
        assert sol.objective < qp.objective(initial_feasible_point(qp))

    @pytest.mark.slow
    def test_blobs_dual_matches_oracle(self):
        qp = blobs_dual()
        decomposition = solve_decomposition(qp, SolverConfig(tol=1e-8))
        oracle = solve_dense_oracle(qp)
        assert decomposition.converged and oracle.converged
        assert abs(decomposition.objective - oracle.objective) <= 1e-6 * (1.0 + abs(oracle.objective))

    def test_nonnegative_proximal_multipliers(self, make_partition):
        rng = np.random.default_rng(8)
        for _ in range(10):
            part = make_partition(rng, int(rng.integers(2, 11)), int(rng.integers(2, 11)))
            qp = assemble_pin_twsvmpi_dual("class1", part, Hyperparams(nonnegative_proximal_multipliers=True))
            decomposition = solve_decomposition(qp, SolverConfig(tol=1e-8))
            oracle = solve_dense_oracle(qp)
            assert decomposition.converged and oracle.converged
            assert abs(decomposition.objective - oracle.objective) <= 1e-6 * (1.0 + abs(oracle.objective))

    def test_zero_column_moves_alone(self):
        qp = GeneralQP(Q=np.eye(3), f=[0.0, 0.0, -1.0], C=[[1.0, 1.0, 0.0]], D=[1.0])
        sol = solve_decomposition(qp, SolverConfig(tol=1e-10))
        assert sol.converged
        np.testing.assert_allclose(sol.x, [0.5, 0.5, 1.0], atol=1e-8)

    def test_parallel_columns_trade_off(self):
        C = np.array([[1.0, 2.0, 1.0], [1.0, 2.0, -1.0]])
        qp = GeneralQP(Q=np.eye(3), f=np.zeros(3), C=C, D=C @ np.ones(3))
        sol = solve_decomposition(qp, SolverConfig(tol=1e-10))
        assert sol.converged
        np.testing.assert_allclose(sol.x, [0.6, 1.2, 1.0], atol=1e-8)

    def test_three_rows_are_refused(self):
        qp = GeneralQP(Q=np.eye(4), f=np.zeros(4), C=np.eye(3, 4), D=np.ones(3))
        assert not decomposable(qp.C)
        with pytest.raises(ConfigError):
            solve_decomposition(qp, SolverConfig(working_set_size=4))

    def test_ascent_is_an_error(self):
        ensure_descent(-1.0, 10.0)
        ensure_descent(1e-15, 10.0)
        with pytest.raises(ConvergenceError, match="raised the objective"):
            ensure_descent(1e-6, 10.0)


class TestOracleRobustness:
    def test_generic_problem_is_certified(self):
        rng = np.random.default_rng(3)
        M = rng.normal(size=(20, 20))
        C = rng.uniform(0.5, 1.5, size=(2, 20))
        qp = GeneralQP(Q=M @ M.T / 20.0, f=rng.normal(size=20), C=C, D=C @ rng.uniform(0.0, 1.0, 20))
        sol = solve_dense_oracle(qp)
        assert sol.converged
        report = kkt_report(qp, sol.x)
        assert report.stationarity <= 1e-8
        assert report.complementarity <= 1e-8
        assert report.equality <= 1e-9

    def test_degenerate_vertex_does_not_cycle(self):
        other = np.tile(np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]), (4, 1))
        own = np.array([[-1.0, 0.0, 1.0], [0.0, -1.0, 1.0], [-1.0, -1.0, 1.0]])
        qp, x0 = baseline_primal_qp(own, other, 1.0, 0.0, 1e-4)
        sol = solve_dense_oracle(qp, x0=x0)
        assert sol.converged
        assert sol.iterations < 50 * qp.n + 200
        assert kkt_report(qp, sol.x).max_residual() <= 1e-8

    def test_baseline_dual_with_many_rows_goes_to_oracle(self, make_partition):
        part = make_partition(np.random.default_rng(9), 20, 40)
        qp = assemble_pin_twsvm_dual("class1", part, Hyperparams())
        assert qp.C.shape[0] == 40 and qp.n >= 64
        sol = solve(qp, SolverConfig())
        assert sol.method == "oracle"
        assert sol.converged
