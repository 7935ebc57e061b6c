import numpy as np
import pytest

from greedylsq.exceptions import AllZeroGradient, ZeroColumn
from greedylsq.linalg import column_dot, column_norms_sq
from greedylsq.problems import LsqProblem, gen_gaussian, make_consistent, make_inconsistent
from greedylsq.solvers import (
    Method,
    SolverConfig,
    StopReason,
    ggs_randomized_select,
    ggs_select,
    grcd_select,
    rgs_select,
    solve,
    step,
)


def worked_problem():
    A = np.array([[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]], order="F")
    return LsqProblem(matrix=A, rhs=np.array([1.0, 2.0, 3.0]),
                      known_solution=np.array([1.0, 1.0]), consistent=True)


# ---------------------------------------------------------------------------
# selection rules
# ---------------------------------------------------------------------------

def test_ggs_select_prefers_normalized_winner():
    j, cand = ggs_select(np.array([1.0, 4.0]), np.array([1.0, 4.0]), 1e-12)
    assert j == 1 and list(cand) == [1]


def test_ggs_select_tie_breaks_to_lowest_index():
    j, cand = ggs_select(np.array([1.0, 1.0]), np.array([1.0, 1.0]), 1e-12)
    assert j == 0 and list(cand) == [0, 1]


def test_ggs_select_stage_two_uses_norm_ratio():
    j, cand = ggs_select(np.array([2.0, 2.0]), np.array([4.0, 1.0]), 1e-12)
    assert j == 1 and list(cand) == [0, 1]


def test_ggs_select_zero_gradient_raises():
    with pytest.raises(AllZeroGradient):
        ggs_select(np.zeros(3), np.ones(3), 1e-12)


def test_ggs_select_zero_norm_candidate_raises():
    with pytest.raises(ZeroColumn):
        ggs_select(np.array([1.0, 0.5]), np.array([0.0, 1.0]), 1e-12)


def test_grcd_select_hand_threshold():
    rng = np.random.default_rng(0)
    j, members, threshold = grcd_select(np.array([1.0, 4.0]), np.array([1.0, 4.0]), 5.0, rng)
    assert j == 1 and list(members) == [1]
    assert threshold == pytest.approx(0.5 * (4.0 / 17.0 + 1.0 / 5.0), rel=1e-15)


def test_grcd_select_symmetric_keeps_all_and_samples_uniformly():
    s = np.full(4, 2.0)
    norms = np.ones(4)
    rng = np.random.default_rng(12)
    counts = np.zeros(4)
    for _ in range(4000):
        j, members, _ = grcd_select(s, norms, 4.0, rng)
        assert list(members) == [0, 1, 2, 3]
        counts[j] += 1
    freq = counts / 4000
    sigma = np.sqrt(0.25 * 0.75 / 4000)
    assert np.all(np.abs(freq - 0.25) < 3 * sigma + 1e-9)


def test_grcd_select_single_column():
    j, members, _ = grcd_select(np.array([3.0]), np.array([2.0]), 2.0, np.random.default_rng(5))
    assert j == 0 and list(members) == [0]


def test_grcd_membership_invariant():
    rng = np.random.default_rng(99)
    for _ in range(200):
        n = int(rng.integers(2, 30))
        s = rng.standard_normal(n)
        norms = rng.random(n) + 0.1
        frob = float(norms.sum())
        j, members, _ = grcd_select(s, norms, frob, rng)
        assert j in members
        best = int(np.argmax(s * s / norms))
        assert best in members


def test_rgs_select_frequencies():
    rng = np.random.default_rng(31)
    counts = 0
    draws = 10_000
    norms = np.array([1.0, 3.0])
    for _ in range(draws):
        counts += rgs_select(norms, 4.0, rng)
    freq = counts / draws
    sigma = np.sqrt(0.75 * 0.25 / draws)
    assert abs(freq - 0.75) < 3 * sigma


def test_rgs_select_uniform_when_equal_norms():
    rng = np.random.default_rng(77)
    draws = 10_000
    n = 4
    counts = np.zeros(n)
    for _ in range(draws):
        counts[rgs_select(np.ones(n), float(n), rng)] += 1
    sigma = np.sqrt((1 / n) * (1 - 1 / n) / draws)
    assert np.all(np.abs(counts / draws - 1 / n) < 3 * sigma + 1e-9)


def test_rgs_select_single_column():
    assert rgs_select(np.array([2.0]), 2.0, np.random.default_rng(0)) == 0


def test_ggs_randomized_single_candidate_matches_deterministic():
    s = np.array([1.0, 4.0])
    norms = np.array([1.0, 4.0])
    j_det, cand_det = ggs_select(s, norms, 1e-12)
    j_rand, cand_rand = ggs_randomized_select(s, norms, 1e-12, np.random.default_rng(3))
    assert j_det == j_rand == 1
    assert list(cand_det) == list(cand_rand)


def test_ggs_randomized_sampling_weights():
    rng = np.random.default_rng(9)
    draws = 10_000
    hits = 0
    for _ in range(draws):
        j, _ = ggs_randomized_select(np.array([2.0, 2.0]), np.array([4.0, 1.0]), 1e-12, rng)
        hits += j
    freq = hits / draws
    sigma = np.sqrt(0.8 * 0.2 / draws)
    assert abs(freq - 0.8) < 3 * sigma


def test_ggs_randomized_uniform_on_full_tie():
    rng = np.random.default_rng(14)
    draws = 6000
    counts = np.zeros(3)
    for _ in range(draws):
        j, _ = ggs_randomized_select(np.ones(3), np.ones(3), 1e-12, rng)
        counts[j] += 1
    sigma = np.sqrt((1 / 3) * (2 / 3) / draws)
    assert np.all(np.abs(counts / draws - 1 / 3) < 3 * sigma + 1e-9)


# ---------------------------------------------------------------------------
# step and solve
# ---------------------------------------------------------------------------

def test_step_hand_values(worked_dense):
    x = np.zeros(2)
    r = np.array([1.0, 2.0, 3.0])
    step(x, r, worked_dense, 1, 4.0)
    assert np.array_equal(x, [0.0, 1.0])
    assert np.array_equal(r, [1.0, 0.0, 3.0])
    step(x, r, worked_dense, 0, 1.0)
    assert np.array_equal(x, [1.0, 1.0])
    assert np.array_equal(r, [0.0, 0.0, 3.0])
    assert np.array_equal(np.asarray([column_dot(worked_dense, j, r) for j in range(2)]), [0.0, 0.0])


def test_step_noop_when_column_orthogonal(worked_dense):
    x = np.zeros(2)
    r = np.array([0.0, 0.0, 3.0])
    step(x, r, worked_dense, 0, 1.0)
    assert np.array_equal(x, [0.0, 0.0])
    assert np.array_equal(r, [0.0, 0.0, 3.0])


def test_step_zero_column_raises(worked_dense):
    with pytest.raises(ZeroColumn):
        step(np.zeros(2), np.ones(3), worked_dense, 0, 0.0)


def test_solve_hand_trace():
    report = solve(worked_problem(), SolverConfig(method=Method.GGS, record_trace=True))
    assert report.iterations == 2
    assert report.stop_reason is StopReason.RES_REACHED
    assert np.array_equal(report.solution, [1.0, 1.0])
    assert report.final_res == 0.0
    chosen = [rec.chosen_index for rec in report.trace if rec.chosen_index is not None]
    assert chosen == [1, 0]
    # terminal record captures the converged state
    assert report.trace[-1].chosen_index is None
    assert report.trace[-1].residual_gradient_norm_sq == 0.0


def test_solve_zero_rhs_without_known_solution(worked_dense):
    problem = LsqProblem(matrix=worked_dense, rhs=np.zeros(3))
    report = solve(problem, SolverConfig(method=Method.GGS))
    assert report.iterations == 0
    assert report.stop_reason is StopReason.GRADIENT_REACHED
    assert np.array_equal(report.solution, [0.0, 0.0])


def test_solve_gradient_stopping_without_known_solution(worked_dense):
    problem = LsqProblem(matrix=worked_dense, rhs=np.array([1.0, 2.0, 3.0]))
    report = solve(problem, SolverConfig(method=Method.GGS))
    assert report.iterations == 2
    assert report.stop_reason is StopReason.GRADIENT_REACHED
    np.testing.assert_allclose(report.solution, [1.0, 1.0], rtol=1e-12)


def test_solve_iteration_cap():
    A = gen_gaussian(60, 8, seed=2)
    problem = make_consistent(A, seed=3)
    report = solve(problem, SolverConfig(method=Method.GGS, max_iterations=3))
    assert report.stop_reason is StopReason.ITERATION_CAP
    assert report.iterations == 3


def test_solve_table_scale_iteration_count():
    A = gen_gaussian(1000, 50, seed=7)
    problem = make_consistent(A, seed=1007)
    report = solve(problem, SolverConfig(method=Method.GGS))
    assert 100 <= report.iterations <= 160


def test_solve_warm_start_accepted():
    problem = worked_problem()
    report = solve(problem, SolverConfig(method=Method.GGS),
                   x0=np.array([1.0, 0.999999]))
    assert report.stop_reason is StopReason.RES_REACHED
    assert report.iterations <= 1


def test_every_step_orthogonal_to_its_column():
    # Replay the recorded choices and check the update-rule orthogonality.
    A = gen_gaussian(200, 20, seed=12)
    problem = make_consistent(A, seed=13)
    report = solve(problem, SolverConfig(method=Method.GGS, record_trace=True))
    norms = column_norms_sq(A)
    x = np.zeros(20)
    r = problem.rhs.copy()
    for rec in report.trace:
        if rec.chosen_index is None:
            continue
        j = rec.chosen_index
        step(x, r, A, j, norms[j])
        bound = 1e-10 * np.sqrt(norms[j]) * np.linalg.norm(r)
        assert abs(column_dot(A, j, r)) <= bound
    np.testing.assert_array_equal(x, report.solution)


def test_energy_error_monotone_along_trace():
    for method in (Method.GGS, Method.GRCD, Method.RGS):
        A = gen_gaussian(150, 15, seed=21)
        problem = make_consistent(A, seed=22)
        report = solve(problem, SolverConfig(method=method, seed=5, record_trace=True))
        energies = [rec.energy_error_sq for rec in report.trace]
        for before, after in zip(energies, energies[1:]):
            assert after <= before * (1 + 1e-12)


def test_ggs_selection_matches_full_scan_along_run():
    A = gen_gaussian(120, 12, seed=31)
    problem = make_inconsistent(A, seed=32)
    report = solve(problem, SolverConfig(method=Method.GGS, record_trace=True))
    norms = column_norms_sq(A)
    x = np.zeros(12)
    r = problem.rhs.copy()
    for rec in report.trace:
        if rec.chosen_index is None:
            continue
        s = np.array([column_dot(A, j, r) for j in range(12)])
        cand = np.flatnonzero(np.abs(s) >= (1 - 1e-12) * np.abs(s).max())
        ratios = s[cand] ** 2 / norms[cand]
        best = cand[int(np.argmax(ratios))]
        assert rec.chosen_index == best
        assert (s[rec.chosen_index] ** 2 / norms[rec.chosen_index]) == pytest.approx(
            float(ratios.max()), rel=1e-15)
        step(x, r, A, rec.chosen_index, norms[rec.chosen_index])


def test_deterministic_methods_reproduce_traces():
    A = gen_gaussian(100, 10, seed=41)
    problem = make_consistent(A, seed=42)
    r1 = solve(problem, SolverConfig(method=Method.GGS, record_trace=True))
    r2 = solve(problem, SolverConfig(method=Method.GGS, record_trace=True))
    assert [rec.chosen_index for rec in r1.trace] == [rec.chosen_index for rec in r2.trace]
    np.testing.assert_array_equal(r1.solution, r2.solution)


def test_seeded_methods_reproduce_traces():
    A = gen_gaussian(100, 10, seed=43)
    problem = make_consistent(A, seed=44)
    for method in (Method.GRCD, Method.RGS, Method.GGS_RANDOMIZED):
        r1 = solve(problem, SolverConfig(method=method, seed=17, record_trace=True))
        r2 = solve(problem, SolverConfig(method=method, seed=17, record_trace=True))
        assert [rec.chosen_index for rec in r1.trace] == [rec.chosen_index for rec in r2.trace]
        np.testing.assert_array_equal(r1.solution, r2.solution)


def test_grcd_trace_stays_inside_member_sets():
    A = gen_gaussian(80, 8, seed=51)
    problem = make_consistent(A, seed=52)
    report = solve(problem, SolverConfig(method=Method.GRCD, seed=3, record_trace=True))
    for rec in report.trace:
        if rec.chosen_index is not None:
            assert rec.candidate_set_size >= 1
            assert rec.threshold is not None


def test_residual_drift_stays_small_on_long_runs():
    # Scaled columns force thousands of iterations, crossing several
    # drift checkpoints.
    rng = np.random.default_rng(61)
    A = np.asfortranarray(rng.standard_normal((120, 20)) * np.logspace(0, -4, 20))
    problem = make_consistent(A, seed=62)
    report = solve(problem, SolverConfig(method=Method.GGS, max_iterations=50_000,
                                         res_tolerance=1e-12))
    assert report.iterations > 2000
    assert report.stop_reason is StopReason.RES_REACHED
    assert report.max_drift_rel <= 1e-8


def test_sparse_storage_reproduces_dense_trace(worked_csc):
    dense = worked_problem()
    sparse_prob = LsqProblem(matrix=worked_csc, rhs=dense.rhs,
                             known_solution=dense.known_solution)
    r_dense = solve(dense, SolverConfig(method=Method.GGS, record_trace=True))
    r_sparse = solve(sparse_prob, SolverConfig(method=Method.GGS, record_trace=True))
    assert [rec.chosen_index for rec in r_dense.trace] == \
           [rec.chosen_index for rec in r_sparse.trace]
    np.testing.assert_array_equal(r_dense.solution, r_sparse.solution)


def test_sparse_random_problem_converges():
    from scipy import sparse as sp
    rng = np.random.default_rng(71)
    D = rng.standard_normal((300, 25))
    D[rng.random((300, 25)) > 0.3] = 0.0
    A = sp.csc_array(D)
    problem = make_consistent(A, seed=72)
    for method in (Method.GGS, Method.GRCD):
        report = solve(problem, SolverConfig(method=method, seed=2))
        assert report.stop_reason is StopReason.RES_REACHED
        assert report.final_res <= 1e-6


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(max_iterations=0)
    with pytest.raises(ValueError):
        SolverConfig(res_tolerance=0.0)
    with pytest.raises(ValueError):
        SolverConfig(tie_tolerance_rel=1.0)
    assert SolverConfig(method="grcd").method is Method.GRCD
    defaults = SolverConfig()
    assert defaults.max_iterations == 200_000
    assert defaults.res_tolerance == 1e-6
    assert defaults.tie_tolerance_rel == 1e-12
