import numpy as np
import pytest

from sos import SdpProblem, SolverConfig, solve, verify


def _toy_problem() -> SdpProblem:
    """minimize x subject to x = 2 X_01, trace X = 1, X PSD; the optimum is -1."""
    offdiag = np.array([[0.0, 1.0], [1.0, 0.0]])
    A = [np.stack([-offdiag, np.eye(2)])]
    return SdpProblem(
        A=A,
        C=[np.zeros((2, 2))],
        B=np.array([[1.0], [0.0]]),
        c_free=np.array([1.0]),
        b=np.array([0.0, 1.0]),
        block_names=["X"],
    )


def test_toy_problem_reaches_optimum():
    problem = _toy_problem()
    solution = solve(problem)
    assert solution.is_optimal
    assert solution.x[0] == pytest.approx(-1.0, abs=1e-6)
    np.testing.assert_allclose(solution.X[0], [[0.5, -0.5], [-0.5, 0.5]], atol=1e-5)
    checks = verify(problem, solution)
    assert checks["equality_max"] < 1e-7
    assert checks["primal_min_eig"] > -1e-7
    assert abs(checks["gap"]) < 1e-6


def test_iteration_limit_is_reported():
    solution = solve(_toy_problem(), SolverConfig(max_iter=1))
    assert solution.status == "max_iter"
    assert solution.iterations == 1


def test_plain_path_without_corrector():
    solution = solve(_toy_problem(), SolverConfig(predictor_corrector=False, max_iter=200))
    assert solution.is_optimal
    assert solution.primal_objective == pytest.approx(-1.0, abs=1e-6)


def test_problem_validation():
    with pytest.raises(ValueError):
        SdpProblem(A=[np.zeros((1, 2, 3))], C=[np.zeros((2, 2))], B=np.zeros((1, 1)), c_free=np.zeros(1), b=np.zeros(1))
    asym = np.array([[[0.0, 1.0], [0.0, 0.0]]])
    with pytest.raises(ValueError):
        SdpProblem(A=[asym], C=[np.zeros((2, 2))], B=np.zeros((1, 1)), c_free=np.zeros(1), b=np.zeros(1))
    with pytest.raises(ValueError):
        solve(_toy_problem(), SolverConfig(max_block=1))


def test_triplet_dump(tmp_path):
    problem = _toy_problem()
    triplets = problem.to_triplets()
    assert (1, 1, 1, 2, -1.0) in triplets
    assert (2, 1, 1, 1, 1.0) in triplets
    assert (0, 2, 1, 1, 1.0) in triplets
    path = tmp_path / "toy.txt"
    problem.write_triplets(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# constraints 2"
    assert len(lines) == 3 + len(triplets)


def test_profile_hash_tracks_tolerances():
    assert SolverConfig().profile_hash() == SolverConfig().profile_hash()
    assert SolverConfig().profile_hash() != SolverConfig(tol_gap=1e-6).profile_hash()


def test_repeated_solves_are_bitwise_equal():
    first = solve(_toy_problem())
    second = solve(_toy_problem())
    assert first.primal_objective == second.primal_objective
    np.testing.assert_array_equal(first.X[0], second.X[0])


def test_pinned_scalar_block():
    problem = SdpProblem(A=[np.ones((1, 1, 1))], C=[np.ones((1, 1))], B=None, c_free=None, b=np.array([3.0]))
    solution = solve(problem)
    assert solution.is_optimal
    assert solution.primal_objective == pytest.approx(3.0, abs=1e-7)
    assert solution.residuals["gap"] < 1e-8
    assert problem.n_free == 0


def test_trace_constrained_diagonal_objective():
    problem = SdpProblem(
        A=[np.eye(2)[None]], C=[np.diag([1.0, 2.0])], B=None, c_free=None, b=np.array([1.0])
    )
    solution = solve(problem)
    assert solution.is_optimal
    assert solution.primal_objective == pytest.approx(1.0, abs=1e-7)
    assert solution.residuals["gap"] < 1e-8
    np.testing.assert_allclose(solution.X[0], np.diag([1.0, 0.0]), atol=1e-6)
    assert abs(verify(problem, solution)["gap"]) < 1e-7


def test_toy_problem_without_refinement():
    solution = solve(_toy_problem(), SolverConfig(refine_steps=0))
    assert solution.is_optimal
    assert solution.primal_objective == pytest.approx(-1.0, abs=1e-6)
