"""Interior point solver on block-diagonal SDPs."""

import numpy as np
import pytest

from sephier import SdpProblem, presolve, solve
from sephier.errors import InconsistentConstraints
from sephier.sdp_solver import export_problem, import_problem


def scalar_problem():
    return SdpProblem(
        block_sizes=(1,),
        C={0: np.array([[1.0]])},
        constraints=[{0: np.array([[1.0]])}],
        b=np.array([1.0]),
        sense="min",
    )


def random_feasible_problem(seed, max_block=30, max_constraints=60):
    """Instance with known interior primal/dual pair, so Optimal is guaranteed."""
    rng = np.random.default_rng(seed)
    nblocks = int(rng.integers(1, 3))
    sizes = tuple(int(rng.integers(2, max_block // nblocks + 1)) for _ in range(nblocks))
    p = int(rng.integers(2, max_constraints + 1))
    constraints = []
    for _ in range(p):
        row = {}
        for blk, s in enumerate(sizes):
            G = rng.standard_normal((s, s))
            row[blk] = G + G.T
        constraints.append(row)
    X0 = []
    S0 = []
    for s in sizes:
        G = rng.standard_normal((s, s))
        X0.append(G @ G.T + 0.5 * np.eye(s))
        H = rng.standard_normal((s, s))
        S0.append(H @ H.T + 0.5 * np.eye(s))
    y0 = rng.standard_normal(p)
    b = np.array([
        sum(float(np.tensordot(row[blk], X0[blk])) for blk in row)
        for row in constraints
    ])
    C = {}
    for blk, s in enumerate(sizes):
        acc = -S0[blk].copy()
        for k, row in enumerate(constraints):
            acc += y0[k] * row[blk]
        C[blk] = acc
    return SdpProblem(sizes, C, constraints, b, "max")


def test_scalar_equality():
    sol = solve(scalar_problem(), gap_tol=1e-9)
    assert sol.status == "Optimal"
    assert abs(sol.primal_objective - 1.0) <= 1e-6
    assert abs(sol.dual_objective - 1.0) <= 1e-6
    assert abs(float(sol.X[0][0, 0]) - 1.0) <= 1e-6


def test_trace_with_offdiagonal_constraint():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    prob = SdpProblem((2,), {0: np.eye(2)}, [{0: A}], np.array([2.0]), "min")
    sol = solve(prob)
    assert sol.status == "Optimal"
    assert abs(sol.primal_objective - 2.0) <= 1e-5
    assert np.max(np.abs(sol.X[0] - np.ones((2, 2)))) <= 1e-4


def test_max_eigenvalue_matches_numpy():
    # max <C, X> s.t. Tr X = 1 is the top eigenvalue
    rng = np.random.default_rng(12)
    for _ in range(5):
        G = rng.standard_normal((6, 6))
        C = G + G.T
        prob = SdpProblem((6,), {0: C}, [{0: np.eye(6)}], np.array([1.0]), "max")
        sol = solve(prob, gap_tol=1e-9, feas_tol=1e-9)
        want = float(np.linalg.eigvalsh(C)[-1])
        assert sol.status == "Optimal"
        assert abs(sol.dual_objective - want) <= 1e-6 * (1.0 + abs(want))


def test_constructed_feasible_batch():
    for seed in range(20):
        prob = random_feasible_problem(100 + seed)
        sol = solve(prob, gap_tol=1e-7, feas_tol=1e-8)
        assert sol.status == "Optimal", f"seed {seed}: {sol.status}"
        assert sol.residuals["gap"] <= 1e-6
        assert sol.residuals["primal"] <= 1e-7
        # per-row feasibility at the returned point
        for k, row in enumerate(prob.constraints):
            got = sum(float(np.tensordot(row[blk], sol.X[blk])) for blk in row)
            assert abs(got - prob.b[k]) <= 1e-7 * (1.0 + abs(prob.b[k]))


def test_weak_duality_sandwich():
    prob = random_feasible_problem(7)
    sol = solve(prob, gap_tol=1e-9, feas_tol=1e-9)
    # max sense: primal value below dual value up to residual noise
    assert sol.primal_objective <= sol.dual_objective + 1e-5 * (1.0 + abs(sol.dual_objective))


def test_gap_trace_decreases():
    sol = solve(scalar_problem())
    gaps = sol.residuals["gap_trace"]
    assert len(gaps) >= 2
    assert gaps[-1] < gaps[0]
    assert gaps[-1] <= 1e-6
    drops = sum(1 for a, b in zip(gaps, gaps[1:]) if b <= a)
    assert drops >= (len(gaps) - 1) * 0.8


def test_determinism():
    prob = random_feasible_problem(3)
    a = solve(prob)
    b = solve(prob)
    assert a.iterations == b.iterations
    assert a.primal_objective == b.primal_objective
    assert a.dual_objective == b.dual_objective
    assert all(np.array_equal(Xa, Xb) for Xa, Xb in zip(a.X, b.X))
    assert np.array_equal(a.y, b.y)


def test_unbounded_primal_flagged():
    # max x11 with no constraints cannot converge
    prob = SdpProblem((2,), {0: np.diag([1.0, 0.0])}, [], np.zeros(0), "max")
    sol = solve(prob, max_iter=80)
    assert sol.status != "Optimal"


def test_presolve_drops_zero_rows():
    prob = SdpProblem(
        (1,),
        {0: np.array([[1.0]])},
        [{0: np.array([[1.0]])}, {0: np.array([[0.0]])}],
        np.array([1.0, 0.0]),
        "min",
    )
    reduced, report = presolve(prob)
    assert report.dropped_zero == [1]
    assert reduced.num_constraints == 1


def test_presolve_zero_row_with_nonzero_rhs():
    prob = SdpProblem(
        (1,),
        {0: np.array([[1.0]])},
        [{0: np.array([[0.0]])}],
        np.array([1.0]),
        "min",
    )
    with pytest.raises(InconsistentConstraints):
        presolve(prob)


def test_presolve_duplicate_rows():
    A = {0: np.array([[1.0]])}
    prob = SdpProblem((1,), {0: np.array([[1.0]])}, [A, dict(A)], np.array([1.0, 1.0]), "min")
    reduced, report = presolve(prob)
    assert report.dropped_duplicates == [1]
    sol = solve(prob)
    assert sol.status == "Optimal"
    assert abs(sol.primal_objective - 1.0) <= 1e-6
    assert sol.y.shape == (2,)

    conflict = SdpProblem(
        (1,), {0: np.array([[1.0]])}, [A, dict(A)], np.array([1.0, 2.0]), "min"
    )
    with pytest.raises(InconsistentConstraints):
        presolve(conflict)


def test_duplicate_row_solution_matches_clean_problem():
    base = random_feasible_problem(91)
    doubled = SdpProblem(
        base.block_sizes,
        dict(base.C),
        base.constraints + [dict(base.constraints[0])],
        np.concatenate([base.b, [base.b[0]]]),
        base.sense,
    )
    a = solve(base, gap_tol=1e-8, feas_tol=1e-8)
    b = solve(doubled, gap_tol=1e-8, feas_tol=1e-8)
    assert abs(a.dual_objective - b.dual_objective) <= 1e-6 * (1.0 + abs(a.dual_objective))


def test_export_import_roundtrip(tmp_path):
    prob = random_feasible_problem(55)
    path = tmp_path / "prob.sdp"
    export_problem(prob, str(path))
    back = import_problem(str(path))
    assert back.block_sizes == prob.block_sizes
    assert back.sense == prob.sense
    assert np.array_equal(back.b, prob.b)
    for mats_a, mats_b in zip([prob.C] + prob.constraints, [back.C] + back.constraints):
        for blk, size in enumerate(prob.block_sizes):
            A = np.asarray(mats_a.get(blk, np.zeros((size, size))))
            B = np.asarray(mats_b.get(blk, np.zeros((size, size))))
            assert np.array_equal(A, B)


def test_mismatched_b_length_rejected():
    with pytest.raises(ValueError):
        SdpProblem((1,), {0: np.array([[1.0]])}, [], np.array([1.0]), "min")


def test_asymmetric_matrix_rejected():
    with pytest.raises(ValueError):
        SdpProblem(
            (2,),
            {0: np.array([[0.0, 1.0], [0.0, 0.0]])},
            [],
            np.zeros(0),
            "max",
        )
