import numpy as np
import pytest
from numpy.testing import assert_allclose

from handover_mpc.errors import Infeasible, InfeasibleBounds
from handover_mpc.qp import QP, box_rows, solve_qp

from .oracles import random_box_ineq_qp, solve_qp_by_active_set_enumeration


def scalar_qp(lo, hi):
    A, b = box_rows([lo], [hi], 1)
    return QP(H=np.eye(1), g=np.array([-1.0]), A=A, b=b)


def test_interior_optimum():
    sol = solve_qp(scalar_qp(0.0, 2.0))
    assert_allclose(sol.x, [1.0], atol=1e-8)
    assert sol.status == "optimal"


def test_active_bound():
    sol = solve_qp(scalar_qp(0.0, 0.5))
    assert_allclose(sol.x, [0.5], atol=1e-8)


def test_unconstrained():
    sol = solve_qp(QP(H=np.eye(2), g=np.array([-2.0, 4.0]), A=np.zeros((0, 2)), b=np.zeros(0)))
    assert_allclose(sol.x, [2.0, -4.0], atol=1e-12)


def test_matches_enumeration_oracle(rng):
    for _ in range(25):
        n = int(rng.integers(3, 12))
        H, g, A, b = random_box_ineq_qp(rng, n, int(rng.integers(2, 8)))
        sol = solve_qp(QP(H=H, g=g, A=A, b=b), tol=1e-8)
        x_ref, obj_ref = solve_qp_by_active_set_enumeration(H, g, A, b)
        assert sol.status == "optimal"
        assert abs(sol.objective - obj_ref) <= 1e-6
        assert np.abs(sol.x - x_ref).max() <= 1e-5


def test_solution_feasible_and_stationary(rng):
    H, g, A, b = random_box_ineq_qp(rng, 20, 12)
    sol = solve_qp(QP(H=H, g=g, A=A, b=b), tol=1e-8)
    assert np.all(A @ sol.x <= b + 1e-6 * (1 + np.abs(b).max()))
    grad = H @ sol.x + g + A.T @ sol.lam
    assert np.abs(grad).max() <= 1e-6 * (1 + np.abs(g).max())
    assert np.all(sol.lam >= -1e-10)


def test_deterministic(rng):
    H, g, A, b = random_box_ineq_qp(rng, 15, 10)
    s1 = solve_qp(QP(H=H, g=g, A=A, b=b))
    s2 = solve_qp(QP(H=H, g=g, A=A, b=b))
    assert np.array_equal(s1.x, s2.x)
    assert s1.iterations == s2.iterations


def test_max_iterations_flagged(rng):
    H, g, A, b = random_box_ineq_qp(rng, 10, 5)
    sol = solve_qp(QP(H=H, g=g, A=A, b=b), max_iter=2)
    assert sol.status == "max_iterations"
    assert np.all(np.isfinite(sol.x))


def test_infeasible_raises():
    # x <= -1 and -x <= -1 (x >= 1) cannot hold together
    qp = QP(
        H=np.eye(1),
        g=np.zeros(1),
        A=np.array([[1.0], [-1.0]]),
        b=np.array([-1.0, -1.0]),
    )
    with pytest.raises(Infeasible):
        solve_qp(qp, max_iter=200)


def test_box_rows_validation():
    with pytest.raises(InfeasibleBounds):
        box_rows([1.0], [0.0], 1)


def test_warm_start_unaffected_result(rng):
    H, g, A, b = random_box_ineq_qp(rng, 12, 6)
    cold = solve_qp(QP(H=H, g=g, A=A, b=b), tol=1e-9)
    warm = solve_qp(QP(H=H, g=g, A=A, b=b), tol=1e-9, x0=cold.x + 0.01)
    assert abs(cold.objective - warm.objective) <= 1e-7
