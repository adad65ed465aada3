"""Convex QP solver against hand cases and a projected-gradient oracle."""

from __future__ import annotations

import numpy as np
import pytest

from raceline.qp import QpProblem, QpSolution, solve_qp

RNG = np.random.default_rng(77)


def box_problem(h: np.ndarray, g: np.ndarray, lb: np.ndarray, ub: np.ndarray) -> QpProblem:
    n = g.size
    return QpProblem(H=h, g=g, C=np.eye(n), lb=lb, ub=ub)


def random_box_qp(rng: np.random.Generator, n: int) -> QpProblem:
    """Strictly convex box-constrained QP with a unique solution."""
    a = rng.normal(size=(n, n))
    h = a.T @ a + 0.5 * np.eye(n)
    g = rng.normal(scale=2.0, size=n)
    lb = rng.uniform(-2.0, -0.5, size=n)
    ub = rng.uniform(0.5, 2.0, size=n)
    return box_problem(h, g, lb, ub)


def projected_gradient_oracle(problem: QpProblem, tol: float = 1e-8, max_iter: int = 200_000) -> np.ndarray:
    """Independent reference solver for box-constrained strictly convex QPs.

    Plain projected gradient with the 1/L step; terminates when the
    projected step stalls below tol.
    """
    h, g = problem.H, problem.g
    lb, ub = problem.lb, problem.ub
    step = 1.0 / float(np.linalg.eigvalsh(h)[-1])
    z = np.clip(np.zeros_like(g), lb, ub)
    for _ in range(max_iter):
        z_next = np.clip(z - step * (h @ z + g), lb, ub)
        if np.max(np.abs(z_next - z)) < tol:
            return z_next
        z = z_next
    raise AssertionError("projected-gradient oracle did not converge")


class TestHandCases:
    def test_interior_minimum(self):
        n = 4
        problem = box_problem(np.eye(n), np.zeros(n), -np.ones(n), np.ones(n))
        sol = solve_qp(problem)
        assert np.max(np.abs(sol.z)) <= 1e-8
        assert sol.status == "solved"
        assert sol.objective == pytest.approx(0.0, abs=1e-12)

    def test_active_bound_with_positive_multiplier(self):
        # Unconstrained minimum z1 = 4 is cut off by z1 <= 1.
        n = 3
        g = np.array([-4.0, 0.0, 0.0])
        lb = np.full(n, -np.inf)
        ub = np.array([1.0, np.inf, np.inf])
        sol = solve_qp(box_problem(np.eye(n), g, lb, ub))
        assert sol.z[0] == pytest.approx(1.0, abs=1e-8)
        assert np.max(np.abs(sol.z[1:])) <= 1e-8
        assert sol.lam_upper[0] >= 1e-6
        assert sol.kkt_stationarity <= 1e-6

    def test_tight_interval_pins_solution(self):
        n = 3
        target = np.array([0.5, -0.25, 1.0])
        sol = solve_qp(box_problem(np.eye(n), np.zeros(n), target - 1e-9, target + 1e-9))
        assert np.allclose(sol.z, target, atol=1e-8)

    def test_exact_equality_rejected_with_guidance(self):
        n = 2
        target = np.array([0.5, -0.25])
        with pytest.raises(ValueError, match="small interval"):
            box_problem(np.eye(n), np.zeros(n), target, target)

    def test_general_row_constraint(self):
        # Minimize ||z||^2 - 4 z1 subject to z1 + z2 <= 1.
        h = np.eye(2)
        g = np.array([-4.0, 0.0])
        c = np.array([[1.0, 1.0]])
        sol = solve_qp(QpProblem(H=h, g=g, C=c, lb=np.array([-np.inf]), ub=np.array([1.0])))
        # KKT: z = (4, 0) - lam * (1, 1), z1 + z2 = 1 -> lam = 1.5.
        assert np.allclose(sol.z, [2.5, -1.5], atol=1e-7)


class TestSolutionContract:
    def test_numeric_fields_are_python_floats(self):
        sol = solve_qp(random_box_qp(RNG, 10))
        assert isinstance(sol, QpSolution)
        for name in ("objective", "kkt_stationarity", "kkt_primal", "kkt_comp", "solve_time"):
            assert type(getattr(sol, name)) is float

    def test_kkt_residuals_certify_solution(self):
        sol = solve_qp(random_box_qp(RNG, 16))
        assert sol.status == "solved"
        assert sol.kkt_stationarity <= 1e-6
        assert sol.kkt_primal <= 1e-6
        assert sol.kkt_comp <= 1e-6

    def test_warm_start_accepted(self):
        problem = random_box_qp(RNG, 12)
        cold = solve_qp(problem)
        warm = solve_qp(problem, z0=cold.z)
        assert np.max(np.abs(warm.z - cold.z)) <= 1e-6

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            QpProblem(
                H=np.eye(3),
                g=np.zeros(2),
                C=np.eye(3),
                lb=-np.ones(3),
                ub=np.ones(3),
            )

    def test_crossed_bounds_rejected(self):
        with pytest.raises(ValueError):
            QpProblem(
                H=np.eye(2),
                g=np.zeros(2),
                C=np.eye(2),
                lb=np.array([1.0, 0.0]),
                ub=np.array([-1.0, 1.0]),
            )


class TestOracleAgreement:
    def test_matches_projected_gradient_on_random_psd_problem(self):
        problem = random_box_qp(np.random.default_rng(5), 10)
        sol = solve_qp(problem)
        ref = projected_gradient_oracle(problem)
        assert np.max(np.abs(sol.z - ref)) <= 1e-6
