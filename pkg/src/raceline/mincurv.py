"""Minimum-curvature optimization of spline control points.

The sampled squared-curvature objective is linearized at the current
line: first derivatives (and with them the Frenet normals) are frozen,
leaving a convex quadratic in the control points. Corridor constraints
bound the displacement of each sample along its frozen normal by the
available width on either side; station constraints box the displacement
along the frozen tangent to one discretization interval. The latter keep
the frenet linearization local: without them the quadratic model rewards
parameter slides along the track that fake curvature reduction without
changing the geometry, and the true objective then rejects the step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateParameterizationError, NumericalError, QpAssemblyError
from .qp import QpProblem, QpSolution, solve_qp
from .splines import SplineTrajectory, _design_matrix
from .track import CenterlineModel

__all__ = [
    "CurvatureWeights",
    "OptimizationWindow",
    "OptimizeResult",
    "curvature_weights",
    "build_basis_matrices",
    "assemble_qp",
    "optimize",
    "optimize_window",
    "sum_sq_curvature",
]

MAX_ITERATIONS = 5


@dataclass(frozen=True)
class CurvatureWeights:
    """Per-sample diagonals of the linearized curvature quadratic form.

    With frozen first derivatives (x', y') and n = ||T'||, the sampled
    squared curvature expands to
    pxx*(x'')^2 + pxy*(x'' y'') + pyy*(y'')^2 with pxx = y'^2/n^6,
    pxy = -2x'y'/n^6, pyy = x'^2/n^6.
    """

    pxx: np.ndarray
    pxy: np.ndarray
    pyy: np.ndarray


def curvature_weights(d1: np.ndarray, weight_vector: np.ndarray | None = None) -> CurvatureWeights:
    """Weights from first derivatives at the samples; optional extra scaling."""
    d1 = np.asarray(d1, dtype=float)
    norm = np.hypot(d1[:, 0], d1[:, 1])
    if np.any(norm < 1e-9):
        raise DegenerateParameterizationError(
            "first-derivative norm below 1e-9 at a sample; weights are undefined"
        )
    n6 = norm**6
    scale = np.ones_like(norm) if weight_vector is None else np.asarray(weight_vector, dtype=float)
    if scale.shape != norm.shape:
        raise ValueError(f"weight vector must have length {norm.size}")
    if np.any(scale <= 0):
        raise ValueError("per-sample weights must be positive")
    return CurvatureWeights(
        pxx=scale * d1[:, 1] ** 2 / n6,
        pxy=scale * (-2.0) * d1[:, 0] * d1[:, 1] / n6,
        pyy=scale * d1[:, 0] ** 2 / n6,
    )


def build_basis_matrices(spline: SplineTrajectory, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Value and second-derivative design matrices over independent coefficients.

    For periodic splines the wrapped trailing columns fold onto the leading
    control points, so each matrix has ``spline.n_ctrl`` columns and rows of
    the value matrix still sum to one.
    """
    params = np.asarray(params, dtype=float)
    b = _design_matrix(spline.knots, spline.degree, params, 0)
    b2 = _design_matrix(spline.knots, spline.degree, params, 2)
    if spline.periodic:
        nu, p = spline.n_ctrl, spline.degree
        for mat in (b, b2):
            mat[:, :p] += mat[:, nu:]
        b = b[:, :nu]
        b2 = b2[:, :nu]
    return b, b2


@dataclass(frozen=True)
class OptimizationWindow:
    """Free control-point indices plus frozen second-derivative contributions.

    ``fx``/``fy`` hold, per sample, the second-derivative contribution of
    every frozen coefficient; they feed the linear term of the windowed QP.
    """

    free_indices: np.ndarray
    fx: np.ndarray
    fy: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "free_indices", np.asarray(self.free_indices, dtype=int))
        if self.free_indices.size == 0:
            raise QpAssemblyError("optimization window has an empty free set")


def _normalize_free_indices(free_indices, n_ctrl: int) -> np.ndarray:
    idx = np.unique(np.asarray(free_indices, dtype=int))
    if idx.size == 0:
        raise QpAssemblyError("optimization window has an empty free set")
    if idx[0] < 0 or idx[-1] >= n_ctrl:
        raise QpAssemblyError(
            f"free control-point indices must lie in [0, {n_ctrl}), got range "
            f"[{idx[0]}, {idx[-1]}]"
        )
    return idx


def _assemble(
    model: CenterlineModel,
    free_indices: np.ndarray | None = None,
    d1: np.ndarray | None = None,
    weight_vector: np.ndarray | None = None,
    station_tol: float | None = None,
) -> tuple[QpProblem, dict]:
    spline = model.spline
    disc = model.disc
    params = disc.params
    s = spline.n_ctrl
    if station_tol is None:
        station_tol = disc.spacing
    if station_tol <= 0.0:
        raise QpAssemblyError("station tolerance must be positive")

    if np.any(model.l <= 0.0) or np.any(model.r <= 0.0):
        bad = int(np.argmax((model.l <= 0.0) | (model.r <= 0.0)))
        raise QpAssemblyError(f"corridor is closed at sample {bad}; margin too large")

    b, b2 = build_basis_matrices(spline, params)
    if d1 is None:
        d1 = spline.derivatives(params, 1)
    w = curvature_weights(d1, weight_vector)

    hxx = b2.T @ (w.pxx[:, None] * b2)
    hyy = b2.T @ (w.pyy[:, None] * b2)
    hxy = 0.5 * (b2.T @ (w.pxy[:, None] * b2))  # symmetrized cross block

    coeffs = spline.control_points
    if free_indices is None:
        free = np.arange(s)
        window = None
        g = np.zeros(2 * s)
    else:
        free = free_indices
        frozen = np.setdiff1d(np.arange(s), free)
        fx = b2[:, frozen] @ coeffs[frozen, 0] if frozen.size else np.zeros(params.size)
        fy = b2[:, frozen] @ coeffs[frozen, 1] if frozen.size else np.zeros(params.size)
        window = OptimizationWindow(free_indices=free, fx=fx, fy=fy)
        b2f = b2[:, free]
        g = np.concatenate([
            b2f.T @ (w.pxx * fx + 0.5 * w.pxy * fy),
            b2f.T @ (w.pyy * fy + 0.5 * w.pxy * fx),
        ])

    nf = free.size
    h = np.empty((2 * nf, 2 * nf))
    h[:nf, :nf] = hxx[np.ix_(free, free)]
    h[:nf, nf:] = hxy[np.ix_(free, free)].T
    h[nf:, :nf] = hxy[np.ix_(free, free)]
    h[nf:, nf:] = hyy[np.ix_(free, free)]

    normals = disc.normals
    centers = disc.positions
    tangents = np.column_stack([np.cos(disc.headings), np.sin(disc.headings)])
    d_center = np.einsum("ij,ij->i", normals, centers)
    t_center = np.einsum("ij,ij->i", tangents, centers)

    if free_indices is None:
        keep = np.arange(params.size)
        fixed_normal = np.zeros(params.size)
        fixed_tangent = np.zeros(params.size)
    else:
        keep = np.flatnonzero(np.any(b[:, free] != 0.0, axis=1))
        frozen = np.setdiff1d(np.arange(s), free)
        fixed = np.column_stack([
            b[:, frozen] @ coeffs[frozen, 0] if frozen.size else np.zeros(params.size),
            b[:, frozen] @ coeffs[frozen, 1] if frozen.size else np.zeros(params.size),
        ])
        fixed_normal = np.einsum("ij,ij->i", normals, fixed)
        fixed_tangent = np.einsum("ij,ij->i", tangents, fixed)

    bf = b[np.ix_(keep, free)]
    c_rows = np.hstack([normals[keep, 0:1] * bf, normals[keep, 1:2] * bf])
    lb = -model.r[keep] + d_center[keep] - fixed_normal[keep]
    ub = model.l[keep] + d_center[keep] - fixed_normal[keep]
    if np.any(lb >= ub):
        bad = int(keep[np.argmax(lb >= ub)])
        raise QpAssemblyError(f"empty corridor interval at sample {bad}")

    s_rows = np.hstack([tangents[keep, 0:1] * bf, tangents[keep, 1:2] * bf])
    s_mid = t_center[keep] - fixed_tangent[keep]
    problem = QpProblem(
        H=h,
        g=g,
        C=np.vstack([c_rows, s_rows]),
        lb=np.concatenate([lb, s_mid - station_tol]),
        ub=np.concatenate([ub, s_mid + station_tol]),
    )
    aux = {
        "free": free,
        "window": window,
        "z0": np.concatenate([coeffs[free, 0], coeffs[free, 1]]),
        "samples": keep,
    }
    return problem, aux


def assemble_qp(
    model: CenterlineModel,
    free_indices=None,
    d1: np.ndarray | None = None,
    weight_vector: np.ndarray | None = None,
    station_tol: float | None = None,
) -> QpProblem:
    """Quadratic program over the (optionally windowed) control points.

    Rows 1..M bound the normal displacement by the corridor, rows M+1..2M
    bound the tangential displacement by ``station_tol`` (default: the
    discretization spacing).
    """
    free = None
    if free_indices is not None:
        free = _normalize_free_indices(free_indices, model.spline.n_ctrl)
    problem, _ = _assemble(model, free, d1, weight_vector, station_tol)
    return problem


def sum_sq_curvature(spline: SplineTrajectory, params: np.ndarray) -> float:
    """Sampled sum of squared curvature, the acceptance metric for iterations."""
    k = spline.curvature(params)
    return float(np.sum(np.square(k)))


@dataclass(frozen=True)
class OptimizeResult:
    """Optimized spline plus solver evidence and the iteration history."""

    spline: SplineTrajectory
    solution: QpSolution
    log: list = field(default_factory=list)
    objective: float = 0.0
    baseline_objective: float = 0.0


def _run(
    model: CenterlineModel,
    free: np.ndarray | None,
    iterations: int,
    kkt_tol: float,
    regularization: float,
    weight_vector: np.ndarray | None,
    station_tol: float | None,
) -> OptimizeResult:
    if not 1 <= iterations <= MAX_ITERATIONS:
        raise ValueError(f"iterations must be in 1..{MAX_ITERATIONS}, got {iterations}")
    params = model.disc.params
    current = model.spline
    best = sum_sq_curvature(current, params)
    baseline = best
    log: list[dict] = []
    last_solution: QpSolution | None = None

    for it in range(1, iterations + 1):
        d1 = current.derivatives(params, 1)
        problem, aux = _assemble(model, free, d1, weight_vector, station_tol)
        ridge = regularization * np.trace(problem.H) / max(1, problem.H.shape[0])
        solution = solve_qp(problem, z0=aux["z0"], tol=kkt_tol, regularization=ridge)
        if solution.status != "solved":
            raise NumericalError(f"QP solver stopped with status '{solution.status}'")
        last_solution = solution

        nf = aux["free"].size
        coeffs = current.control_points.copy()
        coeffs[aux["free"], 0] = solution.z[:nf]
        coeffs[aux["free"], 1] = solution.z[nf:]
        candidate = current.with_control_points(coeffs[:, 0], coeffs[:, 1])
        objective = sum_sq_curvature(candidate, params)
        accepted = objective <= best * (1.0 + 1e-12) + 1e-15
        log.append(
            {
                "iteration": it,
                "objective": objective,
                "accepted": bool(accepted),
                "status": solution.status,
                "kkt_stationarity": solution.kkt_stationarity,
                "kkt_primal": solution.kkt_primal,
                "solver_iterations": solution.iterations,
            }
        )
        if not accepted:
            break
        current = candidate
        best = min(best, objective)

    return OptimizeResult(
        spline=current,
        solution=last_solution,
        log=log,
        objective=best,
        baseline_objective=baseline,
    )


def optimize(
    model: CenterlineModel,
    iterations: int = 1,
    kkt_tol: float = 1e-8,
    regularization: float = 1e-10,
    weight_vector: np.ndarray | None = None,
    station_tol: float | None = None,
) -> OptimizeResult:
    """Minimize sampled squared curvature with every control point free.

    Each round solves the linearized QP, then re-evaluates the true sampled
    curvature of the candidate; a round that does not improve it is rejected
    and iteration stops, so the result never degrades the centerline.
    """
    return _run(model, None, iterations, kkt_tol, regularization, weight_vector, station_tol)


def optimize_window(
    model: CenterlineModel,
    free_indices,
    iterations: int = 1,
    kkt_tol: float = 1e-8,
    regularization: float = 1e-10,
    weight_vector: np.ndarray | None = None,
    station_tol: float | None = None,
) -> OptimizeResult:
    """Like optimize() but only the listed control-point indices may move."""
    free = _normalize_free_indices(free_indices, model.spline.n_ctrl)
    return _run(model, free, iterations, kkt_tol, regularization, weight_vector, station_tol)
