"""Dense convex quadratic programming.

Solves min 0.5 z'Hz + g'z subject to lb <= Cz <= ub (either side may be
infinite) with a primal-dual interior-point method. The iteration has no
pivoting or ordering choices, so repeated solves of the same problem
produce identical results.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError

__all__ = ["QpProblem", "QpSolution", "solve_qp"]


@dataclass(frozen=True)
class QpProblem:
    """Data for min 0.5 z'Hz + g'z s.t. lb <= Cz <= ub plus variable bounds."""

    H: np.ndarray
    g: np.ndarray
    C: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    var_lb: np.ndarray | None = None
    var_ub: np.ndarray | None = None

    def __post_init__(self) -> None:
        H = np.asarray(self.H, dtype=float)
        g = np.asarray(self.g, dtype=float)
        C = np.asarray(self.C, dtype=float)
        lb = np.asarray(self.lb, dtype=float)
        ub = np.asarray(self.ub, dtype=float)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)
        n = g.size
        if H.shape != (n, n):
            raise ValueError(f"H must be ({n}, {n}), got {H.shape}")
        if not np.allclose(H, H.T, atol=1e-10 * max(1.0, float(np.abs(H).max()))):
            raise ValueError("H must be symmetric")
        if C.size == 0:
            C = C.reshape(0, n)
            object.__setattr__(self, "C", C)
        if C.shape[1] != n or lb.shape != (C.shape[0],) or ub.shape != (C.shape[0],):
            raise ValueError("constraint shapes are inconsistent")
        if np.any(lb > ub):
            bad = int(np.argmax(lb > ub))
            raise ValueError(f"constraint {bad} has lb={lb[bad]} > ub={ub[bad]}")
        if np.any(lb == ub):
            bad = int(np.argmax(lb == ub))
            raise ValueError(f"constraint {bad} is an equality; use a small interval instead")
        for name in ("var_lb", "var_ub"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=float)
                if v.shape != (n,):
                    raise ValueError(f"{name} must have length {n}")
                object.__setattr__(self, name, v)

    @property
    def dims(self) -> tuple[int, int]:
        """(number of variables, number of constraint rows)."""
        return self.g.size, self.C.shape[0]


@dataclass(frozen=True)
class QpSolution:
    """Solver output with KKT residuals measured on the original problem."""

    z: np.ndarray
    objective: float
    status: str
    kkt_stationarity: float
    kkt_primal: float
    kkt_comp: float
    iterations: int
    solve_time: float
    lam_lower: np.ndarray = field(repr=False, default=None)
    lam_upper: np.ndarray = field(repr=False, default=None)


def _stacked_constraints(problem: QpProblem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fold variable bounds into the row constraints as identity rows."""
    n, _ = problem.dims
    C, lb, ub = problem.C, problem.lb, problem.ub
    if problem.var_lb is None and problem.var_ub is None:
        return C, lb, ub
    vlb = problem.var_lb if problem.var_lb is not None else np.full(n, -np.inf)
    vub = problem.var_ub if problem.var_ub is not None else np.full(n, np.inf)
    bounded = np.isfinite(vlb) | np.isfinite(vub)
    if not np.any(bounded):
        return C, lb, ub
    eye = np.eye(n)[bounded]
    return (
        np.vstack([C, eye]),
        np.concatenate([lb, vlb[bounded]]),
        np.concatenate([ub, vub[bounded]]),
    )


def solve_qp(
    problem: QpProblem,
    z0: np.ndarray | None = None,
    tol: float = 1e-8,
    max_iter: int = 60,
    regularization: float = 0.0,
) -> QpSolution:
    """Interior-point solve with deterministic iterations.

    ``regularization`` adds a proximal ridge centered at the warm start:
    the solver minimizes 0.5 z'(H+eI)z + (g-e*z0)'z, which leaves an
    already-optimal warm start untouched instead of shrinking it toward
    the origin. KKT residuals are reported against the original H and g.
    """
    started = time.perf_counter()
    H, g = problem.H, problem.g
    n = g.size
    z0 = np.zeros(n) if z0 is None else np.asarray(z0, dtype=float).copy()
    if z0.shape != (n,):
        raise ValueError(f"warm start must have length {n}")

    C, lb, ub = _stacked_constraints(problem)
    m = C.shape[0]

    # objective scaling keeps the Newton system well conditioned across
    # problems whose natural magnitudes differ by many orders
    rho = max(float(np.abs(H).max()) if H.size else 0.0, float(np.abs(g).max()) if g.size else 0.0, 1e-12)
    P = (H + regularization * np.eye(n)) / rho
    q = (g - regularization * z0) / rho

    def finish(z, y_lo, y_hi, status, iters):
        y_diff = C.T @ (y_lo - y_hi) * rho if m else np.zeros(n)
        stationarity = float(np.linalg.norm(H @ z + g - y_diff))
        if m:
            cz = C @ z
            primal = float(
                max(
                    np.max(np.maximum(lb - cz, 0.0), initial=0.0),
                    np.max(np.maximum(cz - ub, 0.0), initial=0.0),
                )
            )
            slack_lo = np.where(np.isfinite(lb), cz - lb, np.inf)
            slack_hi = np.where(np.isfinite(ub), ub - cz, np.inf)
            comp_lo = np.abs(y_lo * rho * np.where(np.isfinite(slack_lo), slack_lo, 0.0))
            comp_hi = np.abs(y_hi * rho * np.where(np.isfinite(slack_hi), slack_hi, 0.0))
            comp = float(max(comp_lo.max(initial=0.0), comp_hi.max(initial=0.0)))
        else:
            primal = 0.0
            comp = 0.0
        return QpSolution(
            z=z,
            objective=float(0.5 * z @ H @ z + g @ z),
            status=status,
            kkt_stationarity=stationarity,
            kkt_primal=primal,
            kkt_comp=comp,
            iterations=iters,
            solve_time=time.perf_counter() - started,
            lam_lower=y_lo * rho,
            lam_upper=y_hi * rho,
        )

    if m == 0:
        try:
            z = np.linalg.solve(P, -q)
        except np.linalg.LinAlgError:
            raise NumericalError("unconstrained QP has a singular Hessian") from None
        return finish(z, np.zeros(0), np.zeros(0), "solved", 0)

    # row scaling to unit infinity norm
    row_norm = np.maximum(np.abs(C).max(axis=1), 1e-12)
    Cs = C / row_norm[:, None]
    lbs = lb / row_norm
    ubs = ub / row_norm

    has_lo = np.isfinite(lbs)
    has_hi = np.isfinite(ubs)
    n_sides = int(has_lo.sum() + has_hi.sum())
    if n_sides == 0:
        try:
            z = np.linalg.solve(P, -q)
        except np.linalg.LinAlgError:
            raise NumericalError("unconstrained QP has a singular Hessian") from None
        return finish(z, np.zeros(m), np.zeros(m), "solved", 0)

    z = z0.copy()
    cz = Cs @ z
    s_lo = np.where(has_lo, np.maximum(cz - lbs, 1.0), 1.0)
    s_hi = np.where(has_hi, np.maximum(ubs - cz, 1.0), 1.0)
    y_lo = np.where(has_lo, 1.0, 0.0)
    y_hi = np.where(has_hi, 1.0, 0.0)

    q_scale = 1.0 + float(np.abs(q).max(initial=0.0))
    status = "max-iterations"
    iters = 0

    for it in range(1, max_iter + 1):
        iters = it
        cz = Cs @ z
        r_dual = P @ z + q - Cs.T @ (y_lo - y_hi)
        r_lo = np.where(has_lo, cz - lbs - s_lo, 0.0)
        r_hi = np.where(has_hi, ubs - cz - s_hi, 0.0)
        mu = (
            float(np.sum(s_lo[has_lo] * y_lo[has_lo]) + np.sum(s_hi[has_hi] * y_hi[has_hi]))
            / n_sides
        )
        pri_inf = max(
            float(np.abs(r_lo).max(initial=0.0)), float(np.abs(r_hi).max(initial=0.0))
        )
        if mu <= tol and float(np.abs(r_dual).max()) <= tol * q_scale and pri_inf <= tol:
            status = "solved"
            break
        if not np.isfinite(mu) or mu > 1e16 or max(y_lo.max(), y_hi.max()) > 1e14:
            status = "infeasible"
            break

        w_lo = np.where(has_lo, y_lo / s_lo, 0.0)
        w_hi = np.where(has_hi, y_hi / s_hi, 0.0)
        KKT = P + (Cs.T * (w_lo + w_hi)) @ Cs
        ridge = 1e-12 * max(1.0, float(np.trace(KKT)) / n)
        for attempt in range(6):
            try:
                L = np.linalg.cholesky(KKT + ridge * np.eye(n) * (0.0 if attempt == 0 else 10.0**attempt))
                break
            except np.linalg.LinAlgError:
                if attempt == 5:
                    raise NumericalError("interior-point Newton matrix is not positive definite")

        def newton(sigma_mu, corr_lo, corr_hi):
            g_lo = np.where(has_lo, (s_lo * y_lo - sigma_mu + corr_lo) / s_lo, 0.0)
            g_hi = np.where(has_hi, (s_hi * y_hi - sigma_mu + corr_hi) / s_hi, 0.0)
            rhs = -r_dual - Cs.T @ (w_lo * r_lo + g_lo) + Cs.T @ (w_hi * r_hi + g_hi)
            u = np.linalg.solve(L, rhs)
            dz = np.linalg.solve(L.T, u)
            cdz = Cs @ dz
            ds_lo = np.where(has_lo, cdz + r_lo, 0.0)
            ds_hi = np.where(has_hi, -cdz + r_hi, 0.0)
            dy_lo = np.where(has_lo, -w_lo * ds_lo - g_lo, 0.0)
            dy_hi = np.where(has_hi, -w_hi * ds_hi - g_hi, 0.0)
            return dz, ds_lo, ds_hi, dy_lo, dy_hi

        def step_len(v, dv, mask):
            neg = mask & (dv < 0)
            if not np.any(neg):
                return 1.0
            return min(1.0, float(np.min(-v[neg] / dv[neg])))

        # affine predictor
        dz, ds_lo, ds_hi, dy_lo, dy_hi = newton(0.0, 0.0, 0.0)
        a_pri = min(step_len(s_lo, ds_lo, has_lo), step_len(s_hi, ds_hi, has_hi))
        a_dual = min(step_len(y_lo, dy_lo, has_lo), step_len(y_hi, dy_hi, has_hi))
        mu_aff = (
            float(
                np.sum((s_lo + a_pri * ds_lo)[has_lo] * (y_lo + a_dual * dy_lo)[has_lo])
                + np.sum((s_hi + a_pri * ds_hi)[has_hi] * (y_hi + a_dual * dy_hi)[has_hi])
            )
            / n_sides
        )
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

        # corrector
        dz, ds_lo, ds_hi, dy_lo, dy_hi = newton(sigma * mu, ds_lo * dy_lo, ds_hi * dy_hi)
        a_pri = 0.995 * min(step_len(s_lo, ds_lo, has_lo), step_len(s_hi, ds_hi, has_hi))
        a_dual = 0.995 * min(step_len(y_lo, dy_lo, has_lo), step_len(y_hi, dy_hi, has_hi))

        z = z + a_pri * dz
        s_lo = np.where(has_lo, s_lo + a_pri * ds_lo, 1.0)
        s_hi = np.where(has_hi, s_hi + a_pri * ds_hi, 1.0)
        y_lo = np.where(has_lo, y_lo + a_dual * dy_lo, 0.0)
        y_hi = np.where(has_hi, y_hi + a_dual * dy_hi, 0.0)

    if status == "max-iterations":
        cz = Cs @ z
        violation = max(
            float(np.max(np.maximum(lbs - cz, 0.0), initial=0.0)),
            float(np.max(np.maximum(cz - ubs, 0.0), initial=0.0)),
        )
        if violation > 1e-6:
            status = "infeasible"

    if status == "solved":
        z, y_lo, y_hi = _polish(P, q, Cs, lbs, ubs, has_lo, has_hi, z, y_lo, y_hi)

    y_lo_full = y_lo / row_norm
    y_hi_full = y_hi / row_norm
    return finish(z, y_lo_full, y_hi_full, status, iters)


def _polish(P, q, Cs, lbs, ubs, has_lo, has_hi, z, y_lo, y_hi):
    """Re-solve on the identified active set for machine-precision accuracy.

    The interior-point iterate leaves weakly active constraints at
    sqrt(mu)-sized slacks. An exact equality-constrained solve on the rows
    the iterate marks active removes that blur; the result is adopted only
    if it is feasible and its multiplier signs are consistent.
    """
    cz = Cs @ z
    act_lo = has_lo & (y_lo > np.where(has_lo, cz - lbs, np.inf))
    act_hi = has_hi & (y_hi > np.where(has_hi, ubs - cz, np.inf))
    act_lo &= ~act_hi  # a row cannot bind on both sides (lb < ub)

    rows = np.flatnonzero(act_lo | act_hi)
    n = q.size
    E = Cs[rows]
    b = np.where(act_lo[rows], lbs[rows], ubs[rows])
    k = rows.size
    kkt = np.zeros((n + k, n + k))
    kkt[:n, :n] = P
    kkt[:n, n:] = -E.T
    kkt[n:, :n] = E
    rhs = np.concatenate([-q, b])
    sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
    z_new, w = sol[:n], sol[n:]

    cz_new = Cs @ z_new
    feas = max(
        float(np.max(np.maximum(np.where(has_lo, lbs - cz_new, -np.inf), 0.0), initial=0.0)),
        float(np.max(np.maximum(np.where(has_hi, cz_new - ubs, -np.inf), 0.0), initial=0.0)),
    )
    sign_ok = np.all(np.where(act_lo[rows], w, -w) >= -1e-9 * (1.0 + np.abs(w)))
    stat_new = float(np.abs(P @ z_new + q - E.T @ w if k else P @ z_new + q).max())
    stat_old = float(np.abs(P @ z + q - Cs.T @ (y_lo - y_hi)).max())
    if feas <= 1e-9 * (1.0 + float(np.abs(b).max(initial=0.0))) and sign_ok and stat_new <= stat_old:
        y_lo_new = np.zeros_like(y_lo)
        y_hi_new = np.zeros_like(y_hi)
        y_lo_new[rows[act_lo[rows]]] = np.maximum(w[act_lo[rows]], 0.0)
        y_hi_new[rows[act_hi[rows]]] = np.maximum(-w[act_hi[rows]], 0.0)
        return z_new, y_lo_new, y_hi_new
    return z, y_lo, y_hi
