"""Planar B-spline trajectories.

Provides Cox-de Boor basis evaluation, periodic least-squares fitting,
curvature and heading evaluation, adaptive arc-length integration, and
equal-arc-length discretization. Closed curves use coefficient
identification: the last ``degree`` coefficients repeat the first
``degree`` ones, which makes the curve C^(degree-1) across the seam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DegenerateParameterizationError,
    FitError,
    NumericalError,
    ParameterRangeError,
    UnsupportedOrderError,
)

__all__ = [
    "KnotVector",
    "SplineTrajectory",
    "DiscretizationSet",
    "basis_value",
    "basis_derivative",
    "uniform_periodic_knots",
    "clamped_uniform_knots",
    "chord_parameters",
    "fit_periodic",
]

# Nodes/weights for one Gauss-Legendre panel; 16 points integrate the
# smooth per-span speed integrand far below the arc-length tolerance.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)

_SPEED_FLOOR = 1e-9  # below this first-derivative norm the frame is degenerate


def uniform_periodic_knots(n_ctrl: int, degree: int) -> np.ndarray:
    """Uniform knots for a closed spline with ``n_ctrl`` unique coefficients.

    The domain is [0, 1]; ``degree`` extra spans hang off each side so the
    wrapped coefficients see the same spacing as the interior.
    """
    if n_ctrl < degree + 2:
        raise ValueError(f"need at least degree+2={degree + 2} control points, got {n_ctrl}")
    j = np.arange(n_ctrl + 2 * degree + 1)
    return (j - degree) / float(n_ctrl)


def clamped_uniform_knots(n_basis: int, degree: int) -> np.ndarray:
    """Clamped uniform knots on [0, 1] for an open spline."""
    if n_basis < degree + 1:
        raise ValueError(f"need at least degree+1={degree + 1} basis functions, got {n_basis}")
    interior = np.linspace(0.0, 1.0, n_basis - degree + 1)
    return np.concatenate([np.zeros(degree), interior, np.ones(degree)])


@dataclass(frozen=True)
class KnotVector:
    """A validated non-decreasing knot sequence with its spline degree."""

    knots: np.ndarray
    degree: int

    def __post_init__(self) -> None:
        knots = np.asarray(self.knots, dtype=float)
        object.__setattr__(self, "knots", knots)
        if self.degree < 1:
            raise ValueError(f"degree must be >= 1, got {self.degree}")
        if knots.ndim != 1 or knots.size < 2 * (self.degree + 1):
            raise ValueError(
                f"need at least {2 * (self.degree + 1)} knots for degree {self.degree}, "
                f"got {knots.size}"
            )
        if np.any(np.diff(knots) < 0):
            raise ValueError("knots must be non-decreasing")

    @property
    def n_basis(self) -> int:
        return self.knots.size - self.degree - 1

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[self.degree]), float(self.knots[self.n_basis])


def basis_value(knots: np.ndarray, i: int, degree: int, t: float) -> float:
    """B-spline basis B_{i,degree}(t) by the Cox-de Boor recursion.

    Zero-width intervals contribute zero (the 0/0 convention). Degree-0
    bases are right-continuous indicators on [knots[i], knots[i+1]).
    """
    knots = np.asarray(knots, dtype=float)
    if degree == 0:
        return 1.0 if knots[i] <= t < knots[i + 1] else 0.0
    total = 0.0
    den = knots[i + degree] - knots[i]
    if den > 0.0:
        total += (t - knots[i]) / den * basis_value(knots, i, degree - 1, t)
    den = knots[i + degree + 1] - knots[i + 1]
    if den > 0.0:
        total += (knots[i + degree + 1] - t) / den * basis_value(knots, i + 1, degree - 1, t)
    return total


def basis_derivative(knots: np.ndarray, i: int, degree: int, t: float, order: int = 1) -> float:
    """Order-``order`` derivative of B_{i,degree}(t); zero denominators drop out."""
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    if order > degree:
        raise UnsupportedOrderError(f"order {order} exceeds degree {degree}")
    if order == 0:
        return basis_value(knots, i, degree, t)
    knots = np.asarray(knots, dtype=float)
    total = 0.0
    den = knots[i + degree] - knots[i]
    if den > 0.0:
        total += degree / den * basis_derivative(knots, i, degree - 1, t, order - 1)
    den = knots[i + degree + 1] - knots[i + 1]
    if den > 0.0:
        total -= degree / den * basis_derivative(knots, i + 1, degree - 1, t, order - 1)
    return total


def _find_spans(knots: np.ndarray, degree: int, ts: np.ndarray) -> np.ndarray:
    """Span index s with knots[s] <= t < knots[s+1], clamped to valid spans."""
    n_basis = knots.size - degree - 1
    spans = np.searchsorted(knots, ts, side="right") - 1
    return np.clip(spans, degree, n_basis - 1)


def _basis_rows(
    knots: np.ndarray, degree: int, ts: np.ndarray, order: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero basis (or derivative) values at each parameter.

    Returns (spans, rows) where rows[j, r] holds the order-``order``
    derivative of basis ``spans[j] - degree + r`` at ts[j]. Evaluation is
    the triangular Cox-de Boor scheme at the reduced degree followed by
    ``order`` knot-difference lifting steps, vectorized over ts.
    """
    ts = np.asarray(ts, dtype=float)
    spans = _find_spans(knots, degree, ts)
    n = ts.size
    if order > degree:
        return spans, np.zeros((n, degree + 1))

    base_degree = degree - order
    values = np.ones((n, 1))
    if base_degree > 0:
        left = np.empty((n, base_degree + 1))
        right = np.empty((n, base_degree + 1))
        for j in range(1, base_degree + 1):
            left[:, j] = ts - knots[spans + 1 - j]
            right[:, j] = knots[spans + j] - ts
        table = np.zeros((n, base_degree + 1))
        table[:, 0] = 1.0
        for j in range(1, base_degree + 1):
            saved = np.zeros(n)
            for r in range(j):
                temp = table[:, r] / (right[:, r + 1] + left[:, j - r])
                table[:, r] = saved + right[:, r + 1] * temp
                saved = left[:, j - r] * temp
            table[:, j] = saved
        values = table

    # Each lifting step raises the degree by one and the derivative order
    # by one: B'_{i,q} = q * (B_{i,q-1}/(k[i+q]-k[i]) - B_{i+1,q-1}/(k[i+q+1]-k[i+1])).
    for q in range(base_degree + 1, degree + 1):
        offsets = np.arange(q + 2)
        hi = knots[spans[:, None] + offsets[None, :]]
        lo = knots[spans[:, None] + offsets[None, :] - q]
        den = hi - lo
        inv = np.where(den > 0.0, 1.0 / np.where(den > 0.0, den, 1.0), 0.0)
        padded = np.zeros((n, q + 2))
        padded[:, 1 : values.shape[1] + 1] = values
        values = q * (padded[:, : q + 1] * inv[:, : q + 1] - padded[:, 1:] * inv[:, 1:])

    return spans, values


def _design_matrix(knots: np.ndarray, degree: int, ts: np.ndarray, order: int = 0) -> np.ndarray:
    """Dense (len(ts), n_basis) matrix of basis derivative values."""
    ts = np.asarray(ts, dtype=float)
    n_basis = knots.size - degree - 1
    spans, rows = _basis_rows(knots, degree, ts, order)
    dense = np.zeros((ts.size, n_basis))
    cols = spans[:, None] - degree + np.arange(degree + 1)[None, :]
    dense[np.arange(ts.size)[:, None], cols] = rows
    return dense


def chord_parameters(points: np.ndarray) -> np.ndarray:
    """Chord-length parameters in [0, 1) for a closed waypoint sequence.

    The normalizer includes the wrap chord from the last point back to the
    first, so parameter 1.0 identifies with parameter 0.0.
    """
    points = np.asarray(points, dtype=float)
    chords = np.linalg.norm(np.diff(points, axis=0), axis=1)
    wrap = np.linalg.norm(points[0] - points[-1])
    total = chords.sum() + wrap
    if total <= 0.0:
        raise FitError("waypoints are coincident; chord parameterization is degenerate")
    return np.concatenate([[0.0], np.cumsum(chords)]) / total


@dataclass(frozen=True)
class DiscretizationSet:
    """Equal-arc-length samples of a closed trajectory.

    Consecutive samples are ``spacing`` apart along the curve; the closing
    segment from the last sample back to the first absorbs the remainder
    of the lap length.
    """

    params: np.ndarray
    positions: np.ndarray
    headings: np.ndarray
    curvatures: np.ndarray
    spacing: float
    total_length: float

    def __post_init__(self) -> None:
        for name in ("params", "positions", "headings", "curvatures"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        m = self.params.size
        if self.positions.shape != (m, 2) or self.headings.size != m or self.curvatures.size != m:
            raise ValueError("discretization arrays have inconsistent lengths")
        if not np.all(np.isfinite(self.curvatures)):
            raise ValueError("curvatures must be finite")
        if m > 1 and np.any(np.diff(self.params) <= 0):
            raise ValueError("params must be strictly increasing")

    @property
    def n_samples(self) -> int:
        return self.params.size

    @cached_property
    def segment_lengths(self) -> np.ndarray:
        """Arc length of each sample-to-next segment, including the wrap."""
        seg = np.full(self.n_samples, self.spacing)
        seg[-1] = self.total_length - (self.n_samples - 1) * self.spacing
        return seg

    @cached_property
    def normals(self) -> np.ndarray:
        """Unit left normals, heading rotated +90 degrees."""
        return np.column_stack([-np.sin(self.headings), np.cos(self.headings)])


@dataclass(frozen=True)
class SplineTrajectory:
    """A planar B-spline curve with one coefficient array per axis."""

    knots: np.ndarray
    degree: int
    cx: np.ndarray
    cy: np.ndarray
    periodic: bool = True

    def __post_init__(self) -> None:
        kv = KnotVector(self.knots, self.degree)
        object.__setattr__(self, "knots", kv.knots)
        cx = np.asarray(self.cx, dtype=float)
        cy = np.asarray(self.cy, dtype=float)
        object.__setattr__(self, "cx", cx)
        object.__setattr__(self, "cy", cy)
        if cx.shape != (kv.n_basis,) or cy.shape != (kv.n_basis,):
            raise ValueError(
                f"expected {kv.n_basis} coefficients per axis, got {cx.shape} and {cy.shape}"
            )
        if self.periodic:
            p = self.degree
            if not (np.array_equal(cx[-p:], cx[:p]) and np.array_equal(cy[-p:], cy[:p])):
                raise ValueError("periodic spline requires the last degree coefficients "
                                 "to repeat the first degree coefficients")

    # ------------------------------------------------------------------
    # structure
    # ------------------------------------------------------------------

    @property
    def n_basis(self) -> int:
        return self.knots.size - self.degree - 1

    @property
    def n_ctrl(self) -> int:
        """Number of independent control points (wrapped copies excluded)."""
        return self.n_basis - self.degree if self.periodic else self.n_basis

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[self.degree]), float(self.knots[self.n_basis])

    @property
    def control_points(self) -> np.ndarray:
        """Independent control points as an (n_ctrl, 2) array."""
        return np.column_stack([self.cx[: self.n_ctrl], self.cy[: self.n_ctrl]])

    def with_control_points(self, cx: np.ndarray, cy: np.ndarray) -> "SplineTrajectory":
        """Same knots and degree with replaced independent coefficients."""
        cx = np.asarray(cx, dtype=float)
        cy = np.asarray(cy, dtype=float)
        if cx.shape != (self.n_ctrl,) or cy.shape != (self.n_ctrl,):
            raise ValueError(f"expected {self.n_ctrl} coefficients per axis")
        if self.periodic:
            cx = np.concatenate([cx, cx[: self.degree]])
            cy = np.concatenate([cy, cy[: self.degree]])
        return SplineTrajectory(self.knots, self.degree, cx, cy, self.periodic)

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "periodic": self.periodic,
            "knots": self.knots.tolist(),
            "cx": self.cx.tolist(),
            "cy": self.cy.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SplineTrajectory":
        return cls(
            knots=np.asarray(data["knots"], dtype=float),
            degree=int(data["degree"]),
            cx=np.asarray(data["cx"], dtype=float),
            cy=np.asarray(data["cy"], dtype=float),
            periodic=bool(data["periodic"]),
        )

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------

    def _check_params(self, t) -> tuple[np.ndarray, bool]:
        ts = np.asarray(t, dtype=float)
        scalar = ts.ndim == 0
        ts = np.atleast_1d(ts)
        lo, hi = self.domain
        pad = 1e-12 * max(1.0, abs(hi))
        if np.any(ts < lo - pad) or np.any(ts > hi + pad):
            bad = ts[(ts < lo - pad) | (ts > hi + pad)][0]
            raise ParameterRangeError(f"parameter {bad} outside domain [{lo}, {hi}]")
        return np.clip(ts, lo, hi), scalar

    def evaluate(self, t) -> np.ndarray:
        """Curve position at parameter(s) t; shape (2,) or (n, 2)."""
        ts, scalar = self._check_params(t)
        spans, rows = _basis_rows(self.knots, self.degree, ts, 0)
        cols = spans[:, None] - self.degree + np.arange(self.degree + 1)[None, :]
        out = np.column_stack([
            np.einsum("ij,ij->i", rows, self.cx[cols]),
            np.einsum("ij,ij->i", rows, self.cy[cols]),
        ])
        return out[0] if scalar else out

    def derivatives(self, t, order: int = 1) -> np.ndarray:
        """Order-``order`` parametric derivative at t; shape (2,) or (n, 2)."""
        if order < 0:
            raise ValueError(f"order must be >= 0, got {order}")
        if order > self.degree:
            raise UnsupportedOrderError(f"order {order} exceeds degree {self.degree}")
        ts, scalar = self._check_params(t)
        spans, rows = _basis_rows(self.knots, self.degree, ts, order)
        cols = spans[:, None] - self.degree + np.arange(self.degree + 1)[None, :]
        out = np.column_stack([
            np.einsum("ij,ij->i", rows, self.cx[cols]),
            np.einsum("ij,ij->i", rows, self.cy[cols]),
        ])
        return out[0] if scalar else out

    def _d1_d2(self, t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        d1 = np.atleast_2d(self.derivatives(t, 1))
        d2 = np.atleast_2d(self.derivatives(t, 2))
        speed = np.hypot(d1[:, 0], d1[:, 1])
        if np.any(speed < _SPEED_FLOOR):
            raise DegenerateParameterizationError(
                "first-derivative norm below 1e-9; curvature and heading are undefined"
            )
        return d1, d2, speed

    def curvature(self, t) -> np.ndarray:
        """Signed curvature, positive when turning counter-clockwise."""
        d1, d2, speed = self._d1_d2(t)
        k = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed**3
        return float(k[0]) if np.asarray(t).ndim == 0 else k

    def heading(self, t) -> np.ndarray:
        """Tangent direction in radians."""
        d1, _, _ = self._d1_d2(t)
        h = np.arctan2(d1[:, 1], d1[:, 0])
        return float(h[0]) if np.asarray(t).ndim == 0 else h

    def speed(self, t) -> np.ndarray:
        """First-derivative norm (parametric speed)."""
        d1 = np.atleast_2d(self.derivatives(t, 1))
        s = np.hypot(d1[:, 0], d1[:, 1])
        return float(s[0]) if np.asarray(t).ndim == 0 else s

    # ------------------------------------------------------------------
    # arc length
    # ------------------------------------------------------------------

    def _panel(self, a: float, b: float) -> float:
        ts = 0.5 * (a + b) + 0.5 * (b - a) * _GL_NODES
        return 0.5 * (b - a) * float(np.dot(_GL_WEIGHTS, self.speed(ts)))

    def _adaptive(self, a: float, b: float, whole: float, tol: float, depth: int) -> float:
        mid = 0.5 * (a + b)
        left = self._panel(a, mid)
        right = self._panel(mid, b)
        if abs(left + right - whole) <= tol or depth >= 24:
            return left + right
        return self._adaptive(a, mid, left, 0.5 * tol, depth + 1) + self._adaptive(
            mid, b, right, 0.5 * tol, depth + 1
        )

    def arc_length(self, ta: float, tb: float, tol: float = 1e-6) -> float:
        """Arc length between parameters, adaptive Gauss-Legendre per knot span."""
        lo, hi = self.domain
        pad = 1e-12 * max(1.0, abs(hi))
        if ta > tb:
            raise ParameterRangeError(f"need ta <= tb, got {ta} > {tb}")
        if ta < lo - pad or tb > hi + pad:
            raise ParameterRangeError(f"[{ta}, {tb}] outside domain [{lo}, {hi}]")
        ta, tb = max(ta, lo), min(tb, hi)
        if ta == tb:
            return 0.0
        cuts = self.knots[(self.knots > ta) & (self.knots < tb)]
        edges = np.concatenate([[ta], np.unique(cuts), [tb]])
        per_piece = tol / max(1, edges.size - 1)
        return sum(
            self._adaptive(a, b, self._panel(a, b), per_piece, 0)
            for a, b in zip(edges[:-1], edges[1:])
        )

    @cached_property
    def _span_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Breakpoints within the domain and cumulative lengths up to each."""
        lo, hi = self.domain
        inside = self.knots[(self.knots > lo) & (self.knots < hi)]
        edges = np.concatenate([[lo], np.unique(inside), [hi]])
        pieces = [
            self._adaptive(a, b, self._panel(a, b), 1e-10, 0)
            for a, b in zip(edges[:-1], edges[1:])
        ]
        return edges, np.concatenate([[0.0], np.cumsum(pieces)])

    @property
    def total_length(self) -> float:
        """Full-domain arc length."""
        return float(self._span_table[1][-1])

    def param_at_arclength(self, s: float) -> float:
        """Parameter t with arc_length(domain start, t) == s, to 1e-9 in t.

        Safeguarded Newton: the iterate stays inside the bracketing knot
        span and falls back to bisection whenever Newton steps outside.
        """
        edges, cum = self._span_table
        total = cum[-1]
        if s < -1e-9 or s > total * (1 + 1e-12) + 1e-9:
            raise ParameterRangeError(f"arc length {s} outside [0, {total}]")
        s = min(max(s, 0.0), total)
        j = int(np.searchsorted(cum, s, side="right") - 1)
        j = min(j, edges.size - 2)
        a, b = float(edges[j]), float(edges[j + 1])
        target = s - float(cum[j])
        span_len = float(cum[j + 1] - cum[j])
        if target <= 0.0:
            return a
        if target >= span_len:
            return b
        t = a + (b - a) * target / span_len
        bracket_lo, bracket_hi = a, b
        for _ in range(100):
            f = self._panel(a, t) - target
            if f > 0.0:
                bracket_hi = t
            else:
                bracket_lo = t
            df = self.speed(t)
            step = f / df if df > _SPEED_FLOOR else None
            if step is not None and bracket_lo <= t - step <= bracket_hi:
                t_new = t - step
            else:
                t_new = 0.5 * (bracket_lo + bracket_hi)
            if abs(t_new - t) < 1e-9 * max(1.0, abs(b)):
                return t_new
            t = t_new
        raise NumericalError(f"arc-length inversion did not converge at s={s}")

    # ------------------------------------------------------------------
    # discretization
    # ------------------------------------------------------------------

    def discretize(self, ds: float) -> DiscretizationSet:
        """Samples every ``ds`` meters of arc length from the domain start.

        Produces M = floor(total / ds) samples; the closing segment back to
        the start absorbs the remainder.
        """
        if ds <= 0.0:
            raise ValueError(f"ds must be positive, got {ds}")
        total = self.total_length
        m = int(math.floor(total / ds + 1e-9))
        if m < 8:
            raise ValueError(
                f"ds={ds} yields only {m} samples over length {total:.3f}; need at least 8"
            )
        params = np.array([self.param_at_arclength(i * ds) for i in range(m)])
        positions = self.evaluate(params)
        d1, d2, speed = self._d1_d2(params)
        headings = np.arctan2(d1[:, 1], d1[:, 0])
        curvatures = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed**3
        return DiscretizationSet(
            params=params,
            positions=positions,
            headings=headings,
            curvatures=curvatures,
            spacing=ds,
            total_length=total,
        )

    # ------------------------------------------------------------------
    # diagnostics
    # ------------------------------------------------------------------

    def periodic_closure_error(self) -> float:
        """Largest mismatch of position and first two derivatives at the seam."""
        lo, hi = self.domain
        worst = 0.0
        for order in range(3):
            at_lo = self.derivatives(lo, order) if order else self.evaluate(lo)
            at_hi = self.derivatives(hi, order) if order else self.evaluate(hi)
            worst = max(worst, float(np.max(np.abs(at_lo - at_hi))))
        return worst


def fit_periodic(
    points: np.ndarray,
    num_ctrl: int,
    degree: int = 3,
    params: np.ndarray | None = None,
) -> SplineTrajectory:
    """Least-squares closed spline through waypoints.

    Parameters default to normalized chord length; pass ``params`` to pin
    them (e.g. to reproduce a known spline exactly). A trailing waypoint
    that duplicates the first is dropped before fitting.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise FitError(f"expected an (n, 2) waypoint array, got shape {points.shape}")
    if not np.all(np.isfinite(points)):
        raise FitError("waypoints contain non-finite values")
    if points.shape[0] >= 2:
        chords = np.linalg.norm(np.diff(points, axis=0), axis=1)
        scale = max(np.median(chords), 1e-12)
        if np.linalg.norm(points[0] - points[-1]) < 1e-6 * scale:
            points = points[:-1]
            if params is not None:
                params = np.asarray(params, dtype=float)[: points.shape[0]]
    n_pts = points.shape[0]
    if num_ctrl < degree + 2:
        raise FitError(f"num_ctrl must be at least degree+2={degree + 2}, got {num_ctrl}")
    if n_pts < num_ctrl:
        raise FitError(f"{n_pts} waypoints cannot determine {num_ctrl} control points")

    if params is None:
        params = chord_parameters(points)
    else:
        params = np.asarray(params, dtype=float)
        if params.shape != (n_pts,):
            raise FitError(f"expected {n_pts} parameters, got shape {params.shape}")
        if np.any(params < 0.0) or np.any(params >= 1.0):
            raise FitError("fit parameters must lie in [0, 1)")

    knots = uniform_periodic_knots(num_ctrl, degree)
    dense = _design_matrix(knots, degree, params)
    folded = dense[:, :num_ctrl].copy()
    folded[:, :degree] += dense[:, num_ctrl:]

    coeffs, _, rank, singular = np.linalg.lstsq(folded, points, rcond=None)
    if rank < num_ctrl:
        cond = float(singular[0] / singular[-1]) if singular[-1] > 0 else math.inf
        raise FitError(
            f"rank-deficient fit: rank {rank} < {num_ctrl} unknowns "
            f"(condition estimate {cond:.3e}); reduce num_ctrl or add waypoints"
        )

    cx = np.concatenate([coeffs[:, 0], coeffs[:degree, 0]])
    cy = np.concatenate([coeffs[:, 1], coeffs[:degree, 1]])
    return SplineTrajectory(knots=knots, degree=degree, cx=cx, cy=cy, periodic=True)
