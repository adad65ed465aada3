"""Track ingestion and centerline geometry.

A track is a closed loop of waypoints with per-side corridor widths. The
centerline model fits a periodic spline to the waypoints, samples it at
fixed arc-length steps, and carries interpolated widths for the corridor
constraints downstream.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import FitToleranceWarning, InfeasibleTrackError, TrackValidationError
from .splines import DiscretizationSet, SplineTrajectory, chord_parameters, fit_periodic

__all__ = [
    "TRACK_HEADER",
    "TrackDefinition",
    "CenterlineModel",
    "parse_track_text",
    "load_track",
    "track_from_arrays",
    "build_centerline",
    "boundary_polylines",
]

TRACK_HEADER = "x_m,y_m,w_left_m,w_right_m"

MIN_WAYPOINTS = 20


@dataclass(frozen=True)
class TrackDefinition:
    """Closed-loop waypoints with positive corridor widths on each side."""

    waypoints: np.ndarray
    w_left: np.ndarray
    w_right: np.ndarray
    name: str = "track"

    def __post_init__(self) -> None:
        object.__setattr__(self, "waypoints", np.asarray(self.waypoints, dtype=float))
        object.__setattr__(self, "w_left", np.asarray(self.w_left, dtype=float))
        object.__setattr__(self, "w_right", np.asarray(self.w_right, dtype=float))

    @property
    def n_waypoints(self) -> int:
        return self.waypoints.shape[0]


def _segments_cross(a0, a1, b0, b1) -> np.ndarray:
    """Proper-crossing test for segment batches (broadcastable endpoints)."""

    def cross(o, p, q):
        return (p[..., 0] - o[..., 0]) * (q[..., 1] - o[..., 1]) - (
            p[..., 1] - o[..., 1]
        ) * (q[..., 0] - o[..., 0])

    d1 = cross(b0, b1, a0)
    d2 = cross(b0, b1, a1)
    d3 = cross(a0, a1, b0)
    d4 = cross(a0, a1, b1)
    return (d1 * d2 < 0) & (d3 * d4 < 0)


def _check_self_intersection(points: np.ndarray, labels: list[str]) -> None:
    """Reject closed polylines whose non-adjacent segments cross."""
    n = points.shape[0]
    starts = points
    ends = np.roll(points, -1, axis=0)
    idx = np.arange(n)
    for i in range(n - 2):
        j = idx[i + 2 :]
        # the wrap segment (n-1, 0) is adjacent to segment 0
        j = j[~((i == 0) & (j == n - 1))]
        if j.size == 0:
            continue
        hits = _segments_cross(starts[i], ends[i], starts[j], ends[j])
        if np.any(hits):
            other = int(j[np.argmax(hits)])
            raise TrackValidationError(
                f"centerline self-intersects: segment from {labels[i]} crosses "
                f"segment from {labels[other]}"
            )


def _validate_track(
    waypoints: np.ndarray,
    w_left: np.ndarray,
    w_right: np.ndarray,
    labels: list[str],
    name: str,
) -> TrackDefinition:
    for i in range(waypoints.shape[0]):
        if not (np.all(np.isfinite(waypoints[i])) and np.isfinite(w_left[i]) and np.isfinite(w_right[i])):
            raise TrackValidationError(f"non-finite value on {labels[i]}")
    for i in range(waypoints.shape[0]):
        if w_left[i] <= 0 or w_right[i] <= 0:
            raise TrackValidationError(
                f"widths must be positive; got w_left={w_left[i]}, "
                f"w_right={w_right[i]} on {labels[i]}"
            )

    # drop a trailing duplicate of the first waypoint
    if waypoints.shape[0] >= 2:
        spacing = np.linalg.norm(np.diff(waypoints, axis=0), axis=1)
        scale = max(float(np.median(spacing)), 1e-12)
        if np.linalg.norm(waypoints[0] - waypoints[-1]) < 1e-6 * scale:
            waypoints = waypoints[:-1]
            w_left = w_left[:-1]
            w_right = w_right[:-1]
            labels = labels[:-1]

    n = waypoints.shape[0]
    if n < MIN_WAYPOINTS:
        raise TrackValidationError(f"need at least {MIN_WAYPOINTS} waypoints, got {n}")

    spacing = np.linalg.norm(np.diff(waypoints, axis=0), axis=1)
    if np.any(spacing == 0.0):
        where = int(np.argmax(spacing == 0.0))
        raise TrackValidationError(f"repeated waypoint at {labels[where + 1]}")
    median_spacing = float(np.median(spacing))
    wrap_gap = float(np.linalg.norm(waypoints[0] - waypoints[-1]))
    if wrap_gap >= 10.0 * median_spacing:
        raise TrackValidationError(
            f"waypoints do not close: gap {wrap_gap:.3f} m from last to first "
            f"exceeds 10x median spacing {median_spacing:.3f} m"
        )

    _check_self_intersection(waypoints, labels)
    return TrackDefinition(waypoints=waypoints, w_left=w_left, w_right=w_right, name=name)


def track_from_arrays(
    waypoints: np.ndarray,
    w_left: np.ndarray,
    w_right: np.ndarray,
    name: str = "track",
) -> TrackDefinition:
    """Validated track from in-memory arrays; errors cite 0-based row indices."""
    waypoints = np.asarray(waypoints, dtype=float)
    w_left = np.asarray(w_left, dtype=float)
    w_right = np.asarray(w_right, dtype=float)
    if waypoints.ndim != 2 or waypoints.shape[1] != 2:
        raise TrackValidationError(f"expected (n, 2) waypoints, got shape {waypoints.shape}")
    if w_left.shape != (waypoints.shape[0],) or w_right.shape != (waypoints.shape[0],):
        raise TrackValidationError("width arrays must match the number of waypoints")
    labels = [f"row {i}" for i in range(waypoints.shape[0])]
    return _validate_track(waypoints, w_left, w_right, labels, name)


def parse_track_text(text: str, name: str = "track") -> TrackDefinition:
    """Parse track CSV text: header x_m,y_m,w_left_m,w_right_m, '#' comments.

    Validation errors cite 1-based physical line numbers of the text.
    """
    rows: list[list[float]] = []
    labels: list[str] = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if [c.strip() for c in line.split(",")] != TRACK_HEADER.split(","):
                raise TrackValidationError(
                    f"{name} line {lineno}: expected header '{TRACK_HEADER}', got '{line}'"
                )
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise TrackValidationError(
                f"{name} row {lineno}: expected 4 comma-separated values, got {len(parts)}"
            )
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise TrackValidationError(f"{name} row {lineno}: {exc}") from None
        labels.append(f"row {lineno}")
    if not header_seen:
        raise TrackValidationError(f"{name}: missing header '{TRACK_HEADER}'")
    if not rows:
        raise TrackValidationError(f"{name}: no data rows")
    data = np.asarray(rows, dtype=float)
    return _validate_track(data[:, :2], data[:, 2], data[:, 3], labels, name)


def load_track(path: str | Path) -> TrackDefinition:
    """Parse a track CSV file; errors cite the file name and line number."""
    path = Path(path)
    track = parse_track_text(path.read_text(encoding="utf-8"), name=path.name)
    return TrackDefinition(
        waypoints=track.waypoints,
        w_left=track.w_left,
        w_right=track.w_right,
        name=path.stem,
    )


@dataclass(frozen=True)
class CenterlineModel:
    """Fitted centerline with sampled corridor widths.

    ``w_left``/``w_right`` are the interpolated physical widths at each
    sample; ``l``/``r`` have the safety margin already removed and bound
    the lateral displacement used by the optimizer.
    """

    spline: SplineTrajectory
    disc: DiscretizationSet
    w_left: np.ndarray
    w_right: np.ndarray
    margin: float
    name: str = "track"

    def __post_init__(self) -> None:
        object.__setattr__(self, "w_left", np.asarray(self.w_left, dtype=float))
        object.__setattr__(self, "w_right", np.asarray(self.w_right, dtype=float))
        m = self.disc.n_samples
        if self.w_left.shape != (m,) or self.w_right.shape != (m,):
            raise ValueError("width arrays must match the sample count")

    @cached_property
    def l(self) -> np.ndarray:
        return self.w_left - self.margin

    @cached_property
    def r(self) -> np.ndarray:
        return self.w_right - self.margin


def build_centerline(
    track: TrackDefinition,
    ds: float = 3.0,
    n_ctrl: int | None = None,
    degree: int = 3,
    margin: float = 0.0,
    fit_tol: float = 0.25,
) -> CenterlineModel:
    """Fit, discretize, and attach interpolated corridor widths.

    Waypoint widths are carried onto the samples by linear interpolation
    in arc length (wrapping at the lap length). A fit residual above
    ``fit_tol`` raises a FitToleranceWarning rather than failing.
    """
    if margin < 0.0:
        raise ValueError(f"margin must be non-negative, got {margin}")
    if n_ctrl is None:
        n_ctrl = max(8, track.n_waypoints // 10)
    params = chord_parameters(track.waypoints)
    spline = fit_periodic(track.waypoints, n_ctrl, degree=degree, params=params)

    fitted = spline.evaluate(params)
    residuals = np.linalg.norm(fitted - track.waypoints, axis=1)
    worst = int(np.argmax(residuals))
    if residuals[worst] > fit_tol:
        warnings.warn(
            f"centerline fit misses waypoint {worst} by {residuals[worst]:.3f} m "
            f"(tolerance {fit_tol} m); consider more control points",
            FitToleranceWarning,
            stacklevel=2,
        )

    disc = spline.discretize(ds)
    total = disc.total_length

    edges, cum = spline._span_table
    spans = np.clip(np.searchsorted(edges, params, side="right") - 1, 0, edges.size - 2)
    s_wp = np.array(
        [cum[j] + (spline._panel(edges[j], t) if t > edges[j] else 0.0) for j, t in zip(spans, params)]
    )
    s_samples = np.arange(disc.n_samples) * ds
    w_left = np.interp(s_samples, s_wp, track.w_left, period=total)
    w_right = np.interp(s_samples, s_wp, track.w_right, period=total)

    avail_l = w_left - margin
    avail_r = w_right - margin
    if np.any(avail_l <= 0.0) or np.any(avail_r <= 0.0):
        bad = int(np.argmax((avail_l <= 0.0) | (avail_r <= 0.0)))
        raise InfeasibleTrackError(
            f"margin {margin} m leaves no corridor at sample {bad} "
            f"(w_left={w_left[bad]:.3f}, w_right={w_right[bad]:.3f})"
        )

    return CenterlineModel(
        spline=spline,
        disc=disc,
        w_left=w_left,
        w_right=w_right,
        margin=margin,
        name=track.name,
    )


def boundary_polylines(model: CenterlineModel) -> tuple[np.ndarray, np.ndarray]:
    """Left and right physical boundary polylines at the sample resolution."""
    normals = model.disc.normals
    left = model.disc.positions + normals * model.w_left[:, None]
    right = model.disc.positions - normals * model.w_right[:, None]
    return left, right
