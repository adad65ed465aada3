"""Local HTTP facade maintaining editable raceline sessions.

Sessions are in-memory. Requests for one session are serialized by a
per-session lock; different sessions proceed concurrently. Every mutation
bumps the session revision, and mutations carrying a stale revision are
rejected with 409 so a drag stream cannot interleave with an optimize.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field, replace

import numpy as np
from fastapi import FastAPI, Query
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (
    FitError,
    InfeasibleTrackError,
    NumericalError,
    QpAssemblyError,
    RacelineError,
    TrackValidationError,
)
from .io import (
    RunConfig,
    comparison_text,
    ellipse_from_config,
    diagnostics_dict,
    metrics_json_text,
    parse_window_spec,
    spline_json_text,
    trace_csv_text,
)
from .mincurv import OptimizeResult, optimize, optimize_window
from .simulate import LapMetrics, compare_metrics, lap_metrics, qss_profile
from .splines import SplineTrajectory
from .track import CenterlineModel, boundary_polylines, build_centerline, parse_track_text

__all__ = ["create_app", "app"]

API_PREFIX = "/api/v1"

BOUNDARY_TOL = 1e-9


class CreateSessionRequest(BaseModel):
    track_csv: str
    config: dict = {}


class MoveRequest(BaseModel):
    x: float
    y: float
    revision: int


class OptimizeRequest(BaseModel):
    window: str | None = None
    iterations: int | None = None
    station_tol: float | None = None


class SimulateRequest(BaseModel):
    force: bool = False


@dataclass
class Session:
    """Editable working copy of one track's raceline."""

    id: str
    cfg: RunConfig
    model: CenterlineModel
    working: SplineTrajectory
    positions: np.ndarray
    headings: np.ndarray
    curvatures: np.ndarray
    violations: np.ndarray
    baseline_metrics: LapMetrics
    revision: int = 1
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_result: OptimizeResult | None = None
    working_metrics: LapMetrics | None = None
    working_profile_samples: dict | None = None
    sim_revision: int | None = None


class ApiError(Exception):
    def __init__(self, status: int, detail: str, **extra):
        super().__init__(detail)
        self.status = status
        self.body = {"detail": detail, **extra}


def _violation_mask(session: Session) -> np.ndarray:
    disp = np.einsum("ij,ij->i", session.model.disc.normals, session.positions - session.model.disc.positions)
    return (disp < -session.model.r - BOUNDARY_TOL) | (disp > session.model.l + BOUNDARY_TOL)


def _refresh_samples(session: Session, mask: np.ndarray | None = None) -> np.ndarray:
    """Recompute working-sample geometry; returns the indices refreshed."""
    params = session.model.disc.params
    idx = np.arange(params.size) if mask is None else np.flatnonzero(mask)
    ts = params[idx]
    session.positions[idx] = session.working.evaluate(ts)
    session.headings[idx] = session.working.heading(ts)
    session.curvatures[idx] = session.working.curvature(ts)
    session.violations = _violation_mask(session)
    return idx


def _support_mask(session: Session, ctrl_index: int) -> np.ndarray:
    """Samples inside the basis support of one control point (cyclic)."""
    spline = session.working
    n, p = spline.n_ctrl, spline.degree
    start = (ctrl_index - p) / n
    width = (p + 1) / n
    rel = np.mod(session.model.disc.params - start, 1.0)
    return rel <= width + 1e-12


def _metrics_payload(session: Session) -> dict:
    stale = session.sim_revision != session.revision
    payload = {
        "baseline": session.baseline_metrics.as_dict(),
        "working": None if session.working_metrics is None else session.working_metrics.as_dict(),
        "stale": bool(stale) if session.working_metrics is not None else True,
        "revision": session.revision,
    }
    if session.working_metrics is not None:
        payload["rows"] = [
            {"label": label, "baseline": base, "working": new, "delta_pct": delta}
            for label, base, new, delta in compare_metrics(session.baseline_metrics, session.working_metrics)
        ]
    return payload


def _state_payload(session: Session) -> dict:
    model = session.model
    disc = model.disc
    left, right = boundary_polylines(model)
    return {
        "id": session.id,
        "revision": session.revision,
        "name": model.name,
        "ds": disc.spacing,
        "margin": model.margin,
        "degree": session.working.degree,
        "n_ctrl": session.working.n_ctrl,
        "n_samples": disc.n_samples,
        "total_length_m": disc.total_length,
        "control_points": session.working.control_points.tolist(),
        "centerline_control_points": model.spline.control_points.tolist(),
        "params": disc.params.tolist(),
        "positions": session.positions.tolist(),
        "headings": session.headings.tolist(),
        "curvatures": session.curvatures.tolist(),
        "centerline_positions": disc.positions.tolist(),
        "boundary_left": left.tolist(),
        "boundary_right": right.tolist(),
        "violations": np.flatnonzero(session.violations).tolist(),
        "vehicle": {
            "a_acc_max": session.cfg.a_acc_max,
            "a_dec_max": session.cfg.a_dec_max,
            "a_lat_left": session.cfg.a_lat_left,
            "a_lat_right": session.cfg.a_lat_right,
            "v_max": session.cfg.v_max,
        },
        "metrics": _metrics_payload(session),
        "samples": session.working_profile_samples,
    }


def _simulate_locked(session: Session, force: bool) -> dict:
    bad = np.flatnonzero(session.violations)
    if bad.size and not force:
        raise ApiError(
            409,
            f"working spline violates the boundary at {bad.size} samples; pass force=true to simulate anyway",
            violations=bad.tolist(),
        )
    disc = session.working.discretize(session.cfg.ds)
    profile = qss_profile(disc, ellipse_from_config(session.cfg))
    metrics = lap_metrics(profile, disc)
    session.working_metrics = metrics
    session.working_profile_samples = {
        "x": disc.positions[:, 0].tolist(),
        "y": disc.positions[:, 1].tolist(),
        "v": profile.v.tolist(),
        "t_cum": profile.t_cum.tolist(),
    }
    session.sim_revision = session.revision
    payload = {
        "revision": session.revision,
        "metrics": metrics.as_dict(),
        "samples": session.working_profile_samples,
        "sweeps": profile.sweeps,
    }
    if bad.size:
        payload["warning"] = f"boundary violations at {bad.size} samples"
        payload["violations"] = bad.tolist()
    return payload


def create_app() -> FastAPI:
    app = FastAPI(title="raceline service", version="1.0")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    def get_session(sid: str) -> Session:
        with registry_lock:
            session = sessions.get(sid)
        if session is None:
            raise ApiError(404, f"unknown session '{sid}'")
        return session

    @app.exception_handler(ApiError)
    async def handle_api_error(_, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body)

    @app.exception_handler(RacelineError)
    async def handle_engine_error(_, exc: RacelineError):
        if isinstance(exc, (TrackValidationError, FitError, InfeasibleTrackError, QpAssemblyError)):
            return JSONResponse(status_code=422, content={"detail": str(exc)})
        if isinstance(exc, NumericalError):
            return JSONResponse(status_code=500, content={"detail": str(exc)})
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.post(API_PREFIX + "/sessions", status_code=201)
    def create_session(body: CreateSessionRequest):
        cfg = RunConfig()
        try:
            for key, value in body.config.items():
                cfg.set_value(key, value)
        except ValueError as exc:
            raise ApiError(422, str(exc)) from None
        track = parse_track_text(body.track_csv, name="upload")
        model = build_centerline(
            track,
            ds=cfg.ds,
            n_ctrl=cfg.ctrl_points,
            degree=cfg.degree,
            margin=cfg.margin,
            fit_tol=cfg.fit_tol,
        )
        baseline_profile = qss_profile(model.disc, ellipse_from_config(cfg))
        session = Session(
            id=uuid.uuid4().hex[:12],
            cfg=cfg,
            model=model,
            working=model.spline,
            positions=model.disc.positions.copy(),
            headings=model.disc.headings.copy(),
            curvatures=model.disc.curvatures.copy(),
            violations=np.zeros(model.disc.n_samples, dtype=bool),
            baseline_metrics=lap_metrics(baseline_profile, model.disc),
        )
        with registry_lock:
            sessions[session.id] = session
        return _state_payload(session)

    @app.get(API_PREFIX + "/sessions/{sid}")
    def get_state(sid: str):
        session = get_session(sid)
        with session.lock:
            return _state_payload(session)

    @app.patch(API_PREFIX + "/sessions/{sid}/control-points/{index}")
    def move_control_point(sid: str, index: int, body: MoveRequest):
        session = get_session(sid)
        with session.lock:
            n = session.working.n_ctrl
            if not 1 <= index <= n:
                raise ApiError(400, f"control-point index must be in 1..{n}, got {index}")
            if body.revision != session.revision:
                raise ApiError(
                    409,
                    f"stale revision {body.revision}; session is at {session.revision}",
                    revision=session.revision,
                )
            i = index - 1
            coeffs = session.working.control_points.copy()
            coeffs[i] = (body.x, body.y)
            session.working = session.working.with_control_points(coeffs[:, 0], coeffs[:, 1])
            session.revision += 1
            mask = _support_mask(session, i)
            idx = _refresh_samples(session, mask)
            flagged = np.flatnonzero(session.violations)
            return {
                "revision": session.revision,
                "index": index,
                "control_point": [body.x, body.y],
                "samples": {
                    "indices": idx.tolist(),
                    "positions": session.positions[idx].tolist(),
                    "headings": session.headings[idx].tolist(),
                    "curvatures": session.curvatures[idx].tolist(),
                },
                "violations": flagged.tolist(),
                "violation_flagged": bool(flagged.size),
            }

    @app.post(API_PREFIX + "/sessions/{sid}/optimize")
    def run_optimize(sid: str, body: OptimizeRequest):
        session = get_session(sid)
        with session.lock:
            cfg = session.cfg
            kwargs = dict(
                iterations=body.iterations if body.iterations is not None else cfg.iterations,
                kkt_tol=cfg.kkt_tol,
                regularization=cfg.regularization,
                station_tol=body.station_tol if body.station_tol is not None else cfg.station_tol,
            )
            start_model = replace(session.model, spline=session.working)
            window = body.window or cfg.window
            try:
                if window:
                    free = parse_window_spec(window, session.working.n_ctrl)
                    result = optimize_window(start_model, free, **kwargs)
                else:
                    result = optimize(start_model, **kwargs)
            except ValueError as exc:
                raise ApiError(422, str(exc)) from None
            session.working = result.spline
            session.last_result = result
            session.revision += 1
            _refresh_samples(session)
            return {
                "revision": session.revision,
                "objective": result.objective,
                "baseline_objective": result.baseline_objective,
                "reduction_pct": 100.0 * (1.0 - result.objective / result.baseline_objective),
                "diagnostics": diagnostics_dict(result),
                "control_points": session.working.control_points.tolist(),
                "curvatures": session.curvatures.tolist(),
                "violations": np.flatnonzero(session.violations).tolist(),
            }

    @app.post(API_PREFIX + "/sessions/{sid}/simulate")
    def run_simulate(sid: str, body: SimulateRequest):
        session = get_session(sid)
        with session.lock:
            return _simulate_locked(session, body.force)

    @app.get(API_PREFIX + "/sessions/{sid}/metrics")
    def get_metrics(sid: str):
        session = get_session(sid)
        with session.lock:
            return _metrics_payload(session)

    @app.get(API_PREFIX + "/sessions/{sid}/export")
    def export_bundle(sid: str, force: bool = Query(default=False)):
        session = get_session(sid)
        with session.lock:
            bad = np.flatnonzero(session.violations)
            if bad.size and not force:
                raise ApiError(
                    409,
                    f"working spline violates the boundary at {bad.size} samples; pass force=true to export anyway",
                    violations=bad.tolist(),
                )
            ellipse = ellipse_from_config(session.cfg)
            disc0 = session.model.disc
            prof0 = qss_profile(disc0, ellipse)
            met0 = lap_metrics(prof0, disc0)
            disc1 = session.working.discretize(session.cfg.ds)
            prof1 = qss_profile(disc1, ellipse)
            met1 = lap_metrics(prof1, disc1)
            diagnostics = None if session.last_result is None else diagnostics_dict(session.last_result)
            files = {
                "centerline_spline.json": spline_json_text(session.model.spline),
                "optimized_spline.json": spline_json_text(session.working),
                "centerline_trace.csv": trace_csv_text(disc0, prof0),
                "optimized_trace.csv": trace_csv_text(disc1, prof1),
                "metrics.json": metrics_json_text(met0, met1, diagnostics),
                "comparison.txt": comparison_text(met0, met1),
            }
            return {"revision": session.revision, "files": files}

    return app


app = create_app()


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(app, host="127.0.0.1", port=8000)
