"""File formats shared by the CLI and service.

All writers are deterministic: floats are serialized with ``repr`` (shortest
round-trip form), JSON keys are sorted, and no timestamps or timings are
embedded, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .mincurv import OptimizeResult
from .simulate import (
    METRIC_FIELDS,
    LapMetrics,
    TractionEllipse,
    VelocityProfile,
    compare_metrics,
    lap_metrics,
    qss_profile,
)
from .splines import DiscretizationSet, SplineTrajectory, chord_parameters
from .track import CenterlineModel, TrackDefinition

__all__ = [
    "TRACE_HEADER",
    "HEATMAP_HEADER",
    "RunConfig",
    "canonical_json",
    "spline_json_text",
    "spline_from_json_text",
    "load_spline",
    "trace_csv_text",
    "parse_trace_csv",
    "heatmap_csv_text",
    "metrics_json_text",
    "comparison_text",
    "fit_report_text",
    "load_config",
    "parse_window_spec",
    "ellipse_from_config",
    "diagnostics_dict",
    "build_bundle",
    "write_bundle",
]

TRACE_HEADER = "t,x_m,y_m,heading_rad,curvature_1pm,v_mps,a_lon_mps2,a_lat_mps2,t_cum_s"
HEATMAP_HEADER = "x_m,y_m,v_mps"


def canonical_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def spline_json_text(spline: SplineTrajectory) -> str:
    return canonical_json(spline.to_dict())


def spline_from_json_text(text: str) -> SplineTrajectory:
    return SplineTrajectory.from_dict(json.loads(text))


def load_spline(path: str | Path) -> SplineTrajectory:
    return spline_from_json_text(Path(path).read_text(encoding="utf-8"))


def _row(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def trace_csv_text(disc: DiscretizationSet, profile: VelocityProfile) -> str:
    """Per-sample trace; the comment line carries what the header cannot:
    the nominal spacing and exact total length needed to rebuild the
    discretization without re-measuring the polyline."""
    lines = [
        f"# spacing_m={disc.spacing!r} total_length_m={disc.total_length!r}",
        TRACE_HEADER,
    ]
    for i in range(disc.n_samples):
        lines.append(
            _row(
                (
                    disc.params[i],
                    disc.positions[i, 0],
                    disc.positions[i, 1],
                    disc.headings[i],
                    disc.curvatures[i],
                    profile.v[i],
                    profile.a_lon[i],
                    profile.a_lat[i],
                    profile.t_cum[i],
                )
            )
        )
    return "\n".join(lines) + "\n"


def parse_trace_csv(text: str) -> tuple[DiscretizationSet, np.ndarray]:
    """Rebuild the discretization (and stored speeds) from a trace CSV."""
    meta: dict[str, float] = {}
    rows = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for match in re.finditer(r"(\w+)=([^\s]+)", line):
                meta[match.group(1)] = float(match.group(2))
            continue
        if not header_seen:
            if line != TRACE_HEADER:
                raise ValueError(f"trace row {lineno}: expected header '{TRACE_HEADER}'")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 9:
            raise ValueError(f"trace row {lineno}: expected 9 fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ValueError(f"trace row {lineno}: {exc}") from None
    if not rows:
        raise ValueError("trace file has no data rows")
    data = np.asarray(rows, dtype=float)
    positions = data[:, 1:3]
    if "total_length_m" in meta:
        total = meta["total_length_m"]
    else:
        closed = np.vstack([positions, positions[:1]])
        total = float(np.linalg.norm(np.diff(closed, axis=0), axis=1).sum())
    spacing = meta.get("spacing_m", total / data.shape[0])
    disc = DiscretizationSet(
        params=data[:, 0],
        positions=positions,
        headings=data[:, 3],
        curvatures=data[:, 4],
        spacing=spacing,
        total_length=total,
    )
    return disc, data[:, 5]


def heatmap_csv_text(disc: DiscretizationSet, profile: VelocityProfile) -> str:
    lines = [HEATMAP_HEADER]
    for i in range(disc.n_samples):
        lines.append(_row((disc.positions[i, 0], disc.positions[i, 1], profile.v[i])))
    return "\n".join(lines) + "\n"


def comparison_text(baseline: LapMetrics, other: LapMetrics) -> str:
    """Human-readable metrics table with a Delta % column."""
    lines = [f"{'Metric':<24}{'Center Line':>14}{'Optimized':>14}{'Delta (%)':>12}"]
    for label, base, new, delta in compare_metrics(baseline, other):
        delta_s = "n/a" if delta is None else f"{delta:.2f}"
        lines.append(f"{label:<24}{base:>14.3f}{new:>14.3f}{delta_s:>12}")
    return "\n".join(lines) + "\n"


def metrics_json_text(
    baseline: LapMetrics,
    optimized: LapMetrics | None,
    diagnostics: dict | None = None,
) -> str:
    payload: dict = {"centerline": baseline.as_dict()}
    if optimized is not None:
        payload["optimized"] = optimized.as_dict()
        payload["delta_pct"] = {
            name: (
                None
                if abs(getattr(baseline, name)) < 1e-9
                else 100.0 * (getattr(optimized, name) - getattr(baseline, name)) / getattr(baseline, name)
            )
            for name, _ in METRIC_FIELDS
        }
    if diagnostics is not None:
        payload["diagnostics"] = diagnostics
    return canonical_json(payload)


def fit_report_text(track: TrackDefinition, model: CenterlineModel) -> str:
    params = chord_parameters(track.waypoints)
    residuals = np.linalg.norm(model.spline.evaluate(params) - track.waypoints, axis=1)
    return canonical_json(
        {
            "degree": model.spline.degree,
            "max_residual_m": float(residuals.max()),
            "n_ctrl": model.spline.n_ctrl,
            "n_samples": model.disc.n_samples,
            "n_waypoints": int(track.waypoints.shape[0]),
            "rms_residual_m": float(np.sqrt(np.mean(residuals**2))),
            "total_length_m": model.disc.total_length,
        }
    )


# Config keys, their types, and defaults. "path" values stay strings.
_CONFIG_SCHEMA: dict[str, tuple] = {
    "track": (str, None),
    "trajectory": (str, None),
    "out": (str, None),
    "window": (str, None),
    "ds": (float, 3.0),
    "ctrl_points": (int, None),
    "degree": (int, 3),
    "margin": (float, 0.0),
    "fit_tol": (float, 0.25),
    "iterations": (int, 1),
    "kkt_tol": (float, 1e-8),
    "regularization": (float, 1e-10),
    "station_tol": (float, None),
    "a_acc_max": (float, 10.0),
    "a_dec_max": (float, 20.0),
    "a_lat_left": (float, 15.0),
    "a_lat_right": (float, 15.0),
    "v_max": (float, None),
}

VEHICLE_KEYS = ("a_acc_max", "a_dec_max", "a_lat_left", "a_lat_right", "v_max")


@dataclass
class RunConfig:
    """Flat run configuration; ``explicit`` records keys set by file or flag."""

    track: str | None = None
    trajectory: str | None = None
    out: str | None = None
    window: str | None = None
    ds: float = 3.0
    ctrl_points: int | None = None
    degree: int = 3
    margin: float = 0.0
    fit_tol: float = 0.25
    iterations: int = 1
    kkt_tol: float = 1e-8
    regularization: float = 1e-10
    station_tol: float | None = None
    a_acc_max: float = 10.0
    a_dec_max: float = 20.0
    a_lat_left: float = 15.0
    a_lat_right: float = 15.0
    v_max: float | None = None
    explicit: set = field(default_factory=set)

    def set_value(self, key: str, value) -> None:
        if key not in _CONFIG_SCHEMA:
            valid = ", ".join(sorted(_CONFIG_SCHEMA))
            raise ValueError(f"unknown config key '{key}' (valid keys: {valid})")
        kind, _ = _CONFIG_SCHEMA[key]
        if kind is float and isinstance(value, (int, float)):
            value = float(value)
        if not isinstance(value, kind):
            raise ValueError(f"config key '{key}' expects {kind.__name__}, got {value!r}")
        setattr(self, key, value)
        self.explicit.add(key)


def _parse_scalar(token: str, key: str, lineno: int):
    if token.startswith('"'):
        if not (token.endswith('"') and len(token) >= 2):
            raise ValueError(f"config line {lineno}: unterminated string for '{key}'")
        return token[1:-1]
    if token in ("true", "false"):
        return token == "true"
    if re.fullmatch(r"[+-]?\d+", token):
        return int(token)
    try:
        return float(token)
    except ValueError:
        raise ValueError(
            f"config line {lineno}: value for '{key}' must be a number or a quoted string, got {token!r}"
        ) from None


def load_config(path: str | Path | None) -> RunConfig:
    """Flat key = value config file (TOML-compatible subset)."""
    cfg = RunConfig()
    if path is None:
        return cfg
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {line!r}")
        key, _, rest = line.partition("=")
        key = key.strip()
        token = rest.strip()
        if not token.startswith('"') and "#" in token:
            token = token.split("#", 1)[0].strip()
        elif token.startswith('"'):
            end = token.find('"', 1)
            if end < 0:
                raise ValueError(f"config line {lineno}: unterminated string for '{key}'")
            token = token[: end + 1]
        value = _parse_scalar(token, key, lineno)
        kind, _ = _CONFIG_SCHEMA.get(key, (None, None))
        if kind is int and isinstance(value, int):
            pass
        elif kind is float and isinstance(value, (int, float)):
            value = float(value)
        try:
            cfg.set_value(key, value)
        except ValueError as exc:
            raise ValueError(f"config line {lineno}: {exc}") from None
    return cfg


def parse_window_spec(spec: str, n_ctrl: int) -> np.ndarray:
    """'a:b' or 'a:b,c:d' ranges of free control-point indices, 0-based, half-open."""
    indices: list[np.ndarray] = []
    for part in spec.split(","):
        match = re.fullmatch(r"\s*(\d+)\s*:\s*(\d+)\s*", part)
        if not match:
            raise ValueError(f"window range '{part.strip()}' must look like a:b with integers")
        a, b = int(match.group(1)), int(match.group(2))
        if not a < b:
            raise ValueError(f"window range '{part.strip()}' must have a < b")
        if b > n_ctrl:
            raise ValueError(f"window range '{part.strip()}' exceeds control-point count {n_ctrl}")
        indices.append(np.arange(a, b))
    return np.unique(np.concatenate(indices))


def ellipse_from_config(cfg: RunConfig) -> TractionEllipse:
    return TractionEllipse(
        a_acc_max=cfg.a_acc_max,
        a_dec_max=cfg.a_dec_max,
        a_lat_left=cfg.a_lat_left,
        a_lat_right=cfg.a_lat_right,
        v_max=cfg.v_max,
    )


def diagnostics_dict(result: OptimizeResult) -> dict:
    solution = result.solution
    return {
        "constraints": int(solution.lam_lower.size),
        "iterations": [
            {key: entry[key] for key in sorted(entry)} for entry in result.log
        ],
        "kkt_complementarity": solution.kkt_comp,
        "kkt_primal": solution.kkt_primal,
        "kkt_stationarity": solution.kkt_stationarity,
        "solver_iterations": solution.iterations,
        "status": solution.status,
        "sum_sq_curvature_centerline": result.baseline_objective,
        "sum_sq_curvature_optimized": result.objective,
        "variables": int(solution.z.size),
    }


def build_bundle(
    model: CenterlineModel,
    result: OptimizeResult,
    ellipse: TractionEllipse,
    ds: float,
) -> dict[str, str]:
    """File name → content for one optimization run; shared by CLI and export."""
    disc0 = model.disc
    prof0 = qss_profile(disc0, ellipse)
    met0 = lap_metrics(prof0, disc0)
    disc1 = result.spline.discretize(ds)
    prof1 = qss_profile(disc1, ellipse)
    met1 = lap_metrics(prof1, disc1)
    return {
        "centerline_spline.json": spline_json_text(model.spline),
        "optimized_spline.json": spline_json_text(result.spline),
        "centerline_trace.csv": trace_csv_text(disc0, prof0),
        "optimized_trace.csv": trace_csv_text(disc1, prof1),
        "metrics.json": metrics_json_text(met0, met1, diagnostics_dict(result)),
        "comparison.txt": comparison_text(met0, met1),
    }


def write_bundle(bundle: dict[str, str], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(bundle):
        target = out / name
        target.write_text(bundle[name], encoding="utf-8")
        written.append(target)
    return written
