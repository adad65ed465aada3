"""Batch command-line front end: fit, optimize, simulate.

All outputs are deterministic; wall-clock timings go to stderr only so two
runs on the same inputs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .errors import RacelineError
from .io import (
    RunConfig,
    VEHICLE_KEYS,
    build_bundle,
    ellipse_from_config,
    fit_report_text,
    heatmap_csv_text,
    load_config,
    load_spline,
    metrics_json_text,
    parse_trace_csv,
    parse_window_spec,
    spline_json_text,
    trace_csv_text,
    write_bundle,
)
from .mincurv import optimize, optimize_window
from .simulate import lap_metrics, qss_profile
from .track import build_centerline, load_track

__all__ = ["main"]


def _log(stage: str, message: str) -> None:
    print(f"[{stage}] {message}", file=sys.stderr)


def _fail(stage: str, message: str) -> int:
    print(f"[{stage}] error: {message}", file=sys.stderr)
    return 1


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> None:
    mapping = {
        "track": "track",
        "ds": "ds",
        "ctrl_points": "ctrl_points",
        "margin": "margin",
        "out": "out",
        "window": "window",
    }
    for attr, key in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            cfg.set_value(key, value)


def _echo_vehicle(stage: str, cfg: RunConfig) -> None:
    parts = []
    for key in VEHICLE_KEYS:
        value = getattr(cfg, key)
        shown = "none" if value is None else repr(value)
        suffix = "" if key in cfg.explicit else " (default)"
        parts.append(f"{key}={shown}{suffix}")
    _log(stage, "vehicle " + " ".join(parts))


def _require(cfg: RunConfig, key: str, stage: str) -> str:
    value = getattr(cfg, key)
    if value is None:
        raise ValueError(f"missing required setting '{key}' (config key or --{key.replace('_', '-')})")
    return value


def _build_model(cfg: RunConfig, stage: str):
    track_path = _require(cfg, "track", stage)
    track = load_track(track_path)
    _log(stage, f"loaded track '{Path(track_path).name}': {track.waypoints.shape[0]} waypoints")
    model = build_centerline(
        track,
        ds=cfg.ds,
        n_ctrl=cfg.ctrl_points,
        degree=cfg.degree,
        margin=cfg.margin,
        fit_tol=cfg.fit_tol,
    )
    _log(
        stage,
        f"centerline: {model.spline.n_ctrl} control points, {model.disc.n_samples} samples, "
        f"length {model.disc.total_length:.1f} m",
    )
    return track, model


def cmd_fit(cfg: RunConfig) -> int:
    stage = "fit"
    track, model = _build_model(cfg, stage)
    out = Path(_require(cfg, "out", stage))
    out.mkdir(parents=True, exist_ok=True)
    report = fit_report_text(track, model)
    (out / "spline.json").write_text(spline_json_text(model.spline), encoding="utf-8")
    (out / "fit_report.json").write_text(report, encoding="utf-8")
    _log(stage, f"wrote {out / 'spline.json'} and {out / 'fit_report.json'}")
    return 0


def cmd_optimize(cfg: RunConfig) -> int:
    stage = "optimize"
    _, model = _build_model(cfg, stage)
    _echo_vehicle(stage, cfg)
    kwargs = dict(
        iterations=cfg.iterations,
        kkt_tol=cfg.kkt_tol,
        regularization=cfg.regularization,
        station_tol=cfg.station_tol,
    )
    started = time.perf_counter()
    if cfg.window:
        free = parse_window_spec(cfg.window, model.spline.n_ctrl)
        _log(stage, f"window: {free.size} free control points")
        result = optimize_window(model, free, **kwargs)
    else:
        result = optimize(model, **kwargs)
    solve_time = time.perf_counter() - started
    solution = result.solution
    reduction = 100.0 * (1.0 - result.objective / result.baseline_objective)
    _log(
        stage,
        f"{solution.z.size} variables, status {solution.status}, "
        f"{solution.iterations} solver iterations, solve_time {solve_time:.3f} s",
    )
    _log(
        stage,
        f"kkt stationarity {solution.kkt_stationarity:.2e}, primal {solution.kkt_primal:.2e}; "
        f"sum k^2 reduced {reduction:.2f}%",
    )
    bundle = build_bundle(model, result, ellipse_from_config(cfg), cfg.ds)
    written = write_bundle(bundle, _require(cfg, "out", stage))
    _log(stage, f"wrote {len(written)} files to {written[0].parent}")
    return 0


def cmd_simulate(cfg: RunConfig, trajectory: str | None) -> int:
    stage = "simulate"
    path = Path(trajectory or _require(cfg, "trajectory", stage))
    if not path.exists():
        raise ValueError(f"trajectory file not found: {path}")
    if path.suffix.lower() == ".json":
        spline = load_spline(path)
        disc = spline.discretize(cfg.ds)
        _log(stage, f"loaded spline '{path.name}': {spline.n_ctrl} control points")
    else:
        disc, _ = parse_trace_csv(path.read_text(encoding="utf-8"))
        _log(stage, f"loaded trace '{path.name}': {disc.n_samples} samples")
    _echo_vehicle(stage, cfg)
    ellipse = ellipse_from_config(cfg)
    profile = qss_profile(disc, ellipse)
    metrics = lap_metrics(profile, disc)
    _log(stage, f"lap time {metrics.lap_time_s:.3f} s over {disc.n_samples} samples "
                f"({profile.sweeps} sweeps)")
    out = Path(_require(cfg, "out", stage))
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.json").write_text(metrics_json_text(metrics, None), encoding="utf-8")
    (out / "trace.csv").write_text(trace_csv_text(disc, profile), encoding="utf-8")
    (out / "heatmap.csv").write_text(heatmap_csv_text(disc, profile), encoding="utf-8")
    _log(stage, f"wrote metrics.json, trace.csv, heatmap.csv to {out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="raceline",
        description="Minimum-curvature raceline optimization and lap-time simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--track", help="track CSV path")
        p.add_argument("--ds", type=float, help="discretization spacing in meters")
        p.add_argument("--ctrl-points", dest="ctrl_points", type=int, help="spline control-point count")
        p.add_argument("--margin", type=float, help="safety margin subtracted from both widths")
        p.add_argument("--out", help="output directory")

    p_fit = sub.add_parser("fit", help="fit the centerline spline and report residuals")
    add_common(p_fit)

    p_opt = sub.add_parser("optimize", help="optimize the raceline and write a result bundle")
    add_common(p_opt)
    p_opt.add_argument(
        "--window",
        help="free control-point ranges 'a:b[,c:d]' (0-based, half-open); others stay frozen",
    )

    p_sim = sub.add_parser("simulate", help="simulate a lap on a spline JSON or trace CSV")
    add_common(p_sim)
    p_sim.add_argument("trajectory", nargs="?", help="spline .json or trace .csv path")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    stage = args.command
    try:
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
        if args.command == "fit":
            return cmd_fit(cfg)
        if args.command == "optimize":
            return cmd_optimize(cfg)
        return cmd_simulate(cfg, args.trajectory)
    except (RacelineError, ValueError, OSError) as exc:
        return _fail(stage, str(exc))


if __name__ == "__main__":
    sys.exit(main())
