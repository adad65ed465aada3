"""Quasi-steady-state lap simulation under a traction-ellipse envelope.

Speeds start at the lateral-limit ceiling of every sample and are swept
forward (acceleration) and backward (braking) around the lap until the
profile stops changing. Longitudinal capacity shrinks with lateral load:
a_lon_avail = a_dir * sqrt(1 - (a_lat / a_lat_dir)^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoBottleneckError, NumericalError
from .splines import DiscretizationSet

__all__ = [
    "TractionEllipse",
    "VelocityProfile",
    "LapMetrics",
    "METRIC_FIELDS",
    "corner_speed",
    "find_bottlenecks",
    "qss_profile",
    "lap_metrics",
    "compare_metrics",
]

CONVERGENCE_TOL = 1e-6  # m/s, largest per-sweep speed change at the fixpoint
MAX_SWEEPS = 10


@dataclass(frozen=True)
class TractionEllipse:
    """Acceleration envelope in m/s^2; v_max is an optional speed cap."""

    a_acc_max: float = 10.0
    a_dec_max: float = 20.0
    a_lat_left: float = 15.0
    a_lat_right: float = 15.0
    v_max: float | None = None

    def __post_init__(self) -> None:
        for name in ("a_acc_max", "a_dec_max", "a_lat_left", "a_lat_right"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.v_max is not None and self.v_max <= 0.0:
            raise ValueError(f"v_max must be positive, got {self.v_max}")

    def lat_limit(self, k: float) -> float:
        """Directional lateral limit: left for counter-clockwise turning."""
        return self.a_lat_left if k >= 0.0 else self.a_lat_right


def corner_speed(k: float, ellipse: TractionEllipse) -> float:
    """Largest steady-state speed at curvature k, capped at v_max.

    Zero curvature with no cap returns the math.inf sentinel.
    """
    cap = ellipse.v_max if ellipse.v_max is not None else math.inf
    if k == 0.0:
        return cap
    return min(cap, math.sqrt(ellipse.lat_limit(k) / abs(k)))


def find_bottlenecks(curvatures: np.ndarray, ellipse: TractionEllipse) -> list[int]:
    """Indices of strict cyclic local maxima of |k| below the speed cap.

    A plateau of equal values counts once, seeded at its starting index in
    cyclic traversal order. Raises when the lap is entirely straight and no
    v_max exists to pin the speed.
    """
    absk = np.abs(np.asarray(curvatures, dtype=float))
    m = absk.size
    cap = ellipse.v_max if ellipse.v_max is not None else math.inf

    seeds: list[int] = []
    if np.all(absk == absk[0]):
        # one lap-wide plateau
        if absk[0] > 0.0 and corner_speed(float(np.sign(curvatures[0]) * absk[0]), ellipse) < cap:
            seeds.append(0)
    else:
        start = 0
        while absk[start] == absk[start - 1]:
            start += 1  # terminates: not all values equal
        i = start
        visited = 0
        while visited < m:
            run_value = absk[i]
            run_start = i
            run_len = 1
            while absk[(i + run_len) % m] == run_value:
                run_len += 1
            prev_value = absk[(run_start - 1) % m]
            next_value = absk[(run_start + run_len) % m]
            if run_value > prev_value and run_value > next_value:
                k_here = float(curvatures[run_start])
                if corner_speed(k_here, ellipse) < cap:
                    seeds.append(run_start)
            visited += run_len
            i = (i + run_len) % m

    if not seeds and ellipse.v_max is None:
        raise NoBottleneckError(
            "track has no curvature bottleneck; set v_max on the traction "
            "ellipse to bound the speed profile"
        )
    return sorted(seeds)


@dataclass(frozen=True)
class VelocityProfile:
    """Converged per-sample speeds with derived accelerations and times.

    ``a_lon[i]`` belongs to the segment leaving sample i; ``t_cum[i]`` is
    the time at sample i measured from sample 0.
    """

    v: np.ndarray
    a_lon: np.ndarray
    a_lat: np.ndarray
    t_cum: np.ndarray
    lap_time: float
    sweeps: int


def _forward_avail(ellipse: TractionEllipse, v: float, k: float) -> float:
    ratio = v * v * abs(k) / ellipse.lat_limit(k)
    return ellipse.a_acc_max * math.sqrt(max(0.0, 1.0 - ratio * ratio))


def _brake_root(ellipse: TractionEllipse, v_next: float, k: float, seg: float, hi: float) -> float:
    """Largest entry speed x <= hi that can slow to v_next over seg meters.

    Solves x^2 = v_next^2 + 2*seg*a_dec*sqrt(1-(x^2|k|/a_lat)^2) so the
    braking deceleration respects the traction ellipse at the entry sample
    itself. The left side increases and the right side decreases in x, so
    bisection on [v_next, hi] is safe.
    """
    a_lat = ellipse.lat_limit(k)
    two_ls = 2.0 * seg * ellipse.a_dec_max

    def excess(x: float) -> float:
        ratio = x * x * abs(k) / a_lat
        return x * x - v_next * v_next - two_ls * math.sqrt(max(0.0, 1.0 - ratio * ratio))

    if excess(hi) <= 0.0:
        return hi
    lo = v_next
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return lo


def qss_profile(disc: DiscretizationSet, ellipse: TractionEllipse) -> VelocityProfile:
    """Quasi-steady-state speed profile around a closed lap."""
    k = disc.curvatures
    seg = disc.segment_lengths
    m = disc.n_samples

    ceiling = np.array([corner_speed(float(ki), ellipse) for ki in k])
    if not np.any(np.isfinite(ceiling)):
        raise NoBottleneckError(
            "every sample is unconstrained laterally and no v_max is set; "
            "the speed profile is unbounded"
        )

    v = ceiling.copy()
    sweeps = 0
    for sweep in range(1, MAX_SWEEPS + 1):
        sweeps = sweep
        delta = 0.0
        for i in range(m):
            j = (i + 1) % m
            if not math.isfinite(v[i]):
                continue
            avail = _forward_avail(ellipse, v[i], float(k[i]))
            cap = math.sqrt(v[i] * v[i] + 2.0 * avail * seg[i])
            if v[j] > cap:
                delta = max(delta, v[j] - cap if math.isfinite(v[j]) else math.inf)
                v[j] = cap
        for i in range(m - 1, -1, -1):
            j = (i + 1) % m
            if not math.isfinite(v[j]) or not math.isfinite(v[i]):
                continue
            limit = _brake_root(ellipse, float(v[j]), float(k[i]), float(seg[i]), float(v[i]))
            if limit < v[i]:
                delta = max(delta, v[i] - limit)
                v[i] = limit
        if delta < CONVERGENCE_TOL:
            break
    else:
        raise NumericalError(f"speed profile did not converge within {MAX_SWEEPS} sweeps")

    if not np.all(np.isfinite(v)):
        raise NumericalError("speed profile left unbounded samples; set v_max")
    if np.any(v <= 0.0):
        raise NumericalError("speed profile collapsed to zero")

    v_next = np.roll(v, -1)
    a_lon = (v_next**2 - v**2) / (2.0 * seg)
    a_lat = v**2 * k
    dt = 2.0 * seg / (v + v_next)
    t_cum = np.concatenate([[0.0], np.cumsum(dt[:-1])])
    return VelocityProfile(
        v=v,
        a_lon=a_lon,
        a_lat=a_lat,
        t_cum=t_cum,
        lap_time=float(dt.sum()),
        sweeps=sweeps,
    )


METRIC_FIELDS = [
    ("lap_time_s", "Lap Time (s)"),
    ("avg_speed_mps", "Avg Speed (m/s)"),
    ("max_speed_mps", "Max Speed (m/s)"),
    ("min_speed_mps", "Min Speed (m/s)"),
    ("max_lat_acc_mps2", "Max Lat Acc (m/s^2)"),
    ("max_throttle_mps2", "Max Throttle (m/s^2)"),
    ("max_braking_mps2", "Max Braking (m/s^2)"),
]


@dataclass(frozen=True)
class LapMetrics:
    """Summary numbers for one lap; braking is reported as a negative value."""

    lap_time_s: float
    avg_speed_mps: float
    max_speed_mps: float
    min_speed_mps: float
    max_lat_acc_mps2: float
    max_throttle_mps2: float
    max_braking_mps2: float

    def as_dict(self) -> dict:
        return {name: float(getattr(self, name)) for name, _ in METRIC_FIELDS}


def lap_metrics(profile: VelocityProfile, disc: DiscretizationSet) -> LapMetrics:
    return LapMetrics(
        lap_time_s=profile.lap_time,
        avg_speed_mps=disc.total_length / profile.lap_time,
        max_speed_mps=float(profile.v.max()),
        min_speed_mps=float(profile.v.min()),
        max_lat_acc_mps2=float(np.abs(profile.a_lat).max()),
        max_throttle_mps2=float(profile.a_lon.max()),
        max_braking_mps2=float(profile.a_lon.min()),
    )


def compare_metrics(baseline: LapMetrics, other: LapMetrics) -> list[tuple[str, float, float, float | None]]:
    """(label, baseline, other, delta %) rows; delta is None at a zero baseline."""
    rows = []
    for name, label in METRIC_FIELDS:
        base = float(getattr(baseline, name))
        new = float(getattr(other, name))
        delta = None if abs(base) < 1e-9 else 100.0 * (new - base) / base
        rows.append((label, base, new, delta))
    return rows
