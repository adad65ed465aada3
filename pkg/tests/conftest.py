"""Shared synthetic track fixtures.

Geometry generators are deterministic so every expected value frozen in
the tests below is reproducible. The heavier fixtures (centerline models
with their discretizations) are session-scoped because fitting and
equal-arc sampling dominate suite runtime.
"""

from __future__ import annotations

import numpy as np
import pytest

from raceline.simulate import TractionEllipse
from raceline.track import CenterlineModel, TrackDefinition, build_centerline, parse_track_text

TRACK_HEADER = "x_m,y_m,w_left_m,w_right_m"


def circle_waypoints(radius: float, n: int = 360) -> np.ndarray:
    ang = 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([radius * np.cos(ang), radius * np.sin(ang)])


def stadium_waypoints(
    straight: float,
    radius: float,
    wiggles: int = 0,
    amp: float = 0.0,
    periods: int = 4,
    step: float = 5.0,
) -> np.ndarray:
    """Closed oval: two straights joined by half circles, counter-clockwise.

    ``wiggles`` straights carry a sine corridor offset (amplitude ``amp``,
    ``periods`` full periods) windowed to zero at both ends so the joints
    stay smooth. This is the chicane generator used across the suite.
    """
    pieces = []

    def straight_pts(x0: float, y0: float, direction: int, wiggle: bool) -> np.ndarray:
        n = int(round(straight / step))
        xs = np.arange(n) * step
        if wiggle:
            off = amp * np.sin(np.pi * xs / straight) ** 2 * np.sin(2.0 * np.pi * periods * xs / straight)
        else:
            off = np.zeros(n)
        if direction > 0:
            return np.column_stack([x0 + xs, y0 + off])
        return np.column_stack([x0 - xs, y0 - off])

    def arc_pts(cx: float, cy: float, a0: float, a1: float) -> np.ndarray:
        n = int(round(abs(a1 - a0) * radius / step))
        ang = a0 + (a1 - a0) * np.arange(n) / n
        return np.column_stack([cx + radius * np.cos(ang), cy + radius * np.sin(ang)])

    pieces.append(straight_pts(0.0, 0.0, +1, wiggles >= 1))
    pieces.append(arc_pts(straight, radius, -np.pi / 2.0, np.pi / 2.0))
    pieces.append(straight_pts(straight, 2.0 * radius, -1, wiggles >= 2))
    pieces.append(arc_pts(0.0, radius, np.pi / 2.0, 3.0 * np.pi / 2.0))
    return np.vstack(pieces)


def track_csv_text(waypoints: np.ndarray, w_left: float, w_right: float) -> str:
    rows = "\n".join(f"{float(x)!r},{float(y)!r},{w_left!r},{w_right!r}" for x, y in waypoints)
    return f"{TRACK_HEADER}\n{rows}\n"


def make_track(waypoints: np.ndarray, w_left: float, w_right: float, name: str = "fixture") -> TrackDefinition:
    return parse_track_text(track_csv_text(waypoints, w_left, w_right), name)


# Frozen fixture parameters. Chicane: stadium with two wiggle straights,
# chosen so most curvature energy sits in the removable wiggles rather
# than the irreducible end arcs. Monza-scale: 5.8 km loop, 102 control
# points, 1933 samples at 3 m.
CIRCLE100 = dict(radius=100.0, widths=(5.0, 5.0), n_waypoints=360, n_ctrl=40)
RING200 = dict(radius=200.0, widths=(6.0, 6.0), n_waypoints=360, n_ctrl=40)
CHICANE = dict(straight=300.0, radius=60.0, wiggles=2, amp=4.0, periods=4, step=5.0,
               widths=(6.0, 6.0), n_ctrl=78)
MONZA_SCALE = dict(straight=1800.0, radius=350.0, wiggles=2, amp=4.0, periods=4, step=6.0,
                   widths=(6.0, 6.0), n_ctrl=102)


@pytest.fixture(scope="session")
def circle100_track() -> TrackDefinition:
    return make_track(circle_waypoints(CIRCLE100["radius"], CIRCLE100["n_waypoints"]),
                      *CIRCLE100["widths"], name="circle100")


@pytest.fixture(scope="session")
def circle100_model(circle100_track) -> CenterlineModel:
    return build_centerline(circle100_track, ds=3.0, n_ctrl=CIRCLE100["n_ctrl"])


@pytest.fixture(scope="session")
def ring200_track() -> TrackDefinition:
    return make_track(circle_waypoints(RING200["radius"], RING200["n_waypoints"]),
                      *RING200["widths"], name="ring200")


@pytest.fixture(scope="session")
def ring200_model(ring200_track) -> CenterlineModel:
    return build_centerline(ring200_track, ds=3.0, n_ctrl=RING200["n_ctrl"])


def chicane_waypoints() -> np.ndarray:
    p = CHICANE
    return stadium_waypoints(p["straight"], p["radius"], p["wiggles"], p["amp"], p["periods"], p["step"])


@pytest.fixture(scope="session")
def chicane_track() -> TrackDefinition:
    return make_track(chicane_waypoints(), *CHICANE["widths"], name="chicane")


@pytest.fixture(scope="session")
def chicane_model(chicane_track) -> CenterlineModel:
    return build_centerline(chicane_track, ds=3.0, n_ctrl=CHICANE["n_ctrl"])


@pytest.fixture(scope="session")
def monza_scale_track() -> TrackDefinition:
    p = MONZA_SCALE
    wp = stadium_waypoints(p["straight"], p["radius"], p["wiggles"], p["amp"], p["periods"], p["step"])
    return make_track(wp, *p["widths"], name="monza_scale")


@pytest.fixture(scope="session")
def monza_scale_model(monza_scale_track) -> CenterlineModel:
    return build_centerline(monza_scale_track, ds=3.0, n_ctrl=MONZA_SCALE["n_ctrl"])


@pytest.fixture()
def default_ellipse() -> TractionEllipse:
    return TractionEllipse()
