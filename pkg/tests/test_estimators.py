"""Estimator facade: scikit-learn conventions over the functional core."""

from __future__ import annotations

import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from raceline.estimators import LapTimeSimulator, MinimumCurvatureRaceline
from tests.conftest import CHICANE, chicane_waypoints, circle_waypoints


def circle_table(radius: float = 100.0, n: int = 360, width: float = 5.0) -> np.ndarray:
    wp = circle_waypoints(radius, n)
    return np.column_stack([wp, np.full(n, width), np.full(n, width)])


class TestMinimumCurvatureRaceline:
    def test_get_params_round_trip(self):
        est = MinimumCurvatureRaceline(ds=2.0, iterations=3)
        params = est.get_params()
        assert params["ds"] == 2.0
        assert params["iterations"] == 3
        est.set_params(margin=0.5)
        assert est.margin == 0.5

    def test_clone_preserves_hyperparameters(self):
        est = MinimumCurvatureRaceline(n_ctrl=40, iterations=2)
        twin = clone(est)
        assert twin.get_params() == est.get_params()

    def test_predict_before_fit_raises(self):
        with pytest.raises(NotFittedError):
            MinimumCurvatureRaceline().predict([0.0, 10.0])

    def test_fit_sets_trailing_underscore_state(self):
        est = MinimumCurvatureRaceline(n_ctrl=40).fit(circle_table())
        assert est.spline_.n_ctrl == 40
        assert est.disc_.n_samples == 209
        assert est.objective_ <= est.baseline_objective_ * (1 + 1e-12)

    def test_predict_positions_lie_on_circle(self):
        est = MinimumCurvatureRaceline(n_ctrl=40).fit(circle_table())
        stations = np.linspace(0.0, 700.0, 15)
        pts = est.predict(stations)
        radii = np.linalg.norm(pts, axis=1)
        assert np.max(np.abs(radii - 100.0)) < 0.1

    def test_chicane_improves_objective(self):
        wp = chicane_waypoints()
        table = np.column_stack([wp, np.full(len(wp), 6.0), np.full(len(wp), 6.0)])
        est = MinimumCurvatureRaceline(n_ctrl=CHICANE["n_ctrl"], iterations=3).fit(table)
        assert est.objective_ < 0.7 * est.baseline_objective_

    def test_windowed_fit(self):
        wp = chicane_waypoints()
        table = np.column_stack([wp, np.full(len(wp), 6.0), np.full(len(wp), 6.0)])
        est = MinimumCurvatureRaceline(
            n_ctrl=CHICANE["n_ctrl"], window=np.arange(5, 15)
        ).fit(table)
        moved = np.abs(est.spline_.cx[: est.spline_.n_ctrl] - est.centerline_.spline.cx[: est.spline_.n_ctrl])
        frozen = np.ones(est.spline_.n_ctrl, dtype=bool)
        frozen[5:15] = False
        assert np.max(moved[frozen]) == 0.0

    def test_invalid_input_shape_rejected(self):
        with pytest.raises(ValueError):
            MinimumCurvatureRaceline().fit(np.zeros((10, 3)))


class TestLapTimeSimulator:
    def test_fit_from_waypoints(self):
        sim = LapTimeSimulator().fit(circle_waypoints(100.0, 360))
        assert sim.lap_time_ == pytest.approx(2 * math.pi * 100.0 / math.sqrt(1500.0), rel=5e-3)

    def test_fit_from_spline_and_disc_agree(self):
        est = MinimumCurvatureRaceline(n_ctrl=40).fit(circle_table())
        from_spline = LapTimeSimulator().fit(est.spline_)
        from_disc = LapTimeSimulator().fit(est.disc_)
        assert from_spline.lap_time_ == from_disc.lap_time_

    def test_predict_interpolates_speed(self):
        sim = LapTimeSimulator().fit(circle_waypoints(100.0, 360))
        speeds = sim.predict([0.0, 100.0, 250.0])
        assert np.all(np.abs(speeds - math.sqrt(1500.0)) < 0.5)

    def test_speed_cap_applies(self):
        sim = LapTimeSimulator(v_max=20.0).fit(circle_waypoints(100.0, 360))
        assert np.all(sim.profile_.v <= 20.0 + 1e-12)

    def test_pipeline_raceline_into_simulator(self):
        wp = chicane_waypoints()
        table = np.column_stack([wp, np.full(len(wp), 6.0), np.full(len(wp), 6.0)])
        est = MinimumCurvatureRaceline(n_ctrl=CHICANE["n_ctrl"], iterations=3).fit(table)
        base = LapTimeSimulator().fit(est.centerline_.disc)
        opt = LapTimeSimulator().fit(est.spline_)
        assert opt.lap_time_ < base.lap_time_

    def test_params_round_trip(self):
        sim = LapTimeSimulator(a_lat_left=12.0)
        assert clone(sim).get_params()["a_lat_left"] == 12.0
