"""Estimator-style facade over the functional core.

Both classes follow the scikit-learn conventions: constructors only store
hyperparameters, ``fit`` validates inputs and computes, fitted state lives
in trailing-underscore attributes, and ``get_params``/``set_params`` come
from ``BaseEstimator``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .mincurv import optimize, optimize_window
from .simulate import TractionEllipse, lap_metrics, qss_profile
from .splines import DiscretizationSet, SplineTrajectory, fit_periodic
from .track import build_centerline, track_from_arrays
from .validation import check_points, check_track_array, check_vector

__all__ = ["MinimumCurvatureRaceline", "LapTimeSimulator"]


class MinimumCurvatureRaceline(BaseEstimator):
    """Fit a centerline to track data and optimize it for minimum curvature.

    ``fit`` takes an (n, 4) array of x, y, w_left, w_right rows describing a
    closed circuit. ``predict`` maps arc-length stations (m) on the optimized
    raceline to xy positions.
    """

    def __init__(
        self,
        ds: float = 3.0,
        n_ctrl: int | None = None,
        degree: int = 3,
        margin: float = 0.0,
        fit_tol: float = 0.25,
        iterations: int = 1,
        kkt_tol: float = 1e-8,
        regularization: float = 1e-10,
        station_tol: float | None = None,
        window: np.ndarray | None = None,
    ):
        self.ds = ds
        self.n_ctrl = n_ctrl
        self.degree = degree
        self.margin = margin
        self.fit_tol = fit_tol
        self.iterations = iterations
        self.kkt_tol = kkt_tol
        self.regularization = regularization
        self.station_tol = station_tol
        self.window = window

    def fit(self, X, y=None):
        X = check_track_array(X)
        track = track_from_arrays(X[:, :2], X[:, 2], X[:, 3], name="estimator-input")
        self.centerline_ = build_centerline(
            track,
            ds=self.ds,
            n_ctrl=self.n_ctrl,
            degree=self.degree,
            margin=self.margin,
            fit_tol=self.fit_tol,
        )
        kwargs = dict(
            iterations=self.iterations,
            kkt_tol=self.kkt_tol,
            regularization=self.regularization,
            station_tol=self.station_tol,
        )
        if self.window is None:
            self.result_ = optimize(self.centerline_, **kwargs)
        else:
            self.result_ = optimize_window(self.centerline_, self.window, **kwargs)
        self.spline_ = self.result_.spline
        self.disc_ = self.spline_.discretize(self.ds)
        self.objective_ = self.result_.objective
        self.baseline_objective_ = self.result_.baseline_objective
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "spline_")
        stations = check_vector(X, "X")
        total = self.spline_.total_length
        params = [self.spline_.param_at_arclength(s % total) for s in stations]
        return self.spline_.evaluate(np.asarray(params))


class LapTimeSimulator(BaseEstimator):
    """Quasi-steady-state lap simulation under a traction-ellipse model.

    ``fit`` accepts a ``SplineTrajectory``, a ``DiscretizationSet``, or an
    (n, 2) array of closed-loop waypoints. ``predict`` maps arc-length
    stations (m) to speeds on the simulated profile.
    """

    def __init__(
        self,
        a_acc_max: float = 10.0,
        a_dec_max: float = 20.0,
        a_lat_left: float = 15.0,
        a_lat_right: float = 15.0,
        v_max: float | None = None,
        ds: float = 3.0,
    ):
        self.a_acc_max = a_acc_max
        self.a_dec_max = a_dec_max
        self.a_lat_left = a_lat_left
        self.a_lat_right = a_lat_right
        self.v_max = v_max
        self.ds = ds

    def _ellipse(self) -> TractionEllipse:
        return TractionEllipse(
            a_acc_max=self.a_acc_max,
            a_dec_max=self.a_dec_max,
            a_lat_left=self.a_lat_left,
            a_lat_right=self.a_lat_right,
            v_max=self.v_max,
        )

    def fit(self, X, y=None):
        if isinstance(X, DiscretizationSet):
            disc = X
        elif isinstance(X, SplineTrajectory):
            disc = X.discretize(self.ds)
        else:
            points = check_points(X)
            spline = fit_periodic(points, num_ctrl=max(8, points.shape[0] // 10))
            disc = spline.discretize(self.ds)
        self.disc_ = disc
        self.profile_ = qss_profile(disc, self._ellipse())
        self.metrics_ = lap_metrics(self.profile_, disc)
        self.lap_time_ = self.metrics_.lap_time_s
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "profile_")
        stations = check_vector(X, "X")
        total = self.disc_.total_length
        sample_s = np.arange(self.disc_.n_samples) * self.disc_.spacing
        return np.interp(np.mod(stations, total), sample_s, self.profile_.v, period=total)
