"""Track parsing, validation, corridor construction, and boundaries."""

from __future__ import annotations

import math

import numpy as np
import pytest

from raceline.errors import FitToleranceWarning, InfeasibleTrackError, TrackValidationError
from raceline.track import (
    boundary_polylines,
    build_centerline,
    load_track,
    parse_track_text,
    track_from_arrays,
)
from tests.conftest import circle_waypoints, make_track, track_csv_text


class TestParsing:
    def test_circle_csv_parses(self):
        text = track_csv_text(circle_waypoints(100.0, 360), 5.0, 5.0)
        track = parse_track_text(text, "circle")
        assert track.n_waypoints == 360
        assert np.all(track.w_left == 5.0)
        assert np.all(track.w_right == 5.0)

    def test_negative_width_names_row(self):
        wp = circle_waypoints(100.0, 60)
        lines = track_csv_text(wp, 5.0, 5.0).splitlines()
        # Row numbers count file lines, header included.
        lines[16] = lines[16].rsplit(",", 2)[0] + ",-1.0,5.0"
        with pytest.raises(TrackValidationError, match="row 17"):
            parse_track_text("\n".join(lines) + "\n", "bad")

    def test_trailing_duplicate_first_point_dropped(self):
        wp = circle_waypoints(100.0, 120)
        closed = np.vstack([wp, wp[:1]])
        open_track = make_track(wp, 5.0, 5.0)
        closed_track = make_track(closed, 5.0, 5.0)
        assert closed_track.n_waypoints == open_track.n_waypoints

    def test_wrong_header_rejected(self):
        with pytest.raises(TrackValidationError, match="header"):
            parse_track_text("a,b,c,d\n1,2,3,4\n", "bad")

    def test_wrong_column_count_names_row(self):
        text = "x_m,y_m,w_left_m,w_right_m\n1.0,2.0,5.0\n"
        with pytest.raises(TrackValidationError, match="row 2"):
            parse_track_text(text, "bad")

    def test_non_numeric_cell_names_row(self):
        text = "x_m,y_m,w_left_m,w_right_m\n1.0,2.0,5.0,5.0\n1.0,oops,5.0,5.0\n"
        with pytest.raises(TrackValidationError, match="row 3"):
            parse_track_text(text, "bad")

    def test_comments_and_blank_lines_skipped(self):
        text = "x_m,y_m,w_left_m,w_right_m\n# a comment\n\n"
        text += "\n".join(
            f"{float(x)!r},{float(y)!r},5.0,5.0" for x, y in circle_waypoints(50.0, 40)
        )
        track = parse_track_text(text + "\n", "commented")
        assert track.n_waypoints == 40

    def test_too_few_waypoints_rejected(self):
        wp = circle_waypoints(10.0, 3)
        with pytest.raises(TrackValidationError):
            make_track(wp, 5.0, 5.0)

    def test_load_track_from_file(self, tmp_path):
        path = tmp_path / "loop.csv"
        path.write_text(track_csv_text(circle_waypoints(100.0, 90), 4.0, 6.0))
        track = load_track(path)
        assert track.name == "loop"
        assert track.n_waypoints == 90
        assert np.all(track.w_left == 4.0)

    def test_self_intersecting_centerline_rejected(self):
        t = np.linspace(0.0, 2 * np.pi, 200, endpoint=False)
        # Figure-eight crosses itself at the origin.
        wp = np.column_stack([60 * np.sin(t), 40 * np.sin(2 * t)])
        with pytest.raises(TrackValidationError, match="intersect"):
            make_track(wp, 3.0, 3.0)

    def test_track_from_arrays_validates_widths(self):
        wp = circle_waypoints(100.0, 60)
        with pytest.raises(TrackValidationError):
            track_from_arrays(wp, np.full(60, 5.0), np.full(60, 0.0))


class TestBuildCenterline:
    def test_circle_sample_count_and_interpolated_widths(self, circle100_model):
        model = circle100_model
        # 2*pi*100 / 3 = 209.4 -> floor gives 209 samples.
        assert model.disc.n_samples == 209
        assert np.allclose(model.l, 5.0)
        assert np.allclose(model.r, 5.0)

    def test_margin_shrinks_corridor(self, circle100_track):
        model = build_centerline(circle100_track, ds=3.0, n_ctrl=40, margin=1.5)
        assert np.allclose(model.l, 3.5)
        assert np.allclose(model.r, 3.5)

    def test_margin_exceeding_width_is_infeasible(self, circle100_track):
        with pytest.raises(InfeasibleTrackError):
            build_centerline(circle100_track, ds=3.0, n_ctrl=40, margin=6.0)

    def test_negative_margin_rejected(self, circle100_track):
        with pytest.raises(ValueError):
            build_centerline(circle100_track, ds=3.0, n_ctrl=40, margin=-0.1)

    def test_monza_scale_sample_count(self, monza_scale_model):
        assert abs(monza_scale_model.disc.n_samples - 1933) <= 2

    def test_fit_tolerance_warning_on_coarse_fit(self, chicane_track):
        with pytest.warns(FitToleranceWarning):
            build_centerline(chicane_track, ds=3.0, n_ctrl=12, fit_tol=0.25)

    def test_varying_widths_interpolated_between_waypoints(self):
        wp = circle_waypoints(100.0, 90)
        w_left = 4.0 + 2.0 * np.cos(2 * np.pi * np.arange(90) / 90)
        track = track_from_arrays(wp, w_left, np.full(90, 5.0), name="varying")
        model = build_centerline(track, ds=3.0, n_ctrl=30)
        assert model.l.min() >= w_left.min() - 0.05
        assert model.l.max() <= w_left.max() + 0.05
        assert model.l.std() > 0.5


class TestBoundaries:
    def test_circle_boundaries_are_offset_circles(self, circle100_model):
        left, right = boundary_polylines(circle100_model)
        r_left = np.linalg.norm(left, axis=1)
        r_right = np.linalg.norm(right, axis=1)
        # Counter-clockwise lap: the center sits on the driver's left.
        assert np.max(np.abs(r_left - 95.0)) <= 1e-2
        assert np.max(np.abs(r_right - 105.0)) <= 1e-2

    def test_zero_widths_collapse_to_centerline(self, circle100_model):
        import dataclasses

        model = dataclasses.replace(
            circle100_model,
            w_left=np.zeros(circle100_model.disc.n_samples),
            w_right=np.zeros(circle100_model.disc.n_samples),
        )
        left, right = boundary_polylines(model)
        assert np.allclose(left, model.disc.positions)
        assert np.allclose(right, model.disc.positions)

    def test_offset_orthogonal_to_heading(self, circle100_model):
        left, _ = boundary_polylines(circle100_model)
        offsets = left - circle100_model.disc.positions
        tangents = np.column_stack(
            [np.cos(circle100_model.disc.headings), np.sin(circle100_model.disc.headings)]
        )
        dots = np.einsum("ij,ij->i", offsets, tangents)
        assert np.max(np.abs(dots)) <= 1e-9
