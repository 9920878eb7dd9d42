import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from convoy_orbit.geometry import rotate_to_frame
from convoy_orbit.orbit_planner import (
    BoundingBox,
    ConvoySnapshot,
    OrbitPlanner,
    VelocityFilter,
    bounding_box,
    centroid_and_tilt,
    estimate_center_velocity,
    select_axes,
)
from convoy_orbit.speed_control import build_envelope

ENV = build_envelope(0.4, 1.2, 0.0, 0.8)
R_TURN = 1.2 / 1.5


def oracle_box(points, theta):
    """Rotate about the centroid and take extremes with numpy."""
    P = np.asarray(points, float)
    c = P.mean(axis=0)
    R = np.array([[math.cos(theta), math.sin(theta)], [-math.sin(theta), math.cos(theta)]])
    Q = (P - c) @ R.T
    return 2 * np.abs(Q[:, 0]).max(), 2 * np.abs(Q[:, 1]).max()


def min_area_ellipse_over_box(l1, l2):
    """Numerically minimise a*b over ellipses through the box corner."""
    X, Y = l1 / 2, l2 / 2

    def area(a):
        # corner on the ellipse fixes b for a given a
        return a * Y / math.sqrt(1.0 - (X / a) ** 2)

    res = minimize_scalar(area, bounds=(X * (1 + 1e-9), 50 * X), method="bounded",
                          options={"xatol": 1e-12 * X})
    a = res.x
    return a, Y / math.sqrt(1.0 - (X / a) ** 2)


def check_constraints(ax, box, env, omega_max, V_A_max):
    r = V_A_max / omega_max
    assert ax.a >= ax.b
    assert ax.b ** 2 / ax.a >= r * (1 - 1e-12)
    assert ax.b / ax.a >= env.ratio * (1 - 1e-12)
    X, Y = box.l1 / 2, box.l2 / 2
    assert X ** 2 / ax.a ** 2 + Y ** 2 / ax.b ** 2 <= 1 + 1e-12


convoys = st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=2, max_size=12)


class TestSnapshot:
    def test_needs_two(self):
        with pytest.raises(ValueError):
            ConvoySnapshot([(0.0, 0.0)])

    def test_positive_dt(self):
        with pytest.raises(ValueError):
            ConvoySnapshot([(0.0, 0.0), (1.0, 0.0)], dt=0.0)


class TestCentroidTilt:
    def test_collinear(self):
        c, th = centroid_and_tilt(ConvoySnapshot([(0, 0), (2, 0), (4, 0)]))
        assert c == (2.0, 0.0) and th == 0.0

    def test_example(self):
        c, th = centroid_and_tilt(ConvoySnapshot([(1, 0), (2, 0), (3, 1), (4, 1)]))
        assert c == pytest.approx((2.5, 0.5))
        assert th == pytest.approx(math.atan2(1, 3))
        assert th == pytest.approx(0.3217, abs=1e-4)

    def test_coincident_ends_hold_tilt(self):
        _, th = centroid_and_tilt(ConvoySnapshot([(1, 1), (2, 0), (1, 1)]), prev_tilt=0.9)
        assert th == 0.9

    def test_tilt_range(self):
        _, th = centroid_and_tilt(ConvoySnapshot([(0, 0), (-1, -0.0)]))
        assert th == math.pi

    @given(convoys, st.floats(-math.pi, math.pi))
    def test_rotation_equivariance(self, pts, phi):
        snap = ConvoySnapshot(pts)
        (cx, cy), th = centroid_and_tilt(snap)
        rot = [rotate_to_frame(p, -phi) for p in pts]
        (rx, ry), rth = centroid_and_tilt(ConvoySnapshot(rot))
        ex, ey = rotate_to_frame((cx, cy), -phi)
        assert (rx, ry) == pytest.approx((ex, ey), abs=1e-9)
        if pts[0] != pts[-1] and math.dist(pts[0], pts[-1]) > 1e-6:
            assert math.remainder(rth - th - phi, 2 * math.pi) == pytest.approx(0.0, abs=1e-9)


class TestBoundingBox:
    def test_collinear(self):
        snap = ConvoySnapshot([(0, 0), (2, 0), (4, 0)])
        assert bounding_box(snap, (2.0, 0.0), 0.0) == BoundingBox(4.0, 0.0)

    def test_point_convoy(self):
        snap = ConvoySnapshot([(3, 3)] * 4)
        assert bounding_box(snap, (3.0, 3.0), 0.0) == BoundingBox(0.0, 0.0)

    def test_four_vehicle(self):
        pts = [(0.0, 0.0), (1.5, 0.8), (3.0, 0.4), (4.0, 2.0)]
        snap = ConvoySnapshot(pts)
        c, th = centroid_and_tilt(snap)
        box = bounding_box(snap, c, th)
        assert (box.l1, box.l2) == pytest.approx(oracle_box(pts, th), abs=1e-12)

    @settings(max_examples=300)
    @given(convoys)
    def test_matches_oracle(self, pts):
        snap = ConvoySnapshot(pts)
        c, th = centroid_and_tilt(snap)
        box = bounding_box(snap, c, th)
        assert (box.l1, box.l2) == pytest.approx(oracle_box(pts, th), abs=1e-12, rel=1e-12)


class TestSelectAxes:
    def test_example(self):
        ax = select_axes(BoundingBox(4.0, 1.5), ENV, 1.5, 1.2)
        assert ax.a == pytest.approx(4 / math.sqrt(2))
        assert ax.b == pytest.approx(math.sqrt(ax.a * 0.8))
        assert ax.b == pytest.approx(1.5042, abs=1e-4)
        assert ax.b ** 2 / ax.a == pytest.approx(0.8)
        check_constraints(ax, BoundingBox(4.0, 1.5), ENV, 1.5, 1.2)

    def test_point_convoy_is_turn_circle(self):
        ax = select_axes(BoundingBox(0.0, 0.0), ENV, 1.5, 1.2)
        assert ax.a == pytest.approx(R_TURN)
        assert ax.b == pytest.approx(R_TURN)

    def test_square_gives_circle(self):
        ax = select_axes(BoundingBox(10.0, 10.0), ENV, 1.5, 1.2)
        assert (ax.a, ax.b) == pytest.approx((10 / math.sqrt(2), 10 / math.sqrt(2)))

    def test_literal_b_term_is_round(self):
        ax = select_axes(BoundingBox(20.0, 1.0), ENV, 1.5, 1.2, use_l1_minor_term=True)
        assert ax.a == ax.b

    def test_minimum_area_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            l1 = rng.uniform(0.5, 20)
            l2 = l1 * rng.uniform(0.05, 1.0)
            a, b = min_area_ellipse_over_box(l1, l2)
            assert a == pytest.approx(l1 / math.sqrt(2), rel=1e-3)
            assert b == pytest.approx(l2 / math.sqrt(2), rel=1e-3)

    @given(st.floats(0, 40), st.floats(0, 40), st.floats(0.2, 3.0))
    def test_always_feasible(self, l1, l2, w):
        box = BoundingBox(max(l1, l2), min(l1, l2))
        ax = select_axes(box, ENV, w, 1.2)
        check_constraints(ax, box, ENV, w, 1.2)


class TestVelocityFilter:
    def test_first_call_seeds(self):
        f = VelocityFilter(0.2)
        assert estimate_center_velocity(f, (5.0, 1.0), 0.02, 0.2) == (0.0, 0.0)
        assert f.smoothed == (5.0, 1.0)

    def test_stationary(self):
        f = VelocityFilter(0.2)
        for _ in range(50):
            v = estimate_center_velocity(f, (1.0, -2.0), 0.02, 0.2)
        assert v == (0.0, 0.0)

    def test_constant_velocity_converges(self):
        alpha, dt, v = 0.2, 0.02, (0.15, -0.05)
        f = VelocityFilter(alpha)
        n = int(5 / alpha) + 1
        for k in range(n + 1):
            est = estimate_center_velocity(f, (v[0] * k * dt, v[1] * k * dt), dt, 1.0)
        # geometric-series tracking error of the smoother: (1 - alpha)^k
        assert est[0] == pytest.approx(v[0], rel=0.01)
        assert est[1] == pytest.approx(v[1], rel=0.01)
        assert est[0] == pytest.approx(v[0] * (1 - (1 - alpha) ** n), rel=1e-9)

    def test_jump_is_clamped(self):
        f = VelocityFilter(0.2)
        estimate_center_velocity(f, (0.0, 0.0), 0.02, 0.2)
        v = estimate_center_velocity(f, (10.0, 0.0), 0.02, 0.2)
        assert math.hypot(*v) == pytest.approx(0.2, rel=1e-15)

    @pytest.mark.parametrize("alpha", [0.0, 1.5])
    def test_alpha_range(self, alpha):
        with pytest.raises(ValueError):
            VelocityFilter(alpha)


class TestPlanner:
    def test_contains_convoy(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            pts = [tuple(p) for p in rng.uniform(-10, 10, size=(rng.integers(2, 13), 2))]
            orbit = OrbitPlanner(ENV, 1.5).plan(ConvoySnapshot(pts))
            for p in pts:
                x, y = rotate_to_frame((p[0] - orbit.center[0], p[1] - orbit.center[1]), orbit.tilt)
                assert x ** 2 / orbit.axes.a ** 2 + y ** 2 / orbit.axes.b ** 2 <= 1 + 1e-9

    def test_rotation_equivariance(self):
        pts = [(0.0, 0.0), (1.5, 0.8), (3.0, 0.4), (4.0, 2.0)]
        phi = 0.8
        o1 = OrbitPlanner(ENV, 1.5).plan(ConvoySnapshot(pts))
        o2 = OrbitPlanner(ENV, 1.5).plan(ConvoySnapshot([rotate_to_frame(p, -phi) for p in pts]))
        assert (o2.axes.a, o2.axes.b) == pytest.approx((o1.axes.a, o1.axes.b), rel=1e-12)
        assert math.remainder(o2.tilt - o1.tilt - phi, 2 * math.pi) == pytest.approx(0, abs=1e-12)

    def test_velocity_clamped_while_moving(self):
        env = build_envelope(0.3, 1.0, 0.2, 0.8)
        planner = OrbitPlanner(env, 1.5)
        for k in range(200):
            shift = 0.5 * k * 0.02 * (1 if k < 100 else -40)
            orbit = planner.plan(ConvoySnapshot([(shift, 0.0), (shift + 3, 1.0)], k, 0.02))
            assert math.hypot(*orbit.center_velocity) <= 0.2 + 1e-15

    def test_shape_smoothing_lags_and_stays_feasible(self):
        planner = OrbitPlanner(ENV, 1.5, shape_smoothing=0.1)
        planner.plan(ConvoySnapshot([(0, 0), (2, 0)]))
        o = planner.plan(ConvoySnapshot([(0, 0), (0, 20)]))
        assert 0.0 < o.tilt < math.pi / 2
        assert o.axes.b ** 2 / o.axes.a >= R_TURN * (1 - 1e-12)
        assert o.axes.b / o.axes.a >= ENV.ratio * (1 - 1e-12)
