import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from convoy_orbit.geometry import TAU, EllipseAxes, OrbitSpec, concentric_point, orbit_coords
from convoy_orbit.guidance import GuidanceGains, angular_rate_command, heading_command, offset_heading

AX = EllipseAxes(2.5, 1.0)
KAPPA_MIN = 0.16


def _coords(p, ax, d_c=1):
    return orbit_coords(p, OrbitSpec((0.0, 0.0), 0.0, ax), d_c)


class TestGains:
    @pytest.mark.parametrize("field", ["k_gamma", "k_psi", "omega_max"])
    def test_rejects_nonpositive(self, field):
        kw = dict(k_gamma=1.0, k_psi=1.0, omega_max=1.0)
        kw[field] = 0.0
        with pytest.raises(ValueError, match=field):
            GuidanceGains(**kw)


class TestHeadingCommand:
    def test_vertex_tangent(self):
        ax = EllipseAxes(2.0, 1.0)
        hc = heading_command(_coords((2.0, 0.0), ax), ax, 1, GuidanceGains(1.0, 1.0, 1.0))
        assert hc.psi_T == pytest.approx(math.pi / 2)
        assert hc.psi_O == 0.0
        assert hc.psi_D == pytest.approx(math.pi / 2)

    def test_far_outside_saturates_inward(self):
        for d_c in (1, -1):
            psi_O = offset_heading(0.3, 1e12, AX, d_c, GuidanceGains(1.0, 1.0, 1.0))
            assert psi_O == pytest.approx(d_c * math.pi / 2, abs=1e-9)

    def test_weighted_offset_example(self):
        psi_O = offset_heading(math.pi / 2, 2.0, AX, 1, GuidanceGains(12.5, 1.0, 1.5))
        assert psi_O == pytest.approx(math.atan(12.5 * KAPPA_MIN), rel=1e-12)
        assert psi_O == pytest.approx(1.1071487177940904, rel=1e-12)

    def test_constant_mode_drops_curvature(self):
        g = GuidanceGains(2.0, 1.0, 1.5, curvature_weighted=False)
        assert offset_heading(0.0, 1.5, AX, 1, g) == pytest.approx(math.atan(1.0))

    @given(st.floats(0.0, TAU), st.sampled_from([1, -1]))
    def test_on_orbit_no_offset(self, s, d_c):
        c = _coords(concentric_point(s, 1.0, AX), AX, d_c)
        hc = heading_command(c._replace(gamma_A=1.0), AX, d_c, GuidanceGains(3.0, 1.0, 1.0))
        assert hc.psi_O == 0.0
        assert hc.psi_D == hc.psi_T

    @given(st.floats(0.0, TAU), st.floats(0.01, 5.0).filter(lambda g: g != 1.0), st.sampled_from([1, -1]))
    def test_offset_sign(self, s, gamma, d_c):
        psi_O = offset_heading(s, gamma, AX, d_c, GuidanceGains(3.0, 1.0, 1.0))
        assert math.copysign(1.0, psi_O) == d_c * math.copysign(1.0, gamma - 1.0)
        assert abs(psi_O) < math.pi / 2

    @pytest.mark.parametrize("gamma", [0.5, 0.9, 1.2, 3.0])
    def test_weighting_sharper_at_ends(self, gamma):
        g = GuidanceGains(2.0, 1.0, 1.0)
        assert abs(offset_heading(0.0, gamma, AX, 1, g)) > abs(offset_heading(math.pi / 2, gamma, AX, 1, g))

    @pytest.mark.parametrize("gamma", [0.3, 0.95, 1.05, 2.0, 7.0])
    def test_laws_coincide_on_flat_side(self, gamma):
        const = GuidanceGains(2.0, 1.0, 1.5, curvature_weighted=False)
        weighted = GuidanceGains(2.0 / KAPPA_MIN, 1.0, 1.5)
        a = offset_heading(math.pi / 2, gamma, AX, 1, const)
        b = offset_heading(math.pi / 2, gamma, AX, 1, weighted)
        assert a == pytest.approx(b, abs=1e-12)

    @given(st.floats(0.0, TAU), st.floats(0.2, 3.0))
    def test_tangent_matches_parametric_derivative(self, s, gamma):
        # on any level set the tangent direction is d/ds (a cos s, b sin s)
        c = _coords(concentric_point(s, gamma, AX), AX)
        hc = heading_command(c, AX, 1, GuidanceGains(1.0, 1.0, 1.0))
        want = math.atan2(AX.b * math.cos(s), -AX.a * math.sin(s))
        assert abs(math.remainder(hc.psi_T - want, TAU)) < 1e-9


class TestAngularRate:
    def test_zero_error(self):
        assert angular_rate_command(0.4, 1.1, 0.7, GuidanceGains(1.0, 1.0, 1.0)) == pytest.approx(0.0, abs=1e-15)

    def test_saturates(self):
        assert angular_rate_command(3.0, 0.0, 0.0, GuidanceGains(1.0, 1.5, 1.5)) == 1.5

    def test_wraps_error(self):
        w = angular_rate_command(3.0, -3.0, 0.0, GuidanceGains(1.0, 1.0, 1.5))
        assert w == pytest.approx(6.0 - TAU, abs=1e-12)
        assert w == pytest.approx(-0.2832, abs=1e-4)

    @given(st.floats(-100, 100), st.floats(-100, 100), st.floats(-10, 10),
           st.floats(0.01, 50), st.floats(0.01, 5))
    def test_bounded(self, psi_D, psi_A, tilt, k_psi, w_max):
        w = angular_rate_command(psi_D, psi_A, tilt, GuidanceGains(1.0, k_psi, w_max))
        assert abs(w) <= w_max
