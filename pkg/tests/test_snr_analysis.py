import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nfswarm import snr_analysis as sa
from nfswarm import wavefront as wf
from nfswarm.errors import DomainError
from nfswarm.geometry import ArrayConfig
from nfswarm.snr_analysis import SnrScenario

THETA, PHI = math.radians(30), math.radians(45)


@pytest.fixture
def scn(cfg):
    return SnrScenario(cfg, THETA, PHI, 50.0)


@pytest.fixture
def ula():
    return ArrayConfig(m_y=1, n_y=1)


class TestScenario:
    @pytest.mark.parametrize("kw", [dict(p_bar=0), dict(beta0=-1), dict(range=0)])
    def test_positive(self, cfg, kw):
        base = dict(theta=0.1, phi=0.1, range=10.0)
        base.update(kw)
        with pytest.raises(DomainError):
            SnrScenario(cfg, **base)


class TestMrc:
    def test_mrc_beamformer_achieves_bound(self, cfg, rng):
        g = wf.steering_swm(cfg, THETA, PHI, 50.0)
        assert sa.snr_with_beamformer(g, sa.mrc_beamformer(g), 2.0) == pytest.approx(sa.snr_mrc(g, 2.0), rel=1e-12)

    def test_random_beamformers_below_bound(self, cfg, rng):
        g = wf.steering_swm(cfg, THETA, PHI, 50.0)
        best = sa.snr_mrc(g)
        f = rng.standard_normal((1000, g.size)) + 1j * rng.standard_normal((1000, g.size))
        f /= np.linalg.norm(f, axis=1, keepdims=True)
        assert np.max(np.abs(f @ g) ** 2) <= best + 1e-12

    def test_all_ones(self):
        assert sa.snr_mrc(np.ones(20), 3.0) == pytest.approx(60.0)

    def test_empty(self):
        with pytest.raises(DomainError):
            sa.snr_mrc(np.array([]))


class TestH:
    def test_values(self):
        assert sa.h_function(0.0) == 0.0
        assert sa.h_function(1.0) == pytest.approx(math.pi / 4 - math.log(2) / 2, abs=1e-15)
        assert sa.h_function(1.0) == pytest.approx(0.43882, abs=1e-5)

    @pytest.mark.parametrize("rho", [-30.0, -2.0, -0.3, 0.0, 0.7, 4.0, 100.0])
    def test_derivative_is_arctan(self, rho):
        step = 1e-4
        fd = (sa.h_function(rho + step) - sa.h_function(rho - step)) / (2 * step)
        assert abs(fd - math.atan(rho)) <= 1e-6

    def test_even(self):
        rho = np.linspace(-5, 5, 41)
        np.testing.assert_allclose(sa.h_function(rho), sa.h_function(-rho), atol=1e-14)


class TestSums:
    def test_single_element(self):
        s = SnrScenario(ArrayConfig(m_x=1, m_y=1, n_x=1, n_y=1), 0.2, 0.3, 20.0, p_bar=2.0, beta0=3.0)
        assert sa.snr_swm_sum(s) == pytest.approx(6.0 / 400.0, rel=1e-14)

    def test_swm_norm_identity(self, scn):
        g = wf.steering_swm(scn.cfg, scn.theta, scn.phi, scn.range)
        assert sa.snr_swm_sum(scn) == pytest.approx(sa.snr_mrc(g), rel=1e-10)

    def test_swm_frozen(self, scn):
        assert sa.snr_swm_sum(scn) == pytest.approx(0.44453708359318306, rel=1e-10)

    def test_two_element_broadside(self):
        # Psi = Phi = 0, elements at x offsets 0 and d: 1 + (1 + xi^2)^-1
        cfg = ArrayConfig(m_x=1, m_y=1, n_x=2, n_y=1)
        s = SnrScenario(cfg, 0.5, 0.0, 0.1)
        xi = cfg.d / 0.1
        assert sa.snr_swm_sum(s) == pytest.approx((1 + 1 / (1 + xi ** 2)) / 0.01, rel=1e-13)

    def test_pwm(self, scn):
        assert sa.snr_pwm(scn) == pytest.approx(0.4608, rel=1e-15)
        g = wf.steering_pwm(scn.cfg, scn.theta, scn.phi, scn.range)
        assert sa.snr_mrc(g) == pytest.approx(sa.snr_pwm(scn), rel=1e-12)

    def test_pwm_doubles_with_mn(self, scn):
        assert sa.snr_pwm(scn.with_cfg(m_x=8)) == 2 * sa.snr_pwm(scn)

    def test_hspwm_single_uav(self):
        s = SnrScenario(ArrayConfig(m_x=1, m_y=1), THETA, PHI, 30.0)
        assert sa.snr_hspwm_sum(s) == pytest.approx(144 / 900.0, rel=1e-14)

    def test_hspwm_norm_identity(self, scn):
        f, g = wf.steering_hspwm(scn.cfg, scn.theta, scn.phi, scn.range, beta0=2.0)
        s = SnrScenario(scn.cfg, scn.theta, scn.phi, scn.range, beta0=2.0)
        assert sa.snr_hspwm_sum(s) == pytest.approx(sa.snr_mrc(g), rel=1e-10)
        assert sa.snr_hspwm_sum(scn) == pytest.approx(0.44595286329688943, rel=1e-10)

    @pytest.mark.parametrize("r", [50.0, 65.0, 80.0])
    def test_hspwm_close_to_swm(self, cfg, r):
        s = SnrScenario(cfg, THETA, PHI, r)
        assert abs(sa.snr_hspwm_sum(s) / sa.snr_swm_sum(s) - 1) < 0.02

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0, math.pi), st.floats(-1.4, 1.4), st.floats(20.0, 200.0))
    def test_norm_identities_property(self, theta, phi, r):
        cfg = ArrayConfig(m_x=3, m_y=2, n_x=5, n_y=4)
        s = SnrScenario(cfg, theta, phi, r)
        vec = sa.response_snrs(s)
        assert sa.snr_swm_sum(s) == pytest.approx(vec["swm"], rel=1e-10)
        assert sa.snr_hspwm_sum(s) == pytest.approx(vec["hspwm"], rel=1e-10)

    def test_pwm_independent_of_geometry(self, scn):
        ref = sa.snr_pwm(scn)
        for theta, phi, dfac in [(0.1, 0.2, 5), (2.0, -1.0, 90), (3.0, 1.2, 1)]:
            s = SnrScenario(scn.cfg.replace(dx_factor=dfac, dy_factor=dfac), theta, phi, scn.range)
            assert sa.snr_pwm(s) == ref


class TestClosedForms:
    @pytest.mark.parametrize("r", [50.0, 65.0, 80.0])
    def test_planar_vs_sum(self, cfg, r):
        s = SnrScenario(cfg, THETA, PHI, r)
        assert abs(sa.snr_swm_prop1(s) / sa.snr_swm_sum(s) - 1) < 0.01

    def test_planar_reduces_to_linear(self, ula):
        s = SnrScenario(ula, THETA, PHI, 60.0)
        assert sa.snr_swm_prop1(s, 64) == pytest.approx(sa.snr_swm_ula_prop2(s), rel=1e-4)

    def test_planar_needs_points(self, scn):
        with pytest.raises(DomainError):
            sa.snr_swm_prop1(scn, 4)

    def test_linear_swm_reference_scale(self, ula):
        s = SnrScenario(ula, 0.0, math.radians(30), 50.0)
        assert abs(sa.snr_swm_ula_prop2(s) / sa.snr_swm_sum(s) - 1) < 0.01

    def test_linear_forms_need_ula(self, scn):
        with pytest.raises(DomainError):
            sa.snr_swm_ula_prop2(scn)
        with pytest.raises(DomainError):
            sa.snr_hspwm_ula_prop3(scn)

    def test_near_endfire_is_finite(self, ula):
        s = SnrScenario(ula, 0.0, math.asin(1 - 1e-9), 50.0)
        assert math.isfinite(sa.snr_swm_ula_prop2(s))
        assert math.isfinite(sa.snr_hspwm_ula_prop3(s))

    def test_endfire_guard(self, ula):
        with pytest.raises(DomainError):
            sa.snr_swm_ula_prop2(SnrScenario(ula, 0.0, math.pi / 2, 50.0))

    def test_asymmetric_in_psi(self, ula):
        plus = SnrScenario(ula, 0.0, 0.5, 60.0)
        minus = SnrScenario(ula, 0.0, -0.5, 60.0)
        assert sa.snr_swm_sum(plus) != pytest.approx(sa.snr_swm_sum(minus), rel=1e-3)
        assert sa.snr_swm_ula_prop2(plus) != pytest.approx(sa.snr_swm_ula_prop2(minus), rel=1e-3)
        # the closed form tracks the direction of the asymmetry
        assert (sa.snr_swm_ula_prop2(plus) < sa.snr_swm_ula_prop2(minus)) == \
            (sa.snr_swm_sum(plus) < sa.snr_swm_sum(minus))

    def test_hspwm_linear_doubles_with_n(self, ula):
        s = SnrScenario(ula, 0.3, 0.4, 60.0)
        assert sa.snr_hspwm_ula_prop3(s.with_cfg(n_x=24)) == pytest.approx(2 * sa.snr_hspwm_ula_prop3(s), rel=1e-15)

    def test_hspwm_linear_vs_sum(self, ula):
        for r in (50.0, 65.0, 80.0):
            for phi in (-30.0, 0.0, 45.0):
                s = SnrScenario(ula, THETA, math.radians(phi), r)
                assert abs(sa.snr_hspwm_ula_prop3(s) / sa.snr_hspwm_sum(s) - 1) < 0.01

    def test_hspwm_single_uav_closed_form(self):
        s = SnrScenario(ArrayConfig(m_x=1, m_y=1, n_y=1), 0.3, 0.4, 60.0)
        assert sa.snr_hspwm_ula_prop3(s) == pytest.approx(12 / 3600.0, rel=0.01)

    def test_error_shrinks_with_spacing(self):
        errs1, errs2 = [], []
        for d in (0.015, 0.0075, 0.00375, 0.001875):
            s = SnrScenario(ArrayConfig(m_y=1, n_y=1, d=d), 0.3, 0.6, 50.0)
            errs2.append(abs(sa.snr_swm_ula_prop2(s) / sa.snr_swm_sum(s) - 1))
            s = SnrScenario(ArrayConfig(d=d), 0.5, 0.7, 50.0)
            errs1.append(abs(sa.snr_swm_prop1(s) / sa.snr_swm_sum(s) - 1))
        assert all(b < a for a, b in zip(errs2, errs2[1:]))
        assert all(b < a for a, b in zip(errs1, errs1[1:]))


class TestSweep:
    def test_spacing_sweep(self, scn):
        grid = [10.0 * k for k in range(1, 11)]
        rows = sa.snr_sweep(scn, "uav_spacing", grid)
        assert [r.x for r in rows] == grid
        assert len({r.gamma_pwm for r in rows}) == 1
        for r in rows:
            assert abs(r.gamma_hspwm - r.gamma_swm) / r.gamma_swm < 0.02

    def test_element_sweep(self, scn):
        rows = sa.snr_sweep(scn, "element_count", range(1, 17))
        assert [r.x for r in rows] == [144.0 * m for m in range(1, 17)]
        for r in rows:
            assert abs(r.gamma_hspwm - r.gamma_swm) / r.gamma_swm < 0.02

    def test_small_aperture_models_agree(self, scn):
        for r in sa.snr_sweep(scn, "element_count", [1, 2, 3, 4]):
            vals = (r.gamma_pwm, r.gamma_swm, r.gamma_hspwm)
            assert max(vals) / min(vals) < 1.05

    def test_layout(self):
        assert sa.uav_layout(8) == (4, 2)
        assert sa.uav_layout(9) == (3, 3)
        assert sa.uav_layout(7) == (7, 1)
        with pytest.raises(DomainError):
            sa.uav_layout(0)

    def test_grid_must_increase(self, scn):
        with pytest.raises(DomainError):
            sa.snr_sweep(scn, "uav_spacing", [20.0, 10.0])

    def test_unknown_axis(self, scn):
        with pytest.raises(DomainError):
            sa.snr_sweep(scn, "height", [1.0])

    def test_csv(self, scn):
        text = sa.sweep_to_csv(sa.snr_sweep(scn, "uav_spacing", [10.0, 20.0]))
        lines = text.splitlines()
        assert lines[0] == "x,gamma_pwm,gamma_swm,gamma_hspwm,gamma_pwm_db,gamma_swm_db,gamma_hspwm_db"
        assert len(lines) == 3
        assert float(lines[1].split(",")[4]) == pytest.approx(10 * math.log10(0.4608))
