import math

import pytest

from nfswarm import validation
from nfswarm.snr_analysis import SnrScenario


class TestOracleCheck:
    def test_pass_fail(self):
        assert validation.OracleCheck("a", 1e-3, 1e-2).passed
        assert not validation.OracleCheck("a", 1e-1, 1e-2).passed
        assert not validation.OracleCheck("a", float("nan"), 1e-2).passed

    def test_line(self):
        line = validation.OracleCheck("x", 0.5, 1.0, "d").line()
        assert line.startswith("[PASS] x:") and line.endswith("(d)")


class TestOracles:
    def test_suite_passes(self, cfg):
        checks = validation.run_oracles(cfg)
        assert len(checks) == 9
        assert all(c.passed for c in checks), [c.line() for c in checks if not c.passed]

    def test_other_direction(self, cfg):
        scn = SnrScenario(cfg, math.radians(70.0), math.radians(-20.0), 65.0)
        assert validation.check_planar_closed_form(scn).passed
        assert validation.check_sum_vs_vectors(scn).passed

    def test_report(self, cfg):
        rep = validation.geometry_report(cfg)
        assert rep["R"] == pytest.approx(2 * rep["A_p"] ** 2 / cfg.wavelength)
