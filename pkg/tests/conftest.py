import numpy as np
import pytest

from nfswarm.geometry import ArrayConfig, reference_config
from nfswarm.simulation import ExperimentSpec, GridParams


@pytest.fixture
def cfg():
    return reference_config()


@pytest.fixture
def small_cfg():
    """Contiguous 2x2 swarm of 6x6 panels; its Rayleigh distance is about 3.6 m."""
    return ArrayConfig(m_x=2, m_y=2, n_x=6, n_y=6, dx_factor=6, dy_factor=6)


@pytest.fixture
def small_grid_params():
    return GridParams(r_min=1.5, r_max=3.0, delta=0.05)


@pytest.fixture
def small_spec(small_cfg, small_grid_params):
    return ExperimentSpec(cfg=small_cfg, grid=small_grid_params, q_x=6, q_y=6,
                          r_range=(1.5, 3.0), trials=100, seed=3, snr_grid_db=(20.0,))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """``record(number, ok, detail)`` stores a pass/fail line for the terminal summary."""

    def record(number: int, ok: bool, detail: str):
        ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(ACCEPTANCE_LINES[number])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
