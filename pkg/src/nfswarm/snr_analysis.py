"""Receive SNR under MRC for the three wavefront models.

The sum forms (``snr_swm_sum``, ``snr_hspwm_sum``, ``snr_pwm``) are exact and
serve as ground truth. ``snr_swm_prop1``, ``snr_swm_ula_prop2`` and
``snr_hspwm_ula_prop3`` are the Riemann-integral approximations of those sums;
they approach the sums as ``d / r -> 0``.

Everything here returns linear SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, NamedTuple

import numpy as np

from . import geometry
from .errors import DomainError
from .geometry import ArrayConfig
from . import wavefront

ALPHA_SQ_FLOOR = 1e-12


@dataclass(frozen=True)
class SnrScenario:
    """User direction and range plus the transmit SNR ``p_bar`` and reference power."""

    cfg: ArrayConfig
    theta: float
    phi: float
    range: float
    p_bar: float = 1.0
    beta0: float = 1.0

    def __post_init__(self):
        if not self.p_bar > 0 or not self.beta0 > 0 or not self.range > 0:
            raise DomainError("p_bar, beta0 and range must all be positive")

    @property
    def xi(self) -> float:
        return self.cfg.d / self.range

    @property
    def cosines(self) -> geometry.DirectionCosines:
        return geometry.direction_cosines(self.theta, self.phi)

    def with_cfg(self, **changes) -> "SnrScenario":
        return replace(self, cfg=self.cfg.replace(**changes))


def h_function(rho):
    """``rho * arctan(rho) - log(1 + rho**2) / 2``; its derivative is ``arctan``."""
    rho = np.asarray(rho, dtype=float)
    return rho * np.arctan(rho) - 0.5 * np.log1p(rho * rho)


def snr_mrc(g: np.ndarray, p_bar: float = 1.0) -> float:
    """Maximum SNR ``p_bar * ||g||^2`` reached by maximal-ratio combining."""
    g = np.asarray(g)
    if g.size == 0:
        raise DomainError("empty response vector")
    return float(p_bar * np.vdot(g, g).real)


def snr_with_beamformer(g: np.ndarray, f: np.ndarray, p_bar: float = 1.0) -> float:
    """SNR ``p_bar * |g^T f|^2`` for a unit-norm beamformer ``f``."""
    return float(p_bar * abs(np.dot(np.asarray(g), np.asarray(f))) ** 2)


def mrc_beamformer(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g)
    return g.conj() / np.linalg.norm(g)


def _index_offsets(cfg: ArrayConfig):
    """Per-element offsets in units of ``d``: ``m_x D_x + n_x`` and ``m_y D_y + n_y``."""
    mx, my, nx, ny = np.meshgrid(np.arange(cfg.m_x), np.arange(cfg.m_y),
                                 np.arange(cfg.n_x), np.arange(cfg.n_y), indexing="ij")
    return (mx * cfg.dx_factor + nx).ravel(), (my * cfg.dy_factor + ny).ravel()


def snr_swm_sum(scn: SnrScenario) -> float:
    """Exact quadruple sum of ``p_bar beta0 / r_mn^2`` written in ``xi`` and the cosines."""
    dc, xi = scn.cosines, scn.xi
    px, py = _index_offsets(scn.cfg)
    denom = 1 + 2 * xi * dc.psi * px + 2 * xi * dc.phi_c * py + (px ** 2 + py ** 2) * xi ** 2
    return float(scn.p_bar * scn.beta0 / scn.range ** 2 * np.sum(1.0 / denom))


def snr_pwm(scn: SnrScenario) -> float:
    """``p_bar beta0 M N / r^2``; no dependence on angles or UAV spacing."""
    cfg = scn.cfg
    return scn.p_bar * scn.beta0 * cfg.num_elements / scn.range ** 2


def snr_hspwm_sum(scn: SnrScenario) -> float:
    """``N`` times the UAV-level sum of ``p_bar beta0 / r_m0^2``."""
    cfg, dc, xi = scn.cfg, scn.cosines, scn.xi
    mx, my = np.meshgrid(np.arange(cfg.m_x) * cfg.dx_factor,
                         np.arange(cfg.m_y) * cfg.dy_factor, indexing="ij")
    denom = 1 + 2 * xi * dc.psi * mx + 2 * xi * dc.phi_c * my + (mx ** 2 + my ** 2) * xi ** 2
    return float(scn.p_bar * scn.beta0 * cfg.num_antennas / scn.range ** 2 * np.sum(1.0 / denom))


def _four_h(cfg: ArrayConfig, r: float, psi, alpha):
    s = cfg.aperture_x + cfg.uav_spacing_x / 2 + cfg.d / 2
    span_m = cfg.m_x * cfg.uav_spacing_x
    span_n = cfg.n_x * cfg.d
    shift = psi / alpha
    scale = 1.0 / (alpha * r)
    return (h_function(s * scale + shift)
            - h_function((s - span_m) * scale + shift)
            - h_function((s - span_n) * scale + shift)
            + h_function((s - span_n - span_m) * scale + shift))


def snr_swm_prop1(scn: SnrScenario, quadrature_points: int = 32) -> float:
    """Integral approximation of the SWM sum for a planar swarm.

    The x-direction double integral is done in closed form (four ``h`` terms);
    the remaining integral over the y offsets is evaluated with tensor-product
    Gauss-Legendre quadrature, ``quadrature_points`` nodes per axis.
    """
    if quadrature_points < 8:
        raise DomainError("use at least 8 quadrature points per axis")
    cfg, dc, xi, r = scn.cfg, scn.cosines, scn.xi, scn.range
    nodes, weights = np.polynomial.legendre.leggauss(quadrature_points)

    def mapped(upper):
        lo, hi = -xi / 2, (upper - 0.5) * xi
        return 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo), 0.5 * (hi - lo) * weights

    y, wy = mapped(cfg.m_y)
    t, wt = mapped(cfg.n_y)
    yy, tt = np.meshgrid(y, t, indexing="ij")
    dy = cfg.dy_factor
    alpha_sq = (1 + 2 * dc.phi_c * dy * yy + 2 * dc.phi_c * tt + dy ** 2 * yy ** 2
                + 2 * dy * yy * tt + tt ** 2 - dc.psi ** 2)
    bad = alpha_sq < ALPHA_SQ_FLOOR
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise DomainError(f"alpha^2 = {alpha_sq[i, j]:.3e} below floor at t={tt[i, j]:.6g}, y={yy[i, j]:.6g}")
    alpha = np.sqrt(alpha_sq)
    integral = np.einsum("i,ij,j->", wy, _four_h(cfg, r, dc.psi, alpha), wt)
    return float(scn.p_bar * scn.beta0 * r ** 2 / (cfg.dx_factor * cfg.d ** 4) * integral)


def _require_ula(cfg: ArrayConfig):
    if cfg.m_y != 1 or cfg.n_y != 1:
        raise DomainError("closed form needs a linear swarm (m_y = n_y = 1)")


def _ula_alpha(psi: float) -> float:
    alpha_sq = 1 - psi ** 2
    if alpha_sq < ALPHA_SQ_FLOOR:
        raise DomainError(f"1 - psi^2 = {alpha_sq:.3e} below floor")
    return math.sqrt(alpha_sq)


def snr_swm_ula_prop2(scn: SnrScenario) -> float:
    """Closed-form SWM SNR for a row of UAVs carrying linear arrays."""
    cfg = scn.cfg
    _require_ula(cfg)
    psi = scn.cosines.psi
    alpha = _ula_alpha(psi)
    bracket = _four_h(cfg, scn.range, psi, alpha)
    return float(scn.p_bar * scn.beta0 / (cfg.dx_factor * cfg.d ** 2) * bracket)


def snr_hspwm_ula_prop3(scn: SnrScenario) -> float:
    """Closed-form HSPWM SNR for a row of UAVs; linear in the panel size."""
    cfg, r = scn.cfg, scn.range
    _require_ula(cfg)
    psi = scn.cosines.psi
    alpha = _ula_alpha(psi)
    spacing = cfg.uav_spacing_x
    s_d = (cfg.m_x - 1) * spacing
    upper = np.arctan((s_d + spacing / 2) / (r * alpha) + psi / alpha)
    lower = np.arctan((s_d - (cfg.m_x - 0.5) * spacing) / (r * alpha) + psi / alpha)
    return float(scn.p_bar * scn.beta0 * cfg.num_antennas / (r * spacing * alpha) * (upper - lower))


def uav_layout(count: int) -> tuple[int, int]:
    """Most nearly square ``(m_x, m_y)`` with ``m_x * m_y == count`` and ``m_x >= m_y``."""
    if count < 1:
        raise DomainError("UAV count must be positive")
    m_y = max(k for k in range(1, int(math.isqrt(count)) + 1) if count % k == 0)
    return count // m_y, m_y


class SweepRow(NamedTuple):
    x: float
    gamma_pwm: float
    gamma_swm: float
    gamma_hspwm: float


SWEEP_AXES = ("uav_spacing", "element_count")


def sweep_scenario(template: SnrScenario, axis: str, value) -> SnrScenario:
    """Scenario for one sweep point: a UAV spacing factor or a UAV count."""
    if axis == "uav_spacing":
        return template.with_cfg(dx_factor=float(value), dy_factor=float(value))
    if axis == "element_count":
        m_x, m_y = uav_layout(int(value))
        return template.with_cfg(m_x=m_x, m_y=m_y)
    raise DomainError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


def snr_sweep(template: SnrScenario, axis: str, grid: Iterable[float]) -> list[SweepRow]:
    """Sum-form SNRs of all three models along a spacing or UAV-count grid.

    For ``uav_spacing`` the row's ``x`` is the spacing factor ``D`` (applied to
    both axes); for ``element_count`` the grid holds UAV counts, laid out by
    :func:`uav_layout`, and ``x`` is the total element count ``M N``.
    """
    grid = list(grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("sweep grid must be strictly increasing")
    rows = []
    for value in grid:
        scn = sweep_scenario(template, axis, value)
        x = float(value) if axis == "uav_spacing" else float(scn.cfg.num_elements)
        rows.append(SweepRow(x, snr_pwm(scn), snr_swm_sum(scn), snr_hspwm_sum(scn)))
    return rows


def response_snrs(scn: SnrScenario) -> dict[str, float]:
    """MRC SNR of the generated response vectors, one entry per model."""
    args = (scn.cfg, scn.theta, scn.phi, scn.range)
    return {
        "swm": snr_mrc(wavefront.steering_swm(*args, beta0=scn.beta0), scn.p_bar),
        "pwm": snr_mrc(wavefront.steering_pwm(*args, beta0=scn.beta0), scn.p_bar),
        "hspwm": snr_mrc(wavefront.steering_hspwm(*args, beta0=scn.beta0)[1], scn.p_bar),
    }


def to_db(x):
    return 10 * np.log10(x)


SWEEP_CSV_COLUMNS = ("x", "gamma_pwm", "gamma_swm", "gamma_hspwm",
                     "gamma_pwm_db", "gamma_swm_db", "gamma_hspwm_db")


def sweep_to_csv(rows: Iterable[SweepRow]) -> str:
    """CSV text with linear and dB SNR columns; numbers printed with 12 significant digits."""
    lines = [",".join(SWEEP_CSV_COLUMNS)]
    for row in rows:
        lin = (row.gamma_pwm, row.gamma_swm, row.gamma_hspwm)
        vals = (row.x, *lin, *(float(to_db(v)) for v in lin))
        lines.append(",".join(f"{v:.12g}" for v in vals))
    return "\n".join(lines) + "\n"
