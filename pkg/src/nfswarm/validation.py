"""Self-checks comparing closed forms and fast paths against direct computation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import geometry, sensing, snr_analysis as sa, tensorops, wavefront
from .geometry import ArrayConfig
from .snr_analysis import SnrScenario


@dataclass(frozen=True)
class OracleCheck:
    name: str
    value: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"[{tag}] {self.name}: {self.value:.3e} <= {self.tolerance:.1e}{extra}"


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def _worst(fn: Callable[..., float], cases) -> tuple[float, str]:
    worst, where = -1.0, ""
    for case in cases:
        err = fn(*case)
        if err > worst:
            worst, where = err, ", ".join(f"{c:g}" for c in case)
    return worst, where


LADDER_RANGES = (50.0, 65.0, 80.0)
LADDER_ELEVATIONS_DEG = (-30.0, 0.0, 45.0)


def check_ula_closed_forms(cfg: ArrayConfig, theta_deg: float = 30.0) -> list[OracleCheck]:
    """Linear-swarm closed forms against their exact sums over a small ladder."""
    ula = cfg.replace(m_y=1, n_y=1)
    cases = [(r, p) for r in LADDER_RANGES for p in LADDER_ELEVATIONS_DEG]

    def scn(r, p):
        return SnrScenario(ula, math.radians(theta_deg), math.radians(p), r)

    e2, w2 = _worst(lambda r, p: _rel(sa.snr_swm_ula_prop2(scn(r, p)), sa.snr_swm_sum(scn(r, p))), cases)
    e3, w3 = _worst(lambda r, p: _rel(sa.snr_hspwm_ula_prop3(scn(r, p)), sa.snr_hspwm_sum(scn(r, p))), cases)
    return [OracleCheck("SWM linear-swarm closed form vs sum (rel. err.)", e2, 1e-2, f"worst at r, phi = {w2}"),
            OracleCheck("HSPWM linear-swarm closed form vs sum (rel. err.)", e3, 1e-2, f"worst at r, phi = {w3}")]


def check_planar_closed_form(scn: SnrScenario) -> OracleCheck:
    err = _rel(sa.snr_swm_prop1(scn), sa.snr_swm_sum(scn))
    return OracleCheck("SWM planar-swarm quadrature vs quadruple sum (rel. err.)", err, 1e-2)


def check_hspwm_gap(scn: SnrScenario) -> OracleCheck:
    rows = sa.snr_sweep(scn, "uav_spacing", [10.0 * k for k in range(1, 11)])
    worst = max(abs(r.gamma_hspwm - r.gamma_swm) / r.gamma_swm for r in rows)
    return OracleCheck("HSPWM vs SWM SNR over the spacing sweep (rel. gap)", worst, 2e-2)


def check_pwm_law(scn: SnrScenario) -> OracleCheck:
    direct = sa.snr_mrc(wavefront.steering_pwm(scn.cfg, scn.theta, scn.phi, scn.range, scn.beta0),
                        scn.p_bar)
    return OracleCheck("PWM response energy vs p*beta0*MN/r^2 (rel. err.)", _rel(direct, sa.snr_pwm(scn)), 1e-12)


def check_sum_vs_vectors(scn: SnrScenario) -> OracleCheck:
    """Index-form SNR sums against the energy of the generated response vectors."""
    vec = sa.response_snrs(scn)
    err = max(_rel(vec["swm"], sa.snr_swm_sum(scn)), _rel(vec["hspwm"], sa.snr_hspwm_sum(scn)))
    return OracleCheck("SNR sums vs response-vector energies (rel. err.)", err, 1e-10)


def check_flattening(cfg: ArrayConfig, seed: int = 0, atoms: int = 100) -> list[OracleCheck]:
    rng = np.random.default_rng(seed)
    crandn = lambda *s: rng.standard_normal(s) + 1j * rng.standard_normal(s)  # noqa: E731
    v, u, b = crandn(cfg.n_y), crandn(cfg.n_x), crandn(cfg.num_uavs)
    e_vec = float(np.abs(tensorops.vec(tensorops.outer3(v, u, b)) - np.kron(b, np.kron(u, v))).max())
    w = sensing.make_measurement(cfg, max(1, cfg.n_x // 2), max(1, cfg.n_y // 2), seed=seed)
    e_kron = 0.0
    for _ in range(atoms):
        v, u, b = crandn(cfg.n_y), crandn(cfg.n_x), crandn(cfg.num_uavs)
        lhs = w.sense(np.kron(b, np.kron(u, v)))
        rhs = np.kron(b, np.kron(w.wx.conj().T @ u, w.wy.conj().T @ v))
        e_kron = max(e_kron, float(np.abs(lhs - rhs).max() / np.abs(rhs).max()))
    return [OracleCheck("vec(outer product) vs Kronecker product (abs. err.)", e_vec, 1e-12),
            OracleCheck("Kronecker compression identity, 100 random atoms (rel. err.)", e_kron, 1e-12)]


def check_tensor_atoms(cfg: ArrayConfig, samples: int = 20, seed: int = 0) -> OracleCheck:
    grid = sensing.build_grid(cfg)
    w = sensing.make_measurement(cfg, cfg.n_x, cfg.n_y, seed=seed)
    td = sensing.build_tensor_dictionary(cfg, grid, w)
    rng = np.random.default_rng(seed)
    err = 0.0
    for k in rng.choice(grid.size, size=min(samples, grid.size), replace=False):
        theta, phi, r = grid.triple(int(k))
        ref = wavefront.steering_hspwm(cfg, theta, phi, r)[1]
        err = max(err, float(np.abs(td.atom(int(k)) - ref).max() / np.abs(ref).max()))
    return OracleCheck("tensor dictionary atoms vs HSPWM responses (rel. err.)", err, 1e-12)


def run_oracles(cfg: ArrayConfig, scn: SnrScenario | None = None) -> list[OracleCheck]:
    """Full oracle suite for ``cfg``; ``scn`` fixes the direction used by the SNR checks."""
    if scn is None:
        scn = SnrScenario(cfg, math.radians(30.0), math.radians(45.0), 50.0)
    return [
        *check_ula_closed_forms(cfg, math.degrees(scn.theta)),
        check_planar_closed_form(scn),
        check_hspwm_gap(scn),
        check_pwm_law(scn),
        check_sum_vs_vectors(scn),
        *check_flattening(cfg),
        check_tensor_atoms(cfg),
    ]


def geometry_report(cfg: ArrayConfig) -> dict[str, float]:
    a_px, a_py, a_p = geometry.apertures(cfg)
    return {"A_px": a_px, "A_py": a_py, "A_p": a_p, "R": geometry.rayleigh_distance(cfg)}
