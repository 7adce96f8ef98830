"""Array responses under the spherical, plane and hybrid wavefront models.

All three models share the phase convention ``exp(-j * 2*pi/lambda * dist)``
and the row-major element order documented in :mod:`nfswarm.geometry`.

* SWM: exact per-element distance for both phase and amplitude.
* PWM: common amplitude ``sqrt(beta0)/r`` and a first-order phase law,
  x offsets paired with ``psi`` and y offsets with ``phi_c``.
* HSPWM: plane wave inside each panel, spherical wave across UAVs, so the
  response factorises as ``sqrt(beta0) * kron(b, u, v)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import geometry
from .errors import DomainError
from .geometry import ArrayConfig

MODELS = ("swm", "pwm", "hspwm")


@dataclass(frozen=True)
class PathParams:
    """One propagation path: azimuth, elevation, range (m) and complex gain."""

    theta: float
    phi: float
    range: float
    gain: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not 0 <= self.theta <= np.pi:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}")
        if not abs(self.phi) <= np.pi / 2:
            raise DomainError(f"phi must lie in [-pi/2, pi/2], got {self.phi}")
        if not self.range > 0:
            raise DomainError(f"range must be positive, got {self.range}")


@dataclass(frozen=True)
class SteeringFactors:
    """HSPWM factors: ``u`` over ``n_x``, ``v`` over ``n_y``, ``b`` over UAVs."""

    u: np.ndarray
    v: np.ndarray
    b: np.ndarray

    def assemble(self, beta0: float = 1.0) -> np.ndarray:
        return np.sqrt(beta0) * np.kron(self.b, np.kron(self.u, self.v))


def _check_range(r):
    if np.any(np.asarray(r) <= 0):
        raise DomainError("range must be positive")


def swm_from_cosines(cfg: ArrayConfig, psi, phi_c, omega, r, beta0: float = 1.0) -> np.ndarray:
    """Spherical-wave responses; array-valued arguments yield one column per entry."""
    _check_range(r)
    dist = geometry.distances_from_offsets(geometry.element_offsets(cfg), psi, phi_c, omega, r)
    return np.sqrt(beta0) / dist * np.exp(-1j * cfg.wavenumber * dist)


def steering_swm(cfg: ArrayConfig, theta, phi, r, beta0: float = 1.0) -> np.ndarray:
    """Exact spherical-wave response, element ``(sqrt(beta0)/r_mn) exp(-j k r_mn)``."""
    _check_range(r)
    dc = geometry.direction_cosines(theta, phi)
    return swm_from_cosines(cfg, dc.psi, dc.phi_c, dc.omega, r, beta0)


def _panel_phases(cfg: ArrayConfig, psi, phi_c):
    k = cfg.wavenumber
    u = np.exp(-1j * k * cfg.d * np.arange(cfg.n_x) * psi)
    v = np.exp(-1j * k * cfg.d * np.arange(cfg.n_y) * phi_c)
    return u, v


def steering_pwm(cfg: ArrayConfig, theta, phi, r, beta0: float = 1.0) -> np.ndarray:
    """Plane-wave response with equal element magnitudes ``sqrt(beta0)/r``."""
    _check_range(r)
    dc = geometry.direction_cosines(theta, phi)
    off = geometry.element_offsets(cfg)
    path = off[:, 0] * dc.psi + off[:, 1] * dc.phi_c
    # keep the large common phase separate so the small per-element terms keep full precision
    return np.sqrt(beta0) / r * np.exp(-1j * cfg.wavenumber * r) * np.exp(-1j * cfg.wavenumber * path)


def hspwm_factors_from_cosines(cfg: ArrayConfig, psi, phi_c, omega, r) -> SteeringFactors:
    _check_range(r)
    u, v = _panel_phases(cfg, psi, phi_c)
    r_m0 = geometry.distances_from_offsets(geometry.uav_offsets(cfg), psi, phi_c, omega, r)
    b = np.exp(-1j * cfg.wavenumber * r_m0) / r_m0
    return SteeringFactors(u=u, v=v, b=b)


def hspwm_factors(cfg: ArrayConfig, theta, phi, r) -> SteeringFactors:
    dc = geometry.direction_cosines(theta, phi)
    return hspwm_factors_from_cosines(cfg, dc.psi, dc.phi_c, dc.omega, r)


def steering_hspwm(cfg: ArrayConfig, theta, phi, r, beta0: float = 1.0):
    """Hybrid response; returns ``(factors, sqrt(beta0) * kron(b, u, v))``."""
    factors = hspwm_factors(cfg, theta, phi, r)
    return factors, factors.assemble(beta0)


def steering(cfg: ArrayConfig, theta, phi, r, model: str = "swm", beta0: float = 1.0) -> np.ndarray:
    model = model.lower()
    if model == "swm":
        return steering_swm(cfg, theta, phi, r, beta0)
    if model == "pwm":
        return steering_pwm(cfg, theta, phi, r, beta0)
    if model == "hspwm":
        return steering_hspwm(cfg, theta, phi, r, beta0)[1]
    raise DomainError(f"unknown wavefront model {model!r}; expected one of {MODELS}")


def channel(cfg: ArrayConfig, paths: Sequence[PathParams], model: str = "swm",
            beta0: float = 1.0) -> np.ndarray:
    """Multipath channel ``(1/sqrt(L)) * sum_l z_l g(theta_l, phi_l, r_l)``."""
    if len(paths) == 0:
        raise DomainError("channel needs at least one path")
    h = np.zeros(cfg.num_elements, dtype=complex)
    for p in paths:
        h += p.gain * steering(cfg, p.theta, p.phi, p.range, model, beta0)
    return h / np.sqrt(len(paths))
