"""Swarm geometry: element positions, user distances and the Rayleigh distance.

UAVs sit on an ``m_x x m_y`` grid with spacing ``dx_factor * d`` and
``dy_factor * d``; every UAV carries an ``n_x x n_y`` panel with spacing ``d``.
All public indices are 1-based, ``(m_x, m_y)`` for a UAV and ``(n_x, n_y)``
for an antenna on that UAV.

Flat ordering
-------------
Array-response vectors throughout the package are ordered row-major::

    m = (m_x - 1) * M_y + (m_y - 1)          # UAV, 0-based
    n = (n_x - 1) * N_y + (n_y - 1)          # antenna, 0-based
    k = m * N + n                            # element, 0-based

which makes a response equal to ``kron(b, u, v)`` with ``b`` over UAVs,
``u`` over ``n_x`` and ``v`` over ``n_y``. The map ``(m_x - 1) * M_x + m_y``
used in the literature is only injective when ``M_x == M_y``; it is available
as :func:`stride_uav_index` for reference but nothing else relies on it.
"""

from __future__ import annotations

import dataclasses
import functools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DomainError

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ArrayConfig:
    """Geometry of a rectangular UAV swarm with one planar panel per UAV.

    Parameters
    ----------
    m_x, m_y : int
        Number of UAVs along x and y.
    n_x, n_y : int
        Antennas per UAV along x and y.
    wavelength : float
        Carrier wavelength in meters.
    d : float, optional
        Intra-UAV element spacing in meters, half a wavelength by default.
    dx_factor, dy_factor : float
        UAV spacing along x and y in units of ``d``.
    altitude : float
        Flight height in meters; only used for the default reference position.
    ref_position : tuple of float, optional
        Location of the reference antenna of UAV (1, 1). Defaults to
        ``(0, 0, altitude)``.
    """

    m_x: int = 4
    m_y: int = 2
    n_x: int = 12
    n_y: int = 12
    wavelength: float = 0.03
    d: float | None = None
    dx_factor: float = 50.0
    dy_factor: float = 50.0
    altitude: float = 0.0
    ref_position: tuple[float, float, float] | None = field(default=None)

    def __post_init__(self):
        for name in ("m_x", "m_y", "n_x", "n_y"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise DomainError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if not self.wavelength > 0:
            raise DomainError(f"wavelength must be positive, got {self.wavelength!r}")
        if self.d is None:
            object.__setattr__(self, "d", self.wavelength / 2)
        if not self.d > 0:
            raise DomainError(f"element spacing d must be positive, got {self.d!r}")
        if self.dx_factor < 1 or self.dy_factor < 1:
            raise DomainError("UAV spacing factors must be >= 1")
        ref = (0.0, 0.0, float(self.altitude)) if self.ref_position is None else self.ref_position
        ref = tuple(float(c) for c in ref)
        if len(ref) != 3:
            raise DomainError("ref_position must have three coordinates")
        object.__setattr__(self, "ref_position", ref)

    @classmethod
    def from_dict(cls, data: dict) -> "ArrayConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown array config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["ref_position"] = list(self.ref_position)
        return out

    def replace(self, **changes) -> "ArrayConfig":
        return dataclasses.replace(self, **changes)

    @property
    def num_uavs(self) -> int:
        return self.m_x * self.m_y

    @property
    def num_antennas(self) -> int:
        """Antennas per UAV."""
        return self.n_x * self.n_y

    @property
    def num_elements(self) -> int:
        return self.num_uavs * self.num_antennas

    @property
    def uav_spacing_x(self) -> float:
        return self.dx_factor * self.d

    @property
    def uav_spacing_y(self) -> float:
        return self.dy_factor * self.d

    @property
    def aperture_x(self) -> float:
        return (self.m_x - 1) * self.uav_spacing_x + (self.n_x - 1) * self.d

    @property
    def aperture_y(self) -> float:
        return (self.m_y - 1) * self.uav_spacing_y + (self.n_y - 1) * self.d

    @property
    def wavenumber(self) -> float:
        return 2 * np.pi / self.wavelength


def reference_config(**overrides) -> ArrayConfig:
    """The 4x2 swarm of 12x12 panels at 10 GHz (d = 0.015 m, D = 50)."""
    return ArrayConfig(**overrides)


class DirectionCosines(NamedTuple):
    psi: np.ndarray | float
    phi_c: np.ndarray | float
    omega: np.ndarray | float


def direction_cosines(theta, phi) -> DirectionCosines:
    """Return ``(sin(phi)cos(theta), sin(phi)sin(theta), cos(phi))``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(theta < 0) or np.any(theta > np.pi):
        raise DomainError("azimuth theta must lie in [0, pi]")
    if np.any(np.abs(phi) > np.pi / 2):
        raise DomainError("elevation phi must lie in [-pi/2, pi/2]")
    sp = np.sin(phi)
    out = DirectionCosines(sp * np.cos(theta), sp * np.sin(theta), np.cos(phi))
    if out.psi.ndim == 0:
        return DirectionCosines(float(out.psi), float(out.phi_c), float(out.omega))
    return out


def _check_uav(cfg: ArrayConfig, uav_index):
    mx, my = uav_index
    if not (1 <= mx <= cfg.m_x and 1 <= my <= cfg.m_y):
        raise DomainError(f"UAV index {uav_index} outside 1..({cfg.m_x}, {cfg.m_y})")
    return int(mx), int(my)


def _check_antenna(cfg: ArrayConfig, antenna_index):
    nx, ny = antenna_index
    if not (1 <= nx <= cfg.n_x and 1 <= ny <= cfg.n_y):
        raise DomainError(f"antenna index {antenna_index} outside 1..({cfg.n_x}, {cfg.n_y})")
    return int(nx), int(ny)


def uav_flat_index(cfg: ArrayConfig, m_x: int, m_y: int) -> int:
    """0-based row-major UAV index used by every response vector."""
    m_x, m_y = _check_uav(cfg, (m_x, m_y))
    return (m_x - 1) * cfg.m_y + (m_y - 1)


def stride_uav_index(cfg: ArrayConfig, m_x: int, m_y: int) -> int:
    """1-based ``(m_x - 1) * M_x + m_y``; collides when ``M_x != M_y``."""
    m_x, m_y = _check_uav(cfg, (m_x, m_y))
    return (m_x - 1) * cfg.m_x + m_y


def antenna_flat_index(cfg: ArrayConfig, n_x: int, n_y: int) -> int:
    n_x, n_y = _check_antenna(cfg, (n_x, n_y))
    return (n_x - 1) * cfg.n_y + (n_y - 1)


def element_flat_index(cfg: ArrayConfig, uav_index, antenna_index) -> int:
    return (uav_flat_index(cfg, *uav_index) * cfg.num_antennas
            + antenna_flat_index(cfg, *antenna_index))


def element_position(cfg: ArrayConfig, uav_index, antenna_index) -> np.ndarray:
    """Cartesian position of one antenna element in meters."""
    mx, my = _check_uav(cfg, uav_index)
    nx, ny = _check_antenna(cfg, antenna_index)
    uav = np.array([(mx - 1) * cfg.uav_spacing_x, (my - 1) * cfg.uav_spacing_y, 0.0])
    ant = np.array([(nx - 1) * cfg.d, (ny - 1) * cfg.d, 0.0])
    return np.asarray(cfg.ref_position) + uav + ant


@functools.lru_cache(maxsize=64)
def uav_offsets(cfg: ArrayConfig) -> np.ndarray:
    """``(M, 3)`` reference-antenna offsets of every UAV from UAV (1, 1)."""
    mx, my = np.meshgrid(np.arange(cfg.m_x), np.arange(cfg.m_y), indexing="ij")
    out = np.zeros((cfg.num_uavs, 3))
    out[:, 0] = (mx * cfg.uav_spacing_x).ravel()
    out[:, 1] = (my * cfg.uav_spacing_y).ravel()
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=64)
def element_offsets(cfg: ArrayConfig) -> np.ndarray:
    """``(M*N, 3)`` element offsets from the reference antenna, row-major flat order."""
    nx, ny = np.meshgrid(np.arange(cfg.n_x), np.arange(cfg.n_y), indexing="ij")
    panel = np.zeros((cfg.num_antennas, 3))
    panel[:, 0] = (nx * cfg.d).ravel()
    panel[:, 1] = (ny * cfg.d).ravel()
    out = (uav_offsets(cfg)[:, None, :] + panel[None, :, :]).reshape(-1, 3)
    out.setflags(write=False)
    return out


def user_position(cfg: ArrayConfig, theta, phi, r) -> np.ndarray:
    """User location for direction ``(theta, phi)`` at range ``r`` from the reference antenna.

    The reference antenna minus the user position is ``r * [psi, phi_c, omega]``.
    """
    if not r > 0:
        raise DomainError(f"range must be positive, got {r!r}")
    dc = direction_cosines(theta, phi)
    return np.asarray(cfg.ref_position) - r * np.array([dc.psi, dc.phi_c, dc.omega])


def exact_distance(cfg: ArrayConfig, user_pos, uav_index, antenna_index) -> float:
    """Euclidean distance between a user position and one element."""
    delta = element_position(cfg, uav_index, antenna_index) - np.asarray(user_pos, dtype=float)
    dist = float(np.linalg.norm(delta))
    if dist == 0.0:
        raise DomainError("user position coincides with the array element")
    return dist


def closed_form_distance(cfg: ArrayConfig, theta, phi, r, uav_index, antenna_index) -> float:
    """Element distance from the expansion in ``xi = d / r`` and the direction cosines."""
    mx, my = _check_uav(cfg, uav_index)
    nx, ny = _check_antenna(cfg, antenna_index)
    if not r > 0:
        raise DomainError(f"range must be positive, got {r!r}")
    dc = direction_cosines(theta, phi)
    xi = cfg.d / r
    px = (mx - 1) * cfg.dx_factor + (nx - 1)
    py = (my - 1) * cfg.dy_factor + (ny - 1)
    inner = 1 + 2 * xi * dc.psi * px + 2 * xi * dc.phi_c * py + (px ** 2 + py ** 2) * xi ** 2
    return r * float(np.sqrt(inner))


def distances_from_offsets(offsets: np.ndarray, psi, phi_c, omega, r) -> np.ndarray:
    """Distances from users at ``r * [psi, phi_c, omega]`` below the reference to each offset.

    Scalar direction arguments give shape ``(len(offsets),)``; array arguments of
    shape ``(K,)`` give ``(len(offsets), K)``.
    """
    psi, phi_c, omega, r = np.broadcast_arrays(*(np.asarray(a, dtype=float)
                                                 for a in (psi, phi_c, omega, r)))
    if np.any(r <= 0):
        raise DomainError("range must be positive")
    dx = offsets[:, 0, None] + (r * psi).ravel()[None, :]
    dy = offsets[:, 1, None] + (r * phi_c).ravel()[None, :]
    dz = offsets[:, 2, None] + (r * omega).ravel()[None, :]
    dist = np.sqrt(dx * dx + dy * dy + dz * dz)
    return dist[:, 0] if psi.ndim == 0 else dist


def element_distances(cfg: ArrayConfig, theta, phi, r) -> np.ndarray:
    """Distances ``r_{m,n}`` from a user at ``(theta, phi, r)`` to every element, flat order."""
    dc = direction_cosines(theta, phi)
    return distances_from_offsets(element_offsets(cfg), dc.psi, dc.phi_c, dc.omega, r)


def uav_distances(cfg: ArrayConfig, theta, phi, r) -> np.ndarray:
    """Distances ``r_{m,0}`` to each UAV's reference antenna."""
    dc = direction_cosines(theta, phi)
    return distances_from_offsets(uav_offsets(cfg), dc.psi, dc.phi_c, dc.omega, r)


def apertures(cfg: ArrayConfig) -> tuple[float, float, float]:
    """Return ``(A_px, A_py, A_p)``, the x, y and diagonal apertures in meters."""
    apx, apy = cfg.aperture_x, cfg.aperture_y
    return apx, apy, float(np.hypot(apx, apy))


def rayleigh_distance(cfg: ArrayConfig) -> float:
    """Rayleigh distance ``2 * A_p**2 / wavelength`` of the whole swarm."""
    _, _, ap = apertures(cfg)
    return 2 * ap ** 2 / cfg.wavelength
