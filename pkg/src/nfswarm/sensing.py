"""Analog combiner design and grid dictionaries.

The swarm-wide combiner is ``W = I_M (x) W_x (x) W_y``; it is never formed
densely. :meth:`MeasurementMatrix.sense` applies ``W^H`` to channel vectors by
contracting each panel with ``W_x`` and ``W_y``.

Grids sample ``cos(theta)`` and ``sin(phi)`` uniformly and the range uniformly
in ``1/r``. Flat atom index is ``kappa = (a * B + b) * C + c`` (range fastest,
then elevation, then azimuth); tensor dictionaries keep only the angularly
consistent atoms ``v(a,b) o u(a,b) o b(a,b,c)`` and store their three factor
families separately.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import geometry, wavefront
from .errors import DomainError, MemoryBudgetError
from .geometry import ArrayConfig


@dataclass(frozen=True)
class MeasurementMatrix:
    """Per-axis combiners ``wx`` (N_x x Q_x) and ``wy`` (N_y x Q_y)."""

    wx: np.ndarray
    wy: np.ndarray
    normalized: bool = True

    @property
    def q_x(self) -> int:
        return self.wx.shape[1]

    @property
    def q_y(self) -> int:
        return self.wy.shape[1]

    @property
    def per_uav(self) -> np.ndarray:
        """``W_x (x) W_y``, the N x Q combiner shared by every UAV."""
        return np.kron(self.wx, self.wy)

    def full(self, num_uavs: int) -> np.ndarray:
        """Dense ``I_M (x) W_x (x) W_y``; tests and small problems only."""
        return np.kron(np.eye(num_uavs), self.per_uav)

    @cached_property
    def _per_uav_h(self) -> np.ndarray:
        return np.ascontiguousarray(self.per_uav.conj().T)

    def sense(self, h: np.ndarray) -> np.ndarray:
        """Apply ``W^H`` to one channel (length M*N) or to columns of a matrix."""
        h = np.asarray(h)
        n = self.wx.shape[0] * self.wy.shape[0]
        single = h.ndim == 1
        cols = h[:, None] if single else h
        if cols.shape[0] % n:
            raise DomainError(f"channel length {cols.shape[0]} is not a multiple of N={n}")
        out = np.matmul(self._per_uav_h, cols.reshape(-1, n, cols.shape[1]))
        out = out.reshape(-1, cols.shape[1])
        return out[:, 0] if single else out

    def sense_panel(self, u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Compressed panel factors ``(W_x^H u, W_y^H v)``."""
        return self.wx.conj().T @ u, self.wy.conj().T @ v


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR factorisation of a complex Gaussian matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def design_measurement(n: int, q: int, seed=None, project: bool = True) -> np.ndarray:
    """``U [I_q; 0] V^H`` for random unitaries, then optionally unit-modulus entries.

    Before projection the columns are orthonormal; projection divides each entry
    by its modulus, leaving every column with norm ``sqrt(n)``.
    """
    if not 1 <= q <= n:
        raise DomainError(f"need 1 <= q <= n, got q={q}, n={n}")
    rng = np.random.default_rng(seed)
    u = random_unitary(n, rng)
    v = random_unitary(q, rng)
    w = u[:, :q] @ v.conj().T
    if project:
        w = w / np.abs(w)
    return w


def make_measurement(cfg: ArrayConfig, q_x: int, q_y: int, seed=None,
                     project: bool = True) -> MeasurementMatrix:
    sx, sy = np.random.SeedSequence(seed).spawn(2)
    wx = design_measurement(cfg.n_x, q_x, sx, project)
    wy = design_measurement(cfg.n_y, q_y, sy, project)
    return MeasurementMatrix(wx, wy, normalized=project)


def symmetric_ladder(step: float, limit: float) -> np.ndarray:
    """Points ``k * step`` with ``|k * step| <= limit``, centred on zero."""
    k = int(math.floor(limit / step + 1e-9))
    return np.arange(-k, k + 1) * step


def inverse_range_ladder(r_min: float, r_max: float, delta: float) -> np.ndarray:
    """``1/r_max, 1/r_max + delta, ...`` up to ``1/r_min``."""
    lo, hi = 1.0 / r_max, 1.0 / r_min
    count = int(math.floor((hi - lo) / delta + 1e-9)) + 1
    return lo + delta * np.arange(count)


def coherence_zeta(cfg: ArrayConfig, coherence_level: float = 0.3) -> float:
    """``Z = A_p^2 / (2 beta^2 lambda)``; range steps below ``1/Z`` keep coherence <= beta."""
    _, _, ap = geometry.apertures(cfg)
    return ap ** 2 / (2 * coherence_level ** 2 * cfg.wavelength)


@dataclass(frozen=True)
class SamplingGrid:
    """Sample points in ``cos(theta)``, ``sin(phi)`` and ``1/r``."""

    cos_theta: np.ndarray
    sin_phi: np.ndarray
    inv_range: np.ndarray
    angle_resolution: float
    delta: float
    r_min: float
    r_max: float
    delta_max: float = math.inf
    warnings: tuple[str, ...] = field(default=())

    @property
    def shape(self) -> tuple[int, int, int]:
        return len(self.cos_theta), len(self.sin_phi), len(self.inv_range)

    @property
    def size(self) -> int:
        a, b, c = self.shape
        return a * b * c

    @property
    def num_angle_pairs(self) -> int:
        return len(self.cos_theta) * len(self.sin_phi)

    @property
    def delta_margin(self) -> float:
        """``delta_max / delta``; above 1 when the coherence bound is met."""
        return self.delta_max / self.delta if self.delta > 0 else math.inf

    @property
    def ranges(self) -> np.ndarray:
        return 1.0 / self.inv_range

    def flat_index(self, a: int, b: int, c: int) -> int:
        _, nb, nc = self.shape
        return (a * nb + b) * nc + c

    def unravel(self, k: int) -> tuple[int, int, int]:
        return tuple(int(i) for i in np.unravel_index(k, self.shape))

    def pair_angles(self) -> tuple[np.ndarray, np.ndarray]:
        """``(theta, phi)`` of every angle pair, azimuth-major."""
        ct, sp = np.meshgrid(self.cos_theta, self.sin_phi, indexing="ij")
        return np.arccos(ct.ravel()), np.arcsin(sp.ravel())

    def triple(self, k: int) -> tuple[float, float, float]:
        """``(theta, phi, r)`` of flat atom ``k``."""
        a, b, c = self.unravel(k)
        return (float(np.arccos(self.cos_theta[a])), float(np.arcsin(self.sin_phi[b])),
                float(1.0 / self.inv_range[c]))

    def cosines(self):
        """Direction cosines and ranges of every atom in flat order, each shape (U,).

        Computed from ``(theta, phi)`` exactly as the steering functions do, so
        dictionary columns match directly generated responses bit for bit.
        """
        theta, phi = self.pair_angles()
        c = len(self.inv_range)
        dc = geometry.direction_cosines(np.repeat(theta, c), np.repeat(phi, c))
        r = np.tile(1.0 / self.inv_range, len(theta))
        return dc.psi, dc.phi_c, dc.omega, r

    def to_dict(self) -> dict:
        return {
            "cos_theta": self.cos_theta.tolist(), "sin_phi": self.sin_phi.tolist(),
            "inv_range": self.inv_range.tolist(), "angle_resolution": self.angle_resolution,
            "delta": self.delta, "r_min": self.r_min, "r_max": self.r_max,
        }


def build_grid(cfg: ArrayConfig, angle_resolution: float | None = None, r_min: float = 50.0,
               r_max: float = 80.0, delta: float = 3e-4, angle_limit: float = 0.75,
               coherence_level: float = 0.3) -> SamplingGrid:
    """Angle ladders of step ``angle_resolution`` (default ``2 / n_x``) and the 1/r ladder.

    A ``delta`` above the coherence bound ``1/Z`` is accepted with a warning.
    """
    if angle_resolution is None:
        angle_resolution = 2.0 / cfg.n_x
    if not angle_resolution > 0:
        raise DomainError("angle_resolution must be positive")
    if not 0 < angle_limit < 1:
        raise DomainError("angle_limit must lie in (0, 1)")
    if not 0 < r_min <= r_max:
        raise DomainError(f"need 0 < r_min <= r_max, got {r_min}, {r_max}")
    if not delta > 0:
        raise DomainError("delta must be positive")
    angles = symmetric_ladder(angle_resolution, angle_limit)
    inv = inverse_range_ladder(r_min, r_max, delta)
    delta_max = 1.0 / coherence_zeta(cfg, coherence_level)
    notes = []
    if len(inv) > 1 and delta >= delta_max:
        msg = f"range step {delta:g} exceeds coherence bound {delta_max:.3g}"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    return SamplingGrid(cos_theta=angles, sin_phi=angles.copy(), inv_range=inv,
                        angle_resolution=float(angle_resolution), delta=float(delta),
                        r_min=float(r_min), r_max=float(r_max), delta_max=delta_max,
                        warnings=tuple(notes))


@dataclass(frozen=True)
class TensorDictionary:
    """Factor families of the HSPWM tensor dictionary and their compressed forms.

    ``u_atoms`` is ``N_x x AB``, ``v_atoms`` is ``N_y x AB``, ``b_atoms`` is
    ``M x ABC`` in flat order; ``projected_u = W_x^H u_atoms`` and
    ``projected_v = W_y^H v_atoms``. Atom ``kappa`` is
    ``sqrt(beta0) * v(p) o u(p) o b(kappa)`` with ``p = kappa // C``.
    """

    grid: SamplingGrid
    u_atoms: np.ndarray
    v_atoms: np.ndarray
    b_atoms: np.ndarray
    projected_u: np.ndarray
    projected_v: np.ndarray
    beta0: float
    measurement: MeasurementMatrix

    @property
    def num_atoms(self) -> int:
        return self.b_atoms.shape[1]

    @property
    def b_cube(self) -> np.ndarray:
        """``b_atoms`` reshaped to ``(M, AB, C)``."""
        return self.b_atoms.reshape(self.b_atoms.shape[0], self.grid.num_angle_pairs, -1)

    def atom(self, k: int) -> np.ndarray:
        """Uncompressed atom ``k`` as a flat channel vector."""
        p = k // self.grid.shape[2]
        return np.sqrt(self.beta0) * np.kron(self.b_atoms[:, k],
                                             np.kron(self.u_atoms[:, p], self.v_atoms[:, p]))

    def sensed_atom(self, k: int) -> np.ndarray:
        """``vec`` of the compressed atom ``v_bar o u_bar o b`` (length M*Q)."""
        p = k // self.grid.shape[2]
        return np.sqrt(self.beta0) * np.kron(self.b_atoms[:, k],
                                             np.kron(self.projected_u[:, p], self.projected_v[:, p]))

    def flatten(self, sensed: bool = True) -> np.ndarray:
        """All atoms as columns of a flat matrix (sensed by default), flat order."""
        u = self.projected_u if sensed else self.u_atoms
        v = self.projected_v if sensed else self.v_atoms
        c = self.grid.shape[2]
        panel = np.einsum("xp,yp->xyp", u, v).reshape(-1, u.shape[1])
        panel = np.repeat(panel, c, axis=1)
        out = self.b_atoms[:, None, :] * panel[None, :, :]
        return np.sqrt(self.beta0) * out.reshape(-1, self.num_atoms)


def build_tensor_dictionary(cfg: ArrayConfig, grid: SamplingGrid, w: MeasurementMatrix,
                            beta0: float = 1.0) -> TensorDictionary:
    theta, phi = grid.pair_angles()
    dc = geometry.direction_cosines(theta, phi)
    k = cfg.wavenumber
    u = np.exp(-1j * k * cfg.d * np.outer(np.arange(cfg.n_x), dc.psi))
    v = np.exp(-1j * k * cfg.d * np.outer(np.arange(cfg.n_y), dc.phi_c))
    psi, phi_c, omega, r = grid.cosines()
    r_m0 = geometry.distances_from_offsets(geometry.uav_offsets(cfg), psi, phi_c, omega, r)
    b = np.exp(-1j * k * r_m0) / r_m0
    pu, pv = w.sense_panel(u, v)
    return TensorDictionary(grid=grid, u_atoms=u, v_atoms=v, b_atoms=b,
                            projected_u=pu, projected_v=pv, beta0=beta0, measurement=w)


@dataclass(frozen=True)
class SdDictionary:
    """Flat spherical-domain dictionary: one SWM column per grid triple."""

    columns: np.ndarray
    grid: SamplingGrid
    beta0: float = 1.0

    @property
    def num_atoms(self) -> int:
        return self.columns.shape[1]

    def sensed(self, w: MeasurementMatrix) -> np.ndarray:
        """``W^H G``."""
        return w.sense(self.columns)


DEFAULT_MEMORY_BUDGET = 1 << 30


def build_sd_dictionary(cfg: ArrayConfig, grid: SamplingGrid, beta0: float = 1.0,
                        memory_budget: int = DEFAULT_MEMORY_BUDGET) -> SdDictionary:
    need = grid.size * cfg.num_elements * np.dtype(complex).itemsize
    if need > memory_budget:
        raise MemoryBudgetError(
            f"SD dictionary needs {need / 2**20:.0f} MiB (U={grid.size} atoms x {cfg.num_elements} "
            f"elements), budget is {memory_budget / 2**20:.0f} MiB; use a coarser grid")
    psi, phi_c, omega, r = grid.cosines()
    cols = wavefront.swm_from_cosines(cfg, psi, phi_c, omega, r, beta0)
    return SdDictionary(columns=cols, grid=grid, beta0=beta0)


# --- binary cache --------------------------------------------------------------------

CACHE_MAGIC = b"NFSWDIC"
CACHE_VERSION = 1
_DTYPE_CODES = {np.dtype(np.complex64): 1, np.dtype(np.complex128): 2}


def content_hash(*parts) -> str:
    """SHA-256 over the canonical JSON of the given parts."""
    blob = json.dumps(parts, sort_keys=True, default=_jsonable).encode()
    return hashlib.sha256(blob).hexdigest()


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if isinstance(obj, (np.integer, np.floating)):
        return obj.item()
    raise TypeError(f"cannot hash {type(obj).__name__}")


def dictionary_key(cfg: ArrayConfig, grid: SamplingGrid, seed=None, kind: str = "sd") -> str:
    return content_hash(kind, cfg.to_dict(), grid.to_dict(), seed)


def save_array(path, array: np.ndarray) -> None:
    """Write magic, version, dtype code, rank, dims, then the row-major payload."""
    array = np.ascontiguousarray(array)
    code = _DTYPE_CODES.get(array.dtype)
    if code is None:
        raise DomainError(f"unsupported cache dtype {array.dtype}")
    header = CACHE_MAGIC + struct.pack("<BBB", CACHE_VERSION, code, array.ndim)
    header += struct.pack(f"<{array.ndim}Q", *array.shape)
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(array.astype(array.dtype.newbyteorder("<"), copy=False).tobytes(order="C"))
    tmp.replace(path)


def load_array(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(len(CACHE_MAGIC)) != CACHE_MAGIC:
            raise DomainError(f"{path} is not a dictionary cache file")
        version, code, ndim = struct.unpack("<BBB", fh.read(3))
        if version != CACHE_VERSION:
            raise DomainError(f"cache version {version} unsupported (expected {CACHE_VERSION})")
        dims = struct.unpack(f"<{ndim}Q", fh.read(8 * ndim))
        dtype = {v: k for k, v in _DTYPE_CODES.items()}[code].newbyteorder("<")
        payload = fh.read()
    if len(payload) != int(np.prod(dims)) * dtype.itemsize:
        raise DomainError(f"{path} is truncated")
    return np.frombuffer(payload, dtype=dtype).reshape(dims).astype(dtype.newbyteorder("="))


def cached_sd_dictionary(cfg: ArrayConfig, grid: SamplingGrid, beta0: float = 1.0,
                         cache_dir=None, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> SdDictionary:
    """Build the SD dictionary, reusing ``cache_dir/<hash>.nfd`` when present."""
    if cache_dir is None:
        return build_sd_dictionary(cfg, grid, beta0, memory_budget)
    path = Path(cache_dir) / f"{dictionary_key(cfg, grid, beta0)}.nfd"
    if path.exists():
        return SdDictionary(columns=load_array(path), grid=grid, beta0=beta0)
    sd = build_sd_dictionary(cfg, grid, beta0, memory_budget)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_array(path, sd.columns)
    return sd
