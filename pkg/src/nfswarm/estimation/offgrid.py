"""Continuous refinement of on-grid estimates with Nelder-Mead.

The refined atoms are always spherical-wave responses, also after tensor-OMP
selected hybrid-model atoms, so refinement doubles as a model correction. The
objective is the normalised residual ``||y - A A^+ y|| / ||y||`` with
``A = W^H G_hat(theta, phi, r)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import geometry, tensorops, wavefront
from ..errors import DomainError
from ..geometry import ArrayConfig
from ..sensing import MeasurementMatrix
from .neldermead import NelderMeadOptions, initial_simplex, nelder_mead
from .result import EstimationResult

ANGLE_STEP_CAP = 0.5


@dataclass(frozen=True)
class RefineSetup:
    """How the parameter vector maps onto paths.

    ``fixed_range`` set means only angles are refined and every path sits at
    that range (far-field variant).
    """

    angle_resolution: float
    delta: float
    r_min: float
    r_max: float
    fixed_range: float | None = None

    @property
    def per_path(self) -> int:
        return 2 if self.fixed_range is not None else 3

    def bounds(self, num_paths: int):
        if self.fixed_range is not None:
            lo, hi = [0.0, -math.pi / 2], [math.pi, math.pi / 2]
        else:
            lo = [0.0, -math.pi / 2, self.r_min / 2]
            hi = [math.pi, math.pi / 2, 2 * self.r_max]
        return np.tile(lo, num_paths), np.tile(hi, num_paths)

    def steps(self, x0: np.ndarray) -> np.ndarray:
        """Half a grid cell per coordinate, mapped from the sampled variables."""
        p = x0.reshape(-1, self.per_path)
        half = self.angle_resolution / 2
        st = np.empty_like(p)
        st[:, 0] = np.minimum(half / np.maximum(np.abs(np.sin(p[:, 0])), 1e-6), ANGLE_STEP_CAP)
        st[:, 1] = np.minimum(half / np.maximum(np.abs(np.cos(p[:, 1])), 1e-6), ANGLE_STEP_CAP)
        if self.fixed_range is None:
            st[:, 2] = p[:, 2] ** 2 * self.delta / 2
        return st.ravel()

    def unpack(self, x: np.ndarray):
        p = x.reshape(-1, self.per_path)
        r = np.full(len(p), self.fixed_range) if self.fixed_range is not None else p[:, 2]
        return p[:, 0], p[:, 1], r

    def pack(self, triples) -> np.ndarray:
        rows = [t[:self.per_path] for t in triples]
        return np.asarray(rows, dtype=float).ravel()

    @classmethod
    def from_grid(cls, grid, fixed_range=None) -> "RefineSetup":
        return cls(angle_resolution=grid.angle_resolution, delta=grid.delta,
                   r_min=grid.r_min, r_max=grid.r_max, fixed_range=fixed_range)


def swm_atoms(cfg: ArrayConfig, theta, phi, r, beta0: float = 1.0) -> np.ndarray:
    """Spherical-wave columns for a set of paths, shape ``(M*N, L)``."""
    theta, phi, r = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (theta, phi, r))
    dc = geometry.direction_cosines(theta, phi)
    return wavefront.swm_from_cosines(cfg, dc.psi, dc.phi_c, dc.omega, r, beta0)


def projection_residual(y: np.ndarray, sensed: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(gains, y - A gains)`` with ``gains = A^+ y`` (minimum-norm least squares)."""
    gains, *_ = np.linalg.lstsq(sensed, y, rcond=None)
    return gains, y - sensed @ gains


def make_objective(y, w: MeasurementMatrix, cfg: ArrayConfig, setup: RefineSetup, beta0=1.0):
    y_norm = float(np.linalg.norm(y))
    scale = 1.0 / y_norm if y_norm > 0 else 1.0

    def objective(x):
        theta, phi, r = setup.unpack(np.asarray(x))
        sensed = w.sense(swm_atoms(cfg, theta, phi, r, beta0))
        _, res = projection_residual(y, sensed)
        return float(np.linalg.norm(res)) * scale

    return objective


def refine(y: np.ndarray, start_triples, w: MeasurementMatrix, cfg: ArrayConfig,
           setup: RefineSetup, beta0: float = 1.0, nm_opts: NelderMeadOptions | None = None):
    """Run Nelder-Mead from ``start_triples``; returns the best triples, gains, channel, stats."""
    nm_opts = nm_opts or NelderMeadOptions()
    objective = make_objective(y, w, cfg, setup, beta0)
    x0 = setup.pack(start_triples)
    lo, hi = setup.bounds(len(start_triples))
    x0 = np.clip(x0, lo, hi)
    f0 = objective(x0)
    out = nelder_mead(objective, x0, nm_opts, bounds=(lo, hi),
                      simplex=initial_simplex(x0, setup.steps(x0)))
    x = out.x if out.fun <= f0 else x0
    theta, phi, r = setup.unpack(x)
    g_hat = swm_atoms(cfg, theta, phi, r, beta0)
    gains, _ = projection_residual(y, w.sense(g_hat))
    triples = tuple((float(a), float(b), float(c)) for a, b, c in zip(theta, phi, r))
    return dict(refined_params=triples, gains=gains, channel_estimate=g_hat @ gains,
                objective_evals=out.evaluations + 1, converged=out.converged,
                objective_start=f0, objective_final=min(out.fun, f0))


def _start_triples(result: EstimationResult):
    if result.grid is None:
        raise DomainError("on-grid result carries no grid; cannot seed refinement")
    return [result.grid.triple(k) for k in result.indices]


def sd_omp_offgrid(result: EstimationResult, y: np.ndarray, w: MeasurementMatrix,
                   cfg: ArrayConfig, beta0: float = 1.0,
                   nm_opts: NelderMeadOptions | None = None,
                   fixed_range: float | None = None, method: str = "sd_offgrid") -> EstimationResult:
    """Refine an SD-OMP support jointly over all ``(theta, phi, r)``.

    With ``fixed_range`` the ranges stay pinned and only angles move.
    """
    starts = _start_triples(result)
    setup = RefineSetup.from_grid(result.grid, fixed_range)
    out = refine(np.asarray(y), starts, w, cfg, setup, beta0, nm_opts)
    return result.with_updates(method=method, **out)


def tensor_omp_offgrid(result: EstimationResult, y_tensor: np.ndarray, w: MeasurementMatrix,
                       cfg: ArrayConfig, beta0: float = 1.0,
                       nm_opts: NelderMeadOptions | None = None) -> EstimationResult:
    """Refine a tensor-OMP support against ``vec(Y)`` with spherical-wave atoms."""
    starts = _start_triples(result)
    setup = RefineSetup.from_grid(result.grid)
    y = tensorops.vec(np.asarray(y_tensor))
    out = refine(y, starts, w, cfg, setup, beta0, nm_opts)
    return result.with_updates(method="tensor_offgrid", **out)
