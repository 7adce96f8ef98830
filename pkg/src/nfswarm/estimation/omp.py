"""Greedy on-grid estimators: flat OMP, SD-OMP and tensor-OMP.

All variants run a fixed number ``L`` of iterations (optionally stopping early
once the residual falls below ``tol * ||y||``). Each iteration picks the atom
with the largest normalised correlation, excluding atoms already chosen, with
the lowest flat index winning ties, then refits all gains by least squares
against the full measurement and recomputes the residual from it.
"""

from __future__ import annotations

import time

import numpy as np

from .. import tensorops
from ..errors import DomainError
from ..sensing import MeasurementMatrix, SdDictionary, TensorDictionary
from .linalg import least_squares
from .result import EstimationResult


def _check_sparsity(sparsity: int, num_atoms: int):
    if not 1 <= sparsity <= num_atoms:
        raise DomainError(f"sparsity must lie in [1, {num_atoms}], got {sparsity}")


def _pick(scores: np.ndarray, excluded: list[int]) -> int:
    scores = scores.copy()
    scores[excluded] = -np.inf
    return int(np.argmax(scores))


def omp(y: np.ndarray, atoms: np.ndarray, sparsity: int, tol: float | None = None,
        norms: np.ndarray | None = None):
    """Orthogonal matching pursuit over the columns of ``atoms``.

    Returns ``(indices, gains, residual_history, flops, seconds)``.
    """
    y = np.asarray(y)
    if atoms.shape[0] != y.shape[0]:
        raise DomainError(f"dictionary has {atoms.shape[0]} rows, measurement has {y.shape[0]}")
    _check_sparsity(sparsity, atoms.shape[1])
    if norms is None:
        norms = np.linalg.norm(atoms, axis=0)
    norms = np.where(norms > 0, norms, np.inf)
    a_h = atoms.conj().T
    residual = y.copy()
    y_norm = np.linalg.norm(y)
    chosen: list[int] = []
    history: list[float] = []
    gains = np.zeros(0, dtype=complex)
    flops, seconds = 0, 0.0
    for _ in range(sparsity):
        t0 = time.perf_counter()
        scores = np.abs(a_h @ residual) / norms
        seconds += time.perf_counter() - t0
        flops += atoms.size
        chosen.append(_pick(scores, chosen))
        gains, residual = least_squares(atoms[:, chosen], y, chosen)
        history.append(float(np.linalg.norm(residual)))
        if tol is not None and history[-1] <= tol * y_norm:
            break
    return chosen, gains, history, flops, seconds


def sense_sd_dictionary(sd: SdDictionary, w: MeasurementMatrix) -> np.ndarray:
    """``W^H G``; compute once and reuse across measurements."""
    return sd.sensed(w)


def sd_omp_ongrid(y: np.ndarray, w: MeasurementMatrix, dictionary: SdDictionary, sparsity: int,
                  sensed: np.ndarray | None = None, tol: float | None = None) -> EstimationResult:
    """OMP over the sensed spherical-domain dictionary; ``h = G z``.

    Correlations are normalised by the sensed-atom norms ``||W^H g||``.
    """
    if sensed is None:
        sensed = sense_sd_dictionary(dictionary, w)
    idx, gains, hist, flops, secs = omp(y, sensed, sparsity, tol)
    grid = dictionary.grid
    return EstimationResult(
        method="sd_ongrid", support=tuple(grid.unravel(k) for k in idx), indices=tuple(idx),
        gains=gains, channel_estimate=dictionary.columns[:, idx] @ gains,
        residual_history=tuple(hist), projection_flops=flops, projection_seconds=secs, grid=grid)


def tensor_projection(r: np.ndarray, td: TensorDictionary) -> np.ndarray:
    """Correlation of residual tensor ``r`` (Q_y x Q_x x M) with every atom, flat order.

    Contracts mode 1 with ``v_bar`` and mode 2 with ``u_bar`` once per angle
    pair, then sweeps the range bins of that pair against ``b``.
    """
    qy, qx, m = r.shape
    pv, pu = td.projected_v, td.projected_u
    if pv.shape[0] != qy or pu.shape[0] != qx or td.b_atoms.shape[0] != m:
        raise DomainError(f"residual shape {r.shape} does not match the dictionary "
                          f"({pv.shape[0]}, {pu.shape[0]}, {td.b_atoms.shape[0]})")
    t1 = (r.reshape(qy, qx * m).T @ pv.conj()).reshape(qx, m, -1)
    t2 = np.einsum("xmp,xp->mp", t1, pu.conj())
    corr = np.einsum("mp,mpc->pc", t2, td.b_cube.conj())
    return np.sqrt(td.beta0) * corr.ravel()


def tensor_projection_flops(td: TensorDictionary) -> int:
    """Multiply-accumulates in one :func:`tensor_projection` call."""
    qx, qy, m = td.projected_u.shape[0], td.projected_v.shape[0], td.b_atoms.shape[0]
    ab = td.grid.num_angle_pairs
    return ab * qy * qx * m + ab * qx * m + td.num_atoms * m


def tensor_atom_norms(td: TensorDictionary) -> np.ndarray:
    """``sqrt(beta0) ||v_bar|| ||u_bar|| ||b||`` per atom, flat order."""
    c = td.grid.shape[2]
    panel = np.linalg.norm(td.projected_u, axis=0) * np.linalg.norm(td.projected_v, axis=0)
    return np.sqrt(td.beta0) * np.repeat(panel, c) * np.linalg.norm(td.b_atoms, axis=0)


def tensor_omp_ongrid(y_tensor: np.ndarray, dictionary: TensorDictionary, sparsity: int,
                      tol: float | None = None) -> EstimationResult:
    """Tensor-OMP with separable projections; gains refit against ``vec(Y)``."""
    td = dictionary
    y_tensor = np.asarray(y_tensor)
    _check_sparsity(sparsity, td.num_atoms)
    y = tensorops.vec(y_tensor)
    norms = tensor_atom_norms(td)
    norms = np.where(norms > 0, norms, np.inf)
    flops_each = tensor_projection_flops(td)
    residual = y_tensor
    chosen: list[int] = []
    columns: list[np.ndarray] = []
    history: list[float] = []
    gains = np.zeros(0, dtype=complex)
    flops, seconds = 0, 0.0
    y_norm = np.linalg.norm(y)
    for _ in range(sparsity):
        t0 = time.perf_counter()
        scores = np.abs(tensor_projection(residual, td)) / norms
        seconds += time.perf_counter() - t0
        flops += flops_each
        k = _pick(scores, chosen)
        chosen.append(k)
        columns.append(td.sensed_atom(k))
        gains, res_vec = least_squares(np.stack(columns, axis=1), y, chosen)
        residual = tensorops.devec(res_vec, y_tensor.shape)
        history.append(float(np.linalg.norm(res_vec)))
        if tol is not None and history[-1] <= tol * y_norm:
            break
    h = sum(g * td.atom(k) for g, k in zip(gains, chosen))
    return EstimationResult(
        method="tensor_ongrid", support=tuple(td.grid.unravel(k) for k in chosen),
        indices=tuple(chosen), gains=gains, channel_estimate=np.asarray(h),
        residual_history=tuple(history), projection_flops=flops, projection_seconds=seconds,
        grid=td.grid)


def sd_projection_flops(sensed: np.ndarray) -> int:
    return int(sensed.size)
