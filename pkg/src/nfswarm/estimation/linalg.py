"""Least-squares refit shared by the greedy estimators."""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from ..errors import RankDeficientError

RANK_TOL = 1e-10


def least_squares(x: np.ndarray, y: np.ndarray, atoms=None) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``min ||y - x z||`` through a thin QR factorisation.

    Returns ``(z, residual)``. A numerically dependent column raises
    :class:`RankDeficientError` naming the offending atoms (``atoms`` labels
    the columns of ``x``; defaults to column positions).
    """
    q, r = np.linalg.qr(x)
    diag = np.abs(np.diagonal(r))
    scale = diag.max() if diag.size else 0.0
    bad = np.flatnonzero(diag <= RANK_TOL * max(scale, np.finfo(float).tiny))
    if bad.size:
        labels = list(range(x.shape[1])) if atoms is None else list(atoms)
        colliding = [labels[i] for i in bad]
        raise RankDeficientError(f"selected atoms are linearly dependent: {colliding} "
                                 f"among {labels}", atoms=colliding)
    z = solve_triangular(r, q.conj().T @ y)
    return z, y - x @ z
