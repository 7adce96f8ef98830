"""Linear least-squares baseline."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from ..sensing import MeasurementMatrix


def ls_baseline(y: np.ndarray, w: MeasurementMatrix, regularization: float = 0.0) -> np.ndarray:
    """Minimum-norm solution of ``W^H h = y``, one UAV block at a time.

    With ``Q = N`` per axis this inverts the combiner exactly; with ``Q < N``
    the component of ``h`` outside the span of ``W`` is lost. A positive
    ``regularization`` gives the ridge form ``W (W^H W + lambda I)^-1 y``.
    """
    if regularization < 0:
        raise DomainError("regularization must be non-negative")
    w0 = w.per_uav
    n, q = w0.shape
    y = np.asarray(y)
    if y.size % q:
        raise DomainError(f"measurement length {y.size} is not a multiple of Q={q}")
    if regularization > 0:
        gram = w0.conj().T @ w0 + regularization * np.eye(q)
        op = w0 @ np.linalg.inv(gram)
    else:
        op = np.linalg.pinv(w0.conj().T)
    return (y.reshape(-1, q) @ op.T).ravel()
