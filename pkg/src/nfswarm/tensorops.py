"""Small dense tensor helpers with a pinned vectorisation order.

A third-order tensor is a plain ``ndarray`` of shape ``(I, J, K)``; ``vec``
stacks it with the first index fastest (linear index ``i + I*j + I*J*k``).
With this order ``vec(outer3(v, u, b)) == kron(b, u, v)``, which is how a
received-signal tensor of shape ``(Q_y, Q_x, M)`` lines up with the stacked
measurement vector of the swarm.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DomainError


def vec(t: np.ndarray) -> np.ndarray:
    """Flatten with the first mode fastest."""
    return np.asarray(t).ravel(order="F")


def devec(x: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`vec`."""
    x = np.asarray(x)
    dims = tuple(int(d) for d in dims)
    if x.ndim != 1 or x.size != int(np.prod(dims)):
        raise DomainError(f"cannot devectorise length {x.size} into {dims}")
    return x.reshape(dims, order="F")


def mode_product(t: np.ndarray, w: np.ndarray, mode: int, conjugate: bool = False) -> np.ndarray:
    """Contract mode ``mode`` (1-based) of ``t`` with vector ``w``.

    The contracted axis is removed, so a third-order tensor gives a matrix.
    With ``conjugate`` set the vector is conjugated first (Hermitian correlation).
    """
    t = np.asarray(t)
    w = np.asarray(w)
    if not 1 <= mode <= t.ndim:
        raise DomainError(f"mode {mode} invalid for an order-{t.ndim} tensor")
    if w.ndim != 1 or w.shape[0] != t.shape[mode - 1]:
        raise DomainError(f"vector length {w.shape} does not match mode-{mode} size {t.shape[mode - 1]}")
    if conjugate:
        w = w.conj()
    return np.tensordot(t, w, axes=([mode - 1], [0]))


def contract_all(t: np.ndarray, vectors: Sequence[np.ndarray], conjugate: bool = True):
    """Chain ``t x_1 w_1 x_2 w_2 ...`` down to a scalar for a full set of vectors."""
    out = np.asarray(t)
    for w in vectors:
        out = mode_product(out, w, 1, conjugate=conjugate)
    return out[()] if out.ndim == 0 else out


def outer3(v: np.ndarray, u: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rank-one tensor with entries ``v[i] * u[j] * b[k]``."""
    v, u, b = (np.asarray(a) for a in (v, u, b))
    if min(v.size, u.size, b.size) == 0:
        raise DomainError("outer3 needs nonempty vectors")
    return v[:, None, None] * u[None, :, None] * b[None, None, :]


def kron(*vectors: np.ndarray) -> np.ndarray:
    """Kronecker product of several vectors, rightmost factor fastest."""
    if not vectors:
        raise DomainError("kron needs at least one vector")
    return reduce(np.kron, (np.asarray(v).ravel() for v in vectors))
