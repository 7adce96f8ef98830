"""Derivative-free simplex minimiser with box clamping."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from ..errors import DomainError

REFLECT, EXPAND, CONTRACT, SHRINK = 1.0, 2.0, 0.5, 0.5


@dataclass(frozen=True)
class NelderMeadOptions:
    """``tol`` bounds the objective spread across the simplex at termination."""

    max_iter: int = 400
    tol: float = 1e-8
    initial_step: float = 0.05

    def __post_init__(self):
        if self.max_iter < 0 or not self.tol >= 0:
            raise DomainError("max_iter and tol must be non-negative")


class NelderMeadResult(NamedTuple):
    x: np.ndarray
    fun: float
    iterations: int
    converged: bool
    evaluations: int


def initial_simplex(x0: np.ndarray, steps) -> np.ndarray:
    """``x0`` plus one vertex per coordinate, offset by ``steps[i]`` along axis ``i``."""
    x0 = np.asarray(x0, dtype=float)
    steps = np.broadcast_to(np.asarray(steps, dtype=float), x0.shape)
    return np.vstack([x0, x0 + np.diag(steps)])


def nelder_mead(fun: Callable[[np.ndarray], float], x0, opts: NelderMeadOptions | None = None,
                bounds=None, simplex: np.ndarray | None = None) -> NelderMeadResult:
    """Minimise ``fun`` starting from ``x0``.

    Parameters
    ----------
    bounds : (lower, upper), optional
        Every candidate point is clamped into the box before evaluation.
    simplex : ndarray, optional
        ``(n+1, n)`` starting vertices; by default ``x0`` plus axis steps of
        ``opts.initial_step * max(|x0_i|, 1)``.

    The best vertex never gets worse, so ``fun(result.x) <= fun(x0)`` whenever
    ``x0`` is a vertex of the starting simplex.
    """
    opts = opts or NelderMeadOptions()
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim != 1 or x0.size == 0:
        raise DomainError("x0 must be a nonempty vector")
    n = x0.size
    if bounds is not None:
        lo, hi = (np.broadcast_to(np.asarray(b, dtype=float), x0.shape) for b in bounds)
        clamp = lambda x: np.clip(x, lo, hi)  # noqa: E731
    else:
        clamp = lambda x: x  # noqa: E731
    evals = 0

    def f(x):
        nonlocal evals
        evals += 1
        val = float(fun(x))
        if not np.isfinite(val):
            raise DomainError(f"objective is not finite ({val}) at {x.tolist()}")
        return val

    if simplex is None:
        simplex = initial_simplex(x0, opts.initial_step * np.maximum(np.abs(x0), 1.0))
    pts = np.array([clamp(p) for p in np.asarray(simplex, dtype=float)])
    if pts.shape != (n + 1, n):
        raise DomainError(f"simplex must have shape {(n + 1, n)}, got {pts.shape}")
    vals = np.array([f(p) for p in pts])

    it = 0
    converged = False
    while True:
        order = np.argsort(vals, kind="stable")
        pts, vals = pts[order], vals[order]
        if vals[-1] - vals[0] <= opts.tol:
            converged = True
            break
        if it >= opts.max_iter:
            break
        it += 1
        centroid = pts[:-1].mean(axis=0)
        xr = clamp(centroid + REFLECT * (centroid - pts[-1]))
        fr = f(xr)
        if fr < vals[0]:
            xe = clamp(centroid + EXPAND * (xr - centroid))
            fe = f(xe)
            pts[-1], vals[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < vals[-2]:
            pts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[-1]:
            xc = clamp(centroid + CONTRACT * (xr - centroid))
            fc = f(xc)
            if fc <= fr:
                pts[-1], vals[-1] = xc, fc
                continue
        else:
            xc = clamp(centroid + CONTRACT * (pts[-1] - centroid))
            fc = f(xc)
            if fc < vals[-1]:
                pts[-1], vals[-1] = xc, fc
                continue
        pts[1:] = np.array([clamp(pts[0] + SHRINK * (p - pts[0])) for p in pts[1:]])
        vals[1:] = [f(p) for p in pts[1:]]
    return NelderMeadResult(x=pts[0].copy(), fun=float(vals[0]), iterations=it,
                            converged=converged, evaluations=evals)
