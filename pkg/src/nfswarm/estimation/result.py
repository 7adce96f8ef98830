"""Container returned by every estimator."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class EstimationResult:
    """Outcome of one channel estimate.

    Attributes
    ----------
    support : tuple of (a, b, c)
        Grid triples in selection order.
    indices : tuple of int
        Flat grid indices of ``support``.
    gains : ndarray
        Complex coefficients of the selected (or refined) atoms.
    refined_params : tuple of (theta, phi, r)
        Off-grid estimates; empty for on-grid results.
    channel_estimate : ndarray
        Length ``M*N`` channel reconstruction.
    residual_history : tuple of float
        Residual norm after each selection step.
    objective_evals : int
        Off-grid objective evaluations spent.
    projection_flops : int
        Complex multiply-accumulates spent in correlation steps, summed over iterations.
    projection_seconds : float
        Wall time spent in correlation steps.
    """

    method: str
    support: tuple
    indices: tuple
    gains: np.ndarray
    channel_estimate: np.ndarray
    residual_history: tuple = ()
    refined_params: tuple = ()
    objective_evals: int = 0
    projection_flops: int = 0
    projection_seconds: float = 0.0
    converged: bool = True
    objective_start: float | None = None
    objective_final: float | None = None
    grid: object = field(default=None, repr=False, compare=False)

    @property
    def sparsity(self) -> int:
        return len(self.indices)

    @property
    def flops_per_iteration(self) -> float:
        return self.projection_flops / max(self.sparsity, 1)

    def with_updates(self, **changes) -> "EstimationResult":
        return replace(self, **changes)
