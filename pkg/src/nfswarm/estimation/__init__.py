"""Sparse channel estimators and their building blocks."""

from .baseline import ls_baseline
from .linalg import least_squares
from .neldermead import NelderMeadOptions, NelderMeadResult, initial_simplex, nelder_mead
from .offgrid import RefineSetup, sd_omp_offgrid, swm_atoms, tensor_omp_offgrid
from .omp import (omp, sd_omp_ongrid, sd_projection_flops, sense_sd_dictionary, tensor_atom_norms,
                  tensor_omp_ongrid, tensor_projection, tensor_projection_flops)
from .result import EstimationResult

__all__ = [
    "EstimationResult", "NelderMeadOptions", "NelderMeadResult", "RefineSetup",
    "initial_simplex", "least_squares", "ls_baseline", "nelder_mead", "omp", "sd_omp_offgrid",
    "sd_omp_ongrid", "sd_projection_flops", "sense_sd_dictionary", "swm_atoms",
    "tensor_atom_norms", "tensor_omp_offgrid", "tensor_omp_ongrid", "tensor_projection",
    "tensor_projection_flops",
]
