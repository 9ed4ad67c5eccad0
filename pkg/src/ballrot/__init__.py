"""Spectral theory of curl and grad-div in a ball: eigenfields, projections and solvers."""

from .ballgrid import BallGrid, FieldSamples, build_grid, inner_product, l2_norm
from .eigenbasis import Basis, Mode, enumerate_modes, eval_mode, normal_trace
from .exceptions import (BallrotError, BracketError, ChecksumError, DomainError,
                         FamilyMismatchError, FormatError, GridMismatchError, IllPosedError)
from .harmonics import AngularIndex, real_sph_harm, sph_harm_surface_grad
from .solver import (AnalyticField, Decomposition, ModeCombination, Solution, SpectralBases,
                     build_bases, helmholtz_decompose, make_preset, residual, solve_problem1,
                     solve_problem2)
from .specfun import build_zero_table, curl_zeros, dpsi, graddiv_zeros, psi
from .spectral import (FredholmReport, SpectralCoefficients, apply_Nd, apply_S,
                       operator_bound_constants, project, resolvent_curl, resolvent_graddiv,
                       synthesize)

__version__ = "0.1.0"

__all__ = [
    "AnalyticField", "AngularIndex", "BallGrid", "BallrotError", "Basis", "BracketError",
    "ChecksumError", "Decomposition", "DomainError", "FamilyMismatchError", "FieldSamples",
    "FormatError", "FredholmReport", "GridMismatchError", "IllPosedError", "Mode",
    "ModeCombination", "Solution", "SpectralBases", "SpectralCoefficients", "apply_Nd",
    "apply_S", "build_bases", "build_grid", "build_zero_table", "curl_zeros", "dpsi",
    "enumerate_modes", "eval_mode", "graddiv_zeros", "helmholtz_decompose", "inner_product",
    "l2_norm", "make_preset", "normal_trace", "operator_bound_constants", "project", "psi",
    "real_sph_harm", "residual", "resolvent_curl", "resolvent_graddiv", "solve_problem1",
    "solve_problem2", "sph_harm_surface_grad", "synthesize",
]
