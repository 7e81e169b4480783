"""Weights, Stokes data, integral structures and radial solutions of the tt*-Toda equations."""

__version__ = "0.1.0"

from .cyclotomic import CycNumber, CycPolynomial, root_of_unity
from .weights import (WeightTuple, validate_weights, normalize_weights, stable_decomposition,
                      find_pairing, asymptotic_profile, toda_symmetry)
from .stokes import StokesSystem, build_system
from .integrality import z_structure_base, gamma_decision, pullback_check
from .numerics import ConnectionSpec, NumericFailure, monodromy_numeric, stokes_numeric
from .toda import TodaProblem, solve_bvp, verify_solution

__all__ = [
    "CycNumber", "CycPolynomial", "root_of_unity", "WeightTuple", "validate_weights",
    "normalize_weights", "stable_decomposition", "find_pairing", "asymptotic_profile",
    "toda_symmetry", "StokesSystem", "build_system", "z_structure_base", "gamma_decision",
    "pullback_check", "ConnectionSpec", "NumericFailure", "monodromy_numeric",
    "stokes_numeric", "TodaProblem", "solve_bvp", "verify_solution",
]
