"""Periodic-orbit zeta functions and transfer operators for piecewise monotone
interval maps with bounded-variation weights."""

__version__ = "0.1.0"

from .maps import Branch, MapError, PiecewiseMonotoneMap, TriState, eval_map, branch_inverse
from .weights import (
    AffineWeight,
    ConstantWeight,
    ReciprocalDerivativeWeight,
    build_weight,
    orbit_weight_product,
)
from .symbolic import SymbolWord, detect_markov, itinerary, refine_cylinders
from .periodic import build_representative_set, representativity_certificate, trace_sums
from .series import d_series_from_traces, find_zeros_in_disk, markov_determinant_oracle, zeta_series
from .spectral import bk_crosscheck, eigen_spectrum, exact_transfer_matrix, theta_estimate, ulam_matrix
from .pressure import pressure_from_orbits, verify_pressure_bounds
from .validation import validate_map
from .config import ConfigError, RunConfig, parse_config
from .pipeline import VerifyReport, run_verify

__all__ = [
    "AffineWeight", "Branch", "ConfigError", "ConstantWeight", "MapError", "PiecewiseMonotoneMap",
    "ReciprocalDerivativeWeight", "RunConfig", "SymbolWord", "TriState", "VerifyReport",
    "bk_crosscheck", "branch_inverse", "build_representative_set", "build_weight",
    "d_series_from_traces", "detect_markov", "eigen_spectrum", "eval_map", "exact_transfer_matrix",
    "find_zeros_in_disk", "itinerary", "markov_determinant_oracle", "orbit_weight_product",
    "parse_config", "pressure_from_orbits", "refine_cylinders", "representativity_certificate",
    "run_verify", "theta_estimate", "trace_sums", "ulam_matrix", "validate_map",
    "verify_pressure_bounds", "zeta_series",
]
