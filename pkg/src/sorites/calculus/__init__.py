"""Difference calculus on interval meshes."""
from __future__ import annotations

from .elementary import (
    SeriesTail,
    exp_partial,
    exp_product,
    exp_tail_bound,
    log_search,
    power_general,
    root_search,
    series_tail_profile,
)
from .grid import (
    DifferentiabilityReport,
    Extrema,
    GridFn,
    InverseResult,
    TaylorReport,
    compose,
    diff_quotient,
    differentiability_verdict,
    extrema,
    grid_sum,
    inverse_function,
    mean_value_solve,
    restrict,
    taylor_residual,
)
from .multi import MultiGridFn, implicit_solve, mixed_partial_check, partial_diff
from .ode import Affine, GronwallReport, OdeBoundError, euler_ode, gronwall_check

__all__ = [
    "SeriesTail", "exp_partial", "exp_product", "exp_tail_bound", "log_search", "power_general",
    "root_search", "series_tail_profile", "DifferentiabilityReport", "Extrema", "GridFn",
    "InverseResult", "TaylorReport", "compose", "diff_quotient", "differentiability_verdict",
    "extrema", "grid_sum", "inverse_function", "mean_value_solve", "restrict", "taylor_residual",
    "MultiGridFn", "implicit_solve", "mixed_partial_check", "partial_diff", "Affine",
    "GronwallReport", "OdeBoundError", "euler_ode", "gronwall_check",
]
