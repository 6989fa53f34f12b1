"""Finite, scale-relative analysis over exact rationals."""
from __future__ import annotations

__version__ = "0.1.0"

from .kernels import BACKEND
from .scale import (
    Comparison,
    Magnitude,
    ScaleContext,
    SoritesWitness,
    as_rational,
    classify,
    compare,
    decimal_preview,
    format_rational,
    snap_to_mesh,
    sorites_witness,
)
from .exact import ExactArray
from .continuum import (
    CarrierMap,
    GridInterval,
    MeshContinuum,
    WeightedGraph,
    build_graph_metric,
    build_grid,
    continuity_report,
    morphism_check,
)
from .topology import compactness_profile, connected_components, covering_number, packing_number, sorites_path
from .words import gen_associahedron, gen_free_group_ball, word_continuum

__all__ = [
    "__version__", "BACKEND", "Comparison", "Magnitude", "ScaleContext", "SoritesWitness", "as_rational",
    "classify", "compare", "decimal_preview", "format_rational", "snap_to_mesh", "sorites_witness",
    "ExactArray", "CarrierMap", "GridInterval", "MeshContinuum", "WeightedGraph", "build_graph_metric",
    "build_grid", "continuity_report", "morphism_check", "compactness_profile", "connected_components",
    "covering_number", "packing_number", "sorites_path", "gen_associahedron", "gen_free_group_ball",
    "word_continuum",
]
