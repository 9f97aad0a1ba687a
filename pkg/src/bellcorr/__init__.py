"""Facets of bipartite Bell correlation polytopes and their quantum violations."""

__version__ = "0.1.0"

from .exactlin import RationalMatrix, lex_compare, rank
from .polytope import (Facet, Vertex, classical_value, enumerate_facets, generate_vertices,
                       verify_facet, verify_hv_equivalence)
from .symmetry import (GroupElement, SymmetryClass, SymmetryGroup, apply_symmetry, canonical_form,
                       classify)
from .quantum import (UnitConfig, analytic_value, dual_certificate, half_step_x, half_step_y,
                      kg_constant, lucky_solve, objective, quantum_value_certified, seesaw,
                      stationarity_residuals, tsirelson_realize)

__all__ = [
    "RationalMatrix", "lex_compare", "rank",
    "Facet", "Vertex", "classical_value", "enumerate_facets", "generate_vertices",
    "verify_facet", "verify_hv_equivalence",
    "GroupElement", "SymmetryClass", "SymmetryGroup", "apply_symmetry", "canonical_form", "classify",
    "UnitConfig", "analytic_value", "dual_certificate", "half_step_x", "half_step_y", "kg_constant",
    "lucky_solve", "objective", "quantum_value_certified", "seesaw", "stationarity_residuals",
    "tsirelson_realize",
]
