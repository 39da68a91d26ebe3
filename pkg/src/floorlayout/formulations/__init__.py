"""Pairwise formulations and N-box model assembly."""

from .assemble import (
    AssemblyOptions,
    area_violations,
    assemble_nbox,
    branch_priorities,
    layout_from_point,
    refine_area,
    solve_with_area_refinement,
)
from .fixtures import M2_WITNESS, fixture_models, m2_strengthened_row
from .pairwise import (
    ALIASES,
    BIGM_UNARY,
    BLDP1,
    EXTENDED,
    GRAY_BINARY,
    KIND_TARGET,
    KINDS,
    REFINED_UNARY,
    SEQUENCE_PAIR,
    SHORT_NAMES,
    UNARY,
    FormulationError,
    add_pair,
    area_outer_approx,
    code_names,
    pairwise_model,
    resolve_kind,
    sequence_pair_globals,
    tangent_points,
    tight_sitb_rows,
)

__all__ = [
    "AssemblyOptions", "assemble_nbox", "branch_priorities", "layout_from_point", "area_violations",
    "refine_area", "solve_with_area_refinement", "M2_WITNESS", "fixture_models", "m2_strengthened_row",
    "ALIASES", "KINDS", "KIND_TARGET", "SHORT_NAMES", "BIGM_UNARY", "UNARY", "GRAY_BINARY", "BLDP1",
    "SEQUENCE_PAIR", "REFINED_UNARY", "EXTENDED", "FormulationError", "add_pair", "area_outer_approx",
    "code_names", "pairwise_model", "resolve_kind", "sequence_pair_globals", "tangent_points",
    "tight_sitb_rows",
]
