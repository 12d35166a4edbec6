"""Surfaces built from convex flat or log pieces glued by affine maps."""

from affsurf.surface_kernel.builders import (
    build_affine_cylinder,
    build_affine_torus,
    build_cushion,
    build_exp_affine_plane,
    build_flat_torus,
    build_skew_cone,
    build_translation_cylinder,
    exp_affine_christoffel_at_infinity,
    find_edge,
    polygon_piece,
)
from affsurf.surface_kernel.graft import Slit, graft_sector, reglue_with_dilation
from affsurf.surface_kernel.pieces import Corner, Edge, HalfPlane, Piece
from affsurf.surface_kernel.surface import (
    Mark,
    Overlap,
    Pairing,
    Side,
    SingularityRecord,
    Surface,
    Trap,
    TrapRegion,
    ValidationReport,
    validate,
    vertex_residues,
)

__all__ = [
    "Corner", "Edge", "HalfPlane", "Piece", "Mark", "Overlap", "Pairing", "Side",
    "SingularityRecord", "Surface", "Trap", "TrapRegion", "ValidationReport",
    "validate", "vertex_residues", "build_affine_cylinder", "build_affine_torus",
    "build_cushion", "build_exp_affine_plane", "build_flat_torus", "build_skew_cone",
    "build_translation_cylinder", "exp_affine_christoffel_at_infinity", "find_edge",
    "polygon_piece", "Slit", "graft_sector", "reglue_with_dilation",
]

