"""Finite-type complex affine surfaces: pieces, geodesics, singularities, Delaunay."""

from affsurf.affine_core import AffMap, LogGlue, compose, invert, classify_map, log_glue_apply

__all__ = ["AffMap", "LogGlue", "compose", "invert", "classify_map", "log_glue_apply"]
__version__ = "0.1.0"
