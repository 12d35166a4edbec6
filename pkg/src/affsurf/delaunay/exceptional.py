"""Surfaces with 2g + n <= 2, which carry no Delaunay segment."""

from affsurf.surface_kernel.surface import RES_TOL, validate

TAGS = (
    "whole-plane",
    "translation-cylinder",
    "translation-torus",
    "infinite-angle-cone",
    "affine-cylinder",
    "affine-torus",
)


def _is_translation(surface):
    if surface.is_atlas or any(p.is_log for p in surface.pieces.values()):
        return False
    return all(abs(pr.dev_map.a - 1) <= 1e-9 for pr in surface.pairings)


def genus_and_n(surface):
    rep = validate(surface)
    genus = rep.genus if rep.genus is not None else surface.genus()
    return genus, rep.n, rep.singularities


def is_exceptional(surface):
    """(True, tag) when 2g + n <= 2, else (False, None)."""
    g, n, sings = genus_and_n(surface)
    if 2 * g + n > 2:
        return False, None
    if g == 1:
        return True, "translation-torus" if _is_translation(surface) else "affine-torus"
    if any(s.order >= 2 for s in sings):
        return True, "infinite-angle-cone"
    if n == 1:
        return True, "whole-plane"
    if all(s.order == 1 and abs(s.residue - 1) <= RES_TOL for s in sings):
        return True, "translation-cylinder"
    return True, "affine-cylinder"
