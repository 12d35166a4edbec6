"""Delaunay decomposition of compact flat surfaces with conical points."""

from affsurf.delaunay.decomposition import (
    DelaunayComponent,
    DelaunayDecomposition,
    DelaunaySegment,
    complexity_check,
    components,
    decompose,
    delaunay_segments,
)
from affsurf.delaunay.disks import Hit, ImmersedDisk, grow_max_disk, pivot
from affsurf.delaunay.exceptional import TAGS, is_exceptional

__all__ = [
    "DelaunayComponent", "DelaunayDecomposition", "DelaunaySegment", "complexity_check",
    "components", "decompose", "delaunay_segments", "Hit", "ImmersedDisk", "grow_max_disk",
    "pivot", "TAGS", "is_exceptional",
]
