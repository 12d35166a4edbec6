"""Delaunay segments, Delaunay polygons and the counting identity t + beta = 4g - 4 + 2n."""

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from affsurf.config import TOL
from affsurf.delaunay._kernels import kernels
from affsurf.delaunay.disks import developer, grow_max_disk, pivot
from affsurf.delaunay.exceptional import genus_and_n, is_exceptional
from affsurf.errors import (
    ExceptionalSkip,
    InvariantBreach,
    SeedOnSingularity,
    SpineTraversalCapped,
    UnclassifiedComponent,
)
from affsurf.geodesics import GeodesicState, trace


@dataclass
class DelaunaySegment:
    endpoints: tuple
    vector: complex  # developed displacement from the first endpoint to the second
    start: tuple  # (piece, point) of the midpoint
    direction: complex  # velocity at the midpoint in piece coordinates (whole segment in unit time)
    path: list = field(default_factory=list)  # [(piece, [points])] from the first endpoint
    witness: object = field(default=None, repr=False)

    @property
    def length(self):
        return abs(self.vector)

    def key(self):
        """Orientation-free description: endpoint ids with the developed vector between them."""
        a, b = self.endpoints
        v = self.vector
        if b < a:
            a, b, v = b, a, -v
        elif a == b and (v.real < -1e-12 or (abs(v.real) <= 1e-12 and v.imag < 0)):
            v = -v
        return (a, b, v)

    def to_json(self):
        return {
            "endpoints": list(self.endpoints),
            "length_developed": self.length,
            "vector": [self.vector.real, self.vector.imag],
            "midpoint": {"piece": self.start[0], "z": [self.start[1].real, self.start[1].imag]},
            "path": [{"piece": p, "points": [[z.real, z.imag] for z in pts]} for p, pts in self.path],
        }


@dataclass
class DelaunayComponent:
    type: str
    sides: int
    boundary: list
    apexes: list
    data: dict = field(default_factory=dict)

    def to_json(self):
        out = {"type": self.type, "sides": self.sides, "boundary": self.boundary, "apexes": self.apexes}
        out.update(self.data)
        return out


@dataclass
class DelaunayDecomposition:
    segments: list
    components: list
    core: list
    exterior: list
    counts: dict

    def to_json(self):
        return {
            "segments": [s.to_json() for s in self.segments],
            "components": [c.to_json() for c in self.components],
            "core": self.core,
            "exterior": self.exterior,
            "counts": self.counts,
        }


# --- canonical points on the surface ------------------------------------------


def _representatives(surface, pid, z, tol):
    piece = surface.pieces[pid]
    for c in piece.corners:
        if c.finite and abs(c.point - z) <= tol:
            cyc = surface.cycle_of_corner(pid, c.index)
            return [(p, surface.pieces[p].corners[ci].point) for p, ci in cyc.corners]
    out = [(pid, z)]
    for e in piece.edges:
        if e.distance(z) <= tol:
            tr = surface.transfer(pid, e.index)
            if tr is not None:
                out.append((tr.dst.id, tr.point(z)))
    return out


def _same_place(surface, a, b, tol):
    """Whether two (piece, point) pairs denote the same point of the surface."""
    reps = _representatives(surface, a[0], a[1], tol)
    return any(p == b[0] and abs(z - b[1]) <= 10 * tol for p, z in reps)


# --- traversal -------------------------------------------------------------------


class _Spine:
    def __init__(self, surface):
        self.surface = surface
        self.dev = developer(surface)
        self.tol = 1e-6 * self.dev.scale
        self.disks = []  # (place, radius, disk)
        self.segments = []
        self.polygons = []  # (disk, [segment index per side])
        self.pivots = 0

    def _place(self, cells, w):
        pid, _, z = self.dev.locate(cells, w)
        return pid, z

    def _find_disk(self, place, radius):
        for k, (pl, r, _) in enumerate(self.disks):
            if abs(r - radius) <= self.tol and _same_place(self.surface, pl, place, self.tol):
                return k
        return None

    def _add_segment(self, res):
        p, q = res.chord
        vec = q - p
        mid = 0.5 * (p + q)
        pid, F = res.cell
        z = F.inverse()(mid)
        place = (pid, z)
        a, b = res.apexes
        for k, s in enumerate(self.segments):
            if abs(s.length - abs(vec)) <= self.tol and set(s.endpoints) == {a, b} \
                    and _same_place(self.surface, s.start, place, self.tol):
                return k
        seg = DelaunaySegment((a, b), vec, place, vec / F.a, witness=res.witness)
        seg.path = _segment_path(self.surface, seg)
        self.segments.append(seg)
        return len(self.segments) - 1

    def run(self, seeds, budget):
        queue = deque()
        for seed in seeds:
            try:
                queue.append(grow_max_disk(self.surface, seed))
            except SeedOnSingularity:
                continue
        while queue:
            disk = queue.popleft()
            place = self._place(disk.cells, disk.center)
            if self._find_disk(place, disk.radius) is not None:
                continue
            self.disks.append((place, disk.radius, disk))
            sides = []
            for e in range(len(disk.hits)):
                self.pivots += 1
                if self.pivots > budget:
                    raise SpineTraversalCapped(f"more than {budget} pivots")
                res = pivot(self.surface, disk, e)
                sides.append(self._add_segment(res))
                queue.append(res.disk)
            if disk.rigid:
                self.polygons.append((disk, sides))


def _segment_path(surface, seg):
    """Polyline of the segment, obtained by tracing from its midpoint in both directions."""
    pid, z = seg.start
    halves = []
    for sign in (-1, 1):
        res = trace(surface, GeodesicState(pid, z, sign * seg.direction), t_max=0.5 * (1 + 1e-6),
                    stop_on_trap=False, stop_on_close=False)
        term = res.termination
        if term.kind != "HitApex" or abs(term.time - 0.5) > 1e-6:
            raise InvariantBreach(f"segment certificate failed: trace ended with {term.kind} at {term.time}")
        halves.append([(s.piece, [s.at(0.0), s.at(s.duration)]) for s in res.segments if s.duration > 0])
    back = [(p, pts[::-1]) for p, pts in reversed(halves[0])]
    return back + halves[1]


def _seeds(surface):
    seeds = []
    for pid in surface.piece_ids():
        piece = surface.pieces[pid]
        pts = piece.finite_points()
        cen = sum(pts) / len(pts)
        seeds.append((pid, cen + 1e-3 * (pts[0] - cen) * 0.37))
        for c in pts:
            seeds.append((pid, c + 0.3 * (cen - c)))
    return seeds


def _check_disjoint(surface, segments, tol=1e-9):
    K = kernels()
    by_piece = {}
    for k, s in enumerate(segments):
        for pid, pts in s.path:
            by_piece.setdefault(pid, []).append((k, pts[0], pts[-1]))
    for pid, items in by_piece.items():
        if len(items) < 2:
            continue
        a = np.array([x[1] for x in items])
        b = np.array([x[2] for x in items])
        n = K["crossings"](a.real.copy(), a.imag.copy(), b.real.copy(), b.imag.copy(),
                           a.real.copy(), a.imag.copy(), b.real.copy(), b.imag.copy(), tol)
        if n:
            raise InvariantBreach(f"Delaunay segments cross inside piece {pid}")


def _require_regular(surface):
    exc, tag = is_exceptional(surface)
    if exc:
        raise ExceptionalSkip(f"exceptional surface ({tag}): no Delaunay segment exists")
    return tag


def _spine(surface):
    cached = getattr(surface, "_delaunay_spine", None)
    if cached is not None:
        return cached
    _require_regular(surface)
    sp = _Spine(surface)
    sp.run(_seeds(surface), TOL.max_pivots)
    _check_disjoint(surface, sp.segments)
    ids = {sid for sid, _, _ in surface.apex_points()}
    ends = {e for s in sp.segments for e in s.endpoints}
    if ids - ends:
        raise InvariantBreach(f"apexes without Delaunay segment: {sorted(ids - ends)}")
    surface._delaunay_spine = sp
    return sp


def delaunay_segments(surface):
    """All Delaunay segments, in a deterministic order."""
    sp = _spine(surface)
    return sorted(sp.segments, key=_seg_order)


def _seg_order(s):
    a, b, v = s.key()
    return (a, b, round(s.length, 8), round(v.real, 8), round(v.imag, 8))


def components(surface, segments=None):
    """Cut along the segments and classify the pieces of the complement."""
    sp = _spine(surface)
    if segments is not None and len(segments) != len(sp.segments):
        raise UnclassifiedComponent("segment list does not match the surface's Delaunay segments")
    order = sorted(range(len(sp.segments)), key=lambda k: _seg_order(sp.segments[k]))
    index = {k: i for i, k in enumerate(order)}
    comps = []
    for disk, sides in sp.polygons:
        if len(sides) < 3:
            raise UnclassifiedComponent("polygon with fewer than three sides")
        comps.append(DelaunayComponent("Polygon", len(sides), [index[k] for k in sides],
                                       [h.apex for h in disk.hits],
                                       {"circumradius": disk.radius}))
    comps.sort(key=lambda c: (c.sides, c.boundary))
    side_total = sum(c.sides for c in comps)
    if side_total != 2 * len(sp.segments):
        raise UnclassifiedComponent(
            f"polygon sides ({side_total}) do not pair up with {len(sp.segments)} segments")
    g, n, _ = genus_and_n(surface)
    t = sum(c.sides - 2 for c in comps)
    beta = 0
    counts = {"t": t, "beta": beta, "g": g, "n": n, "segments": len(sp.segments),
              "identity_ok": t + beta == 4 * g - 4 + 2 * n}
    return DelaunayDecomposition([sp.segments[k] for k in order], comps,
                                 surface.piece_ids(), [], counts)


def decompose(surface):
    return components(surface)


def complexity_check(dec):
    c = dec.counts
    g, n = c["g"], c["n"]
    lhs = c["t"] + c["beta"]
    rhs = 4 * g - 4 + 2 * n
    bound = 6 * g - 6 + 3 * n
    return {
        "t": c["t"], "beta": c["beta"], "g": g, "n": n,
        "lhs": lhs, "rhs": rhs, "identity_ok": lhs == rhs,
        "segments": len(dec.segments), "segment_bound": bound,
        "bound_ok": len(dec.segments) <= bound,
    }


def polygon_interior_embedded(surface, comp_disk_samples=16):
    """Sampled points inside each polygon's circumdisk develop to distinct surface points."""
    sp = _spine(surface)
    dev = sp.dev
    for disk, _ in sp.polygons:
        hits = [h.point for h in disk.hits]
        cen = sum(hits) / len(hits)
        places = []
        for k in range(comp_disk_samples):
            w = cen + 0.5 * disk.radius * (k / comp_disk_samples) * complex(
                math.cos(2.4 * k), math.sin(2.4 * k))
            places.append(dev.locate(disk.cells, w)[::2])
        for i in range(len(places)):
            for j in range(i):
                if _same_place(surface, places[i], places[j], 1e-9 * dev.scale) and i != j:
                    return False
    return True
