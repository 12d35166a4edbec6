"""Sector grafting along a geodesic ray from a conical point to an end.

The slit is a ray ``start + t e^{i angle}`` (t >= 0) contained in one flat piece,
either through its interior or along one of its edges.  The surface is first
refined so that the ray becomes a pair of glued edges (left side L, right side
R); then R and L are reglued through

* finite theta: a chain of flat sectors of total angle theta whose last side is
  glued to L by a dilation of factor s about the start point;
* infinite theta: two log half-planes, merging both endpoints into one pole.
"""

import cmath
import math
from dataclasses import dataclass

from affsurf.affine_core import AffMap, compose, invert
from affsurf.errors import BadEndpointType, InvariantBreach, SlitNotGeodesic, SlitSelfCrossing, UnsupportedSlit
from affsurf.surface_kernel.pieces import TWO_PI, HalfPlane, Piece, cross, dot
from affsurf.surface_kernel.surface import Mark, Pairing, Side, SingularityRecord, Surface, Trap, TrapRegion

_TOL = 1e-9
RES_TOL = 1e-9


@dataclass(frozen=True)
class Slit:
    """Geodesic ray from ``start`` in direction ``angle`` inside flat piece ``piece``."""

    piece: str
    start: complex
    angle: float

    @property
    def direction(self):
        return cmath.exp(1j * self.angle)

    @classmethod
    def from_direction(cls, piece, start, direction):
        return cls(piece, complex(start), cmath.phase(complex(direction)))


@dataclass(frozen=True)
class EndpointData:
    order: int
    residue: complex
    record_id: str | None
    cycle: int | None


def graft_sector(surface, slit, theta, dilation=1.0):
    """Graft a sector of angle ``theta`` (math.inf for the infinite graft) and dilation ``dilation``."""
    if not (theta > 0):
        raise ValueError("graft angle must be positive")
    return _graft(surface, slit, theta, dilation)


def reglue_with_dilation(surface, slit, dilation):
    """Cut along the slit and reglue the two sides by a dilation about the start point."""
    return _graft(surface, slit, 0.0, dilation)


# --- endpoint data ---------------------------------------------------------


def _cycle_data(surface, cyc):
    rec = surface.record_for_cycle(cyc)
    if rec is not None:
        return EndpointData(rec.order, rec.residue, rec.id, cyc.index)
    res = cyc.residue()
    if res is None:
        raise BadEndpointType("endpoint residue is not determined by the gluing data")
    order = 1 if abs(res) > RES_TOL else 0
    return EndpointData(order, res, None, cyc.index)


def _is_conical(ep):
    return ep.order <= 1 and ep.residue.real < 1 - RES_TOL


def _is_admissible_end(ep):
    if ep.order >= 2:
        return True
    if abs(ep.residue - 1) <= RES_TOL:
        return True
    return ep.residue.real > 1 + RES_TOL


def _ideal_corner_for(piece, u):
    """Index of the ideal corner of ``piece`` that the direction u escapes into."""
    for c in piece.corners:
        if c.finite:
            continue
        if c.incoming is None:
            return c.index
        d_in = piece.edges[c.incoming].direction
        rel = (cmath.phase(u) - cmath.phase(d_in)) % TWO_PI
        if rel > TWO_PI - 1e-9:
            rel = 0.0
        if rel <= c.beta + 1e-9:
            return c.index
    raise SlitNotGeodesic(f"direction {u} does not escape to infinity in piece {piece.id}")


def _exit_corner(piece, p0, u):
    """Finite corner where the ray from p0 leaves the piece, if it leaves through one."""
    t_exit = math.inf
    for h in piece.halfplanes:
        c = dot(h.n, u)
        if c < -1e-12:
            t_exit = min(t_exit, h.value(p0) / -c)
    if math.isinf(t_exit) or t_exit <= 1e-12:
        return None
    z = p0 + t_exit * u
    for c in piece.corners:
        if c.finite and abs(c.point - z) <= 1e-9 * max(1.0, abs(z)):
            return c.index
    return None


# --- refinement ------------------------------------------------------------


def _collinear(e, f, tol=1e-9):
    if abs(e.direction - f.direction) > tol:
        return False
    return abs(dot(e.normal, f.origin - e.origin)) <= tol * max(1.0, abs(f.origin))


def _edge_mid(e):
    if e.bounded:
        return e.point(0.5 * (e.t0 + e.t1))
    if math.isinf(e.t0) and math.isinf(e.t1):
        return e.point(0.0)
    if math.isinf(e.t1):
        return e.point(e.t0 + 1.0)
    return e.point(e.t1 - 1.0)


def _on_edge(e, z, tol=1e-7):
    scale = max(1.0, abs(z))
    if abs(dot(e.normal, z - e.origin)) > tol * scale:
        return False
    return e.contains_param(e.param(z), tol * scale)


class _Refined:
    """Pieces of a surface cut by lines and subdivided at extra boundary points."""

    def __init__(self, surface, cuts, splits):
        self.old = surface
        self.children = {}
        self.parent = {}
        taken = set(surface.pieces)
        for pid in surface.piece_ids():
            piece = surface.pieces[pid]
            extra = tuple(splits.get(pid, ()))
            if pid in cuts:
                p, n = cuts[pid]
                kids = []
                for sign, tag in ((1, "+"), (-1, "-")):
                    cid = pid + tag
                    while cid in taken:
                        cid += tag
                    taken.add(cid)
                    hps = piece.halfplanes + (HalfPlane(p, sign * n),)
                    kids.append(Piece(cid, piece.kind, hps, piece.splits + extra))
            else:
                kids = [piece.with_splits(extra)]
            self.children[pid] = {k.id: k for k in kids}
            for k in kids:
                self.parent[k.id] = pid
        self._propagate_splits()

    def pieces(self):
        out = []
        for pid in self.old.piece_ids():
            out.extend(self.children[pid].values())
        return out

    def _sub_edges(self, side):
        """(child id, edge) pairs covering the old edge ``side``."""
        old_edge = self.old.pieces[side.piece].edges[side.edge]
        out = []
        for kid in self.children[side.piece].values():
            for e in kid.edges:
                if _collinear(old_edge, e) and old_edge.contains_param(old_edge.param(_edge_mid(e)), 1e-9):
                    out.append((kid.id, e))
        return out

    def _propagate_splits(self):
        for _ in range(20):
            added = False
            for pr in self.old.pairings:
                for side in (pr.s1, pr.s2):
                    tr = self.old.transfer(side.piece, side.edge)
                    other = self.old.partner(side.piece, side.edge)
                    pts = []
                    for _, e in self._sub_edges(side):
                        for z in (e.start, e.end):
                            if z is not None:
                                pts.append(tr.point(z))
                    if self._add_splits(other, pts):
                        added = True
            if not added:
                return
        raise InvariantBreach("split propagation did not terminate")

    def _add_splits(self, side, pts):
        old_edge = self.old.pieces[side.piece].edges[side.edge]
        added = False
        for cid, kid in list(self.children[side.piece].items()):
            new = []
            for q in pts:
                t = old_edge.param(q)
                if not (old_edge.t0 + 1e-9 < t < old_edge.t1 - 1e-9):
                    continue
                if not kid.contains(q, 1e-9):
                    continue
                if any(c.finite and abs(c.point - q) <= 1e-9 * max(1.0, abs(q)) for c in kid.corners):
                    continue
                new.append(q)
            if new:
                self.children[side.piece][cid] = kid.with_splits(new)
                added = True
        return added

    def pairings(self):
        out = []
        for pr in self.old.pairings:
            tr = self.old.transfer(pr.s1.piece, pr.s1.edge)
            targets = self._sub_edges(pr.s2)
            for cid, e in self._sub_edges(pr.s1):
                mid = _edge_mid(e)
                img = tr.point(mid)
                match = None
                for did, f in targets:
                    if _on_edge(f, img):
                        match = (did, f, img)
                        break
                if match is None:
                    raise InvariantBreach(f"refined edge of {cid} has no partner")
                did, f, img = match
                out.append(Pairing(Side(cid, e.index), Side(did, f.index), pr.dev_map, (mid, img)))
        return out

    def child_containing(self, pid, z):
        kids = list(self.children[pid].values())
        best = max(kids, key=lambda k: k.margin(z))
        return best.id

    def locate_corner(self, pid, ci):
        """New (piece, corner) for the old corner ``ci`` of piece ``pid``."""
        old = self.old.pieces[pid]
        c = old.corners[ci]
        for kid in self.children[pid].values():
            for nc in kid.corners:
                if c.finite:
                    if nc.finite and abs(nc.point - c.point) <= 1e-9 * max(1.0, abs(c.point)):
                        if _same_incoming(old, c, kid, nc):
                            return kid.id, nc.index
                else:
                    if nc.finite:
                        continue
                    if c.incoming is None or nc.incoming is None:
                        if c.incoming is None and nc.incoming is None:
                            return kid.id, nc.index
                        continue
                    if _collinear(old.edges[c.incoming], kid.edges[nc.incoming]):
                        return kid.id, nc.index
        # fall back to any corner at the same point
        for kid in self.children[pid].values():
            for nc in kid.corners:
                if c.finite and nc.finite and abs(nc.point - c.point) <= 1e-9 * max(1.0, abs(c.point)):
                    return kid.id, nc.index
        raise InvariantBreach(f"corner {ci} of {pid} lost during refinement")


def _same_incoming(old, c, kid, nc):
    return _collinear(old.edges[c.incoming], kid.edges[nc.incoming])


# --- the surgery -----------------------------------------------------------


def _fresh_id(taken, stem):
    k = 0
    while f"{stem}{k}" in taken or any(t.startswith(f"{stem}{k}_") for t in taken):
        k += 1
    return f"{stem}{k}"


def _graft(surface, slit, theta, dilation):
    if surface.is_atlas:
        raise UnsupportedSlit("grafting on overlapping atlases is not supported")
    if slit.piece not in surface.pieces:
        raise SlitNotGeodesic(f"unknown piece {slit.piece}")
    if not (dilation > 0 and math.isfinite(dilation)):
        raise ValueError("dilation must be a positive real number")
    P = surface.pieces[slit.piece]
    if P.is_log:
        raise UnsupportedSlit("slits must lie in flat pieces")
    p0 = complex(slit.start)
    u = slit.direction
    phi = slit.angle
    if not P.contains(p0, _TOL * P.scale()):
        raise SlitNotGeodesic(f"start {p0} is not in piece {P.id}")
    if not P.in_recession_cone(u, 1e-12):
        hit = _exit_corner(P, p0, u)
        if hit is not None:
            cyc = surface.cycle_of_corner(P.id, hit)
            res = cyc.residue() if cyc is not None else None
            if res is not None and res.real < 1 - RES_TOL:
                raise BadEndpointType(f"slit ends at a conical point (residue {res})")
        raise UnsupportedSlit("the slit ray leaves its piece; only rays inside one piece are supported")

    # endpoints on the original surface
    s2_corner = _ideal_corner_for(P, u)
    cyc2 = surface.cycle_of_corner(P.id, s2_corner)
    if cyc2 is None or not cyc2.closed:
        raise BadEndpointType("the slit does not end at a singularity")
    ep2 = _cycle_data(surface, cyc2)
    cyc1 = surface.cycle_of_point(P.id, p0)
    if cyc1 is not None:
        ep1 = _cycle_data(surface, cyc1)
    else:
        ep1 = EndpointData(0, 0j, None, None)
    if not _is_conical(ep1):
        raise BadEndpointType(f"slit must start at a conical point (residue {ep1.residue})")
    if not _is_admissible_end(ep2):
        raise BadEndpointType(f"slit must end at a non-conical, non-Reeb singularity (residue {ep2.residue})")
    s1_marks = [m for m in surface.marks
                if m.piece == P.id and abs(m.z - p0) <= 1e-9 * max(1.0, abs(p0))]
    if cyc1 is not None:
        s1_marks += [m for m in surface.marks if m.id in cyc1.mark_ids and m not in s1_marks]
    for m in surface.marks:
        if m in s1_marks or m.piece != P.id:
            continue
        t = dot(u, m.z - p0)
        if t > 1e-9 and abs(cross(u, m.z - p0)) <= 1e-9 * max(1.0, abs(m.z)):
            raise SlitNotGeodesic(f"slit passes through marked point {m.id}")

    along = [h for h in P.halfplanes
             if abs(h.value(p0)) <= _TOL * max(1.0, abs(p0)) and abs(dot(h.n, u)) <= 1e-12]
    if along:
        refined = _Refined(surface, {}, {P.id: [p0]})
    else:
        refined = _Refined(surface, {P.id: (p0, 1j * u)}, {P.id: [p0]})
    pieces = refined.pieces()
    by_id = {p.id: p for p in pieces}
    pairings = refined.pairings()

    def ray_edge(pid, sign):
        # edge of pid on the slit line running along sign*u and ending/starting at p0
        piece = by_id[pid]
        for e in piece.edges:
            if abs(e.direction - sign * u) > 1e-9:
                continue
            if abs(cross(u, e.origin - p0)) > 1e-9 * max(1.0, abs(p0)):
                continue
            if sign > 0 and e.start is not None and abs(e.start - p0) <= 1e-9 * max(1.0, abs(p0)) \
                    and math.isinf(e.t1):
                return e.index
            if sign < 0 and e.end is not None and abs(e.end - p0) <= 1e-9 * max(1.0, abs(p0)) \
                    and math.isinf(e.t0):
                return e.index
        return None

    ident = AffMap.identity()
    if along:
        pid = P.id
        sign = 1 if ray_edge(pid, 1) is not None else -1
        eidx = ray_edge(pid, sign)
        if eidx is None:
            raise UnsupportedSlit("slit covers several boundary segments")
        k = next((i for i, pr in enumerate(pairings) if Side(pid, eidx) in (pr.s1, pr.s2)), None)
        if k is None:
            raise SlitNotGeodesic("slit runs along an unglued boundary edge")
        pr = pairings.pop(k)
        if pr.s1 == Side(pid, eidx):
            other, to_other = pr.s2, pr.dev_map
        else:
            other, to_other = pr.s1, invert(pr.dev_map)
        if other.piece == pid:
            e_other = by_id[pid].edges[other.edge]
            if abs(cross(u, e_other.direction)) <= 1e-9 and \
                    abs(cross(u, e_other.origin - p0)) <= 1e-9 * max(1.0, abs(p0)):
                raise SlitSelfCrossing("the slit meets its own image across the edge")
        mine = (Side(pid, eidx), ident)
        theirs = (other, to_other)
        left, right = (mine, theirs) if sign > 0 else (theirs, mine)
    else:
        kids = list(refined.children[P.id])
        plus, minus = kids[0], kids[1]
        le, re_ = ray_edge(plus, 1), ray_edge(minus, -1)
        if le is None or re_ is None:
            raise InvariantBreach("cutting along the slit did not produce ray edges")
        left = (Side(plus, le), ident)
        right = (Side(minus, re_), ident)
        # glue the part of the cut line behind the start point back together
        for e in by_id[plus].edges:
            if e.index == le or abs(e.direction - u) > 1e-9:
                continue
            if abs(cross(u, e.origin - p0)) > 1e-9 * max(1.0, abs(p0)):
                continue
            mid = _edge_mid(e)
            for f in by_id[minus].edges:
                if f.index != re_ and abs(f.direction + u) <= 1e-9 and _on_edge(f, mid):
                    pairings.append(Pairing(Side(plus, e.index), Side(minus, f.index), ident, (mid, mid)))

    (lside, to_left), (rside, to_right) = left, right
    stretch = AffMap(cmath.exp(-1j * theta) / dilation if math.isfinite(theta) else 1.0, 0)
    about_p0 = compose(AffMap(1, p0), compose(stretch, AffMap(1, -p0)))
    new_pieces = list(pieces)
    taken = set(by_id)
    new_records = []
    drop_cycles = {c for c in (ep1.cycle, ep2.cycle) if c is not None}

    if math.isinf(theta):
        stem = _fresh_id(taken, "inf")
        up = Piece(f"{stem}_U", "log", (HalfPlane(1j * phi, 1j),))
        down = Piece(f"{stem}_D", "log", (HalfPlane(1j * phi, -1j),))
        new_pieces += [up, down]
        shift = AffMap(1, p0)
        pairings.append(Pairing(Side(up.id, 0), rside, compose(to_right, shift)))
        pairings.append(Pairing(Side(down.id, 0), lside, compose(to_left, shift)))
        merged_id = ep2.record_id or ep1.record_id or "pole"
        extra = {"merged": [x for x in (ep1.record_id, ep2.record_id) if x]}
        new_records.append(SingularityRecord(merged_id, ("cycle", up.id, 0), ep2.order + 1,
                                             ep1.residue + ep2.residue, extra))
        keep_marks = [m for m in surface.marks if m not in s1_marks]
        expected = None
    elif theta > 0:
        stem = _fresh_id(taken, "sector")
        k = max(1, math.ceil(theta / (TWO_PI / 3) - 1e-12))
        angles = [phi + theta * j / k for j in range(k + 1)]
        sectors = []
        for j in range(k):
            a0, a1 = angles[j], angles[j + 1]
            hps = (HalfPlane(p0, 1j * cmath.exp(1j * a0)), HalfPlane(p0, -1j * cmath.exp(1j * a1)))
            sectors.append(Piece(f"{stem}_{j}", "flat", hps))
        new_pieces += sectors

        def sector_edge(piece, a, sign):
            d = cmath.exp(1j * a)
            for e in piece.edges:
                if abs(e.direction - sign * d) <= 1e-9:
                    return e.index
            raise InvariantBreach("sector edge not found")

        pairings.append(Pairing(rside, Side(sectors[0].id, sector_edge(sectors[0], angles[0], 1)),
                                invert(to_right)))
        for j in range(k - 1):
            pairings.append(Pairing(Side(sectors[j].id, sector_edge(sectors[j], angles[j + 1], -1)),
                                    Side(sectors[j + 1].id, sector_edge(sectors[j + 1], angles[j + 1], 1)),
                                    ident))
        pairings.append(Pairing(Side(sectors[-1].id, sector_edge(sectors[-1], angles[-1], -1)), lside,
                                compose(to_left, about_p0)))
        keep_marks = list(surface.marks)
        shift = complex(theta, -math.log(dilation)) / TWO_PI
        expected = (ep1.residue - shift, ep2.residue + shift)
    else:
        pairings.append(Pairing(rside, lside, compose(to_left, compose(about_p0, invert(to_right)))))
        keep_marks = list(surface.marks)
        shift = complex(0.0, -math.log(dilation)) / TWO_PI
        expected = (ep1.residue - shift, ep2.residue + shift)

    # carry over stored records, marks and untouched traps
    old_cycles = surface.cycles()
    for rec in surface.records:
        loc = rec.location
        if not loc or loc[0] != "cycle":
            new_records.append(rec)
            continue
        cyc = surface.cycle_of_corner(str(loc[1]), int(loc[2]))
        if cyc is not None and cyc.index in drop_cycles and math.isinf(theta):
            continue
        npid, nci = refined.locate_corner(str(loc[1]), int(loc[2]))
        res = rec.residue
        if expected is not None and cyc is not None:
            if cyc.index == ep1.cycle:
                res = expected[0]
            elif cyc.index == ep2.cycle:
                res = expected[1]
        new_records.append(SingularityRecord(rec.id, ("cycle", npid, nci), rec.order, res, dict(rec.extra)))
    marks = []
    for m in keep_marks:
        pid = refined.child_containing(m.piece, m.z) if m.piece in refined.children else m.piece
        marks.append(Mark(pid, m.z, m.id))
    touched = {P.id} | {s.piece for s in (lside, rside)} | {refined.parent.get(s.piece, s.piece)
                                                           for s in (lside, rside)}
    traps = []
    for t in surface.traps:
        if t.pieces() & touched:
            continue
        regions = []
        for r in t.regions:
            for kid in refined.children[r.piece]:
                regions.append(TrapRegion(kid, r.kind, r.params))
        traps.append(Trap(t.id, tuple(regions)))
    meta = dict(surface.meta)
    meta.pop("genus", None) if math.isinf(theta) and "genus" not in surface.meta else None
    meta["grafts"] = list(meta.get("grafts", [])) + [
        {"piece": P.id, "start": [p0.real, p0.imag], "angle": phi,
         "theta": "inf" if math.isinf(theta) else theta, "dilation": dilation}]
    result = Surface(new_pieces, pairings, marks=marks, records=new_records, traps=traps,
                     overlaps=(), meta=meta)
    if expected is not None:
        _check_residues(result, surface, ep1, ep2, expected, old_cycles)
    return result


def _check_residues(result, surface, ep1, ep2, expected, old_cycles):
    """Sanity check: the endpoint residues moved as predicted and the total is unchanged."""
    total = result.residue_sum()
    if abs(total - surface.residue_sum()) > 1e-7 * max(1.0, abs(total)):
        raise InvariantBreach(f"grafting changed the residue sum: {surface.residue_sum()} -> {total}")
    found = [s.residue for s in result.singularities()]
    for want, ep in zip(expected, (ep1, ep2)):
        if abs(want) <= RES_TOL:
            continue
        if not any(abs(r - want) <= 1e-7 * max(1.0, abs(want)) for r in found):
            raise InvariantBreach(f"expected residue {want} after grafting, found {found}")
