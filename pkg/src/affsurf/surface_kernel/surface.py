"""Surfaces as complexes of convex pieces glued along edges by affine maps.

Pairings act on developed coordinates (z on flat pieces, e^w on log pieces).
Corners of pieces are grouped into cycles: a cycle of finite corners is a
vertex of the surface, a cycle containing corners at infinity is an end.
Every cycle carries a holonomy and, when it can be read off the gluing data,
a residue ``1 - A/2pi + i log|hol|/2pi`` where ``A`` is the total turning
collected along the cycle.
"""

import cmath
import math
from dataclasses import dataclass, field

from affsurf.affine_core import AffMap, LogGlue, compose, invert
from affsurf.config import TOL
from affsurf.errors import InvalidSurface, OpenVertexCycle
from affsurf.surface_kernel.pieces import TWO_PI, dot

RES_TOL = 1e-9


@dataclass(frozen=True)
class Side:
    piece: str
    edge: int


@dataclass(frozen=True)
class Pairing:
    """Edge s1 glued to edge s2; ``dev_map`` sends s1-developed to s2-developed coordinates.

    ``anchor`` is a matched point pair (w1 on s1, w2 on s2) fixing the log branch.
    """

    s1: Side
    s2: Side
    dev_map: AffMap
    anchor: tuple | None = None


@dataclass(frozen=True)
class Overlap:
    """Two charts identified on their common domain by a log gluing (atlas surfaces)."""

    piece1: str
    piece2: str
    glue: LogGlue


@dataclass(frozen=True)
class Mark:
    piece: str
    z: complex
    id: str = ""


@dataclass(frozen=True)
class SingularityRecord:
    id: str
    location: tuple
    order: int
    residue: complex
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def multiplicity(self):
        return max(self.order, 1)

    def to_json(self):
        return {
            "id": self.id,
            "location": _jsonable(list(self.location)),
            "order": self.order,
            "residue": [self.residue.real, self.residue.imag],
            "extra": _jsonable(self.extra),
        }


def _jsonable(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return obj


@dataclass(frozen=True)
class TrapRegion:
    """Predicate on one piece: ``halfplane`` (p, n) or ``spiral`` (c, k, log_rho, theta0)."""

    piece: str
    kind: str
    params: tuple

    def contains(self, z, tol=1e-9):
        if self.kind == "halfplane":
            p, n = self.params
            return dot(n, z - p) > -tol
        if self.kind == "spiral":
            c, k, log_rho, theta0 = self.params
            w = z - c
            if abs(w) == 0:
                return False
            theta = theta0 + cmath.phase(w * cmath.exp(-1j * theta0))
            return math.log(abs(w)) - k * theta > log_rho - tol
        raise InvalidSurface(f"unknown trap predicate {self.kind}")

    def to_json(self):
        return {"piece": self.piece, "kind": self.kind, "params": _jsonable(list(self.params))}


@dataclass(frozen=True)
class Trap:
    id: str
    regions: tuple

    def contains(self, piece, z, tol=1e-9):
        return any(r.piece == piece and r.contains(z, tol) for r in self.regions)

    def pieces(self):
        return {r.piece for r in self.regions}

    def to_json(self):
        return {"id": self.id, "regions": [r.to_json() for r in self.regions]}


@dataclass
class Cycle:
    index: int
    corners: list
    closed: bool
    hol: AffMap
    turning: float | None
    has_finite: bool
    has_ideal: bool
    marked: bool = False
    mark_ids: tuple = ()

    @property
    def vertex_only(self):
        return self.has_finite and not self.has_ideal

    @property
    def computable(self):
        return self.turning is not None

    def residue(self):
        if self.turning is None:
            return None
        return complex(1 - self.turning / TWO_PI, math.log(abs(self.hol.a)) / TWO_PI)

    @property
    def key(self):
        return self.corners[0]


class Transfer:
    """Directed crossing of an edge: P-coordinates to Q-coordinates."""

    __slots__ = ("src", "dst", "src_edge", "dst_edge", "T", "anchor_src", "anchor_dst", "src_log", "dst_log")

    def __init__(self, src, src_edge, dst, dst_edge, T, anchor_src, anchor_dst):
        self.src, self.dst = src, dst
        self.src_edge, self.dst_edge = src_edge, dst_edge
        self.T = T
        self.anchor_src, self.anchor_dst = anchor_src, anchor_dst
        self.src_log = src.is_log
        self.dst_log = dst.is_log

    def point(self, z):
        zeta = self.src.dev(z)
        img = self.T(zeta)
        if not self.dst_log:
            return img
        if self.src_log and abs(self.T.b) <= 1e-14 * (1 + abs(self.T(self.src.dev(self.anchor_src)))):
            return z + (self.anchor_dst - self.anchor_src)
        ref = self.T(self.src.dev(self.anchor_src))
        ratio = img / ref
        if ratio == 0:
            return complex(-math.inf, 0)
        return self.anchor_dst + complex(math.log(abs(ratio)), cmath.phase(ratio))

    def velocity(self, z, v, z_new):
        big_v = self.src.dev_velocity(z, v) * self.T.a
        if self.dst_log:
            return big_v / cmath.exp(z_new)
        return big_v


class Surface:
    """Immutable finite complex of pieces plus singularity data."""

    def __init__(self, pieces, pairings, marks=(), records=(), traps=(), overlaps=(),
                 meta=None):
        self.pieces = {}
        for p in pieces:
            if p.id in self.pieces:
                raise InvalidSurface(f"duplicate piece id {p.id}")
            self.pieces[p.id] = p
        self.pairings = tuple(_with_anchor(self.pieces, pr) for pr in pairings)
        self.marks = tuple(
            Mark(m.piece, complex(m.z), m.id or f"m{i}") for i, m in enumerate(marks)
        )
        self.records = tuple(records)
        self.traps = tuple(traps)
        self.overlaps = tuple(overlaps)
        self.meta = dict(meta or {})
        self._side = {}
        for k, pr in enumerate(self.pairings):
            for side in (pr.s1, pr.s2):
                if side.piece not in self.pieces:
                    raise InvalidSurface(f"pairing refers to unknown piece {side.piece}")
                if not 0 <= side.edge < len(self.pieces[side.piece].edges):
                    raise InvalidSurface(f"pairing refers to missing edge {side}")
                if side in self._side and not (pr.s1 == pr.s2):
                    raise InvalidSurface(f"edge {side} glued twice")
                self._side[side] = k
        self._transfers = {}
        self._cycles = None

    # --- basic queries ------------------------------------------------------
    @property
    def is_atlas(self):
        return bool(self.overlaps)

    def piece_ids(self):
        return sorted(self.pieces)

    def partner(self, piece, edge):
        k = self._side.get(Side(piece, edge))
        if k is None:
            return None
        pr = self.pairings[k]
        return pr.s2 if pr.s1 == Side(piece, edge) else pr.s1

    def transfer(self, piece, edge):
        key = (piece, edge)
        tr = self._transfers.get(key)
        if tr is not None:
            return tr
        k = self._side.get(Side(piece, edge))
        if k is None:
            return None
        pr = self.pairings[k]
        w1, w2 = pr.anchor
        if pr.s1 == Side(piece, edge):
            tr = Transfer(self.pieces[pr.s1.piece], pr.s1.edge, self.pieces[pr.s2.piece], pr.s2.edge,
                          pr.dev_map, w1, w2)
        else:
            tr = Transfer(self.pieces[pr.s2.piece], pr.s2.edge, self.pieces[pr.s1.piece], pr.s1.edge,
                          invert(pr.dev_map), w2, w1)
        self._transfers[key] = tr
        return tr

    def unpaired_edges(self):
        out = []
        for pid in self.piece_ids():
            for e in self.pieces[pid].edges:
                if Side(pid, e.index) not in self._side:
                    out.append(Side(pid, e.index))
        return out

    @property
    def has_boundary(self):
        return bool(self.unpaired_edges())

    # --- cycles -------------------------------------------------------------
    def cycles(self):
        if self._cycles is None:
            self._cycles = self._compute_cycles()
        return self._cycles

    def _next_corner(self, pid, ci):
        piece = self.pieces[pid]
        c = piece.corners[ci]
        if c.incoming is None:
            return pid, ci
        part = self.partner(pid, c.incoming)
        if part is None:
            return None
        q = self.pieces[part.piece]
        return part.piece, (part.edge - 1) % len(q.edges)

    def _compute_cycles(self):
        seen = {}
        cycles = []
        for pid in self.piece_ids():
            for ci in range(len(self.pieces[pid].corners)):
                if (pid, ci) in seen:
                    continue
                chain, closed = self._walk(pid, ci)
                for c in chain:
                    seen[c] = len(cycles)
                cycles.append(self._cycle_data(len(cycles), chain, closed))
        marks = {}
        for m in self.marks:
            piece = self.pieces[m.piece]
            for c in piece.corners:
                if c.finite and abs(c.point - m.z) <= 1e-9 * max(1.0, abs(m.z)):
                    marks.setdefault(seen[(m.piece, c.index)], []).append(m.id)
        for k, ids in marks.items():
            cycles[k].marked = True
            cycles[k].mark_ids = tuple(ids)
        return cycles

    def _walk(self, pid, ci):
        chain = [(pid, ci)]
        cur = (pid, ci)
        while True:
            nxt = self._next_corner(*cur)
            if nxt is None:
                # open chain: extend backwards as well
                back = self._walk_back(pid, ci)
                return back + chain, False
            if nxt == (pid, ci):
                return chain, True
            if nxt in chain:
                raise InvalidSurface("corner cycle is not a permutation")
            chain.append(nxt)
            cur = nxt

    def _walk_back(self, pid, ci):
        # predecessor: corner whose incoming edge is glued to our outgoing edge
        out = []
        cur = (pid, ci)
        for _ in range(10_000):
            piece = self.pieces[cur[0]]
            c = piece.corners[cur[1]]
            if c.outgoing is None:
                break
            part = self.partner(cur[0], c.outgoing)
            if part is None:
                break
            prev = (part.piece, part.edge)
            if prev == (pid, ci) or prev in out:
                break
            out.insert(0, prev)
            cur = prev
        return out

    def _cycle_data(self, index, chain, closed):
        M = AffMap.identity()
        turning = 0.0
        has_finite = has_ideal = False
        for pid, ci in chain:
            piece = self.pieces[pid]
            c = piece.corners[ci]
            if c.finite:
                has_finite = True
                if turning is not None:
                    turning += c.angle
            else:
                has_ideal = True
                contrib = self._ideal_contribution(piece, c)
                if contrib is None or turning is None:
                    turning = None
                else:
                    turning += contrib
            if closed:
                tr = self.transfer(pid, c.incoming) if c.incoming is not None else None
                if tr is not None:
                    M = compose(M, invert(tr.T))
        return Cycle(index, list(chain), closed, M, turning if closed else None, has_finite, has_ideal)

    @staticmethod
    def _ideal_contribution(piece, c):
        if c.incoming is None:
            # whole chart without edges: the point at infinity of the plane
            return None if piece.is_log else -TWO_PI
        if not piece.is_log:
            return -c.beta
        if c.beta > 1e-12:
            return None
        e_in = piece.edges[c.incoming]
        e_out = piece.edges[c.outgoing]
        n_in = e_in.normal
        dw = -dot(n_in, e_out.origin - e_in.origin) * n_in
        return dw.imag

    def cycle_of_corner(self, pid, ci):
        for cyc in self.cycles():
            if (pid, ci) in cyc.corners:
                return cyc
        return None

    def cycle_of_point(self, pid, z, tol=1e-9):
        piece = self.pieces[pid]
        for c in piece.corners:
            if c.finite and abs(c.point - z) <= tol * max(1.0, abs(z)):
                return self.cycle_of_corner(pid, c.index)
        return None

    # --- singularities ------------------------------------------------------
    def record_for_cycle(self, cyc):
        for r in self.records:
            loc = r.location
            if loc and loc[0] == "cycle" and (str(loc[1]), int(loc[2])) in cyc.corners:
                return r
        return None

    def singularities(self):
        """All singular points (records) with their multiplicities, in a fixed order."""
        out = []
        for cyc in self.cycles():
            if not cyc.closed:
                continue
            rec = self.record_for_cycle(cyc)
            res = cyc.residue()
            if rec is not None:
                extra = dict(rec.extra)
                if res is not None:
                    extra.setdefault("computed_residue", res)
                out.append(SingularityRecord(rec.id, ("cycle",) + cyc.key, rec.order, rec.residue, extra))
                continue
            if res is None:
                continue
            if abs(res) <= RES_TOL and not cyc.marked:
                continue
            order = 1 if abs(res) > RES_TOL else 0
            extra = {"angle": (1 - res.real) * TWO_PI, "factor": abs(cyc.hol.a),
                     "kind": "vertex" if cyc.vertex_only else "end"}
            if cyc.marked:
                extra["marks"] = list(cyc.mark_ids)
            sid = cyc.mark_ids[0] if cyc.marked else f"c{cyc.index}"
            out.append(SingularityRecord(sid, ("cycle",) + cyc.key, order, res, extra))
        for m in self.marks:
            if self.cycle_of_point(m.piece, m.z) is None:
                out.append(SingularityRecord(m.id, ("point", m.piece, m.z), 0, 0j, {"kind": "mark"}))
        for r in self.records:
            if r.location and r.location[0] not in ("cycle",):
                out.append(r)
        return out

    def n(self):
        return sum(s.multiplicity for s in self.singularities())

    def euler_characteristic(self):
        v = sum(1 for c in self.cycles() if c.closed)
        return v - len(self.pairings) + len(self.pieces)

    def genus(self):
        if "genus" in self.meta:
            return int(self.meta["genus"])
        chi = self.euler_characteristic()
        return (2 - chi) // 2

    def residue_sum(self):
        return sum((s.residue for s in self.singularities()), 0j)

    # --- apexes (conical points and marks) ----------------------------------
    def apex_points(self):
        """List of (id, piece, z) for every finite corner of a singular or marked vertex and interior marks."""
        sing_by_cycle = {}
        for s in self.singularities():
            if s.location[0] == "cycle":
                cyc = self.cycle_of_corner(s.location[1], s.location[2])
                sing_by_cycle[cyc.index] = s
        out = []
        for cyc in self.cycles():
            s = sing_by_cycle.get(cyc.index)
            if s is None or not cyc.vertex_only:
                continue
            for pid, ci in cyc.corners:
                out.append((s.id, pid, self.pieces[pid].corners[ci].point))
        for m in self.marks:
            if self.cycle_of_point(m.piece, m.z) is None:
                out.append((m.id, m.piece, m.z))
        return out

    def locate(self, z, hint=None):
        """Pieces containing a point given in coordinates of piece ``hint``."""
        return [pid for pid in self.piece_ids() if self.pieces[pid].contains(z)]

    def replace(self, **kw):
        args = dict(pieces=list(self.pieces.values()), pairings=self.pairings, marks=self.marks,
                    records=self.records, traps=self.traps, overlaps=self.overlaps, meta=self.meta)
        args.update(kw)
        return Surface(**args)


def _with_anchor(pieces, pr):
    if pr.anchor is not None:
        w1, w2 = pr.anchor
        return Pairing(pr.s1, pr.s2, pr.dev_map, (complex(w1), complex(w2)))
    p, q = pieces[pr.s1.piece], pieces[pr.s2.piece]
    e1 = p.edges[pr.s1.edge]
    e2 = q.edges[pr.s2.edge]
    t = _mid_param(e1)
    w1 = e1.point(t)
    img = pr.dev_map(p.dev(w1))
    if not q.is_log:
        w2 = img
    else:
        if img == 0:
            raise InvalidSurface("edge maps onto the developed origin of a log piece")
        base = complex(math.log(abs(img)), cmath.phase(img))
        # pick the branch that lands on the partner edge
        best = None
        for k in range(-50, 51):
            cand = base + 2j * math.pi * k
            d = abs(dot(e2.normal, cand - e2.origin))
            tpar = e2.param(cand)
            if not e2.contains_param(tpar, 1e-6):
                d += 1.0 + min(abs(tpar - e2.t0), abs(tpar - e2.t1))
            if best is None or d < best[0]:
                best = (d, cand)
        w2 = best[1]
    return Pairing(pr.s1, pr.s2, pr.dev_map, (w1, w2))


def _mid_param(e):
    if e.bounded:
        return 0.5 * (e.t0 + e.t1)
    if math.isinf(e.t0) and math.isinf(e.t1):
        return 0.0
    if math.isinf(e.t1):
        return e.t0 + 1.0
    return e.t1 - 1.0


# --- validation ---------------------------------------------------------------


@dataclass
class ValidationReport:
    ok: bool
    genus: int | None
    n: int
    residue_sum: complex
    issues: list
    singularities: list

    def to_json(self):
        return {
            "ok": self.ok,
            "genus": self.genus,
            "n": self.n,
            "residue_sum": [self.residue_sum.real, self.residue_sum.imag],
            "issues": self.issues,
            "singularities": [s.to_json() for s in self.singularities],
        }


def _check_pairing(surface, k, pr, issues):
    p = surface.pieces[pr.s1.piece]
    q = surface.pieces[pr.s2.piece]
    e1, e2 = p.edges[pr.s1.edge], q.edges[pr.s2.edge]
    scale = max(p.scale(), q.scale())
    tol = max(TOL.eps_geom, 1e-9) * scale * 10
    tr = surface.transfer(pr.s1.piece, pr.s1.edge)
    params = e1.sample_params(scale=1.0)
    images = []
    for t in params:
        w = e1.point(t)
        try:
            w2 = tr.point(w)
        except Exception as exc:  # noqa: BLE001 - report-carried
            issues.append({"code": "MismatchedEdge", "pairing": k, "detail": str(exc)})
            return
        if not (cmath.isfinite(w2)):
            continue
        off = abs(dot(e2.normal, w2 - e2.origin))
        t2 = e2.param(w2)
        if off > tol * max(1.0, abs(w2)) or not e2.contains_param(t2, tol * max(1.0, abs(t2))):
            issues.append({"code": "MismatchedEdge", "pairing": k,
                           "detail": f"point {w} of {pr.s1} lands off {pr.s2}"})
            return
        images.append(t2)
    for a, b in zip(images[:-1], images[1:]):
        if b >= a:
            issues.append({"code": "MismatchedEdge", "pairing": k, "detail": "pairing preserves edge orientation"})
            return
    # finite endpoints must go to finite endpoints (or to the origin end of a log edge)
    for end, other in ((e1.start, e2.end), (e1.end, e2.start)):
        if end is None:
            continue
        img = pr.dev_map(p.dev(end))
        if q.is_log and abs(img) <= tol:
            continue
        w2 = tr.point(end)
        if other is None or abs(w2 - other) > tol * max(1.0, abs(other)):
            issues.append({"code": "MismatchedEdge", "pairing": k, "detail": f"endpoint {end} unmatched"})
            return


def validate(surface):
    """Check gluing geometry, vertex closure, topology and the residue sum."""
    issues = []
    for k, pr in enumerate(surface.pairings):
        if pr.s1 == pr.s2:
            issues.append({"code": "MismatchedEdge", "pairing": k, "detail": "edge glued to itself"})
            continue
        _check_pairing(surface, k, pr, issues)
    unpaired = surface.unpaired_edges()
    if unpaired and not surface.is_atlas and not surface.meta.get("boundary_ok"):
        for s in unpaired:
            issues.append({"code": "UnpairedEdge", "side": [s.piece, s.edge]})
    try:
        cycles = surface.cycles()
    except InvalidSurface as exc:
        issues.append({"code": "OpenVertexCycle", "detail": str(exc)})
        return ValidationReport(False, None, 0, 0j, issues, [])
    for cyc in cycles:
        if not cyc.closed:
            continue
        pid, ci = cyc.key
        piece = surface.pieces[pid]
        c = piece.corners[ci]
        if cyc.vertex_only:
            v = piece.dev(c.point)
            scale = max(1.0, abs(v))
            if abs(cyc.hol(v) - v) > 1e-7 * scale:
                issues.append({"code": "OpenVertexCycle", "cycle": list(cyc.key),
                               "detail": "holonomy does not fix the developed vertex"})
        if cyc.computable:
            rot = cmath.exp(1j * cyc.turning)
            if abs(cyc.hol.a / abs(cyc.hol.a) - rot) > 1e-7:
                issues.append({"code": "OpenVertexCycle", "cycle": list(cyc.key),
                               "detail": "turning angle inconsistent with holonomy"})
        rec = surface.record_for_cycle(cyc)
        if rec is None and not cyc.computable:
            issues.append({"code": "UnresolvedEnd", "cycle": list(cyc.key),
                           "detail": "end needs a stored singularity record"})
        if rec is not None and cyc.computable and rec.order <= 1:
            if abs(rec.residue - cyc.residue()) > 1e-7:
                issues.append({"code": "RecordMismatch", "cycle": list(cyc.key)})
    sings = surface.singularities()
    n = sum(s.multiplicity for s in sings)
    res_sum = sum((s.residue for s in sings), 0j)
    genus = None
    if surface.is_atlas:
        genus = surface.genus()
    elif not unpaired:
        chi = surface.euler_characteristic()
        if chi % 2 or chi > 2:
            issues.append({"code": "EulerCharacteristic", "detail": f"chi={chi}"})
        else:
            genus = (2 - chi) // 2
        if genus is not None and abs(res_sum - (2 - 2 * genus)) > 1e-9 * max(1, len(sings)):
            issues.append({"code": "ResidueSumViolation",
                           "detail": f"sum={res_sum}, expected {2 - 2 * genus}"})
    return ValidationReport(not issues, genus, n, res_sum, issues, sings)


def vertex_residues(surface):
    """List of (location, residue) for every singular vertex, end and mark."""
    for cyc in surface.cycles():
        if cyc.closed and cyc.vertex_only:
            pid, ci = cyc.key
            piece = surface.pieces[pid]
            v = piece.dev(piece.corners[ci].point)
            if abs(cyc.hol(v) - v) > 1e-7 * max(1.0, abs(v)):
                raise OpenVertexCycle(f"vertex cycle at {cyc.key} does not close")
    return [(s.location, s.residue) for s in surface.singularities()]
