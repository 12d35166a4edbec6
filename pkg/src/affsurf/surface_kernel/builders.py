"""Library of standard surfaces."""

import cmath
import math

from affsurf.affine_core import AffMap
from affsurf.errors import DegenerateLattice, InvalidSurface, Unsupported
from affsurf.surface_kernel.pieces import HalfPlane, Piece, cross, dot
from affsurf.surface_kernel.surface import (
    Mark,
    Pairing,
    Side,
    SingularityRecord,
    Surface,
    Trap,
    TrapRegion,
)


def segment_halfplane(a, b):
    """Half-plane to the left of the directed line a -> b."""
    d = (b - a) / abs(b - a)
    return HalfPlane(a, 1j * d)


def polygon_piece(pid, vertices, kind="flat"):
    """Convex polygon from its vertices in counterclockwise order."""
    k = len(vertices)
    hps = [segment_halfplane(vertices[i], vertices[(i + 1) % k]) for i in range(k)]
    return Piece(pid, kind, hps)


def find_edge(piece, point, direction, tol=1e-7):
    """Index of the edge through ``point`` running along ``direction``."""
    d = direction / abs(direction)
    best = None
    for e in piece.edges:
        if abs(e.direction - d) > 1e-7:
            continue
        off = abs(dot(e.normal, point - e.origin))
        if off > tol * max(1.0, abs(point)):
            continue
        t = e.param(point)
        if e.contains_param(t, tol * max(1.0, abs(t))):
            # prefer the edge whose interior contains the point
            inner = e.t0 + 1e-9 < t < e.t1 - 1e-9
            if best is None or inner:
                best = e.index
                if inner:
                    break
    if best is None:
        raise InvalidSurface(f"no edge of {piece.id} through {point} along {direction}")
    return best


def _edge_between(piece, a, b):
    return find_edge(piece, 0.5 * (a + b), b - a)


def build_flat_torus(u, v, marked=()):
    """Translation torus C/(Zu + Zv); the first marked point sits at the parallelogram corner."""
    u, v = complex(u), complex(v)
    area = cross(u, v)
    if abs(area) <= 1e-12 * max(1.0, abs(u) * abs(v)):
        raise DegenerateLattice(f"u={u}, v={v} are linearly dependent")
    if area < 0:
        u, v = v, u
    marked = [complex(m) for m in marked]
    c0 = marked[0] if marked else 0j
    verts = [c0, c0 + u, c0 + u + v, c0 + v]
    piece = polygon_piece("T", verts)
    pairings = [
        Pairing(Side("T", _edge_between(piece, verts[0], verts[1])),
                Side("T", _edge_between(piece, verts[2], verts[3])), AffMap(1, v)),
        Pairing(Side("T", _edge_between(piece, verts[3], verts[0])),
                Side("T", _edge_between(piece, verts[1], verts[2])), AffMap(1, u)),
    ]
    marks = []
    reduced = []
    for i, m in enumerate(marked):
        z = reduce_to_cell(m, c0, u, v)
        for r in reduced:
            if abs(r - z) < 1e-9:
                raise DegenerateLattice(f"marked point {m} repeats another one modulo the lattice")
        reduced.append(z)
        marks.append(Mark("T", z, f"m{i}"))
    meta = {"builder": "flat_torus", "lattice": [u, v]}
    return Surface([piece], pairings, marks=marks, meta=meta)


def reduce_to_cell(z, c0, u, v):
    """Representative of z modulo Zu + Zv in the cell c0 + [0,1)u + [0,1)v."""
    det = cross(u, v)
    w = z - c0
    s = cross(w, v) / det
    t = cross(u, w) / det
    s -= math.floor(s + 1e-12)
    t -= math.floor(t + 1e-12)
    if s > 1 - 1e-12:
        s = 0.0
    if t > 1 - 1e-12:
        t = 0.0
    return c0 + s * u + t * v


def build_skew_cone(s, alpha, truncation=None):
    """Sector of angle alpha with its sides glued by z -> s e^{i alpha} z, compactified at 0 and infinity."""
    if s <= 0 or alpha <= 0:
        raise InvalidSurface("skew cone needs s > 0 and alpha > 0")
    if truncation is not None:
        raise Unsupported("only the one-point compactified skew cone is built")
    k = max(1, math.ceil(alpha / (2 * math.pi / 3) - 1e-12))
    angles = [alpha * j / k for j in range(k + 1)]
    pieces = []
    for j in range(k):
        a0, a1 = angles[j], angles[j + 1]
        hps = [HalfPlane(0, 1j * cmath.exp(1j * a0)), HalfPlane(0, -1j * cmath.exp(1j * a1))]
        pieces.append(Piece(f"S{j}", "flat", hps))
    pairings = []
    for j in range(k - 1):
        d = cmath.exp(1j * angles[j + 1])
        pairings.append(Pairing(Side(f"S{j}", find_edge(pieces[j], d, -d)),
                                Side(f"S{j + 1}", find_edge(pieces[j + 1], d, d)), AffMap(1, 0)))
    d0, d1 = 1 + 0j, cmath.exp(1j * alpha)
    pairings.append(Pairing(Side("S0", find_edge(pieces[0], d0, d0)),
                            Side(f"S{k - 1}", find_edge(pieces[k - 1], d1, -d1)),
                            AffMap(s * cmath.exp(1j * alpha), 0)))
    pitch = math.log(s) / alpha
    regions = tuple(TrapRegion(f"S{j}", "spiral", (0j, pitch, 0.0, angles[j])) for j in range(k))
    traps = [Trap("anticonical-infinity", regions)]
    meta = {"builder": "skew_cone", "s": s, "alpha": alpha}
    return Surface(pieces, pairings, marks=[Mark("S0", 0j, "tip")], traps=traps, meta=meta)


def build_exp_affine_plane():
    """The plane with Christoffel symbol 1: one log chart, a double pole of residue 2 at infinity."""
    piece = Piece("E", "log", ())
    rec = SingularityRecord("p", ("cycle", "E", 0), 2, 2 + 0j,
                            {"centered": True, "family": {"d": 2, "res": [2.0, 0.0], "u": [[0.0, 0.0]], "b": [0.0, 0.0]}})
    traps = [Trap("right-half-plane", (TrapRegion("E", "halfplane", (0j, 1 + 0j)),))]
    return Surface([piece], [], records=[rec], traps=traps, meta={"builder": "exp_affine_plane"})


def exp_affine_christoffel_at_infinity():
    """Laurent coefficients {order: coeff} of the Christoffel symbol in the chart v = 1/z.

    With z = 1/v, Gamma_v = phi' * Gamma(phi) + phi''/phi' where phi(v) = 1/v and Gamma = 1.
    """
    from affsurf.fuchsian import LaurentSeries

    dphi = LaurentSeries(-2, [-1.0])  # -v^-2
    ddphi = LaurentSeries(-3, [2.0])  # 2 v^-3
    gamma_v = dphi * LaurentSeries(0, [1.0]) + ddphi * dphi.reciprocal(4)
    return gamma_v.truncate(2)


def build_translation_cylinder(height=math.inf, circumference=1.0):
    """Vertical strip 0 <= x <= c with x=0 glued to x=c; infinite height gives both ends residue 1."""
    c = float(circumference)
    hps = [HalfPlane(0, 1), HalfPlane(c, -1)]
    meta = {"builder": "translation_cylinder", "height": height, "circumference": c}
    if not math.isinf(height):
        hps += [HalfPlane(0, 1j), HalfPlane(1j * height, -1j)]
        meta["boundary_ok"] = True
    piece = Piece("C", "flat", hps)
    left = find_edge(piece, 0.5j if not math.isinf(height) else 0j, -1j)
    right = find_edge(piece, c + (0.5j if not math.isinf(height) else 0j), 1j)
    pairings = [Pairing(Side("C", left), Side("C", right), AffMap(1, c))]
    traps = []
    if math.isinf(height):
        traps = [Trap("top-end", (TrapRegion("C", "halfplane", (0j, 1j)),)),
                 Trap("bottom-end", (TrapRegion("C", "halfplane", (0j, -1j)),))]
    return Surface([piece], pairings, traps=traps, meta=meta)


def build_affine_torus(u, v):
    """Log-chart parallelogram with sides u, v; gluings w -> w + u and w -> w + v."""
    u, v = complex(u), complex(v)
    area = cross(u, v)
    if abs(area) <= 1e-12:
        raise DegenerateLattice(f"u={u}, v={v} are linearly dependent")
    if area < 0:
        u, v = v, u
    verts = [0j, u, u + v, v]
    piece = polygon_piece("A", verts, kind="log")
    pairings = [
        Pairing(Side("A", _edge_between(piece, verts[0], verts[1])),
                Side("A", _edge_between(piece, verts[2], verts[3])), AffMap(cmath.exp(v), 0),
                (0.5 * u, 0.5 * u + v)),
        Pairing(Side("A", _edge_between(piece, verts[3], verts[0])),
                Side("A", _edge_between(piece, verts[1], verts[2])), AffMap(cmath.exp(u), 0),
                (0.5 * v, 0.5 * v + u)),
    ]
    return Surface([piece], pairings, meta={"builder": "affine_torus", "lattice": [u, v]})


def build_affine_cylinder(c):
    """Log-chart strip glued by w -> w + c (the quotient of C* by z -> e^c z)."""
    c = complex(c)
    if abs(c) <= 1e-12:
        raise DegenerateLattice("affine cylinder generator must be nonzero")
    if abs(c.imag) > 1e-12:
        if c.imag < 0:
            c = -c
        hps = [HalfPlane(0, 1j), HalfPlane(1j * c.imag, -1j)]
        piece = Piece("L", "log", hps)
        lo = find_edge(piece, 0j, 1)
        hi = find_edge(piece, 1j * c.imag, -1)
        pairings = [Pairing(Side("L", lo), Side("L", hi), AffMap(cmath.exp(c), 0), (0j, c))]
    else:
        if c.real < 0:
            c = -c
        hps = [HalfPlane(0, 1), HalfPlane(c.real, -1)]
        piece = Piece("L", "log", hps)
        lo = find_edge(piece, 0j, -1j)
        hi = find_edge(piece, c.real, 1j)
        pairings = [Pairing(Side("L", lo), Side("L", hi), AffMap(cmath.exp(c), 0), (0j, c))]
    return Surface([piece], pairings, meta={"builder": "affine_cylinder", "c": c})


def build_cushion(side=1.0):
    """Two squares with corresponding edges glued: a sphere with four corners of angle pi."""
    a = float(side)
    verts = [0j, a, a + 1j * a, 1j * a]
    q1 = polygon_piece("Q1", verts)
    q2 = polygon_piece("Q2", verts)
    # Q2 is the back face seen through the mirror x -> a - x, so the gluing
    # restricted to each side is z -> a - conj(z), extended holomorphically
    sides = [
        ((verts[0], verts[1]), (verts[0], verts[1]), AffMap(-1, a)),
        ((verts[2], verts[3]), (verts[2], verts[3]), AffMap(-1, a + 2j * a)),
        ((verts[3], verts[0]), (verts[1], verts[2]), AffMap(1, a)),
        ((verts[1], verts[2]), (verts[3], verts[0]), AffMap(1, -a)),
    ]
    pairings = [Pairing(Side("Q1", _edge_between(q1, *e1)), Side("Q2", _edge_between(q2, *e2)), m)
                for e1, e2, m in sides]
    return Surface([q1, q2], pairings, meta={"builder": "cushion", "side": a})
