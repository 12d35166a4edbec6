"""Convex planar pieces given as intersections of closed half-planes."""

import cmath
import math
from dataclasses import dataclass, field

from affsurf.errors import InvalidSurface

TWO_PI = 2 * math.pi
_LEN_TOL = 1e-9


def dot(u, v):
    """Euclidean inner product of two complex numbers seen as vectors."""
    return u.real * v.real + u.imag * v.imag


def cross(u, v):
    return u.real * v.imag - u.imag * v.real


@dataclass(frozen=True)
class HalfPlane:
    """Closed half-plane {z : <n, z - p> >= 0} with unit inward normal n."""

    p: complex
    n: complex

    def __post_init__(self):
        n = complex(self.n)
        if abs(n) == 0:
            raise InvalidSurface("half-plane normal must be nonzero")
        object.__setattr__(self, "p", complex(self.p))
        if abs(abs(n) - 1) > 1e-15:
            n = n / abs(n)
        object.__setattr__(self, "n", n)

    def value(self, z):
        return dot(self.n, z - self.p)

    @property
    def direction(self):
        # boundary direction with the interior on its left
        return -1j * self.n


@dataclass(frozen=True)
class Edge:
    index: int
    hp: int
    origin: complex
    direction: complex
    t0: float
    t1: float

    @property
    def start(self):
        return None if math.isinf(self.t0) else self.origin + self.t0 * self.direction

    @property
    def end(self):
        return None if math.isinf(self.t1) else self.origin + self.t1 * self.direction

    @property
    def normal(self):
        return 1j * self.direction

    @property
    def bounded(self):
        return not (math.isinf(self.t0) or math.isinf(self.t1))

    def point(self, t):
        return self.origin + t * self.direction

    def param(self, z):
        return dot(self.direction, z - self.origin)

    def sample_params(self, scale=1.0):
        """A few parameters on the edge, including both finite ends."""
        t0, t1 = self.t0, self.t1
        if self.bounded:
            return [t0, t0 + 0.25 * (t1 - t0), t0 + 0.5 * (t1 - t0), t0 + 0.75 * (t1 - t0), t1]
        if math.isinf(t0) and math.isinf(t1):
            return [-3.0 * scale, -scale, 0.0, scale, 3.0 * scale]
        if math.isinf(t1):
            return [t0, t0 + 0.5 * scale, t0 + scale, t0 + 3 * scale]
        return [t1 - 3 * scale, t1 - scale, t1 - 0.5 * scale, t1]

    def contains_param(self, t, tol=_LEN_TOL):
        return self.t0 - tol <= t <= self.t1 + tol

    def distance(self, z):
        t = min(max(self.param(z), self.t0), self.t1)
        return abs(self.point(t) - z)


@dataclass(frozen=True)
class Corner:
    """The boundary part between edge ``incoming`` and the next edge ``outgoing``."""

    index: int
    incoming: int | None
    outgoing: int | None
    point: complex | None
    angle: float | None = None
    beta: float | None = None

    @property
    def finite(self):
        return self.point is not None


def _wrap(x):
    return x % TWO_PI


@dataclass(frozen=True)
class Piece:
    """A convex region in a flat chart (kind 'flat') or in the log chart (kind 'log').

    ``splits`` are extra boundary points cutting an edge into collinear pieces;
    they let a single side be glued to several partners.
    """

    id: str
    kind: str
    halfplanes: tuple
    splits: tuple = ()
    edges: tuple = field(init=False, repr=False, compare=False)
    corners: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("flat", "log"):
            raise InvalidSurface(f"piece {self.id}: unknown kind {self.kind!r}")
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "halfplanes", tuple(self.halfplanes))
        object.__setattr__(self, "splits", tuple(complex(s) for s in self.splits))
        edges = _build_edges(self.id, self.halfplanes, self.splits)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "corners", _build_corners(edges))

    # --- geometry -----------------------------------------------------------
    @property
    def is_log(self):
        return self.kind == "log"

    @property
    def bounded(self):
        return bool(self.edges) and all(e.bounded for e in self.edges)

    def dev(self, z):
        return cmath.exp(z) if self.is_log else z

    def dev_velocity(self, z, v):
        return cmath.exp(z) * v if self.is_log else v

    def contains(self, z, tol=1e-9):
        return all(h.value(z) >= -tol for h in self.halfplanes)

    def margin(self, z):
        """Signed distance to the nearest bounding line (positive inside)."""
        if not self.halfplanes:
            return math.inf
        return min(h.value(z) for h in self.halfplanes)

    def finite_points(self):
        return [c.point for c in self.corners if c.finite]

    def scale(self):
        pts = self.finite_points() + [h.p for h in self.halfplanes]
        return max([1.0] + [abs(p) for p in pts])

    def interior_point(self):
        """A point deep inside the piece (Chebyshev centre, radius capped at 1)."""
        if not self.halfplanes:
            return 0j
        if self.bounded:
            pts = self.finite_points()
            return sum(pts) / len(pts)
        from scipy.optimize import linprog

        big = 10.0 * self.scale()
        # variables x, y, r ; maximize r
        a_ub, b_ub = [], []
        for h in self.halfplanes:
            # -(n.x x + n.y y) + r <= -n.p
            a_ub.append([-h.n.real, -h.n.imag, 1.0])
            b_ub.append(-dot(h.n, h.p))
        res = linprog([0, 0, -1], A_ub=a_ub, b_ub=b_ub,
                      bounds=[(-big, big), (-big, big), (0, 1.0)], method="highs")
        if not res.success or res.x[2] <= 1e-12:
            raise InvalidSurface(f"piece {self.id} has empty interior")
        return complex(res.x[0], res.x[1])

    def recession_direction(self):
        """A unit direction d with <n, d> >= 0 for every half-plane (None if bounded)."""
        if not self.halfplanes:
            return 1 + 0j
        cands = [h.direction for h in self.halfplanes] + [-h.direction for h in self.halfplanes]
        cands += [h.n for h in self.halfplanes]
        best, best_val = None, -math.inf
        for i, u in enumerate(cands):
            for v in cands[i:]:
                d = u + v
                if abs(d) < 1e-12:
                    continue
                d /= abs(d)
                val = min(dot(h.n, d) for h in self.halfplanes)
                if val > best_val + 1e-15:
                    best, best_val = d, val
        if best_val < -1e-12:
            return None
        return best

    def in_recession_cone(self, d, tol=1e-12):
        return all(dot(h.n, d) >= -tol for h in self.halfplanes)

    def edge_of_hp(self, hp, z):
        for e in self.edges:
            if e.hp == hp and e.contains_param(e.param(z)):
                return e.index
        return None

    def locate_boundary(self, z, tol=1e-9):
        """Return ('corner', i), ('edge', i) or None for a boundary point."""
        for c in self.corners:
            if c.finite and abs(c.point - z) <= tol * max(1.0, abs(z)):
                return ("corner", c.index)
        for e in self.edges:
            if abs(dot(e.normal, z - e.origin)) <= tol * max(1.0, abs(z)) and e.contains_param(e.param(z), tol):
                return ("edge", e.index)
        return None

    def with_splits(self, extra):
        pts = list(self.splits)
        for q in extra:
            if all(abs(q - s) > 1e-9 for s in pts):
                pts.append(q)
        return Piece(self.id, self.kind, self.halfplanes, tuple(pts))

    def renamed(self, new_id):
        return Piece(new_id, self.kind, self.halfplanes, self.splits)


def _interval(j, halfplanes):
    hj = halfplanes[j]
    d = hj.direction
    lo, hi = -math.inf, math.inf
    for k, hk in enumerate(halfplanes):
        if k == j:
            continue
        c = dot(hk.n, d)
        off = hk.value(hj.p)
        if abs(c) < 1e-13:
            if off < -1e-12:
                return None
            if abs(off) <= 1e-12:
                if dot(hk.n, hj.n) > 0:
                    if k < j:
                        return None
                else:
                    raise InvalidSurface("piece has empty interior (opposite coincident half-planes)")
            continue
        t = -off / c
        if c > 0:
            lo = max(lo, t)
        else:
            hi = min(hi, t)
    if hi - lo <= _LEN_TOL:
        return None
    return lo, hi


def _build_edges(pid, halfplanes, splits):
    raw = []
    for j, h in enumerate(halfplanes):
        iv = _interval(j, halfplanes)
        if iv is None:
            continue
        lo, hi = iv
        d = h.direction
        cuts = []
        for q in splits:
            if abs(h.value(q)) <= 1e-9 * max(1.0, abs(q)):
                t = dot(d, q - h.p)
                if lo + _LEN_TOL < t < hi - _LEN_TOL:
                    cuts.append(t)
        cuts.sort()
        bounds = [lo] + cuts + [hi]
        for a, b in zip(bounds[:-1], bounds[1:]):
            if b - a > _LEN_TOL:
                raw.append((j, h.p, d, a, b))
    if not raw:
        return ()
    # ccw order: increasing direction angle, ties by position along the line
    raw.sort(key=lambda r: (round(_wrap(cmath.phase(r[2])), 12), r[3]))
    if len(raw) > 1:
        # rotate so the sequence is a boundary walk: each unbounded-end edge
        # is followed by an unbounded-start edge
        n = len(raw)
        for shift in range(n):
            seq = raw[shift:] + raw[:shift]
            if _is_chain(seq):
                raw = seq
                break
        else:
            raise InvalidSurface(f"piece {pid}: cannot order boundary edges")
    # start at the lexicographically smallest inward normal
    n = len(raw)

    def nkey(r):
        nrm = 1j * r[2]
        return (round(nrm.real, 12), round(nrm.imag, 12))

    best = min(range(n), key=lambda i: (nkey(raw[i]), _first_of_line(raw, i)))
    raw = raw[best:] + raw[:best]
    return tuple(Edge(i, r[0], r[1], r[2], r[3], r[4]) for i, r in enumerate(raw))


def _first_of_line(raw, i):
    # among collinear pieces of one line pick the first along the boundary
    j, n = raw[i][0], len(raw)
    prev = raw[(i - 1) % n]
    return 0 if prev[0] != j or n == 1 else 1


def _is_chain(seq):
    n = len(seq)
    for i in range(n):
        a, b = seq[i], seq[(i + 1) % n]
        end_inf = math.isinf(a[4])
        start_inf = math.isinf(b[3])
        if end_inf != start_inf:
            return False
        if not end_inf:
            pa = a[1] + a[4] * a[2]
            pb = b[1] + b[3] * b[2]
            if abs(pa - pb) > 1e-7 * max(1.0, abs(pa)):
                return False
    return True


def _build_corners(edges):
    if not edges:
        return (Corner(0, None, None, None, None, 0.0),)
    out = []
    k = len(edges)
    for i, e in enumerate(edges):
        f = edges[(i + 1) % k]
        if math.isinf(e.t1):
            beta = _wrap(cmath.phase(-f.direction) - cmath.phase(e.direction))
            if beta > TWO_PI - 1e-12:
                beta = 0.0
            out.append(Corner(i, i, (i + 1) % k, None, None, beta))
        else:
            turn = cmath.phase(f.direction / e.direction)
            out.append(Corner(i, i, (i + 1) % k, e.end, math.pi - turn, None))
    return tuple(out)
