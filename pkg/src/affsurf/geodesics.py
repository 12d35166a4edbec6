"""Geodesics on surfaces made of flat and log pieces.

In a flat piece a geodesic is a straight segment z0 + v t.  In a log piece it
is the lift w0 + Log(1 + v t) of the straight developed segment e^{w0}(1 + v t).
Crossing an edge applies the pairing's developed map to position and velocity.
"""

import cmath
import math
from dataclasses import dataclass, field

from scipy.optimize import brentq

from affsurf.affine_core import AffMap, compose, invert
from affsurf.config import TOL
from affsurf.errors import (
    CuspDetected,
    LoopHitsSingularity,
    LoopNotClosed,
    StartOutsidePiece,
    ZeroVelocity,
)
from affsurf.surface_kernel.pieces import TWO_PI, cross, dot

CLOSE_TOL = 1e-8


@dataclass(frozen=True)
class GeodesicState:
    piece: str
    position: complex
    velocity: complex
    time: float = 0.0

    def to_json(self):
        return {"piece": self.piece, "position": [self.position.real, self.position.imag],
                "velocity": [self.velocity.real, self.velocity.imag], "time": self.time}


@dataclass(frozen=True)
class Segment:
    """Piece of trajectory z(s) for s in [0, duration] starting at global time t0."""

    piece: str
    log: bool
    z0: complex
    v: complex
    t0: float
    duration: float

    def at(self, s):
        if self.log:
            return self.z0 + cmath.log(1 + self.v * s)
        return self.z0 + self.v * s

    def velocity_at(self, s):
        if self.log:
            return self.v / (1 + self.v * s)
        return self.v

    def sample(self, k=8):
        if not self.log or k <= 1:
            return [self.z0, self.at(self.duration)]
        return [self.at(self.duration * i / (k - 1)) for i in range(k)]


@dataclass(frozen=True)
class Termination:
    kind: str  # HitApex | EnteredTrap | TimedOut | CrossingsCapped | ClosedUp | HitBoundary
    id: str | None = None
    time: float | None = None
    factor: float | None = None
    period: float | None = None

    def to_json(self):
        out = {"kind": self.kind}
        for key in ("id", "time", "factor", "period"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out


@dataclass
class TraceResult:
    start: GeodesicState
    segments: list
    crossings: int
    termination: Termination
    final: GeodesicState
    dev_map: AffMap = field(default_factory=AffMap.identity)

    def polylines(self, samples=8):
        out = []
        for seg in self.segments:
            pts = seg.sample(samples)
            if out and out[-1][0] == seg.piece and abs(out[-1][1][-1] - pts[0]) < 1e-12:
                out[-1][1].extend(pts[1:])
            else:
                out.append((seg.piece, list(pts)))
        return out

    def to_json(self, samples=8):
        return {
            "start": self.start.to_json(),
            "termination": self.termination.to_json(),
            "crossings": self.crossings,
            "final": self.final.to_json(),
            "polylines": [{"piece": p, "points": [[z.real, z.imag] for z in pts]}
                          for p, pts in self.polylines(samples)],
        }


# --- exit times ------------------------------------------------------------


def _flat_exit(piece, z, v, horizon):
    best_t, best_h = horizon, None
    for i, h in enumerate(piece.halfplanes):
        c = dot(h.n, v)
        if c >= -1e-15 * abs(v):
            continue
        t = max(h.value(z), 0.0) / -c
        if t < best_t - 1e-15 * max(1.0, best_t) or (best_h is None and t <= best_t):
            best_t, best_h = t, i
    return best_t, best_h


def _log_value(h, w0, v, t):
    q = 1 + v * t
    if abs(q) < 1e-300:
        # at the focus itself: step back just short of it
        q = 1 + v * t * (1 - 1e-12)
    return h.value(w0 + cmath.log(q))


def _log_exit(piece, w0, v, horizon):
    """First time the path w0 + Log(1 + v t) leaves the piece, or the horizon."""
    best_t, best_h = horizon, None
    c = 1 / v
    for i, h in enumerate(piece.halfplanes):
        f0 = max(h.value(w0), 0.0)
        nr = h.n.real
        # sign of f' equals the sign of Re(n c) + t Re(n)
        crit = -(h.n * c).real / nr if abs(nr) > 1e-15 else None
        knots = [0.0]
        if crit is not None and 0 < crit < best_t:
            knots.append(crit)
        end = best_t
        for a, b in zip(knots, knots[1:] + [end]):
            fa = f0 if a == 0 else _log_value(h, w0, v, a)
            if fa < 0:
                root = a
                break
            if math.isinf(b):
                b = _bracket_end(h, w0, v, a)
                if b is None:
                    continue
            fb = _log_value(h, w0, v, b)
            if fb < 0:
                if fa == 0 and a == 0:
                    # sitting on the line: leaving immediately if the derivative is negative
                    if dot(h.n, v) < 0:
                        root = 0.0
                        break
                    fa = _log_value(h, w0, v, min(b, 1e-12) or 1e-12)
                    if fa < 0:
                        root = 0.0
                        break
                root = brentq(lambda t: _log_value(h, w0, v, t), a, b, xtol=1e-15, rtol=1e-15)
                break
        else:
            continue
        if root < best_t:
            best_t, best_h = root, i
    return best_t, best_h


def _bracket_end(h, w0, v, a):
    t = max(1.0, 2 * a)
    for _ in range(200):
        if _log_value(h, w0, v, t) < 0:
            return t
        t *= 4
        if t > 1e300:
            break
    return None


# --- apex hits ---------------------------------------------------------------


def _closest(seg_log, z0, v, a, t_end):
    """Parameter and distance of the closest approach of a segment to point a."""
    if seg_log:
        # developed line e^{w0}(1 + v t); compare in log coordinates on the same branch
        target = cmath.exp(a - z0) - 1
        t = (target * v.conjugate()).real / abs(v) ** 2
        t = min(max(t, 0.0), t_end)
        w = z0 + cmath.log(1 + v * t) if abs(1 + v * t) > 0 else complex(-math.inf, 0)
        return t, abs(w - a)
    t = dot(v, a - z0) / abs(v) ** 2
    t = min(max(t, 0.0), t_end)
    return t, abs(z0 + v * t - a)


def _piece_apexes(surface):
    out = {}
    for sid, pid, z in surface.apex_points():
        out.setdefault(pid, []).append((sid, z))
    return out


# --- tracing -----------------------------------------------------------------


def _atlas_switch(surface, pid, z, v):
    """Move to the chart of an overlapping piece that contains z with the largest margin."""
    best = None
    src = surface.pieces[pid]
    for ov in surface.overlaps:
        if ov.piece1 == pid:
            glue, dst = ov.glue, ov.piece2
        elif ov.piece2 == pid:
            glue, dst = ov.glue.inverse(), ov.piece1
        else:
            continue
        try:
            z2 = glue(z)
        except Exception:  # point on the slit of the gluing
            continue
        q = surface.pieces[dst]
        m = q.margin(z2)
        if m <= 1e-9:
            continue
        # velocity via developed coordinates
        big_v = src.dev_velocity(z, v) * glue.dev_map().a
        v2 = big_v / cmath.exp(z2) if q.is_log else big_v
        if best is None or m > best[0]:
            best = (m, dst, z2, v2, glue.dev_map())
    return best


def _raw_compose(f, m):
    return (f.a * m[0], f.a * m[1] + f.b)


def _as_map(m):
    try:
        return AffMap(*m)
    except Exception:  # degenerate after many contracting crossings
        return None


def trace(surface, start, t_max=math.inf, max_crossings=None, stop_on_trap=True,
          stop_on_close=True):
    """Follow the geodesic from ``start`` until a termination event."""
    if max_crossings is None:
        max_crossings = TOL.max_crossings
    pid = start.piece
    if pid not in surface.pieces:
        raise StartOutsidePiece(f"unknown piece {pid}")
    z, v = complex(start.position), complex(start.velocity)
    if abs(v) <= TOL.eps_zero:
        raise ZeroVelocity("initial velocity is zero")
    piece = surface.pieces[pid]
    if not piece.contains(z, 1e-9 * max(1.0, abs(z))):
        raise StartOutsidePiece(f"{z} is not inside piece {pid}")
    apexes = _piece_apexes(surface)
    traps_at_start = {t.id for t in surface.traps if t.contains(pid, z)}
    t = float(start.time)
    segments = []
    crossings = 0
    zero_run = 0
    M = (1 + 0j, 0j)  # accumulated developed map, kept raw: it may shrink below eps_zero
    s_pid, s_z, s_v = pid, z, v
    while True:
        piece = surface.pieces[pid]
        horizon = t_max - (t - start.time)
        focus = None
        if piece.is_log and abs(v.imag) <= 1e-14 * abs(v) and v.real < 0:
            focus = -1 / v.real
            horizon = min(horizon, focus)
        if piece.is_log:
            t_exit, hp = _log_exit(piece, z, v, horizon)
        else:
            t_exit, hp = _flat_exit(piece, z, v, horizon)
        events = []
        for sid, a in apexes.get(pid, ()):
            if crossings == 0 and not segments and abs(a - z) <= TOL.eps_hit * max(1.0, abs(a)):
                continue
            lim = t_exit if not math.isinf(t_exit) else 1e300
            s, dist = _closest(piece.is_log, z, v, a, lim)
            if dist <= TOL.eps_hit * max(1.0, abs(a)) and (s > 1e-12 or segments):
                events.append((s, 0, ("apex", sid)))
        if focus is not None and focus <= t_exit + 1e-15:
            events.append((focus, 0, ("focus", pid)))
        if stop_on_close and pid == s_pid and (segments or crossings):
            lim = t_exit if not math.isinf(t_exit) else 1e300
            s, dist = _closest(piece.is_log, z, v, s_z, lim)
            if dist <= CLOSE_TOL * max(1.0, abs(s_z)) and s > 1e-12:
                vel = v / (1 + v * s) if piece.is_log else v
                ratio = vel / s_v
                if abs(cmath.phase(ratio)) <= CLOSE_TOL:
                    events.append((s, 1, ("closed", abs(ratio))))
        if events:
            s, _, ev = min(events, key=lambda e: (e[0], e[1]))
            segments.append(Segment(pid, piece.is_log, z, v, t, s))
            t += s
            zf = segments[-1].at(s) if not (ev[0] == "focus") else complex(-math.inf, 0)
            vf = segments[-1].velocity_at(s) if ev[0] != "focus" else v
            final = GeodesicState(pid, zf, vf, t)
            if ev[0] == "apex":
                term = Termination("HitApex", ev[1], t)
            elif ev[0] == "focus":
                term = Termination("HitApex", f"focus:{pid}", t)
            else:
                period = (t - start.time) * abs(s_v)
                term = Termination("ClosedUp", None, t, ev[1], period)
            return TraceResult(start, segments, crossings, term, final, _as_map(M))
        if hp is None:
            # ran out of time inside the piece
            segments.append(Segment(pid, piece.is_log, z, v, t, t_exit))
            t += t_exit
            seg = segments[-1]
            final = GeodesicState(pid, seg.at(t_exit), seg.velocity_at(t_exit), t)
            return TraceResult(start, segments, crossings, Termination("TimedOut", None, t), final, _as_map(M))
        seg = Segment(pid, piece.is_log, z, v, t, t_exit)
        segments.append(seg)
        t += t_exit
        zx = seg.at(t_exit)
        vx = seg.velocity_at(t_exit)
        zero_run = zero_run + 1 if t_exit <= 1e-12 * max(1.0, abs(zx)) else 0
        if zero_run > 64:
            final = GeodesicState(pid, zx, vx, t)
            return TraceResult(start, segments, crossings, Termination("HitApex", "corner", t), final, _as_map(M))
        edge = piece.edge_of_hp(hp, zx)
        if edge is None:
            edge = min((e for e in piece.edges if e.hp == hp), key=lambda e: e.distance(zx)).index
        tr = surface.transfer(pid, edge)
        if tr is None:
            switched = _atlas_switch(surface, pid, zx, vx) if surface.is_atlas else None
            if switched is None:
                final = GeodesicState(pid, zx, vx, t)
                return TraceResult(start, segments, crossings, Termination("HitBoundary", None, t), final, _as_map(M))
            _, pid, z, v, gmap = switched
            M = _raw_compose(gmap, M)
        else:
            z = tr.point(zx)
            v = tr.velocity(zx, vx, z)
            pid = tr.dst.id
            M = _raw_compose(tr.T, M)
        crossings += 1
        if crossings >= max_crossings:
            final = GeodesicState(pid, z, v, t)
            return TraceResult(start, segments, crossings, Termination("CrossingsCapped", None, t), final, _as_map(M))
        if stop_on_trap:
            for trap in surface.traps:
                if trap.id not in traps_at_start and trap.contains(pid, z):
                    final = GeodesicState(pid, z, v, t)
                    return TraceResult(start, segments, crossings, Termination("EnteredTrap", trap.id, t), final, _as_map(M))


# --- traps -------------------------------------------------------------------


def _sample_params(duration, k):
    if math.isinf(duration):
        # geometric grid out to 1e12, enough to see the asymptotic direction
        return [0.0] + [10.0 ** (-3 + 15 * i / (k - 1)) for i in range(k)]
    return [duration * i / (k - 1) for i in range(k)]


def trap_exit(surface, trap, result, samples=33, tol=1e-9):
    """First point of a trace lying outside ``trap`` (None if the trace stays inside).

    Each segment is tested at ``samples`` parameters; in a flat piece half-plane
    regions are linear along the segment, so the two ends settle it.
    """
    if isinstance(trap, str):
        trap = next(t for t in surface.traps if t.id == trap)
    for i, seg in enumerate(result.segments):
        regions = [r for r in trap.regions if r.piece == seg.piece]
        if not regions:
            return i, seg.piece, seg.z0
        linear = not seg.log and all(r.kind == "halfplane" for r in regions) and len(regions) == 1
        params = [0.0, seg.duration] if linear and math.isfinite(seg.duration) else \
            _sample_params(seg.duration, samples)
        for s in params:
            z = seg.at(s)
            if not any(r.contains(z, tol * max(1.0, abs(z))) for r in regions):
                return i, seg.piece, z
    return None


# --- loops -------------------------------------------------------------------


def _developed_target(surface, a_pid, a_z, b_pid, b_z, via=None):
    """Candidate positions of waypoint b seen from the chart of waypoint a."""
    out = []
    if a_pid == b_pid and via is None:
        out.append((surface.pieces[a_pid].dev(b_z), None))
    pa = surface.pieces[a_pid]
    for e in pa.edges:
        if via is not None and e.index != via:
            continue
        tr = surface.transfer(a_pid, e.index)
        if tr is None or tr.dst.id != b_pid:
            continue
        # developed position of b pulled back into a's developed frame
        dev_b = invert(tr.T)(tr.dst.dev(b_z))
        out.append((dev_b, e.index))
    return out


def _leg(surface, a_pid, a_z, b_pid, b_z, via=None):
    """Trace the straight leg between consecutive waypoints; returns the TraceResult."""
    pa = surface.pieces[a_pid]
    last = None
    for dev_b, _edge in _developed_target(surface, a_pid, a_z, b_pid, b_z, via):
        if pa.is_log:
            za = cmath.exp(a_z)
            if dev_b == 0:
                continue
            v = (dev_b - za) / za
        else:
            v = dev_b - a_z
        if abs(v) <= TOL.eps_zero:
            continue
        res = trace(surface, GeodesicState(a_pid, a_z, v), t_max=1.0, stop_on_trap=False, stop_on_close=False)
        last = res
        if res.termination.kind == "HitApex":
            raise LoopHitsSingularity(f"leg from {a_pid}:{a_z} hits {res.termination.id}")
        if res.termination.kind != "TimedOut":
            continue
        f = res.final
        if f.piece == b_pid and abs(f.position - b_z) <= 1e-7 * max(1.0, abs(b_z)):
            return res
    if last is None:
        raise LoopNotClosed(f"waypoints {a_pid}:{a_z} and {b_pid}:{b_z} are not in the same or adjacent pieces")
    raise LoopNotClosed(f"no straight leg from {a_pid}:{a_z} reaches {b_pid}:{b_z}")


def _waypoint(w):
    if len(w) == 3:
        return str(w[0]), complex(w[1]), w[2]
    return str(w[0]), complex(w[1]), None


def _loop_legs(surface, waypoints):
    """Legs of a closed polygon.  A waypoint (piece, z, edge) says the leg reaching it
    leaves the previous piece through ``edge``; (piece, z) means a leg inside one piece
    or across any edge joining the two pieces."""
    pts = [_waypoint(w) for w in waypoints]
    if len(pts) < 3:
        raise LoopNotClosed("a loop needs at least three waypoints")
    legs = []
    n = len(pts)
    for i in range(n):
        ap, az, _ = pts[i]
        bp, bz, via = pts[(i + 1) % n]
        legs.append(_leg(surface, ap, az, bp, bz, via))
    return legs


def holonomy(surface, waypoints):
    """Linear and affine holonomy of a closed polygonal loop given by waypoints (piece, z).

    Consecutive waypoints must lie in one piece or in pieces glued along the edge the
    straight leg crosses.  The affine part L satisfies dev(end) = L(dev(start)).
    """
    legs = _loop_legs(surface, waypoints)
    M = AffMap.identity()
    for leg in legs:
        M = compose(leg.dev_map, M)
    L = invert(M)
    return L.a, L


def turning_number(surface, waypoints):
    """Turning number of the geodesic polygon through the waypoints (in full turns)."""
    legs = _loop_legs(surface, waypoints)
    total = 0.0
    n = len(legs)
    for i in range(n):
        v_in = legs[i].final.velocity
        v_out = legs[(i + 1) % n].start.velocity
        ang = cmath.phase(v_out / v_in)
        if abs(abs(ang) - math.pi) <= TOL.eps_arg:
            raise CuspDetected(f"cusp at waypoint {i + 1}")
        total += ang
    return total / TWO_PI


def loop_around(surface, pid, center, radius, k=8, phase=0.1):
    """Waypoints of a small regular polygon around a point, split across the pieces it visits.

    Works for a finite corner ``center`` of piece ``pid``: the polygon is unfolded
    around the vertex cycle so its total angle matches the cone angle.
    """
    cyc = surface.cycle_of_point(pid, center)
    if cyc is None:
        pts = [(pid, center + radius * cmath.exp(1j * (phase + TWO_PI * j / k))) for j in range(k)]
        return pts
    # corners of a cycle are listed counterclockwise: each one is left through its
    # incoming edge into the next
    out = []
    via = None
    for cpid, ci in cyc.corners:
        p = surface.pieces[cpid]
        c = p.corners[ci]
        a0 = cmath.phase(p.edges[c.outgoing].direction)
        # the corner spans the angles [a0, a0 + angle]
        per = max(3, math.ceil(k * c.angle / TWO_PI))
        for j in range(per):
            ang = a0 + c.angle * (j + 0.5) / per
            z = c.point + radius * cmath.exp(1j * ang)
            out.append((cpid, z, via) if j == 0 else (cpid, z, None))
        via = c.incoming
    # the first waypoint is reached from the last corner through its incoming edge
    first = out[0]
    out[0] = (first[0], first[1], via)
    return out


# --- cylinders ---------------------------------------------------------------


@dataclass
class Cylinder:
    kind: str
    factor: float
    circumference: float
    height: float | None = None
    angle: float | None = None
    boundary: dict = field(default_factory=dict)

    def to_json(self):
        out = {"kind": self.kind, "factor": self.factor, "circumference": self.circumference,
               "boundary": self.boundary}
        if self.height is not None:
            out["height"] = self.height
        if self.angle is not None:
            out["angle"] = self.angle
        return out


def _events(surface, result, apexes, start_point, start_piece, side):
    """Smallest transverse offset (on one side) at which a parallel of the trace meets a corner.

    Returns (offset, kind, id) with kind 'apex', 'corner' or 'wrap'.
    """
    best = (math.inf, None, None)
    for seg in result.segments:
        if seg.log:
            continue
        piece = surface.pieces[seg.piece]
        u = seg.v / abs(seg.v)
        normal = 1j * u * side
        length = abs(seg.v) * seg.duration
        cands = [(a, "apex", sid) for sid, a in apexes.get(seg.piece, ())]
        cands += [(c.point, "corner", None) for c in piece.corners if c.finite]
        if seg.piece == start_piece:
            cands.append((start_point, "wrap", None))
        for a, kind, sid in cands:
            off = dot(normal, a - seg.z0)
            along = dot(u, a - seg.z0)
            if off <= 1e-12 or along < -1e-12 or along > length + 1e-12:
                continue
            key = (off, 0 if kind == "apex" else (1 if kind == "wrap" else 2))
            if key < (best[0], 0 if best[1] == "apex" else (1 if best[1] == "wrap" else 2)):
                best = (off, kind, sid)
    return best


def extend_cylinder(surface, closed):
    """Maximal cylinder of parallel closed geodesics containing a ClosedUp trace."""
    term = closed.termination
    if term.kind != "ClosedUp":
        raise ValueError("extend_cylinder needs a ClosedUp trace")
    if abs(term.factor - 1) > 1e-9:
        return _dilation_cylinder(surface, closed)
    apexes = _piece_apexes(surface)
    s = closed.start
    u = s.velocity / abs(s.velocity)
    offsets = {}
    bounds = {}
    for side in (1, -1):
        total = 0.0
        cur = closed
        kind, sid = None, None
        for _ in range(200):
            off, kind, sid = _events(surface, cur, apexes, s.position, s.piece, side)
            if kind is None:
                total = math.inf
                break
            # a wrap event counted from a shifted trace is measured from that trace
            if kind == "wrap":
                total += off
                break
            total += off
            if kind == "apex":
                break
            # move to just past the regular corner along the transverse geodesic and continue
            start = _transverse_point(surface, s, u, side, total + 1e-9)
            if start is None:
                kind = "not-closed"
                break
            cur = trace(surface, start, t_max=10 * closed.final.time + 10, stop_on_trap=False)
            if cur.termination.kind != "ClosedUp":
                kind = "not-closed"
                break
            total += 1e-9
        offsets[side] = total
        bounds[side] = {"type": {"apex": "saddle_connections", "wrap": "closes_onto_itself"}.get(kind, kind),
                        "apex": sid}
    if bounds[1]["type"] == "closes_onto_itself":
        height = offsets[1]
    else:
        height = offsets[1] + offsets[-1]
    return Cylinder("translation", 1.0, term.period, height, None,
                    {"left": bounds[1], "right": bounds[-1]})


def _transverse_point(surface, s, u, side, dist):
    """Point at distance ``dist`` from the start along the normal, with the parallel velocity."""
    normal = 1j * u * side
    res = trace(surface, GeodesicState(s.piece, s.position, normal), t_max=dist,
                stop_on_trap=False, stop_on_close=False)
    if res.termination.kind != "TimedOut":
        return None
    f = res.final
    # carry the original velocity along: the transverse velocity turned back by a quarter turn
    v = f.velocity * (-1j * side) * abs(s.velocity)
    return GeodesicState(f.piece, f.position, v)


def _dilation_cylinder(surface, closed):
    """Angular extent of the family of closed geodesics through the holonomy's fixed point."""
    s = closed.start
    piece = surface.pieces[s.piece]
    hol = invert(closed.dev_map)
    lam = hol.a
    if abs(lam - 1) < 1e-12:
        raise ValueError("not a dilation cylinder")
    p = hol.b / (1 - lam)  # fixed point in the start developed frame
    zeta0 = piece.dev(s.position)
    r = abs(zeta0 - p)
    base = cmath.phase(zeta0 - p)

    def closes(phi):
        zeta = p + r * cmath.exp(1j * phi)
        z = cmath.log(zeta) if piece.is_log else zeta
        if piece.is_log:
            # keep the branch near the start
            z += 2j * math.pi * round((s.position - z).imag / TWO_PI)
        if not piece.contains(z, 0.0):
            return False
        big_v = (zeta - p) * (abs(s.velocity * (zeta0 if piece.is_log else 1)) / r)
        v = big_v / zeta if piece.is_log else big_v
        res = trace(surface, GeodesicState(s.piece, z, v), t_max=100 * (closed.final.time + 1),
                    max_crossings=2000, stop_on_trap=False)
        return res.termination.kind == "ClosedUp"

    extent = {}
    for side in (1, -1):
        step = 0.05
        lo = 0.0
        hi = None
        while lo < 2 * math.pi:
            if closes(base + side * (lo + step)):
                lo += step
            else:
                hi = lo + step
                break
        if hi is None:
            extent[side] = lo
            continue
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if closes(base + side * mid):
                lo = mid
            else:
                hi = mid
        extent[side] = lo
    angle = extent[1] + extent[-1]
    return Cylinder("dilation", abs(lam), closed.termination.period, None, angle,
                    {"left": {"type": "closed_geodesic"}, "right": {"type": "closed_geodesic"}})
