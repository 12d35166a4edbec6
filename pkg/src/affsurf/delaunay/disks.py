"""Maximal immersed disks on compact flat surfaces with conical points.

A disk is handled through its development: the pieces met by the disk are
laid out breadth-first in one developed frame, crossing only edges that cut
the open disk.  Apex images (conical corners and marked points) are then
plain points of the plane.  A family of nested or pencil circles is swept
until a new apex image reaches the boundary; the search only trusts
developments without apex images strictly inside, which are genuine
immersions.
"""

import cmath
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from affsurf.affine_core import AffMap, compose, invert
from affsurf.config import TOL
from affsurf.delaunay._kernels import kernels
from affsurf.errors import (
    HalfPlaneRegime,
    NoBoundedPencil,
    SeedOnSingularity,
    SpineTraversalCapped,
    StartOutsidePiece,
    Unsupported,
)
from affsurf.surface_kernel.pieces import dot

MAX_CELLS = 20_000


@dataclass(frozen=True)
class Hit:
    angle: float
    apex: str
    point: complex


@dataclass
class ImmersedDisk:
    center: complex
    radius: float
    cells: list = field(repr=False)
    hits: tuple
    discontinuity: float | None = None

    @property
    def kind(self):
        if self.discontinuity is not None:
            return "flexible"
        return "A" if len(self.hits) == 2 else ("rigid" if len(self.hits) >= 3 else "open")

    @property
    def rigid(self):
        return len(self.hits) >= 3

    def to_json(self):
        return {
            "center": [self.center.real, self.center.imag],
            "radius": self.radius,
            "kind": self.kind,
            "hits": [{"angle": h.angle, "apex": h.apex, "point": [h.point.real, h.point.imag]}
                     for h in self.hits],
            "cells": [{"piece": pid, "map": F.to_json()} for pid, F in self.cells],
        }


def _seg_dist(c, a, b):
    d = b - a
    L2 = abs(d) ** 2
    if L2 == 0:
        return abs(c - a)
    t = min(max(dot(c - a, d) / L2, 0.0), 1.0)
    return abs(a + t * d - c)


class _Fixed:
    """Circles of fixed centre c and radius lam."""

    def __init__(self, c):
        self.c = c

    def center(self, lam):
        return self.c

    def radius(self, lam):
        return lam

    def params(self, qx, qy, K):
        return np.hypot(qx - self.c.real, qy - self.c.imag)


class _Nested:
    """Circles through p with centre p + lam u and radius lam."""

    def __init__(self, p, u):
        self.p, self.u = p, u

    def center(self, lam):
        return self.p + lam * self.u

    def radius(self, lam):
        return lam

    def params(self, qx, qy, K):
        return K["nested"](qx, qy, self.p.real, self.p.imag, self.u.real, self.u.imag)


class _Pencil:
    """Circles through both ends of a chord: centre m + mu n, radius sqrt(h2 + mu^2)."""

    def __init__(self, m, n, h2):
        self.m, self.n, self.h2 = m, n, h2

    def center(self, mu):
        return self.m + mu * self.n

    def radius(self, mu):
        return math.sqrt(self.h2 + mu * mu)

    def params(self, qx, qy, K):
        mu, _ = K["pencil"](qx, qy, self.m.real, self.m.imag, self.n.real, self.n.imag, self.h2)
        return mu


class FlatDeveloper:
    """Development machinery for one compact flat surface with conical points."""

    def __init__(self, surface):
        self.surface = surface
        _check_flat(surface)
        self.apexes = {}
        for sid, pid, z in surface.apex_points():
            self.apexes.setdefault(pid, []).append((sid, complex(z)))
        self.edges = {}
        diam = 0.0
        for pid, piece in surface.pieces.items():
            self.edges[pid] = [(e.index, e.start, e.end) for e in piece.edges]
            pts = piece.finite_points()
            diam = max(diam, max(abs(a - b) for a in pts for b in pts))
        self.scale = max(diam, 1e-12)
        self.eps = 1e-9 * self.scale
        self.K = kernels()
        self.developments = 0

    # --- development ---------------------------------------------------------
    def develop(self, seed, center, radius):
        """Cells (piece, map) and apex images of the disk of given centre and radius."""
        self.developments += 1
        spid, sF = seed
        cells = [(spid, sF)]
        seen = {self._cell_key(spid, sF)}
        queue = deque(cells)
        tr_of = self.surface.transfer
        lim = radius - self.eps
        while queue:
            pid, F = queue.popleft()
            for ei, a, b in self.edges[pid]:
                if _seg_dist(center, F(a), F(b)) >= lim:
                    continue
                tr = tr_of(pid, ei)
                if tr is None:
                    continue
                G = compose(F, invert(tr.T))
                key = self._cell_key(tr.dst.id, G)
                if key in seen:
                    continue
                seen.add(key)
                cells.append((tr.dst.id, G))
                queue.append((tr.dst.id, G))
                if len(cells) > MAX_CELLS:
                    raise SpineTraversalCapped(f"development exceeded {MAX_CELLS} cells")
        ids, pts, keys = [], [], set()
        q = 1e-7 * self.scale
        for pid, F in cells:
            for sid, z in self.apexes.get(pid, ()):
                w = F(z)
                key = (sid, round(w.real / q), round(w.imag / q))
                if key in keys:
                    continue
                keys.add(key)
                ids.append(sid)
                pts.append(w)
        arr = np.array(pts, dtype=complex) if pts else np.zeros(0, dtype=complex)
        return cells, ids, arr

    def _cell_key(self, pid, F):
        q = 1e-7 * self.scale
        return (pid, round(F.a.real * 1e7), round(F.a.imag * 1e7), round(F.b.real / q), round(F.b.imag / q))

    def locate(self, cells, w):
        """(piece, map, piece point) of the cell containing the developed point w."""
        best = None
        for pid, F in cells:
            z = invert(F)(w)
            m = self.surface.pieces[pid].margin(z)
            if best is None or m > best[0]:
                best = (m, pid, F, z)
        if best is None or best[0] < -1e-7 * self.scale:
            raise StartOutsidePiece(f"developed point {w} is not covered by the development")
        return best[1], best[2], best[3]

    # --- sweeping -------------------------------------------------------------
    def _depth(self, pts, fam, lam):
        if pts.size == 0:
            return np.zeros(0)
        c = fam.center(lam)
        return self.K["depth"](pts.real.copy(), pts.imag.copy(), c.real, c.imag, fam.radius(lam))

    def _state(self, seed, fam, lam):
        cells, ids, pts = self.develop(seed, fam.center(lam), fam.radius(lam))
        depth = self._depth(pts, fam, lam)
        inside = bool(np.any(depth > self.eps))
        return cells, ids, pts, depth, inside

    def sweep(self, seed, fam, lo, escape):
        """First parameter above ``lo`` where a new apex image meets the circle."""
        span = max(self.scale, abs(lo))
        safe = lo
        hi = lo + span
        for _ in range(64):
            state = self._state(seed, fam, hi)
            if state[4]:
                break
            safe = hi
            span *= 2
            hi = lo + span
        else:
            raise escape("no apex reached: the disk grows into a half-plane")
        for _ in range(400):
            _, ids, pts, _, _ = state
            lam = fam.params(pts.real.copy(), pts.imag.copy(), self.K) if pts.size else np.zeros(0)
            gap = 1e-12 * max(1.0, abs(hi))
            cand = lam[(lam > safe + gap) & (lam <= hi + gap)]
            if cand.size == 0:
                mid = 0.5 * (safe + hi)
                st = self._state(seed, fam, mid)
                if st[4]:
                    hi, state = mid, st
                else:
                    safe = mid
                if hi - safe <= 1e-13 * max(1.0, abs(hi)):
                    raise Unsupported("disk sweep failed to isolate the next apex")
                continue
            c = float(cand.min())
            st = self._state(seed, fam, c)
            if st[4]:
                hi, state = c, st
                continue
            cells, ids_c, pts_c, depth_c, _ = st
            on = np.nonzero(np.abs(depth_c) <= self.eps)[0]
            lam_c = fam.params(pts_c.real.copy(), pts_c.imag.copy(), self.K) if pts_c.size else lam[:0]
            if np.any(np.abs(lam_c[on] - c) <= 1e-9 * max(1.0, abs(c))):
                center = fam.center(c)
                hits = sorted(
                    (Hit(cmath.phase(pts_c[i] - center) % (2 * math.pi), ids_c[i], complex(pts_c[i]))
                     for i in on),
                    key=lambda h: h.angle)
                return c, cells, tuple(hits)
            safe = c
        raise Unsupported("disk sweep did not converge")


def _check_flat(surface):
    why = None
    if surface.is_atlas:
        why = "atlas surfaces"
    elif any(p.is_log or not p.bounded for p in surface.pieces.values()):
        why = "pieces must be bounded flat polygons"
    elif surface.unpaired_edges():
        why = "surfaces with boundary"
    elif any(abs(abs(pr.dev_map.a) - 1) > 1e-9 for pr in surface.pairings):
        why = "gluings must be isometries"
    else:
        for s in surface.singularities():
            if s.order >= 2 or abs(s.residue.imag) > 1e-9 or s.residue.real >= 1 - 1e-9:
                why = f"singularity {s.id} is not conical"
                break
    if why is not None:
        raise Unsupported(f"Delaunay decomposition needs a compact flat surface with conical points ({why})")


def developer(surface):
    dev = getattr(surface, "_flat_developer", None)
    if dev is None:
        dev = FlatDeveloper(surface)
        surface._flat_developer = dev
    return dev


def grow_max_disk(surface, seed):
    """Maximal immersed disk obtained by inflating a small disk around ``seed = (piece, z)``."""
    pid, z = seed
    z = complex(z)
    if pid not in surface.pieces or not surface.pieces[pid].contains(z, 1e-9):
        raise StartOutsidePiece(f"{z} is not inside piece {pid}")
    dev = developer(surface)
    cell = (pid, AffMap.identity())
    _, _, pts = dev.develop(cell, z, dev.eps * 100)
    if pts.size and np.min(np.abs(pts - z)) <= dev.eps * 10:
        raise SeedOnSingularity(f"seed {z} in {pid} is an apex")
    r1, cells, hits = dev.sweep(cell, _Fixed(z), 0.0, HalfPlaneRegime)
    if len(hits) >= 2:
        return ImmersedDisk(z, r1, cells, hits)
    p = hits[0].point
    u = (z - p) / abs(z - p)
    lam, cells, hits = dev.sweep(cell, _Nested(p, u), r1, HalfPlaneRegime)
    return ImmersedDisk(p + lam * u, lam, cells, hits)


@dataclass
class PivotResult:
    disk: ImmersedDisk
    chord: tuple  # developed endpoints (p, q)
    apexes: tuple
    witness: ImmersedDisk
    cell: tuple  # (piece, map) containing the chord midpoint


def pivot(surface, disk, egress):
    """Sweep the pencil through the ends of boundary arc ``egress`` up to the next maximal disk."""
    dev = developer(surface)
    hits = disk.hits
    k = len(hits)
    if k < 2:
        raise NoBoundedPencil("a pencil needs two boundary apexes")
    h0, h1 = hits[egress % k], hits[(egress + 1) % k]
    p, q = h0.point, h1.point
    span = (h1.angle - h0.angle) % (2 * math.pi)
    arc_mid = disk.center + disk.radius * cmath.exp(1j * (h0.angle + 0.5 * span))
    mid = 0.5 * (p + q)
    d = q - p
    n = 1j * d / abs(d)
    if dot(n, arc_mid - mid) < 0:
        n = -n
    mu0 = dot(disk.center - mid, n)
    h2 = 0.25 * abs(d) ** 2
    pid, F, _ = dev.locate(disk.cells, mid)
    fam = _Pencil(mid, n, h2)
    mu, cells, new_hits = dev.sweep((pid, F), fam, mu0, NoBoundedPencil)
    mw = 0.5 * (mu0 + mu)
    wcells, _, _ = dev.develop((pid, F), fam.center(mw), fam.radius(mw))
    c = fam.center(mw)
    witness = ImmersedDisk(c, fam.radius(mw), wcells,
                           tuple(sorted((Hit(cmath.phase(h.point - c) % (2 * math.pi), h.apex, h.point)
                                         for h in (h0, h1)), key=lambda h: h.angle)))
    new = ImmersedDisk(fam.center(mu), fam.radius(mu), cells, new_hits)
    return PivotResult(new, (p, q), (h0.apex, h1.apex), witness, (pid, F))


def disk_budget():
    return TOL.max_pivots
