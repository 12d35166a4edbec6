"""Asymptotic value families of irregular poles and their canonical local models.

A family is stored by one period ``u_0..u_{m-1}`` (m = d - 1) and the
offset ``b``; the rest follows from ``u_{k+m} = a u_k + b`` with
``a = exp(-2 pi i res)``.  The canonical model glues, for each n mod m,
a chart A_n (union of the half-planes y > R, y < -R, x < -R in the log
plane) to B_{n+1/2} (the half-plane x > R): the lower gluings are the
identity and the upper ones are G_{s, b_n}.
"""

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

from affsurf.affine_core import AffMap, LogGlue, compose, invert
from affsurf.errors import DegenerateLeadingCoefficient, DomainError, InvalidSurface, OutsidePiece
from affsurf.surface_kernel.pieces import HalfPlane, Piece
from affsurf.surface_kernel.surface import Overlap, SingularityRecord, Surface, Trap, TrapRegion

TWO_PI = 2 * math.pi
EQ_TOL = 1e-9


def _c(z):
    return complex(z)


@dataclass(frozen=True)
class AsymptoticFamily:
    d: int
    res: complex
    u: tuple
    b: complex = 0j

    def __post_init__(self):
        d = int(self.d)
        if d < 2:
            raise DomainError(f"irregular poles have order d >= 2, got {self.d}")
        u = tuple(_c(x) for x in self.u)
        if len(u) != d - 1:
            raise DomainError(f"expected {d - 1} asymptotic values, got {len(u)}")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "res", _c(self.res))
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "b", _c(self.b))

    @property
    def m(self):
        return self.d - 1

    @property
    def a(self):
        return cmath.exp(-2j * math.pi * self.res)

    @property
    def holonomy(self):
        return AffMap(self.a, self.b)

    @classmethod
    def from_values(cls, d, res, values):
        """Family from ``m + 1`` consecutive values u_0..u_m (b is then implied)."""
        values = [_c(x) for x in values]
        m = int(d) - 1
        if len(values) != m + 1:
            raise DomainError(f"need {m + 1} values to fix b, got {len(values)}")
        a = cmath.exp(-2j * math.pi * _c(res))
        return cls(d, res, tuple(values[:m]), values[m] - a * values[0])

    @classmethod
    def centered(cls, d, res, c=0j):
        a = cmath.exp(-2j * math.pi * _c(res))
        return cls(d, res, (c,) * (int(d) - 1), (1 - a) * c)

    def __getitem__(self, n):
        return family_expand(self, n)

    def window(self, start, length):
        return [family_expand(self, k) for k in range(start, start + length)]

    def to_json(self):
        return {"d": self.d, "res": [self.res.real, self.res.imag],
                "u": [[z.real, z.imag] for z in self.u], "b": [self.b.real, self.b.imag]}

    @classmethod
    def from_json(cls, obj):
        def cx(v):
            return complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
        return cls(int(obj["d"]), cx(obj["res"]), tuple(cx(x) for x in obj["u"]), cx(obj.get("b", 0)))


def family_expand(fam, n):
    """u_n, by running the recurrence forwards or backwards from one period."""
    m = fam.m
    q, r = divmod(int(n), m)
    z = fam.u[r]
    a, b = fam.a, fam.b
    if q >= 0:
        for _ in range(q):
            z = a * z + b
    else:
        for _ in range(-q):
            z = (z - b) / a
    return z


# --- axes --------------------------------------------------------------------


def _axes(a_lead, d, shift):
    a_lead = _c(a_lead)
    if abs(a_lead) == 0 or not cmath.isfinite(a_lead):
        raise DegenerateLeadingCoefficient(f"leading coefficient {a_lead} is not usable")
    if d < 2:
        raise DomainError("axes exist only for poles of order d >= 2")
    m = d - 1
    base = cmath.phase(a_lead) + shift
    return sorted(((base + TWO_PI * k) / m) % TWO_PI for k in range(m))


def repelling_axes(a_lead, d):
    """Directions theta with -a_lead e^{-i(d-1)theta} a negative real."""
    return _axes(a_lead, d, 0.0)


def attracting_axes(a_lead, d):
    """Directions theta with -a_lead e^{-i(d-1)theta} a positive real."""
    return _axes(a_lead, d, math.pi)


# --- equivalence and normalization ---------------------------------------------


@dataclass(frozen=True)
class Equivalence:
    equal: bool
    witness: AffMap | None = None
    shift: int = 0

    def __bool__(self):
        return self.equal

    def to_json(self):
        return {"equal": self.equal, "shift": self.shift,
                "witness": self.witness.to_json() if self.witness else None}


def _solve_witness(src, dst, tol):
    """Affine g with g(src[k]) = dst[k] on the whole window, or None."""
    scale = max(1.0, max(abs(z) for z in src), max(abs(z) for z in dst))
    i = 0
    j = next((k for k in range(1, len(src)) if abs(src[k] - src[i]) > tol * scale), None)
    if j is None:
        # constant source: only a constant target works, matched by a translation
        if any(abs(z - dst[0]) > tol * scale for z in dst):
            return None
        return AffMap(1, dst[0] - src[0])
    a = (dst[j] - dst[i]) / (src[j] - src[i])
    if abs(a) <= 1e-300:
        return None
    g = AffMap(a, dst[i] - a * src[i])
    if all(abs(g(x) - y) <= tol * scale for x, y in zip(src, dst)):
        return g
    return None


def invariants_equal(f1, f2, allow_shift=False, tol=EQ_TOL):
    """Whether f2 = g o sigma^s f1 for an affine g (and s = 0 unless shifts are allowed)."""
    if f1.d != f2.d or abs(f1.res - f2.res) > tol * max(1.0, abs(f1.res)):
        return Equivalence(False)
    m = f1.m
    length = 2 * m + 2
    src = f1.window(0, length)
    shifts = range(m) if allow_shift else (0,)
    for s in shifts:
        g = _solve_witness(src, f2.window(s, length), tol)
        if g is not None:
            return Equivalence(True, g, s)
    return Equivalence(False)


def is_centered(fam, tol=EQ_TOL):
    u0 = fam.u[0]
    scale = max(1.0, abs(u0))
    if any(abs(z - u0) > tol * scale for z in fam.u):
        return False
    return abs(fam.a * u0 + fam.b - u0) <= tol * scale


def apply_affine(fam, g):
    """The family g o u (same pole, conjugated holonomy)."""
    u = tuple(g(z) for z in fam.u)
    um = g(family_expand(fam, fam.m))
    return AsymptoticFamily(fam.d, fam.res, u, um - fam.a * u[0])


def shift_family(fam, s):
    """The family k -> u_{k+s}."""
    vals = fam.window(s, fam.m + 1)
    return AsymptoticFamily.from_values(fam.d, fam.res, vals)


def _normalized_values(fam, tol):
    vals = fam.window(0, fam.m + 1)
    vals = [z - vals[0] for z in vals]
    scale = max(1.0, max(abs(z) for z in vals))
    k = next((k for k in range(fam.m) if abs(vals[k + 1] - vals[k]) > tol * scale), None)
    if k is None:
        return None
    step = vals[k + 1] - vals[k]
    return [z / step for z in vals]


def _key(vals):
    return tuple(x for z in vals for x in (round(z.real, 10), round(z.imag, 10)))


def normalize(fam, allow_shift=True, tol=EQ_TOL):
    """Deterministic representative of the invariant, as a JSON-ready dict."""
    out = {"d": fam.d, "res": [fam.res.real, fam.res.imag]}
    if is_centered(fam, tol):
        out["kind"] = "centered"
        return out
    best = None
    for s in (range(fam.m) if allow_shift else (0,)):
        vals = _normalized_values(shift_family(fam, s) if s else fam, tol)
        if vals is None:
            continue
        key = _key(vals)
        if best is None or key < best[0]:
            best = (key, s, vals)
    _, s, vals = best
    out["kind"] = "normalized"
    out["shift"] = s
    out["u"] = [[z.real, z.imag] for z in vals[:-1]]
    b = vals[-1] - fam.a * vals[0]
    out["b"] = [b.real, b.imag]
    return out


# --- canonical model ----------------------------------------------------------


def _half_index(x):
    """Twice x as an integer, for x in (1/2)Z."""
    two = Fraction(x).limit_denominator(4) * 2
    if two.denominator != 1:
        raise DomainError(f"piece index {x} is not a half-integer")
    return int(two)


@dataclass
class CanonicalModel:
    family: AsymptoticFamily
    s: complex
    offsets: tuple  # b_{n+1/4}, n = 0..m-1
    R: float
    _lams: dict = field(default_factory=dict, repr=False)

    @property
    def d(self):
        return self.family.d

    @property
    def m(self):
        return self.family.m

    @property
    def res(self):
        return self.family.res

    def upper_glue(self, n):
        """G_{n+1/4}: A_n (upper part) to B_{n+1/2}."""
        return LogGlue(self.s, self.offsets[n % self.m])

    def gluing_values(self):
        """(s, b) of the 2m gluings of one period, lower ones included."""
        out = []
        for n in range(self.m):
            out.append((self.s, self.offsets[n]))
            out.append((0j, 0j))
        return out

    def admissibility_margin(self):
        return min(math.exp(self.R) - (abs(b) + math.exp(s.real - self.R))
                   for s, b in self.gluing_values())

    def lam(self, x):
        """Lambda_x for x in (1/2)Z, chained from Lambda_0 through the gluings."""
        h = _half_index(x)
        n = (h + 1) // 2  # Lambda_{n-1/2} = Lambda_n since lower gluings are trivial
        return self._lam_int(n)

    def _lam_int(self, n):
        cache = self._lams
        if not cache:
            cache[0] = AffMap(1, self.family.u[0])
        if n in cache:
            return cache[n]
        if n > 0:
            k = max(j for j in cache if j <= n)
            lam = cache[k]
            for j in range(k, n):
                # Lambda_j = Lambda_{j+1} o L_{j+1/4}
                lam = compose(lam, invert(self.upper_glue(j).dev_map()))
                cache[j + 1] = lam
        else:
            k = min(j for j in cache if j >= n)
            lam = cache[k]
            for j in range(k, n, -1):
                lam = compose(lam, self.upper_glue(j - 1).dev_map())
                cache[j - 1] = lam
        return cache[n]

    @property
    def holonomy(self):
        """L with Lambda_{x+m} = L o Lambda_x."""
        return compose(self._lam_int(self.m), invert(self._lam_int(0)))

    def lambdas(self):
        return [self._lam_int(n) for n in range(self.m)]

    def modres_sum(self):
        return sum((s for s, _ in self.gluing_values()), 0j)

    def to_json(self):
        return {
            "d": self.d,
            "res": [self.res.real, self.res.imag],
            "family": self.family.to_json(),
            "s": [self.s.real, self.s.imag],
            "R": self.R,
            "upper_gluings": [{"n": n, "s": [self.s.real, self.s.imag], "b": [b.real, b.imag]}
                              for n, b in enumerate(self.offsets)],
            "lambdas": [lam.to_json() for lam in self.lambdas()],
            "holonomy": self.holonomy.to_json(),
            "admissibility_margin": self.admissibility_margin(),
        }


def _admissible(R, gluings, margin, strict=1e-6):
    eR = math.exp(R)
    return all(eR - (margin * abs(b) + math.exp(s.real - R)) >= strict for s, b in gluings)


def build_canonical_model(fam, R=None):
    """Canonical model realizing ``fam``: uniform s on the upper gluings, Lambda_0(z) = z + u_0."""
    m = fam.m
    s = 2j * math.pi * (fam.res - fam.d) / m
    offsets = tuple((family_expand(fam, n) - family_expand(fam, n + 1)) * cmath.exp((n + 1) * s)
                    for n in range(m))
    gluings = [(s, b) for b in offsets] + [(0j, 0j)]
    if R is None:
        # doubled |b| keeps the principal logarithm valid on every overlap
        R = 1.0
        while not (R > TWO_PI and _admissible(R, gluings, 2.0)):
            R *= 2
            if R > 1e6:
                raise DomainError("no admissible R below 1e6")
    else:
        R = float(R)
        if not _admissible(R, gluings, 1.0, 0.0):
            raise InvalidSurface(f"R={R} violates e^R > |b| + e^(Re s) e^(-R)")
    return CanonicalModel(fam, s, offsets, R)


def _in_piece(model, x, w):
    R = model.R
    if _half_index(x) % 2 == 0:
        return w.imag > R or w.imag < -R or w.real < -R
    return w.real > R


def model_developing_eval(model, x, w):
    """Developing map Lambda_x(e^w) on the piece AB_x."""
    w = _c(w)
    if not _in_piece(model, x, w):
        raise OutsidePiece(f"{w} is not in piece {x} (R={model.R})")
    return model.lam(x)(cmath.exp(w))


def extract_family_from_model(model):
    """Asymptotic values u_n = Lambda_n(0) and the offset of the holonomy."""
    m = model.m
    u = tuple(model._lam_int(n)(0) for n in range(m))
    b = model._lam_int(m)(0) - model.family.a * u[0]
    return AsymptoticFamily(model.d, model.res, u, b)


def model_to_surface(model):
    """Atlas surface of the model: 4m half-plane log charts joined by overlaps."""
    R, m = model.R, model.m
    pieces, overlaps, regions = [], [], []
    sepals = []
    petals = []
    for n in range(m):
        up = Piece(f"A{n}.up", "log", (HalfPlane(1j * R, 1j),))
        left = Piece(f"A{n}.left", "log", (HalfPlane(-R, -1),))
        down = Piece(f"A{n}.down", "log", (HalfPlane(-1j * R, -1j),))
        petal = Piece(f"B{n}", "log", (HalfPlane(R, 1),))
        pieces += [up, left, down, petal]
        ident = LogGlue(0, 0)
        overlaps += [
            Overlap(up.id, left.id, ident),
            Overlap(left.id, down.id, ident),
            Overlap(up.id, petal.id, model.upper_glue(n)),
            Overlap(petal.id, f"A{(n + 1) % m}.down", ident),
        ]
        sepals.append(Trap(f"sepal+{n}", (TrapRegion(up.id, "halfplane", (1j * (R + math.pi), 1j)),)))
        sepals.append(Trap(f"sepal-{n}", (TrapRegion(down.id, "halfplane", (-1j * (R + math.pi), -1j)),)))
        petals.append(Trap(f"petal{n}", (TrapRegion(petal.id, "halfplane", (R, 1 + 0j)),)))
    fam = model.family
    rec = SingularityRecord("p", ("puncture",), fam.d, fam.res,
                            {"centered": is_centered(fam), "family": fam.to_json()})
    meta = {"builder": "canonical_model", "genus": 0, "R": R, "s": model.s, "d": fam.d}
    return Surface(pieces, [], records=[rec], traps=sepals + petals, overlaps=overlaps, meta=meta)
