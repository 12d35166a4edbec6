"""Complex-affine maps z -> a z + b and the log-chart gluings G_{s,b}."""

import cmath
import math
from dataclasses import dataclass

from affsurf.config import TOL
from affsurf.errors import DegenerateMap, OnSlit


@dataclass(frozen=True)
class AffMap:
    """The map z -> a*z + b with a != 0."""

    a: complex = 1.0 + 0j
    b: complex = 0j

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        if not (cmath.isfinite(a) and cmath.isfinite(b)):
            raise DegenerateMap(f"non-finite coefficients ({a}, {b})")
        if abs(a) <= TOL.eps_zero:
            raise DegenerateMap(f"linear factor {a} is (numerically) zero")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def __call__(self, z):
        return self.a * z + self.b

    def __matmul__(self, other):
        return compose(self, other)

    def inverse(self):
        return invert(self)

    def close_to(self, other, tol=1e-9):
        return abs(self.a - other.a) <= tol and abs(self.b - other.b) <= tol * (1 + abs(self.b))

    @staticmethod
    def identity():
        return AffMap(1.0, 0.0)

    def to_json(self):
        return {"a": [self.a.real, self.a.imag], "b": [self.b.real, self.b.imag]}


def compose(f, g):
    """Return f o g."""
    return AffMap(f.a * g.a, f.a * g.b + f.b)


def invert(f):
    if abs(f.a) <= TOL.eps_zero:
        raise DegenerateMap(f"cannot invert map with a={f.a}")
    return AffMap(1.0 / f.a, -f.b / f.a)


@dataclass(frozen=True)
class MapKind:
    kind: str
    factor: float = 1.0
    arg: float = 0.0
    fixed_point: complex | None = None

    def to_json(self):
        out = {"kind": self.kind, "factor": self.factor, "arg": self.arg}
        if self.fixed_point is not None:
            out["fixed_point"] = [self.fixed_point.real, self.fixed_point.imag]
        return out


def classify_map(f, tol=None):
    """Identity, translation, dilation (a real positive) or spiral."""
    tol = TOL.eps_geom if tol is None else tol
    a, b = f.a, f.b
    arg = cmath.phase(a)
    mod = abs(a)
    if abs(a - 1) <= tol:
        if abs(b) <= tol:
            return MapKind("identity")
        return MapKind("translation", 1.0, 0.0, None)
    fixed = b / (1 - a)
    if abs(arg) <= TOL.eps_arg:
        return MapKind("dilation", mod, 0.0, fixed)
    return MapKind("spiral", mod, arg, fixed)


@dataclass(frozen=True)
class LogGlue:
    """G_{s,b}(z) = z + s + Log(1 + b e^{-z-s}); lifts z -> e^s z + b through exp."""

    s: complex = 0j
    b: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))
        object.__setattr__(self, "b", complex(self.b))

    def __call__(self, z):
        return log_glue_apply(self, z)

    def inverse(self):
        return LogGlue(-self.s, -cmath.exp(-self.s) * self.b)

    def dev_map(self):
        """The affine map on developed coordinates."""
        return AffMap(cmath.exp(self.s), self.b)

    def is_identity(self):
        return abs(self.s) <= TOL.eps_zero and abs(self.b) <= TOL.eps_zero


def log_argument(g, z):
    return 1 + g.b * cmath.exp(-z - g.s)


def on_slit(g, z, tol=None):
    tol = TOL.eps_geom if tol is None else tol
    w = log_argument(g, z)
    return w.real <= tol and abs(w.imag) <= tol


def log_glue_apply(g, z):
    if g.b == 0:
        return z + g.s
    w = log_argument(g, z)
    if w.real <= TOL.eps_geom and abs(w.imag) <= TOL.eps_geom:
        raise OnSlit(f"G_(s,b) undefined near z={z}: 1+b e^(-z-s)={w}")
    return z + g.s + cmath.log(w)


def principal_log(z):
    if z == 0:
        raise OnSlit("log of zero")
    return complex(math.log(abs(z)), cmath.phase(z))
