"""Double poles of residue res on the sphere with one Fuchsian point (class C).

The model developing map has derivative z^{-res} exp(-1/z).  Its loop integral
around 0 vanishes exactly when the double pole is centered, and equals
(1 - e^{-2 pi i res}) Gamma(res - 1) off the integers.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from affsurf.errors import InvariantBreach, PoleOfGamma, QuadratureNotConverged, UnrealizableCase
from affsurf.surface_kernel import (
    Mark,
    Slit,
    build_exp_affine_plane,
    build_skew_cone,
    build_translation_cylinder,
    graft_sector,
    reglue_with_dilation,
    validate,
)

INT_TOL = 1e-9

# --- Euler Gamma ---------------------------------------------------------------

_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _nearest_int(z, tol=INT_TOL):
    z = complex(z)
    k = round(z.real)
    return k if abs(z - k) <= tol else None


def gamma_euler(z):
    """Euler's Gamma function (Lanczos approximation with reflection for Re z < 1/2)."""
    z = complex(z)
    k = _nearest_int(z)
    if k is not None and k <= 0:
        raise PoleOfGamma(f"Gamma has a pole at {k}")
    if z.real < 0.5:
        return math.pi / (cmath.sin(math.pi * z) * gamma_euler(1 - z))
    z -= 1
    x = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        x += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * cmath.exp((z + 0.5) * cmath.log(t) - t) * x


# --- quadrature ------------------------------------------------------------------


def _adaptive(f, a, b, nodes, tol, depth=0, max_depth=40):
    """Composite Gauss-Legendre on [a, b]: split until the halves agree with the whole."""
    x, w = nodes

    def rule(lo, hi):
        h = 0.5 * (hi - lo)
        return h * np.dot(w, f(lo + h * (x + 1)))

    stack = [(a, b, rule(a, b), 0)]
    total = 0j
    while stack:
        lo, hi, whole, d = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = rule(lo, mid), rule(mid, hi)
        if abs(left + right - whole) <= tol * (1 + abs(left + right)):
            total += left + right
            continue
        if d >= max_depth:
            raise QuadratureNotConverged(f"no convergence on [{lo}, {hi}]")
        stack.append((lo, mid, left, d + 1))
        stack.append((mid, hi, right, d + 1))
    return complex(total)


def _laguerre_tail(p, y0, n):
    """int_{y0}^inf y^p e^{-y} dy by Gauss-Laguerre in t = y - y0."""
    def rule(k):
        t, w = np.polynomial.laguerre.laggauss(k)
        return math.exp(-y0) * complex(np.dot(w, np.exp(p * np.log(y0 + t))))

    lo, hi = rule(n), rule(2 * n)
    if abs(hi - lo) > 1e-12 * (1 + abs(hi)):
        raise QuadratureNotConverged("Gauss-Laguerre tail did not settle")
    return hi


def _segment_integral(res, r, nodes, tol, quad):
    """int_0^r x^{-res} e^{-1/x} dx with arg x = 0, the part near 0 through y = 1/x."""
    delta = 1.0 / (20 + 5 * abs(res))
    cut = min(delta, r)
    tail = _laguerre_tail(res - 2, 1.0 / cut, quad)
    if r <= delta:
        return tail

    def f(x):
        return np.exp(-res * np.log(x) - 1.0 / x)

    return tail + _adaptive(f, delta, r, nodes, tol)


def _circle_integral(res, r, nodes, tol):
    """Counter-clockwise circle |z| = r with the lift arg z = theta running from 0 to 2 pi."""
    lr = math.log(r)

    def f(theta):
        z = r * np.exp(1j * theta)
        return 1j * z * np.exp(-res * (lr + 1j * theta) - 1.0 / z)

    return _adaptive(f, 0.0, 2 * math.pi, nodes, tol)


def loop_integral_I(res, r=1.0, quad=64, tol=1e-13):
    """Integral of z^{-res} exp(-1/z) along the loop out of 0, around |z| = r and back."""
    if not r > 0:
        raise ValueError("r must be positive")
    if quad < 64:
        raise ValueError("quad must be at least 64")
    res = complex(res)
    nodes = np.polynomial.legendre.leggauss(int(quad))
    seg = _segment_integral(res, r, nodes, tol, int(quad))
    circ = _circle_integral(res, r, nodes, tol)
    return (1 - cmath.exp(-2j * math.pi * res)) * seg + circ


# --- class C reports ----------------------------------------------------------------


def gamma_prediction(res):
    """(1 - e^{-2 pi i res}) Gamma(res - 1), continued to the integers res <= 1.

    At res = 1 - k the prefactor's simple zero cancels the pole of Gamma at -k,
    leaving 2 pi i (-1)^k / k!.
    """
    res = complex(res)
    k = _nearest_int(res)
    if k is not None and k <= 1:
        n = 1 - k
        return 2j * math.pi * (-1) ** n / math.factorial(n)
    return (1 - cmath.exp(-2j * math.pi * res)) * gamma_euler(res - 1)


def centered_class_C(res):
    """The double pole of a class C surface is centered iff res is an integer >= 2."""
    k = _nearest_int(res)
    return k is not None and k >= 2


def numerically_centered(res, I=None):
    """Cross-check: the loop integral vanishes relative to |Gamma(res - 1)|."""
    if I is None:
        I = loop_integral_I(res)
    try:
        scale = abs(gamma_euler(complex(res) - 1))
    except PoleOfGamma:
        scale = 0.0
    return abs(I) < 1e-7 * (1 + scale)


@dataclass
class ClassCReport:
    res: complex
    I: complex
    gamma_prediction: complex
    centered: bool
    agreement: float
    numeric_centered: bool = field(default=False)

    def to_json(self):
        def c(z):
            return [z.real, z.imag]

        return {"res": c(self.res), "I": c(self.I), "gamma_prediction": c(self.gamma_prediction),
                "centered": self.centered, "numeric_centered": self.numeric_centered,
                "agreement": self.agreement}


def class_c_report(res, r=1.0, quad=64):
    res = complex(res)
    I = loop_integral_I(res, r, quad)
    pred = gamma_prediction(res)
    agree = abs(I - pred) / (1 + abs(I))
    return ClassCReport(res, I, pred, centered_class_C(res), agree, numerically_centered(res, I))


def min_fuchsian_count(res, centered):
    """Least number of Fuchsian points on a sphere with one double pole of this residue and class."""
    k = _nearest_int(res)
    if centered:
        if k == 2:
            return 0
        if k is not None and k >= 3:
            return 1
        return 2
    if k is not None and k >= 2:
        return 2
    return 1


# --- witness surfaces -----------------------------------------------------------


@dataclass
class Construction:
    surface: object
    roster: list  # expected [(order, residue)], the double pole first
    recipe: list  # human-readable steps

    def to_json(self):
        return {"roster": [{"order": o, "residue": [r.real, r.imag]} for o, r in self.roster],
                "recipe": self.recipe, "pieces": self.surface.piece_ids()}


def _slit_down(surface, x=0.75):
    """Vertical downward slit from x in the first flat piece that contains the whole ray."""
    for pid in surface.piece_ids():
        P = surface.pieces[pid]
        if not P.is_log and P.contains(complex(x, 0)) and P.in_recession_cone(-1j, 1e-12) \
                and all(e.distance(complex(x, 0)) > 1e-9 for e in P.edges):
            return Slit(pid, complex(x, 0), -math.pi / 2)
    raise InvariantBreach("no flat piece carries a downward slit")


def _cylinder_pole(theta, dilation, recipe):
    """Translation cylinder; optional graft from a regular point to the top end; merge that point with the bottom end.

    The double pole gets residue 1 - theta/2pi + i ln(dilation)/2pi and the top end the complement to 2.
    """
    S = build_translation_cylinder()
    recipe.append("translation cylinder, ends of residue 1")
    up = Slit("C", 0.5 + 0j, math.pi / 2)
    if theta > 0:
        S = graft_sector(S, up, theta, dilation)
        recipe.append(f"graft angle {theta:.6g}, dilation {dilation:.6g} from a point to the top end")
    elif abs(dilation - 1) > 1e-15:
        S = reglue_with_dilation(S, up, dilation)
        recipe.append(f"reglue with dilation {dilation:.6g} from a point to the top end")
    pid = "C+" if "C+" in S.pieces else "C"
    S = graft_sector(S, Slit(pid, 0.5 + 0j, -math.pi / 2), math.inf)
    recipe.append("infinite graft merging the point with the bottom end")
    return S


def _cone_pole(rho, recipe):
    """Skew cone with tip residue rho (Re rho < 1); the infinite graft turns infinity into a double pole of residue 2 - rho."""
    alpha = 2 * math.pi * (1 - rho.real)
    s = math.exp(2 * math.pi * rho.imag)
    S = build_skew_cone(s, alpha)
    recipe.append(f"skew cone angle {alpha:.6g}, dilation {s:.6g}")
    k = len(S.pieces)
    a = alpha / (2 * k)
    S = graft_sector(S, Slit("S0", cmath.exp(1j * a), a), math.inf)
    recipe.append("infinite graft from a regular point to infinity along a radial ray")
    return S


def build_construction(res, centered, fuchsian=None):
    """Sphere with one double pole of residue ``res`` in the requested class.

    ``fuchsian`` (default: the minimum) is the number of Fuchsian points; extra ones
    are marked regular points.
    """
    res = complex(res)
    need = min_fuchsian_count(res, centered)
    if fuchsian is None:
        fuchsian = need
    if fuchsian < need:
        raise UnrealizableCase(f"res={res}, centered={centered} needs {need} Fuchsian points, asked for {fuchsian}")
    k = _nearest_int(res)
    recipe = []
    if centered and k == 2:
        S = build_exp_affine_plane()
        roster = [(2, 2 + 0j)]
        recipe.append("exp-affine plane")
    elif centered and k is not None and k >= 3:
        S = _cone_pole(complex(2 - k), recipe)
        roster = [(2, complex(k)), (1, complex(2 - k))]
    elif not centered and (k is None or k <= 1):
        if res.real > 1:
            S = _cone_pole(2 - res, recipe)
        else:
            S = _cylinder_pole(2 * math.pi * (1 - res.real), math.exp(2 * math.pi * res.imag), recipe)
        roster = [(2, res), (1, 2 - res)]
    elif not centered:
        S = _cylinder_pole(0.0, 1.0, recipe)
        S = graft_sector(S, _slit_down(S), 2 * math.pi * (k - 1))
        recipe.append(f"graft angle 2pi*{k - 1} from a regular point to the double pole")
        roster = [(2, complex(k)), (1, 1 + 0j), (1, complex(1 - k))]
    else:
        j = max(1, math.ceil(res.real - 0.5 - 1e-12))
        a = j + 0.5 - res.real
        S = _cylinder_pole(2 * math.pi * a, math.exp(2 * math.pi * res.imag), recipe)
        S = graft_sector(S, _slit_down(S), 2 * math.pi * j - math.pi)
        recipe.append(f"graft angle 2pi*{j} - pi from a regular point to the double pole")
        roster = [(2, res), (1, 1 + a - 1j * res.imag), (1, complex(0.5 - j))]
    extra = fuchsian - need
    if extra:
        S = _add_marks(S, extra)
        roster += [(0, 0j)] * extra
        recipe.append(f"{extra} marked regular point(s)")
    S.meta = dict(S.meta, builder="double_pole_construction", res=res, centered=bool(centered))
    _check_roster(S, roster)
    return Construction(S, roster, recipe)


def _add_marks(S, count):
    pid = S.piece_ids()[0]
    P = S.pieces[pid]
    marks = list(S.marks)
    base = P.interior_point()
    for i in range(count):
        marks.append(Mark(pid, base + 0.01 * (i + 1) * (1 + 1j), f"mark{i}"))
    return S.replace(marks=marks)


def _check_roster(S, roster, tol=1e-7):
    rep = validate(S)
    if not rep.ok or abs(rep.residue_sum - 2) > tol:
        raise InvariantBreach(f"construction does not validate: {rep.issues}")
    got = sorted(((s.order, s.residue) for s in rep.singularities), key=_roster_key)
    want = sorted(roster, key=_roster_key)
    if len(got) != len(want) or any(o1 != o2 or abs(r1 - r2) > tol for (o1, r1), (o2, r2) in zip(got, want)):
        raise InvariantBreach(f"construction roster {got} differs from {want}")


def _roster_key(item):
    o, r = item
    return (o, round(r.real, 6), round(r.imag, 6))
