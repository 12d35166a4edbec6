"""Fuchsian singularities by residue, and formal normal forms of Christoffel symbols.

A Christoffel symbol near a pole is a Laurent series Gamma(X) = sum g_n X^n.
A change of variable X = Phi(Y) acts by Phi*Gamma = Phi' (Gamma o Phi) + Phi''/Phi'.
"""

import math
from dataclasses import dataclass, field

import gmpy2

from affsurf.config import TOL
from affsurf.errors import DegenerateLeadingCoefficient, FormatError, NonInvertibleJet

RES_TOL = 1e-9
# the formal substitutions grow factorially, so series work is done in extended precision
PREC_BITS = 320

TAGS = ("Erasable", "Conical", "Cylindrical", "ReebPlus", "ReebMinus", "AntiConical", "AmbiguousInteger")


@dataclass(frozen=True)
class FuchsianClass:
    tag: str
    residue: complex
    cone_angle: float | None = None
    factor: float | None = None
    variant: str | None = None

    def to_json(self):
        out = {"tag": self.tag, "residue": [self.residue.real, self.residue.imag]}
        if self.cone_angle is not None:
            out["cone_angle"] = self.cone_angle
        if self.factor is not None:
            out["factor"] = self.factor
        if self.variant is not None:
            out["variant"] = self.variant
        return out


def _integer_at_least_two(rho, tol):
    k = round(rho.real)
    return k >= 2 and abs(rho - k) <= tol


def classify_residue(rho, shifted_hint=None, tol=RES_TOL):
    """Kind of a Fuchsian singularity (simple pole or marked point) with residue rho."""
    rho = complex(rho)
    factor = math.exp(2 * math.pi * rho.imag)
    if abs(rho) <= tol:
        return FuchsianClass("Erasable", rho, 2 * math.pi, 1.0)
    if rho.real < 1 - tol:
        return FuchsianClass("Conical", rho, 2 * math.pi * (1 - rho.real), factor)
    if abs(rho.real - 1) <= tol:
        if abs(rho.imag) <= tol:
            return FuchsianClass("Cylindrical", rho, None, 1.0)
        return FuchsianClass("ReebPlus" if rho.imag > 0 else "ReebMinus", rho, None, factor)
    if _integer_at_least_two(rho, tol):
        if shifted_hint is None:
            return FuchsianClass("AmbiguousInteger", rho, 2 * math.pi * (rho.real - 1), 1.0)
        return FuchsianClass("AntiConical", rho, 2 * math.pi * (rho.real - 1), 1.0,
                             "shifted" if shifted_hint else "pure")
    return FuchsianClass("AntiConical", rho, 2 * math.pi * (rho.real - 1), factor)


# --- Laurent series ----------------------------------------------------------


def _hp():
    if hasattr(gmpy2, "context"):
        return gmpy2.context(gmpy2.get_context(), precision=PREC_BITS)
    return gmpy2.local_context(gmpy2.get_context(), precision=PREC_BITS)  # pragma: no cover - gmpy2 < 2.2


_MPC = type(gmpy2.mpc(0))


def _num(c):
    if isinstance(c, _MPC):
        return c
    return complex(c)


def _mp(c):
    return gmpy2.mpc(c)


def to_complex(c):
    return complex(c)


class LaurentSeries:
    """Finite Laurent polynomial sum_{k} c_k X^{low+k}, known through order ``top``.

    Arithmetic is exact on the stored coefficients; operations producing infinite
    series (reciprocal, composition, powers) take an explicit truncation order.
    """

    __slots__ = ("low", "coeffs", "top")

    def __init__(self, low, coeffs, top=None):
        coeffs = [_num(c) for c in coeffs]
        low = int(low)
        # strip exact leading zeros
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
            low += 1
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.low = low if coeffs else 0
        self.coeffs = coeffs
        self.top = top if top is not None else (math.inf)

    @classmethod
    def from_dict(cls, terms, top=None):
        terms = {int(k): _num(v) for k, v in terms.items() if _num(v) != 0}
        if not terms:
            return cls(0, [], top)
        lo, hi = min(terms), max(terms)
        return cls(lo, [terms.get(k, 0j) for k in range(lo, hi + 1)], top)

    @classmethod
    def from_triples(cls, triples, top=None):
        terms = {}
        for t in triples:
            if len(t) != 3:
                raise FormatError(f"series entries are [order, re, im], got {t!r}")
            k = int(t[0])
            terms[k] = terms.get(k, 0j) + complex(float(t[1]), float(t[2]))
        return cls.from_dict(terms, top)

    @classmethod
    def monomial(cls, n, c=1.0):
        return cls(n, [c])

    def to_triples(self):
        return [[k, float(c.real), float(c.imag)] for k, c in self.items()]

    def items(self):
        return [(self.low + i, c) for i, c in enumerate(self.coeffs) if c != 0]

    def to_dict(self):
        return dict(self.items())

    def __getitem__(self, n):
        i = n - self.low
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return 0j

    def high_precision(self):
        with _hp():
            return LaurentSeries(self.low, [_mp(c) for c in self.coeffs], self.top)

    def to_complex(self):
        return LaurentSeries(self.low, [complex(c) for c in self.coeffs], self.top)

    coeff = __getitem__

    @property
    def is_zero(self):
        return not self.coeffs

    @property
    def high(self):
        return self.low + len(self.coeffs) - 1

    def valuation(self, eps=0.0):
        for k, c in self.items():
            if abs(c) > eps:
                return k
        return None

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries(0, [other])
        if self.is_zero:
            return LaurentSeries(other.low, other.coeffs, min(self.top, other.top))
        if other.is_zero:
            return LaurentSeries(self.low, self.coeffs, min(self.top, other.top))
        lo = min(self.low, other.low)
        hi = max(self.high, other.high)
        return LaurentSeries(lo, [self[k] + other[k] for k in range(lo, hi + 1)], min(self.top, other.top))

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(self.low, [-c for c in self.coeffs], self.top)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            return LaurentSeries(self.low, [c * other for c in self.coeffs], self.top)
        if self.is_zero or other.is_zero:
            return LaurentSeries(0, [])
        out = [0j] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        top = min(self.top + other.low, other.top + self.low)
        return LaurentSeries(self.low + other.low, out, top)

    __rmul__ = __mul__

    def mul_upto(self, other, n):
        """(self * other).truncate(n) without forming the discarded terms."""
        if self.is_zero or other.is_zero:
            return LaurentSeries(0, [], n)
        lo = self.low + other.low
        size = n - lo + 1
        if size <= 0:
            return LaurentSeries(0, [], n)
        out = [0j] * size
        oc = other.coeffs
        for i, a in enumerate(self.coeffs):
            if i >= size:
                break
            if a == 0:
                continue
            for j in range(min(len(oc), size - i)):
                out[i + j] += a * oc[j]
        top = min(self.top + other.low, other.top + self.low, n)
        return LaurentSeries(lo, out, top)

    def truncate(self, n):
        """Drop terms of order > n."""
        keep = [c for k, c in zip(range(self.low, self.high + 1), self.coeffs) if k <= n]
        return LaurentSeries(self.low, keep, min(self.top, n))

    def shift(self, k):
        return LaurentSeries(self.low + k, self.coeffs, self.top + k)

    def derivative(self):
        terms = {k - 1: k * c for k, c in self.items() if k != 0}
        return LaurentSeries.from_dict(terms, self.top - 1)

    def reciprocal(self, n):
        """1/self through order n."""
        v = self.valuation()
        if v is None:
            raise DegenerateLeadingCoefficient("reciprocal of the zero series")
        lead = self[v]
        if abs(lead) <= TOL.eps_zero:
            raise DegenerateLeadingCoefficient(f"leading coefficient {lead} is numerically zero")
        # self = lead X^v (1 + g), g a power series with g(0) = 0
        m = n + v  # relative order needed
        inv = [0j] * (max(m, 0) + 1)
        if m >= 0:
            inv[0] = 1 / lead
            for k in range(1, m + 1):
                s = 0j
                for j in range(1, k + 1):
                    s += self[v + j] * inv[k - j]
                inv[k] = -s / lead
        return LaurentSeries(-v, inv, n)

    def __repr__(self):
        return f"LaurentSeries({self.to_dict()!r})"

    def close_to(self, other, tol, upto):
        lo = min(self.low, other.low)
        return all(abs(self[k] - other[k]) <= tol for k in range(lo, upto + 1))


def power_series(coeffs):
    """Power series from [c1, c2, ...] meaning c1 X + c2 X^2 + ..."""
    return LaurentSeries(1, list(coeffs))


def _powers(p, kmax, n):
    """[p**0, ..., p**kmax] through relative order n for a power series p with p(0) != 0."""
    out = [LaurentSeries(0, [1], n)]
    base = p.truncate(n)
    for _ in range(kmax):
        out.append(out[-1].mul_upto(base, n))
    return out


def compose(gamma, phi, n):
    """gamma o phi through order n, for phi(X) = a1 X + ... with a1 != 0."""
    a1 = phi[1]
    if abs(a1) <= TOL.eps_zero or phi.valuation() != 1:
        raise NonInvertibleJet(f"substitution has derivative {complex(a1)} at 0")
    if gamma.is_zero:
        return LaurentSeries(0, [], n)
    # phi = a1 X (1 + h)
    unit = LaurentSeries(phi.low - 1, [c / a1 for c in phi.coeffs])
    lo, hi = gamma.low, min(gamma.high, n)
    rel = n - lo
    pos = _powers(unit, max(hi, 0), rel)
    neg = _powers(unit.reciprocal(rel), -lo, rel) if lo < 0 else []
    terms = {}
    for k, g in gamma.items():
        if k > n:
            break
        u = pos[k] if k >= 0 else neg[-k]
        scale = g * a1 ** k
        for j, c in u.items():
            if k + j > n:
                break
            terms[k + j] = terms.get(k + j, 0) + scale * c
    return LaurentSeries.from_dict(terms, min(n, gamma.top))


def pullback_gamma(gamma, phi, n):
    """Phi*Gamma = Phi' (Gamma o Phi) + Phi''/Phi' through order n."""
    out = _pullback_hp(gamma, phi, n)
    return out.to_complex()


def _pullback_hp(gamma, phi, n):
    if isinstance(phi, (list, tuple)):
        phi = power_series(phi)
    if phi.is_zero or phi.valuation() != 1 or abs(phi[1]) <= TOL.eps_zero:
        raise NonInvertibleJet("substitution must be a1 X + ... with a1 != 0")
    if gamma.valuation() is not None and n < gamma.valuation():
        raise ValueError("truncation order below the pole order")
    d = max(0, -(gamma.valuation() or 0))
    with _hp():
        gamma = gamma.high_precision()
        phi = phi.high_precision()
        dphi = phi.derivative()
        ddphi = dphi.derivative()
        comp = compose(gamma, phi, n + d)
        first = dphi.mul_upto(comp, n)
        second = ddphi.mul_upto(dphi.reciprocal(n), n)
        out = first + second
    return LaurentSeries(out.low, out.coeffs, min(n, gamma.top))


def _compose_elementary(series, b, k, n):
    """series(X + b X^k) through order n, expanding (1 + b X^(k-1))^j binomially."""
    terms = {}
    step = k - 1
    for j, c in series.items():
        if j > n:
            break
        coef = c
        i = 0
        while j + i * step <= n:
            key = j + i * step
            terms[key] = terms.get(key, 0) + coef
            # next generalized binomial coefficient times b
            coef = coef * (j - i) / (i + 1) * b
            i += 1
            if coef == 0:
                break
    return LaurentSeries.from_dict(terms, min(n, series.top))


def _pullback_elementary(gamma, b, k, n):
    """Psi*gamma for Psi = X + b X^k, k >= 2."""
    comp = _compose_elementary(gamma, b, k, n + 1)
    dpsi = LaurentSeries.from_dict({0: 1, k - 1: k * b})
    first = dpsi.mul_upto(comp, n)
    # Psi''/Psi' = k(k-1) b X^(k-2) / (1 + k b X^(k-1))
    terms = {}
    coef = k * (k - 1) * b
    order = k - 2
    while order <= n:
        terms[order] = coef
        coef = -coef * k * b
        order += k - 1
    return first + LaurentSeries.from_dict(terms, n)


def series_inverse(phi, n):
    """The power series psi with phi(psi(X)) = X through order n."""
    a1 = phi[1]
    if abs(a1) <= TOL.eps_zero or phi.valuation() != 1:
        raise NonInvertibleJet(f"substitution has derivative {a1} at 0")
    with _hp():
        phi = phi.high_precision()
        a1 = phi[1]
        psi = [_mp(0)] * (n + 1)
        psi[1] = 1 / a1
        for k in range(2, n + 1):
            cur = compose(phi, LaurentSeries(1, psi[1:k + 1]), k)
            psi[k] = -cur[k] / a1
        return LaurentSeries(1, psi[1:])


# --- normal form -------------------------------------------------------------


@dataclass
class NormalForm:
    d: int
    residue_coeff: complex
    phi: LaurentSeries
    normalized: LaurentSeries
    n: int
    resonances: list = field(default_factory=list)
    root_index: int = 0

    def __iter__(self):
        return iter((self.d, self.residue_coeff, self.phi, self.normalized))

    @property
    def residue(self):
        # the residue of the singularity is the opposite of Gamma's X^-1 coefficient
        return -self.residue_coeff

    def to_json(self):
        return {
            "d": self.d,
            "gamma_minus_1": [self.residue_coeff.real, self.residue_coeff.imag],
            "residue": [self.residue.real, self.residue.imag],
            "phi": self.phi.to_triples(),
            "normalized": self.normalized.to_triples(),
            "truncation": self.n,
            "resonances": self.resonances,
            "root_index": self.root_index,
        }


def formal_normal_form(gamma, n=None):
    """Reduce gamma to X^-d + g_-1 X^-1 (d >= 2) or g_-1 X^-1 (d <= 1) through order n."""
    v = gamma.valuation(TOL.eps_zero)
    if v is None:
        d = 0
    else:
        d = max(0, -v)
    if n is None:
        n = d + 10
    if d > 0 and abs(gamma[-d]) <= TOL.eps_zero:
        raise DegenerateLeadingCoefficient("leading coefficient vanishes")
    # drop numerically zero coefficients below the pole
    gamma = LaurentSeries.from_dict({k: c for k, c in gamma.items() if k >= -d}, gamma.top)
    g_m1 = complex(gamma[-1])
    resonances = []
    with _hp():
        phi = power_series([_mp(1)])
        if d >= 2:
            # principal (d-1)-th root of the leading coefficient
            a1 = gmpy2.exp(gmpy2.log(_mp(gamma[-d])) / (d - 1))
            phi = power_series([a1])
        cur = _pullback_hp(gamma, phi, n)
        start = -d + 1 if d >= 2 else 0
        for m in range(start, n + 1):
            if m == -1:
                continue
            c = cur[m]
            factor = (m + 1) if d >= 2 else (m + 1) * (g_m1 + m + 2)
            if abs(factor) <= 1e-12:
                if abs(c) > TOL.eps_zero:
                    resonances.append(m)
                continue
            if c == 0:
                continue
            b = -c / factor
            k = m + d + 1 if d >= 2 else m + 2
            phi = _compose_elementary(phi, b, k, n + d + 2)
            cur = _pullback_elementary(cur, b, k, n)
        phi = phi.truncate(n + d + 2)
    normalized = LaurentSeries.from_dict({k: complex(c) for k, c in cur.items() if k <= n}, n)
    return NormalForm(d, g_m1, phi, normalized, n, resonances)


def expected_normal_form(d, g_m1, n):
    if d >= 2:
        return LaurentSeries.from_dict({-d: 1.0, -1: g_m1}, n)
    return LaurentSeries.from_dict({-1: g_m1}, n)
