"""Independent reference computations used by the tests."""

import itertools

import numpy as np


def periodic_delaunay_edges(u, v, points, reach=2, window=3, tol=1e-9):
    """Delaunay edges of a periodic point set by brute force over lattice translates.

    An edge (i, j, w) joins points[i] to points[j] + w.  It is kept when some
    circle through both ends has every other translate strictly outside: each
    other point bounds the pencil parameter from one side, and the edge
    survives when the bounds leave an open interval.
    """
    pts = [complex(p) for p in points]
    shifts = [a * u + b * v for a, b in itertools.product(range(-window, window + 1), repeat=2)]
    cloud = np.array([p + s for p in pts for s in shifts])
    near = [a * u + b * v for a, b in itertools.product(range(-reach, reach + 1), repeat=2)]
    edges = set()
    for i, j in itertools.product(range(len(pts)), repeat=2):
        for w in near:
            a, b = pts[i], pts[j] + w
            if abs(b - a) < tol:
                continue
            m = 0.5 * (a + b)
            d = b - a
            n = 1j * d / abs(d)
            h2 = abs(d) ** 2 / 4
            q = cloud[(np.abs(cloud - a) > tol) & (np.abs(cloud - b) > tol)]
            side = (q - m).real * n.real + (q - m).imag * n.imag
            num = np.abs(q - m) ** 2 - h2
            lo, hi = -np.inf, np.inf
            on_line = np.abs(side) <= tol * abs(d)
            if np.any(on_line & (num < -tol)):
                continue  # another point sits on the chord itself
            pos, neg = side > tol * abs(d), side < -tol * abs(d)
            if pos.any():
                hi = np.min(num[pos] / (2 * side[pos]))
            if neg.any():
                lo = np.max(num[neg] / (2 * side[neg]))
            if hi - lo > 1e-9:
                edges.add(edge_key(f"m{i}", f"m{j}", b - a))
    return edges


def edge_key(a, b, vec, nd=7):
    if b < a:
        a, b, vec = b, a, -vec
    elif a == b and (vec.real < -1e-12 or (abs(vec.real) <= 1e-12 and vec.imag < 0)):
        vec = -vec
    return (a, b, round(vec.real, nd) + 0.0, round(vec.imag, nd) + 0.0)


# --- frozen reference values -------------------------------------------------------

# cone of angle 30 degrees with gluing factor 3
CONE_30_FACTOR_3 = complex(11 / 12, 0.174850)
# residue of the exponential-affine plane's pole
EXP_PLANE_RESIDUE = 2.0
# loop integral at res = 2.5 equals 2 Gamma(1.5) = sqrt(pi)
LOOP_AT_2_5 = 1.772454
GAMMA_1_5 = 0.886227


def cone_residue(alpha, s):
    """Residue of a cone point with total angle alpha and holonomy factor s."""
    return complex(1 - alpha / (2 * np.pi), np.log(s) / (2 * np.pi))


def gamma_by_quadrature(z):
    """Gamma(z) for Re z > 0 from the defining integral (scipy quad, real and imaginary parts)."""
    from scipy.integrate import quad

    z = complex(z)

    def f(y, part):
        val = np.exp((z - 1) * np.log(y) - y) if y > 0 else 0.0
        return val.real if part == 0 else val.imag

    re = quad(f, 0, np.inf, args=(0,), limit=400, epsabs=1e-13, epsrel=1e-12)[0]
    im = quad(f, 0, np.inf, args=(1,), limit=400, epsabs=1e-13, epsrel=1e-12)[0]
    return complex(re, im)


def naive_pullback(gamma, phi, n):
    """Coefficients {k: c} of phi' * gamma(phi) + phi''/phi' through order n.

    ``gamma`` is {order: coeff} with finite negative part, ``phi`` the list
    [a1, a2, ...] of phi = a1 X + a2 X^2 + ...; plain float arithmetic on
    truncated power series, independent of the package's series class.
    """
    size = n + 40
    p = np.zeros(size, dtype=complex)  # phi / X as a power series
    for k, a in enumerate(phi):
        if k < size:
            p[k] = a

    def mul(a, b):
        return np.convolve(a, b)[:size]

    def inv(a):
        out = np.zeros(size, dtype=complex)
        out[0] = 1 / a[0]
        for k in range(1, size):
            out[k] = -np.dot(a[1:k + 1], out[k - 1::-1][:k]) / a[0]
        return out

    dphi = np.zeros(size, dtype=complex)  # phi'
    for k in range(size - 1):
        dphi[k] = (k + 1) * p[k]
    ddphi = np.zeros(size, dtype=complex)  # phi''
    for k in range(size - 1):
        ddphi[k] = (k + 1) * dphi[k + 1]
    pinv = inv(p)
    # gamma(phi) = sum c_j phi^j = sum c_j X^j (p)^j ; track as X^low * series
    low = min(gamma)
    total = np.zeros(size, dtype=complex)  # coefficients of X^{low + k}
    for j, c in gamma.items():
        power = np.zeros(size, dtype=complex)
        power[0] = 1
        base = p if j >= 0 else pinv
        for _ in range(abs(j)):
            power = mul(power, base)
        shift = j - low
        if shift < size:
            total[shift:] += c * power[:size - shift]
    first = mul(dphi, total)  # coefficients of X^{low + k}
    out = {}
    for k in range(size):
        order = low + k
        if order <= n and abs(first[k]) > 0:
            out[order] = out.get(order, 0) + first[k]
    second = mul(ddphi, inv(dphi))
    for k in range(size):
        if k <= n and abs(second[k]) > 0:
            out[k] = out.get(k, 0) + second[k]
    return out
