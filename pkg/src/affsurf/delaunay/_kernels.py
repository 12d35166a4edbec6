"""Vectorised predicates used by disk growth, pivoting and the disjointness check.

Each kernel exists as a numba function and as a numpy twin; ``AFFSURF_NUMBA=0``
(or numba failing to import) selects the numpy versions.
"""

import numpy as np

from affsurf.config import use_numba


def _depth_np(qx, qy, cx, cy, r):
    """r - |q - c| for every point (positive means strictly inside)."""
    return r - np.hypot(qx - cx, qy - cy)


def _pencil_np(qx, qy, mx, my, nx, ny, h2):
    """Pencil parameter mu at which q meets the circle through the chord ends.

    Circles have centre m + mu n and radius sqrt(h2 + mu^2); the returned side
    is the sign of <q - m, n> (only points with positive side can enter).
    """
    dx, dy = qx - mx, qy - my
    side = dx * nx + dy * ny
    num = dx * dx + dy * dy - h2
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = np.where(side > 0, num / (2 * side), np.inf)
    return mu, side


def _nested_np(qx, qy, px, py, ux, uy):
    """Parameter lam at which q meets the circle of centre p + lam u and radius lam."""
    dx, dy = qx - px, qy - py
    side = dx * ux + dy * uy
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(side > 0, (dx * dx + dy * dy) / (2 * side), np.inf)


def _crossings_np(ax, ay, bx, by, cx, cy, dx, dy, tol):
    """Count proper intersections between segments AB (n of them) and CD (k of them).

    Contacts within ``tol`` of an endpoint are ignored: segments may share
    their apex endpoints.
    """
    ax, ay, bx, by = (a[:, None] for a in (ax, ay, bx, by))
    ux, uy = bx - ax, by - ay
    vx, vy = dx - cx, dy - cy
    den = ux * vy - uy * vx
    wx, wy = cx - ax, cy - ay
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (wx * vy - wy * vx) / den
        t = (wx * uy - wy * ux) / den
    ok = (np.abs(den) > 1e-300) & (s > tol) & (s < 1 - tol) & (t > tol) & (t < 1 - tol)
    return int(np.count_nonzero(ok))


_NUMBA = None


def _load_numba():
    global _NUMBA
    if _NUMBA is not None:
        return _NUMBA
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _NUMBA = {}
        return _NUMBA

    @njit(cache=True)
    def depth(qx, qy, cx, cy, r):
        out = np.empty(qx.shape[0])
        for i in range(qx.shape[0]):
            out[i] = r - np.hypot(qx[i] - cx, qy[i] - cy)
        return out

    @njit(cache=True)
    def pencil(qx, qy, mx, my, nx, ny, h2):
        k = qx.shape[0]
        mu = np.empty(k)
        side = np.empty(k)
        for i in range(k):
            dx = qx[i] - mx
            dy = qy[i] - my
            sd = dx * nx + dy * ny
            side[i] = sd
            if sd > 0:
                mu[i] = (dx * dx + dy * dy - h2) / (2 * sd)
            else:
                mu[i] = np.inf
        return mu, side

    @njit(cache=True)
    def nested(qx, qy, px, py, ux, uy):
        k = qx.shape[0]
        out = np.empty(k)
        for i in range(k):
            dx = qx[i] - px
            dy = qy[i] - py
            sd = dx * ux + dy * uy
            out[i] = (dx * dx + dy * dy) / (2 * sd) if sd > 0 else np.inf
        return out

    @njit(cache=True)
    def crossings(ax, ay, bx, by, cx, cy, dx, dy, tol):
        count = 0
        for i in range(ax.shape[0]):
            ux = bx[i] - ax[i]
            uy = by[i] - ay[i]
            for j in range(cx.shape[0]):
                vx = dx[j] - cx[j]
                vy = dy[j] - cy[j]
                den = ux * vy - uy * vx
                if abs(den) <= 1e-300:
                    continue
                wx = cx[j] - ax[i]
                wy = cy[j] - ay[i]
                s = (wx * vy - wy * vx) / den
                t = (wx * uy - wy * ux) / den
                if tol < s < 1 - tol and tol < t < 1 - tol:
                    count += 1
        return count

    _NUMBA = {"depth": depth, "pencil": pencil, "nested": nested, "crossings": crossings}
    return _NUMBA


_NUMPY = {"depth": _depth_np, "pencil": _pencil_np, "nested": _nested_np, "crossings": _crossings_np}


def kernels(force=None):
    """The kernel table: ``force`` may be 'numba' or 'numpy'; default follows the environment."""
    want = force or ("numba" if use_numba() else "numpy")
    if want == "numba":
        table = _load_numba()
        if table:
            return table
    return _NUMPY


def backend_name():
    return "numba" if kernels() is not _NUMPY else "numpy"
