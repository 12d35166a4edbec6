"""Numerical tolerances and budgets, overridable through the environment.

``AFFSURF_EPS`` scales the geometric tolerance, ``AFFSURF_BUDGET_PIVOTS``
bounds the Delaunay traversal and ``AFFSURF_NUMBA=0`` forces the pure numpy
kernels.
"""

import os
from dataclasses import dataclass


def _env_float(name, default, lo=None, hi=None):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    val = float(raw)
    if (lo is not None and val < lo) or (hi is not None and val > hi):
        raise ValueError(f"{name}={raw} outside [{lo}, {hi}]")
    return val


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    val = int(raw)
    if val <= 0:
        raise ValueError(f"{name} must be positive")
    return val


@dataclass
class Tolerances:
    eps_zero: float = 1e-12
    eps_geom: float = 1e-9
    eps_arg: float = 1e-9
    eps_hit: float = 1e-7
    max_crossings: int = 10_000
    max_pivots: int = 100_000


def _from_env():
    tol = Tolerances()
    tol.eps_geom = _env_float("AFFSURF_EPS", tol.eps_geom, 1e-14, 1e-4)
    tol.max_pivots = _env_int("AFFSURF_BUDGET_PIVOTS", tol.max_pivots)
    return tol


TOL = _from_env()


def use_numba():
    """True unless ``AFFSURF_NUMBA`` is set to 0/false/no."""
    return os.environ.get("AFFSURF_NUMBA", "1").strip().lower() not in ("0", "false", "no")
