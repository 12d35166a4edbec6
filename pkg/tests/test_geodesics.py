import cmath
import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from affsurf.errors import CuspDetected, StartOutsidePiece, ZeroVelocity
from affsurf.geodesics import (
    GeodesicState,
    extend_cylinder,
    holonomy,
    loop_around,
    trace,
    trap_exit,
    turning_number,
)
from affsurf.surface_kernel import (
    build_affine_torus,
    build_cushion,
    build_exp_affine_plane,
    build_flat_torus,
    build_skew_cone,
    build_translation_cylinder,
    vertex_residues,
)


def test_rational_slope_closes():
    r = trace(build_flat_torus(1, 1j), GeodesicState("T", 0.5 + 0.5j, 1 + 1j))
    t = r.termination
    assert t.kind == "ClosedUp" and abs(t.factor - 1) < 1e-12 and abs(t.period - math.sqrt(2)) < 1e-9


def test_exp_plane_focus():
    r = trace(build_exp_affine_plane(), GeodesicState("E", 0j, -1 + 0j))
    assert r.termination.kind == "HitApex" and abs(r.termination.time - 1) < 1e-12


def test_exp_plane_horizontal_line_never_returns():
    r = trace(build_exp_affine_plane(), GeodesicState("E", 0j, 1 + 0j), stop_on_trap=False)
    assert r.termination.kind == "TimedOut" and r.crossings == 0


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-1.4, 1.4), st.floats(0.1, 5))
def test_exp_plane_right_half_plane_traps(c, y, ang, speed):
    e = build_exp_affine_plane()
    v = speed * cmath.exp(1j * ang)
    r = trace(e, GeodesicState("E", complex(abs(c), y), v), stop_on_trap=False)
    assert all(s.at(s.duration if math.isfinite(s.duration) else 1e6).real >= abs(c) - 1e-9 for s in r.segments)
    assert trap_exit(e, "right-half-plane", r) is None


def test_start_checks():
    t = build_flat_torus(1, 1j)
    with pytest.raises(ZeroVelocity):
        trace(t, GeodesicState("T", 0.5, 0j))
    with pytest.raises(StartOutsidePiece):
        trace(t, GeodesicState("T", 3 + 3j, 1))
    with pytest.raises(StartOutsidePiece):
        trace(t, GeodesicState("nope", 0.5, 1))


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(0, 2 * math.pi))
def test_time_reversal(x, y, ang):
    cu = build_cushion()
    v = cmath.exp(1j * ang)
    fwd = trace(cu, GeodesicState("Q1", complex(x, y), v), t_max=2.7, stop_on_close=False)
    if fwd.termination.kind != "TimedOut":
        return
    f = fwd.final
    back = trace(cu, GeodesicState(f.piece, f.position, -f.velocity), t_max=2.7, stop_on_close=False)
    assert back.final.piece == "Q1"
    assert abs(back.final.position - complex(x, y)) < 1e-9


def test_holonomy_examples():
    cu = build_cushion()
    lin, aff = holonomy(cu, [("Q1", 0.2 + 0.2j), ("Q1", 0.8 + 0.2j), ("Q1", 0.5 + 0.8j)])
    assert abs(lin - 1) < 1e-12 and abs(aff.b) < 1e-12
    lin, _ = holonomy(cu, loop_around(cu, "Q1", 0j, 0.2))
    assert abs(lin + 1) < 1e-9
    k = build_skew_cone(3, math.pi / 6)
    tip = [r for _, r in vertex_residues(k) if r.real < 1][0]
    lin, _ = holonomy(k, loop_around(k, "S0", 0j, 0.3))
    assert abs(lin - cmath.exp(-2j * math.pi * tip)) < 1e-8 * abs(lin)


def test_turning_number_examples():
    cu = build_cushion()
    assert abs(turning_number(cu, [("Q1", 0.2 + 0.2j), ("Q1", 0.8 + 0.2j), ("Q1", 0.5 + 0.8j)]) - 1) < 1e-12
    assert abs(turning_number(cu, loop_around(cu, "Q1", 0j, 0.2)) - 0.5) < 1e-8
    # the closed geodesic at mid-height bounds a disk around two corners
    mid = [("Q1", 0.3 + 0.5j), ("Q1", 0.7 + 0.5j), ("Q2", 0.3 + 0.5j), ("Q2", 0.7 + 0.5j)]
    assert abs(turning_number(cu, mid)) < 1e-8


def test_cusp_detected():
    cu = build_cushion()
    with pytest.raises(CuspDetected):
        turning_number(cu, [("Q1", 0.2 + 0.2j), ("Q1", 0.8 + 0.2j), ("Q1", 0.5 + 0.2j)])


def test_turning_number_stable_under_perturbation():
    cu = build_cushion()
    rng = random.Random(3)
    base = loop_around(cu, "Q1", 0j, 0.2)
    ref = turning_number(cu, base)
    for _ in range(5):
        moved = [(p, z + 1e-4 * complex(rng.uniform(-1, 1), rng.uniform(-1, 1)), *rest) for p, z, *rest in base]
        assert abs(turning_number(cu, moved) - ref) < 1e-6
        assert abs(holonomy(cu, moved)[0] - holonomy(cu, base)[0]) < 1e-9


def test_cylinders():
    t = build_flat_torus(1, 1j)
    c = extend_cylinder(t, trace(t, GeodesicState("T", 0.5 + 0.5j, 1 + 0j)))
    assert c.kind == "translation" and abs(c.height - 1) < 1e-9
    cu = build_cushion()
    c = extend_cylinder(cu, trace(cu, GeodesicState("Q1", 0.3 + 0.5j, 1 + 0j)))
    assert c.kind == "translation" and c.boundary["left"]["type"] == "saddle_connections"
    a = build_affine_torus(2j * math.pi * 0.3, math.log(2))
    r = trace(a, GeodesicState("A", 0.3 + 0.5j, 1 + 0j))
    assert r.termination.kind == "ClosedUp" and abs(r.termination.factor - 1) > 0.1
    c = extend_cylinder(a, r)
    assert c.kind == "dilation" and c.factor != 1


def test_cylinder_end_traps():
    cyl = build_translation_cylinder()
    rng = random.Random(5)
    for _ in range(10):
        v = cmath.exp(1j * rng.uniform(0.05, math.pi - 0.05))
        r = trace(cyl, GeodesicState("C", complex(rng.random(), 0), v), max_crossings=2000, stop_on_trap=False)
        assert trap_exit(cyl, "top-end", r) is None
        assert trap_exit(cyl, "bottom-end", r) is not None
