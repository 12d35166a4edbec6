import cmath
import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from affsurf.affine_core import AffMap, compose, invert
from affsurf.errors import DegenerateLeadingCoefficient, DomainError, InvalidSurface, OutsidePiece
from affsurf.geodesics import GeodesicState, trace, trap_exit
from affsurf.irregular import (
    AsymptoticFamily,
    apply_affine,
    attracting_axes,
    build_canonical_model,
    extract_family_from_model,
    family_expand,
    invariants_equal,
    is_centered,
    model_developing_eval,
    model_to_surface,
    normalize,
    repelling_axes,
    shift_family,
)
from affsurf.surface_kernel import validate

cx = st.builds(complex, st.floats(-3, 3), st.floats(-3, 3))


def random_family(rng, d=None, res=None):
    d = d or rng.randint(2, 5)
    res = res if res is not None else complex(rng.uniform(-3, 3), rng.uniform(-1, 1))
    u = tuple(complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(d - 1))
    return AsymptoticFamily(d, res, u, complex(rng.uniform(-2, 2), rng.uniform(-2, 2)))


def test_expand_examples():
    assert all(family_expand(AsymptoticFamily.centered(3, 0.7), n) == 0 for n in range(-5, 5))
    f = AsymptoticFamily(2, 2, (0,), 1)
    assert all(abs(f[n] - n) < 1e-12 for n in range(-6, 7))
    f = AsymptoticFamily(2, 0.25, (1,), 0)
    assert all(abs(f[n] - (-1j) ** n) < 1e-12 for n in range(-4, 8))


def test_bad_family():
    with pytest.raises(DomainError):
        AsymptoticFamily(1, 0, (), 0)
    with pytest.raises(DomainError):
        AsymptoticFamily(3, 0, (1,), 0)


@pytest.mark.parametrize("seed", range(5))
def test_recurrence_closure(seed):
    rng = random.Random(seed)
    f = random_family(rng)
    for _ in range(40):
        k = rng.randint(-20, 20)
        lhs = f[k + f.m]
        rhs = f.a * f[k] + f.b
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), abs(f.b) + abs(f[k]) * abs(f.a))


def test_axes():
    assert repelling_axes(1, 2) == [0.0]
    assert attracting_axes(1, 2) == [math.pi]
    rep = repelling_axes(1, 4)
    assert len(rep) == 3 and all(abs(rep[i + 1] - rep[i] - 2 * math.pi / 3) < 1e-12 for i in range(2))
    for a, d in [(1, 2), (2 - 1j, 3), (0.3j, 5)]:
        for th in repelling_axes(a, d):
            w = -a * cmath.exp(-1j * (d - 1) * th)
            assert abs(w.imag) < 1e-9 and w.real < 0
        for th in attracting_axes(a, d):
            w = -a * cmath.exp(-1j * (d - 1) * th)
            assert abs(w.imag) < 1e-9 and w.real > 0
    with pytest.raises(DegenerateLeadingCoefficient):
        repelling_axes(0, 3)


def test_equality_examples():
    e = invariants_equal(AsymptoticFamily(2, 1, (0,), 1), AsymptoticFamily(2, 1, (5,), 2))
    assert e and e.witness.close_to(AffMap(2, 5))
    assert not invariants_equal(AsymptoticFamily.centered(2, 1), AsymptoticFamily(2, 1, (0,), 1))
    a = AsymptoticFamily(4, 1, (0, 1, 3), 0)
    b = AsymptoticFamily(4, 1, (1, 3, 0), 0)
    assert not invariants_equal(a, b)
    e = invariants_equal(a, b, allow_shift=True)
    assert e and e.shift in (1, 2)


@pytest.mark.parametrize("seed", range(6))
def test_equivalence_relation(seed):
    rng = random.Random(seed)
    f = random_family(rng)
    g1 = AffMap(complex(rng.uniform(0.5, 2), rng.uniform(-1, 1)), complex(rng.uniform(-1, 1), 0))
    g2 = AffMap(complex(rng.uniform(-2, -0.5), rng.uniform(-1, 1)), 1j)
    f1, f2 = apply_affine(f, g1), apply_affine(apply_affine(f, g1), g2)
    assert invariants_equal(f, f)
    e12 = invariants_equal(f1, f2)
    e21 = invariants_equal(f2, f1)
    e01 = invariants_equal(f, f1)
    e02 = invariants_equal(f, f2)
    assert e12 and e21 and e01 and e02
    assert e01.witness.close_to(g1, 1e-8)
    assert compose(e12.witness, e01.witness).close_to(e02.witness, 1e-8)
    assert invert(e12.witness).close_to(e21.witness, 1e-8)
    s = shift_family(f, 1)
    assert invariants_equal(f, s, allow_shift=True)


def test_centered():
    assert is_centered(AsymptoticFamily.centered(3, 0.3, 2))
    assert not is_centered(AsymptoticFamily(2, 1, (0,), 1))
    assert not is_centered(AsymptoticFamily(2, 0.5, (1,), 0))


def test_normalize_is_class_function():
    rng = random.Random(9)
    f = random_family(rng, d=3)
    g = apply_affine(f, AffMap(2 - 1j, 3))
    nf, ng = normalize(f), normalize(g)
    assert nf.keys() == ng.keys() and nf["shift"] == ng["shift"]
    for key in ("u", "b"):
        assert np.allclose(np.array(nf[key], float), np.array(ng[key], float), atol=1e-10)
    assert normalize(AsymptoticFamily.centered(3, 0.2, 4))["kind"] == "centered"


def test_model_examples():
    m = build_canonical_model(AsymptoticFamily.centered(2, 2))
    assert m.s == 0 and all(s == 0 and b == 0 for s, b in m.gluing_values())
    m = build_canonical_model(AsymptoticFamily(2, 2, (0,), 1))
    assert abs(m.s) < 1e-12
    assert abs(m.upper_glue(0).b + 1) < 1e-12
    assert abs(model_developing_eval(m, 1, complex(-40, 0)) - 1) < 1e-12
    with pytest.raises(OutsidePiece):
        model_developing_eval(m, 0, complex(0, 0))
    with pytest.raises(InvalidSurface):
        build_canonical_model(AsymptoticFamily(2, 2, (0,), 1e6), R=1.0)


@pytest.mark.parametrize("seed", range(10))
def test_model_round_trip_and_invariants(seed):
    rng = random.Random(seed)
    f = random_family(rng)
    m = build_canonical_model(f)
    assert m.R > 2 * math.pi and m.admissibility_margin() >= 1e-6
    back = extract_family_from_model(m)
    e = invariants_equal(back, f)
    assert e and e.shift == 0
    assert abs(m.modres_sum() - 2j * math.pi * (f.res - f.d)) < 1e-12
    L = m.holonomy
    assert abs(L.a - f.a) < 1e-10 * abs(f.a) and abs(L.b - f.b) < 1e-10 * (1 + abs(f.b))
    # developing map: asymptotic values along the left of each A_n
    T = m.R + 5
    for n in range(f.m):
        val = model_developing_eval(m, n, complex(-T, 0))
        assert abs(val - f[n]) < math.exp(-T + 1) * max(1.0, abs(m.lam(n).a))
    # equivariance: one period later the values are mapped by the holonomy
    for x in (0, 0.5):
        w = complex(m.R + 1, 0.3) if x == 0.5 else complex(-m.R - 1, 0.3)
        lhs = model_developing_eval(m, x + f.m, w)
        rhs = L(model_developing_eval(m, x, w))
        assert abs(lhs - rhs) < 1e-8 * (1 + abs(rhs))


def test_model_surface():
    rng = random.Random(4)
    f = random_family(rng, d=3)
    m = build_canonical_model(f)
    s = model_to_surface(m)
    rep = validate(s)
    assert rep.ok and abs(rep.residue_sum - f.res) < 1e-12
    pole = [x for x in rep.singularities if x.order == f.d]
    assert len(pole) == 1
    ids = {t.id for t in s.traps}
    assert {"sepal+0", "sepal-0", "petal0", "petal1"} <= ids


def test_centered_quadratic_model_is_exp_plane():
    m = build_canonical_model(AsymptoticFamily.centered(2, 2))
    s = model_to_surface(m)
    rep = validate(s)
    assert rep.ok and rep.singularities[0].order == 2 and abs(rep.singularities[0].residue - 2) < 1e-12
    r = trace(s, GeodesicState("A0.left", complex(-m.R - 3, 0), -1 + 0j))
    assert r.termination.kind == "HitApex"


@given(st.floats(-5, 5), st.floats(0.05, math.pi - 0.05), st.floats(0.1, 3))
def test_sepal_traps(x, ang, speed):
    m = build_canonical_model(AsymptoticFamily(3, 0.4 + 0.1j, (0, 1 + 0.5j), 0.2))
    s = model_to_surface(m)
    h = m.R + math.pi
    r = trace(s, GeodesicState("A1.up", complex(x * m.R, h), speed * cmath.exp(1j * ang)),
              max_crossings=10_000, stop_on_trap=False)
    assert trap_exit(s, "sepal+1", r) is None
    r = trace(s, GeodesicState("B0", complex(m.R, x), speed * cmath.exp(1j * (ang - math.pi / 2))),
              max_crossings=10_000, stop_on_trap=False)
    assert trap_exit(s, "petal0", r) is None
