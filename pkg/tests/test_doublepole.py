import cmath
import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import GAMMA_1_5, LOOP_AT_2_5, gamma_by_quadrature
from affsurf.doublepole import (
    build_construction,
    centered_class_C,
    class_c_report,
    gamma_euler,
    gamma_prediction,
    loop_integral_I,
    min_fuchsian_count,
    numerically_centered,
)
from affsurf.errors import PoleOfGamma, UnrealizableCase
from affsurf.surface_kernel import validate

GRID = [complex(x, y) for x in (1.2, 1.7, 2.2, 2.7, 3.2) for y in (-1, -0.5, 0, 0.5, 1)]


@given(st.floats(-10, 30), st.floats(-30, 30))
def test_gamma_vs_mpmath(x, y):
    z = complex(x, y)
    k = round(x)
    if abs(y) < 1e-6 and k <= 0 and abs(x - k) < 1e-6:
        return
    ref = complex(mpmath.gamma(mpmath.mpc(x, y)))
    assert abs(gamma_euler(z) - ref) <= 1e-12 * abs(ref)


@pytest.mark.parametrize("z", [0.7, 1.5, 2.3 + 0.4j, 4 - 1j])
def test_gamma_vs_quadrature(z):
    ref = gamma_by_quadrature(z)
    assert abs(gamma_euler(z) - ref) <= 1e-9 * abs(ref)


def test_gamma_basics():
    assert abs(gamma_euler(1.5) - GAMMA_1_5) < 1e-6
    for n in range(1, 12):
        assert abs(gamma_euler(n) - math.factorial(n - 1)) <= 1e-13 * math.factorial(n - 1)
    for z in (0.3 + 0.2j, -2.5 + 1j, 7.1 - 3j):
        assert abs(gamma_euler(z + 1) - z * gamma_euler(z)) <= 1e-12 * abs(gamma_euler(z + 1))
    for k in (0, -1, -7):
        with pytest.raises(PoleOfGamma):
            gamma_euler(k)


def test_loop_examples():
    assert abs(loop_integral_I(2.5) - LOOP_AT_2_5) < 1e-6
    assert abs(loop_integral_I(3)) < 1e-12
    assert abs(loop_integral_I(2)) < 1e-12


@pytest.mark.parametrize("res", GRID[::3])
def test_loop_matches_gamma(res):
    I = loop_integral_I(res)
    pred = gamma_prediction(res)
    assert abs(I - pred) <= 1e-8 * abs(pred)
    assert abs(I - loop_integral_I(res, r=2.5)) <= 1e-10 * max(1.0, abs(I))
    if abs(res.imag) > 0 or abs(res.real - round(res.real)) > 0:
        assert abs(I) > 1e-6


def test_prediction_at_low_integers():
    # the loop integral is continuous in res, so the limit must match nearby values
    for k in (1, 0, -2):
        near = loop_integral_I(k + 1e-7)
        assert abs(gamma_prediction(k) - near) < 1e-5 * abs(near)
        assert abs(loop_integral_I(k) - gamma_prediction(k)) < 1e-10


@pytest.mark.parametrize("res,expected", [(2, True), (3, True), (4, True), (2.5, False),
                                          (2 + 0.1j, False), (1.5 + 1j, False), (1, False), (-1, False)])
def test_centered_rule(res, expected):
    assert centered_class_C(res) is expected
    rep = class_c_report(res)
    assert rep.centered is expected and rep.numeric_centered is expected
    assert numerically_centered(res) is expected
    js = rep.to_json()
    assert js["centered"] is expected


@pytest.mark.parametrize("res,centered,count", [
    (2, True, 0), (3, True, 1), (2.5, True, 2), (1 + 1j, True, 2),
    (2.5, False, 1), (-0.5, False, 1), (3, False, 2), (2, False, 2),
])
def test_min_fuchsian_count(res, centered, count):
    assert min_fuchsian_count(res, centered) == count


CASES = [(2, True), (3, True), (4, True), (2.5, True), (0.3 - 0.4j, True), (-1.2, True),
         (2.5, False), (1.5 + 1j, False), (0.5, False), (-1 + 0.5j, False), (1, False), (2, False), (3, False)]


@pytest.mark.parametrize("res,centered", CASES)
def test_constructions(res, centered):
    c = build_construction(res, centered)
    rep = validate(c.surface)
    assert rep.ok
    poles = [s for s in rep.singularities if s.order == 2]
    assert len(poles) == 1 and abs(poles[0].residue - res) < 1e-7
    assert len(rep.singularities) - 1 == min_fuchsian_count(res, centered)
    assert abs(rep.residue_sum - 2) < 1e-9 and rep.genus == 0
    assert c.to_json()["roster"]


def test_extra_fuchsian_points_and_unrealizable():
    c = build_construction(2.5, False, fuchsian=3)
    assert len(validate(c.surface).singularities) == 4
    with pytest.raises(UnrealizableCase):
        build_construction(3, True, fuchsian=0)
    with pytest.raises(UnrealizableCase):
        build_construction(2.5, True, fuchsian=1)
