import cmath
import math
import random

import numpy as np
import pytest

from oracles import edge_key, periodic_delaunay_edges
from affsurf.delaunay import complexity_check, components, delaunay_segments, grow_max_disk, is_exceptional
from affsurf.delaunay._kernels import kernels
from affsurf.delaunay.decomposition import polygon_interior_embedded
from affsurf.doublepole import build_construction
from affsurf.errors import ExceptionalSkip, Unsupported
from affsurf.surface_kernel import Piece, Surface
from affsurf.surface_kernel.builders import (
    build_affine_cylinder,
    build_affine_torus,
    build_cushion,
    build_exp_affine_plane,
    build_flat_torus,
    build_skew_cone,
    build_translation_cylinder,
)


def random_torus(rng, max_marks=5):
    u = complex(rng.uniform(0.8, 1.5), rng.uniform(-0.2, 0.2))
    v = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.7, 1.5))
    n = rng.randint(1, max_marks)
    pts = [0j] + [u * rng.random() + v * rng.random() for _ in range(n - 1)]
    return build_flat_torus(u, v, pts), u, v


def keys(segs):
    return {edge_key(*s.key()) for s in segs}


@pytest.mark.parametrize("seed", range(8))
def test_matches_periodic_oracle(seed):
    s, u, v = random_torus(random.Random(seed))
    segs = delaunay_segments(s)
    expected = periodic_delaunay_edges(u, v, [m.z for m in s.marks])
    assert keys(segs) == expected
    c = complexity_check(components(s))
    assert c["identity_ok"] and c["bound_ok"]


def test_square_torus_one_mark():
    s = build_flat_torus(1, 1j, [0])
    dec = components(s)
    assert len(dec.segments) == 2
    assert dec.counts["t"] == 2 and dec.counts["beta"] == 0
    assert sorted(round(seg.length, 12) for seg in dec.segments) == [1.0, 1.0]


def test_hexagonal_torus():
    w = cmath.exp(1j * math.pi / 3)
    dec = components(build_flat_torus(1, w, [0]))
    assert len(dec.segments) == 3
    assert [c.sides for c in dec.components] == [3, 3]
    assert dec.counts["t"] == 2


def test_cushion():
    dec = components(build_cushion())
    assert len(dec.segments) == 4
    assert [c.sides for c in dec.components] == [4, 4]
    c = complexity_check(dec)
    assert (c["t"], c["beta"], c["g"], c["n"]) == (4, 0, 0, 4)
    assert c["lhs"] == c["rhs"] == 4
    assert all(abs(seg.length - 1) < 1e-9 for seg in dec.segments)


def test_polygon_interiors_embedded():
    assert polygon_interior_embedded(build_cushion())
    assert polygon_interior_embedded(build_flat_torus(1.2, 0.3 + 0.9j, [0, 0.5 + 0.4j]))


def test_segment_paths_end_at_apexes():
    s = build_flat_torus(1.1, 0.2 + 1j, [0, 0.6 + 0.5j, 0.3 + 0.2j])
    for seg in delaunay_segments(s):
        total = sum(abs(pts[-1] - pts[0]) for _, pts in seg.path)
        assert abs(total - seg.length) < 1e-8
        js = seg.to_json()
        assert set(js) >= {"endpoints", "length_developed", "path"}


EXCEPTIONAL = [
    (lambda: Surface([Piece("P", "flat", ())], []), "whole-plane"),
    (lambda: build_translation_cylinder(), "translation-cylinder"),
    (lambda: build_flat_torus(1, 1j), "translation-torus"),
    (build_exp_affine_plane, "infinite-angle-cone"),
    (lambda: build_affine_cylinder(math.log(2)), "affine-cylinder"),
    (lambda: build_affine_torus(2j * math.pi * 0.3 + 0.1, math.log(2)), "affine-torus"),
]


@pytest.mark.parametrize("make,tag", EXCEPTIONAL)
def test_exceptional(make, tag):
    s = make()
    assert is_exceptional(s) == (True, tag)
    with pytest.raises(ExceptionalSkip):
        delaunay_segments(s)


def test_not_exceptional():
    assert is_exceptional(build_cushion()) == (False, None)
    assert is_exceptional(build_flat_torus(1, 1j, [0])) == (False, None)


def test_affine_surfaces_refused():
    with pytest.raises(ExceptionalSkip):
        delaunay_segments(build_skew_cone(2.0, 1.0))
    surface = build_construction(2.5, False, fuchsian=4).surface
    assert is_exceptional(surface) == (False, None)
    with pytest.raises(Unsupported):
        delaunay_segments(surface)


def test_kernels_agree():
    rng = np.random.default_rng(0)
    nb, npy = kernels("numba"), kernels("numpy")
    q = rng.normal(size=(2, 500))
    assert np.allclose(nb["depth"](q[0], q[1], 0.1, -0.2, 1.3), npy["depth"](q[0], q[1], 0.1, -0.2, 1.3))
    mu1, s1 = nb["pencil"](q[0], q[1], 0.0, 0.1, 0.6, 0.8, 0.25)
    mu2, s2 = npy["pencil"](q[0], q[1], 0.0, 0.1, 0.6, 0.8, 0.25)
    assert np.allclose(s1, s2) and np.allclose(mu1, mu2)
    assert np.allclose(nb["nested"](q[0], q[1], 0.0, 0.0, 0.0, 1.0), npy["nested"](q[0], q[1], 0.0, 0.0, 0.0, 1.0))
    a, b = rng.normal(size=(2, 40)), rng.normal(size=(2, 40))
    c, d = rng.normal(size=(2, 30)), rng.normal(size=(2, 30))
    args = (a[0], a[1], b[0], b[1], c[0], c[1], d[0], d[1], 1e-12)
    assert nb["crossings"](*args) == npy["crossings"](*args) > 0


def test_cushion_center_disk():
    d = grow_max_disk(build_cushion(), ("Q1", 0.5 + 0.5j))
    assert abs(d.radius - 1 / math.sqrt(2)) < 1e-12
    assert len(d.hits) == 4 and d.rigid
