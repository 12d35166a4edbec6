"""Acceptance suite: ten quantitative checks, one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

import cmath
import math
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import cone_residue, edge_key, periodic_delaunay_edges  # noqa: E402
from affsurf.delaunay import complexity_check, components, delaunay_segments, is_exceptional  # noqa: E402
from affsurf.doublepole import (  # noqa: E402
    build_construction,
    centered_class_C,
    class_c_report,
    gamma_prediction,
    loop_integral_I,
)
from affsurf.errors import ExceptionalSkip  # noqa: E402
from affsurf.fuchsian import (  # noqa: E402
    LaurentSeries,
    expected_normal_form,
    formal_normal_form,
    pullback_gamma,
)
from affsurf.geodesics import GeodesicState, loop_around, trace, trap_exit, turning_number  # noqa: E402
from affsurf.irregular import (  # noqa: E402
    AsymptoticFamily,
    build_canonical_model,
    extract_family_from_model,
    invariants_equal,
    model_to_surface,
)
from affsurf.surface_kernel import (  # noqa: E402
    Piece,
    Slit,
    Surface,
    build_affine_cylinder,
    build_affine_torus,
    build_cushion,
    build_exp_affine_plane,
    build_flat_torus,
    build_skew_cone,
    build_translation_cylinder,
    graft_sector,
    validate,
    vertex_residues,
)

TWO_PI = 2 * math.pi


def _cone_slit(cone, frac=0.5):
    a = cone.meta["alpha"] / len(cone.pieces) * frac
    return Slit("S0", 0j, a)


# --- 1 ----------------------------------------------------------------------------


def criterion_1():
    rng = random.Random(1)
    surfaces = [
        build_flat_torus(1, 1j),
        build_flat_torus(1.3, 0.4 + 0.9j, [0, 0.5 + 0.5j, 0.2 + 0.7j]),
        build_translation_cylinder(),
        build_cushion(),
        build_affine_torus(2j * math.pi * 0.3 + 0.1, math.log(2)),
        build_affine_torus(0.5 + 1j, -0.3 + 2j),
        build_affine_cylinder(math.log(3)),
        build_affine_cylinder(0.2 + 1j),
        build_exp_affine_plane(),
    ]
    cones = []
    for _ in range(10):
        k = build_skew_cone(rng.uniform(0.2, 5), rng.uniform(0.2, 12))
        surfaces.append(k)
        cones.append(k)
    for k in cones[:4]:
        surfaces.append(graft_sector(k, _cone_slit(k), rng.uniform(0.1, 8), rng.uniform(0.3, 3)))
    a = cones[0].meta["alpha"] / (2 * len(cones[0].pieces))
    surfaces.append(graft_sector(cones[0], Slit("S0", cmath.exp(1j * a), a), math.inf))
    surfaces.append(build_construction(2.5, True).surface)
    worst = 0.0
    for s in surfaces:
        rep = validate(s)
        if not rep.ok:
            return False, f"invalid surface {s.meta}"
        worst = max(worst, abs(rep.residue_sum - (2 - 2 * rep.genus)))
    return worst < 1e-9, f"{len(surfaces)} surfaces, max |sum res - (2-2g)| = {worst:.2e}"


# --- 2 ----------------------------------------------------------------------------


def criterion_2():
    rng = random.Random(2)
    cu = build_cushion()
    # (surface, piece, point, expected residue)
    cases = [(cu, "Q1", 0j, 0.5), (cu, "Q2", 1 + 1j, 0.5)]
    for _ in range(5):
        s, alpha = rng.uniform(0.3, 4), rng.uniform(0.4, 10)
        cases.append((build_skew_cone(s, alpha), "S0", 0j, cone_residue(alpha, s)))
    k = build_skew_cone(1.7, 2.2)
    grafted = graft_sector(k, _cone_slit(k), 2.5, 1.4)
    cases.append((grafted, "S0+", 0j, cone_residue(2.2 + 2.5, 1.7 * 1.4)))
    t = build_flat_torus(1, 1j, [0, 0.5 + 0.5j])
    cases += [(t, "T", 0j, 0), (t, "T", 0.5 + 0.5j, 0)]
    worst = 0.0
    for surface, pid, z, res in cases:
        tn = turning_number(surface, loop_around(surface, pid, z, 0.05))
        worst = max(worst, abs(tn - (1 - complex(res).real)))
    mid = [("Q1", 0.3 + 0.5j), ("Q1", 0.7 + 0.5j), ("Q2", 0.3 + 0.5j), ("Q2", 0.7 + 0.5j)]
    two = turning_number(cu, mid)
    ok = worst < 1e-8 and abs(two) < 1e-8
    return ok, (f"{len(cases)} single loops, max |tn - (1 - Re res)| = {worst:.2e}; "
                f"cushion two-corner loop tn = {two:.1e}")


# --- 3 ----------------------------------------------------------------------------


def criterion_3():
    mismatches, identity_fail, bound_fail = 0, 0, 0
    for seed in range(20):
        rng = random.Random(300 + seed)
        u = complex(rng.uniform(0.8, 1.5), rng.uniform(-0.2, 0.2))
        v = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.7, 1.5))
        n = rng.randint(1, 5)
        pts = [0j] + [u * rng.random() + v * rng.random() for _ in range(n - 1)]
        s = build_flat_torus(u, v, pts)
        got = {edge_key(*seg.key()) for seg in delaunay_segments(s)}
        want = periodic_delaunay_edges(u, v, [m.z for m in s.marks])
        mismatches += got != want
        c = complexity_check(components(s))
        identity_fail += not c["identity_ok"]
        bound_fail += not c["bound_ok"]
    ok = mismatches == identity_fail == bound_fail == 0
    return ok, (f"20 tori: oracle mismatches {mismatches}, identity failures {identity_fail}, "
                f"bound failures {bound_fail}")


# --- 4 ----------------------------------------------------------------------------


def criterion_4():
    dec = components(build_cushion())
    c = complexity_check(dec)
    sides = [comp.sides for comp in dec.components]
    ok = (len(dec.segments) == 4 and sides == [4, 4] and c["t"] == 4 and c["beta"] == 0
          and c["lhs"] == c["rhs"] == 4 * c["g"] - 4 + 2 * c["n"] == 4)
    return ok, f"segments {len(dec.segments)}, polygons {sides}, t={c['t']}, beta={c['beta']}, g={c['g']}, n={c['n']}"


# --- 5 ----------------------------------------------------------------------------


EXCEPTIONAL_MODELS = [
    (lambda: Surface([Piece("P", "flat", ())], []), "whole-plane"),
    (build_translation_cylinder, "translation-cylinder"),
    (lambda: build_flat_torus(1, 0.3 + 1j), "translation-torus"),
    (build_exp_affine_plane, "infinite-angle-cone"),
    (lambda: build_affine_cylinder(math.log(2)), "affine-cylinder"),
    (lambda: build_affine_torus(2j * math.pi * 0.3 + 0.1, math.log(2)), "affine-torus"),
]


def criterion_5():
    bad = []
    for make, tag in EXCEPTIONAL_MODELS:
        s = make()
        if is_exceptional(s) != (True, tag):
            bad.append(f"{tag}: classified {is_exceptional(s)}")
            continue
        try:
            delaunay_segments(s)
            bad.append(f"{tag}: not refused")
        except ExceptionalSkip:
            pass
    return not bad, "six models tagged and refused" if not bad else "; ".join(bad)


# --- 6 ----------------------------------------------------------------------------


def criterion_6():
    rng = random.Random(6)
    worst_mod, worst_hol, failures = 0.0, 0.0, 0
    for _ in range(50):
        d = rng.randint(2, 5)
        res = complex(rng.uniform(-3, 3), rng.uniform(-1, 1))
        u = tuple(complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(d - 1))
        fam = AsymptoticFamily(d, res, u, complex(rng.uniform(-2, 2), rng.uniform(-2, 2)))
        m = build_canonical_model(fam)
        eq = invariants_equal(extract_family_from_model(m), fam)
        failures += not (eq and eq.shift == 0)
        worst_mod = max(worst_mod, abs(m.modres_sum() - TWO_PI * 1j * (res - d)))
        L = m.holonomy
        err = max(abs(L.a - cmath.exp(-2j * math.pi * res)) / max(1.0, abs(L.a)),
                  abs(L.b - fam.b) / max(1.0, abs(fam.b)))
        worst_hol = max(worst_hol, err)
    ok = failures == 0 and worst_mod < 1e-12 and worst_hol < 1e-10
    return ok, (f"50 models: round-trip failures {failures}, modres error {worst_mod:.1e}, "
                f"holonomy error {worst_hol:.1e}")


# --- 7 ----------------------------------------------------------------------------


def _random_gamma(rng, d, n):
    terms = {k: complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for k in range(-d, n + 1)}
    terms[-d] = complex(rng.uniform(0.5, 2), rng.uniform(-1, 1))
    return LaurentSeries.from_dict(terms, n)


def criterion_7():
    rng = random.Random(7)
    worst, bad_sub = 0.0, 0
    gammas = []
    for _ in range(50):
        d = rng.randint(1, 4)
        n = d + 10
        g = _random_gamma(rng, d, n)
        gammas.append((g, d, n))
        nf = formal_normal_form(g, n)
        check = pullback_gamma(g, nf.phi, n)
        want = expected_normal_form(d, nf.residue_coeff, n)
        worst = max(worst, max(abs(check[k] - want[k]) for k in range(-d, n + 1)))
    for g, d, n in gammas[:20]:
        jet = [complex(rng.uniform(0.5, 1.5), rng.uniform(-0.5, 0.5)),
               complex(rng.uniform(-1, 1), rng.uniform(-1, 1)), rng.uniform(-1, 1)]
        h = pullback_gamma(g, jet, n)
        nf_g, nf_h = formal_normal_form(g, n), formal_normal_form(h, n)
        if nf_h.d != d or abs(nf_h.residue_coeff - nf_g.residue_coeff) > 1e-10:
            bad_sub += 1
    ok = worst < 1e-10 and bad_sub == 0
    return ok, f"50 normal forms: max coefficient error {worst:.1e}; 20 substitutions, {bad_sub} changed invariants"


# --- 8 ----------------------------------------------------------------------------


CENTERED_SET = {2: True, 3: True, 4: True, 2.5: False, 2 + 0.1j: False, 1.5 + 1j: False}


def criterion_8():
    worst_rel, worst_r, smallest = 0.0, 0.0, math.inf
    for x in (1.2, 1.7, 2.2, 2.7, 3.2):
        for y in (-1.0, -0.5, 0.0, 0.5, 1.0):
            res = complex(x, y)
            I = loop_integral_I(res)
            pred = gamma_prediction(res)
            worst_rel = max(worst_rel, abs(I - pred) / abs(pred))
            worst_r = max(worst_r, abs(I - loop_integral_I(res, r=3.0)))
            smallest = min(smallest, abs(I))
    wrong = [res for res, c in CENTERED_SET.items()
             if centered_class_C(res) is not c or class_c_report(res).numeric_centered is not c]
    ok = worst_rel < 1e-6 and worst_r < 1e-8 and smallest > 1e-6 and not wrong
    return ok, (f"25 grid points: rel error {worst_rel:.1e}, r-dependence {worst_r:.1e}, min |I| {smallest:.2f}; "
                f"centered rule mismatches {wrong}")


# --- 9 ----------------------------------------------------------------------------


def _trap_starts(rng):
    """(surface, trap id, start state) for geodesics entering a declared trap."""
    out = []
    fam = AsymptoticFamily(3, 0.4 + 0.1j, (0, 1 + 0.5j), 0.2)
    model = build_canonical_model(fam)
    ms = model_to_surface(model)
    h = model.R + math.pi
    for _ in range(30):
        n = rng.randrange(fam.m)
        x = rng.uniform(-3, 3) * model.R
        ang = rng.uniform(0.05, math.pi - 0.05)
        kind = rng.randrange(3)
        if kind == 0:
            out.append((ms, f"sepal+{n}", GeodesicState(f"A{n}.up", complex(x, h), cmath.exp(1j * ang))))
        elif kind == 1:
            out.append((ms, f"sepal-{n}", GeodesicState(f"A{n}.down", complex(x, -h), cmath.exp(-1j * ang))))
        else:
            y = rng.uniform(-4, 4)
            out.append((ms, f"petal{n}", GeodesicState(f"B{n}", complex(model.R, y),
                                                       cmath.exp(1j * (ang - math.pi / 2)))))
    # anti-conical point at infinity of skew cones
    while len(out) < 60:
        s, alpha = rng.uniform(0.3, 4), rng.uniform(0.5, 6)
        cone = build_skew_cone(s, alpha)
        k = math.log(s) / alpha
        width = alpha / len(cone.pieces)
        th = rng.uniform(0.05, 0.95) * width
        w = math.exp(k * th) * cmath.exp(1j * th)
        # inward: the log-spiral function log|z| - k arg z increases along v
        for _ in range(100):
            v = cmath.exp(1j * rng.uniform(0, TWO_PI))
            if ((1 + 1j * k) * v / w).real > 0.05:
                break
        out.append((cone, "anticonical-infinity", GeodesicState("S0", w, v)))
    cyl = build_translation_cylinder()
    for _ in range(20):
        up = rng.random() < 0.5
        ang = rng.uniform(0.05, math.pi - 0.05)
        v = cmath.exp(1j * ang) if up else cmath.exp(-1j * ang)
        out.append((cyl, "top-end" if up else "bottom-end", GeodesicState("C", complex(rng.uniform(0.05, 0.95), 0), v)))
    plane = build_exp_affine_plane()
    for _ in range(20):
        v = rng.uniform(0.1, 3) * cmath.exp(1j * rng.uniform(-1.5, 1.5))
        out.append((plane, "right-half-plane", GeodesicState("E", complex(0, rng.uniform(-5, 5)), v)))
    return out


def criterion_9():
    rng = random.Random(9)
    starts = _trap_starts(rng)
    exits = []
    crossings = 0
    for surface, trap, st in starts:
        r = trace(surface, st, max_crossings=10_000, stop_on_trap=False)
        crossings += r.crossings
        if trap_exit(surface, trap, r) is not None:
            exits.append(trap)
    return not exits, f"{len(starts)} geodesics ({crossings} crossings), exits: {exits or 'none'}"


# --- 10 ---------------------------------------------------------------------------


def criterion_10():
    rng = random.Random(10)
    worst, bad = 0.0, 0
    for _ in range(20):
        s, alpha = rng.uniform(0.3, 3), rng.uniform(0.3, 4)
        theta, dil = rng.uniform(0.05, 12), rng.uniform(0.3, 3)
        cone = build_skew_cone(s, alpha)
        before = validate(cone)
        g = graft_sector(cone, _cone_slit(cone), theta, dil)
        after = validate(g)
        if not after.ok or after.genus != before.genus or abs(after.residue_sum - before.residue_sum) > 1e-10:
            bad += 1
        shift = -(math.log(dil) + 1j * theta) / (TWO_PI * 1j)
        r0 = [r for _, r in vertex_residues(cone)]
        r1 = [r for _, r in vertex_residues(g)]
        tip0, inf0 = sorted(r0, key=lambda z: z.real)
        tip1 = min(r1, key=lambda z: abs(z - (tip0 + shift)))
        inf1 = min(r1, key=lambda z: abs(z - (inf0 - shift)))
        worst = max(worst, abs(tip1 - (tip0 + shift)), abs(inf1 - (inf0 - shift)))
    cone = build_skew_cone(1.3, 2.0)
    a = cone.meta["alpha"] / (2 * len(cone.pieces))
    before = [r for _, r in vertex_residues(cone)]
    g = graft_sector(cone, Slit("S0", cmath.exp(1j * a), a), math.inf)
    rep = validate(g)
    poles = [x for x in rep.singularities if x.order == 2]
    # the regular start point (residue 0) and infinity merge into one double pole
    inf_res = max(before, key=lambda z: z.real)
    merge_err = abs(poles[0].residue - inf_res) if len(poles) == 1 else math.inf
    ok = bad == 0 and worst < 1e-10 and merge_err < 1e-10 and rep.ok
    return ok, f"20 finite grafts: {bad} invariant failures, shift error {worst:.1e}; infinite graft merge error {merge_err:.1e}"


# --- harness -----------------------------------------------------------------------


CRITERIA = [
    (1, "residue conservation", criterion_1, 1.0),
    (2, "turning numbers", criterion_2, 1.0),
    (3, "Delaunay oracle equivalence", criterion_3, 30.0),
    (4, "cushion decomposition", criterion_4, 5.0),
    (5, "exceptional classification", criterion_5, 1.0),
    (6, "canonical model round trip", criterion_6, 2.0),
    (7, "formal normal form", criterion_7, 2.0),
    (8, "Gamma identity", criterion_8, 10.0),
    (9, "trap properties", criterion_9, 30.0),
    (10, "grafting arithmetic", criterion_10, 5.0),
]


def run_criterion(number):
    _, name, fn, budget = CRITERIA[number - 1]
    t0 = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - t0
    passed = ok and elapsed < budget
    line = (f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {name}: {detail} "
            f"({elapsed:.2f} s, budget {budget:g} s)")
    return passed, line


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA])
def test_criterion(number, capsys):
    passed, line = run_criterion(number)
    with capsys.disabled():
        print("\n" + line)
    assert passed, line


if __name__ == "__main__":
    results = [run_criterion(n) for n, *_ in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(p for p, _ in results) else 1)
