import numpy as np
import pytest
import sympy as sp

from pencil_monodromy.errors import SpecError
from pencil_monodromy.genericity import (PencilSpec, check_genericity, check_smooth, check_transversal,
                                         critical_points, critical_set_A, random_pencil, singularity_stratum)
from pencil_monodromy.poly import MultiPoly, evaluate, normalize_projective
from oracles import X, Y, Z, to_sympy


def mp(terms: dict) -> MultiPoly:
    return MultiPoly.from_dict(terms)


def from_sympy(expr) -> MultiPoly:
    poly = sp.Poly(sp.expand(expr), X, Y, Z)
    recs = []
    for exps, coef in poly.terms():
        re, im = sp.re(coef), sp.im(coef)
        recs.append({"exps": list(exps), "re": str(re), "im": str(im)})
    return MultiPoly.from_records(recs)


# --- A ----------------------------------------------------------------------------


@pytest.mark.parametrize("p,q,expect", [(1, 1, set()), (2, 1, {0}), (2, 3, {0, "inf"})])
def test_critical_set_A(p, q, expect):
    assert set(critical_set_A(p, q)) == expect


# --- smoothness / transversality ------------------------------------------------------


def test_smooth_quadric():
    assert check_smooth(mp({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1})).passed


def test_coordinate_triangle_is_singular():
    v = check_smooth(mp({(1, 1, 1): 1}))
    assert not v.passed
    witnesses = [normalize_projective(w) for w in v.witnesses]
    assert any(np.allclose(np.abs(w), [1, 0, 0], atol=1e-8) for w in witnesses)


def test_seeded_cubic_is_smooth(cubic_spec):
    assert check_smooth(cubic_spec.F).passed and check_smooth(cubic_spec.G).passed


def test_transversal_lines():
    v, pts = check_transversal(mp({(1, 0, 0): 1}), mp({(0, 1, 0): 1}))
    assert v.passed and len(pts) == 1
    assert np.allclose(np.abs(normalize_projective(pts[0])), [0, 0, 1])


def test_tangential_intersection_fails():
    # x = 0 meets x z + y^2 = 0 doubly at (0 : 0 : 1)
    v, _ = check_transversal(mp({(1, 0, 0): 1}), mp({(1, 0, 1): 1, (0, 2, 0): 1}))
    assert not v.passed


def test_seeded_cubic_pair_has_nine_base_points(cubic_generic):
    assert cubic_generic["report"].transversal.passed
    assert len(cubic_generic["crit"].base_points) == 9


# --- critical points -------------------------------------------------------------------


def test_cubic_pencil_critical_points(cubic_generic):
    crit = cubic_generic["crit"]
    assert cubic_generic["report"].passed
    assert crit.r == 12 and len(set(crit.values)) == 12
    assert crit.A == frozenset()
    vals = np.array(crit.values)
    gaps = np.abs(vals[:, None] - vals[None, :]) + np.eye(12) * 1e9
    assert gaps.min() > 1e-6


def test_conic_case_critical_points(conic_spec):
    report, crit = check_genericity(conic_spec, 0)
    assert report.passed
    assert crit.A == frozenset({0})
    assert crit.r == 1
    for pt in crit.points:
        assert abs(evaluate(conic_spec.F, pt)) > 1e-6 and abs(evaluate(conic_spec.G, pt)) > 1e-6
    assert len(crit.base_points) == 2


def test_values_are_pencil_ratios(cubic_generic, cubic_spec):
    crit = cubic_generic["crit"]
    for pt, c in zip(crit.points, crit.values):
        assert abs(cubic_spec.f(pt) - c) < 1e-10 * max(1, abs(c))


def test_morse_form_near_critical_points(cubic_generic, cubic_spec):
    crit = cubic_generic["crit"]
    rng = np.random.default_rng(0)
    for pt, c in zip(crit.points, crit.values):
        pt = normalize_projective(pt)
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        v -= np.vdot(pt, v) * pt  # move transversally to the point's line
        g = [cubic_spec.f(pt + t * v) - c for t in (1e-3, 5e-4)]
        # quadratic leading term: halving the step divides by four up to O(t)
        assert abs(g[0] / g[1] - 4) < 0.05


def test_double_precision_repolish_agrees(cubic_spec, cubic_generic):
    crit = cubic_generic["crit"]
    hi = critical_points(cubic_spec, 0, precision="double-double", base_points=list(crit.base_points))
    assert hi.r == crit.r
    for a, b in zip(crit.values, hi.values):
        assert abs(a - b) < 1e-9 * max(1, abs(b))


def test_invariance_under_coordinate_change(cubic_spec, cubic_generic):
    M = sp.Matrix([[1, 1, 0], [0, 1, 2], [1, 0, 1]])
    new = M * sp.Matrix([X, Y, Z])
    sub = {X: new[0], Y: new[1], Z: new[2]}
    F2 = from_sympy(to_sympy(cubic_spec.F).subs(sub, simultaneous=True))
    G2 = from_sympy(to_sympy(cubic_spec.G).subs(sub, simultaneous=True))
    spec2 = PencilSpec(F2, G2, 1, 1, 3)
    _, crit2 = check_genericity(spec2, 5)
    a = np.array(cubic_generic["crit"].values)
    b = np.array(crit2.values)
    assert len(a) == len(b)
    for v in a:
        assert np.min(np.abs(b - v)) < 1e-6 * max(1, abs(v))


@pytest.mark.parametrize("seed", [11, 12, 13, 14, 15])
def test_cubic_pencils_have_twelve_critical_points(seed):
    spec = random_pencil(1, 1, 3, seed)
    report, crit = check_genericity(spec, seed)
    assert report.passed and crit.r == 12 and len(crit.base_points) == 9


def test_degree_validation():
    F = mp({(2, 0, 0): 1})
    G = mp({(1, 0, 0): 1})
    with pytest.raises(SpecError):
        PencilSpec(F, G, 1, 1, 2)
    with pytest.raises(SpecError):
        PencilSpec(mp({(2, 0, 0): 1}), mp({(2, 0, 0): 1}), 2, 2, 1)  # gcd(p, q) != 1


# --- strata ----------------------------------------------------------------------------


def cubic_line_pair():
    # F = x y^2 + y^3, G = (q/p - 3) z + x + 3 y with (p, q) = (1, 3)
    F = mp({(1, 2, 0): 1, (0, 3, 0): 1})
    G = mp({(1, 0, 0): 1, (0, 1, 0): 3})
    return F, G


def test_stratum_center_point():
    F, G = cubic_line_pair()
    assert singularity_stratum(F, G, 1, 3, (0, 1)) == "center"


def test_stratum_origin_is_flagged_both():
    F, G = cubic_line_pair()
    assert singularity_stratum(F, G, 1, 3, (0, 0)) == "both"


def test_stratum_generic_point():
    F, G = cubic_line_pair()
    assert singularity_stratum(F, G, 1, 3, (0.7, -0.3)) == "none"
