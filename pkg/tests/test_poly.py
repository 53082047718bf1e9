import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from pencil_monodromy.errors import SpecError
from pencil_monodromy.genericity import PencilSpec, random_poly_records
from pencil_monodromy.numsolve import uni_roots
from pencil_monodromy.poly import (BiPoly, ChartMap, MultiPoly, UniPoly, discriminant_y, evaluate,
                                   fiber_polynomial, monomials, partial, resultant_y)
from oracles import X, Y, Z, to_sympy

x_, y_ = sp.symbols("x_ y_")


def mp(terms: dict) -> MultiPoly:
    return MultiPoly.from_dict(terms)


def random_multi(degree: int, seed: int) -> MultiPoly:
    return MultiPoly.from_records(random_poly_records(degree, np.random.default_rng(seed)))


def bi_from_sympy(expr) -> BiPoly:
    poly = sp.Poly(sp.expand(expr), x_, y_)
    dx, dy = poly.degree(x_), poly.degree(y_)
    c = np.zeros((max(dx, 0) + 1, max(dy, 0) + 1), dtype=complex)
    for (i, j), v in poly.terms():
        c[i, j] = complex(v)
    return BiPoly(c)


# --- evaluate / partial --------------------------------------------------------


def test_evaluate_sum_of_squares():
    P = mp({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1})
    assert evaluate(P, (1, 2, 3)) == 14


def test_evaluate_at_origin_is_zero():
    assert evaluate(random_multi(3, 0), (0, 0, 0)) == 0


def test_evaluate_dehomogenized_example():
    # x y^2 + y^3 at (0, 1, 1)
    P = mp({(1, 2, 0): 1, (0, 3, 0): 1})
    assert evaluate(P, (0, 1, 1)) == 1


def test_partial_examples():
    P = mp({(2, 1, 0): 1})
    assert partial(P, 0).terms == {(1, 1, 0): 2}
    Q = mp({(2, 0, 0): 1, (0, 2, 0): 1})
    assert partial(Q, 2).is_zero()


@given(st.integers(1, 5), st.integers(0, 10_000))
@settings(max_examples=30)
def test_euler_relation(degree, seed):
    P = random_multi(degree, seed)
    rng = np.random.default_rng(seed + 1)
    for pt in rng.standard_normal((20, 3)) + 1j * rng.standard_normal((20, 3)):
        lhs = sum(pt[v] * evaluate(partial(P, v), pt) for v in range(3))
        scale = P.scale() * np.linalg.norm(pt) ** degree
        assert abs(lhs - degree * evaluate(P, pt)) < 1e-10 * scale


@given(st.integers(1, 5), st.integers(0, 10_000))
@settings(max_examples=30)
def test_homogeneity(degree, seed):
    P = random_multi(degree, seed)
    rng = np.random.default_rng(seed)
    pt = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    lam = complex(rng.standard_normal(), rng.standard_normal())
    a, b = evaluate(P, lam * pt), lam**degree * evaluate(P, pt)
    assert abs(a - b) <= 1e-10 * max(abs(a), abs(b), P.scale())


@given(st.integers(0, 1000))
@settings(max_examples=15)
def test_arithmetic_matches_sympy(seed):
    A, B = random_multi(2, seed), random_multi(2, seed + 1)
    sA, sB = to_sympy(A), to_sympy(B)
    for ours, theirs in ((A * B, sA * sB), (A + B, sA + sB), (A - B, sA - sB), (A**2, sA**2)):
        rng = np.random.default_rng(seed)
        pt = rng.standard_normal(3)
        expect = complex(sp.expand(theirs).subs({X: pt[0], Y: pt[1], Z: pt[2]}))
        assert abs(evaluate(ours, pt) - expect) < 1e-9 * max(1, abs(expect))


def test_records_round_trip_exact():
    recs = [{"exps": [1, 0, 0], "re": "1/3", "im": "-2"}, {"exps": [0, 0, 1], "re": "0.25", "im": "0"}]
    P = MultiPoly.from_records(recs)
    Q = MultiPoly.from_records(P.to_records())
    assert P.canonical() == Q.canonical()
    assert P.terms[(1, 0, 0)] == complex(1 / 3, -2)


def test_records_reject_mixed_degree():
    with pytest.raises(SpecError):
        MultiPoly.from_records([{"exps": [1, 0, 0], "re": 1}, {"exps": [2, 0, 0], "re": 1}])


def test_monomial_count():
    assert len(monomials(3)) == 10
    assert all(sum(e) == 3 for e in monomials(3))


# --- fiber polynomial / charts -------------------------------------------------


def test_fiber_polynomial_conic_example():
    F = mp({(1, 0, 0): 1, (0, 0, 1): 1})
    G = mp({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1})
    spec = PencilSpec(F, G, 2, 1, 1)
    P = fiber_polynomial(spec, 1.0, ChartMap.standard(2))
    expect = bi_from_sympy((x_ + 1) ** 2 - (x_**2 + y_**2 + 1))
    pts = np.array([0.3 + 0.1j, -1.2 + 0.5j, 2.0])
    # the fiber polynomial is normalized by |(1, b)|: compare up to that factor
    ratio = P(pts, pts[::-1]) / expect(pts, pts[::-1])
    assert np.allclose(ratio, ratio[0])
    assert P.total_degree == 2


def test_fiber_polynomial_cubic_degree(cubic_spec):
    rng = np.random.default_rng(3)
    chart = ChartMap.random(rng)
    P = fiber_polynomial(cubic_spec, 2.0, chart)
    assert P.total_degree == 3 and P.degree_y == 3


def test_random_chart_restores_y_degree():
    # x^2 z - y z^2 has no y^2 term in the standard chart
    F = mp({(2, 0, 1): 1, (0, 1, 2): -1})
    std = ChartMap.standard(2).dehomogenize(F)
    rotated = ChartMap.random(np.random.default_rng(0)).dehomogenize(F)
    assert std.degree_y < 3
    assert rotated.degree_y == 3


def test_chart_round_trip():
    chart = ChartMap.random(np.random.default_rng(5))
    pt = np.array([1 + 2j, -0.5, 0.3j])
    x, y = chart.to_chart(pt)
    back = chart.from_chart(x, y)
    assert abs(np.vdot(back, pt)) / (np.linalg.norm(back) * np.linalg.norm(pt)) == pytest.approx(1, abs=1e-12)


# --- resultants -----------------------------------------------------------------


def test_resultant_simple_examples():
    A = bi_from_sympy(y_**2 - x_)
    B = bi_from_sympy(y_ - 1)
    r = resultant_y(A, B)
    xs = np.array([0.0, 1.0, 2.5 + 1j])
    assert np.allclose(r(xs), 1 - xs)
    a, b = 2.0 + 1j, -0.5
    r2 = resultant_y(bi_from_sympy(y_ - a), bi_from_sympy(y_ - b))
    assert np.allclose(r2(xs), a - b)


def test_discriminant_examples():
    d = discriminant_y(bi_from_sympy(y_**2 - x_))
    xs = np.array([0.5, 2.0 + 1j])
    assert np.allclose(d(xs), 4 * xs)
    b, c = 1.5, 2.0 - 1j
    d2 = discriminant_y(bi_from_sympy(y_**2 + b * x_ * y_ + c))
    assert np.allclose(d2(xs), b**2 * xs**2 - 4 * c)


@given(st.integers(0, 500))
@settings(max_examples=10, deadline=None)
def test_resultant_matches_root_product(seed):
    rng = np.random.default_rng(seed)
    A = BiPoly(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    B = BiPoly(rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4)))
    r = resultant_y(A, B)
    for x0 in rng.standard_normal(5) + 1j * rng.standard_normal(5):
        a, b = A.y_coeffs(np.array(x0)), B.y_coeffs(np.array(x0))
        ra = np.roots(a[::-1])
        # Res(A, B) = lc(A)^deg(B) * prod B(alpha_i)
        expect = a[-1] ** (len(b) - 1) * np.prod([np.polyval(b[::-1], z) for z in ra])
        assert abs(r(x0) - expect) < 1e-10 * max(1.0, abs(expect))


@given(st.integers(0, 500))
@settings(max_examples=10, deadline=None)
def test_resultant_antisymmetry(seed):
    rng = np.random.default_rng(seed)
    A = BiPoly(rng.standard_normal((2, 3)) + 0j)
    B = BiPoly(rng.standard_normal((3, 4)) + 0j)
    sign = (-1) ** (A.degree_y * B.degree_y)
    xs = rng.standard_normal(4)
    assert np.allclose(resultant_y(A, B)(xs), sign * resultant_y(B, A)(xs), rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_discriminant_vanishes_at_double_roots(seed, cubic_spec):
    chart = ChartMap.random(np.random.default_rng(seed))
    b = complex(*np.random.default_rng(100 + seed).standard_normal(2))
    P = fiber_polynomial(cubic_spec, b, chart)
    disc = discriminant_y(P)
    branch = uni_roots(disc).array()
    assert len(branch) == 6
    x0 = branch[0]
    ys = np.sort_complex(np.roots(P.y_coeffs(np.array(x0))[::-1]))
    gaps = np.abs(ys[:, None] - ys[None, :]) + np.eye(len(ys)) * 1e9
    assert gaps.min() < 1e-5 * max(1.0, np.abs(ys).max())
    # away from branch points every fiber root is simple
    x1 = x0 + 0.5
    ys1 = np.roots(P.y_coeffs(np.array(x1))[::-1])
    g1 = np.abs(ys1[:, None] - ys1[None, :]) + np.eye(len(ys1)) * 1e9
    assert g1.min() > 1e-4


def test_unipoly_basics():
    p = UniPoly(np.array([1, 0, 2], dtype=complex))
    assert p.degree == 2
    assert p(2.0) == 9
    assert np.allclose(p.deriv().coeffs, [0, 4])
    assert UniPoly(np.array([1, 2, 1e-20])).trimmed(1e-13).degree == 1
