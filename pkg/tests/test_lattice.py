import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from pencil_monodromy import lattice as L

small = st.integers(-6, 6)


def int_matrices(min_dim=1, max_dim=5, square=False):
    @st.composite
    def build(draw):
        r = draw(st.integers(min_dim, max_dim))
        c = r if square else draw(st.integers(min_dim, max_dim))
        return [[draw(small) for _ in range(c)] for _ in range(r)]

    return build()


def unimodular(draw_seed: int, n: int) -> np.ndarray:
    """Product of random elementary integer matrices."""
    rng = np.random.default_rng(draw_seed)
    U = L.identity(n)
    for _ in range(3 * n if n > 1 else 0):
        i, j = rng.choice(n, 2, replace=False)
        E = L.identity(n)
        E[i, j] = int(rng.integers(-2, 3))
        U = L.matmul(E, U)
    return U


@given(int_matrices(square=True))
def test_det_matches_sympy(a):
    assert L.det(a) == sp.Matrix(a).det()


@given(int_matrices())
def test_rank_matches_sympy(a):
    assert L.rank_q(a) == sp.Matrix(a).rank()


@given(int_matrices())
@settings(max_examples=60)
def test_smith_normal_form_factorization(a):
    U, D, V = L.smith_normal_form(a)
    A = L.as_int_matrix(a)
    assert L.equal(L.matmul(L.matmul(U, A), V), D)
    assert abs(L.det(U)) == 1 and abs(L.det(V)) == 1
    diag = [int(D[i, i]) for i in range(min(D.shape))]
    off = D.copy()
    for i in range(min(D.shape)):
        off[i, i] = 0
    assert L.is_zero(off)
    assert all(x >= 0 for x in diag)
    nz = [x for x in diag if x]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert len(nz) == L.rank_q(a)


def test_smith_normal_form_invariants_match_sympy():
    a = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    _, D, _ = L.smith_normal_form(a)
    from sympy.matrices.normalforms import smith_normal_form

    expect = smith_normal_form(sp.Matrix(a), domain=sp.ZZ)
    assert [abs(int(D[i, i])) for i in range(3)] == [abs(int(expect[i, i])) for i in range(3)]


@given(st.integers(0, 10_000), st.integers(1, 6))
def test_inverse_unimodular(seed, n):
    U = unimodular(seed, n)
    assert L.equal(L.matmul(U, L.inverse_unimodular(U)), L.identity(n))


def test_inverse_rejects_non_unimodular():
    with pytest.raises(ValueError):
        L.inverse_unimodular([[2, 0], [0, 1]])


@given(int_matrices(), st.lists(small, min_size=5, max_size=5))
def test_solve_integer(a, x):
    A = L.as_int_matrix(a)
    x = x[: A.shape[1]]
    b = L.matmul(A, L.as_int_matrix([[v] for v in x])).flatten()
    sol = L.solve_integer(A, b)
    assert sol is not None
    assert list(L.matmul(A, L.as_int_matrix([[v] for v in sol])).flatten()) == list(b)


def test_solve_integer_detects_no_solution():
    assert L.solve_integer([[2]], [1]) is None


def test_rowspace_incremental_rank():
    rs = L.RowSpace(3)
    assert rs.add([1, 2, 3])
    assert not rs.add([2, 4, 6])
    assert rs.add([0, 1, 0])
    assert not rs.add([1, 3, 3])
    assert rs.rank == 2


@given(st.lists(small, min_size=1, max_size=6))
def test_primitive_and_sign(v):
    p = L.primitive(v)
    if any(v):
        from math import gcd
        g = 0
        for x in p:
            g = gcd(g, x)
        assert g == 1
        s = L.sign_normalize(p)
        assert next(x for x in s if x) > 0
    else:
        assert p == list(v)


def test_complete_to_basis():
    cols = [[1], [2], [3]]
    B = L.complete_to_basis(cols)
    assert abs(L.det(B)) == 1
    assert [int(x) for x in B[:, -1]] == [1, 2, 3]


@given(st.integers(0, 10_000), st.sampled_from([2, 4, 6]), st.integers(0, 2))
def test_skew_normal_form_recovers_standard_blocks(seed, two_g, kernel):
    n = two_g + kernel
    std = L.zeros(n, n)
    for k in range(0, two_g, 2):
        std[k, k + 1], std[k + 1, k] = 1, -1
    U = unimodular(seed, n)
    J = L.matmul(L.matmul(U.T, std), U)
    C, N = L.skew_normal_form(J)
    assert abs(L.det(C)) == 1
    assert L.equal(L.matmul(L.matmul(C.T, J), C), N)
    assert L.equal(N, std)


def test_image_generator():
    # M - I for a transvection along (1, 2)
    D = [[2, -1], [4, -2]]
    assert L.image_generator(D) == [1, 2]
    assert L.image_generator([[0, 0], [0, 0]]) is None
    with pytest.raises(ValueError):
        L.image_generator([[1, 0], [0, 1]])


def test_image_generator_content():
    # column lattice generated by 2*(1, 1)
    assert L.image_generator([[2, 4], [2, 4]]) == [2, 2]
