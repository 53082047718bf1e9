import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from pencil_monodromy import lattice as L
from pencil_monodromy.errors import RankMismatch
from pencil_monodromy.fiber import (build_fiber, build_topology, express, intersection_matrix, pencil_coefficients,
                                    puncture_class, residue_denominator, ribbon_intersections)
from pencil_monodromy.genericity import PencilSpec
from pencil_monodromy.poly import MultiPoly


@pytest.fixture(scope="module")
def cubic_model(cubic_run):
    return cubic_run["model"]


# --- cubic fiber ----------------------------------------------------------------------


def test_cubic_fiber_counts(cubic_model):
    s = cubic_model.summary()
    assert s["m"] == 3
    assert s["n_branch_points"] == 6
    assert s["genus"] == 1
    assert s["n_punctures"] == 9
    assert s["rank"] == 10


def test_riemann_hurwitz(cubic_model):
    # 2g - 2 = -2m + (number of simple branch points)
    assert 2 * cubic_model.genus - 2 == -2 * cubic_model.m + len(cubic_model.branch_points)


def test_intersection_form_rank_and_block(cubic_model):
    J = cubic_model.J
    assert J.shape == (10, 10)
    assert np.array_equal(J, -J.T)
    assert sp.Matrix(J.tolist()).rank() == 2
    C, N = L.skew_normal_form(J)
    std = np.zeros((10, 10), dtype=np.int64)
    std[0, 1], std[1, 0] = 1, -1
    assert L.equal(N, std)
    assert abs(L.det(C)) == 1


def test_intersection_form_recomputed_from_chains(cubic_model):
    assert np.array_equal(intersection_matrix(cubic_model), cubic_model.J)


def test_branch_sheet_permutations_are_transpositions(cubic_model):
    for perm in cubic_model.sheet_perms:
        moved = [k for k in range(3) if perm[k] != k]
        assert len(moved) == 2 and perm[moved[0]] == moved[1]


def test_puncture_classes_span_radical(cubic_model):
    J = cubic_model.J
    P = np.array([puncture_class(cubic_model, i).coords for i in range(9)])
    assert np.all(P @ J == 0)
    # the loops around all punctures bound the complement of small discs
    assert np.all(P.sum(axis=0) == 0)
    assert sp.Matrix(P.tolist()).rank() == 8


def test_puncture_index_checked(cubic_model):
    with pytest.raises(IndexError):
        puncture_class(cubic_model, 9)


def test_basis_cycles_express_as_unit_vectors(cubic_model):
    for k, cyc in enumerate(cubic_model.basis[:4]):
        coords = express(cubic_model, cyc).coords
        expect = [0] * cubic_model.rank
        expect[k] = 1
        assert list(coords) == expect


def test_period_matrix_has_full_real_rank(cubic_model):
    Pi = cubic_model.period_matrix
    A = np.vstack([Pi.real, Pi.imag])
    assert np.linalg.matrix_rank(A, tol=1e-8 * np.abs(A).max()) == cubic_model.rank


def test_fiber_is_deterministic(cubic_spec, cubic_generic, cubic_model):
    again = build_fiber(cubic_spec, cubic_model.b, seed=0, base_points=list(cubic_generic["crit"].base_points))
    assert np.array_equal(again.J, cubic_model.J)
    assert again.sheet_perms == cubic_model.sheet_perms


# --- conic case -----------------------------------------------------------------------


def test_conic_fiber(conic_run):
    model = conic_run["model"]
    assert model.genus == 0
    assert model.n_punctures == 2
    assert model.rank == 1
    assert np.all(model.J == 0)


def test_residue_denominator_choice():
    F = MultiPoly.from_dict({(1, 0, 0): 1})
    G = MultiPoly.from_dict({(1, 0, 0): 1})
    assert residue_denominator(PencilSpec(F, G, 1, 1, 1)) == "G"
    G2 = MultiPoly.from_dict({(2, 0, 0): 1})
    assert residue_denominator(PencilSpec(G2, F, 1, 2, 1)) == "G"
    assert residue_denominator(PencilSpec(F, G2, 2, 1, 1)) == "F"
    F3 = MultiPoly.from_dict({(3, 0, 0): 1})
    with pytest.raises(NotImplementedError):
        residue_denominator(PencilSpec(F3, G2, 2, 3, 1))


@given(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False))
def test_pencil_coefficients_normalized(b):
    alpha, beta = pencil_coefficients(b)
    assert abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) < 1e-12
    assert abs(beta - b * alpha) < 1e-12 * max(1, abs(b))


# --- combinatorial topology -------------------------------------------------------------


def test_two_sheeted_torus_topology():
    # y^2 = quartic: four simple branch points, no punctures
    swap = (1, 0)
    top = build_topology(2, (swap,) * 4, ("b",) * 4, (-1,) * 4, (-1,) * 4)
    assert top.genus == 1 and top.rank == 2 and top.n_punctures == 0
    assert abs(int(top.J[0, 1])) == 1


def test_two_sheeted_genus_two_topology():
    swap = (1, 0)
    top = build_topology(2, (swap,) * 6, ("b",) * 6, (-1,) * 6, (-1,) * 6)
    assert top.genus == 2 and top.rank == 4
    assert sp.Matrix(top.J.tolist()).det() == 1


def test_punctured_sphere_topology():
    ident = (0,)
    top = build_topology(1, (ident,) * 3, ("p",) * 3, (0, 0, 0), (0, 1, 2))
    assert top.genus == 0 and top.rank == 2 and top.n_punctures == 3


def test_topology_rejects_nontrivial_product():
    with pytest.raises(RankMismatch):
        build_topology(2, ((1, 0),) * 3, ("b",) * 3, (-1,) * 3, (-1,) * 3)


@given(st.integers(0, 10_000))
@settings(max_examples=20, deadline=None)
def test_ribbon_intersections_antisymmetric(seed):
    swap = (1, 0)
    top = build_topology(2, (swap,) * 6, ("b",) * 6, (-1,) * 6, (-1,) * 6)
    rng = np.random.default_rng(seed)
    coeffs = rng.integers(-3, 4, size=(top.rank, 3))
    chains = top.basis_chains @ coeffs
    I = ribbon_intersections(chains, top.perms, 2)
    assert np.array_equal(I, -I.T)
    assert np.array_equal(I, coeffs.T @ top.J @ coeffs)
