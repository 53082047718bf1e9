import numpy as np
import pytest
import sympy as sp
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from pencil_monodromy import lattice as L
from pencil_monodromy.theorems import (FAIL, INCONCLUSIVE, PASS, check_representation, content_hash,
                                       intersection_graph, intersection_graph_connected, replay_word, span_rank,
                                       verify_all, verify_generation, verify_generation_with_zero_orbit,
                                       verify_orbit_single, verify_payload, verify_transitivity,
                                       verify_zero_monodromy_order, zero_orbit_vectors)

J2 = np.array([[0, 1], [-1, 0]])
J4 = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])


def transvection(delta, J):
    d = np.array(delta, dtype=np.int64).reshape(-1, 1)
    return np.eye(len(delta), dtype=np.int64) - d @ (np.asarray(J) @ d).T


def chain_system(g):
    """Classes a_k, b_k and b_k - b_{k+1} of a genus-g lattice; each meets the next."""
    n = 2 * g
    J = np.zeros((n, n), dtype=np.int64)
    for k in range(0, n, 2):
        J[k, k + 1], J[k + 1, k] = 1, -1
    deltas = []
    for k in range(g):
        deltas.append([int(i == 2 * k) for i in range(n)])
        deltas.append([int(i == 2 * k + 1) for i in range(n)])
        if k + 1 < g:
            # b_k - b_{k+1} meets b_k's partner a_k and a_{k+1}
            deltas.append([int(i == 2 * k + 1) - int(i == 2 * k + 3) for i in range(n)])
    return J, deltas


def labelled(deltas, J):
    return [(f"c{i}", transvection(d, J)) for i, d in enumerate(deltas)]


# --- generation -------------------------------------------------------------------------


def test_span_rank_matches_sympy():
    vs = [[1, 2, 3], [2, 4, 6], [0, 1, 1]]
    assert span_rank(vs) == sp.Matrix(vs).rank() == 2
    assert span_rank([]) == 0


def test_generation_pass_and_fail():
    assert verify_generation([[1, 0], [0, 1]], 2).status == PASS
    res = verify_generation([[1, 0], [2, 0]], 2)
    assert res.status == FAIL and res.found == 1


def test_zero_orbit_extends_span():
    M0 = np.array([[0, -1], [1, 0]])  # order four
    assert zero_orbit_vectors([[1, 0]], M0, 2) == [[1, 0], [0, 1]]
    assert verify_generation_with_zero_orbit([[1, 0]], M0, 2, 2).status == PASS
    assert verify_generation_with_zero_orbit([[1, 0]], None, 1, 2).status == FAIL


# --- orbits -----------------------------------------------------------------------------


@pytest.mark.parametrize("g", [1, 2, 3])
def test_chain_orbit_saturates(g):
    J, deltas = chain_system(g)
    res = verify_orbit_single(labelled(deltas, J), deltas[0], 2 * g)
    assert res.status == PASS and res.found == 2 * g
    trace = res.stats["trace"]
    assert trace == sorted(trace) and trace[-1] == 2 * g


def test_orbit_stuck_in_sublattice():
    gens = labelled([[1, 0, 0, 0], [0, 1, 0, 0]], J4)
    res = verify_orbit_single(gens, [1, 0, 0, 0], 4)
    assert res.status == FAIL and res.found == 2


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_orbit_trace_non_decreasing(seed):
    rng = np.random.default_rng(seed)
    deltas = [list(rng.integers(-2, 3, size=4)) for _ in range(3)]
    assume(all(any(d) for d in deltas))
    res = verify_orbit_single(labelled(deltas, J4), deltas[0], 4, max_steps=2000)
    trace = res.stats["trace"]
    assert all(a <= b for a, b in zip(trace, trace[1:]))
    assert res.found == trace[-1] <= 4


@pytest.mark.parametrize("g", [1, 2])
def test_chain_transitivity_with_replayable_words(g):
    J, deltas = chain_system(g)
    gens = labelled(deltas, J)
    res = verify_transitivity(gens, deltas)
    assert res.status == PASS
    for idx, word in res.found.items():
        image = replay_word(gens, word, deltas[0])
        target = deltas[int(idx)]
        assert image == target or image == [-x for x in target]


def test_transitivity_fails_on_disjoint_classes():
    deltas = [[1, 0, 0, 0], [0, 0, 1, 0]]
    res = verify_transitivity(labelled(deltas, J4), deltas)
    assert res.status == FAIL and res.detail == "orbit exhausted"


def test_transitivity_inconclusive_under_tiny_budget():
    J, deltas = chain_system(3)
    res = verify_transitivity(labelled(deltas, J), deltas, max_states=3)
    assert res.status == INCONCLUSIVE


def test_replay_inverse_letters():
    gens = labelled([[1, 0]], J2)
    v = replay_word(gens, ["c0", "c0^-1"], [0, 1])
    assert v == [0, 1]


# --- intersection graph -----------------------------------------------------------------


def test_intersection_graph_matrix():
    G = intersection_graph([[1, 0], [0, 1]], J2)
    assert [[int(x) for x in row] for row in G] == [[0, 1], [-1, 0]]


def test_intersection_graph_connectivity():
    J, deltas = chain_system(3)
    assert intersection_graph_connected(deltas, J).status == PASS
    assert intersection_graph_connected([[1, 0, 0, 0], [0, 0, 1, 0]], J4).status == FAIL
    assert intersection_graph_connected([[1, 0]], J2).status == PASS


# --- exceptional fiber and representation -------------------------------------------------


def test_zero_monodromy_order():
    minus = -np.eye(2, dtype=np.int64)
    assert verify_zero_monodromy_order(minus, 2).status == PASS
    assert verify_zero_monodromy_order(minus, 3).status == FAIL
    assert verify_zero_monodromy_order(None, 1).status == PASS


def test_representation_accepts_consistent_data():
    # a, b, a, b, a, b: the (ab)^6 = 1 relation of the torus
    a, b = [1, 0], [0, 1]
    Ta, Tb = transvection(a, J2), transvection(b, J2)
    assert np.array_equal(np.linalg.matrix_power(Ta @ Tb, 6), np.eye(2, dtype=np.int64))
    labs = [(f"c{i}", Ta if i % 2 == 0 else Tb) for i in range(12)]
    deltas = {f"c{i}": (a if i % 2 == 0 else b) for i in range(12)}
    assert check_representation(labs, J2, deltas).status == PASS


def test_representation_flags_each_defect():
    a = [1, 0]
    Ta = transvection(a, J2)
    bad_det = [("c0", np.array([[2, 0], [0, 1]]))]
    assert "determinant" in check_representation(bad_det, J2, {}).detail
    wrong_sign = [("c0", transvection([-x for x in a], J2).T)]
    assert check_representation(wrong_sign, J2, {"c0": a}).status == FAIL
    not_closed = [("c0", Ta)]
    res = check_representation(not_closed, J2, {"c0": a})
    assert res.status == FAIL and "ordered product" in res.detail


def test_content_hash_is_stable():
    assert content_hash([[1, 2], [3, 4]]) == content_hash(np.array([[1, 2], [3, 4]]))
    assert content_hash([[1, 2]]) != content_hash([[2, 1]])


def test_verify_payload_rejects_unknown_check():
    with pytest.raises(ValueError):
        verify_payload({"J": [], "dim": 0, "generators": [], "vanishing_cycles": [], "order": []}, 1, ["nope"])


# --- end-to-end on the computed pencils ---------------------------------------------------


def test_cubic_verification(cubic_run):
    rep = cubic_run["rep"]
    report = verify_all(rep, 1)
    assert report.passed, report.to_json()
    assert report["generation"].found == 10
    assert report["orbit_single"].stats["trace"][-1] == 10
    words = report["transitivity"].found
    assert sorted(int(k) for k in words) == list(range(12))
    labs = rep.all_matrices()
    for k, word in words.items():
        image = replay_word(labs, word, rep.vanishing[0].coords)
        target = list(rep.vanishing[int(k)].coords)
        assert image == target or image == [-x for x in target]
    G = intersection_graph([v.coords for v in rep.vanishing], rep.J)
    assert np.array_equal(np.asarray(G), -np.asarray(G).T)


def test_conic_verification(conic_run):
    report = verify_all(conic_run["rep"], 2)
    assert report.passed, report.to_json()
    assert report["generation_with_zero_orbit"].found == 1
    assert report["zero_monodromy_order"].status == PASS
