"""Exact checks of generation, orbit and connectivity statements on a monodromy representation.

All ranks are computed over the rationals with fraction-free elimination.
Orbit searches are semi-decision procedures: running out of budget yields
``inconclusive``, never ``fail``.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import lattice as L

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
DEFAULT_MAX_STATES = 100_000
DEFAULT_MAX_WORD = 16


def content_hash(obj) -> str:
    """sha256 of a canonical JSON rendering (integer arrays become nested lists)."""

    def norm(x):
        if isinstance(x, np.ndarray):
            return [norm(v) for v in x.tolist()]
        if isinstance(x, (list, tuple)):
            return [norm(v) for v in x]
        if isinstance(x, dict):
            return {str(k): norm(v) for k, v in x.items()}
        if isinstance(x, (np.integer,)):
            return int(x)
        if isinstance(x, complex):
            return [x.real, x.imag]
        return x

    text = json.dumps(norm(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class CheckResult:
    """Outcome of one check: status, found vs expected, statistics and input hashes."""

    name: str
    status: str
    found: object = None
    expected: object = None
    stats: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "found": self.found, "expected": self.expected,
                "stats": self.stats, "inputs": self.inputs, "detail": self.detail}


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)

    def add(self, res: CheckResult) -> CheckResult:
        self.checks.append(res)
        return res

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def status(self) -> str:
        if self.passed:
            return PASS
        if any(c.status == FAIL for c in self.checks):
            return FAIL
        return INCONCLUSIVE

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {"status": self.status, "checks": [c.to_json() for c in self.checks]}


def _vecs(deltas) -> list[list[int]]:
    return [[int(x) for x in np.asarray(d).ravel()] for d in deltas]


def span_rank(vectors) -> int:
    """Exact rank over Q of a list of integer vectors."""
    vs = _vecs(vectors)
    if not vs:
        return 0
    return L.rank_q(L.as_int_matrix(vs))


def verify_generation(deltas, expected_rank: int) -> CheckResult:
    """Pass iff the vanishing classes span a space of the full homology rank."""
    rank = span_rank(deltas)
    return CheckResult("generation", PASS if rank == expected_rank else FAIL, rank, expected_rank,
                       inputs={"deltas": content_hash(_vecs(deltas))})


def zero_orbit_vectors(deltas, M0, p: int) -> list[list[int]]:
    """``M0^k delta`` for ``0 <= k < p`` and every ``delta``."""
    out = []
    M = L.as_int_matrix(M0) if M0 is not None else None
    for d in _vecs(deltas):
        v = L.as_int_matrix([[x] for x in d])
        for _ in range(p):
            out.append([int(x) for x in v.ravel()])
            if M is None:
                break
            v = L.matmul(M, v)
    return out


def verify_generation_with_zero_orbit(deltas, M0, p: int, expected_rank: int) -> CheckResult:
    """Pass iff the vanishing classes and their images under powers of ``M0`` reach full rank."""
    if p == 1 or M0 is None:
        res = verify_generation(deltas, expected_rank)
        res.name = "generation_with_zero_orbit"
        return res
    vecs = zero_orbit_vectors(deltas, M0, p)
    rank = span_rank(vecs)
    return CheckResult("generation_with_zero_orbit", PASS if rank == expected_rank else FAIL, rank, expected_rank,
                       stats={"vectors": len(vecs)},
                       inputs={"deltas": content_hash(_vecs(deltas)), "M0": content_hash(L.as_int_matrix(M0))})


def _with_inverses(generators) -> list[tuple[str, np.ndarray]]:
    """Pairs ``(label, matrix)`` for every generator and its inverse (label suffixed by '^-1')."""
    out = []
    for lab, M in generators:
        M = L.as_int_matrix(M)
        out.append((lab, M))
        out.append((lab + "^-1", L.inverse_unimodular(M)))
    return out


def verify_orbit_single(generators, delta, expected_rank: int, max_steps: int = DEFAULT_MAX_STATES) -> CheckResult:
    """Saturate the span of ``delta`` under the generators and inverses; pass iff full rank.

    Returns the non-decreasing rank trace in ``stats['trace']``.
    """
    d = _vecs([delta])[0]
    n = len(d)
    space = L.RowSpace(n)
    trace = []
    queue = deque()
    if any(d):
        space.add(d)
        queue.append(d)
    trace.append(space.rank)
    gens = _with_inverses(generators)
    steps = 0
    while queue:
        v = L.as_int_matrix([[x] for x in queue.popleft()])
        for _, M in gens:
            steps += 1
            if steps > max_steps:
                return CheckResult("orbit_single", INCONCLUSIVE, space.rank, expected_rank,
                                   stats={"trace": trace, "steps": steps})
            w = [int(x) for x in L.matmul(M, v).ravel()]
            if space.add(w):
                queue.append(w)
                trace.append(space.rank)
    return CheckResult("orbit_single", PASS if space.rank == expected_rank else FAIL, space.rank, expected_rank,
                       stats={"trace": trace, "steps": steps},
                       inputs={"delta": content_hash(d), "generators": content_hash([g for _, g in generators])})


def replay_word(generators, word, delta) -> list[int]:
    """Apply the matrices named in ``word`` (first letter first) to ``delta``."""
    table = dict(_with_inverses(generators))
    v = L.as_int_matrix([[x] for x in _vecs([delta])[0]])
    for lab in word:
        v = L.matmul(table[lab], v)
    return [int(x) for x in v.ravel()]


def verify_transitivity(generators, deltas, max_states: int = DEFAULT_MAX_STATES,
                        max_word: int = DEFAULT_MAX_WORD) -> CheckResult:
    """Breadth-first search of the orbit of the first class, up to sign.

    Pass iff every class in ``deltas`` is reached; ``found`` maps each class
    index to a witness word (list of generator labels, first applied first).
    """
    ds = [tuple(L.sign_normalize(v)) for v in _vecs(deltas)]
    inputs = {"deltas": content_hash([list(d) for d in ds]), "generators": content_hash([g for _, g in generators])}
    if not ds:
        return CheckResult("transitivity", PASS, {}, {}, inputs=inputs)
    wanted = {d: [i for i, e in enumerate(ds) if e == d] for d in set(ds)}
    witness = {}
    gens = _with_inverses(generators)
    start = ds[0]
    seen = {start: ()}
    frontier = [start]
    for i in wanted[start]:
        witness[i] = []
    depth = 0
    exhausted = False
    while frontier and len(witness) < len(ds) and depth < max_word:
        depth += 1
        nxt = []
        for s in frontier:
            v = L.as_int_matrix([[x] for x in s])
            for lab, M in gens:
                w = tuple(L.sign_normalize([int(x) for x in L.matmul(M, v).ravel()]))
                if w in seen:
                    continue
                seen[w] = seen[s] + (lab,)
                nxt.append(w)
                for i in wanted.get(w, []):
                    witness[i] = list(seen[w])
                if len(witness) == len(ds):
                    break
                if len(seen) >= max_states:
                    exhausted = True
                    break
            if exhausted or len(witness) == len(ds):
                break
        if exhausted or len(witness) == len(ds):
            break
        frontier = nxt
    stats = {"states": len(seen), "depth": depth}
    if len(witness) == len(ds):
        return CheckResult("transitivity", PASS, {str(k): v for k, v in sorted(witness.items())}, len(ds),
                           stats=stats, inputs=inputs)
    if not frontier:
        # orbit closed without reaching every class: a genuine negative
        return CheckResult("transitivity", FAIL, {str(k): v for k, v in sorted(witness.items())}, len(ds),
                           stats=stats, inputs=inputs, detail="orbit exhausted")
    return CheckResult("transitivity", INCONCLUSIVE, {str(k): v for k, v in sorted(witness.items())}, len(ds),
                       stats=stats, inputs=inputs, detail="budget exhausted")


def intersection_graph(deltas, J) -> np.ndarray:
    """Integer matrix of pairwise intersection numbers of the classes."""
    D = L.as_int_matrix(_vecs(deltas)).T
    return L.matmul(L.matmul(D.T, L.as_int_matrix(J)), D)


def intersection_graph_connected(deltas, J) -> CheckResult:
    """Pass iff the graph joining classes with nonzero intersection is connected."""
    vs = _vecs(deltas)
    r = len(vs)
    inputs = {"deltas": content_hash(vs), "J": content_hash(L.as_int_matrix(J))}
    if r <= 1:
        return CheckResult("intersection_graph", PASS, 1, 1, inputs=inputs)
    G = intersection_graph(vs, J)
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in range(r):
            if j not in seen and G[i, j] != 0:
                seen.add(j)
                stack.append(j)
    comps = 1 if len(seen) == r else 2
    return CheckResult("intersection_graph", PASS if len(seen) == r else FAIL, len(seen), r,
                       stats={"components_ge": comps}, inputs=inputs)


def verify_zero_monodromy_order(M0, p: int) -> CheckResult:
    """Pass iff ``M0**p`` is the identity (vacuous for ``p == 1``)."""
    if p == 1 or M0 is None:
        return CheckResult("zero_monodromy_order", PASS, None, p, detail="vacuous")
    M = L.as_int_matrix(M0)
    P = L.identity(M.shape[0])
    for _ in range(p):
        P = L.matmul(M, P)
    ok = L.equal(P, L.identity(M.shape[0]))
    return CheckResult("zero_monodromy_order", PASS if ok else FAIL, ok, True, inputs={"M0": content_hash(M)})


def check_representation(labelled, J, deltas, sign: int = -1) -> CheckResult:
    """Exact invariants of the loop matrices of nodal critical values and of the whole set.

    ``labelled`` lists ``(label, matrix)`` in counterclockwise loop order;
    ``deltas`` maps labels of critical values to vanishing classes.  Checks:
    integer entries with determinant 1, preservation of ``J``, ordered
    product equal to the identity, and for every critical value a unipotent
    matrix obeying the Picard-Lefschetz formula, with ``rank(M - I) = 1``
    (or 0 when the vanishing class lies in the kernel of ``J``).
    """
    from .monodromy import pl_check

    Jm = L.as_int_matrix(J)
    n = Jm.shape[0]
    problems = []
    P = L.identity(n)
    for lab, M in labelled:
        try:
            M = L.as_int_matrix(M)
        except (TypeError, ValueError):
            problems.append(f"{lab}: non-integer entries")
            continue
        if M.shape != (n, n):
            problems.append(f"{lab}: wrong shape")
            continue
        if L.det(M) != 1:
            problems.append(f"{lab}: determinant {L.det(M)}")
        if not L.equal(L.matmul(L.matmul(M.T, Jm), M), Jm):
            problems.append(f"{lab}: intersection form not preserved")
        if lab in deltas:
            D = M - L.identity(n)
            d = L.as_int_matrix([[int(x)] for x in deltas[lab]])
            want = 0 if L.is_zero(L.matmul(Jm, d)) else 1
            if L.rank_q(D) != want:
                problems.append(f"{lab}: rank(M - I) = {L.rank_q(D)}, expected {want}")
            if not L.is_zero(L.matmul(D, D)):
                problems.append(f"{lab}: not unipotent")
            if not pl_check(M, deltas[lab], Jm, sign).passed:
                problems.append(f"{lab}: Picard-Lefschetz formula fails")
        P = L.matmul(M, P)
    if not problems and not L.equal(P, L.identity(n)):
        problems.append("ordered product is not the identity")
    return CheckResult("representation", FAIL if problems else PASS, len(problems), 0,
                       inputs={"matrices": content_hash([M for _, M in labelled]), "J": content_hash(Jm)},
                       detail="; ".join(problems))


CHECK_NAMES = ("representation", "generation", "generation_with_zero_orbit", "orbit_single",
               "transitivity", "intersection_graph", "zero_monodromy_order")


def verify_payload(payload: dict, p: int, checks=None, max_states: int = DEFAULT_MAX_STATES,
                   max_word: int = DEFAULT_MAX_WORD) -> VerificationReport:
    """Run the selected checks on a serialized monodromy representation.

    ``payload`` carries ``J``, ``generators``, ``M0``, ``Minf``, ``order``,
    ``vanishing_cycles``, ``genus`` and ``dim``.  Checks whose exact
    applicability conditions fail (e.g. the orbit check at genus zero) are
    skipped.
    """
    checks = CHECK_NAMES if checks is None else tuple(checks)
    unknown = set(checks) - set(CHECK_NAMES)
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}")
    J = payload["J"]
    expected = int(payload["dim"])
    gens = payload["generators"]
    deltas = [list(v) for v in payload["vanishing_cycles"]]

    def mat(lab):
        if lab == "0":
            return payload["M0"]
        if lab == "inf":
            return payload["Minf"]
        return gens[int(lab[1:])]

    labelled = [(lab, mat(lab)) for lab in payload["order"]]
    M0 = payload.get("M0")
    report = VerificationReport()
    for name in CHECK_NAMES:
        if name not in checks:
            continue
        if name == "representation":
            report.add(check_representation(labelled, J, {f"c{i}": d for i, d in enumerate(deltas)}))
        elif name == "generation":
            report.add(verify_generation(deltas, expected))
        elif name == "generation_with_zero_orbit":
            report.add(verify_generation_with_zero_orbit(deltas, M0, p, expected))
        elif name == "orbit_single":
            if int(payload["genus"]) > 0 and deltas:
                report.add(verify_orbit_single(labelled, deltas[0], expected, max_states))
        elif name == "transitivity":
            report.add(verify_transitivity(labelled, deltas, max_states, max_word))
        elif name == "intersection_graph":
            report.add(intersection_graph_connected(deltas, J))
        elif name == "zero_monodromy_order":
            report.add(verify_zero_monodromy_order(M0, p))
    return report


def verify_all(rep, p: int, checks=None, max_states: int = DEFAULT_MAX_STATES,
               max_word: int = DEFAULT_MAX_WORD) -> VerificationReport:
    """Run the selected checks on a computed monodromy representation."""
    return verify_payload(rep.to_json(), p, checks, max_states, max_word)
