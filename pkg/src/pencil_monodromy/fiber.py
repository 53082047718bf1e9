"""Riemann-surface model of one regular fiber ``F**p = b G**q``.

The fiber is presented as an ``m``-sheeted branched cover of the x-line
of a random unitary chart.  Over a base point ``x0`` we draw one lasso
(ray, 24-gon, ray back) around every special point: the branch points
and the x-projections of the base points of the pencil.  Lifting the
lassos gives a graph on the ``m`` sheets over ``x0``; together with the
lifted discs it is a cell structure of the punctured fiber ``L_b``, from
which homology, puncture classes and the intersection form follow
exactly.  Period integrals of rational 1-forms identify classes across
different models.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import lattice as L
from .errors import InadmissibleChart, NoConvergence, NonIntegral, NonSimpleBranching, RankMismatch
from .genericity import PencilSpec, check_transversal
from .numsolve import TrackerConfig, newton2, track, uni_roots
from .poly import BiPoly, ChartMap, MultiPoly, discriminant_y, evaluate, monomials, pencil_member

MAX_CHART_ATTEMPTS = 32
LASSO_RADIUS_FRACTION = 0.25
RAY_CLEARANCE = 2.0
POLYGON_SIDES = 24
PANEL_FRACTION = 1 / 3.5
EXPRESS_TOL = 1e-6

# Gauss-Kronrod 7/15 on [-1, 1]
_XK = np.array([0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                0.207784955007898467600689403773245, 0.0])
_WK = np.array([0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
GK_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
GK_WK = np.concatenate([_WK[:-1], _WK[::-1]])
GK_WG = np.zeros(15)
for _i, _w in zip((1, 3, 5, 7), _WG):
    GK_WG[_i] = _w
    GK_WG[14 - _i] = _w


def pencil_coefficients(b: complex) -> tuple[complex, complex]:
    """Normalized ``(alpha, beta)`` proportional to ``(1, b)``."""
    if b == np.inf:
        return 0.0, 1.0
    n = np.sqrt(1 + abs(b) ** 2)
    return 1 / n, b / n


def residue_denominator(spec: PencilSpec) -> str:
    """Which of F, G carries the simple poles of the period forms."""
    if spec.p == 1:
        return "G"
    if spec.q == 1:
        return "F"
    raise NotImplementedError("fibers are singular at the base points when p > 1 and q > 1")


# ---------------------------------------------------------------------------
# raw sheet data in one chart


class SheetData:
    """Fiber polynomial in a chart plus the period-form integrand."""

    def __init__(self, spec: PencilSpec, b: complex, chart: ChartMap, coeffs=None):
        self.spec, self.b, self.chart = spec, b, chart
        self.alpha, self.beta = coeffs if coeffs is not None else pencil_coefficients(b)
        self.m = spec.fiber_degree
        Fc = chart.dehomogenize(spec.F)
        Gc = chart.dehomogenize(spec.G)
        self.P = pencil_member(Fc, Gc, spec.p, spec.q, self.alpha, self.beta)
        if self.P.degree_y < self.m or abs(self.P.c[0, self.m]) < 1e-4 * self.P.scale():
            raise InadmissibleChart("leading y coefficient too small")
        self.Py = self.P.dy()
        self.Px = self.P.dx()
        self.Q = spec.G if residue_denominator(spec) == "G" else spec.F
        self.form_exps = monomials(self.Q.degree + self.m - 3)
        self.det = chart.det

    @property
    def n_forms(self) -> int:
        return len(self.form_exps)

    def roots(self, x: complex) -> np.ndarray:
        rs = uni_roots(self.P.at_x(x))
        if not rs.simple() or len(rs.roots) != self.m:
            raise NoConvergence(f"roots not simple at x = {x}")
        return np.array(rs.roots, dtype=complex)

    def slope(self, x, y):
        """dy/dx along the curve."""
        return -self.Px(x, y) / self.Py(x, y)

    def forms(self, x, y) -> np.ndarray:
        """Integrand values, shape ``y.shape + (n_forms,)`` (coefficient of dx)."""
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        x, y = np.broadcast_arrays(x, y)
        A = self.chart.matrix
        X = [A[r, 0] * x + A[r, 1] * y + A[r, 2] for r in range(3)]
        pts = np.stack(X, axis=-1)
        denom = evaluate(self.Q, pts) * self.Py(x, y)
        out = np.empty(x.shape + (self.n_forms,), dtype=complex)
        maxdeg = self.Q.degree + self.m - 3
        pw = [[np.ones_like(Xr)] for Xr in X]
        for r in range(3):
            for _ in range(maxdeg):
                pw[r].append(pw[r][-1] * X[r])
        for t, (i, j, k) in enumerate(self.form_exps):
            out[..., t] = pw[0][i] * pw[1][j] * pw[2][k]
        return out * (self.det / denom)[..., None]


def _batched_newton(c: np.ndarray, z: np.ndarray, tol=1e-14, iters=10):
    """Newton on many polynomials at once: ``c`` (N, m+1), ``z`` (N, m)."""
    z = z.copy()
    conv = np.zeros(z.shape, dtype=bool)
    deg = c.shape[1] - 1
    for _ in range(iters):
        p = np.zeros_like(z)
        dp = np.zeros_like(z)
        for j in range(deg, -1, -1):
            dp = dp * z + p
            p = p * z + c[:, j, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            dz = p / dp
        dz[~np.isfinite(dz)] = 0
        z -= dz
        conv = np.abs(dz) <= tol * np.maximum(1.0, np.abs(z))
        if conv.all():
            break
    return z, conv


def _min_sep_rows(z: np.ndarray) -> np.ndarray:
    d = np.abs(z[..., :, None] - z[..., None, :])
    idx = np.arange(z.shape[-1])
    d[..., idx, idx] = np.inf
    return d.min(axis=-1)


class PolylineIntegrator:
    """Integrates the period forms along a polyline on all sheets at once."""

    def __init__(self, sheets: SheetData, special: np.ndarray, cfg: TrackerConfig = TrackerConfig()):
        self.S = sheets
        self.special = np.asarray(special, dtype=complex)
        self.cfg = cfg

    def _dist(self, x) -> float:
        return float(np.min(np.abs(self.special - x))) if self.special.size else np.inf

    def _panels(self, a: complex, b: complex) -> list[float]:
        L = abs(b - a)
        ts = [0.0]
        u = (b - a) / L
        s = 0.0
        while s < L * (1 - 1e-14):
            h = min(self._dist(a + s * u) * PANEL_FRACTION * self.cfg.initial_step / 1e-2, L - s)
            if h <= 1e-14 * max(1.0, L):
                raise NoConvergence("integration path touches a special point")
            s += h
            ts.append(min(s / L, 1.0))
        ts[-1] = 1.0
        return ts

    def _step_roots(self, x0, x1, y0):
        """Certified transport of roots across one panel."""
        S = self.S
        pred = y0 + S.slope(x0, y0) * (x1 - x0)
        sep = _min_sep_rows(pred)
        c = S.P.y_coeffs(np.array([x1]))
        z, conv = _batched_newton(c, pred[None, :], tol=self.cfg.newton_tol)
        z = z[0]
        if conv.all() and np.all(np.abs(z - pred) <= self.cfg.safety * sep / 2):
            return z
        tr = track(S.P, [x0, x1], y0, self.cfg)
        return tr.end_roots

    def transport(self, pts, y0: np.ndarray) -> np.ndarray:
        """Roots continued along a polyline (no integration)."""
        y = y0
        for a, b in zip(pts, pts[1:]):
            if a == b:
                continue
            xs = a + (b - a) * np.array(self._panels(a, b))
            for i in range(len(xs) - 1):
                y = self._step_roots(xs[i], xs[i + 1], y)
        return y

    def segment(self, a: complex, b: complex, y0: np.ndarray):
        """Integrals (m, n_forms) along the straight segment a -> b and end roots."""
        return self.polyline([a, b], y0)

    def polyline(self, pts, y0: np.ndarray):
        """Integrals (m, n_forms) along a polyline, all sheets; returns (I, end roots)."""
        S = self.S
        work = []
        y = y0
        for a, b in zip(pts, pts[1:]):
            if a == b:
                continue
            xs = a + (b - a) * np.array(self._panels(a, b))
            for i in range(len(xs) - 1):
                yn = self._step_roots(xs[i], xs[i + 1], y)
                work.append((xs[i], xs[i + 1], y, yn, 0))
                y = yn
        total = np.zeros((S.m, S.n_forms), dtype=complex)
        while work:
            batch, work = work, []
            xa = np.array([w[0] for w in batch])
            xb = np.array([w[1] for w in batch])
            ya = np.array([w[2] for w in batch])
            yb = np.array([w[3] for w in batch])
            half = (xb - xa) / 2
            mid = (xa + xb) / 2
            xn = mid[:, None] + half[:, None] * GK_NODES[None, :]  # (B, 15)
            # cubic Hermite seeds in the panel parameter
            da = S.slope(xa[:, None], ya) * half[:, None] * 2
            db = S.slope(xb[:, None], yb) * half[:, None] * 2
            seed = (_H00[None, :, None] * ya[:, None, :] + _H10[None, :, None] * da[:, None, :]
                    + _H01[None, :, None] * yb[:, None, :] + _H11[None, :, None] * db[:, None, :])
            B = len(batch)
            c = S.P.y_coeffs(xn.reshape(-1))
            z, conv = _batched_newton(c, seed.reshape(B * 15, S.m), tol=self.cfg.newton_tol)
            z = z.reshape(B, 15, S.m)
            conv = conv.reshape(B, 15, S.m)
            sep = _min_sep_rows(seed)
            ok = np.all(conv, axis=(1, 2)) & np.all(np.abs(z - seed) <= 0.25 * sep, axis=(1, 2))
            vals = S.forms(xn[:, :, None], z)  # (B, 15, m, nf)
            K = np.einsum("n,bnkf->bkf", GK_WK, vals) * half[:, None, None]
            G = np.einsum("n,bnkf->bkf", GK_WG, vals) * half[:, None, None]
            err = np.max(np.abs(K - G), axis=(1, 2))
            mag = np.max(np.abs(K), axis=(1, 2))
            good = ok & (err <= np.maximum(1e-11, 1e-10 * mag))
            for i in range(B):
                if good[i] or batch[i][4] >= 12:
                    if not ok[i]:
                        raise NoConvergence("root continuation failed inside a panel")
                    total += K[i]
                else:
                    x_a, x_b, y_a, y_b, depth = batch[i]
                    x_m = (x_a + x_b) / 2
                    y_m = self._step_roots(x_a, x_m, y_a)
                    work.append((x_a, x_m, y_a, y_m, depth + 1))
                    work.append((x_m, x_b, y_m, y_b, depth + 1))
        return total, y


_T = (GK_NODES + 1) / 2
_H00 = 2 * _T**3 - 3 * _T**2 + 1
_H10 = _T**3 - 2 * _T**2 + _T
_H01 = -2 * _T**3 + 3 * _T**2
_H11 = _T**3 - _T**2


# ---------------------------------------------------------------------------
# combinatorial homology


@dataclass(frozen=True, eq=False)
class Topology:
    """Exact homology data of the lifted lasso complex (cached by combinatorics)."""

    m: int
    n_lassos: int
    perms: tuple
    n_edges: int
    genus: int
    n_punctures: int
    rank: int
    basis_chains: np.ndarray  # (E, n) int
    coord_map: np.ndarray  # (n, E) int: cycle chain -> basis coordinates
    J: np.ndarray  # (n, n) int
    puncture_classes: tuple  # coordinates, ordered by base point index
    euler: int


def _edge(j: int, k: int, m: int) -> int:
    return j * m + k


def _boundary(chain: np.ndarray, perms, m) -> np.ndarray:
    bd = np.zeros(m, dtype=np.int64)
    for j, s in enumerate(perms):
        for k in range(m):
            c = chain[_edge(j, k, m)]
            if c:
                bd[s[k]] += c
                bd[k] -= c
    return bd


def ribbon_intersections(chains: np.ndarray, perms, m: int) -> np.ndarray:
    """Intersection matrix of cycles given as edge chains on the lifted lasso graph.

    At each sheet over the base point the half-edges are cyclically ordered
    by lasso angle, with the outgoing half of each lasso immediately
    before its returning half.  For flows ``f_a, f_b`` (outgoing positive)
    the local contribution is ``sum_{i<j} (f_a(i) f_b(j) - f_b(i) f_a(j)) / 2``.
    """
    chains = np.asarray(chains, dtype=np.int64)
    n_l = len(perms)
    inv = [np.argsort(s) for s in perms]
    n = chains.shape[1]
    S = np.zeros((n, n), dtype=np.int64)
    for v in range(m):
        flow = np.zeros((2 * n_l, n), dtype=np.int64)
        for j in range(n_l):
            flow[2 * j] = chains[_edge(j, v, m)]
            flow[2 * j + 1] = -chains[_edge(j, int(inv[j][v]), m)]
        excl = np.cumsum(flow, axis=0) - flow
        S += excl.T @ flow
    D = S - S.T
    if np.any(D % 2):
        raise RankMismatch("non-integral intersection number")
    return D // 2


@lru_cache(maxsize=256)
def build_topology(m: int, perms: tuple, kinds: tuple, puncture_sheets: tuple, base_index: tuple) -> Topology:
    """Homology of the punctured fiber from lasso permutations.

    ``perms[j]`` is the sheet permutation of lasso ``j`` (lassos in
    counterclockwise angular order), ``kinds[j]`` is 'b' or 'p';
    ``puncture_sheets[j]`` is the punctured sheet of a 'p' lasso;
    ``base_index[j]`` numbers the base point of a 'p' lasso.
    """
    n_l = len(perms)
    E = n_l * m
    # product around infinity must be trivial
    comp = list(range(m))
    for s in perms:
        comp = [s[c] for c in comp]
    if comp != list(range(m)):
        raise RankMismatch("lasso permutations do not compose to the identity")
    # spanning tree by BFS
    adj = [[] for _ in range(m)]
    for j, s in enumerate(perms):
        for k in range(m):
            if s[k] != k:
                adj[k].append((s[k], _edge(j, k, m), 1))
                adj[s[k]].append((k, _edge(j, k, m), -1))
    parent = {0: None}
    dq = deque([0])
    while dq:
        u = dq.popleft()
        for v, e, sg in adj[u]:
            if v not in parent:
                parent[v] = (u, e, sg)
                dq.append(v)
    if len(parent) != m:
        raise RankMismatch("sheet graph is disconnected")
    tree = {parent[v][1] for v in parent if parent[v] is not None}
    nontree = [e for e in range(E) if e not in tree]

    def tree_path(v):
        """Chain of tree edges from root 0 to v."""
        ch = np.zeros(E, dtype=np.int64)
        while parent[v] is not None:
            u, e, sg = parent[v]
            ch[e] += sg
            v = u
        return ch

    roots = [tree_path(v) for v in range(m)]
    Fc = np.zeros((E, len(nontree)), dtype=np.int64)
    for c, e in enumerate(nontree):
        j, k = divmod(e, m)
        head = perms[j][k]
        Fc[:, c] = roots[k] - roots[head]
        Fc[e, c] += 1
    sel = np.array(nontree, dtype=np.int64)
    # 2-cells
    cells = []
    g2 = 0
    for j, (s, kind) in enumerate(zip(perms, kinds)):
        moved = [k for k in range(m) if s[k] != k]
        if kind == "b":
            if len(moved) != 2:
                raise NonSimpleBranching("branch lasso is not a transposition")
            g2 += 1
            pair = np.zeros(E, dtype=np.int64)
            for k in moved:
                pair[_edge(j, k, m)] = 1
            cells.append(pair)
        elif moved:
            raise RankMismatch("puncture lasso permutes sheets")
        for k in range(m):
            if s[k] == k and not (kind == "p" and k == puncture_sheets[j]):
                ch = np.zeros(E, dtype=np.int64)
                ch[_edge(j, k, m)] = 1
                cells.append(ch)
    for k in range(m):
        ch = np.zeros(E, dtype=np.int64)
        cur = k
        for j, s in enumerate(perms):
            ch[_edge(j, cur, m)] += 1
            cur = s[cur]
        cells.append(ch)
    for ch in cells:
        if np.any(_boundary(ch, perms, m)):
            raise RankMismatch("2-cell boundary is not a cycle")
    n_branch = sum(1 for k in kinds if k == "b")
    n_punct = sum(1 for k in kinds if k == "p")
    chi_closed = 2 * m - n_branch
    if chi_closed % 2:
        raise RankMismatch("odd Riemann-Hurwitz characteristic")
    genus = (2 - chi_closed) // 2
    euler = m - E + len(cells)
    if euler != 2 - 2 * genus - n_punct:
        raise RankMismatch(f"Euler characteristic {euler} != {2 - 2 * genus - n_punct}")
    Rel = np.stack([ch[sel] for ch in cells], axis=1) if cells else np.zeros((len(sel), 0), dtype=np.int64)
    U, D, _ = L.smith_normal_form(Rel)
    kdiag = [int(D[i, i]) for i in range(min(D.shape)) if D[i, i] != 0]
    if any(d != 1 for d in kdiag):
        raise RankMismatch("torsion in homology")
    k = len(kdiag)
    nZ = len(sel)
    n = nZ - k
    expected = 2 * genus + n_punct - 1 if n_punct else 2 * genus
    if n != expected:
        raise RankMismatch(f"homology rank {n}, expected {expected}")
    Uinv = L.inverse_unimodular(U)
    Uq = U[k:, :]  # (n, nZ)
    reps = Fc.astype(object) @ Uinv[:, k:]  # (E, n)
    reps = np.array(reps, dtype=np.int64)
    J_H = ribbon_intersections(reps, perms, m)

    def coords_H(chain):
        return L.matmul(Uq, np.array([int(x) for x in chain[sel]], dtype=object).reshape(-1, 1)).flatten()

    # puncture classes in H coordinates, by base point index
    pclass = {}
    for j, kind in enumerate(kinds):
        if kind == "p":
            ch = np.zeros(E, dtype=np.int64)
            ch[_edge(j, puncture_sheets[j], m)] = 1
            pclass[base_index[j]] = coords_H(ch)
    order = sorted(pclass)
    Pcols = [pclass[i] for i in order]
    if Pcols:
        tot = sum(np.array(c, dtype=object) for c in Pcols)
        if any(int(x) != 0 for x in tot):
            raise RankMismatch("puncture classes do not sum to zero")
    K = L.as_int_matrix(np.stack(Pcols[:-1], axis=1)) if len(Pcols) > 1 else L.zeros(n, 0)
    Bm = L.complete_to_basis(K)
    Jb = L.matmul(L.matmul(Bm.T, L.as_int_matrix(J_H)), Bm)
    g2n = n - K.shape[1]
    Jc = Jb[:g2n, :g2n]
    Cc, Nc = L.skew_normal_form(Jc)
    for t in range(0, g2n, 2):
        if Nc[t, t + 1] != 1:
            raise RankMismatch("intersection form is not unimodular on the closed part")
    C = L.identity(n)
    C[:g2n, :g2n] = Cc
    C = L.matmul(Bm, C)
    Jsym = L.matmul(L.matmul(C.T, L.as_int_matrix(J_H)), C)
    Cinv = L.inverse_unimodular(C)
    basis_chains = np.array(reps.astype(object) @ C, dtype=np.int64)
    # cycle chain -> basis coordinates
    Sel = np.zeros((nZ, E), dtype=object)
    for r, e in enumerate(nontree):
        Sel[r, e] = 1
    coord_map = np.array(L.matmul(L.matmul(Cinv, Uq), Sel), dtype=np.int64)
    pcs = tuple(tuple(int(x) for x in L.matmul(Cinv, np.array(c, dtype=object).reshape(-1, 1)).flatten())
                for c in Pcols)
    return Topology(m, n_l, perms, E, genus, n_punct, n, basis_chains, coord_map,
                    np.array(Jsym, dtype=np.int64), pcs, euler)


# ---------------------------------------------------------------------------
# public model


@dataclass(frozen=True)
class CyclePath:
    """Formal integer sum of lifted polylines.

    Each segment is ``(polyline, start_sheet, end_sheet, coefficient)``;
    sheets index the roots of the fiber polynomial sorted by (re, im) at
    the polyline's endpoints, in the chart of the model that created it.
    """

    segments: tuple

    def reversed(self) -> "CyclePath":
        return CyclePath(tuple((tuple(pl[::-1]), e, s, c) for pl, s, e, c in self.segments))

    def __add__(self, other: "CyclePath") -> "CyclePath":
        return CyclePath(self.segments + other.segments)

    def scaled(self, k: int) -> "CyclePath":
        return CyclePath(tuple((pl, s, e, c * k) for pl, s, e, c in self.segments))


@dataclass(frozen=True)
class HomologyClass:
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    def __neg__(self):
        return HomologyClass(tuple(-c for c in self.coords))


@dataclass(frozen=True, eq=False)
class FiberModel:
    """Numerical model of the punctured fiber over ``b``."""

    spec: PencilSpec
    b: complex
    chart: ChartMap
    m: int
    branch_points: tuple
    base_x: complex
    sheet_perms: tuple  # per branch point (same order as branch_points)
    genus: int
    punctures: tuple  # (x, sheet at x0 lasso start) per base point
    J: np.ndarray
    topology: Topology = field(repr=False)
    special: tuple = field(repr=False)  # angular order
    kinds: tuple = field(repr=False)
    radii: tuple = field(repr=False)
    lasso_perms: tuple = field(repr=False)
    edge_periods: np.ndarray = field(repr=False)  # (n_forms, E)
    period_matrix: np.ndarray = field(repr=False)  # (n_forms, n)
    base_roots: np.ndarray = field(repr=False)
    base_points: tuple = field(repr=False)
    coeffs: tuple = field(repr=False)
    cfg: TrackerConfig = field(repr=False, default=TrackerConfig())

    @property
    def rank(self) -> int:
        return self.topology.rank

    @property
    def n_punctures(self) -> int:
        return self.topology.n_punctures

    def sheets(self) -> SheetData:
        return SheetData(self.spec, self.b, self.chart, self.coeffs)

    def lasso_polyline(self, j: int) -> list[complex]:
        s, r = self.special[j], self.radii[j]
        u = (s - self.base_x) / abs(s - self.base_x)
        e = s - r * u
        ang0 = np.angle(-u)
        ring = [complex(s + r * np.exp(1j * (ang0 + 2 * np.pi * t / POLYGON_SIDES)))
                for t in range(POLYGON_SIDES)]
        return [self.base_x, e] + ring[1:] + [e, self.base_x]

    @property
    def basis(self) -> list[CyclePath]:
        out = []
        m = self.m
        for col in self.topology.basis_chains.T:
            segs = []
            for e in np.nonzero(col)[0]:
                j, k = divmod(int(e), m)
                segs.append((tuple(self.lasso_polyline(j)), k, self.lasso_perms[j][k], int(col[e])))
            out.append(CyclePath(tuple(segs)))
        return out

    def summary(self) -> dict:
        return {
            "b": [self.b.real, self.b.imag],
            "m": self.m,
            "genus": self.genus,
            "n_branch_points": len(self.branch_points),
            "n_punctures": self.n_punctures,
            "rank": self.rank,
            "sheet_perms": [list(map(int, s)) for s in self.sheet_perms],
            "J": self.J.tolist(),
        }


def _seg_point_dist(p, a, b):
    ab = b - a
    t = np.clip(((p - a) * np.conj(ab)).real / max(abs(ab) ** 2, 1e-300), 0, 1)
    return np.abs(p - (a + t * ab))


def choose_base_x(special: np.ndarray, radii: np.ndarray) -> tuple[complex, np.ndarray]:
    """Deterministic base point and lasso radii.

    For each candidate ``x0`` every radius is shrunk, if needed, to half the
    distance from its point to the straight segments joining ``x0`` to the
    other points, so that all lassos are pairwise disjoint away from ``x0``.
    The candidate with the least shrinking wins.
    """
    c = special.mean()
    R = max(np.max(np.abs(special - c)), 1e-3)
    n = len(special)
    best, best_score, best_radii = None, -np.inf, None
    for rho in (0.0, 0.3, 0.55, 0.8, 1.05, 1.3, 1.6):
        for t in range(32 if rho else 1):
            th = 2 * np.pi * (t + 0.38196601125) / 32
            x0 = c + R * rho * np.exp(1j * th)
            ab = special - x0  # segments x0 -> s_j
            rel = special[None, :] - x0  # point k relative to x0
            tt = np.clip((rel * np.conj(ab[:, None])).real / (np.abs(ab[:, None]) ** 2), 0, 1)
            dist = np.abs(rel - tt * ab[:, None])  # dist[j, k] = dist(s_k, seg_j)
            np.fill_diagonal(dist, np.inf)
            clear = dist.min(axis=0)
            r = np.minimum(radii, clear / RAY_CLEARANCE)
            if np.any(np.abs(ab) <= 3 * r):
                continue
            score = float(np.min(r / radii))
            if score > best_score:
                best, best_score, best_radii = x0, score, r
        if best_score >= 1.0:
            break
    if best is None or best_score < 1e-3:
        raise InadmissibleChart("no base point with clear lasso rays")
    return complex(best), best_radii


def _branch_points(sheets: SheetData) -> np.ndarray:
    P = sheets.P
    m = sheets.m
    disc = discriminant_y(P)
    if disc.degree != m * (m - 1) or abs(disc.coeffs[-1]) < 1e-9 * np.max(np.abs(disc.coeffs)):
        raise InadmissibleChart("branching at infinity of the chart")
    rs = uni_roots(disc)
    if not rs.simple():
        raise NonSimpleBranching("repeated discriminant root")
    out = []
    for x in rs.roots:
        ys = uni_roots(P.at_x(x)).array()
        d = np.abs(ys[:, None] - ys[None, :])
        np.fill_diagonal(d, np.inf)
        i, j = np.unravel_index(np.argmin(d), d.shape)
        xp, _ = newton2(P, sheets.Py, x, (ys[i] + ys[j]) / 2)
        if abs(xp - x) > 1e-6 * max(1.0, abs(x)):
            xp = x
        out.append(xp)
    return np.array(out, dtype=complex)


def build_fiber(spec: PencilSpec, b: complex, seed: int = 0, base_points=None,
                cfg: TrackerConfig = TrackerConfig(), chart: ChartMap | None = None,
                coeffs=None) -> FiberModel:
    """Numerical model of the punctured fiber over a regular value ``b``.

    Charts are drawn from a seeded stream until one is admissible (at most
    32 draws); a supplied ``chart`` is tried first.
    """
    if base_points is None:
        _, base_points = check_transversal(spec.F, spec.G)
    rng = np.random.default_rng(seed)
    last = None
    for attempt in range(MAX_CHART_ATTEMPTS):
        ch = chart if (attempt == 0 and chart is not None) else ChartMap.random(rng, f"seed{seed}/{attempt}")
        try:
            return _build_in_chart(spec, b, ch, base_points, cfg, coeffs)
        except (InadmissibleChart, NonSimpleBranching, NoConvergence) as exc:
            last = exc
    raise InadmissibleChart(f"no admissible chart after {MAX_CHART_ATTEMPTS} draws: {last}")


def _build_in_chart(spec, b, chart, base_points, cfg, coeffs) -> FiberModel:
    sheets = SheetData(spec, b, chart, coeffs)
    m = sheets.m
    branch = _branch_points(sheets)
    # base points in the chart
    pxs, pys = [], []
    for pt in base_points:
        if chart.chart_z(pt) < 1e-3:
            raise InadmissibleChart("base point near infinity of the chart")
        x, y = chart.to_chart(pt)
        pxs.append(x)
        pys.append(y)
    pxs = np.array(pxs, dtype=complex)
    special = np.concatenate([branch, pxs])
    kinds0 = ["b"] * len(branch) + ["p"] * len(pxs)
    scale = max(1.0, float(np.max(np.abs(special))))
    dmat = np.abs(special[:, None] - special[None, :])
    np.fill_diagonal(dmat, np.inf)
    if np.min(dmat) < 1e-7 * scale:
        raise InadmissibleChart("special points collide")
    radii = LASSO_RADIUS_FRACTION * dmat.min(axis=1)
    x0, radii = choose_base_x(special, radii)
    order = np.argsort(np.angle(special - x0), kind="stable")
    special = special[order]
    radii = radii[order]
    kinds = tuple(kinds0[i] for i in order)
    base_index = tuple((int(i) - len(branch)) if kinds0[i] == "p" else -1 for i in order)
    y0 = sheets.roots(x0)
    integ = PolylineIntegrator(sheets, special, cfg)
    # roots stay simple over base-point projections; only branch points matter
    root_mover = PolylineIntegrator(sheets, branch, cfg)
    nf = sheets.n_forms
    E = len(special) * m
    edge_periods = np.zeros((nf, E), dtype=complex)
    perms, psheets = [], []
    for j, (s, r) in enumerate(zip(special, radii)):
        u = (s - x0) / abs(s - x0)
        e = s - r * u
        I_ray, y_e = integ.segment(x0, e, y0)
        ang0 = np.angle(-u)
        ring = [complex(s + r * np.exp(1j * (ang0 + 2 * np.pi * t / POLYGON_SIDES))) for t in range(POLYGON_SIDES)]
        ring = [e] + ring[1:] + [e]
        I_circ, y_c = integ.polyline(ring, y_e)
        sigma = []
        for k in range(m):
            d = np.abs(y_e - y_c[k])
            t = int(np.argmin(d))
            if d[t] > 1e-8 * max(1.0, abs(y_c[k])):
                raise NoConvergence("lasso lift does not close")
            sigma.append(t)
        if sorted(sigma) != list(range(m)):
            raise NoConvergence("lasso transport is not a bijection")
        perms.append(tuple(sigma))
        for k in range(m):
            edge_periods[:, j * m + k] = I_ray[k] + I_circ[k] - I_ray[sigma[k]]
        if kinds[j] == "p":
            ys = root_mover.transport([e, s], y_e)
            yR = pys[base_index[j]]
            d = np.abs(ys - yR)
            k = int(np.argmin(d))
            dd = np.sort(d)
            if dd[0] > 1e-6 * max(1.0, abs(yR)) or (m > 1 and dd[1] < 1e3 * dd[0] and dd[1] < 1e-3):
                raise NoConvergence("puncture not located on a sheet")
            psheets.append(k)
        else:
            psheets.append(-1)
            moved = [k for k in range(m) if sigma[k] != k]
            if len(moved) != 2:
                raise NonSimpleBranching("branch point is not simple")
    top = build_topology(m, tuple(perms), kinds, tuple(psheets), base_index)
    g_formula = (m - 1) * (m - 2) // 2
    if top.genus != g_formula:
        raise RankMismatch(f"genus {top.genus} disagrees with degree formula {g_formula}")
    Pi = edge_periods @ top.basis_chains.astype(float)
    # per-branch data in the original discriminant-root order
    bp_perm = {}
    for j in range(len(special)):
        if kinds[j] == "b":
            bp_perm[complex(special[j])] = perms[j]
    sheet_perms = tuple(bp_perm[complex(s)] for s in special if complex(s) in bp_perm)
    punct = [None] * len(pxs)
    for j in range(len(special)):
        if kinds[j] == "p":
            punct[base_index[j]] = (complex(special[j]), psheets[j])
    return FiberModel(spec, complex(b), chart, m, tuple(complex(s) for s, k in zip(special, kinds) if k == "b"),
                      x0, sheet_perms, top.genus, tuple(punct), top.J, top, tuple(complex(s) for s in special),
                      kinds, tuple(float(r) for r in radii), tuple(perms), edge_periods, Pi, y0,
                      tuple(base_points), (sheets.alpha, sheets.beta), cfg)


# ---------------------------------------------------------------------------
# classes


def intersection_matrix(model: FiberModel) -> np.ndarray:
    """Integer intersection form of the model basis (recomputed from the chains)."""
    top = model.topology
    return ribbon_intersections(top.basis_chains, top.perms, model.m)


def puncture_class(model: FiberModel, index: int) -> HomologyClass:
    """Class of a small counterclockwise loop around base point ``index``."""
    if not 0 <= index < model.n_punctures:
        raise IndexError("puncture index out of range")
    return HomologyClass(model.topology.puncture_classes[index])


def chain_class(model: FiberModel, chain) -> HomologyClass:
    """Basis coordinates of an edge chain (must be a cycle)."""
    chain = np.asarray(chain, dtype=np.int64)
    if np.any(_boundary(chain, model.topology.perms, model.m)):
        raise ValueError("chain is not a cycle")
    return HomologyClass(model.topology.coord_map @ chain)


def solve_periods(Pi: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Real least-squares solution of ``Pi x = target`` (x real)."""
    A = np.vstack([Pi.real, Pi.imag])
    t = np.concatenate([target.real, target.imag], axis=0)
    w = 1.0 / np.maximum(np.linalg.norm(A, axis=1), 1e-300)
    x, *_ = np.linalg.lstsq(A * w[:, None], t * (w[:, None] if t.ndim == 2 else w), rcond=None)
    return x


def cycle_periods(model: FiberModel, cycle: CyclePath, sheets: SheetData | None = None) -> np.ndarray:
    """Integrals of the period forms over a cycle."""
    S = sheets or model.sheets()
    integ = PolylineIntegrator(S, np.array(model.special), model.cfg)
    total = np.zeros(S.n_forms, dtype=complex)
    for pl, s, e, c in cycle.segments:
        if c == 0:
            continue
        y0 = S.roots(pl[0])
        I, y1 = integ.polyline(list(pl), y0)
        yend = S.roots(pl[-1])
        k = int(np.argmin(np.abs(yend - y1[s])))
        if k != e:
            raise NonIntegral(f"segment ends on sheet {k}, expected {e}")
        total += c * I[s]
    return total


def express(model: FiberModel, cycle: CyclePath) -> HomologyClass:
    """Integer coordinates of a closed cycle, found from its periods."""
    per = cycle_periods(model, cycle)
    x = solve_periods(model.period_matrix, per)
    r = np.round(x)
    if np.max(np.abs(x - r)) > EXPRESS_TOL:
        raise NonIntegral(f"period solve residual {np.max(np.abs(x - r)):.3g}")
    return HomologyClass(r.astype(np.int64))
