"""Monodromy of the fiber homology along loops in the value plane.

A loop is followed by a chain of fresh fiber models; consecutive models are
matched by continuing the periods of the transported cycles and solving
for the unique integer change of basis.  Every accepted step is certified:
near-integral solution, unimodular, and preserving the intersection form.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import lattice as L
from .errors import CannotRoute, NonIntegral, RankMismatch, StepUnderflow
from .fiber import FiberModel, build_fiber, cycle_periods, CyclePath, solve_periods
from .genericity import CriticalData, PencilSpec, critical_points
from .numsolve import TrackerConfig, circle_polyline

ARC_DEG = 15.0
DETOUR_REACH = 0.4
SMALL_CIRCLE = 0.25
STEP_FRACTION = 0.5
INTEGRALITY = 0.15
INF = "inf"


# ---------------------------------------------------------------------------
# path systems


@dataclass(frozen=True)
class PathSystem:
    """Star of non-crossing paths from ``b`` to every target, in counterclockwise order.

    ``loops[i]`` runs out along ``paths[i]``, once around the target
    (counterclockwise around finite targets; clockwise along a large circle
    for the target at infinity) and back.
    """

    b: complex
    targets: tuple
    index: tuple
    paths: tuple
    radii: tuple
    loops: tuple

    def position(self, original_index: int) -> int:
        return self.index.index(original_index)


def _arc(center, radius, a0, a1, ccw: bool) -> list[complex]:
    """Points on an arc from angle a0 to a1 (exclusive of start), direction given."""
    if ccw:
        while a1 <= a0:
            a1 += 2 * np.pi
    else:
        while a1 >= a0:
            a1 -= 2 * np.pi
    n = max(1, int(np.ceil(abs(a1 - a0) / np.radians(ARC_DEG))))
    return [complex(center + radius * np.exp(1j * (a0 + (a1 - a0) * k / n))) for k in range(1, n + 1)]


def _routed_segment(start: complex, end: complex, obstacles, dmin: float) -> list[complex]:
    """Straight segment with circular detours around nearby obstacles."""
    d = end - start
    Lseg = abs(d)
    u = d / Lseg
    T = DETOUR_REACH * dmin
    hits = []
    for v in obstacles:
        rel = (v - start) / u
        tau, t = rel.real, rel.imag
        if 0 < tau < Lseg and abs(t) < T:
            if abs(t) < 1e-3 * dmin:
                raise CannotRoute("value aligned with a path")
            rho = T - 0.3 * (T - abs(t))
            half = np.sqrt(rho**2 - t**2)
            if tau - half <= 0 or tau + half >= Lseg:
                raise CannotRoute("detour overlaps a path end")
            hits.append((tau, v, rho, t, half))
    hits.sort(key=lambda h: h[0])
    pts = [start]
    for tau, v, rho, t, half in hits:
        p_in = start + (tau - half) * u
        p_out = start + (tau + half) * u
        pts.append(complex(p_in))
        a0 = np.angle(p_in - v)
        a1 = np.angle(p_out - v)
        # the arc bulges to the side of the segment away from v
        arc_ccw = _arc(v, rho, a0, a1, True)
        arc_cw = _arc(v, rho, a0, a1, False)
        far = v - 1j * u * np.sign(t) * rho
        mid_ccw = arc_ccw[len(arc_ccw) // 2]
        mid_cw = arc_cw[len(arc_cw) // 2]
        arc = arc_ccw if abs(mid_ccw - far) < abs(mid_cw - far) else arc_cw
        arc[-1] = complex(p_out)
        pts.extend(arc)
    pts.append(end)
    return pts


def distinguished_paths(values, b: complex, seed: int = 0, infinity: bool = False) -> PathSystem:
    """Non-crossing star of paths from ``b`` to each finite value (and infinity).

    Paths are straight with detours of radius below ``0.4 * dmin`` around
    values close to them (``dmin`` = least distance among values and
    ``b``); small circles have radius ``dmin / 4``.  The target at infinity
    is reached along the outward ray through ``b`` and circled clockwise on
    a large circle.
    """
    vals = [complex(v) for v in values]
    pts = np.array(vals + [complex(b)])
    if len(pts) < 2:
        raise ValueError("need at least one target")
    dm = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(dm, np.inf)
    dmin = float(dm.min())
    if dmin <= 0:
        raise CannotRoute("base value coincides with a target")
    rho = SMALL_CIRCLE * dmin
    entries = []
    for i, c in enumerate(vals):
        u = (c - b) / abs(c - b)
        end = c - rho * u
        others = [v for k, v in enumerate(vals) if k != i]
        path = _routed_segment(complex(b), complex(end), others, dmin)
        a0 = np.angle(end - c)
        circ = _arc(c, rho, a0, a0 + 2 * np.pi - 1e-12, True)
        circ[-1] = complex(end)
        loop = path + circ + path[::-1][1:]
        entries.append((np.angle(u), c, i, tuple(path), rho, tuple(loop)))
    if infinity:
        R = 2.0 * max(np.max(np.abs(pts)), 1.0)
        u = b / abs(b) if b != 0 else 1.0
        end = R * u
        path = _routed_segment(complex(b), complex(end), vals, dmin)
        a0 = np.angle(end)
        circ = _arc(0.0, R, a0, a0 - 2 * np.pi + 1e-12, False)
        circ[-1] = complex(end)
        loop = path + circ + path[::-1][1:]
        entries.append((np.angle(u), INF, len(vals), tuple(path), R, tuple(loop)))
    entries.sort(key=lambda e: e[0])
    for a, b2 in zip(entries, entries[1:]):
        if abs(a[0] - b2[0]) < 1e-9:
            raise CannotRoute("two targets in the same direction")
    ps = PathSystem(complex(b), tuple(e[1] for e in entries), tuple(e[2] for e in entries),
                    tuple(e[3] for e in entries), tuple(e[4] for e in entries), tuple(e[5] for e in entries))
    if not paths_disjoint(ps):
        raise CannotRoute("paths intersect")
    return ps


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return np.sign(((b - a).conjugate() * (c - a)).imag)

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    return o1 * o2 < 0 and o3 * o4 < 0


def paths_disjoint(ps: PathSystem) -> bool:
    """Pairwise disjointness of the lassos, apart from their common start ``b``."""
    pieces = []
    for loop in ps.loops:
        pieces.append([(loop[t], loop[t + 1]) for t in range(len(loop) - 1)])
    firsts = [loop[1] for loop in ps.loops]
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            if abs(np.angle((firsts[i] - ps.b) / (firsts[j] - ps.b))) < 1e-9:
                return False
            for a1, a2 in pieces[i]:
                for b1, b2 in pieces[j]:
                    if ps.b in (a1, a2) and ps.b in (b1, b2):
                        continue
                    if _segments_cross(a1, a2, b1, b2):
                        return False
    return True


def choose_base_value(values, seed: int = 0, n_candidates: int = 16) -> complex:
    """Seeded regular base value well separated from the given values."""
    vals = np.array([complex(v) for v in values])
    rng = np.random.default_rng(seed)
    c = vals.mean()
    R = max(float(np.max(np.abs(vals - c))), 1.0)
    best, score = None, -np.inf
    for _ in range(n_candidates):
        z = c + R * 0.8 * (rng.standard_normal() + 1j * rng.standard_normal())
        dist = np.abs(vals - z)
        dm = np.abs(vals[:, None] - vals[None, :])
        np.fill_diagonal(dm, np.inf)
        s = float(dist.min()) / max(float(dm.min()) if len(vals) > 1 else 1.0, 1e-12)
        s = min(s, 1.0) - 0.05 * abs(z - c) / R
        if s > score:
            best, score = z, s
    return complex(best)


# ---------------------------------------------------------------------------
# transport


@dataclass
class TransportStats:
    steps: int = 0
    rejected: int = 0
    models: int = 0


def _predict(hist, z, Y, znew):
    """Extrapolated periods at ``znew`` and a lower-order prediction to cross-check it."""
    if not hist:
        return Y, None
    z1, Y1 = hist[-1]
    lin = Y + (znew - z) / (z - z1) * (Y - Y1)
    if len(hist) < 2:
        return lin, Y
    z0, Y0 = hist[-2]
    quad = (Y0 * (znew - z1) * (znew - z) / ((z0 - z1) * (z0 - z))
            + Y1 * (znew - z0) * (znew - z) / ((z1 - z0) * (z1 - z))
            + Y * (znew - z0) * (znew - z1) / ((z - z0) * (z - z1)))
    return quad, lin


class Transporter:
    """Builds fiber models along paths and matches their homology bases."""

    def __init__(self, spec: PencilSpec, crit: CriticalData, seed: int = 0,
                 cfg: TrackerConfig = TrackerConfig(), step_fraction: float = STEP_FRACTION):
        self.spec = spec
        self.crit = crit
        self.seed = seed
        self.cfg = cfg
        self.step_fraction = step_fraction
        self.obstacles = np.array(list(crit.values) + ([0.0] if 0 in crit.A else []), dtype=complex)
        self.has_inf = INF in crit.A
        self.stats = TransportStats()

    def model(self, b: complex, chart=None, salt: int = 0) -> FiberModel:
        self.stats.models += 1
        return build_fiber(self.spec, b, seed=self.seed * 7919 + salt, base_points=list(self.crit.base_points),
                           cfg=self.cfg, chart=chart)

    def step_bound(self, b: complex) -> float:
        d = float(np.min(np.abs(self.obstacles - b))) if self.obstacles.size else np.inf
        if self.has_inf:
            d = min(d, abs(b))
        return self.step_fraction * d

    @staticmethod
    def _gauge(model: FiberModel, gauge: str) -> complex:
        alpha, beta = model.coeffs
        return alpha if gauge == "alpha" else beta

    def _match(self, new: FiberModel, target: np.ndarray, gauge: str, J: np.ndarray, check=None):
        """Round the solution of ``Pi_new X = target``; ``None`` unless certified.

        ``check`` is a second, lower-order prediction that must round to the
        same matrix; with a degenerate intersection form this guards against
        a wrong but near-integral solution.
        """
        Pi = new.period_matrix * self._gauge(new, gauge)
        X = solve_periods(Pi, target)
        N = np.round(X)
        gap = float(np.max(np.abs(X - N)))
        if gap >= INTEGRALITY:
            return None, gap
        if check is not None and not np.array_equal(np.round(solve_periods(Pi, check)), N):
            return None, gap
        N = N.astype(np.int64)
        NI = L.as_int_matrix(N)
        if abs(L.det(NI)) != 1:
            return None, gap
        if not L.equal(L.matmul(L.matmul(NI.T, L.as_int_matrix(new.J)), NI), L.as_int_matrix(J)):
            return None, gap
        return N, gap

    def transport(self, start: FiberModel, path, end: FiberModel | None = None,
                  gauge: str = "alpha", predict: bool = True, lift=None, lift_obstacles=None):
        """Integer matrix expressing the start basis, carried along ``path``, in the end basis.

        Returns ``(N, last_model)``; with ``end`` supplied the last model is ``end``.
        With ``lift`` given, ``path`` lives in an auxiliary plane mapped to
        values by ``lift``; step sizes are then bounded by the distance to
        ``lift_obstacles`` in that plane.
        """
        pts = [complex(p) for p in path]
        to_b = (lambda z: complex(z)) if lift is None else (lambda z: complex(lift(z)))
        if lift is None:
            bound = self.step_bound
        else:
            obst = np.array(list(lift_obstacles), dtype=complex)

            def bound(z):
                return self.step_fraction * float(np.min(np.abs(obst - z)))
        if abs(to_b(pts[0]) - start.b) > 1e-12 * max(1.0, abs(start.b)):
            raise ValueError("path does not start at the model's base value")
        n = start.rank
        J0 = start.J
        cur = start
        N = np.eye(n, dtype=np.int64)
        Y = cur.period_matrix * self._gauge(cur, gauge) @ N
        hist = []  # (z, Y) at up to two previous steps, most recent last
        salt = 0
        # steps advance by arclength and may pass polyline vertices: a piece
        # of length h <= step_bound stays inside the obstacle-free disc
        seglen = np.abs(np.diff(np.array(pts)))
        cum = np.concatenate([[0.0], np.cumsum(seglen)])
        total = float(cum[-1])

        def at(t):
            if t >= total:
                return pts[-1]
            k = int(np.searchsorted(cum, t, side="right")) - 1
            return pts[k] + (t - cum[k]) / seglen[k] * (pts[k + 1] - pts[k])

        s = 0.0
        h = None
        while total > 0 and s < total * (1 - 1e-13):
            znow = at(s)
            bnow = to_b(znow)
            hb = bound(znow)
            h = hb if h is None else min(2 * h, hb)
            h = min(h, total - s)
            while True:
                if h < 1e-9 * max(1.0, hb):
                    raise StepUnderflow(f"transport step underflow near b = {bnow}")
                snew = s + h if s + h < total * (1 - 1e-13) else total
                bnew = to_b(at(snew))
                salt += 1
                new = self.model(bnew, chart=cur.chart, salt=salt)
                znew = at(snew)
                target, check = _predict(hist, znow, Y, znew) if predict else (Y, None)
                Nn, gap = self._match(new, target, gauge, J0, check)
                self.stats.steps += 1
                if Nn is not None:
                    break
                self.stats.rejected += 1
                h /= 2
            hist = (hist + [(znow, Y)])[-2:]
            cur, N = new, Nn
            Y = cur.period_matrix * self._gauge(cur, gauge) @ N
            s = snew
        if end is not None:
            if abs(end.b - cur.b) > 1e-9 * max(1.0, abs(end.b)):
                raise ValueError("end model does not sit at the path end")
            Nn, gap = self._match(end, Y, gauge, J0)
            if Nn is None or gap > 1e-4:
                raise NonIntegral(f"final basis match failed (gap {gap:.3g})")
            return Nn, end
        return N, cur

    def loop_matrix(self, model: FiberModel, loop, gauge: str = "alpha") -> np.ndarray:
        """Monodromy matrix of a closed loop based at ``model.b`` (acts on columns)."""
        pts = [complex(p) for p in loop]
        if abs(pts[0] - pts[-1]) > 1e-12 * max(1.0, abs(pts[0])):
            raise ValueError("loop is not closed")
        N, _ = self.transport(model, pts, end=model, gauge=gauge)
        return N


def loop_matrix(model: FiberModel, loop, crit: CriticalData, seed: int = 0,
                cfg: TrackerConfig = TrackerConfig()) -> np.ndarray:
    return Transporter(model.spec, crit, seed, cfg).loop_matrix(model, loop)


# ---------------------------------------------------------------------------
# vanishing cycles and Picard-Lefschetz


@dataclass(frozen=True)
class VanishingCycle:
    coords: tuple
    index: int
    convention: str = "first-nonzero-positive"
    method: str = "wang"

    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=np.int64)


def vanishing_cycle(M, index: int = 0) -> VanishingCycle:
    """Primitive generator of the image of ``M - I`` (first nonzero entry positive)."""
    M = L.as_int_matrix(M)
    n = M.shape[0]
    D = M - L.identity(n)
    if L.is_zero(D):
        raise RankMismatch("monodromy is the identity; no vanishing class from its image")
    try:
        g = L.image_generator(D)
    except ValueError as exc:
        raise RankMismatch(str(exc)) from exc
    return VanishingCycle(tuple(L.sign_normalize(L.primitive(g))), index)


@dataclass(frozen=True)
class PLVerdict:
    passed: bool
    counterexample: tuple | None = None


def pl_check(M, delta, J, sign: int = -1) -> PLVerdict:
    """Exact check of ``M v = v + sign * (v^T J delta) delta`` on every basis vector."""
    M = L.as_int_matrix(M)
    J = L.as_int_matrix(J)
    d = L.as_int_matrix(np.asarray(delta).reshape(-1, 1))
    n = M.shape[0]
    Jd = L.matmul(J, d).flatten()
    for k in range(n):
        expect = [int(k == i) + sign * int(Jd[k]) * int(d[i, 0]) for i in range(n)]
        if [int(x) for x in M[:, k]] != expect:
            return PLVerdict(False, tuple(int(k == i) for i in range(n)))
    return PLVerdict(True)


def vanishing_cycle_geometric(tr: Transporter, base: FiberModel, ps: PathSystem, pos: int,
                              eps0: float = 0.5, max_shrink: int = 8) -> VanishingCycle:
    """Vanishing class from the coalescing pair of branch points near a critical value.

    Close to the critical value two branch points merge; the lift of a small
    circle around both, on one of the two merging sheets, is carried back
    to the base fiber along the distinguished path.
    """
    c = ps.targets[pos]
    path = list(ps.paths[pos])
    entry = path[-1]
    u = (entry - c) / abs(entry - c)
    rho = abs(entry - c)
    eps = eps0
    for _ in range(max_shrink):
        b_eps = c + eps * rho * u
        model = tr.model(b_eps, salt=10_000 + pos)
        br = np.array(model.branch_points)
        dm = np.abs(br[:, None] - br[None, :])
        np.fill_diagonal(dm, np.inf)
        i, j = np.unravel_index(np.argmin(dm), dm.shape)
        mid = (br[i] + br[j]) / 2
        gap = dm[i, j]
        others = np.array([s for s in model.special if abs(s - br[i]) > 0 and abs(s - br[j]) > 0])
        far = float(np.min(np.abs(others - mid)))
        if gap / far < 0.1:
            break
        eps /= 10
    else:
        raise RankMismatch("no isolated coalescing pair of branch points")
    radius = gap
    start = complex(mid + radius * np.exp(0.3j))
    S = model.sheets()
    ys = S.roots(start)
    d = np.abs(ys[:, None] - ys[None, :])
    np.fill_diagonal(d, np.inf)
    k, _ = np.unravel_index(np.argmin(d), d.shape)
    circle = circle_polyline(mid, radius, start_angle=0.3)
    cyc = CyclePath(((tuple(circle), int(k), int(k), 1),))
    per = cycle_periods(model, cyc, S)
    x = solve_periods(model.period_matrix, per)
    v = np.round(x)
    if np.max(np.abs(x - v)) > 1e-4:
        raise NonIntegral("vanishing cycle periods are not integral in the local basis")
    back = [b_eps, entry] + path[::-1][1:]
    N, _ = tr.transport(model, back, end=base)
    delta = N @ v.astype(np.int64)
    if not np.any(delta):
        raise RankMismatch("vanishing class is zero")
    return VanishingCycle(tuple(L.sign_normalize(L.primitive(delta))), pos, method="geometric")


# ---------------------------------------------------------------------------
# base change


def pullback_values(C, p: int, q: int) -> list[complex]:
    """All ``pq``-th roots of every value in ``C`` (zero and infinity excluded)."""
    k = p * q
    out = []
    for c in C:
        if c == INF or c == 0:
            continue
        c = complex(c)
        r = abs(c) ** (1.0 / k)
        a = np.angle(c)
        out.extend(complex(r * np.exp(1j * (a + 2 * np.pi * t) / k)) for t in range(k))
    return out


def pushforward_loop(loop, p: int, q: int, avoid=None) -> list[complex]:
    """Pointwise image ``z -> z**(pq)``, refined so each chord stays close to the image arc."""
    k = p * q
    pts = [complex(z) for z in loop]
    if all(abs(z - pts[0]) == 0 for z in pts):
        return [pts[0] ** k] * len(pts)
    avoid = np.array([complex(a) for a in (avoid or [])] + [0.0])
    out = [pts[0] ** k]
    for a, b in zip(pts, pts[1:]):
        stack = [(a, b)]
        seq = []
        while stack:
            x, y = stack.pop()
            fx, fy = x**k, y**k
            fm = ((x + y) / 2) ** k
            chord_mid = (fx + fy) / 2
            dist = float(np.min(np.abs(avoid - fm)))
            ang = abs(np.angle(fy / fx)) if fx != 0 and fy != 0 else 0.0
            if abs(fm - chord_mid) > 0.05 * dist or ang > np.radians(ARC_DEG):
                m = (x + y) / 2
                stack.append((m, y))
                stack.append((x, m))
            else:
                seq.append(fy)
        out.extend(seq)
    return out


@dataclass(frozen=True)
class SquareCheck:
    """Comparison of upstairs transport with the monodromy of the pushed-forward loop."""

    label: str
    upstairs: np.ndarray
    downstairs: np.ndarray

    @property
    def commutes(self) -> bool:
        return bool(np.array_equal(self.upstairs, self.downstairs))


def base_change_square(rep: "MonodromyRep", tr: Transporter, p: int, q: int,
                       include_origin: bool = True) -> list[SquareCheck]:
    """Check that transport over the base-changed family matches the pushed-forward loops.

    Upstairs, each pulled-back critical value (and the origin when
    requested) is circled by a lasso from a ``pq``-th root of ``b``; the
    family is followed in that plane with models at ``z**(pq)``.  Downstairs
    the pushed-forward polyline is transported as an ordinary loop.
    """
    k = p * q
    values = [v for v in rep.pathsys.targets if v != INF]
    crit_values = [complex(v) for v in tr.crit.values]
    up_targets = pullback_values(crit_values, p, q)
    zb = complex(abs(rep.b) ** (1.0 / k) * np.exp(1j * np.angle(rep.b) / k))
    targets = up_targets + ([0.0] if include_origin else [])
    ps = distinguished_paths(targets, zb)
    obstacles = up_targets + [0.0]
    out = []
    for pos, t in enumerate(ps.targets):
        loop = list(ps.loops[pos])
        label = "origin" if ps.index[pos] == len(up_targets) else f"root{ps.index[pos]}"
        up, _ = tr.transport(rep.model, loop, end=rep.model, lift=lambda z: z**k, lift_obstacles=obstacles)
        down_loop = pushforward_loop(loop, p, q, avoid=values)
        down_loop[0] = down_loop[-1] = rep.b
        down = tr.loop_matrix(rep.model, down_loop)
        out.append(SquareCheck(label, up, down))
    return out


# ---------------------------------------------------------------------------
# full representation


@dataclass(frozen=True, eq=False)
class MonodromyRep:
    """Integer monodromy on the base fiber's homology.

    ``generators[i]`` is the matrix of the loop around critical value ``i``
    (ordering of ``CriticalData.values``); ``M0``/``Minf`` are present when 0
    / infinity are exceptional values.  ``order`` lists the loop labels in
    counterclockwise order around ``b``.
    """

    b: complex
    dim: int
    J: np.ndarray
    generators: tuple
    M0: np.ndarray | None
    Minf: np.ndarray | None
    order: tuple
    pathsys: PathSystem = field(repr=False)
    model: FiberModel = field(repr=False)
    vanishing: tuple = ()
    pl: tuple = ()
    stats: dict = field(default_factory=dict)

    def matrix(self, label):
        if label == "0":
            return self.M0
        if label == INF:
            return self.Minf
        if isinstance(label, str) and label.startswith("c"):
            return self.generators[int(label[1:])]
        raise KeyError(label)

    def ordered_product(self) -> np.ndarray:
        """``M_(n) ... M_(1)`` over all loops in counterclockwise order."""
        P = L.identity(self.dim)
        for lab in self.order:
            P = L.matmul(L.as_int_matrix(self.matrix(lab)), P)
        return P

    def all_matrices(self) -> list[tuple[str, np.ndarray]]:
        return [(lab, self.matrix(lab)) for lab in self.order]

    def to_json(self) -> dict:
        return {
            "b": [self.b.real, self.b.imag],
            "dim": self.dim,
            "genus": int(self.model.genus),
            "J": np.asarray(self.J).tolist(),
            "generators": [np.asarray(g).tolist() for g in self.generators],
            "M0": None if self.M0 is None else np.asarray(self.M0).tolist(),
            "Minf": None if self.Minf is None else np.asarray(self.Minf).tolist(),
            "order": list(self.order),
            "vanishing_cycles": [list(v.coords) for v in self.vanishing],
            "vanishing_methods": [v.method for v in self.vanishing],
            "picard_lefschetz": [bool(v.passed) for v in self.pl],
        }


def compute_monodromy(spec: PencilSpec, crit: CriticalData | None = None, seed: int = 0,
                      cfg: TrackerConfig = TrackerConfig(), b: complex | None = None,
                      step_fraction: float = STEP_FRACTION, geometric: str = "auto") -> MonodromyRep:
    """Generators around every critical value (and 0 / infinity when exceptional).

    ``geometric``: 'auto' extracts vanishing classes from the loop matrices
    and falls back to the coalescing-pair construction when a matrix is the
    identity; 'always' uses the geometric construction for every value.
    """
    t0 = time.perf_counter()
    if crit is None:
        crit = critical_points(spec, seed=seed)
    values = list(crit.values)
    targets = values + ([0.0] if 0 in crit.A else [])
    rng_seed = seed
    ps = None
    for attempt in range(8):
        if b is None or attempt > 0:
            bb = choose_base_value(targets, seed=rng_seed + attempt)
        else:
            bb = b
        try:
            ps = distinguished_paths(targets, bb, infinity=INF in crit.A)
            break
        except CannotRoute:
            continue
    if ps is None:
        raise CannotRoute("no routable base value found")
    tr = Transporter(spec, crit, seed, cfg, step_fraction)
    base = tr.model(ps.b)
    mats = {}
    for pos, lab in enumerate(ps.targets):
        mats[ps.index[pos]] = tr.loop_matrix(base, ps.loops[pos], gauge="beta" if lab == INF else "alpha")
    r = len(values)
    gens = tuple(mats[i] for i in range(r))
    M0 = mats[r] if 0 in crit.A else None
    Minf = None
    if INF in crit.A:
        Minf = mats[len(targets)]
    labels = []
    for pos, lab in enumerate(ps.targets):
        i = ps.index[pos]
        labels.append(INF if lab == INF else ("0" if i == r else f"c{i}"))
    vcs, pls = [], []
    for i in range(r):
        M = gens[i]
        vc = None
        if geometric != "always":
            try:
                vc = vanishing_cycle(M, i)
            except RankMismatch:
                vc = None
        if vc is None:
            g = vanishing_cycle_geometric(tr, base, ps, ps.position(i))
            vc = VanishingCycle(g.coords, i, method="geometric")
        vcs.append(vc)
        pls.append(pl_check(M, vc.coords, base.J))
    stats = {"transport_steps": tr.stats.steps, "rejected_steps": tr.stats.rejected,
             "models_built": tr.stats.models, "seconds": time.perf_counter() - t0}
    return MonodromyRep(ps.b, base.rank, base.J, gens, M0, Minf, tuple(labels), ps, base,
                        tuple(vcs), tuple(pls), stats)
