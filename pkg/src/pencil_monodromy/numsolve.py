"""Univariate root finding, 2x2 polynomial systems, and root-set tracking.

Everything here runs in complex double precision.  The tracker accepts a
step only when every Newton-corrected root stays well inside the
separation radius of its predictor, so a silent swap of two roots cannot
occur.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NoConvergence, PositiveDimensional, StepUnderflow
from .poly import BiPoly, UniPoly, resultant_y

CLUSTER_REL = 1e-7


@dataclass(frozen=True)
class RootSet:
    """Roots with multiplicities and absolute residuals ``|P(root)|``."""

    roots: tuple
    multiplicities: tuple
    residuals: tuple

    def __post_init__(self):
        if not (len(self.roots) == len(self.multiplicities) == len(self.residuals)):
            raise ValueError("RootSet fields must have equal length")
        if any(int(k) < 1 for k in self.multiplicities):
            raise ValueError("multiplicities must be positive")
        if any(r < 0 for r in self.residuals):
            raise ValueError("residuals must be non-negative")

    @property
    def degree(self) -> int:
        return int(sum(self.multiplicities))

    def array(self) -> np.ndarray:
        """Roots repeated by multiplicity, as a complex array."""
        return np.array([r for r, k in zip(self.roots, self.multiplicities) for _ in range(k)], dtype=complex)

    def simple(self) -> bool:
        return all(k == 1 for k in self.multiplicities)


@dataclass(frozen=True)
class TrackerConfig:
    """Step control for :func:`track`.

    ``initial_step`` and ``min_step`` are fractions of the total path length.
    """

    initial_step: float = 1e-2
    min_step: float = 1e-9
    newton_tol: float = 1e-12
    safety: float = 0.5
    max_iter: int = 64

    def __post_init__(self):
        if not 0 < self.min_step < self.initial_step:
            raise ValueError("need 0 < min_step < initial_step")
        if not 0 < self.safety < 1:
            raise ValueError("safety factor must lie in (0, 1)")
        if self.newton_tol <= 0 or self.max_iter < 1:
            raise ValueError("bad Newton settings")

    def scaled(self, factor: float) -> "TrackerConfig":
        return TrackerConfig(self.initial_step * factor, self.min_step * factor,
                             self.newton_tol * factor, self.safety, self.max_iter)


@dataclass(frozen=True)
class PathTrace:
    """Result of transporting a root set along a polyline.

    ``permutation[k]`` is the index (in the start ordering) of the root
    where the ``k``-th start root arrives; it is ``None`` for open paths.
    ``vertex_roots[i]`` are the transported roots at ``path[i]``.
    """

    path: tuple
    permutation: tuple | None
    start_roots: np.ndarray
    end_roots: np.ndarray
    vertex_roots: tuple = field(repr=False)
    step_log: tuple = field(repr=False, default=())


# ---------------------------------------------------------------------------
# univariate


def horner(coeffs: np.ndarray, z: np.ndarray):
    """Value and derivative of a polynomial (lowest coefficient first)."""
    z = np.asarray(z, dtype=complex)
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    for c in coeffs[::-1]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _abs_scale(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``sum |c_k| |z|**k``: the natural scale for residuals at ``z``."""
    return np.polynomial.polynomial.polyval(np.abs(z), np.abs(coeffs))


def relative_residual(coeffs, z) -> np.ndarray:
    p, _ = horner(np.asarray(coeffs, dtype=complex), z)
    return np.abs(p) / np.maximum(_abs_scale(np.asarray(coeffs), z), 1e-300)


def newton_polish(coeffs: np.ndarray, z: np.ndarray, tol: float = 1e-14, max_iter: int = 8):
    """Vectorized Newton; returns (roots, converged mask)."""
    z = np.array(z, dtype=complex)
    conv = np.zeros(z.shape, dtype=bool)
    for _ in range(max_iter):
        p, dp = horner(coeffs, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            dz = np.where(dp != 0, p / dp, 0)
        z = z - dz
        conv = np.abs(dz) <= tol * np.maximum(1.0, np.abs(z))
        if conv.all():
            break
    return z, conv


def _aberth(c: np.ndarray, max_iter: int, rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    n = len(c) - 1
    monic = c / c[-1]
    # Cauchy-type radius: roots lie in |z| <= 1 + max|a_k|; start near geometric mean.
    radius = abs(monic[0]) ** (1.0 / n) if monic[0] != 0 else 1.0
    radius = max(radius, 1e-3)
    angles = 2 * np.pi * (np.arange(n) + 0.25) / n + 0.4 + 0.1 * rng.random()
    z = radius * np.exp(1j * angles) * (1 + 0.01 * rng.standard_normal(n))
    z = z - monic[n - 1] / n  # centre on the root mean
    done = np.zeros(n, dtype=bool)
    for _ in range(max_iter):
        p, dp = horner(monic, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0)
            s = inv.sum(axis=1)
            step = w / (1 - w * s)
        step = np.where(np.isfinite(step) & ~done, step, 0)
        z = z - step
        done |= np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(z))
        done |= p == 0
        if done.all():
            return z, True
    return z, False


def _cluster(z: np.ndarray) -> list[list[int]]:
    n = len(z)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) < CLUSTER_REL * max(1.0, abs(z[i])):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def uni_roots(P: UniPoly | Sequence[complex], max_iter: int = 500, seed: int = 0) -> RootSet:
    """All complex roots of ``P`` with multiplicities (Aberth–Ehrlich).

    Roots closer than ``1e-7 * max(1, |root|)`` are reported as one root
    with multiplicity.  Raises NoConvergence if the iteration stalls with
    unacceptable residuals.
    """
    c = P.coeffs if isinstance(P, UniPoly) else np.asarray(P, dtype=complex)
    c = UniPoly(c).coeffs
    if not np.any(c):
        raise ValueError("zero polynomial has no finite root set")
    n = len(c) - 1
    if n == 0:
        return RootSet((), (), ())
    # Exact zero roots are split off first.
    k0 = int(np.argmax(c != 0))
    core = c[k0:]
    rng = np.random.default_rng(seed)
    if len(core) == 1:
        z = np.zeros(0, dtype=complex)
    elif len(core) == 2:
        z = np.array([-core[0] / core[1]])
    else:
        z, ok = _aberth(core, max_iter, rng)
        if not ok and np.max(relative_residual(core, z)) > 1e-8:
            raise NoConvergence("Aberth iteration did not converge")
    z = np.concatenate([z, np.zeros(k0, dtype=complex)])
    roots, mults, res = [], [], []
    for grp in _cluster(z):
        if len(grp) == 1:
            r, _ = newton_polish(c, z[grp], tol=1e-15, max_iter=4)
            r = complex(r[0])
        else:
            r = complex(np.mean(z[grp]))
        roots.append(r)
        mults.append(len(grp))
        res.append(float(abs(horner(c, np.array([r]))[0][0])))
    order = sorted(range(len(roots)), key=lambda i: (roots[i].real, roots[i].imag))
    return RootSet(tuple(roots[i] for i in order), tuple(mults[i] for i in order), tuple(res[i] for i in order))


def sorted_roots(coeffs) -> np.ndarray:
    """Simple roots sorted by (real, imag); raises if any root is repeated."""
    rs = uni_roots(coeffs)
    if not rs.simple():
        raise NoConvergence("repeated root where simple roots were required")
    return np.array(rs.roots, dtype=complex)


# ---------------------------------------------------------------------------
# bivariate systems


def _unitary2(rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _rel_res2(P: BiPoly, x, y) -> float:
    ax, ay = abs(x), abs(y)
    i = np.arange(P.c.shape[0])[:, None]
    j = np.arange(P.c.shape[1])[None, :]
    scale = float(np.sum(np.abs(P.c) * ax**i * ay**j))
    return abs(P(x, y)) / max(scale, 1e-300)


def newton2(A: BiPoly, B: BiPoly, x: complex, y: complex, iters: int = 30, tol: float = 1e-15):
    """2x2 Newton polish of a common zero of ``A`` and ``B``."""
    Ax, Ay, Bx, By = A.dx(), A.dy(), B.dx(), B.dy()
    for _ in range(iters):
        f = np.array([A(x, y), B(x, y)])
        J = np.array([[Ax(x, y), Ay(x, y)], [Bx(x, y), By(x, y)]])
        try:
            d = np.linalg.solve(J, f)
        except np.linalg.LinAlgError:
            break
        x, y = x - d[0], y - d[1]
        if np.max(np.abs(d)) <= tol * max(1.0, abs(x), abs(y)):
            break
    return complex(x), complex(y)


def _hadamard_bound(A: BiPoly, B: BiPoly, x: complex) -> float:
    ca = np.abs(A.y_coeffs(np.asarray(x)))
    cb = np.abs(B.y_coeffs(np.asarray(x)))
    na, nb = np.linalg.norm(ca), np.linalg.norm(cb)
    return float(na ** (len(cb) - 1) * nb ** (len(ca) - 1))


def solve2(A: BiPoly, B: BiPoly, seed: int = 0, residual_tol: float = 1e-10,
           separation: float = 1e-8) -> list[tuple[complex, complex]]:
    """All isolated common zeros of two affine polynomials.

    A seeded unitary change of coordinates makes the ``y``-leading
    coefficients constant; the ``y``-resultant is then solved in ``x`` and
    each root lifted to the common ``y``-roots, followed by a joint 2x2
    Newton polish.  Raises PositiveDimensional when the resultant vanishes
    identically.
    """
    if A.is_zero() or B.is_zero():
        raise PositiveDimensional("zero polynomial")
    rng = np.random.default_rng(seed)
    M = _unitary2(rng)
    As, Bs = A.linear_change(M), B.linear_change(M)
    As = As * (1.0 / As.scale())
    Bs = Bs * (1.0 / Bs.scale())
    if As.degree_y < 1 and Bs.degree_y < 1:
        raise PositiveDimensional("both polynomials are constant in y after shear")
    res = resultant_y(As, Bs)
    probes = np.exp(2j * np.pi * np.array([0.1, 0.37, 0.61, 0.83]))
    vals = np.abs(res(probes))
    bounds = np.array([_hadamard_bound(As, Bs, x) for x in probes])
    if np.all(vals <= 1e-10 * bounds):
        raise PositiveDimensional("resultant vanishes identically")
    res = res.trimmed(1e-13)
    if res.degree < 1:
        return []
    xs = uni_roots(res, seed=seed)
    out: list[tuple[complex, complex]] = []
    for x in xs.roots:
        if not np.isfinite(x) or abs(x) > 1e8:
            continue
        cand = []
        for P, Q in ((As, Bs), (Bs, As)):
            cy = P.at_x(x)
            if cy.degree < 1:
                continue
            for y in uni_roots(cy, seed=seed).roots:
                cand.append((_rel_res2(Q, x, y), y))
        cand.sort(key=lambda t: t[0])
        for _, y in cand:
            xp, yp = newton2(As, Bs, x, y)
            if max(_rel_res2(As, xp, yp), _rel_res2(Bs, xp, yp)) > residual_tol:
                continue
            if any(abs(xp - u) + abs(yp - v) < separation * max(1.0, abs(xp), abs(yp)) for u, v in out):
                continue
            out.append((xp, yp))
    # back to the original coordinates
    sols = []
    for u, v in out:
        w = M @ np.array([u, v])
        sols.append((complex(w[0]), complex(w[1])))
    return sols


# ---------------------------------------------------------------------------
# tracking


class _Family:
    def __init__(self, family):
        if isinstance(family, BiPoly):
            self._c = family.y_coeffs
            dxp = family.dx()
            self._d = dxp.y_coeffs
            self.degree = family.degree_y
        elif callable(family):
            self._c = lambda t: np.asarray(family(t), dtype=complex)
            self._d = None
            self.degree = len(self._c(0.0)) - 1
        else:
            raise TypeError("family must be a BiPoly or a callable returning coefficients")

    def coeffs(self, t) -> np.ndarray:
        return np.asarray(self._c(np.asarray(t, dtype=complex)), dtype=complex)

    def dcoeffs(self, t) -> np.ndarray:
        if self._d is not None:
            d = np.asarray(self._d(np.asarray(t, dtype=complex)), dtype=complex)
            out = np.zeros(self.degree + 1, dtype=complex)
            out[: len(d)] = d
            return out
        h = 1e-6 * max(1.0, abs(t))
        return (self.coeffs(t + h) - self.coeffs(t - h)) / (2 * h)


def _min_sep(z: np.ndarray) -> np.ndarray:
    """Distance from each root to its nearest neighbour."""
    if len(z) < 2:
        return np.full(len(z), np.inf)
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1)


def _tangent(fam: _Family, t: complex, z: np.ndarray) -> np.ndarray:
    c = fam.coeffs(t)
    dc = fam.dcoeffs(t)
    _, py = horner(c, z)
    pt, _ = horner(dc, z)
    return -pt / py


def match_permutation(start: np.ndarray, end: np.ndarray, tol: float = 1e-8) -> tuple:
    """``perm[k]`` = index in ``start`` of the root nearest ``end[k]``; must be a bijection."""
    perm = []
    for z in end:
        d = np.abs(start - z)
        j = int(np.argmin(d))
        if d[j] > tol * max(1.0, abs(z)):
            raise NoConvergence("loop end roots do not return to the start set")
        perm.append(j)
    if sorted(perm) != list(range(len(start))):
        raise NoConvergence("loop transport is not a bijection")
    return tuple(perm)


def track(family, path: Sequence[complex], start, cfg: TrackerConfig = TrackerConfig()) -> PathTrace:
    """Transport the roots of ``family(t)`` along the polyline ``path``.

    ``family`` is a BiPoly in (t, y) or a callable returning coefficients in
    ``y`` (lowest first).  ``start`` is a RootSet (simple roots) or an array
    of roots at ``path[0]``.  A tangent predictor is followed by Newton
    correction; a step is accepted only if every corrected root lies within
    ``safety * sep / 2`` of its prediction, where ``sep`` is the smallest
    distance between predicted roots.
    """
    fam = _Family(family)
    pts = [complex(p) for p in path]
    if len(pts) < 2:
        raise ValueError("path needs at least two vertices")
    if isinstance(start, RootSet):
        if not start.simple():
            raise ValueError("start roots must be simple")
        z = np.array(start.roots, dtype=complex)
    else:
        z = np.array(start, dtype=complex)
    z, ok = newton_polish(fam.coeffs(pts[0]), z, tol=cfg.newton_tol, max_iter=cfg.max_iter)
    if not ok.all():
        raise NoConvergence("start roots are not certified")
    z0 = z.copy()
    lengths = [abs(b - a) for a, b in zip(pts, pts[1:])]
    total = sum(lengths)
    if total == 0:
        raise ValueError("degenerate path")
    hmax = cfg.initial_step * total
    hmin = cfg.min_step * total
    vertex_roots = [z.copy()]
    log = []
    h = hmax
    for a, b, L in zip(pts, pts[1:], lengths):
        if L == 0:
            vertex_roots.append(z.copy())
            continue
        u = (b - a) / L
        s = 0.0
        acc = rej = 0
        hlo = np.inf
        while s < L * (1 - 1e-15):
            h = min(h, L - s)
            t = a + s * u
            tn = a + (s + h) * u if s + h < L else b
            pred = z + _tangent(fam, t, z) * (tn - t)
            sep = _min_sep(pred)
            corr, conv = newton_polish(fam.coeffs(tn), pred, tol=cfg.newton_tol,
                                       max_iter=min(cfg.max_iter, 12))
            good = conv.all() and np.all(np.abs(corr - pred) <= cfg.safety * sep / 2)
            if good:
                z = corr
                s += h
                acc += 1
                hlo = min(hlo, h)
                h = min(2 * h, hmax)
            else:
                rej += 1
                h /= 2
                if h < hmin:
                    raise StepUnderflow(f"step underflow near t = {t!r}")
        vertex_roots.append(z.copy())
        log.append((acc, rej, hlo))
    perm = None
    if abs(pts[-1] - pts[0]) <= 1e-14 * max(1.0, abs(pts[0])):
        perm = match_permutation(z0, z)
    return PathTrace(tuple(pts), perm, z0, z, tuple(vertex_roots), tuple(log))


def circle_polyline(center: complex, radius: float, start_angle: float = 0.0,
                    turns: int = 1, max_angle_deg: float = 15.0) -> list[complex]:
    """Closed counterclockwise polygon (``turns < 0`` runs clockwise)."""
    n = int(np.ceil(360.0 * abs(turns) / max_angle_deg))
    ang = start_angle + np.sign(turns) * 2 * np.pi * abs(turns) * np.arange(n + 1) / n
    pts = center + radius * np.exp(1j * ang)
    pts[-1] = pts[0]
    return [complex(p) for p in pts]
