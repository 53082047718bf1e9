"""Genericity certificates and critical data for ``f = F**p / G**q``.

Checks performed on a pencil:

* ``{F = 0}`` and ``{G = 0}`` are smooth curves;
* they meet transversally in exactly ``deg F * deg G`` base points;
* every critical point of ``f`` off ``{FG = 0}`` is nondegenerate;
* the critical values are pairwise distinct.

All "nonzero" decisions use scale-relative thresholds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import gcd

import mpmath
import numpy as np

from .errors import Degenerate, Inconclusive, NoConvergence, PositiveDimensional, SpecError, ValueCollision
from .numsolve import solve2
from .poly import ChartMap, MultiPoly, evaluate, monomials, normalize_projective, partial

REL_TOL = 1e-8
VALUE_SEPARATION = 1e-6
DEDUP_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class PencilSpec:
    """The pair ``(F, G)`` with exponents ``(p, q)`` and ``deg F = q d``, ``deg G = p d``."""

    F: MultiPoly
    G: MultiPoly
    p: int
    q: int
    d: int

    def __post_init__(self):
        for name in ("p", "q", "d"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise SpecError(f"{name} must be a positive integer")
        if gcd(self.p, self.q) != 1:
            raise SpecError("p and q must be coprime")
        if self.F.degree != self.q * self.d:
            raise SpecError(f"deg F = {self.F.degree}, expected q*d = {self.q * self.d}")
        if self.G.degree != self.p * self.d:
            raise SpecError(f"deg G = {self.G.degree}, expected p*d = {self.p * self.d}")

    @property
    def fiber_degree(self) -> int:
        """Degree ``p q d`` of the level curves ``F**p = b G**q``."""
        return self.p * self.q * self.d

    @property
    def n_base_points(self) -> int:
        return self.F.degree * self.G.degree

    @classmethod
    def from_config(cls, cfg: dict) -> "PencilSpec":
        try:
            F = MultiPoly.from_records(cfg["F"])
            G = MultiPoly.from_records(cfg["G"])
            p, q, d = cfg["p"], cfg["q"], cfg["d"]
        except KeyError as exc:
            raise SpecError(f"missing key {exc}") from exc
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in (p, q, d)):
            raise SpecError("p, q, d must be integers")
        return cls(F, G, p, q, d)

    def to_config(self) -> dict:
        return {"p": self.p, "q": self.q, "d": self.d, "F": self.F.to_records(), "G": self.G.to_records()}

    def canonical(self) -> str:
        return json.dumps({"p": self.p, "q": self.q, "d": self.d, "F": self.F.canonical(),
                           "G": self.G.canonical()}, sort_keys=True, separators=(",", ":"))

    def f(self, point) -> complex:
        """``F**p / G**q`` at a homogeneous point."""
        pt = normalize_projective(point)
        return evaluate(self.F, pt) ** self.p / evaluate(self.G, pt) ** self.q


@dataclass(frozen=True)
class Verdict:
    passed: bool
    witnesses: tuple = ()
    detail: str = ""

    def to_json(self) -> dict:
        return {"passed": self.passed, "witnesses": [_pt_json(w) for w in self.witnesses], "detail": self.detail}


@dataclass(frozen=True, eq=False)
class CriticalData:
    """Critical points (homogeneous, normalized), values, Hessian certificates, A, base points."""

    points: tuple
    values: tuple
    hessian_dets: tuple
    A: frozenset
    base_points: tuple
    precision: str = "double"

    @property
    def r(self) -> int:
        return len(self.values)

    def all_values(self) -> list:
        """Finite critical values followed by 0 / inf markers from A."""
        return list(self.values) + sorted(self.A, key=str)

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "points": [_pt_json(p) for p in self.points],
            "values": [_c_json(v) for v in self.values],
            "hessian_dets": [_c_json(v) for v in self.hessian_dets],
            "A": sorted(str(a) for a in self.A),
            "base_points": [_pt_json(p) for p in self.base_points],
            "precision": self.precision,
        }


@dataclass(frozen=True)
class GenericityReport:
    smooth_F: Verdict
    smooth_G: Verdict
    transversal: Verdict
    nondegenerate: Verdict
    distinct_values: Verdict

    @property
    def passed(self) -> bool:
        return all(v.passed for v in (self.smooth_F, self.smooth_G, self.transversal,
                                      self.nondegenerate, self.distinct_values))

    def to_json(self) -> dict:
        out = {k: getattr(self, k).to_json() for k in
               ("smooth_F", "smooth_G", "transversal", "nondegenerate", "distinct_values")}
        out["passed"] = self.passed
        return out


def _c_json(z) -> list:
    z = complex(z)
    return [float(f"{z.real:.12g}"), float(f"{z.imag:.12g}")]


def _pt_json(p) -> list:
    if isinstance(p, str):
        return [p]
    return [_c_json(z) for z in np.atleast_1d(p)]


# ---------------------------------------------------------------------------
# helpers


def _abs_poly_scale(P: MultiPoly, pt) -> float:
    a = np.abs(np.asarray(pt, dtype=complex))
    return float(sum(abs(c) * a[0] ** i * a[1] ** j * a[2] ** k for (i, j, k), c in P.terms.items()))


def _rel_value(P: MultiPoly, pt) -> float:
    return abs(evaluate(P, pt)) / max(_abs_poly_scale(P, pt), 1e-300)


def _dedup_projective(points: list, tol: float = DEDUP_TOL) -> list:
    out: list = []
    for p in points:
        p = normalize_projective(p)
        if not any(np.max(np.abs(p - q)) < tol for q in out):
            out.append(p)
    return out


def _solve_in_charts(eq_pairs_builder, seed: int) -> list:
    """Solve a homogeneous system in the 3 standard charts; returns normalized points."""
    found = []
    for axis in range(3):
        chart = ChartMap.standard(axis)
        A, B = eq_pairs_builder(chart)
        try:
            sols = solve2(A, B, seed=seed + axis)
        except NoConvergence as exc:
            raise Inconclusive(f"solver failed in chart {chart.label}") from exc
        for x, y in sols:
            found.append(chart.from_chart(x, y))
    return _dedup_projective(found)


# ---------------------------------------------------------------------------
# checks


def critical_set_A(p: int, q: int) -> frozenset:
    """Exceptional critical values among {0, inf}: 0 iff p > 1, inf iff q > 1."""
    if gcd(p, q) != 1:
        raise SpecError("p and q must be coprime")
    out = set()
    if p > 1:
        out.add(0)
    if q > 1:
        out.add("inf")
    return frozenset(out)


def check_smooth(P: MultiPoly, seed: int = 0) -> Verdict:
    """Smoothness of ``{P = 0}``: no projective zero of the full gradient.

    Two seeded random combinations of the partials are solved in each
    standard chart; candidates where all partials vanish are witnesses.
    """
    if P.degree < 1:
        raise ValueError("constant polynomial")
    if P.degree == 1:
        return Verdict(True, detail="line")
    grads = [partial(P, k) for k in range(3)]
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))

    def builder(chart):
        g = [chart.dehomogenize(gr) for gr in grads]
        return (g[0] * w[0, 0] + g[1] * w[0, 1] + g[2] * w[0, 2],
                g[0] * w[1, 0] + g[1] * w[1, 1] + g[2] * w[1, 2])

    try:
        cand = _solve_in_charts(builder, seed)
    except PositiveDimensional:
        return Verdict(False, detail="gradient vanishes along a curve")
    wit = [pt for pt in cand if all(_rel_value(g, pt) <= REL_TOL for g in grads if not g.is_zero())]
    return Verdict(not wit, tuple(wit), "" if not wit else "singular points found")


def check_transversal(F: MultiPoly, G: MultiPoly, seed: int = 0) -> tuple[Verdict, list]:
    """Transversality of ``{F = 0}`` and ``{G = 0}``; returns (verdict, base points).

    Raises CountMismatch when all points found are transverse but fewer
    than ``deg F * deg G`` of them exist.
    """
    from .errors import CountMismatch

    def builder(chart):
        return chart.dehomogenize(F), chart.dehomogenize(G)

    try:
        pts = _solve_in_charts(builder, seed)
    except PositiveDimensional:
        return Verdict(False, detail="common component"), []
    gF = [partial(F, k) for k in range(3)] if F.degree else None
    gG = [partial(G, k) for k in range(3)] if G.degree else None
    bad = []
    for pt in pts:
        rows = []
        for grads, P in ((gF, F), (gG, G)):
            v = np.array([evaluate(g, pt) for g in grads])
            scale = max(sum(abs(c) for c in P.terms.values()), 1e-300)
            rows.append(v / scale)
        s = np.linalg.svd(np.array(rows), compute_uv=False)
        if s[-1] <= REL_TOL:
            bad.append(pt)
    expected = F.degree * G.degree
    if bad:
        return Verdict(False, tuple(bad), "tangential intersection"), pts
    if len(pts) != expected:
        raise CountMismatch(f"found {len(pts)} base points, expected {expected}")
    return Verdict(True, detail=f"{len(pts)} transverse base points"), pts


def _hessian(spec: PencilSpec, pt) -> tuple[complex, float]:
    """Determinant of the affine Hessian of f at a critical point, and its scale."""
    axis = int(np.argmax(np.abs(pt)))
    chart = ChartMap.standard(axis)
    x, y = chart.to_chart(pt)
    Fc, Gc = chart.dehomogenize(spec.F), chart.dehomogenize(spec.G)
    p, q = spec.p, spec.q
    F0, G0 = Fc(x, y), Gc(x, y)
    dF = [Fc.dx(), Fc.dy()]
    dG = [Gc.dx(), Gc.dy()]
    Fi = [d(x, y) for d in dF]
    Gi = [d(x, y) for d in dG]
    Fij = [[dF[0].dx()(x, y), dF[0].dy()(x, y)], [dF[1].dx()(x, y), dF[1].dy()(x, y)]]
    Gij = [[dG[0].dx()(x, y), dG[0].dy()(x, y)], [dG[1].dx()(x, y), dG[1].dy()(x, y)]]
    fval = F0**p / G0**q
    H = np.zeros((2, 2), dtype=complex)
    S = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            terms = [p * Fij[i][j] / F0, -p * Fi[i] * Fi[j] / F0**2,
                     -q * Gij[i][j] / G0, q * Gi[i] * Gi[j] / G0**2]
            H[i, j] = fval * sum(terms)
            S[i, j] = abs(fval) * sum(abs(t) for t in terms)
    det = H[0, 0] * H[1, 1] - H[0, 1] * H[1, 0]
    scale = S[0, 0] * S[1, 1] + S[0, 1] * S[1, 0]
    return complex(det), float(scale)


def _critical_builder(spec: PencilSpec):
    p, q = spec.p, spec.q

    def builder(chart):
        Fc, Gc = chart.dehomogenize(spec.F), chart.dehomogenize(spec.G)
        E1 = Gc * Fc.dx() * p - Fc * Gc.dx() * q
        E2 = Gc * Fc.dy() * p - Fc * Gc.dy() * q
        return E1, E2

    return builder


def _mp_eval(P: MultiPoly, pt):
    x, y, z = pt
    s = mpmath.mpc(0)
    for (i, j, k), c in P.terms.items():
        s += mpmath.mpc(c.real, c.imag) * x**i * y**j * z**k
    return s


def _mp_exact(P: MultiPoly) -> MultiPoly:
    """Terms with exact mpmath coefficients when exact ingestion data is available."""
    return P


def polish_critical_mp(spec: PencilSpec, pt, dps: int = 32, iters: int = 30):
    """Newton-polish a critical point at ``dps`` digits; returns (point, value)."""
    axis = int(np.argmax(np.abs(pt)))
    others = [i for i in range(3) if i != axis]
    p, q = spec.p, spec.q
    terms = {}
    for name, P in (("F", spec.F), ("G", spec.G)):
        if P.exact:
            tt = [(e, mpmath.mpc(mpmath.mpf(r.numerator) / r.denominator,
                                 mpmath.mpf(i.numerator) / i.denominator)) for e, r, i in P.exact]
        else:
            tt = [(e, mpmath.mpc(c.real, c.imag)) for e, c in P.terms.items()]
        terms[name] = tt
    with mpmath.workdps(dps):
        def ev(name, v, der=None):
            s = mpmath.mpc(0)
            for e, c in terms[name]:
                e = list(e)
                coef = c
                if der is not None:
                    if e[der] == 0:
                        continue
                    coef = c * e[der]
                    e[der] -= 1
                s += coef * v[0] ** e[0] * v[1] ** e[1] * v[2] ** e[2]
            return s

        def system(u0, u1):
            v = [mpmath.mpc(0)] * 3
            v[axis] = mpmath.mpc(1)
            v[others[0]], v[others[1]] = u0, u1
            F0, G0 = ev("F", v), ev("G", v)
            return [p * G0 * ev("F", v, others[k]) - q * F0 * ev("G", v, others[k]) for k in range(2)]

        u0 = (mpmath.mpc(complex(pt[others[0]] / pt[axis])), mpmath.mpc(complex(pt[others[1]] / pt[axis])))
        u = mpmath.findroot(system, u0, tol=mpmath.mpf(10) ** (-dps + 4), maxsteps=iters)
        v = [mpmath.mpc(0)] * 3
        v[axis] = mpmath.mpc(1)
        v[others[0]], v[others[1]] = u[0], u[1]
        val = ev("F", v) ** p / ev("G", v) ** q
        return np.array([complex(c) for c in v]), complex(val)


def critical_points(spec: PencilSpec, seed: int = 0, precision: str = "double",
                    strict: bool = True, base_points: list | None = None) -> CriticalData:
    """Critical points of ``f`` off ``{FG = 0}``, with values and Hessian certificates.

    ``precision='double-double'`` re-polishes every point at 32 digits.
    With ``strict`` (default) raises Degenerate / ValueCollision; otherwise
    the caller inspects the certificates.
    """
    if precision not in ("double", "double-double"):
        raise ValueError("precision must be 'double' or 'double-double'")
    cand = _solve_in_charts(_critical_builder(spec), seed)
    pts = [pt for pt in cand if _rel_value(spec.F, pt) > REL_TOL and _rel_value(spec.G, pt) > REL_TOL]
    values, dets, keep = [], [], []
    for pt in pts:
        if precision == "double-double":
            pt, val = polish_critical_mp(spec, pt)
        else:
            val = spec.f(pt)
        pt = normalize_projective(pt)
        det, scale = _hessian(spec, pt)
        keep.append(pt)
        values.append(complex(val))
        dets.append(det)
        if strict and abs(det) <= REL_TOL * scale:
            raise Degenerate(f"degenerate critical point {pt}")
    order = sorted(range(len(values)), key=lambda i: (round(values[i].real, 9), round(values[i].imag, 9)))
    keep = [keep[i] for i in order]
    values = [values[i] for i in order]
    dets = [dets[i] for i in order]
    if strict:
        i, j, dist = _closest_pair(values)
        if i is not None and dist <= VALUE_SEPARATION * max(1.0, abs(values[i])):
            raise ValueCollision(f"critical values {values[i]} and {values[j]} collide")
    if base_points is None:
        _, base_points = check_transversal(spec.F, spec.G, seed=seed)
    return CriticalData(tuple(keep), tuple(values), tuple(dets), critical_set_A(spec.p, spec.q),
                        tuple(base_points), precision)


def _closest_pair(values):
    best = (None, None, np.inf)
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            d = abs(values[i] - values[j])
            if d < best[2]:
                best = (i, j, d)
    return best


def check_genericity(spec: PencilSpec, seed: int = 0, precision: str = "double"
                     ) -> tuple[GenericityReport, CriticalData | None]:
    """Run all five checks; never raises on a failed certificate."""
    sF = check_smooth(spec.F, seed)
    sG = check_smooth(spec.G, seed + 11)
    from .errors import CountMismatch
    try:
        tr, base = check_transversal(spec.F, spec.G, seed)
    except CountMismatch as exc:
        tr, base = Verdict(False, detail=str(exc)), []
    if not (sF.passed and sG.passed and tr.passed):
        skip = Verdict(False, detail="skipped: smoothness/transversality failed")
        return GenericityReport(sF, sG, tr, skip, skip), None
    crit = critical_points(spec, seed, precision, strict=False, base_points=base)
    bad = []
    for pt, det in zip(crit.points, crit.hessian_dets):
        _, scale = _hessian(spec, pt)
        if abs(det) <= REL_TOL * scale:
            bad.append(pt)
    nd = Verdict(not bad, tuple(bad), f"{crit.r} critical points")
    i, j, dist = _closest_pair(list(crit.values))
    if i is not None and dist <= VALUE_SEPARATION * max(1.0, abs(crit.values[i])):
        dv = Verdict(False, (crit.points[i], crit.points[j]), f"min separation {dist:.3g}")
    else:
        dv = Verdict(True, detail=f"min separation {dist:.3g}" if i is not None else "single value")
    return GenericityReport(sF, sG, tr, nd, dv), crit


def singularity_stratum(F: MultiPoly, G: MultiPoly, p: int, q: int, point) -> str:
    """Classify an affine point (chart ``z = 1``) as radial, center, both, or none.

    radial: ``F = G = 0``.  center: ``p G F_x - q F G_x = p G F_y - q F G_y
    = F_x G_y - F_y G_x = 0``.
    """
    x, y = point
    pt = np.array([x, y, 1.0], dtype=complex)
    vals = {}
    for name, P in (("F", F), ("G", G)):
        vals[name] = evaluate(P, pt)
        vals[name + "x"] = evaluate(partial(P, 0), pt) if P.degree else 0
        vals[name + "y"] = evaluate(partial(P, 1), pt) if P.degree else 0
    Fv, Fx, Fy = vals["F"], vals["Fx"], vals["Fy"]
    Gv, Gx, Gy = vals["G"], vals["Gx"], vals["Gy"]
    sF = max(1.0, _abs_poly_scale(F, pt))
    sG = max(1.0, _abs_poly_scale(G, pt))
    tiny = REL_TOL
    radial = abs(Fv) <= tiny * sF and abs(Gv) <= tiny * sG
    eqs = [p * Gv * Fx - q * Fv * Gx, p * Gv * Fy - q * Fv * Gy, Fx * Gy - Fy * Gx]
    center = all(abs(e) <= tiny * sF * sG * (p + q) * deg_scale for e, deg_scale in
                 zip(eqs, (max(F.degree, 1), max(F.degree, 1), max(F.degree * G.degree, 1))))
    if radial and center:
        return "both"
    if radial:
        return "radial"
    if center:
        return "center"
    return "none"


# ---------------------------------------------------------------------------
# seeded instances


def random_poly_records(degree: int, rng: np.random.Generator, bound: int = 5) -> list[dict]:
    recs = []
    for e in monomials(degree):
        re, im = (int(v) for v in rng.integers(-bound, bound + 1, size=2))
        if re == 0 and im == 0:
            re = 1
        recs.append({"exps": list(e), "re": str(re), "im": str(im)})
    return recs


def random_pencil(p: int, q: int, d: int, seed: int, max_tries: int = 50) -> PencilSpec:
    """Seeded pencil with Gaussian-integer coefficients that passes every genericity check."""
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        spec = PencilSpec.from_config({"p": p, "q": q, "d": d,
                                       "F": random_poly_records(q * d, rng),
                                       "G": random_poly_records(p * d, rng)})
        try:
            rep, _ = check_genericity(spec, seed)
        except (Inconclusive, NoConvergence):
            continue
        if rep.passed:
            return spec
    raise Inconclusive("no generic pencil found")
