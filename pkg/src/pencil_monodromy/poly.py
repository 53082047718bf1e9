"""Polynomial carriers: homogeneous trivariate, affine bivariate, univariate.

Homogeneous input polynomials are ingested with exact rational real and
imaginary parts (kept for hashing and serialization); all analysis runs on
complex doubles.  Bivariate polynomials are dense coefficient grids
``c[i, j]`` of ``x**i * y**j``, i.e. a polynomial in ``y`` whose
coefficients are the columns, read as polynomials in ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping

import numpy as np
from scipy.signal import convolve2d

from .errors import InadmissibleChart, SpecError

Exps = tuple[int, int, int]


def _parse_rational(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecError(f"bad rational {v!r}") from exc
    raise SpecError(f"coefficients must be 'num/den' strings or ints, got {v!r}")


def _frac_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


@dataclass(frozen=True, eq=False)
class MultiPoly:
    """Homogeneous polynomial in (x, y, z)."""

    degree: int
    terms: Mapping[Exps, complex]
    exact: tuple = field(default=(), repr=False)

    def __post_init__(self):
        clean = {}
        for e, c in self.terms.items():
            e = tuple(int(v) for v in e)
            if len(e) != 3 or min(e) < 0 or sum(e) != self.degree:
                raise SpecError(f"exponent {e} does not match degree {self.degree}")
            c = complex(c)
            if c != 0:
                clean[e] = clean.get(e, 0) + c
        object.__setattr__(self, "terms", {e: c for e, c in sorted(clean.items()) if c != 0})

    # construction -------------------------------------------------------
    @classmethod
    def from_records(cls, records: Iterable[Mapping]) -> "MultiPoly":
        exact = {}
        degree = None
        for rec in records:
            try:
                e = tuple(int(v) for v in rec["exps"])
            except (KeyError, TypeError, ValueError) as exc:
                raise SpecError(f"bad term record {rec!r}") from exc
            if len(e) != 3 or min(e) < 0:
                raise SpecError(f"bad exponent triple {rec.get('exps')!r}")
            if degree is None:
                degree = sum(e)
            elif sum(e) != degree:
                raise SpecError("terms of mixed degree")
            re = _parse_rational(rec.get("re", 0))
            im = _parse_rational(rec.get("im", 0))
            old = exact.get(e, (Fraction(0), Fraction(0)))
            exact[e] = (old[0] + re, old[1] + im)
        exact = {e: v for e, v in exact.items() if v != (0, 0)}
        if degree is None or not exact:
            raise SpecError("polynomial has no nonzero terms")
        terms = {e: complex(float(r), float(i)) for e, (r, i) in exact.items()}
        ex = tuple(sorted((e, r, i) for e, (r, i) in exact.items()))
        return cls(degree, terms, ex)

    @classmethod
    def from_dict(cls, terms: Mapping[Exps, complex]) -> "MultiPoly":
        if not terms:
            raise SpecError("empty polynomial")
        deg = sum(next(iter(terms)))
        return cls(deg, dict(terms))

    def to_records(self) -> list[dict]:
        if self.exact:
            return [{"exps": list(e), "re": _frac_str(r), "im": _frac_str(i)} for e, r, i in self.exact]
        out = []
        for e, c in self.terms.items():
            out.append({"exps": list(e), "re": _frac_str(Fraction(c.real).limit_denominator(10**12)),
                        "im": _frac_str(Fraction(c.imag).limit_denominator(10**12))})
        return out

    # arithmetic ---------------------------------------------------------
    def __mul__(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            out: dict = {}
            for (e1, c1), (e2, c2) in product(self.terms.items(), other.terms.items()):
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                out[e] = out.get(e, 0) + c1 * c2
            return MultiPoly(self.degree + other.degree, out)
        return MultiPoly(self.degree, {e: c * other for e, c in self.terms.items()})

    __rmul__ = __mul__

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        if other.degree != self.degree and other.terms and self.terms:
            raise ValueError("cannot add homogeneous polynomials of different degree")
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return MultiPoly(max(self.degree, other.degree) if self.terms and other.terms
                         else (self.degree if self.terms else other.degree), out)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + other * (-1)

    def __pow__(self, k: int) -> "MultiPoly":
        out = MultiPoly(0, {(0, 0, 0): 1})
        for _ in range(k):
            out = out * self
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def scale(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    # calculus / evaluation ---------------------------------------------
    def evaluate(self, point) -> complex | np.ndarray:
        return evaluate(self, point)

    def partial(self, var: int) -> "MultiPoly":
        return partial(self, var)

    def canonical(self) -> list:
        """Hashable canonical content (exact when available)."""
        if self.exact:
            return [[list(e), _frac_str(r), _frac_str(i)] for e, r, i in self.exact]
        return [[list(e), repr(c.real), repr(c.imag)] for e, c in self.terms.items()]


def evaluate(P: MultiPoly, point) -> complex | np.ndarray:
    """Value of ``P`` at one homogeneous point or an array of shape (..., 3)."""
    pt = np.asarray(point, dtype=complex)
    x, y, z = pt[..., 0], pt[..., 1], pt[..., 2]
    val = np.zeros(pt.shape[:-1], dtype=complex)
    for (i, j, k), c in P.terms.items():
        val = val + c * x**i * y**j * z**k
    if val.ndim == 0:
        return complex(val)
    return val


def partial(P: MultiPoly, var: int) -> MultiPoly:
    """Formal partial derivative with respect to variable ``var`` (0, 1, 2)."""
    if P.degree < 1:
        raise ValueError("derivative of a constant")
    out = {}
    for e, c in P.terms.items():
        if e[var] > 0:
            f = list(e)
            f[var] -= 1
            out[tuple(f)] = out.get(tuple(f), 0) + c * e[var]
    return MultiPoly(P.degree - 1, out)


def monomials(degree: int) -> list[Exps]:
    return [(i, j, degree - i - j) for i in range(degree, -1, -1) for j in range(degree - i, -1, -1)]


# ---------------------------------------------------------------------------
# univariate


@dataclass(frozen=True, eq=False)
class UniPoly:
    """Dense univariate polynomial, lowest degree first."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        nz = np.nonzero(c)[0]
        c = c[: nz[-1] + 1] if nz.size else c[:1] * 0
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if np.any(self.coeffs) else -1

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.coeffs)

    def deriv(self) -> "UniPoly":
        return UniPoly(np.polynomial.polynomial.polyder(self.coeffs) if len(self.coeffs) > 1 else [0])

    def trimmed(self, rel: float) -> "UniPoly":
        """Drop leading coefficients below ``rel`` times the largest one."""
        c = self.coeffs
        if not np.any(c):
            return self
        big = np.max(np.abs(c))
        k = len(c)
        while k > 1 and abs(c[k - 1]) <= rel * big:
            k -= 1
        return UniPoly(c[:k])


# ---------------------------------------------------------------------------
# bivariate


@dataclass(frozen=True, eq=False)
class BiPoly:
    """Affine polynomial ``sum c[i, j] x**i y**j``."""

    c: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.c, dtype=complex))
        rows = np.nonzero(np.any(a != 0, axis=1))[0]
        cols = np.nonzero(np.any(a != 0, axis=0))[0]
        if rows.size == 0:
            a = np.zeros((1, 1), dtype=complex)
        else:
            a = a[: rows[-1] + 1, : cols[-1] + 1]
        object.__setattr__(self, "c", a)

    @property
    def degree_y(self) -> int:
        return self.c.shape[1] - 1 if np.any(self.c) else -1

    @property
    def degree_x(self) -> int:
        return self.c.shape[0] - 1 if np.any(self.c) else -1

    @property
    def total_degree(self) -> int:
        i, j = np.nonzero(self.c)
        return int(np.max(i + j)) if i.size else -1

    def is_zero(self) -> bool:
        return not np.any(self.c)

    def scale(self) -> float:
        return float(np.max(np.abs(self.c)))

    def __mul__(self, other):
        if isinstance(other, BiPoly):
            return BiPoly(convolve2d(self.c, other.c))
        return BiPoly(self.c * other)

    __rmul__ = __mul__

    def __add__(self, other: "BiPoly") -> "BiPoly":
        r = max(self.c.shape[0], other.c.shape[0])
        s = max(self.c.shape[1], other.c.shape[1])
        out = np.zeros((r, s), dtype=complex)
        out[: self.c.shape[0], : self.c.shape[1]] += self.c
        out[: other.c.shape[0], : other.c.shape[1]] += other.c
        return BiPoly(out)

    def __sub__(self, other: "BiPoly") -> "BiPoly":
        return self + other * (-1)

    def __pow__(self, k: int) -> "BiPoly":
        out = BiPoly(np.ones((1, 1)))
        for _ in range(k):
            out = out * self
        return out

    def dx(self) -> "BiPoly":
        if self.c.shape[0] < 2:
            return BiPoly(np.zeros((1, 1)))
        return BiPoly(self.c[1:] * np.arange(1, self.c.shape[0])[:, None])

    def dy(self) -> "BiPoly":
        if self.c.shape[1] < 2:
            return BiPoly(np.zeros((1, 1)))
        return BiPoly(self.c[:, 1:] * np.arange(1, self.c.shape[1])[None, :])

    def y_coeffs(self, x) -> np.ndarray:
        """Coefficients in ``y`` (lowest first) at each value of ``x``.

        Shape ``x.shape + (degree_y + 1,)``.
        """
        x = np.asarray(x, dtype=complex)
        powers = x[..., None] ** np.arange(self.c.shape[0])
        return powers @ self.c

    def __call__(self, x, y):
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        cy = self.y_coeffs(x)
        val = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for j in range(cy.shape[-1] - 1, -1, -1):
            val = val * y + cy[..., j]
        return val if val.ndim else complex(val)

    def at_x(self, x0: complex) -> UniPoly:
        return UniPoly(self.y_coeffs(np.asarray(x0)))

    def swap(self) -> "BiPoly":
        return BiPoly(self.c.T)

    def linear_change(self, m: np.ndarray) -> "BiPoly":
        """Substitute ``(x, y) -> m @ (x', y')`` (no translation)."""
        lx = BiPoly(np.array([[0, m[0, 1]], [m[0, 0], 0]]))
        ly = BiPoly(np.array([[0, m[1, 1]], [m[1, 0], 0]]))
        return _compose_bi(self.c, lx, ly)


def _compose_bi(c: np.ndarray, lx: BiPoly, ly: BiPoly) -> BiPoly:
    px = [BiPoly(np.ones((1, 1)))]
    for _ in range(c.shape[0] - 1):
        px.append(px[-1] * lx)
    py = [BiPoly(np.ones((1, 1)))]
    for _ in range(c.shape[1] - 1):
        py.append(py[-1] * ly)
    out = BiPoly(np.zeros((1, 1)))
    for i in range(c.shape[0]):
        for j in range(c.shape[1]):
            if c[i, j] != 0:
                out = out + (px[i] * py[j]) * c[i, j]
    return out


# ---------------------------------------------------------------------------
# charts


@dataclass(frozen=True, eq=False)
class ChartMap:
    """Projective linear change followed by ``z = 1``.

    A chart point ``(x, y)`` corresponds to the homogeneous point
    ``matrix @ (x, y, 1)``.
    """

    matrix: np.ndarray
    label: str = "custom"

    @classmethod
    def standard(cls, axis: int) -> "ChartMap":
        """Affine chart ``{coord[axis] = 1}`` with the other two coordinates in order."""
        others = [i for i in range(3) if i != axis]
        m = np.zeros((3, 3), dtype=complex)
        m[others[0], 0] = 1
        m[others[1], 1] = 1
        m[axis, 2] = 1
        return cls(m, label="xyz"[axis] + "=1")

    @classmethod
    def random(cls, rng: np.random.Generator, label: str = "random") -> "ChartMap":
        z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        q, r = np.linalg.qr(z)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        return cls(q, label=label)

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.matrix))

    def dehomogenize(self, P: MultiPoly) -> BiPoly:
        a = self.matrix
        forms = [BiPoly(np.array([[a[r, 2], a[r, 1]], [a[r, 0], 0]])) for r in range(3)]
        pows = []
        for f in forms:
            lst = [BiPoly(np.ones((1, 1)))]
            for _ in range(P.degree):
                lst.append(lst[-1] * f)
            pows.append(lst)
        out = BiPoly(np.zeros((1, 1)))
        for (i, j, k), c in P.terms.items():
            out = out + (pows[0][i] * pows[1][j] * pows[2][k]) * c
        return out

    def to_chart(self, point) -> tuple[complex, complex]:
        v = np.linalg.solve(self.matrix, np.asarray(point, dtype=complex))
        return complex(v[0] / v[2]), complex(v[1] / v[2])

    def chart_z(self, point) -> float:
        """|z| of the normalized chart preimage (small means near infinity)."""
        v = np.linalg.solve(self.matrix, np.asarray(point, dtype=complex))
        return float(abs(v[2]) / np.linalg.norm(v))

    def from_chart(self, x, y) -> np.ndarray:
        return self.matrix @ np.array([x, y, 1], dtype=complex)


def normalize_projective(point) -> np.ndarray:
    """Scale so that the largest-modulus coordinate equals 1."""
    v = np.asarray(point, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    return v / v[k]


# ---------------------------------------------------------------------------
# fiber polynomial, resultants, discriminants


def pencil_member(Fc: BiPoly, Gc: BiPoly, p: int, q: int, alpha: complex, beta: complex) -> BiPoly:
    """``alpha * F**p - beta * G**q`` for already dehomogenized F, G."""
    return (Fc**p) * alpha - (Gc**q) * beta


def fiber_polynomial(spec, b: complex, chart: ChartMap) -> BiPoly:
    """Dehomogenized ``F**p - b * G**q`` in ``chart``.

    Raises InadmissibleChart when the ``y**m`` coefficient vanishes.
    """
    if b == 0 or not np.isfinite(b):
        raise ValueError("fiber over 0 or infinity is not a regular fiber")
    Fc = chart.dehomogenize(spec.F)
    Gc = chart.dehomogenize(spec.G)
    P = pencil_member(Fc, Gc, spec.p, spec.q, 1.0, b)
    m = spec.p * spec.F.degree
    lead = P.c[0, m] if P.c.shape[1] > m else 0
    if abs(lead) <= 1e-10 * P.scale():
        raise InadmissibleChart("leading y coefficient vanishes in this chart")
    return P


def _sylvester(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sylvester matrix of two coefficient vectors given highest degree first."""
    m = len(a) - 1
    n = len(b) - 1
    S = np.zeros((m + n, m + n), dtype=complex)
    for i in range(n):
        S[i, i : i + m + 1] = a
    for i in range(m):
        S[n + i, i : i + n + 1] = b
    return S


def _sylvester_det(a: np.ndarray, b: np.ndarray) -> complex:
    m = len(a) - 1
    n = len(b) - 1
    if m + n == 0:
        return 1.0 + 0j
    return complex(np.linalg.det(_sylvester(a, b)))


def resultant_y(A: BiPoly, B: BiPoly, radius: float = 1.0) -> UniPoly:
    """Resultant with respect to ``y``, as a polynomial in ``x``.

    Evaluated as Sylvester determinants (LU with partial pivoting) at
    points of a circle and interpolated by FFT.  The nominal ``y``-degrees
    are kept fixed so leading-coefficient drops show up as roots.
    """
    if A.is_zero() or B.is_zero():
        raise ValueError("resultant of a zero polynomial")
    ma, mb = A.degree_y, B.degree_y
    bound = max(A.total_degree, 0) * max(B.total_degree, 0)
    bound = max(bound, A.degree_x * mb + B.degree_x * ma, 0)
    n = bound + 1
    w = radius * np.exp(2j * np.pi * np.arange(n) / n)
    ca = A.y_coeffs(w)[:, ::-1]
    cb = B.y_coeffs(w)[:, ::-1]
    vals = np.array([_sylvester_det(ca[k], cb[k]) for k in range(n)])
    coeffs = np.fft.fft(vals) / n
    coeffs = coeffs / radius ** np.arange(n)
    big = np.max(np.abs(coeffs))
    coeffs[np.abs(coeffs) < 1e-13 * big] = 0
    return UniPoly(coeffs)


def discriminant_y(P: BiPoly, radius: float = 1.0) -> UniPoly:
    """``(-1)**(m(m-1)/2) * res_y(P, P_y) / lc`` with ``lc`` the constant ``y**m`` coefficient."""
    m = P.degree_y
    if m < 2:
        raise ValueError("discriminant needs y-degree >= 2")
    lead = P.c[:, m]
    if np.any(lead[1:] != 0):
        raise ValueError("y-leading coefficient is not constant")
    res = resultant_y(P, P.dy(), radius=radius)
    sign = -1 if (m * (m - 1) // 2) % 2 else 1
    return UniPoly(res.coeffs * sign / lead[0])
