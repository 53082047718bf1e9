"""Exact integer linear algebra on small matrices.

Everything here works on numpy ``object`` arrays of Python ints so that
intermediate results never overflow.  Sizes in this package stay below a
few hundred rows, so the cubic-time algorithms are fine.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

import numpy as np


def as_int_matrix(a) -> np.ndarray:
    """Copy ``a`` into a 2-D object array of Python ints."""
    arr = np.array(a, dtype=object)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else np.zeros((0, 0), dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        iv = int(v)
        if iv != v:
            raise ValueError(f"non-integer entry {v!r}")
        out[idx] = iv
    return out


def identity(n: int) -> np.ndarray:
    out = np.zeros((n, n), dtype=object)
    for i in range(n):
        out[i, i] = 1
    for idx in np.ndindex(out.shape):
        out[idx] = int(out[idx])
    return out


def zeros(r: int, c: int) -> np.ndarray:
    out = np.empty((r, c), dtype=object)
    out.fill(0)
    return out


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=object)
    b = np.asarray(b, dtype=object)
    return a.dot(b)


def to_int_list(a: np.ndarray) -> list:
    """Row-major nested list of Python ints (JSON friendly)."""
    a = np.asarray(a, dtype=object)
    return [[int(v) for v in row] for row in a]


def is_zero(a: np.ndarray) -> bool:
    return all(v == 0 for v in np.asarray(a, dtype=object).flat)


def equal(a: np.ndarray, b: np.ndarray) -> bool:
    a = np.asarray(a, dtype=object)
    b = np.asarray(b, dtype=object)
    return a.shape == b.shape and all(int(x) == int(y) for x, y in zip(a.flat, b.flat))


def det(a: np.ndarray) -> int:
    """Determinant by Bareiss fraction-free elimination."""
    m = [list(map(int, row)) for row in np.asarray(a, dtype=object)]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def rank_q(a) -> int:
    """Rank over the rationals (fraction-free row reduction)."""
    rows = [list(map(int, row)) for row in np.asarray(a, dtype=object)]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        piv = None
        for i in range(rank, len(rows)):
            if rows[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank]
        for i in range(rank + 1, len(rows)):
            r = rows[i]
            if r[col] != 0:
                f = r[col]
                rows[i] = [x * p[col] - f * y for x, y in zip(r, p)]
                g = 0
                for x in rows[i]:
                    g = gcd(g, x)
                if g > 1:
                    rows[i] = [x // g for x in rows[i]]
        rank += 1
        if rank == len(rows):
            break
    return rank


class RowSpace:
    """Incrementally maintained echelon basis of a rational row space.

    Used by the saturation searches, where vectors arrive one at a time and
    we only need to know whether each one enlarges the span.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self._rows: list[list[int]] = []
        self._pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self._rows)

    def reduce(self, v) -> list[int]:
        v = [int(x) for x in v]
        for row, piv in zip(self._rows, self._pivots):
            if v[piv] != 0:
                f, p = v[piv], row[piv]
                v = [x * p - f * y for x, y in zip(v, row)]
                g = 0
                for x in v:
                    g = gcd(g, x)
                if g > 1:
                    v = [x // g for x in v]
        return v

    def add(self, v) -> bool:
        """Insert ``v``; return True when the rank grew."""
        r = self.reduce(v)
        for i, x in enumerate(r):
            if x != 0:
                self._rows.append(r)
                self._pivots.append(i)
                return True
        return False


def primitive(v) -> list[int]:
    """Divide an integer vector by the gcd of its entries."""
    v = [int(x) for x in v]
    g = 0
    for x in v:
        g = gcd(g, x)
    if g == 0:
        return v
    return [x // g for x in v]


def sign_normalize(v) -> list[int]:
    """Flip sign so that the first nonzero entry is positive."""
    v = [int(x) for x in v]
    for x in v:
        if x != 0:
            return v if x > 0 else [-y for y in v]
    return v


def smith_normal_form(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(U, D, V)`` with ``U @ A @ V == D`` diagonal.

    ``U`` and ``V`` are unimodular.  Diagonal entries are non-negative and
    each divides the next.
    """
    D = as_int_matrix(a).copy()
    r, c = D.shape
    U = identity(r)
    V = identity(c)

    def swap_rows(i, j):
        if i != j:
            D[[i, j], :] = D[[j, i], :]
            U[[i, j], :] = U[[j, i], :]

    def swap_cols(i, j):
        if i != j:
            D[:, [i, j]] = D[:, [j, i]]
            V[:, [i, j]] = V[:, [j, i]]

    t = 0
    while t < min(r, c):
        # pivot: smallest nonzero magnitude in the remaining block
        best = None
        for i in range(t, r):
            for j in range(t, c):
                x = D[i, j]
                if x != 0 and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        swap_rows(t, best[1])
        swap_cols(t, best[2])
        while True:
            done = True
            for i in range(t + 1, r):
                if D[i, t] != 0:
                    q = D[i, t] // D[t, t]
                    D[i, :] = D[i, :] - q * D[t, :]
                    U[i, :] = U[i, :] - q * U[t, :]
                    if D[i, t] != 0:
                        done = False
            for j in range(t + 1, c):
                if D[t, j] != 0:
                    q = D[t, j] // D[t, t]
                    D[:, j] = D[:, j] - q * D[:, t]
                    V[:, j] = V[:, j] - q * V[:, t]
                    if D[t, j] != 0:
                        done = False
            if done:
                # divisibility of the rest of the block
                bad = None
                for i in range(t + 1, r):
                    for j in range(t + 1, c):
                        if D[i, j] % D[t, t] != 0:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                D[t, :] = D[t, :] + D[bad, :]
                U[t, :] = U[t, :] + U[bad, :]
                continue
            # move the smallest remaining entry of row/column t to the pivot
            best = (abs(D[t, t]), t, t)
            for i in range(t + 1, r):
                if D[i, t] != 0 and abs(D[i, t]) < best[0]:
                    best = (abs(D[i, t]), i, t)
            for j in range(t + 1, c):
                if D[t, j] != 0 and abs(D[t, j]) < best[0]:
                    best = (abs(D[t, j]), t, j)
            swap_rows(t, best[1])
            swap_cols(t, best[2])
        if D[t, t] < 0:
            D[t, :] = -D[t, :]
            U[t, :] = -U[t, :]
        t += 1
    return U, D, V


def inverse_unimodular(a) -> np.ndarray:
    """Exact inverse of a unimodular integer matrix."""
    A = as_int_matrix(a)
    n = A.shape[0]
    aug = [[Fraction(int(x)) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(A)]
    for col in range(n):
        piv = next((i for i in range(col, n) if aug[i][col] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    out = zeros(n, n)
    for i in range(n):
        for j in range(n):
            v = aug[i][n + j]
            if v.denominator != 1:
                raise ValueError("matrix is not unimodular")
            out[i, j] = int(v)
    return out


def solve_integer(a, b) -> np.ndarray | None:
    """Integer solution ``x`` of ``A x = b`` or None when none exists."""
    A = as_int_matrix(a)
    bvec = [int(v) for v in b]
    U, D, V = smith_normal_form(A)
    ub = matmul(U, np.array(bvec, dtype=object).reshape(-1, 1)).flatten()
    r, c = A.shape
    y = [0] * c
    for i in range(r):
        d = D[i, i] if i < c else 0
        if d == 0:
            if ub[i] != 0:
                return None
        else:
            if ub[i] % d != 0:
                return None
            y[i] = ub[i] // d
    return matmul(V, np.array(y, dtype=object).reshape(-1, 1)).flatten()


def complete_to_basis(cols) -> np.ndarray:
    """Unimodular matrix whose last columns are the given primitive columns.

    ``cols`` is an ``n x k`` integer matrix whose columns span a saturated
    sublattice; the result is ``[C | cols]`` with ``C`` an ``n x (n-k)``
    complement.
    """
    K = as_int_matrix(cols)
    n, k = K.shape
    if k == 0:
        return identity(n)
    U, D, V = smith_normal_form(K)
    for i in range(k):
        if D[i, i] != 1:
            raise ValueError("columns do not span a saturated sublattice")
    Uinv = inverse_unimodular(U)
    out = zeros(n, n)
    out[:, : n - k] = Uinv[:, k:]
    out[:, n - k :] = K
    if abs(det(out)) != 1:
        raise ValueError("completion is not unimodular")
    return out


def skew_normal_form(J) -> tuple[np.ndarray, np.ndarray]:
    """Congruence-reduce an antisymmetric integer matrix.

    Returns ``(C, N)`` with ``C.T @ J @ C == N`` where ``N`` is block
    diagonal with blocks ``[[0, d_i], [-d_i, 0]]`` (``d_i > 0``) followed by
    zeros.
    """
    A = as_int_matrix(J).copy()
    n = A.shape[0]
    C = identity(n)

    def swap(i, j):
        if i != j:
            A[[i, j], :] = A[[j, i], :]
            A[:, [i, j]] = A[:, [j, i]]
            C[:, [i, j]] = C[:, [j, i]]

    def add(dst, src, q):
        # basis vector dst += q * basis vector src
        A[dst, :] = A[dst, :] + q * A[src, :]
        A[:, dst] = A[:, dst] + q * A[:, src]
        C[:, dst] = C[:, dst] + q * C[:, src]

    t = 0
    while t + 1 < n:
        best = None
        for i in range(t, n):
            for j in range(i + 1, n):
                if A[i, j] != 0 and (best is None or abs(A[i, j]) < best[0]):
                    best = (abs(A[i, j]), i, j)
        if best is None:
            break
        _, i, j = best
        swap(t, i)
        swap(t + 1, j)
        while True:
            changed = False
            for k in range(t + 2, n):
                # clear A[t, k] using basis vector t+1 (A[t, t+1] pivot)
                if A[t, k] != 0:
                    q = A[t, k] // A[t, t + 1]
                    add(k, t + 1, -q)
                    if A[t, k] != 0:
                        changed = True
                if A[t + 1, k] != 0:
                    q = A[t + 1, k] // A[t + 1, t]
                    add(k, t, -q)
                    if A[t + 1, k] != 0:
                        changed = True
            if not changed:
                break
            best = (abs(A[t, t + 1]), t, t + 1)
            for k in range(t + 2, n):
                for row in (t, t + 1):
                    if A[row, k] != 0 and abs(A[row, k]) < best[0]:
                        best = (abs(A[row, k]), row, k)
            _, row, k = best
            if row == t:
                swap(t + 1, k)
            else:
                swap(t, t + 1)
                swap(t + 1, k)
        if A[t, t + 1] < 0:
            swap(t, t + 1)
        t += 2
    return C, A


def image_generator(a) -> list[int] | None:
    """Primitive generator of the column lattice of a rank-one matrix.

    Returns None when the matrix is zero; raises ValueError when the rank
    exceeds one.
    """
    A = as_int_matrix(a)
    if is_zero(A):
        return None
    if rank_q(A) != 1:
        raise ValueError("matrix rank is not one")
    g = 0
    col = None
    for j in range(A.shape[1]):
        if any(x != 0 for x in A[:, j]):
            col = primitive(A[:, j])
            break
    # the column lattice of a rank-one matrix is generated by (content) * col
    for j in range(A.shape[1]):
        for i, x in enumerate(col):
            if x != 0:
                g = gcd(g, int(A[i, j]) // x)
                break
    return [g * x for x in col]
