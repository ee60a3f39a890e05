"""Exact integer and rational matrix routines.

Matrices are plain lists of rows. Entries are Python ints (or Fractions where
noted), so nothing ever overflows.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

import numpy as np

Matrix = List[List[int]]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(a: Sequence[Sequence]) -> list:
    return [list(col) for col in zip(*a)] if a else []


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list:
    bt = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(a: Sequence[Sequence], v: Sequence) -> list:
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def vecmat(v: Sequence, a: Sequence[Sequence]) -> list:
    n = len(a[0]) if a else 0
    out = [0] * n
    for x, row in zip(v, a):
        if x:
            for j in range(n):
                out[j] += x * row[j]
    return out


def bilinear(u: Sequence, gram: Sequence[Sequence], v: Sequence) -> int:
    return sum(ui * gij * vj for ui, row in zip(u, gram) if ui for gij, vj in zip(row, v))


def _np_pair(vectors, gram):
    """``vectors`` and ``gram`` as arrays; int64 when ``v G w^T`` cannot overflow."""
    n = len(gram)
    try:
        v = np.array(vectors, dtype=np.int64).reshape(len(vectors), n)
        g = np.array(gram, dtype=np.int64)
        vmax, gmax = int(np.abs(v).max(initial=0)), int(np.abs(g).max(initial=0))
        if vmax * vmax * gmax * n * n < 2 ** 62:
            return v, g
    except OverflowError:
        pass
    return np.array(vectors, dtype=object).reshape(len(vectors), n), np.array(gram, dtype=object)


def norms(vectors: Sequence[Sequence[int]], gram: Sequence[Sequence[int]]) -> List[int]:
    """``v G v^T`` for every row ``v``."""
    if not len(vectors):
        return []
    v, g = _np_pair(vectors, gram)
    return [int(x) for x in ((v @ g) * v).sum(axis=1)]


def pairings(vectors: Sequence[Sequence[int]], gram: Sequence[Sequence[int]]) -> np.ndarray:
    """Array of ``v_i G v_j^T`` for all rows."""
    v, g = _np_pair(vectors, gram)
    return v @ g @ v.T


def rows_times(rows: Sequence[Sequence[int]], t: Sequence[Sequence[int]]) -> List[Tuple[int, ...]]:
    """``rows * t`` as tuples of Python ints."""
    if not len(rows):
        return []
    try:
        r, m = np.array(rows, dtype=np.int64), np.array(t, dtype=np.int64)
        if int(np.abs(r).max()) * int(np.abs(m).max()) * len(t) >= 2 ** 62:
            raise OverflowError
    except OverflowError:
        r, m = np.array(rows, dtype=object), np.array(t, dtype=object)
    out = r @ m
    return [tuple(int(x) for x in r) for r in out]


def leading_minors(a: Sequence[Sequence[int]]) -> Optional[List[int]]:
    """Leading principal minors by fraction-free elimination; None if one vanishes."""
    m = [[int(x) for x in row] for row in a]
    n = len(m)
    out = []
    prev = 1
    for k in range(n):
        p = m[k][k]
        if p == 0:
            return None
        out.append(p)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * p - m[i][k] * m[k][j]) // prev
        prev = p
    return out


def congruent(basis: Sequence[Sequence], gram: Sequence[Sequence]) -> list:
    """Gram matrix ``B G B^T`` of the vectors in ``basis``."""
    return matmul(matmul(basis, gram), transpose(basis))


def det(a: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free determinant."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(map(int, row)) for row in a]
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
        pivot = m[k][k]
        for i in range(k + 1, n):
            mik = m[i][k]
            row_i = m[i]
            row_k = m[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - mik * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * m[n - 1][n - 1]


def rational_inverse(a: Sequence[Sequence]) -> List[List[Fraction]]:
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(a)]
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c] != 0), None)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        m[c], m[p] = m[p], m[c]
        inv = 1 / m[c][c]
        m[c] = [x * inv for x in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [row[n:] for row in m]


def rank(a: Sequence[Sequence]) -> int:
    m = [[Fraction(x) for x in row] for row in a]
    if not m:
        return 0
    r = 0
    ncols = len(m[0])
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        for i in range(r + 1, len(m)):
            if m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def _row_echelon(rows: Matrix, ncols: int, track: Matrix | None = None) -> int:
    """In-place integer row echelon form (gcd elimination). Returns the rank.

    ``track`` receives the same row operations, which keeps the combined
    transform unimodular.
    """
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        while True:
            nz = [i for i in range(r, nrows) if rows[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(rows[i][c]))
            if p != r:
                rows[r], rows[p] = rows[p], rows[r]
                if track is not None:
                    track[r], track[p] = track[p], track[r]
            done = True
            for i in range(r + 1, nrows):
                if rows[i][c] != 0:
                    q = rows[i][c] // rows[r][c]
                    rows[i] = [x - q * y for x, y in zip(rows[i], rows[r])]
                    if track is not None:
                        track[i] = [x - q * y for x, y in zip(track[i], track[r])]
                    if rows[i][c] != 0:
                        done = False
            if done:
                break
        if any(rows[i][c] != 0 for i in range(r, nrows)):
            if rows[r][c] < 0:
                rows[r] = [-x for x in rows[r]]
                if track is not None:
                    track[r] = [-x for x in track[r]]
            r += 1
    return r


def hnf(rows: Sequence[Sequence[int]]) -> Matrix:
    """Row Hermite normal form of the row lattice; zero rows dropped."""
    if not rows:
        return []
    m = [list(map(int, row)) for row in rows]
    ncols = len(m[0])
    r = _row_echelon(m, ncols)
    m = m[:r]
    # reduce entries above pivots
    for i in range(r):
        c = next(j for j in range(ncols) if m[i][j] != 0)
        for k in range(i):
            q = m[k][c] // m[i][c]
            if q:
                m[k] = [x - q * y for x, y in zip(m[k], m[i])]
    return m


def left_kernel(a: Sequence[Sequence[int]]) -> Matrix:
    """Basis of the saturated lattice ``{x in Z^n : x A = 0}``."""
    n = len(a)
    if n == 0:
        return []
    ncols = len(a[0]) if a[0] is not None else 0
    m = [list(map(int, row)) for row in a]
    t = identity(n)
    r = _row_echelon(m, ncols, t)
    return [t[i] for i in range(r, n)]


def right_kernel(a: Sequence[Sequence[int]], n: int | None = None) -> Matrix:
    """Basis of ``{x in Z^n : A x = 0}`` (rows of the result)."""
    if not a:
        return identity(n or 0)
    return left_kernel(transpose(a))


def smith(a: Sequence[Sequence[int]]) -> Tuple[Matrix, Matrix, Matrix]:
    """Smith normal form ``U A V = D`` with unimodular ``U``, ``V``.

    The diagonal of ``D`` is non-negative and each entry divides the next.
    """
    m = [list(map(int, row)) for row in a]
    nr = len(m)
    nc = len(m[0]) if nr else 0
    u = identity(nr)
    v = identity(nc)

    def swap_rows(i, j):
        m[i], m[j] = m[j], m[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in m:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    t = 0
    while t < min(nr, nc):
        nz = [(abs(m[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if m[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            changed = False
            p = m[t][t]
            for i in range(t + 1, nr):
                if m[i][t]:
                    q = m[i][t] // p
                    m[i] = [x - q * y for x, y in zip(m[i], m[t])]
                    u[i] = [x - q * y for x, y in zip(u[i], u[t])]
                    if m[i][t]:
                        changed = True
            for j in range(t + 1, nc):
                if m[t][j]:
                    q = m[t][j] // p
                    for row in m:
                        row[j] -= q * row[t]
                    for row in v:
                        row[j] -= q * row[t]
                    if m[t][j]:
                        changed = True
            if changed:
                nz = [(abs(m[i][t]), i, t) for i in range(t, nr) if m[i][t]]
                nz += [(abs(m[t][j]), t, j) for j in range(t, nc) if m[t][j]]
                _, i, j = min(nz)
                swap_rows(t, i)
                swap_cols(t, j)
                continue
            # enforce divisibility of the remaining block
            p = m[t][t]
            bad = next(((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc)
                        if m[i][j] % p), None)
            if bad is None:
                break
            i, _ = bad
            m[t] = [x + y for x, y in zip(m[t], m[i])]
            u[t] = [x + y for x, y in zip(u[t], u[i])]
        if m[t][t] < 0:
            m[t] = [-x for x in m[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return m, u, v


def invariant_factors(a: Sequence[Sequence[int]]) -> List[int]:
    d, _, _ = smith(a)
    return [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0))]


def unimodular_inverse(a: Sequence[Sequence[int]]) -> Matrix:
    inv = rational_inverse(a)
    out = []
    for row in inv:
        if any(x.denominator != 1 for x in row):
            raise ValueError("matrix is not unimodular")
        out.append([int(x) for x in row])
    return out


def content(v: Sequence[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g


def primitive(v: Sequence[int]) -> List[int]:
    g = content(v)
    return [int(x) // g for x in v] if g > 1 else [int(x) for x in v]


def lcm_denominator(values) -> int:
    d = 1
    for x in values:
        xd = Fraction(x).denominator
        d = d * xd // gcd(d, xd)
    return d


def complete_to_basis(rows: Sequence[Sequence[int]], n: int) -> Matrix:
    """Extend a basis of a primitive sublattice of ``Z^n`` to a basis of ``Z^n``.

    The returned unimodular matrix starts with ``rows``.
    """
    rows = [list(map(int, r)) for r in rows]
    k = len(rows)
    if k == 0:
        return identity(n)
    # U A V = D with D = [I_k 0] since the rows span a primitive sublattice
    d, u, v = smith(rows)
    if any(d[i][i] != 1 for i in range(k)):
        raise ValueError("rows do not span a primitive sublattice")
    vinv = unimodular_inverse(v)
    # A = U^{-1} D V^{-1}; the last n-k rows of V^{-1} complete the basis
    return rows + [vinv[i] for i in range(k, n)]
