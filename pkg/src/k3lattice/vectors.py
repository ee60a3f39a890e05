"""Short vectors, roots and covering radii of definite lattices.

Basis reduction is exact (LLL on the Gram matrix with rational Gram-Schmidt
data). Enumeration is Fincke-Pohst on the reduced basis; the floating point
pruning bounds carry a safety margin and every returned vector has its norm
recomputed exactly, so nothing is reported wrongly and nothing within the
bound is skipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import intmat
from .errors import NotNegativeDefinite, NotPositiveDefinite
from .lattice import Lattice, twist

Vector = Tuple[int, ...]


# ---------------------------------------------------------------- LLL

def lll(gram: Sequence[Sequence[int]], delta: Fraction = Fraction(99, 100)):
    """Exact LLL reduction of a positive definite Gram matrix.

    Integral variant: Gram-Schmidt data is kept as the integers ``d_i``
    (leading Gram minors) and ``lam[i][j] = d_j * mu_ij``.
    Returns ``(reduced_gram, t)`` with ``t`` unimodular and
    ``t * gram * t^T == reduced_gram``.
    """
    n = len(gram)
    g = [[int(x) for x in row] for row in gram]
    t = intmat.identity(n)
    if n <= 1:
        return g, t
    dn, dd = delta.numerator, delta.denominator
    # 1-based Gram-Schmidt data; d[0] = 1
    d = [1] + [0] * n
    lam = [[0] * (n + 1) for _ in range(n + 1)]

    def gs_row(k):
        for j in range(1, k + 1):
            u = g[k - 1][j - 1]
            for i in range(1, j):
                u = (d[i] * u - lam[k][i] * lam[j][i]) // d[i - 1]
            if j < k:
                lam[k][j] = u
            else:
                if u <= 0:
                    raise NotPositiveDefinite("Gram matrix is not positive definite")
                d[k] = u

    def red(k, l):
        if 2 * abs(lam[k][l]) <= d[l]:
            return
        q = round(Fraction(lam[k][l], d[l]))
        _sub_row(g, t, k - 1, l - 1, q)
        lam[k][l] -= q * d[l]
        for i in range(1, l):
            lam[k][i] -= q * lam[l][i]

    def swap(k, kmax):
        _swap(g, t, k - 1, k - 2)
        for j in range(1, k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        la = lam[k][k - 1]
        b = (d[k - 2] * d[k] + la * la) // d[k - 1]
        for i in range(k + 1, kmax + 1):
            x = lam[i][k]
            lam[i][k] = (d[k] * lam[i][k - 1] - la * x) // d[k - 1]
            lam[i][k - 1] = (b * x + la * lam[i][k]) // d[k]
        d[k - 1] = b

    gs_row(1)
    k, kmax = 2, 1
    while k <= n:
        if k > kmax:
            kmax = k
            gs_row(k)
        red(k, k - 1)
        la = lam[k][k - 1]
        if dd * d[k] * d[k - 2] < dn * d[k - 1] * d[k - 1] - dd * la * la:
            swap(k, kmax)
            k = max(2, k - 1)
        else:
            for l in range(k - 2, 0, -1):
                red(k, l)
            k += 1
    return g, t


def _sub_row(g, t, k, j, q):
    """Basis change ``b_k <- b_k - q b_j`` applied to Gram ``g`` and transform ``t``."""
    t[k] = [a - q * b for a, b in zip(t[k], t[j])]
    gkk, gkj, gjj = g[k][k], g[k][j], g[j][j]
    for i in range(len(g)):
        if i != k:
            g[k][i] -= q * g[j][i]
            g[i][k] = g[k][i]
    g[k][k] = gkk - 2 * q * gkj + q * q * gjj


def _swap(g, t, a, b):
    t[a], t[b] = t[b], t[a]
    g[a], g[b] = g[b], g[a]
    for row in g:
        row[a], row[b] = row[b], row[a]


def reduce_lattice(lat: Lattice):
    """LLL-reduce a definite lattice. Returns ``(reduced Lattice, transform)``."""
    red, t = _reduce_cached(lat)
    return red, [list(r) for r in t]


@lru_cache(maxsize=1024)
def _reduce_cached(lat: Lattice):
    sign = 1 if lat.rank == 0 or lat.gram[0][0] > 0 else -1
    g = [[sign * x for x in row] for row in lat.gram]
    r, t = lll(g)
    return Lattice(tuple(tuple(sign * x for x in row) for row in r)), tuple(map(tuple, t))


# ---------------------------------------------------------------- enumeration

def _cholesky_float(g):
    n = len(g)
    q = [[float(x) for x in row] for row in g]
    for i in range(n):
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    return q


def _enumerate(g, bound):
    """All nonzero ``y`` with ``y g y^T <= bound`` whose last nonzero entry is positive."""
    n = len(g)
    q = _cholesky_float(g)
    slack = 1e-7 * (abs(float(bound)) + 1.0)
    b = float(bound) + slack
    x = [0] * n
    out = []
    # iterative depth-first search from the last coordinate down
    remaining = [0.0] * (n + 1)
    centre = [0.0] * n
    upper = [0] * n
    remaining[n] = b
    i = n - 1

    def bounds(i):
        c = -sum(q[i][j] * x[j] for j in range(i + 1, n))
        r = remaining[i + 1] / q[i][i]
        if r < 0:
            r = 0.0
        w = math.sqrt(r) + 1e-9
        return c, math.ceil(c - w), math.floor(c + w)

    c, lo, hi = bounds(i)
    centre[i] = c
    x[i] = lo
    upper[i] = hi
    while True:
        if x[i] > upper[i]:
            i += 1
            if i == n:
                break
            x[i] += 1
            continue
        d = x[i] - centre[i]
        rem = remaining[i + 1] - q[i][i] * d * d
        if rem < -slack:
            # outside the ellipsoid: only possible at the interval ends
            x[i] += 1
            continue
        if i == 0:
            if any(x):
                last = next(v for v in reversed(x) if v)
                if last > 0:
                    out.append(tuple(x))
            x[0] += 1
            continue
        remaining[i] = rem
        i -= 1
        c, lo, hi = bounds(i)
        if i == 0:
            # the innermost coordinate is a plain interval scan
            q00, r1 = q[0][0], remaining[1]
            tail = next((v for v in reversed(x[1:]) if v), 0)
            for x0 in range(lo, hi + 1):
                d = x0 - c
                if r1 - q00 * d * d < -slack:
                    continue
                if tail > 0 or (tail == 0 and x0 > 0):
                    x[0] = x0
                    out.append(tuple(x))
            i = 1
            x[1] += 1
            continue
        centre[i] = c
        x[i] = lo
        upper[i] = hi
    return out


def short_vectors(d: Lattice, bound, pairs: bool = False) -> List[Vector]:
    """All ``v`` with ``0 < v^2 <= bound`` in a positive definite lattice.

    With ``pairs=True`` only one vector of each ``±v`` pair is returned.
    Vectors are coordinate tuples in the basis of ``d``.
    """
    if not d.is_positive_definite:
        raise NotPositiveDefinite("short_vectors needs a positive definite lattice")
    return list(_short_vectors_cached(d, Fraction(bound), pairs))


@lru_cache(maxsize=512)
def _short_vectors_cached(d: Lattice, bound: Fraction, pairs: bool):
    if d.rank == 0 or bound <= 0:
        return ()
    red, t = reduce_lattice(d)
    vs = intmat.rows_times(_enumerate(red.gram, bound), t)
    found = sorted((nv, v) for nv, v in zip(intmat.norms(vs, d.gram), vs) if 0 < nv <= bound)
    vecs = [v for _, v in found]
    if not pairs:
        vecs = [w for v in vecs for w in (v, tuple(-a for a in v))]
    return tuple(vecs)


def vectors_of_norm(d: Lattice, norm: int) -> List[Vector]:
    """All vectors of exactly the given norm (both signs)."""
    return [v for v in short_vectors(d, norm) if d.norm(v) == norm]


def minimum(d: Lattice) -> int:
    """Minimal norm of a positive definite lattice."""
    red, _ = reduce_lattice(d)
    b = min(red.gram[i][i] for i in range(red.rank))
    return min(d.norm(v) for v in short_vectors(d, b, pairs=True))


# ---------------------------------------------------------------- roots

ROOT_COUNTS = {"A": lambda n: n * (n + 1), "D": lambda n: 2 * n * (n - 1),
               "E": lambda n: {6: 72, 7: 126, 8: 240}[n]}


def ade_type(rank: int, count: int) -> Tuple[str, int]:
    """Identify an irreducible ADE system from its rank and number of roots."""
    if count == rank * (rank + 1):
        return ("A", rank)
    if rank >= 4 and count == 2 * rank * (rank - 1):
        return ("D", rank)
    if rank in (6, 7, 8) and count == ROOT_COUNTS["E"](rank):
        return ("E", rank)
    raise ValueError(f"no irreducible root system of rank {rank} with {count} roots")


@dataclass(frozen=True)
class RootComponent:
    family: str
    rank: int
    simple: Tuple[Vector, ...]
    roots: Tuple[Vector, ...]

    @property
    def name(self) -> str:
        return f"{self.family}{self.rank}"


@dataclass(frozen=True)
class RootSystem:
    ambient: Lattice
    roots: Tuple[Vector, ...]
    components: Tuple[RootComponent, ...]

    @property
    def rank(self) -> int:
        return sum(c.rank for c in self.components)

    def type_string(self) -> str:
        names = sorted(c.name for c in self.components)
        return " + ".join(names) if names else "0"

    def simple_roots(self) -> List[Vector]:
        return [v for c in self.components for v in c.simple]


def root_system_of_vectors(lat: Lattice, roots: Sequence[Vector]) -> RootSystem:
    """ADE decomposition of a finite set of norm ``±2`` vectors closed under negation."""
    roots = [tuple(r) for r in roots]
    n = lat.rank
    if not roots:
        return RootSystem(lat, (), ())
    big = 2 * max(abs(a) for r in roots for a in r) + 1
    weights = [big ** i for i in range(n)]

    def height(r):
        return sum(a * w for a, w in zip(r, weights))

    positive = [r for r in roots if height(r) > 0]
    # connected components of the pairing graph
    idx = {r: i for i, r in enumerate(positive)}
    parent = list(range(len(positive)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    pair = intmat.pairings(positive, lat.gram)
    for i, j in zip(*np.nonzero(np.triu(pair != 0, 1))):
        a, b = find(int(i)), find(int(j))
        if a != b:
            parent[a] = b
    groups: Dict[int, List[Vector]] = {}
    for r in positive:
        groups.setdefault(find(idx[r]), []).append(r)
    comps = []
    for members in groups.values():
        mset = set(members)
        simple = []
        for r in members:
            # r - s has the norm of r only when (r, s) = r^2 / 2
            i = idx[r]
            half = int(pair[i, i]) // 2
            decomposable = any(tuple(a - b for a, b in zip(r, positive[j])) in mset
                               for j in np.nonzero(pair[i] == half)[0])
            if not decomposable:
                simple.append(r)
        simple.sort(key=height)
        fam, rk = ade_type(len(simple), 2 * len(members))
        allr = tuple(sorted(members + [tuple(-a for a in r) for r in members]))
        comps.append(RootComponent(fam, rk, tuple(simple), allr))
    comps.sort(key=lambda c: ("ADE".index(c.family), c.rank, c.simple))
    return RootSystem(lat, tuple(sorted(roots)), tuple(comps))


def roots(m: Lattice) -> RootSystem:
    """All norm ``-2`` vectors of a negative definite lattice, with ADE decomposition."""
    if not m.is_negative_definite:
        if m.rank == 0:
            return RootSystem(m, (), ())
        raise NotNegativeDefinite("roots() needs a negative definite lattice")
    pos = twist(m, -1)
    sv = short_vectors(pos, 2)
    vecs = [v for v, nv in zip(sv, intmat.norms(sv, pos.gram)) if nv == 2]
    return root_system_of_vectors(m, vecs)


def has_finite_index_root_sublattice(m: Lattice) -> bool:
    return roots(m).rank == m.rank


# ---------------------------------------------------------------- covering radius

@dataclass(frozen=True)
class CoveringRadiusResult:
    value_sq: Optional[Fraction]
    method: str
    detail: str = ""

    @property
    def known(self) -> bool:
        return self.value_sq is not None


UNKNOWN = CoveringRadiusResult(None, "unknown")


def read_covering_table(text: str) -> Dict[Tuple[str, int], Fraction]:
    out = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, value = line.split()
        out[(name[0], int(name[1:]))] = Fraction(value)
    return out


@lru_cache(maxsize=1)
def default_covering_table() -> Dict[Tuple[str, int], Fraction]:
    text = resources.files("k3lattice").joinpath("data/covering_radii.tbl").read_text()
    return read_covering_table(text)


def covering_radius_rank2(gram) -> Fraction:
    """Exact squared covering radius of a positive definite binary lattice.

    The basis is brought to an obtuse superbase; the Delaunay triangles then
    have side norms ``N1, N2, N3`` and circumradius squared ``N1 N2 N3 / (4 det)``.
    """
    a, b, c = int(gram[0][0]), int(gram[0][1]), int(gram[1][1])
    # Lagrange reduction: |2b| <= a <= c
    while True:
        if a > c:
            a, c = c, a
        q = round(Fraction(b, a))
        if q:
            c = c - 2 * q * b + q * q * a
            b = b - q * a
            continue
        if a <= c:
            break
    if b > 0:
        b = -b
    n3 = a + c + 2 * b
    det = a * c - b * b
    return Fraction(a * c * n3, 4 * det)


def orthogonal_decomposition(d: Lattice) -> List[List[Vector]]:
    """Split a positive definite lattice into orthogonal summands.

    Returns bases (coordinates in ``d``) of mutually orthogonal sublattices whose
    direct sum is ``d``; a single part means no splitting was found.
    """
    n = d.rank
    if n <= 1:
        return [[tuple(int(i == j) for j in range(n)) for i in range(n)]]
    red, t = reduce_lattice(d)
    bmax = max(red.gram[i][i] for i in range(n))
    vecs = short_vectors(d, bmax, pairs=True)
    if len(vecs) > 4000:
        return [[tuple(r) for r in intmat.identity(n)]]
    full = set(vecs) | {tuple(-a for a in v) for v in vecs}
    rows = {v: intmat.vecmat(v, d.gram) for v in full}
    keep = []
    for v in vecs:
        split = False
        for x in full:
            if x == v:
                continue
            y = tuple(a - b for a, b in zip(v, x))
            if y in full and sum(a * b for a, b in zip(rows[x], y)) == 0 and any(y):
                split = True
                break
        if not split:
            keep.append(v)
    parent = {v: v for v in keep}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i, u in enumerate(keep):
        for w in keep[i + 1:]:
            if sum(a * b for a, b in zip(rows[u], w)):
                parent[find(u)] = find(w)
    groups: Dict[Vector, List[Vector]] = {}
    for v in keep:
        groups.setdefault(find(v), []).append(v)
    parts = []
    for members in groups.values():
        basis = intmat.hnf(members)
        parts.append([tuple(r) for r in basis])
    total = sum(len(p) for p in parts)
    if total != n:
        return [[tuple(r) for r in intmat.identity(n)]]
    det = 1
    for p in parts:
        det *= intmat.det(intmat.congruent(p, d.gram))
    if det != d.det:
        return [[tuple(r) for r in intmat.identity(n)]]
    return sorted(parts)


def _twisted_root_lattice(d: Lattice, table) -> Optional[Tuple[Fraction, str]]:
    """Covering radius squared if ``d`` is ``R(k)`` for a root lattice ``R``."""
    m = minimum(d)
    if m % 2:
        return None
    k = m // 2
    if any(x % k for row in d.gram for x in row):
        return None
    unit = Lattice(tuple(tuple(x // k for x in row) for row in d.gram))
    vecs = [v for v in short_vectors(unit, 2) if unit.norm(v) == 2]
    rs = root_system_of_vectors(twist(unit, -1), vecs)
    if rs.rank != d.rank:
        return None
    basis = rs.simple_roots()
    if abs(intmat.det(intmat.congruent(basis, unit.gram))) != abs(unit.det):
        return None
    total = Fraction(0)
    for comp in rs.components:
        key = (comp.family, comp.rank)
        if key not in table:
            return None
        total += table[key]
    label = rs.type_string() + (f" scaled by {k}" if k != 1 else "")
    return total * k, label


def covering_radius_sq(d: Lattice, table=None) -> CoveringRadiusResult:
    """Squared covering radius of a positive definite lattice when it can be certified."""
    if not d.is_positive_definite:
        raise NotPositiveDefinite("covering radius needs a positive definite lattice")
    if table is None:
        table = default_covering_table()
    if d.rank == 1:
        return CoveringRadiusResult(Fraction(d.gram[0][0], 4), "rank1")
    if d.rank == 2:
        return CoveringRadiusResult(covering_radius_rank2(d.gram), "rank2-delaunay")
    parts = orthogonal_decomposition(d)
    if len(parts) > 1:
        total = Fraction(0)
        details = []
        for p in parts:
            sub = covering_radius_sq(d.sublattice(p), table)
            if not sub.known:
                return UNKNOWN
            total += sub.value_sq
            details.append(f"{sub.method}:{sub.value_sq}")
        return CoveringRadiusResult(total, "direct-sum", "; ".join(details))
    hit = _twisted_root_lattice(d, table)
    if hit is not None:
        return CoveringRadiusResult(hit[0], "table", hit[1])
    return UNKNOWN
