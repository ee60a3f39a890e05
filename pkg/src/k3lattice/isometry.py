"""Isometries of definite lattices, discriminant-form isomorphisms and genus equality.

Isometry search works on an LLL-reduced basis of the target: each basis vector
must map to a vector of the same norm in the source, with all pairings to the
images already chosen. Candidate lists for later levels are filtered as soon
as an image is fixed (forward checking), which keeps the search small for the
ranks that occur here.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import intmat
from .discriminant import DEFAULT_GROUP_CAP, FiniteQuadraticModule, glue_group
from .errors import GroupTooLarge, RankMismatch, TooLarge
from .lattice import Lattice, twist
from .vectors import reduce_lattice, roots, short_vectors

DEFAULT_NODE_BUDGET = 2_000_000


@dataclass(frozen=True)
class IsometryWitness:
    """``matrix * source.gram * matrix^T == target.gram`` (rows live in the source)."""

    matrix: Tuple[Tuple[int, ...], ...]
    source: Lattice
    target: Lattice

    def verify(self) -> bool:
        m = [list(r) for r in self.matrix]
        ok = intmat.congruent(m, self.source.gram) == [list(r) for r in self.target.gram]
        return ok and abs(intmat.det(m)) == 1


@dataclass(frozen=True)
class OrthogonalGroupDescription:
    generators: Tuple[IsometryWitness, ...]
    order: int


def _positive(lat: Lattice) -> Lattice:
    if lat.is_positive_definite:
        return lat
    if lat.is_negative_definite:
        return twist(lat, -1)
    raise ValueError("lattice is not definite")


@lru_cache(maxsize=64)
def _search_space(src: Lattice, bound: int):
    vecs = short_vectors(src, bound)
    index = {v: i for i, v in enumerate(vecs)}
    v, g = intmat._np_pair(vecs, src.gram)
    rows = v @ g
    nrm = (rows * v).sum(axis=1) if len(vecs) else np.zeros(0, dtype=np.int64)
    by_norm = {int(k): np.nonzero(nrm == k)[0] for k in set(int(x) for x in nrm)}
    return vecs, index, v, rows, by_norm


class _Search:
    """Backtracking for vectors ``x_1..x_n`` in ``src`` with Gram equal to ``target``.

    Candidates are index arrays into the short vectors of ``src``.
    """

    def __init__(self, src: Lattice, target: Sequence[Sequence[int]], budget: int):
        self.src = src
        self.t = [list(r) for r in target]
        self.n = len(target)
        self.budget = budget
        self.nodes = 0
        bound = max(self.t[i][i] for i in range(self.n))
        self.vecs, self.index, self.v, self.rows, self.by_norm = _search_space(src, bound)

    def _filter(self, i: int, cand: np.ndarray, want: int) -> np.ndarray:
        return cand[self.v[cand] @ self.rows[i] == want]

    def initial(self, prefix: Sequence[Tuple[int, ...]] = ()) -> List[np.ndarray]:
        cands = []
        empty = np.zeros(0, dtype=np.int64)
        for i in range(self.n):
            c = self.by_norm.get(self.t[i][i], empty)
            for j, x in enumerate(prefix):
                if j == i:
                    break
                c = self._filter(self.index[tuple(x)], c, self.t[j][i])
            cands.append(c)
        return cands

    def search(self, chosen: List, cands: List[np.ndarray], first_only=True, sink=None):
        """Depth-first extension of ``chosen``; returns the first full solution or None."""
        level = len(chosen)
        if level == self.n:
            sol = [self.vecs[i] for i in chosen]
            if sink is not None:
                sink.append(sol)
                return None if not first_only else sol
            return sol
        for x in cands[level]:
            x = int(x)
            self.nodes += 1
            if self.nodes > self.budget:
                raise TooLarge(f"isometry search exceeded {self.budget} nodes")
            new = cands[:level + 1]
            ok = True
            for k in range(level + 1, self.n):
                f = self._filter(x, cands[k], self.t[level][k])
                if not len(f):
                    ok = False
                    break
                new.append(f)
            if not ok:
                continue
            chosen.append(x)
            res = self.search(chosen, new, first_only, sink)
            chosen.pop()
            if res is not None:
                return res
        return None


def _norm_histogram(lat: Lattice, bound: int) -> Counter:
    return Counter(intmat.norms(short_vectors(lat, bound, pairs=True), lat.gram))


def is_isometric_definite(a: Lattice, b: Lattice, budget: int = DEFAULT_NODE_BUDGET
                          ) -> Optional[IsometryWitness]:
    """An isometry between definite lattices, or None if there is none.

    The witness has rows in ``a`` spanning ``a`` with Gram matrix ``b.gram``.
    """
    if a.rank != b.rank:
        raise RankMismatch(f"ranks {a.rank} and {b.rank} differ")
    if a.rank == 0:
        return IsometryWitness((), a, b)
    if a.det != b.det:
        return None
    if a.is_positive_definite != b.is_positive_definite:
        return None
    pa, pb = _positive(a), _positive(b)
    rb, tb = reduce_lattice(pb)
    bound = max(rb.gram[i][i] for i in range(rb.rank))
    if pa.is_even and roots(twist(pa, -1)).type_string() != roots(twist(pb, -1)).type_string():
        return None
    if _norm_histogram(pa, bound) != _norm_histogram(pb, bound):
        return None
    s = _Search(pa, rb.gram, budget)
    sol = s.search([], s.initial())
    if sol is None:
        return None
    tb_inv = intmat.unimodular_inverse(tb)
    m = intmat.matmul(tb_inv, sol)
    w = IsometryWitness(tuple(tuple(r) for r in m), a, b)
    assert w.verify()
    return w


def automorphism_group(d: Lattice, budget: int = DEFAULT_NODE_BUDGET) -> OrthogonalGroupDescription:
    """Generators and exact order of ``O(d)`` for a definite lattice.

    Uses the stabilizer chain of the reduced basis: the order is the product of
    the orbit lengths of each basis vector under the pointwise stabilizer of
    the previous ones, and one automorphism per orbit point gives generators.
    """
    if d.rank == 0:
        return OrthogonalGroupDescription((), 1)
    p = _positive(d)
    r, t = reduce_lattice(p)
    n = r.rank
    basis = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    s = _Search(r, r.gram, budget)
    t_inv = intmat.unimodular_inverse(t)
    order = 1
    gens: List[IsometryWitness] = []
    seen_mats = set()
    for level in range(n):
        prefix = basis[:level]
        cands = s.initial(prefix)
        orbit = 0
        for x in cands[level]:
            # does some automorphism fixing the prefix send basis[level] to x?
            trial = list(cands)
            for k in range(level):
                trial[k] = np.array([s.index[basis[k]]])
            trial[level] = np.array([x])
            sol = s.search([], trial)
            if sol is None:
                continue
            orbit += 1
            if s.vecs[int(x)] != basis[level]:
                m = intmat.matmul(intmat.matmul(t_inv, sol), t)
                key = tuple(tuple(row) for row in m)
                if key not in seen_mats:
                    seen_mats.add(key)
                    gens.append(IsometryWitness(key, d, d))
        order *= orbit
    if not gens:
        ident = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
        gens.append(IsometryWitness(ident, d, d))
    return OrthogonalGroupDescription(tuple(gens), order)


# ---------------------------------------------------------------- finite quadratic modules

def _fingerprint(g: FiniteQuadraticModule) -> Counter:
    return Counter((g.order_of(x), g.q(x)) for x in g.elements())


def _iso_search(x: FiniteQuadraticModule, y: FiniteQuadraticModule, count: bool,
                fixed: Sequence = (), cap_nodes: int = DEFAULT_NODE_BUDGET):
    """Maps sending the generators of ``x`` into ``y`` preserving orders, ``q`` and ``b``.

    With ``count=False`` returns the first isomorphism found (or None); with
    ``count=True`` returns how many exist. ``fixed`` pins the first images.
    """
    k = x.l
    gens = x.generators()
    target_size = y.size
    elems = list(y.elements())
    info = {e: (y.order_of(e), y.q(e)) for e in elems}
    want = [(x.order_of(gv), x.q(gv)) for gv in gens]
    cands = [[e for e in elems if info[e] == want[i]] for i in range(k)]
    bx = [[x.b(gens[i], gens[j]) for j in range(k)] for i in range(k)]
    nodes = [0]
    total = [0]

    def span_size(imgs, orders):
        from .discriminant import _closure
        return len(_closure(y, imgs))

    def rec(imgs):
        i = len(imgs)
        if i == k:
            if span_size(imgs, None) == target_size:
                return list(imgs)
            return None
        pool = [fixed[i]] if i < len(fixed) else cands[i]
        for e in pool:
            if info[e] != want[i]:
                continue
            nodes[0] += 1
            if nodes[0] > cap_nodes:
                raise TooLarge("discriminant-form search exceeded its budget")
            if any(y.b(imgs[j], e) != bx[j][i] for j in range(i)):
                continue
            imgs.append(e)
            prod_orders = 1
            for j in range(i + 1):
                prod_orders *= want[j][0]
            if span_size(imgs, None) == prod_orders:
                res = rec(imgs)
                if res is not None:
                    if count:
                        total[0] += 1
                    else:
                        imgs.pop()
                        return res
            imgs.pop()
        return None

    res = rec([])
    return total[0] if count else res


def fqm_isomorphic(x: FiniteQuadraticModule, y: FiniteQuadraticModule,
                   cap: int = DEFAULT_GROUP_CAP) -> bool:
    """Whether two finite quadratic modules are isomorphic (``q`` and hence ``b`` preserved)."""
    if x.size != y.size:
        return False
    if x.size == 1:
        return True
    if x.size > cap:
        raise GroupTooLarge(x.size, cap)
    px, py = x.primary_parts(), y.primary_parts()
    if set(px) != set(py):
        return False
    for p in px:
        a, b = px[p][0], py[p][0]
        if sorted(a.orders) != sorted(b.orders):
            return False
        if _fingerprint(a) != _fingerprint(b):
            return False
        if _iso_search(a, b, count=False) is None:
            return False
    return True


def orthogonal_q_group_order(x: FiniteQuadraticModule, cap: int = DEFAULT_GROUP_CAP) -> int:
    """``|O(q)|``: product over Sylow parts of stabilizer-chain orbit lengths."""
    if x.size > cap:
        raise GroupTooLarge(x.size, cap)
    total = 1
    for p, (part, _) in x.primary_parts().items():
        total *= _fqm_aut_order(part)
    return total


def _fqm_aut_order(g: FiniteQuadraticModule) -> int:
    gens = g.generators()
    order = 1
    for level in range(g.l):
        prefix = gens[:level]
        orbit = 0
        for e in g.elements():
            if (g.order_of(e), g.q(e)) != (g.order_of(gens[level]), g.q(gens[level])):
                continue
            if _iso_search(g, g, count=False, fixed=list(prefix) + [e]) is not None:
                orbit += 1
        order *= orbit
    return order


def same_genus(a: Lattice, b: Lattice, cap: int = DEFAULT_GROUP_CAP) -> bool:
    """Even lattices are in one genus iff signatures agree and discriminant forms are isomorphic."""
    if a.rank != b.rank or abs(a.det) != abs(b.det):
        return False
    if a.signature != b.signature:
        return False
    return fqm_isomorphic(glue_group(a), glue_group(b), cap)


def induced_discriminant_action(l: Lattice, w: IsometryWitness,
                                g: Optional[FiniteQuadraticModule] = None) -> List[Tuple[int, ...]]:
    """Images of the glue-group generators under an isometry of ``l``.

    ``w.matrix`` has rows equal to the images of the basis vectors, so a
    rational vector ``x`` maps to ``x * matrix``.
    """
    if g is None:
        g = glue_group(l)
    m = [list(r) for r in w.matrix]
    out = []
    for lift in g.lifts:
        img = [sum((a * m[i][j] for i, a in enumerate(lift)), Fraction(0)) for j in range(l.rank)]
        out.append(g.class_of(img))
    return out


def apply_fqm_map(g: FiniteQuadraticModule, images: Sequence[Tuple[int, ...]], x) -> Tuple[int, ...]:
    return g.combine(images, x)
