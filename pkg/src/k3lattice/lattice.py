"""Integral lattices given by Gram matrices.

A :class:`Lattice` is an immutable Gram matrix of Python ints. Sublattices are
described by coordinate vectors in the ambient basis (:class:`SublatticeBasis`);
quotients by finite groups live in :mod:`k3lattice.discriminant`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, List, NamedTuple, Sequence, Tuple

from . import intmat
from .errors import (Degenerate, DegenerateSubspace, NotIntegral, NotSymmetric,
                     ZeroScale)

Gram = Tuple[Tuple[int, ...], ...]


class Signature(NamedTuple):
    positives: int
    negatives: int


@dataclass(frozen=True)
class Lattice:
    gram: Gram

    def __post_init__(self):
        n = len(self.gram)
        if any(len(row) != n for row in self.gram):
            raise ValueError("Gram matrix must be square")

    @property
    def rank(self) -> int:
        return len(self.gram)

    def __repr__(self):
        return f"Lattice({[list(r) for r in self.gram]})"

    @cached_property
    def det(self) -> int:
        return intmat.det(self.gram)

    @property
    def is_even(self) -> bool:
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    @property
    def is_nondegenerate(self) -> bool:
        return self.det != 0

    @cached_property
    def signature(self) -> Signature:
        return _signature(self.gram)

    @property
    def is_hyperbolic(self) -> bool:
        return self.det != 0 and self.signature == (1, self.rank - 1)

    @property
    def is_negative_definite(self) -> bool:
        return self.det != 0 and self.signature == (0, self.rank)

    @property
    def is_positive_definite(self) -> bool:
        return self.det != 0 and self.signature == (self.rank, 0)

    @property
    def is_definite(self) -> bool:
        return self.is_negative_definite or self.is_positive_definite

    def b(self, u: Sequence[int], v: Sequence[int]):
        return intmat.bilinear(u, self.gram, v)

    def norm(self, v: Sequence[int]):
        return intmat.bilinear(v, self.gram, v)

    def matrix(self) -> List[List[int]]:
        return [list(r) for r in self.gram]

    def sublattice(self, vectors: Sequence[Sequence[int]]) -> "Lattice":
        """Lattice spanned by ``vectors`` with the induced form (vectors assumed independent)."""
        return Lattice(_freeze(intmat.congruent(vectors, self.gram)))

    def change_basis(self, t: Sequence[Sequence[int]]) -> "Lattice":
        return self.sublattice(t)

    @cached_property
    def inverse_gram(self) -> List[List[Fraction]]:
        if self.det == 0:
            raise Degenerate("lattice is degenerate")
        return intmat.rational_inverse(self.gram)


@dataclass(frozen=True)
class SublatticeBasis:
    ambient: Lattice
    vectors: Tuple[Tuple[int, ...], ...]
    index: int | None = field(default=None, compare=False)

    @property
    def rank(self) -> int:
        return len(self.vectors)

    def lattice(self) -> Lattice:
        return self.ambient.sublattice(self.vectors)

    def gram(self) -> List[List[int]]:
        return intmat.congruent(self.vectors, self.ambient.gram)


def _freeze(m: Iterable[Iterable[int]]) -> Gram:
    return tuple(tuple(int(x) for x in row) for row in m)


def make_lattice(gram: Sequence[Sequence]) -> Lattice:
    """Validate and wrap a Gram matrix.

    >>> make_lattice([[0, 1], [1, 0]]).det
    -1
    """
    rows = [list(r) for r in gram]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("Gram matrix must be square")
    for r in rows:
        for x in r:
            if isinstance(x, bool) or (isinstance(x, float) and not x.is_integer()):
                raise NotIntegral(f"entry {x!r} is not an integer")
            if isinstance(x, Fraction) and x.denominator != 1:
                raise NotIntegral(f"entry {x} is not an integer")
            if not isinstance(x, (int, Fraction, float)) and int(x) != x:
                raise NotIntegral(f"entry {x!r} is not an integer")
    rows = [[int(x) for x in r] for r in rows]
    for i in range(n):
        for j in range(i):
            if rows[i][j] != rows[j][i]:
                raise NotSymmetric(f"entries ({i},{j}) and ({j},{i}) differ")
    return Lattice(_freeze(rows))


def zero_lattice() -> Lattice:
    return Lattice(())


def direct_sum(*parts: Lattice) -> Lattice:
    n = sum(p.rank for p in parts)
    g = [[0] * n for _ in range(n)]
    off = 0
    for p in parts:
        for i in range(p.rank):
            for j in range(p.rank):
                g[off + i][off + j] = p.gram[i][j]
        off += p.rank
    return Lattice(_freeze(g))


def twist(lat: Lattice, a: int) -> Lattice:
    if a == 0:
        raise ZeroScale("twist scale must be nonzero")
    return Lattice(tuple(tuple(a * x for x in row) for row in lat.gram))


def signature(lat: Lattice) -> Signature:
    if lat.det == 0:
        raise Degenerate("signature requested for a degenerate lattice")
    return lat.signature


def determinant(lat: Lattice) -> int:
    return lat.det


def _signature(gram: Gram) -> Signature:
    """Signs of the diagonal after exact congruence diagonalisation over Q.

    Zero pivots with a nonzero off-diagonal entry are fixed by adding the
    partner row/column (x -> x + y), which makes the pivot 2(x,y) != 0.
    Zero rows (radical) are skipped.
    """
    minors = intmat.leading_minors(gram)
    if minors is not None:
        # Jacobi: one negative eigenvalue per sign change in 1, d1, ..., dn
        signs = [1] + [1 if d > 0 else -1 for d in minors]
        neg = sum(a != b for a, b in zip(signs, signs[1:]))
        return Signature(len(minors) - neg, neg)
    m = [[Fraction(x) for x in row] for row in gram]
    n = len(m)
    pos = neg = 0
    active = list(range(n))
    while active:
        i = active[0]
        if m[i][i] == 0:
            j = next((j for j in active[1:] if m[i][j] != 0), None)
            if j is None:
                active.pop(0)
                continue
            # row/col i += row/col j  (or subtract if that keeps the pivot zero)
            s = 1 if m[i][i] + 2 * m[i][j] + m[j][j] != 0 else -1
            for k in range(n):
                m[i][k] += s * m[j][k]
            for k in range(n):
                m[k][i] += s * m[k][j]
        p = m[i][i]
        if p > 0:
            pos += 1
        else:
            neg += 1
        active.pop(0)
        for r in active:
            if m[r][i] != 0:
                f = m[r][i] / p
                for k in range(n):
                    m[r][k] -= f * m[i][k]
                for k in range(n):
                    m[k][r] -= f * m[k][i]
    return Signature(pos, neg)


def orthogonal_complement(lat: Lattice, s: SublatticeBasis | Sequence[Sequence[int]]) -> SublatticeBasis:
    """Basis of ``{x in L : (x, s) = 0 for all s in S}``."""
    vectors = s.vectors if isinstance(s, SublatticeBasis) else s
    vectors = [list(v) for v in vectors]
    if vectors:
        sub = intmat.congruent(vectors, lat.gram)
        if intmat.det(sub) == 0:
            raise DegenerateSubspace("subspace is degenerate")
        a = intmat.matmul(lat.gram, intmat.transpose(vectors))
        kern = intmat.left_kernel(a)
    else:
        kern = intmat.identity(lat.rank)
    return SublatticeBasis(lat, _freeze(kern), 1)


def saturate(lat: Lattice, s: SublatticeBasis | Sequence[Sequence[int]]) -> SublatticeBasis:
    """Primitive closure ``L ∩ (S ⊗ Q)`` together with its index over ``S``."""
    vectors = s.vectors if isinstance(s, SublatticeBasis) else s
    vectors = [list(map(int, v)) for v in vectors]
    n = lat.rank
    if not vectors:
        return SublatticeBasis(lat, (), 1)
    span = intmat.hnf(vectors)
    # The saturation is the kernel of the kernel.
    ker = intmat.right_kernel(span, n)
    sat = intmat.right_kernel(ker, n) if ker else intmat.identity(n)
    sat = intmat.hnf(sat)
    index = _index(sat, span)
    return SublatticeBasis(lat, _freeze(sat), index)


def _index(big: Sequence[Sequence[int]], small: Sequence[Sequence[int]]) -> int:
    """Index ``[big : small]`` for lattices spanning the same Q-space."""
    gb = intmat.det(intmat.matmul(big, intmat.transpose(big)))
    gs = intmat.det(intmat.matmul(small, intmat.transpose(small)))
    ratio = Fraction(gs, gb)
    root = _isqrt_exact(ratio)
    return root


def _isqrt_exact(x: Fraction) -> int:
    from math import isqrt
    if x.denominator != 1:
        raise ValueError("index is not an integer")
    r = isqrt(x.numerator)
    if r * r != x.numerator:
        raise ValueError("index is not an integer")
    return r


def sublattice_index(outer: Sequence[Sequence[int]], inner: Sequence[Sequence[int]]) -> int:
    """Index of the row lattice ``inner`` inside the row lattice ``outer`` (same rank)."""
    return _index(outer, inner)


def is_primitive(lat: Lattice, vectors: Sequence[Sequence[int]]) -> bool:
    return saturate(lat, vectors).index == 1


def contains(basis: Sequence[Sequence[int]], v: Sequence[int]) -> bool:
    """Whether the integer vector ``v`` lies in the row lattice of ``basis``."""
    if not basis:
        return all(x == 0 for x in v)
    h = intmat.hnf(basis)
    r = list(map(int, v))
    for row in h:
        c = next(j for j, x in enumerate(row) if x)
        if r[c] % row[c]:
            return False
        q = r[c] // row[c]
        if q:
            r = [a - q * b for a, b in zip(r, row)]
    return all(x == 0 for x in r)
