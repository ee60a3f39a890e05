"""Glue groups ``L*/L`` with their discriminant forms, and even overlattices.

Elements of a :class:`FiniteQuadraticModule` are tuples of residues with
respect to its generators. ``b`` takes values in ``Q/Z`` and ``q`` in ``Q/2Z``;
both are returned as Fractions normalised to ``[0, 1)`` and ``[0, 2)``.
"""

from __future__ import annotations

import itertools
from functools import cached_property
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, prod
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from . import intmat
from .errors import Degenerate, GroupTooLarge, NotIntegral
from .lattice import Lattice, make_lattice

DEFAULT_GROUP_CAP = 10 ** 4

Element = Tuple[int, ...]


def _mod1(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


def _mod2(x: Fraction) -> Fraction:
    return x - 2 * (x.numerator // (2 * x.denominator))


def _factor(n: int) -> Dict[int, int]:
    n = abs(n)
    out: Dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@dataclass(frozen=True)
class FiniteQuadraticModule:
    """A finite abelian group ``⊕ Z/d_i`` with a rational Gram matrix of generator lifts.

    ``gram[i][j]`` is the pairing of the lifts of generators ``i`` and ``j``;
    ``b`` and ``q`` are read off modulo 1 and 2. ``lifts`` (coordinates in the
    lattice basis) and ``v`` (the Smith transform used to classify dual
    vectors) are present when the module comes from a lattice.
    """

    orders: Tuple[int, ...]
    gram: Tuple[Tuple[Fraction, ...], ...]
    lifts: Optional[Tuple[Tuple[Fraction, ...], ...]] = None
    lattice: Optional[Lattice] = field(default=None, compare=False, repr=False)
    _v: Optional[Tuple[Tuple[int, ...], ...]] = field(default=None, compare=False, repr=False)
    _positions: Optional[Tuple[int, ...]] = field(default=None, compare=False, repr=False)

    # -- group structure
    @property
    def size(self) -> int:
        return prod(self.orders)

    def __len__(self):
        return self.size

    @property
    def l(self) -> int:
        return len(self.orders)

    @property
    def exponent(self) -> int:
        e = 1
        for d in self.orders:
            e = e * d // gcd(e, d)
        return e

    def zero(self) -> Element:
        return tuple(0 for _ in self.orders)

    def elements(self) -> Iterator[Element]:
        return itertools.product(*(range(d) for d in self.orders))

    def add(self, x: Element, y: Element) -> Element:
        return tuple((a + b) % d for a, b, d in zip(x, y, self.orders))

    def neg(self, x: Element) -> Element:
        return tuple((-a) % d for a, d in zip(x, self.orders))

    def scale(self, k: int, x: Element) -> Element:
        return tuple((k * a) % d for a, d in zip(x, self.orders))

    def normalize(self, x: Sequence[int]) -> Element:
        return tuple(int(a) % d for a, d in zip(x, self.orders))

    def order_of(self, x: Element) -> int:
        o = 1
        for a, d in zip(x, self.orders):
            if a % d:
                o = o * (d // gcd(a, d)) // gcd(o, d // gcd(a, d))
        return o

    def generators(self) -> List[Element]:
        k = len(self.orders)
        return [tuple(int(i == j) for j in range(k)) for i in range(k)]

    # -- forms
    @cached_property
    def _scaled_gram(self) -> Tuple[int, Tuple[Tuple[int, ...], ...]]:
        den = 1
        for row in self.gram:
            for a in row:
                den = den * a.denominator // gcd(den, a.denominator)
        return den, tuple(tuple(int(a * den) for a in row) for row in self.gram)

    def _pair(self, x, y) -> Fraction:
        den, g = self._scaled_gram
        total = 0
        for i, a in enumerate(x):
            if a:
                row = g[i]
                total += a * sum(b * row[j] for j, b in enumerate(y) if b)
        return Fraction(total, den)

    def b(self, x: Element, y: Element) -> Fraction:
        return _mod1(self._pair(x, y))

    def q(self, x: Element) -> Fraction:
        return _mod2(self._pair(x, x))

    def q_values(self) -> List[Fraction]:
        """``q`` on each generator."""
        return [self.q(g) for g in self.generators()]

    def negated(self) -> "FiniteQuadraticModule":
        g = tuple(tuple(-x for x in row) for row in self.gram)
        return FiniteQuadraticModule(self.orders, g)

    # -- lattice link
    def lift(self, x: Element) -> List[Fraction]:
        if self.lifts is None:
            raise ValueError("module has no lattice lifts")
        n = len(self.lifts[0]) if self.lifts else 0
        out = [Fraction(0)] * n
        for a, lv in zip(x, self.lifts):
            if a:
                for i in range(n):
                    out[i] += a * lv[i]
        return out

    def class_of(self, v: Sequence) -> Element:
        """Class of a dual vector (rational coordinates in the lattice basis)."""
        if self.lattice is None or self._v is None:
            raise ValueError("module has no lattice")
        y = intmat.vecmat(v, self.lattice.gram)
        if any(Fraction(a).denominator != 1 for a in y):
            raise NotIntegral("vector is not in the dual lattice")
        z = intmat.vecmat([int(a) for a in y], self._v)
        return tuple(int(z[p]) % d for p, d in zip(self._positions, self.orders))

    def sub_module(self, gens: Sequence[Element], orders: Sequence[int]) -> "FiniteQuadraticModule":
        """The module on chosen elements, assumed to generate a direct sum ``⊕ Z/orders``."""
        c = [list(x) for x in gens]
        g = tuple(tuple(self._pair(x, y) for y in c) for x in c)
        lifts = None
        if self.lifts is not None:
            lifts = tuple(tuple(self.lift(x)) for x in c)
        return FiniteQuadraticModule(tuple(orders), g, lifts, self.lattice)

    def primary_parts(self) -> Dict[int, Tuple["FiniteQuadraticModule", List[Element]]]:
        """Sylow decomposition: ``p -> (p-part module, its generators as elements here)``."""
        parts: Dict[int, Tuple[List[Element], List[int]]] = {}
        for i, d in enumerate(self.orders):
            for p, a in _factor(d).items():
                pa = p ** a
                m = d // pa
                gen = tuple(m if j == i else 0 for j in range(len(self.orders)))
                parts.setdefault(p, ([], []))
                parts[p][0].append(gen)
                parts[p][1].append(pa)
        out = {}
        for p in sorted(parts):
            gens, orders = parts[p]
            pairs = sorted(zip(orders, gens))
            orders = [o for o, _ in pairs]
            gens = [g for _, g in pairs]
            out[p] = (self.sub_module(gens, orders), gens)
        return out

    def combine(self, gens: Sequence[Element], coeffs: Sequence[int]) -> Element:
        acc = [0] * len(self.orders)
        for c, g in zip(coeffs, gens):
            if c:
                for k, a in enumerate(g):
                    acc[k] += c * a
        return tuple(a % d for a, d in zip(acc, self.orders))


def fqm_from_gram(orders: Sequence[int], gram: Sequence[Sequence]) -> FiniteQuadraticModule:
    """Abstract module from orders and a rational Gram matrix of generator lifts."""
    g = tuple(tuple(Fraction(x) for x in row) for row in gram)
    return FiniteQuadraticModule(tuple(int(d) for d in orders), g)


def glue_group(l: Lattice) -> FiniteQuadraticModule:
    """``G(L) = L*/L`` via the Smith form ``U G V = D``.

    A dual vector ``x`` maps to ``y = x G`` in ``Z^n``; the class is ``(y V)_i mod d_i``,
    so the generator lifts are ``(row i of V^{-1}) G^{-1}``.
    """
    if l.det == 0:
        raise Degenerate("glue group of a degenerate lattice")
    n = l.rank
    if n == 0:
        return FiniteQuadraticModule((), (), (), l, (), ())
    d, _, v = intmat.smith(l.gram)
    vinv = intmat.unimodular_inverse(v)
    ginv = l.inverse_gram
    positions = [i for i in range(n) if d[i][i] > 1]
    orders = tuple(d[i][i] for i in positions)
    lifts = tuple(tuple(intmat.vecmat(vinv[i], ginv)) for i in positions)
    gram = tuple(tuple(sum((a * gij * b for a, row in zip(x, l.gram) for gij, b in zip(row, y)),
                           Fraction(0)) for y in lifts) for x in lifts)
    return FiniteQuadraticModule(orders, gram, lifts, l,
                                 tuple(tuple(r) for r in v), tuple(positions))


def l_invariant(l: Lattice) -> int:
    """Minimal number of generators of ``G(L)``."""
    return glue_group(l).l


# ---------------------------------------------------------------- isotropic subgroups

def _closure(g: FiniteQuadraticModule, gens: Sequence[Element]) -> frozenset:
    elems = {g.zero()}
    frontier = [g.zero()]
    while frontier:
        new = []
        for x in frontier:
            for s in gens:
                y = g.add(x, s)
                if y not in elems:
                    elems.add(y)
                    new.append(y)
        frontier = new
    return frozenset(elems)


def isotropic_subgroups(g: FiniteQuadraticModule, cap: int = DEFAULT_GROUP_CAP,
                        max_order: Optional[int] = None) -> List[Tuple[frozenset, List[Element]]]:
    """All subgroups ``H`` with ``q|H = 0``, as ``(element set, generators)``.

    Coprime Sylow parts are handled independently and recombined.
    """
    if g.size > cap:
        raise GroupTooLarge(g.size, cap)
    per_prime = []
    for p, (part, embed) in g.primary_parts().items():
        subs = _isotropic_p_subgroups(part, max_order)
        mapped = []
        for elems, gens in subs:
            gens_full = [g.combine(embed, x) for x in gens]
            mapped.append((len(elems), gens_full))
        per_prime.append(mapped)
    out = []
    for combo in itertools.product(*per_prime) if per_prime else [()]:
        size = prod(c[0] for c in combo) if combo else 1
        if max_order is not None and size > max_order:
            continue
        gens = [x for c in combo for x in c[1]]
        out.append((_closure(g, gens), gens))
    out.sort(key=lambda t: (len(t[0]), sorted(t[0])))
    return out


def _isotropic_p_subgroups(g: FiniteQuadraticModule, max_order=None):
    null = [x for x in g.elements() if any(x) and g.q(x) == 0]
    start = frozenset([g.zero()])
    seen = {start: []}
    frontier = [start]
    while frontier:
        new = []
        for h in frontier:
            gens = seen[h]
            if max_order is not None and len(h) * 2 > max_order:
                continue
            for x in null:
                if x in h:
                    continue
                if any(g.b(x, s) != 0 for s in gens):
                    continue
                h2 = _closure(g, gens + [x])
                if max_order is not None and len(h2) > max_order:
                    continue
                if h2 not in seen:
                    seen[h2] = gens + [x]
                    new.append(h2)
        frontier = new
    return list(seen.items())


# ---------------------------------------------------------------- overlattices

class Overlattice(NamedTuple):
    lattice: Lattice
    index: int
    basis: Tuple[Tuple[Fraction, ...], ...]
    glue: Tuple[Element, ...]


def overlattice_from_glue(l: Lattice, g: FiniteQuadraticModule, gens: Sequence[Element]) -> Overlattice:
    """Lattice spanned by ``L`` and lifts of the given glue elements, in an HNF basis."""
    n = l.rank
    rows = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    rows += [g.lift(x) for x in gens]
    den = intmat.lcm_denominator(a for r in rows for a in r)
    ints = [[int(a * den) for a in r] for r in rows]
    h = intmat.hnf(ints)
    basis = [[Fraction(a, den) for a in r] for r in h]
    gram = [[sum((x * gij * y for x, row in zip(u, l.gram) for gij, y in zip(row, w)), Fraction(0))
             for w in basis] for u in basis]
    if any(x.denominator != 1 for r in gram for x in r):
        raise NotIntegral("glue is not isotropic")
    lat = make_lattice([[int(x) for x in r] for r in gram])
    index = abs(den ** n // intmat.det(h)) if n else 1
    return Overlattice(lat, index, tuple(tuple(r) for r in basis), tuple(gens))


def even_overlattices_detailed(l: Lattice, cap: int = DEFAULT_GROUP_CAP,
                               max_order: Optional[int] = None) -> List[Overlattice]:
    if not l.is_even:
        raise ValueError("even_overlattices needs an even lattice")
    g = glue_group(l)
    out = []
    for elems, gens in isotropic_subgroups(g, cap, max_order):
        ov = overlattice_from_glue(l, g, gens)
        assert ov.index == len(elems)
        out.append(ov)
    return out


def even_overlattices(l: Lattice, cap: int = DEFAULT_GROUP_CAP) -> List[Tuple[Lattice, int]]:
    """One even overlattice per ``q``-null subgroup of ``G(L)`` (the trivial one included)."""
    return [(o.lattice, o.index) for o in even_overlattices_detailed(l, cap)]


ORBIT_GENERATORS = 24


def prime_index_overlattices(l: Lattice, p: int, cap: int = DEFAULT_GROUP_CAP) -> List[Lattice]:
    """Even overlattices of index ``p``, deduplicated up to isometry (definite) or genus."""
    from .errors import TooLarge
    from .isometry import automorphism_group, induced_discriminant_action, is_isometric_definite, same_genus

    g = glue_group(l)
    subs = [(elems, gens) for elems, gens in isotropic_subgroups(g, cap, max_order=p)
            if len(elems) == p]
    if l.is_definite and len(subs) > 1:
        # subgroups in one O(L)-orbit give isometric overlattices
        # (a few generators already give large orbits; isometry tests handle the rest)
        acts: List[Tuple[Element, ...]] = []
        try:
            for w in automorphism_group(l).generators:
                a = tuple(induced_discriminant_action(l, w, g))
                if a not in acts:
                    acts.append(a)
                if len(acts) >= ORBIT_GENERATORS:
                    break
        except TooLarge:
            pass

        def key(h):
            return min(x for x in h if any(x))

        index = {key(elems): (elems, gens) for elems, gens in subs}
        done = set()
        kept = []
        for k0, (elems, gens) in index.items():
            if k0 in done:
                continue
            kept.append((elems, gens))
            done.add(k0)
            frontier = [k0]
            while frontier and len(done) < len(index):
                new = []
                for x in frontier:
                    for a in acts:
                        y = g.combine(a, x)
                        k = min(g.scale(c, y) for c in range(1, p))
                        if k not in done:
                            done.add(k)
                            new.append(k)
                frontier = new
        subs = kept
    found = [overlattice_from_glue(l, g, gens).lattice for _, gens in subs]
    reps: List[Lattice] = []
    for m in found:
        if l.is_definite:
            dup = any(is_isometric_definite(m, r) is not None for r in reps)
        else:
            dup = any(same_genus(m, r) for r in reps)
        if not dup:
            reps.append(m)
    return reps


def exists_prime_overlattice_shortcut(l: Lattice, p: int) -> bool:
    """Whether divisibility of ``det`` alone guarantees an even overlattice of index ``p``."""
    d = abs(l.det)
    if p == 2:
        return d % 16 == 0
    return d % (p ** 3) == 0
