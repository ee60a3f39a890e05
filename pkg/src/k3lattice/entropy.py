"""Entropy tests for even hyperbolic lattices, reducible fibers and critical sublattices.

Lattices in split form ``L = U + M`` have the hyperbolic plane on the first two
coordinates: ``e = (1, 0, ...)`` and ``e' = (0, 1, ...)`` with ``(e, e') = 1``,
and ``M`` negative definite on the remaining ones.

Every positive or zero verdict carries a certificate (plain JSON data) that
:func:`verify_verdict` re-checks from scratch.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import intmat
from .discriminant import (DEFAULT_GROUP_CAP, _factor, glue_group, overlattice_from_glue)
from .dsl import lattice as parse_lattice
from .errors import (GroupTooLarge, ModulusTooSmall, NotSplitForm, RankTooSmall, TableMissing,
                     TooLarge)
from .isometry import (automorphism_group, induced_discriminant_action, is_isometric_definite,
                       orthogonal_q_group_order, same_genus)
from .lattice import Lattice, SublatticeBasis, contains, direct_sum, orthogonal_complement, twist
from .tables import ZeroTable
from .vectors import covering_radius_sq, reduce_lattice, roots, short_vectors

POSITIVE = "PositiveEntropy"
ZERO = "ZeroEntropy"
INCONCLUSIVE = "Inconclusive"

U_LATTICE = Lattice(((0, 1), (1, 0)))

DEFAULT_SUBLATTICE_TRIALS = 500
DEFAULT_GENUS_TRIALS = 200
DEFAULT_COORD_BOUND = 10
DEFAULT_SEED = 0


@dataclass(frozen=True)
class Verdict:
    status: str
    test_name: str
    certificate: Dict[str, Any] = field(default_factory=dict, compare=False)
    seed: Optional[int] = None

    @property
    def positive(self) -> bool:
        return self.status == POSITIVE

    @property
    def zero(self) -> bool:
        return self.status == ZERO

    def to_json(self) -> Dict[str, Any]:
        return {"status": self.status, "test": self.test_name, "seed": self.seed,
                "certificate": self.certificate}


def _inconclusive(test: str, reason: str, seed=None, **extra) -> Verdict:
    cert = {"reason": reason}
    cert.update(extra)
    return Verdict(INCONCLUSIVE, test, cert, seed)


def _gram_json(g) -> List[List[int]]:
    return [[int(x) for x in row] for row in (g.gram if isinstance(g, Lattice) else g)]


def _frac(x) -> str:
    return str(Fraction(x))


# ---------------------------------------------------------------- split form

def as_lattice(x) -> Lattice:
    return parse_lattice(x) if isinstance(x, str) else x


def split_form(l: Lattice) -> Lattice:
    """The summand ``M`` of ``l = U + M`` given in split coordinates."""
    l = as_lattice(l)
    g = l.gram
    n = l.rank
    if n < 2 or g[0][0] != 0 or g[1][1] != 0 or g[0][1] != 1 or any(
            g[i][j] for i in (0, 1) for j in range(2, n)):
        raise NotSplitForm("lattice is not presented as U + M")
    m = Lattice(tuple(tuple(row[2:]) for row in g[2:]))
    if m.rank and (not m.is_even or not m.is_negative_definite):
        raise NotSplitForm("the complement of U is not even negative definite")
    return m


def is_split_form(l: Lattice) -> bool:
    try:
        split_form(l)
        return True
    except NotSplitForm:
        return False


def _embed(v: Sequence[int]) -> Tuple[int, ...]:
    return (0, 0) + tuple(int(a) for a in v)


def _bezout(vals: Sequence[int]) -> List[int]:
    """Coefficients ``c`` with ``sum(c_i * vals_i) == gcd(vals)``."""
    coeffs = [0] * len(vals)
    g = 0
    for i, v in enumerate(vals):
        v = int(v)
        if v == 0:
            continue
        if g == 0:
            g = abs(v)
            coeffs[i] = 1 if v > 0 else -1
            continue
        # extended gcd of g and v
        a, b = g, v
        x0, x1, y0, y1 = 1, 0, 0, 1
        while b:
            q, r = divmod(a, b)
            a, b = b, r
            x0, x1 = x1, x0 - q * x1
            y0, y1 = y1, y0 - q * y1
        if a < 0:
            a, x0, y0 = -a, -x0, -y0
        coeffs = [c * x0 for c in coeffs]
        coeffs[i] = y0
        g = a
    return coeffs


def _divisor_pairs(t: int) -> List[Tuple[int, int]]:
    """All integer pairs ``(a, b)`` with ``a * b == t`` (``t != 0``)."""
    t = int(t)
    out = []
    at = abs(t)
    d = 1
    while d * d <= at:
        if at % d == 0:
            for a in {d, at // d}:
                b = t // a
                out.append((a, b))
                out.append((-a, -b))
        d += 1
    return out


# ---------------------------------------------------------------- fibers

@dataclass(frozen=True)
class FiberDescription:
    affine_type: str
    component_count: int
    component_vectors: Tuple[Tuple[int, ...], ...]


def _highest_root(m: Lattice, simple: Sequence[Tuple[int, ...]], members) -> Tuple[int, ...]:
    sg = intmat.congruent(simple, m.gram)
    inv = intmat.rational_inverse(sg)
    best, best_h = None, None
    for r in members:
        pair = [m.b(r, s) for s in simple]
        coeffs = intmat.vecmat(pair, inv)
        h = sum(coeffs)
        if best_h is None or h > best_h:
            best, best_h = r, h
    return best


def reducible_fibers(l: Lattice) -> List[FiberDescription]:
    """One reducible fiber of ``e`` per ADE component of the roots of ``M``.

    Components are the simple roots plus the affine node ``e - theta`` with
    ``theta`` the highest root, all in coordinates of ``l``.
    """
    l = as_lattice(l)
    m = split_form(l)
    out = []
    for comp in roots(m).components:
        theta = _highest_root(m, comp.simple, comp.roots)
        node = tuple([1, 0] + [-a for a in theta])
        vecs = tuple(_embed(s) for s in comp.simple) + (node,)
        out.append(FiberDescription(f"{comp.family}~{comp.rank}", comp.rank + 1, vecs))
    return out


# ---------------------------------------------------------------- roots of U + M

def _split_roots(l: Lattice, m: Lattice, norm_bound: int, ab_bound: int) -> List[Tuple[int, ...]]:
    """Roots ``(a, b, v)`` of ``l`` with ``-v^2 <= norm_bound``; for ``v^2 = -2`` also ``|a|, |b| <= ab_bound``."""
    out = [(1, -1) + (0,) * m.rank, (-1, 1) + (0,) * m.rank]
    if m.rank == 0:
        return out
    pos = twist(m, -1)
    for v in short_vectors(pos, norm_bound):
        t = pos.norm(v) // 2
        if t == 1:
            for k in range(-ab_bound, ab_bound + 1):
                out.append((k, 0) + v)
                if k:
                    out.append((0, k) + v)
        else:
            for a, b in _divisor_pairs(t - 1):
                out.append((a, b) + v)
    return out


def _max_reduced_diag(m: Lattice) -> int:
    if m.rank == 0:
        return 2
    red, _ = reduce_lattice(m)
    return max(-red.gram[i][i] for i in range(m.rank))


# ---------------------------------------------------------------- residue certificate

def _smith_data(basis: Sequence[Sequence[int]]):
    d, _, v = intmat.smith(basis)
    diag = [d[i][i] for i in range(len(basis))]
    return diag, v


def quotient_exponent(basis: Sequence[Sequence[int]]) -> int:
    diag, _ = _smith_data(basis)
    e = 1
    for x in diag:
        e = e * x // gcd(e, x)
    return e


def root_residue_certificate(l: Lattice, s: SublatticeBasis | Sequence[Sequence[int]],
                             modulus: int, max_cosets: int = 4_000_000) -> bool:
    """True when no root of ``l`` can lie outside the full-rank sublattice ``s``.

    For every class ``x + N L`` outside ``s`` (``N = modulus``, a multiple of
    the exponent of ``L/S``) the norms ``(x + N w)^2`` run over
    ``x^2 + 2N d Z`` with ``d = gcd(N, (x, L))``; the class can only contain a
    root when ``x^2 + 2`` is divisible by ``2 N d``. False means inconclusive.
    """
    l = as_lattice(l)
    basis = [list(r) for r in (s.vectors if isinstance(s, SublatticeBasis) else s)]
    n = l.rank
    if len(basis) != n or intmat.det(basis) == 0:
        raise ValueError("sublattice must have full rank")
    diag, v = _smith_data(basis)
    expo = quotient_exponent(basis)
    if modulus <= 0 or modulus % expo:
        raise ModulusTooSmall(f"modulus {modulus} is not a multiple of the exponent {expo}")
    if all(d == 1 for d in diag):
        return True
    big_n = modulus
    if big_n ** n > max_cosets:
        raise TooLarge(f"{big_n}^{n} residue classes exceed the limit")
    g = np.array(l.gram, dtype=object if big_n ** 2 * n * n * max(
        1, max(abs(x) for row in l.gram for x in row)) > 2 ** 60 else np.int64)
    vm = np.array(v, dtype=g.dtype)
    dd = np.array(diag, dtype=g.dtype)
    grid = np.array(list(itertools.product(range(big_n), repeat=n)), dtype=g.dtype)
    coords = (grid @ vm) % dd
    inside = np.all(coords == 0, axis=1)
    x = grid[~inside]
    if len(x) == 0:
        return True
    xg = x @ g
    norms = np.sum(xg * x, axis=1)
    d = np.full(len(x), big_n, dtype=g.dtype)
    for j in range(n):
        d = np.gcd(d, np.abs(xg[:, j]) % big_n if g.dtype != object else
                   np.array([abs(int(a)) % big_n for a in xg[:, j]], dtype=object))
    if g.dtype == object:
        d = np.array([gcd(int(a), big_n) or big_n for a in d], dtype=object)
    d[d == 0] = big_n
    bad = (norms + 2) % (2 * big_n * d) == 0
    return not bool(np.any(bad))


# ---------------------------------------------------------------- genus neighbours

def neighbour_complement(l: Lattice, e: Sequence[int]) -> Optional[Tuple[Lattice, Tuple[int, ...]]]:
    """``<e, y>^perp`` for isotropic ``e`` with ``(e, L) = Z``; returns (LLL-reduced lattice, y)."""
    p = intmat.vecmat(e, l.gram)
    if intmat.content(p) != 1 or l.norm(e) != 0:
        return None
    y = _bezout(p)
    y2 = l.norm(y)
    y = [a - (y2 // 2) * b for a, b in zip(y, e)]
    comp = orthogonal_complement(l, [list(e), y])
    n = l.sublattice(comp.vectors)
    if n.rank == 0:
        return n, tuple(y)
    red, _ = reduce_lattice(n)
    return red, tuple(y)


def _random_vector(rng: random.Random, k: int, bound: int) -> List[int]:
    while True:
        support = rng.randint(1, k)
        idx = rng.sample(range(k), support)
        c = [0] * k
        for i in idx:
            c[i] = rng.randint(-bound, bound)
        if any(c):
            return c


class _Classes:
    """Isometry classes of definite lattices, compared by root system then exact search."""

    def __init__(self, budget: int):
        self.reps: List[Tuple[Lattice, Tuple, int]] = []
        self.known: Dict[Any, int] = {}
        self.budget = budget

    def add(self, n: Lattice) -> Optional[int]:
        """Index of the class of ``n``; a new class is opened only when proven distinct."""
        if n.gram in self.known:
            return self.known[n.gram]
        rs = roots(n)
        key = (rs.type_string(), n.det)
        idx = None
        for i, (rep, k2, _) in enumerate(self.reps):
            if k2 != key:
                continue
            try:
                # the representative is the search source so its vectors stay cached
                if is_isometric_definite(rep, n, self.budget) is not None:
                    idx = i
                    break
            except TooLarge:
                idx = i
                break
        if idx is None:
            self.reps.append((n, key, rs.rank))
            idx = len(self.reps) - 1
        self.known[n.gram] = idx
        return idx


def genus_neighbours(l: Lattice, trials: int, seed: int, bound: int = DEFAULT_COORD_BOUND):
    """Random lattices ``e_v^perp / e_v`` in the genus of ``M`` (``l = U + M``).

    Yields ``(trial, v, (a, b), N)`` for isotropic ``e_v = (a, b, v)`` with
    ``ab = -v^2/2`` and ``(e_v, L) = Z``. Factorizations with a unit factor
    are skipped since they return ``M`` itself. The coordinate bound doubles
    after a run of unusable trials.
    """
    m = split_form(l)
    if m.rank == 0:
        return
    rng = random.Random(seed)
    red, t = reduce_lattice(m)
    idle = 0
    for trial in range(trials):
        if idle >= max(trials // 8, 16):
            bound *= 2
            idle = 0
        c = _random_vector(rng, m.rank, bound)
        v = intmat.vecmat(c, t)
        cv = intmat.content(intmat.vecmat(v, m.gram))
        tt = -m.norm(v) // 2
        pairs = [(a, b) for a, b in _divisor_pairs(tt)
                 if abs(a) > 1 and abs(b) > 1 and gcd(gcd(a, b), cv) == 1]
        if not pairs:
            idle += 1
            continue
        a, b = rng.choice(pairs)
        e = [a, b] + list(v)
        res = neighbour_complement(l, e)
        if res is None:
            idle += 1
            continue
        idle = 0
        yield trial, tuple(v), (a, b), res[0]


def _two_classes(l: Lattice, trials: int, seed: int, need_rootless: bool,
                 bound: int = DEFAULT_COORD_BOUND, budget: int = 200_000):
    """Search two non-isometric neighbours (optionally both without finite-index roots)."""
    m = split_form(l)
    classes = _Classes(budget)
    red_m, _ = reduce_lattice(m) if m.rank else (m, None)
    seen: Dict[int, Dict[str, Any]] = {}
    start = [(-1, None, (1, 0), red_m)]
    for trial, v, ab, n in itertools.chain(start, genus_neighbours(l, trials, seed, bound)):
        rs = roots(n)
        if need_rootless and rs.rank == n.rank:
            continue
        idx = classes.add(n)
        if idx not in seen:
            seen[idx] = {"trial": trial, "v": list(v) if v else None, "ab": list(ab), "gram": n,
                         "root_type": rs.type_string(), "root_rank": rs.rank}
        if len(seen) >= 2:
            return [seen[i] for i in sorted(seen)[:2]]
    return None


# ---------------------------------------------------------------- critical sublattice

@dataclass(frozen=True)
class CriticalSublatticeResult:
    ambient: Lattice
    basis: Optional[SublatticeBasis]
    index: Optional[int]
    certificate: Dict[str, Any]

    @property
    def decided(self) -> bool:
        return self.index is not None

    def lattice(self) -> Lattice:
        if self.basis is None:
            raise ValueError("critical sublattice is undecided")
        return self.basis.lattice()


def _order_in_quotient(diag, v, x) -> int:
    z = intmat.vecmat(x, v)
    order = 1
    for zi, d in zip(z, diag):
        if d > 1:
            k = d // gcd(d, zi % d)
            order = order * k // gcd(order, k)
    return order


def _certify_span(l: Lattice, span: List[List[int]]):
    """Residue certificate at ``N`` and ``2N``; returns the modulus used or None."""
    expo = quotient_exponent(span)
    for mod in (expo, 2 * expo):
        try:
            if root_residue_certificate(l, span, mod):
                return mod
        except TooLarge:
            return None
    return None


def critical_sublattice(l: Lattice, genus_trials: int = 64, seed: int = DEFAULT_SEED,
                        rounds: int = 4) -> CriticalSublatticeResult:
    """``L_cr`` for ``l = U + M`` with a certificate, or an undecided result."""
    l = as_lattice(l)
    m = split_form(l)
    n = l.rank
    ident = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    full = SublatticeBasis(l, tuple(ident), 1)
    fibers = reducible_fibers(l)
    big = [f for f in fibers if f.component_count >= 3]
    if big:
        return CriticalSublatticeResult(l, full, 1, {
            "rule": "fiber-with-three-components", "fiber": big[0].affine_type,
            "component_count": big[0].component_count,
            "note": "index one follows from a reducible fiber with at least three components"})
    if m.rank >= 2 and genus_trials > 0:
        pair = _two_classes(l, genus_trials, seed, need_rootless=False)
        if pair:
            return CriticalSublatticeResult(l, full, 1, {
                "rule": "two-genus-classes", "seed": seed,
                "classes": [_gram_json(p["gram"]) for p in pair],
                "vectors": [[p["ab"], p["v"]] for p in pair]})
    e = [1] + [0] * (n - 1)
    base = _max_reduced_diag(m)
    if not fibers:
        for r in range(rounds):
            nb = 2 * base * (2 ** r)
            rts = _split_roots(l, m, nb, 2)
            span = intmat.hnf([list(x) for x in rts])
            if len(span) < n:
                continue
            mod = _certify_span(l, span)
            if mod is None:
                continue
            diag, v = _smith_data(span)
            index = 1
            for d in diag:
                index *= d
            order = _order_in_quotient(diag, v, e)
            if order != index:
                return CriticalSublatticeResult(l, None, None, {
                    "rule": "undecided", "reason": "quotient by the root span is not generated by e"})
            return CriticalSublatticeResult(l, SublatticeBasis(l, tuple(tuple(r) for r in span), index), index, {
                "rule": "rootless-root-span", "modulus": mod, "root_norm_bound": nb,
                "seed_roots": len(rts)})
        return CriticalSublatticeResult(l, None, None, {
            "rule": "undecided", "reason": "residue certificate failed for the root span"})
    # every fiber has two components: the index is 1 or 2
    d0 = [-1, 1] + [0] * m.rank
    for r in range(rounds):
        nb = 2 * base * (2 ** r)
        rts = _split_roots(l, m, nb, 2 + 2 * r)
        span = _reflection_closure(l, [d0], rts)
        if contains(span, e):
            return CriticalSublatticeResult(l, full, 1, {
                "rule": "section-closure-contains-e", "root_norm_bound": nb,
                "seed_roots": len(rts)})
    return CriticalSublatticeResult(l, None, None, {
        "rule": "undecided",
        "reason": "index is 1 or 2 (fibers with two components) and e was not reached"})


def _reflection_closure(l: Lattice, start: List[List[int]], rts, max_iter: int = 50) -> List[List[int]]:
    """Smallest lattice containing ``start`` with ``(v, r) r`` added for every listed root ``r``."""
    span = intmat.hnf(start)
    rows = [(list(r), intmat.vecmat(r, l.gram)) for r in rts]
    for _ in range(max_iter):
        new = [list(x) for x in span]
        for r, rg in rows:
            g = 0
            for b in span:
                g = gcd(g, sum(x * y for x, y in zip(b, rg)))
            if g:
                new.append([g * a for a in r])
        nxt = intmat.hnf(new)
        if nxt == span:
            break
        span = nxt
    return span


def zero_entropy_sublattice_bases(cr: CriticalSublatticeResult) -> List[SublatticeBasis]:
    """Lattices between ``L_cr`` and ``L``: ``L_cr + Z (index/d) e`` for each divisor ``d``."""
    if not cr.decided:
        raise ValueError("critical sublattice is undecided")
    l = cr.ambient
    n = l.rank
    idx = cr.index
    out = []
    for d in sorted(k for k in range(1, idx + 1) if idx % k == 0):
        step = idx // d
        rows = [list(r) for r in cr.basis.vectors] + [[step] + [0] * (n - 1)]
        out.append(SublatticeBasis(l, tuple(tuple(r) for r in intmat.hnf(rows)), step))
    return out


def zero_entropy_sublattices(l: Lattice, cr: Optional[CriticalSublatticeResult] = None) -> List[Lattice]:
    """All full-rank zero-entropy sublattices of a zero-entropy ``l = U + M``."""
    if cr is None:
        cr = critical_sublattice(l)
    return [b.lattice() for b in zero_entropy_sublattice_bases(cr)]


# ---------------------------------------------------------------- 2-reflectivity helpers

def two_elementary_invariants(l: Lattice) -> Optional[Tuple[int, int, int]]:
    """``(r, a, delta)`` when ``G(l)`` is 2-elementary, else None."""
    g = glue_group(l)
    if any(o != 2 for o in g.orders):
        return None
    delta = 0 if all(g.q(x).denominator == 1 for x in g.generators()) else 1
    return l.rank, g.l, delta


def genus_in(l: Lattice, entries: Iterable[Lattice], cap: int = DEFAULT_GROUP_CAP) -> Optional[bool]:
    """Whether ``l`` shares a genus with some entry; None if a comparison exceeded the cap."""
    unknown = False
    for t in entries:
        if t.rank != l.rank or abs(t.det) != abs(l.det):
            continue
        try:
            if same_genus(l, t, cap):
                return True
        except (GroupTooLarge, TooLarge):
            unknown = True
    return None if unknown else False


def _isotropic_in_kernel(l: Lattice, m: Lattice, y: Sequence[int], norm_bound: int,
                         limit: int = 5000):
    """Isotropic ``x = (a, b, v)`` of ``l = U + M`` with ``x . y = 0`` and ``-v^2 <= norm_bound``."""
    y0, y1 = y[0], y[1]
    ym = y[2:]
    found = []
    if y0 == 0:
        found.append((1, 0) + (0,) * m.rank)
    if y1 == 0:
        found.append((0, 1) + (0,) * m.rank)
    if m.rank == 0:
        return found
    pos = twist(m, -1)
    vecs = short_vectors(pos, norm_bound)
    for v in vecs[:limit]:
        t = pos.norm(v) // 2
        c = -sum(a * b for a, b in zip(v, ym))
        sols = []
        if y0 == 0 and y1 == 0:
            if c == 0:
                sols = _divisor_pairs(t)
        elif y0 == 0:
            if c % y1 == 0:
                b = c // y1
                if b and t % b == 0:
                    sols = [(t // b, b)]
        elif y1 == 0:
            if c % y0 == 0:
                a = c // y0
                if a and t % a == 0:
                    sols = [(a, t // a)]
        else:
            # y1 b^2 - c b + t y0 = 0
            disc = c * c - 4 * y1 * t * y0
            if disc >= 0:
                s = _isqrt(disc)
                if s * s == disc:
                    for num in (c + s, c - s):
                        if num % (2 * y1) == 0:
                            b = num // (2 * y1)
                            if (c - b * y1) % y0 == 0:
                                sols.append(((c - b * y1) // y0, b))
        for a, b in sols:
            found.append((a, b) + tuple(v))
    return found


def _isqrt(n: int) -> int:
    from math import isqrt
    return isqrt(n)


def cusp_lattice(l: Lattice, e: Sequence[int]) -> Lattice:
    """``e^perp / Z e`` for a primitive isotropic ``e``, LLL-reduced."""
    e = [int(a) for a in e]
    if l.norm(e) != 0 or intmat.content(e) != 1:
        raise ValueError("vector is not primitive isotropic")
    perp = [list(r) for r in intmat.left_kernel(intmat.matmul(l.gram, [[a] for a in e]))]
    # coordinates of e in the basis of e^perp
    sol = intmat.left_kernel([list(r) for r in perp] + [e])
    c = [a for a in sol[0]]
    ce = [-a for a in c[:-1]] if c[-1] == 1 else [a for a in c[:-1]]
    t = intmat.complete_to_basis([intmat.primitive(ce)], len(perp))
    rows = [intmat.vecmat(r, perp) for r in t[1:]]
    k = l.sublattice(rows)
    if k.rank == 0:
        return k
    return reduce_lattice(k)[0]


def cusp_witness(l: Lattice, e: Sequence[int]) -> Optional[Dict[str, Any]]:
    """Witness that ``l`` is not 2-reflective: a cusp ``e`` whose ``e^perp/e`` lacks finite-index roots.

    A 2-reflective hyperbolic lattice has a Weyl group of finite index, so the
    roots orthogonal to any isotropic ``e`` span a finite-index sublattice of
    ``e^perp / e``.
    """
    k = cusp_lattice(l, e)
    if k.rank == 0:
        return None
    rr = roots(k).rank
    if rr == k.rank:
        return None
    return {"isotropic": [int(a) for a in e], "cusp_lattice": _gram_json(k), "root_rank": rr}


def nonreflective_witness_split(l: Lattice, extra_trials: int = 0, seed: int = 0) -> Optional[Dict[str, Any]]:
    """Certificate that ``l = U + M`` is not 2-reflective.

    For ``e`` with ``(e, L) = Z`` the cusp lattice ``e^perp/e`` is the
    complement of a hyperbolic plane, so ``M`` and its genus neighbours are
    tried in turn.
    """
    m = split_form(l)
    if m.rank == 0:
        return None
    w = cusp_witness(l, [1] + [0] * (l.rank - 1))
    if w is not None:
        return w
    for trial, v, ab, n in genus_neighbours(l, extra_trials, seed):
        if roots(n).rank < n.rank:
            return cusp_witness(l, list(ab) + list(v))
    return None


def _witness_in_sublattice(l: Lattice, m: Lattice, y: Sequence[int], basis, sub: Lattice,
                           norm_bound: int, max_cusps: int = 12) -> Optional[Dict[str, Any]]:
    """Non-2-reflectivity certificate for ``sub = y^perp`` (basis rows in ``l``)."""
    coords_map = intmat.complete_to_basis(basis, l.rank)
    inv = intmat.unimodular_inverse(coords_map)
    k = len(basis)
    tried = set()
    for x in _isotropic_in_kernel(l, m, y, norm_bound):
        c = intmat.vecmat(x, inv)
        if any(c[k:]):
            continue
        cx = intmat.primitive([int(a) for a in c[:k]])
        key = tuple(cx)
        if key in tried or tuple(-a for a in cx) in tried:
            continue
        tried.add(key)
        w = cusp_witness(sub, cx)
        if w is not None:
            return w
        if len(tried) >= max_cusps:
            break
    return None


def verify_nonreflective_witness(sub: Lattice, w: Dict[str, Any]) -> bool:
    e = w["isotropic"]
    if sub.norm(e) != 0 or intmat.content(e) != 1:
        return False
    k = cusp_lattice(sub, e)
    claimed = Lattice(tuple(tuple(r) for r in w["cusp_lattice"]))
    if claimed.rank != k.rank or claimed.rank == 0:
        return False
    if is_isometric_definite(claimed, k) is None:
        return False
    return roots(k).rank < k.rank


# ---------------------------------------------------------------- the tests

def det_cube_test(l: Lattice) -> Verdict:
    """Positive when ``rank >= 13`` and ``p^3 | det`` for an odd prime ``p``."""
    l = as_lattice(l)
    if l.rank < 13:
        raise RankTooSmall(f"rank {l.rank} < 13")
    for p, a in sorted(_factor(l.det).items()):
        if p != 2 and a >= 3:
            return Verdict(POSITIVE, "det-cube", {"prime": p, "det": l.det, "rank": l.rank})
    return _inconclusive("det-cube", "no odd prime cube divides the determinant", det=l.det)


def covering_radius_test(l: Lattice, table=None) -> Verdict:
    """Zero entropy when the squared covering radius of ``M(-1)`` is at most 2."""
    l = as_lattice(l)
    m = split_form(l)
    if m.rank == 0:
        return Verdict(ZERO, "covering-radius", {"covering_radius_sq": "0", "method": "empty"})
    res = covering_radius_sq(twist(m, -1), table)
    if not res.known:
        return _inconclusive("covering-radius", "covering radius not certified")
    cert = {"covering_radius_sq": _frac(res.value_sq), "method": res.method, "detail": res.detail}
    if res.value_sq <= 2:
        return Verdict(ZERO, "covering-radius", cert)
    return Verdict(INCONCLUSIVE, "covering-radius", dict(cert, reason="covering radius exceeds sqrt 2"))


def _p_torsion_lines(g, p: int):
    """Generators of the order-``p`` subgroups of ``G``, one per line."""
    idx = [i for i, d in enumerate(g.orders) if d % p == 0]
    k = len(idx)
    for c in itertools.product(range(p), repeat=k):
        nz = [a for a in c if a]
        if not nz or nz[0] != 1:
            continue
        x = [0] * len(g.orders)
        for i, a in zip(idx, c):
            x[i] = a * (g.orders[i] // p)
        yield tuple(x)


def overlattice_test(l: Lattice, f_table: Optional[Sequence[Lattice]], complete: bool = False,
                     cap_enum: int = 200_000, witness_trials: int = 8, seed: int = 0) -> Verdict:
    """Positive when some prime-index even overlattice ``U + M'`` is certifiably not 2-reflective.

    A zero-entropy ``U + M`` has only 2-reflective nontrivial even
    overlattices. ``U + M'`` is certified non-2-reflective either by a
    genus absent from a complete 2-reflective table of its rank, or by a
    lattice in the genus of ``M'`` without a root sublattice of finite index.
    """
    l = as_lattice(l)
    if f_table is None:
        raise TableMissing(f"no 2-reflective table for rank {l.rank}")
    m = split_form(l)
    if m.rank == 0 or abs(m.det) == 1:
        return _inconclusive("overlattice", "M is unimodular")
    g = glue_group(m)
    entries = list(f_table)
    checked = 0
    seen = set()
    for p in sorted(_factor(m.det)):
        k = sum(1 for d in g.orders if d % p == 0)
        if (p ** k - 1) // (p - 1) > cap_enum:
            return _inconclusive("overlattice", f"too many order-{p} subgroups", prime=p)
        for x in _p_torsion_lines(g, p):
            if g.q(x) != 0:
                continue
            ov = overlattice_from_glue(m, g, [x])
            mp = ov.lattice
            lp = direct_sum(U_LATTICE, mp)
            checked += 1
            cert = {"prime": p, "glue": list(x), "overlattice_gram": _gram_json(mp),
                    "glue_lift": [_frac(a) for a in g.lift(x)]}
            if complete:
                match = genus_in(lp, entries)
                if match is False:
                    return Verdict(POSITIVE, "overlattice", dict(
                        cert, reason="genus absent from complete 2-reflective table",
                        table_dets=sorted({abs(t.det) for t in entries})))
                continue
            gkey = (abs(mp.det), tuple(sorted(glue_group(mp).orders)))
            rkey = roots(mp).type_string()
            if (gkey, rkey) in seen:
                continue
            seen.add((gkey, rkey))
            wit = nonreflective_witness_split(lp, witness_trials, seed)
            if wit is not None:
                return Verdict(POSITIVE, "overlattice", dict(
                    cert, reason="overlattice is not 2-reflective", witness=wit))
    if checked == 0:
        return _inconclusive("overlattice", "M has no nontrivial even overlattice")
    return _inconclusive("overlattice", "every overlattice found is 2-reflective or unresolved",
                         overlattices=checked)


def genus_test(l: Lattice, trials: int = DEFAULT_GENUS_TRIALS, seed: int = DEFAULT_SEED,
               bound: int = DEFAULT_COORD_BOUND) -> Verdict:
    """Positive when two non-isometric lattices in the genus of ``M`` both lack finite-index roots."""
    l = as_lattice(l)
    m = split_form(l)
    if m.rank <= 1:
        return _inconclusive("genus", "rank-one genera have one class", seed)
    pair = _two_classes(l, trials, seed, need_rootless=True, bound=bound)
    if not pair:
        return _inconclusive("genus", "no two distinct classes without finite-index roots found", seed)
    a, b = pair
    inv = ("root system" if a["root_type"] != b["root_type"] else "exhaustive isometry search")
    return Verdict(POSITIVE, "genus", {
        "classes": [_gram_json(a["gram"]), _gram_json(b["gram"])],
        "root_types": [a["root_type"], b["root_type"]],
        "vectors": [[a["ab"], a["v"]], [b["ab"], b["v"]]],
        "distinguished_by": inv}, seed)


def _group_closure_size(g, gens: List[Tuple[Tuple[int, ...], ...]], cap: int) -> int:
    """Order of the group generated by automorphisms given as images of the generators.

    Generators already in the group are dropped, so the working set stays short.
    """
    ident = tuple(g.generators())

    def compose(f, h):
        return tuple(g.combine(f, img) for img in h)

    seen = {ident}
    used: List[Tuple[Tuple[int, ...], ...]] = []
    for s in gens:
        if s in seen:
            continue
        used.append(s)
        frontier = list(seen)
        while frontier:
            new = []
            for x in frontier:
                for t in used:
                    y = compose(t, x)
                    if y not in seen:
                        seen.add(y)
                        new.append(y)
                        if len(seen) > cap:
                            raise TooLarge("image group exceeds the cap")
            frontier = new
    return len(seen)


IMAGE_CAP = 20_000


def surjectivity_test(l: Lattice, cap_group: int = DEFAULT_GROUP_CAP,
                      budget: int = 2_000_000) -> Verdict:
    """Positive when ``M`` lacks finite-index roots and ``O(M) -> O(q_M)`` is not onto."""
    l = as_lattice(l)
    m = split_form(l)
    if m.rank == 0:
        return _inconclusive("surjectivity", "M is zero")
    rs = roots(m)
    if rs.rank == m.rank:
        return _inconclusive("surjectivity", "M has a root sublattice of finite index")
    g = glue_group(m)
    if g.size == 1:
        return _inconclusive("surjectivity", "discriminant group is trivial")
    try:
        aut = automorphism_group(m, budget)
        gens = [tuple(induced_discriminant_action(m, w, g)) for w in aut.generators]
        image = _group_closure_size(g, gens, IMAGE_CAP)
        oq = orthogonal_q_group_order(g, cap_group)
    except (GroupTooLarge, TooLarge) as exc:
        return _inconclusive("surjectivity", f"cap exceeded: {exc}")
    cert = {"O_q_order": oq, "image_order": image, "O_M_order": aut.order}
    if image < oq:
        return Verdict(POSITIVE, "surjectivity", cert)
    return Verdict(INCONCLUSIVE, "surjectivity", dict(cert, reason="O(M) maps onto O(q_M)"))


def _sample_dual(rng: random.Random, m: Lattice, minv, bound: int, attempts: int = 64):
    """Dual coordinates ``y`` of a primitive ``w`` in ``(U + M)*`` with ``-1/2 <= w^2 < 0``."""
    k = m.rank
    den, num = minv
    for _ in range(attempts):
        ym = _random_vector(rng, k, bound)
        s = Fraction(sum(a * sum(r[j] * ym[j] for j in range(k)) for a, r in zip(ym, num)), den)
        # need 2 * y0 * y1 in [-1/2 - s, -s)
        lo = -Fraction(1, 2) - s
        p = -((-lo.numerator) // lo.denominator)  # ceil(lo)
        if p % 2:
            p += 1
        if not (p < -s):
            continue
        prod_ = p // 2
        if prod_ == 0:
            other = rng.randint(-bound, bound)
            y = [0, other] if rng.random() < 0.5 else [other, 0]
        else:
            a, b = rng.choice(_divisor_pairs(prod_))
            y = [a, b]
        y = y + ym
        if intmat.content(y) != 1:
            continue
        return y, 2 * y[0] * y[1] + s
    return None


def sublattice_certificate(l: Lattice, basis: Sequence[Sequence[int]], z_table: ZeroTable,
                           y: Optional[Sequence[int]] = None, norm_bound: Optional[int] = None
                           ) -> Optional[Dict[str, Any]]:
    """Certificate that the primitive corank-one ``basis`` spans a positive-entropy sublattice.

    Needs ``|det l / det L1| >= 2``, ``L1`` hyperbolic, ``rank + l(L1) <= 22``,
    a genus absent from ``z_table`` and, unless the table is complete, a
    non-2-reflectivity witness.
    """
    l = as_lattice(l)
    basis = [list(map(int, r)) for r in basis]
    n = l.rank
    if len(basis) != n - 1:
        return None
    sub = l.sublattice(basis)
    if sub.det == 0 or not sub.is_hyperbolic:
        return None
    if Fraction(abs(l.det), abs(sub.det)) < 2:
        return None
    if intmat.invariant_factors(basis).count(1) != n - 1:
        return None
    inv = [d for d in intmat.invariant_factors(sub.gram) if d != 1]
    if sub.rank + len(inv) > 22:
        return None
    if z_table.rank != sub.rank:
        raise ValueError("zero-entropy table has the wrong rank")
    match = genus_in(sub, z_table.entries)
    if match is not False:
        return None
    cert = {"basis": basis, "sublattice_gram": _gram_json(sub), "det_ratio": _frac(Fraction(l.det, sub.det)),
            "table_rank": z_table.rank}
    if z_table.complete:
        cert["reason"] = "genus absent from complete zero-entropy table"
        return cert
    if not z_table.nonreflective_complete:
        return None
    if y is None:
        y = right_kernel_dual(l, basis)
    m = split_form(l)
    nb = norm_bound if norm_bound is not None else 8 * _max_reduced_diag(m)
    wit = _witness_in_sublattice(l, m, y, basis, sub, nb)
    if wit is None:
        return None
    cert["reason"] = "not 2-reflective and genus absent from the zero-entropy list"
    cert["witness"] = wit
    return cert


def right_kernel_dual(l: Lattice, basis: Sequence[Sequence[int]]) -> List[int]:
    """Primitive integer ``y`` with ``x . y = 0`` for the rows ``x`` of ``basis``."""
    k = intmat.right_kernel(basis, l.rank)
    if len(k) != 1:
        raise ValueError("basis does not have corank one")
    return intmat.primitive(k[0])


def sublattice_test(l: Lattice, z_table: Optional[ZeroTable], trials: int = DEFAULT_SUBLATTICE_TRIALS,
                    seed: int = DEFAULT_SEED, bound: int = 3, norm_bound: Optional[int] = None) -> Verdict:
    """Random primitive corank-one sublattices ``L1 = w^perp`` with ``-1/2 <= w^2 < 0``.

    The condition on ``w`` is exactly ``|det L / det L1| >= 2``. A trial
    succeeds when :func:`sublattice_certificate` certifies ``L1``.
    """
    l = as_lattice(l)
    if trials <= 0:
        return _inconclusive("sublattice", "no trials requested", seed)
    if z_table is None:
        raise TableMissing(f"no zero-entropy table for rank {l.rank - 1}")
    try:
        m = split_form(l)
    except NotSplitForm:
        return _inconclusive("sublattice", "sampling needs split form", seed)
    if m.rank == 0:
        return _inconclusive("sublattice", "M is zero", seed)
    if l.rank - 1 <= 2 and not z_table.complete:
        return _inconclusive("sublattice", "no certificate available for rank-2 sublattices", seed)
    g = glue_group(m)
    if g.size <= DEFAULT_GROUP_CAP and not any(g.q(x) >= Fraction(3, 2) for x in g.elements()):
        return _inconclusive("sublattice", "no glue class with q in [-1/2, 0) mod 2", seed)
    rng = random.Random(seed)
    inv = intmat.rational_inverse(m.gram)
    den = intmat.lcm_denominator(x for row in inv for x in row)
    minv = (den, [[int(x * den) for x in row] for row in inv])
    seen = set()
    cur = bound
    idle = 0
    for trial in range(trials):
        if idle >= max(trials // 8, 16):
            cur *= 2
            idle = 0
        s = _sample_dual(rng, m, minv, cur)
        if s is None:
            idle += 1
            continue
        y, w2 = s
        basis = intmat.right_kernel([y], l.rank)
        sub = l.sublattice(basis)
        key = (abs(sub.det), tuple(intmat.invariant_factors(sub.gram)))
        if key in seen:
            idle += 1
            continue
        seen.add(key)
        idle = 0
        cert = sublattice_certificate(l, basis, z_table, y, norm_bound)
        if cert is not None:
            cert["trial"] = trial
            cert["dual_vector"] = y
            return Verdict(POSITIVE, "sublattice", cert, seed)
    return _inconclusive("sublattice", "no certified sublattice found", seed, distinct_sublattices=len(seen))


# ---------------------------------------------------------------- verification

def verify_verdict(l: Lattice, v: Verdict, tables=None) -> bool:
    """Re-check the certificate of a positive or zero verdict from its data."""
    l = as_lattice(l)
    c = v.certificate
    if v.status == INCONCLUSIVE:
        return True
    if v.test_name == "det-cube":
        p = c["prime"]
        return v.positive and l.rank >= 13 and p % 2 == 1 and l.det % p ** 3 == 0
    if v.test_name == "covering-radius":
        m = split_form(l)
        res = covering_radius_sq(twist(m, -1))
        return v.zero and res.known and res.value_sq == Fraction(c["covering_radius_sq"]) and res.value_sq <= 2
    if v.test_name == "surjectivity":
        m = split_form(l)
        if roots(m).rank == m.rank:
            return False
        fresh = surjectivity_test(l)
        return fresh.positive and fresh.certificate["image_order"] == c["image_order"]
    if v.test_name == "genus":
        m = split_form(l)
        grams = [Lattice(tuple(tuple(r) for r in g)) for g in c["classes"]]
        for n in grams:
            if not same_genus(n, m) or roots(n).rank == n.rank:
                return False
        return is_isometric_definite(grams[0], grams[1]) is None
    if v.test_name == "overlattice":
        m = split_form(l)
        g = glue_group(m)
        x = tuple(c["glue"])
        if g.q(x) != 0 or not any(x):
            return False
        mp = overlattice_from_glue(m, g, [x]).lattice
        if _gram_json(mp) != c["overlattice_gram"]:
            return False
        lp = direct_sum(U_LATTICE, mp)
        if "witness" in c:
            w = c["witness"]
            return verify_nonreflective_witness(lp, w)
        if tables is None:
            from .tables import default_tables
            tables = default_tables()
        if lp.rank not in tables.f_complete:
            return False
        return genus_in(lp, [e.lattice for e in tables.f_table(lp.rank)]) is False
    if v.test_name == "sublattice":
        if tables is None:
            from .tables import default_tables
            tables = default_tables()
        basis = c["basis"]
        sub = l.sublattice(basis)
        if intmat.invariant_factors(basis).count(1) != l.rank - 1:
            return False
        if not sub.is_hyperbolic or Fraction(abs(l.det), abs(sub.det)) < 2:
            return False
        z = tables.zero_table(sub.rank)
        if genus_in(sub, z.entries) is not False:
            return False
        if z.complete:
            return True
        return z.nonreflective_complete and "witness" in c and verify_nonreflective_witness(sub, c["witness"])
    return False
