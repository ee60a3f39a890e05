"""Brute-force reference computations, independent of the package internals."""

import itertools
import random
from fractions import Fraction

from k3lattice import intmat
from k3lattice.dsl import lattice
from k3lattice.lattice import direct_sum, make_lattice


def _mod1(v):
    return tuple(x - (x.numerator // x.denominator) for x in v)


def dual_quotient(gram):
    """Elements of L*/L as reduced rational coordinate vectors, plus the quadratic form."""
    inv = intmat.rational_inverse(gram)
    gens = [_mod1(row) for row in inv]
    n = len(gram)
    zero = tuple(Fraction(0) for _ in range(n))
    elems = {zero}
    frontier = [zero]
    while frontier:
        new = []
        for x in frontier:
            for s in gens:
                y = _mod1([a + b for a, b in zip(x, s)])
                if y not in elems:
                    elems.add(y)
                    new.append(y)
        frontier = new

    def q(x):
        return sum(x[i] * gram[i][j] * x[j] for i in range(n) for j in range(n)) % 2

    return elems, q


def _closure(zero, gens):
    h = {zero}
    frontier = [zero]
    while frontier:
        new = []
        for x in frontier:
            for s in gens:
                y = _mod1([a + b for a, b in zip(x, s)])
                if y not in h:
                    h.add(y)
                    new.append(y)
        frontier = new
    return frozenset(h)


def subgroups(elems, keep=lambda h: True):
    """Every subgroup ``H`` of a finite group of reduced rational vectors with ``keep(H)``.

    ``keep`` must be inherited by subgroups, so rejected groups are not extended.
    """
    zero = next(x for x in elems if not any(x))
    start = frozenset([zero])
    subs = {start}
    frontier = [start]
    while frontier:
        new = []
        for h in frontier:
            for x in elems:
                if x in h:
                    continue
                h2 = _closure(zero, list(h) + [x])
                if h2 not in subs and keep(h2):
                    subs.add(h2)
                    new.append(h2)
        frontier = new
    return subs


def brute_overlattice_dets(gram):
    """Determinants of the even overlattices, one per q-null subgroup."""
    elems, q = dual_quotient(gram)
    null = [x for x in elems if q(x) == 0]
    d = intmat.det(gram)
    subs = subgroups(null, lambda h: all(q(x) == 0 for x in h))
    return sorted(d // (len(h) ** 2) for h in subs)


def brute_fqm_isomorphic(g1, g2):
    """Search all maps on generators for an isometry of finite quadratic modules."""
    if g1.size != g2.size:
        return False
    gens = g1.generators()
    targets = list(g2.elements())
    cands = []
    for s in gens:
        o = g1.order_of(s)
        cands.append([t for t in targets if g2.order_of(t) == o and g2.q(t) == g1.q(s)])
    for imgs in itertools.product(*cands):
        if any(g2.b(imgs[i], imgs[j]) != g1.b(gens[i], gens[j])
               for i in range(len(gens)) for j in range(i + 1, len(gens))):
            continue
        image = set()
        for coeffs in itertools.product(*(range(g1.order_of(s)) for s in gens)):
            x = g2.zero()
            for c, t in zip(coeffs, imgs):
                x = g2.add(x, g2.scale(c, t))
            image.add(x)
        if len(image) == g2.size:
            return True
    return False


PARTS = ["A1", "A2", "A3", "A4", "D4", "D5", "A1(2)", "A1(3)", "A2(2)", "[-6]", "[-8]", "E6", "A5"]


def random_definite_lattice(rng: random.Random, max_glue=200):
    """Random even negative definite lattice with ``|det| <= max_glue``."""
    while True:
        k = rng.randint(1, 4)
        parts = []
        for _ in range(k):
            if rng.random() < 0.25:
                a, c = rng.randint(1, 6), rng.randint(1, 6)
                b = rng.randint(-3, 3)
                if 4 * a * c - b * b <= 0:
                    continue
                parts.append(make_lattice([[-2 * a, b], [b, -2 * c]]))
            else:
                parts.append(lattice(rng.choice(PARTS)))
        if not parts:
            continue
        l = direct_sum(*parts)
        if 1 < abs(l.det) <= max_glue:
            return l


def random_binary_form(rng: random.Random, max_det=40):
    while True:
        a, c = rng.randint(1, 8), rng.randint(1, 8)
        b = rng.randint(-4, 4)
        d = 4 * a * c - b * b
        if 0 < d <= max_det:
            return make_lattice([[-2 * a, b], [b, -2 * c]])


def brute_residue_certificate(gram, basis, modulus):
    """Direct coset scan: no class ``x + N L`` outside ``S`` has a solution of ``(x + N w)^2 = -2 mod 2 N^2``."""
    from k3lattice.lattice import contains
    n = len(gram)
    big = modulus
    for x in itertools.product(range(big), repeat=n):
        if contains(basis, x):
            continue
        xx = intmat.bilinear(x, gram, x)
        xg = intmat.vecmat(x, gram)
        for w in itertools.product(range(big), repeat=n):
            val = xx + 2 * big * sum(a * b for a, b in zip(xg, w)) + big * big * intmat.bilinear(w, gram, w)
            if (val + 2) % (2 * big * big) == 0:
                return False
    return True
