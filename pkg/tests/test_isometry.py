import random

from hypothesis import given, settings
from hypothesis import strategies as st

from k3lattice import intmat
from k3lattice.discriminant import even_overlattices, glue_group
from k3lattice.dsl import lattice
from k3lattice.isometry import (automorphism_group, fqm_isomorphic, induced_discriminant_action,
                                is_isometric_definite, orthogonal_q_group_order, same_genus)
from k3lattice.lattice import direct_sum, make_lattice

from oracles import brute_fqm_isomorphic, random_binary_form


def d16_plus():
    (m,) = [m for m, i in even_overlattices(lattice("D16"), cap=10) if i == 2][:1]
    return m


def test_isometry_examples():
    w = is_isometric_definite(lattice("E8"), lattice("E8"))
    assert w is not None and w.verify()
    assert is_isometric_definite(lattice("A3"), lattice("A1^3")) is None
    assert is_isometric_definite(lattice("E8^2"), d16_plus()) is None


def test_automorphism_group_orders():
    assert automorphism_group(lattice("A1")).order == 2
    assert automorphism_group(lattice("A2")).order == 12
    assert automorphism_group(lattice("A1^2")).order == 8
    for w in automorphism_group(lattice("A2")).generators:
        assert w.verify()


def test_fqm_isomorphic_examples():
    assert fqm_isomorphic(glue_group(lattice("A2")), glue_group(lattice("A2")))
    g = glue_group(lattice("A1(2)"))
    assert not fqm_isomorphic(g, g.negated())
    assert not fqm_isomorphic(glue_group(lattice("D8")), glue_group(lattice("A1^2")))


def test_same_genus_examples():
    assert same_genus(lattice("U + A2"), lattice("U + A2"))
    assert same_genus(lattice("E8^2"), d16_plus())


def test_induced_action():
    l = lattice("A2")
    g = glue_group(l)
    ident = is_isometric_definite(l, l)
    minus = type(ident)(tuple(tuple(-x for x in r) for r in intmat.identity(2)), l, l)
    assert minus.verify()
    (img,) = induced_discriminant_action(l, minus, g)
    (x,) = g.generators()
    assert img == g.neg(x)
    for w in automorphism_group(lattice("D4")).generators:
        gd = glue_group(w.source)
        imgs = induced_discriminant_action(w.source, w, gd)
        for x in gd.elements():
            y = gd.combine(imgs, x)
            assert gd.q(y) == gd.q(x)


def test_orthogonal_q_group_orders():
    assert orthogonal_q_group_order(glue_group(lattice("A2"))) == 2
    assert orthogonal_q_group_order(glue_group(lattice("A1"))) == 1
    assert orthogonal_q_group_order(glue_group(lattice("A1^2"))) == 2


@given(st.integers(0, 10 ** 6))
@settings(max_examples=25, deadline=None)
def test_isometric_under_random_basis_change(seed):
    rng = random.Random(seed)
    m = random_binary_form(rng, 60)
    m = direct_sum(m, lattice(rng.choice(["A1", "A2", "[-4]"])))
    n = m.rank
    t = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for _ in range(4):
        i, j = rng.sample(range(n), 2)
        c = rng.randint(-2, 2)
        t[i] = [a + c * b for a, b in zip(t[i], t[j])]
    m2 = make_lattice(intmat.congruent(t, m.gram))
    w = is_isometric_definite(m, m2)
    assert w is not None and w.verify()
    assert same_genus(m, m2)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=25, deadline=None)
def test_genus_equality_matches_brute_force_fqm(seed):
    rng = random.Random(seed)
    m1, m2 = random_binary_form(rng), random_binary_form(rng)
    u = lattice("U")
    got = same_genus(direct_sum(u, m1), direct_sum(u, m2))
    assert got == brute_fqm_isomorphic(glue_group(m1), glue_group(m2))
