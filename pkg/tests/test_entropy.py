import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from k3lattice import entropy as E
from k3lattice import intmat
from k3lattice.dsl import lattice
from k3lattice.errors import ModulusTooSmall, NotSplitForm, RankTooSmall
from k3lattice.lattice import saturate

from oracles import brute_residue_certificate

R1, R2, R3 = [1, -1, 0], [1, 1, 1], [1, 1, -1]


# ---------------------------------------------------------------- fibers

def test_reducible_fibers_examples():
    fs = E.reducible_fibers(lattice("U + A1 + D9"))
    assert sorted((f.affine_type, f.component_count) for f in fs) == [("A~1", 2), ("D~9", 10)]
    assert E.reducible_fibers(lattice("U + [-4]")) == []
    fs = E.reducible_fibers(lattice("U + A1^2"))
    assert [f.component_count for f in fs] == [2, 2]
    with pytest.raises(NotSplitForm):
        E.reducible_fibers(lattice("A1"))


EXTENDED = {"A~1": [[-2, 2], [2, -2]]}


@pytest.mark.parametrize("text", ["U + A1", "U + A3", "U + D5", "U + E6", "U + A2 + D4"])
def test_fiber_components_form_affine_diagram(text):
    l = lattice(text)
    for f in E.reducible_fibers(l):
        vs = [list(v) for v in f.component_vectors]
        g = intmat.congruent(vs, l.gram)
        assert all(g[i][i] == -2 for i in range(len(vs)))
        assert all(l.b(v, [1] + [0] * (l.rank - 1)) == 0 for v in vs)
        # an affine diagram has a one-dimensional radical spanned by a positive combination
        k = intmat.left_kernel(g)
        assert len(k) == 1 and (all(a > 0 for a in k[0]) or all(a < 0 for a in k[0]))
        if f.affine_type in EXTENDED:
            assert g == EXTENDED[f.affine_type]


# ---------------------------------------------------------------- residue certificate

def test_residue_certificate_examples():
    l = lattice("U + A1(2)")
    assert E.root_residue_certificate(l, [R1, R2, R3], 4)
    assert E.root_residue_certificate(l, intmat.identity(3), 3)
    # the index-two lattice <r1, r2, 2e> contains <r1, r2, r3>, so it holds every root
    assert E.root_residue_certificate(l, [R1, R2, [2, 0, 0]], 2)
    with pytest.raises(ModulusTooSmall):
        E.root_residue_certificate(l, [R1, R2, R3], 2)


@st.composite
def residue_case(draw):
    k = draw(st.integers(1, 6))
    l = lattice(f"U + [{-2 * k}]")
    rows = [[draw(st.integers(-3, 3)) for _ in range(3)] for _ in range(3)]
    if intmat.det(rows) == 0:
        rows = [[2, 0, 0], [0, 1, 0], [0, 0, 1]]
    return l, rows


@given(residue_case())
@settings(max_examples=40, deadline=None)
def test_residue_certificate_matches_coset_scan(case):
    l, rows = case
    expo = E.quotient_exponent(rows)
    if expo ** 6 > 50000:
        return
    assert E.root_residue_certificate(l, rows, expo) == brute_residue_certificate(l.gram, rows, expo)


# ---------------------------------------------------------------- critical sublattice

def test_critical_examples():
    cr = E.critical_sublattice(lattice("U + A1(2)"))
    assert cr.index == 4
    sat = saturate(lattice("U + A1(2)"), [R1, R2, R3])
    assert intmat.hnf([list(v) for v in cr.basis.vectors]) == intmat.hnf([R1, R2, R3])
    assert sat.index == 4
    assert E.critical_sublattice(lattice("U + [-10]")).index == 1
    cr = E.critical_sublattice(lattice("U + A1 + D9"))
    assert cr.index == 1 and cr.certificate["rule"] == "fiber-with-three-components"
    with pytest.raises(NotSplitForm):
        E.critical_sublattice(lattice("U(2) + A1"))


@pytest.mark.parametrize("k", [2, 3, 4, 7, 9])
def test_quotient_is_cyclic_generated_by_e(k):
    l = lattice(f"U + A1({k})")
    cr = E.critical_sublattice(l)
    rows = [list(v) for v in cr.basis.vectors]
    diag, v = E._smith_data(rows)
    assert sum(1 for d in diag if d > 1) <= 1
    assert E._order_in_quotient(diag, v, [1, 0, 0]) == cr.index
    assert E.root_residue_certificate(l, rows, E.quotient_exponent(rows) * 2)


def test_zero_entropy_sublattices_counts():
    assert len(E.zero_entropy_sublattices(lattice("U + A1(2)"))) == 3
    assert len(E.zero_entropy_sublattices(lattice("U + [-8]"))) == 4
    subs = E.zero_entropy_sublattices(lattice("U + [-10]"))
    assert subs == [lattice("U + [-10]")]
    dets = sorted(abs(s.det) for s in E.zero_entropy_sublattices(lattice("U + A1(3)")))
    assert dets == [6 * d * d for d in (1, 2, 3, 6)]


# ---------------------------------------------------------------- tests

def test_det_cube():
    v = E.det_cube_test(lattice("U + E8(3) + A2 + A1"))
    assert v.positive and v.certificate["prime"] == 3
    v = E.det_cube_test(lattice("U + E8 + A1^4"))
    assert v.status == E.INCONCLUSIVE and abs(lattice("U + E8 + A1^4").det) == 16
    with pytest.raises(RankTooSmall):
        E.det_cube_test(lattice("U + E8(3) + A2"))


def test_covering_radius_verdicts(tables):
    v = E.covering_radius_test(lattice("U + [-2,1,-4]"), tables.covering_radii)
    assert v.zero and Fraction(v.certificate["covering_radius_sq"]) == Fraction(8, 7)
    v = E.covering_radius_test(lattice("U + [-2,1,-22]"), tables.covering_radii)
    assert v.status == E.INCONCLUSIVE
    assert E.covering_radius_test(lattice("U + E8"), tables.covering_radii).zero


def test_overlattice_test(tables):
    v = E.overlattice_test(lattice("U + E8(3) + A2"), [e.lattice for e in tables.f_table(12)], True)
    assert v.positive and E.verify_verdict(lattice("U + E8(3) + A2"), v, tables)
    v = E.overlattice_test(lattice("U + A2"), [e.lattice for e in tables.f_table(4)], False)
    assert v.status == E.INCONCLUSIVE
    first = tables.f_table(12)[0].lattice
    assert E.overlattice_test(first, [e.lattice for e in tables.f_table(12)], True).status == E.INCONCLUSIVE


def test_sublattice_test_examples(tables):
    l = lattice("U + A1(2)")
    assert E.sublattice_test(l, tables.zero_table(2), trials=0).status == E.INCONCLUSIVE


@pytest.mark.parametrize("k", [2, 3, 4, 5, 7, 9, 13, 25])
def test_sublattice_test_never_fires_on_zero_entropy(k, tables):
    v = E.sublattice_test(lattice(f"U + A1({k})"), tables.zero_table(2), trials=100, seed=1)
    assert v.status == E.INCONCLUSIVE


def test_sublattice_certificate_reverifies(tables):
    l = lattice("U + [-2,0,-34]")
    v = E.sublattice_test(l, tables.zero_table(3), trials=300)
    assert v.positive
    assert E.verify_verdict(l, v, tables)
    assert v.certificate == E.sublattice_test(l, tables.zero_table(3), trials=300).certificate


def test_genus_test_examples():
    assert E.genus_test(lattice("U + [-6]"), trials=50).status == E.INCONCLUSIVE
    assert E.genus_test(lattice("U + A2"), trials=50).status == E.INCONCLUSIVE


def test_genus_test_positive_certificate(tables):
    l = lattice("U + A1 + [-40]")
    v = E.genus_test(l, trials=200)
    assert v.positive and len(v.certificate["classes"]) == 2
    assert E.verify_verdict(l, v, tables)


def test_surjectivity_examples():
    assert E.surjectivity_test(lattice("U + A2")).status == E.INCONCLUSIVE
    v = E.surjectivity_test(lattice("U + [-4]"))
    assert v.status == E.INCONCLUSIVE and v.certificate["O_q_order"] == 2


def test_surjectivity_positive_reverifies(tables):
    # A1(2) + A1(4) is rootless; O(M) has order 4 while O(q) has order 8
    l = lattice("U + A1(2) + A1(4)")
    v = E.surjectivity_test(l)
    assert v.positive
    assert (v.certificate["image_order"], v.certificate["O_q_order"]) == (4, 8)
    assert E.verify_verdict(l, v, tables)


def test_verdict_json_round_trip():
    v = E.det_cube_test(lattice("U + E8(3) + A2 + A1"))
    d = v.to_json()
    assert d["status"] == E.POSITIVE and d["test"] == "det-cube"


@given(st.integers(0, 10 ** 6))
@settings(max_examples=10, deadline=None)
def test_randomized_tests_are_deterministic(seed):
    l = lattice("U + [-2,1,-22]")
    a = E.genus_test(l, trials=20, seed=seed)
    b = E.genus_test(l, trials=20, seed=seed)
    assert a == b


@pytest.mark.parametrize("text", ["U + A1(2)", "U + A2", "U + [-2,1,-4]"])
def test_sublattice_test_respects_table(text, tables):
    rng = random.Random(0)
    l = lattice(text)
    v = E.sublattice_test(l, tables.zero_table(l.rank - 1), trials=50, seed=rng.randint(0, 99))
    assert v.status == E.INCONCLUSIVE
