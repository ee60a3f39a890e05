import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from k3lattice import intmat
from k3lattice.dsl import lattice
from k3lattice.errors import DegenerateSubspace, NotIntegral, NotSymmetric, ZeroScale
from k3lattice.lattice import (direct_sum, make_lattice, orthogonal_complement, saturate, twist,
                               zero_lattice)


def test_make_lattice_examples():
    u = make_lattice([[0, 1], [1, 0]])
    assert u.det == -1 and u.is_even
    a2 = make_lattice([[-2, 1], [1, -2]])
    assert a2.det == 3 and a2.is_even
    with pytest.raises(NotSymmetric):
        make_lattice([[0, 1], [2, 0]])
    with pytest.raises(NotIntegral):
        make_lattice([[Fraction_half(), 0], [0, 1]])


def Fraction_half():
    from fractions import Fraction
    return Fraction(1, 2)


def test_direct_sum_examples():
    l = direct_sum(lattice("U"), lattice("A1"))
    assert l.rank == 3 and l.det == 2
    big = lattice("U + E8(3) + A2")
    assert big.rank == 12 and big.det == -3 ** 9 == -19683
    assert direct_sum(lattice("U"), zero_lattice()) == lattice("U")


def test_twist_examples():
    assert twist(lattice("A1"), 2).gram == ((-4,),)
    assert twist(lattice("U"), 16).gram == ((0, 16), (16, 0))
    assert twist(lattice("E8"), 3).det == 3 ** 8
    with pytest.raises(ZeroScale):
        twist(lattice("A1"), 0)


def test_signature_examples():
    assert tuple(lattice("U").signature) == (1, 1)
    assert tuple(lattice("U + A1(5)").signature) == (1, 2)
    assert tuple(lattice("E8").signature) == (0, 8)


def test_abs_det_examples():
    assert abs(lattice("A2").det) == 3
    assert abs(lattice("U + [-2,1,-22]").det) == 43
    assert abs(lattice("D4").det) == 4


def test_orthogonal_complement_examples():
    l = lattice("U + A2")
    c = orthogonal_complement(l, [[1, 0, 0, 0], [0, 1, 0, 0]])
    assert c.lattice() == lattice("A2")
    with pytest.raises(DegenerateSubspace):
        orthogonal_complement(lattice("U"), [[1, 0]])


def test_saturate_examples():
    s = saturate(lattice("U"), [[2, 0]])
    assert s.index == 2 and [list(v) for v in s.vectors] == [[1, 0]]
    l = lattice("U + A1(2)")
    s = saturate(l, [[1, -1, 0], [1, 1, 1], [1, 1, -1]])
    assert s.index == 4 and s.rank == 3
    s = saturate(l, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert s.index == 1


grams = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=n, max_size=n))


def sym(a):
    n = len(a)
    return [[a[i][j] if i <= j else a[j][i] for j in range(n)] for i in range(n)]


@given(grams, grams)
def test_direct_sum_det_is_multiplicative(a, b):
    x, y = make_lattice(sym(a)), make_lattice(sym(b))
    assert direct_sum(x, y).det == x.det * y.det


@given(grams, st.integers(-4, 4).filter(bool))
def test_twist_scales_det(a, k):
    x = make_lattice(sym(a))
    assert twist(x, k).det == k ** x.rank * x.det


@given(grams)
def test_signature_matches_eigenvalues(a):
    x = make_lattice(sym(a))
    if x.det == 0:
        return
    ev = np.linalg.eigvalsh(np.array(x.gram, dtype=float))
    assert tuple(x.signature) == (int((ev > 0).sum()), int((ev < 0).sum()))


@given(st.lists(st.integers(-5, 5), min_size=3, max_size=3).filter(any), st.integers(1, 6))
def test_saturate_index_of_scaled_vector(v, k):
    l = lattice("U + A1")
    s = saturate(l, [[k * x for x in v]])
    assert s.index == k * intmat.content(v)
