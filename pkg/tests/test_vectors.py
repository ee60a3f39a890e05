import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from k3lattice import intmat
from k3lattice.dsl import lattice
from k3lattice.errors import NotPositiveDefinite
from k3lattice.lattice import make_lattice, twist
from k3lattice.vectors import (covering_radius_rank2, covering_radius_sq, has_finite_index_root_sublattice,
                               lll, roots, short_vectors)


def pos(text):
    return twist(lattice(text), -1)


def brute_short(gram, bound, box=3):
    n = len(gram)
    out = set()
    for v in itertools.product(range(-box, box + 1), repeat=n):
        nv = intmat.bilinear(v, gram, v)
        if 0 < nv <= bound:
            out.add(v)
    return out


def test_short_vector_examples():
    assert len(short_vectors(pos("A2"), 2, pairs=True)) == 3
    assert len(short_vectors(pos("A2"), 2)) == 6
    assert len(short_vectors(pos("E8"), 2, pairs=True)) == 120
    assert short_vectors(make_lattice([[2]]), 1) == []
    with pytest.raises(NotPositiveDefinite):
        short_vectors(lattice("A2"), 2)


def test_short_vectors_match_box_scan_on_a2():
    g = pos("A2").gram
    assert set(short_vectors(pos("A2"), 6)) == brute_short(g, 6)


@st.composite
def pd_gram(draw, n):
    # B B^T + I with small B is positive definite
    b = [[draw(st.integers(-2, 2)) for _ in range(n)] for _ in range(n)]
    g = intmat.matmul(b, intmat.transpose(b))
    return [[g[i][j] + (2 if i == j else 0) for j in range(n)] for i in range(n)]


@given(st.integers(1, 3).flatmap(pd_gram), st.integers(1, 10))
@settings(max_examples=40, deadline=None)
def test_short_vectors_match_box_scan(g, bound):
    # minimum eigenvalue >= 2 so any vector of norm <= 10 has coordinates bounded by
    # sqrt(bound / lambda_min) * ||B^-1||; a box of 5 is ample for these sizes
    l = make_lattice(g)
    lam = float(np.linalg.eigvalsh(np.array(g, float)).min())
    box = int((bound / lam) ** 0.5 * 4) + 1
    got = set(short_vectors(l, bound))
    ref = {v for v in brute_short(g, bound, box=min(box, 6))}
    assert ref <= got
    assert all(0 < l.norm(v) <= bound for v in got)


@given(st.integers(2, 4).flatmap(pd_gram))
@settings(max_examples=30, deadline=None)
def test_lll_is_unimodular_congruence(g):
    red, t = lll(g)
    assert abs(intmat.det(t)) == 1
    assert intmat.congruent(t, g) == red


def test_root_system_examples():
    rs = roots(lattice("A1^2"))
    assert len(rs.roots) == 4 and [c.name for c in rs.components] == ["A1", "A1"]
    rs = roots(lattice("D4"))
    assert len(rs.roots) == 24 and [c.name for c in rs.components] == ["D4"]
    assert len(roots(lattice("[-4]")).roots) == 0
    assert has_finite_index_root_sublattice(lattice("A2"))
    assert not has_finite_index_root_sublattice(lattice("[-4]"))
    assert not has_finite_index_root_sublattice(lattice("E8(3) + A2"))


@pytest.mark.parametrize("n", range(1, 9))
def test_a_root_count(n):
    assert len(roots(lattice(f"A{n}")).roots) == n * (n + 1)


@pytest.mark.parametrize("n", range(4, 9))
def test_d_root_count(n):
    assert len(roots(lattice(f"D{n}")).roots) == 2 * n * (n - 1)


def test_e8_root_count():
    assert len(roots(lattice("E8")).roots) == 240


def test_covering_radius_examples():
    r = covering_radius_sq(make_lattice([[2]]))
    assert r.value_sq == Fraction(1, 2) and r.method == "rank1"
    r = covering_radius_sq(pos("[-2,1,-4]"))
    assert r.value_sq == Fraction(8, 7) and r.method == "rank2-delaunay"
    r = covering_radius_sq(pos("[-2,1,-22]"))
    assert r.value_sq == Fraction(242, 43) and r.value_sq > 2
    assert covering_radius_sq(pos("E8")).value_sq == 1
    assert covering_radius_sq(pos("A1^2")).value_sq == 1


def numeric_covering_sq(g, steps=121):
    """Grid estimate of the squared covering radius of a binary form."""
    c = np.linalg.cholesky(np.array(g, float)).T  # basis rows in R^2 up to isometry
    basis = c.T
    pts = np.array([(i, j) for i in range(-2, 3) for j in range(-2, 3)], float) @ basis
    worst = 0.0
    grid = np.linspace(0, 1, steps)
    for s in grid:
        q = np.stack([np.full_like(grid, s), grid], 1) @ basis
        d = ((q[:, None, :] - pts[None, :, :]) ** 2).sum(-1).min(1)
        worst = max(worst, d.max())
    return worst


@given(st.integers(1, 8), st.integers(-8, 8), st.integers(1, 8))
@settings(max_examples=40, deadline=None)
def test_rank2_covering_radius_matches_grid(a, b, c):
    g = [[2 * a, b], [b, 2 * c]]
    if 4 * a * c - b * b <= 0:
        return
    exact = float(covering_radius_rank2(g))
    est = numeric_covering_sq(g)
    assert est <= exact + 1e-9
    assert est >= exact * 0.95
