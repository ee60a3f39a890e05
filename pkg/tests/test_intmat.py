from hypothesis import given, settings
from hypothesis import strategies as st

from k3lattice import intmat

small = st.integers(-6, 6)


def matrices(rows, cols):
    return st.lists(st.lists(small, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


@st.composite
def square(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    return draw(matrices(n, n))


def brute_det(a):
    n = len(a)
    if n == 1:
        return a[0][0]
    return sum((-1) ** j * a[0][j] * brute_det([r[:j] + r[j + 1:] for r in a[1:]]) for j in range(n))


@given(square())
def test_det_matches_cofactor_expansion(a):
    assert intmat.det(a) == brute_det(a)


@given(square())
@settings(max_examples=60)
def test_smith_decomposition(a):
    d, u, v = intmat.smith(a)
    assert intmat.matmul(intmat.matmul(u, a), v) == d
    assert abs(intmat.det(u)) == 1 and abs(intmat.det(v)) == 1
    diag = [d[i][i] for i in range(len(d))]
    nz = [x for x in diag if x]
    assert all(x > 0 for x in nz)
    assert all(nz[i + 1] % nz[i] == 0 for i in range(len(nz) - 1))
    off = [d[i][j] for i in range(len(d)) for j in range(len(d)) if i != j]
    assert not any(off)


@given(square())
@settings(max_examples=60)
def test_invariant_factor_product_is_abs_det(a):
    f = intmat.invariant_factors(a)
    dt = intmat.det(a)
    if dt:
        p = 1
        for x in f:
            p *= x
        assert p == abs(dt)


@given(matrices(3, 4))
def test_hnf_spans_same_lattice(rows):
    h = intmat.hnf(rows)
    assert intmat.rank(h) == intmat.rank(rows) == len(h)
    # every original row is an integer combination of the HNF rows and vice versa
    from k3lattice.lattice import contains
    for r in rows:
        assert contains(h, r)


@given(matrices(2, 4))
def test_left_and_right_kernels(a):
    rk = intmat.right_kernel(a, 4)
    for k in rk:
        assert intmat.matvec(a, k) == [0] * len(a)
    lk = intmat.left_kernel(intmat.transpose(a))
    for k in lk:
        assert intmat.vecmat(k, intmat.transpose(a)) == [0] * len(a)
    assert len(rk) == 4 - intmat.rank(a)


def test_unimodular_inverse():
    u = [[2, 1], [1, 1]]
    assert intmat.matmul(u, intmat.unimodular_inverse(u)) == intmat.identity(2)


def test_content_and_primitive():
    assert intmat.content([4, -6, 10]) == 2
    assert intmat.primitive([4, -6, 10]) == [2, -3, 5]


@given(st.lists(small, min_size=3, max_size=3).filter(lambda v: intmat.content(v) == 1))
def test_complete_to_basis_is_unimodular(v):
    b = intmat.complete_to_basis([v], 3)
    assert b[0] == v and abs(intmat.det(b)) == 1
