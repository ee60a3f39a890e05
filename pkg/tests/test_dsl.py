import pytest
from hypothesis import given
from hypothesis import strategies as st

from k3lattice.dsl import (ExplicitGram, Named, RankOne, Sum, Twist, eval_expr, gram_expr,
                           lattice, parse, read_table, to_string)
from k3lattice.errors import BadIndex, BadTriangleCount, DslSyntaxError


def test_parse_examples():
    assert parse("U + A1(3)") == Sum((Named("U", 0), Twist(Named("A", 1), 3)))
    e = parse("[0,2,2,0,1,-14]")
    assert isinstance(e, ExplicitGram)
    assert e.rows() == [[0, 2, 0], [2, 2, 1], [0, 1, -14]]
    assert parse("U(2) + A2^2") == Sum((Twist(Named("U", 0), 2), Named("A", 2), Named("A", 2)))


def test_parse_errors():
    with pytest.raises(BadIndex):
        parse("E9")
    with pytest.raises(BadTriangleCount):
        parse("[1,2]")
    with pytest.raises(DslSyntaxError) as exc:
        parse("U + ")
    assert exc.value.position == 4 and exc.value.expected


def test_eval_examples():
    assert eval_expr(Named("A", 1)).gram == ((-2,),)
    l = lattice("[8] + A2")
    assert l.rank == 3 and l.det == 24
    l = lattice("U(16) + A1")
    assert l.rank == 3 and l.det == 512


def test_to_string_examples():
    assert to_string(Sum((Named("A", 1), Named("A", 1)))) == "A1^2"
    assert to_string(ExplicitGram((-2, 1, -4))) == "[-2,1,-4]"
    assert to_string(parse("A2 + U + A1(2)")) == "U + A1(2) + A2"


def test_gram_expr():
    assert gram_expr([[-4]]) == RankOne(-4)
    assert eval_expr(gram_expr([[-2, 1], [1, -4]])).gram == ((-2, 1), (1, -4))


def test_read_table():
    rows = read_table("#rank 3\nU + A1  # comment\n\n#rank 4\nU + A2\n")
    assert [(r, t) for r, t, _ in rows] == [(3, "U + A1"), (4, "U + A2")]


atoms = st.one_of(
    st.just("U"),
    st.sampled_from(["A1", "A2", "A3", "D4", "D5", "E6", "E8"]),
    st.integers(-20, -1).map(lambda a: f"[{a}]"),
    st.tuples(st.integers(-8, -2), st.integers(-3, 3), st.integers(-8, -2)).map(
        lambda t: f"[{t[0]},{t[1]},{t[2]}]"),
)
terms = st.tuples(atoms, st.integers(1, 3), st.sampled_from([1, 1, 2, 3])).map(
    lambda t: t[0] + (f"^{t[1]}" if t[1] > 1 else "") + (f"({t[2]})" if t[2] > 1 else ""))


@given(st.lists(terms, min_size=1, max_size=4))
def test_canonical_string_round_trip(ts):
    text = " + ".join(ts)
    e = parse(text)
    s = to_string(e)
    assert to_string(parse(s)) == s
    assert eval_expr(parse(s)).det == eval_expr(e).det
    assert eval_expr(parse(s)).rank == eval_expr(e).rank
