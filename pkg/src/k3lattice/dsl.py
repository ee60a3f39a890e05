"""Parser, evaluator and printer for lattice expressions such as ``U + A1(3)``.

Grammar (whitespace-insensitive, ``⊕`` is a synonym for ``+``)::

    expr := term ('+' term)*
    term := atom ( '(' int ')' | '^' uint )*
    atom := 'U' | ('A'|'D'|'E') uint | '[' int (',' int)* ']' | '(' expr ')'

Bracket atoms list the lower triangle ``[a11, a21, a22, a31, ...]`` of a Gram
matrix; a single entry ``[a]`` is the rank-one lattice of determinant ``a``.
``A_1``, ``A_{11}`` and Unicode subscripts are accepted for indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt
from typing import List, Tuple, Union

from .errors import BadIndex, BadTriangleCount, DslSyntaxError
from .lattice import Lattice, direct_sum, make_lattice, twist


@dataclass(frozen=True)
class Named:
    family: str
    index: int = 0

    def __post_init__(self):
        _check_index(self.family, self.index)


@dataclass(frozen=True)
class RankOne:
    a: int


@dataclass(frozen=True)
class ExplicitGram:
    entries: Tuple[int, ...]

    def __post_init__(self):
        triangular_rank(len(self.entries))

    @property
    def rank(self) -> int:
        return triangular_rank(len(self.entries))

    def rows(self) -> List[List[int]]:
        return lower_triangle_to_gram(self.entries)


@dataclass(frozen=True)
class Twist:
    child: "LatticeExpr"
    scale: int


@dataclass(frozen=True)
class Sum:
    children: Tuple["LatticeExpr", ...]


@dataclass(frozen=True)
class Power:
    child: "LatticeExpr"
    exponent: int


LatticeExpr = Union[Named, RankOne, ExplicitGram, Twist, Sum, Power]


def _check_index(family: str, index: int) -> None:
    if family == "U":
        return
    ok = ((family == "A" and index >= 1) or (family == "D" and index >= 4)
          or (family == "E" and index in (6, 7, 8)))
    if not ok:
        raise BadIndex(f"{family}{index} is not a root lattice")


def triangular_rank(count: int) -> int:
    n = (isqrt(8 * count + 1) - 1) // 2
    if n * (n + 1) // 2 != count or count == 0:
        raise BadTriangleCount(f"{count} entries is not a triangular number")
    return n


def lower_triangle_to_gram(entries) -> List[List[int]]:
    n = triangular_rank(len(entries))
    g = [[0] * n for _ in range(n)]
    k = 0
    for i in range(n):
        for j in range(i + 1):
            g[i][j] = g[j][i] = int(entries[k])
            k += 1
    return g


def gram_to_lower_triangle(gram) -> Tuple[int, ...]:
    return tuple(int(gram[i][j]) for i in range(len(gram)) for j in range(i + 1))


# ---------------------------------------------------------------- root lattices

def dynkin_edges(family: str, n: int) -> List[Tuple[int, int]]:
    if family == "A":
        return [(i, i + 1) for i in range(n - 1)]
    if family == "D":
        return [(i, i + 1) for i in range(n - 2)] + [(n - 3, n - 1)]
    if family == "E":
        # Bourbaki labelling 1,3,4,...,n chain with 2 attached to 4 (0-based here)
        edges = [(0, 2), (1, 3)] + [(i, i + 1) for i in range(2, n - 1)]
        return edges
    raise BadIndex(family)


def root_lattice_gram(family: str, n: int) -> List[List[int]]:
    """Negative definite Gram matrix of the root lattice ``family_n``."""
    _check_index(family, n)
    g = [[-2 if i == j else 0 for j in range(n)] for i in range(n)]
    for i, j in dynkin_edges(family, n):
        g[i][j] = g[j][i] = 1
    return g


U_GRAM = [[0, 1], [1, 0]]


# ---------------------------------------------------------------- parser

_SUBSCRIPTS = str.maketrans("₀₁₂₃₄₅₆₇₈₉", "0123456789")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.s = text.translate(_SUBSCRIPTS).replace("⊕", "+").replace("−", "-")
        self.pos = 0

    def error(self, expected):
        raise DslSyntaxError(self.pos, expected, self.text)

    def skip(self):
        while self.pos < len(self.s) and self.s[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.s[self.pos] if self.pos < len(self.s) else ""

    def eat(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str):
        if not self.eat(ch):
            self.error({repr(ch)})

    def integer(self, signed=True) -> int:
        self.skip()
        start = self.pos
        if signed and self.pos < len(self.s) and self.s[self.pos] in "+-":
            self.pos += 1
            self.skip()
        digits = self.pos
        while self.pos < len(self.s) and self.s[self.pos].isdigit():
            self.pos += 1
        if self.pos == digits:
            self.pos = start
            self.error({"integer"} if signed else {"unsigned integer"})
        return int(self.s[start:self.pos].replace(" ", ""))

    def index(self) -> int:
        self.eat("_")
        if self.eat("{"):
            v = self.integer(signed=False)
            self.expect("}")
            return v
        return self.integer(signed=False)

    def parse(self) -> LatticeExpr:
        e = self.expr()
        self.skip()
        if self.pos != len(self.s):
            self.error({"'+'", "end of input"})
        return e

    def expr(self) -> LatticeExpr:
        terms = [self.term()]
        while self.eat("+"):
            terms.append(self.term())
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> LatticeExpr:
        node = self.atom()
        while True:
            c = self.peek()
            if c == "(":
                self.pos += 1
                a = self.integer()
                self.expect(")")
                if a == 0:
                    from .errors import ZeroScale
                    raise ZeroScale("twist scale must be nonzero")
                node = Twist(node, a)
            elif c == "^":
                self.pos += 1
                k = self.integer(signed=False)
                if k < 1:
                    self.error({"positive exponent"})
                node = Power(node, k)
            else:
                return node

    def atom(self) -> LatticeExpr:
        c = self.peek()
        if c == "U":
            self.pos += 1
            return Named("U", 0)
        if c in ("A", "D", "E"):
            self.pos += 1
            return Named(c, self.index())
        if c == "[":
            self.pos += 1
            vals = [self.integer()]
            while self.eat(","):
                vals.append(self.integer())
            self.expect("]")
            if len(vals) == 1:
                return RankOne(vals[0])
            return ExplicitGram(tuple(vals))
        if c == "(":
            self.pos += 1
            e = self.expr()
            self.expect(")")
            return e
        self.error({"'U'", "'A'", "'D'", "'E'", "'['", "'('"})


def parse_raw(text: str) -> LatticeExpr:
    """Parse without normalisation (keeps Power and nested Sum nodes)."""
    return _Parser(text).parse()


def parse(text: str) -> LatticeExpr:
    """Parse and normalise: powers expanded, sums flattened, twists pushed to atoms."""
    return normalize(parse_raw(text))


def _flatten(e: LatticeExpr, scale: int = 1) -> List[LatticeExpr]:
    if isinstance(e, Sum):
        return [x for c in e.children for x in _flatten(c, scale)]
    if isinstance(e, Power):
        return _flatten(e.child, scale) * e.exponent
    if isinstance(e, Twist):
        return _flatten(e.child, scale * e.scale)
    return [e if scale == 1 else Twist(e, scale)]


def normalize(e: LatticeExpr) -> LatticeExpr:
    parts = _flatten(e)
    return parts[0] if len(parts) == 1 else Sum(tuple(parts))


# ---------------------------------------------------------------- evaluation

def eval_expr(e: LatticeExpr) -> Lattice:
    if isinstance(e, str):
        e = parse(e)
    if isinstance(e, Named):
        if e.family == "U":
            return make_lattice(U_GRAM)
        return make_lattice(root_lattice_gram(e.family, e.index))
    if isinstance(e, RankOne):
        return make_lattice([[e.a]])
    if isinstance(e, ExplicitGram):
        return make_lattice(e.rows())
    if isinstance(e, Twist):
        return twist(eval_expr(e.child), e.scale)
    if isinstance(e, Sum):
        return direct_sum(*(eval_expr(c) for c in e.children))
    if isinstance(e, Power):
        return direct_sum(*([eval_expr(e.child)] * e.exponent))
    raise TypeError(f"not a lattice expression: {e!r}")


def lattice(text: str) -> Lattice:
    """Shorthand: ``lattice("U + A1(2)")``."""
    return eval_expr(parse(text))


# ---------------------------------------------------------------- printing

_FAMILY_ORDER = {"U": 0, "A": 1, "D": 2, "E": 3}


def _base_and_scale(e: LatticeExpr):
    scale = 1
    while isinstance(e, Twist):
        scale *= e.scale
        e = e.child
    return e, scale


def _sort_key(e: LatticeExpr):
    base, scale = _base_and_scale(e)
    if isinstance(base, Named):
        return (0, _FAMILY_ORDER[base.family], base.index, scale, ())
    if isinstance(base, RankOne):
        return (1, 0, 0, scale, (base.a,))
    if isinstance(base, ExplicitGram):
        return (2, base.rank, 0, scale, base.entries)
    return (3, 0, 0, scale, (to_string(base),))


def _atom_str(e: LatticeExpr) -> str:
    base, scale = _base_and_scale(e)
    if isinstance(base, Named):
        s = "U" if base.family == "U" else f"{base.family}{base.index}"
    elif isinstance(base, RankOne):
        s = f"[{base.a}]"
    elif isinstance(base, ExplicitGram):
        s = "[" + ",".join(str(x) for x in base.entries) + "]"
    else:
        s = "(" + to_string(base) + ")"
    return s if scale == 1 else f"{s}({scale})"


def to_string(e: LatticeExpr) -> str:
    """Canonical text: sorted summands joined by `` + ``, repeats as ``^k``."""
    parts = sorted(_flatten(e), key=_sort_key)
    out: List[str] = []
    i = 0
    while i < len(parts):
        j = i
        while j + 1 < len(parts) and parts[j + 1] == parts[i]:
            j += 1
        s = _atom_str(parts[i])
        k = j - i + 1
        if k > 1:
            base, scale = _base_and_scale(parts[i])
            b = _atom_str(base)
            s = f"{b}^{k}" if scale == 1 else f"{b}^{k}({scale})"
        out.append(s)
        i = j + 1
    return " + ".join(out)


def gram_expr(gram) -> LatticeExpr:
    """Expression for an explicit Gram matrix (rank one becomes ``[a]``)."""
    if len(gram) == 1:
        return RankOne(int(gram[0][0]))
    return ExplicitGram(gram_to_lower_triangle(gram))


def read_table(text: str) -> List[Tuple[int | None, str, LatticeExpr]]:
    """Parse a table file: one expression per line, ``#`` comments, ``#rank n`` headers.

    Returns ``(rank header or None, source text, expression)`` triples.
    """
    out = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            words = line[1:].split()
            if len(words) >= 2 and words[0] == "rank":
                current = int(words[1])
            continue
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            expr = parse(line)
        except Exception as exc:
            exc.args = (f"line {lineno}: {exc}",)
            raise
        out.append((current, line, expr))
    return out
