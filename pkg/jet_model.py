"""
Jet model of the crossed product C_c^∞(ℝ×ℝ⁺)⋊Γ.

Functions are polynomials in commuting letters:
  - function letters F(name, a, b) standing for X^a Y^b applied to a test
    function, in normal order;
  - jet letters J(g, n) standing for δ_n(g) of a forward generator g.
Each letter carries a group-word prefix w meaning "w applied to the letter".
Jets of inverse generators are never created; δ_n(g⁻¹) is rewritten through
δ_n(id) = 0 when a product word is expanded.

A crossed element is a finite sum of (JetPoly, GroupWord) pairs.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import sympy

from exact_scalars import ONE, HbarScalar, Rational, as_scalar
from h1_hopf import H1Element, H1Monomial, pbw_monomials

GroupWord = Tuple[Tuple[str, int], ...]
IDENTITY: GroupWord = ()


# Group words

def reduce_word(letters: Sequence[Tuple[str, int]]) -> GroupWord:
    stack: List[Tuple[str, int]] = []
    for g, e in letters:
        if stack and stack[-1][0] == g and stack[-1][1] == -e:
            stack.pop()
        else:
            stack.append((g, e))
    return tuple(stack)


def make_word(*tokens: str) -> GroupWord:
    """make_word("a", "b^-1") -> a·b⁻¹; "id" or no tokens is the identity."""
    letters = []
    for token in tokens:
        for part in token.split():
            if part == "id":
                continue
            name, _, exp = part.partition("^")
            e = int(exp) if exp else 1
            if e not in (1, -1):
                letters.extend([(name, 1 if e > 0 else -1)] * abs(e))
            else:
                letters.append((name, e))
    return reduce_word(letters)


def word_product(w1: GroupWord, w2: GroupWord) -> GroupWord:
    return reduce_word(w1 + w2)


def word_inverse(w: GroupWord) -> GroupWord:
    return tuple((g, -e) for g, e in reversed(w))


def word_text(w: GroupWord) -> str:
    if not w:
        return "id"
    return " ".join(g if e == 1 else f"{g}^-1" for g, e in w)


# Letters

@dataclass(frozen=True, order=True)
class Letter:
    prefix: GroupWord
    kind: str
    name: str
    i: int
    j: int = 0

    def base(self) -> "Letter":
        return Letter((), self.kind, self.name, self.i, self.j)

    def with_prefix(self, word: GroupWord) -> "Letter":
        return Letter(reduce_word(word + self.prefix), self.kind, self.name, self.i, self.j)

    def text(self) -> str:
        if self.kind == "F":
            body = self.name if (self.i, self.j) == (0, 0) else f"X^{self.i}Y^{self.j} {self.name}"
        else:
            body = f"d{self.i}({self.name})"
        for g, e in reversed(self.prefix):
            body = f"{g if e == 1 else g + '^-1'}({body})"
        return body

    def latex(self) -> str:
        if self.kind == "F":
            ops = ("" if self.i == 0 else f"X^{{{self.i}}}") + ("" if self.j == 0 else f"Y^{{{self.j}}}")
            body = f"{ops}{self.name}"
        else:
            body = f"\\delta_{{{self.i}}}({self.name})"
        for g, e in reversed(self.prefix):
            head = g if e == 1 else f"{g}^{{-1}}"
            body = f"{head}({body})"
        return body


def function_letter(name: str, a: int = 0, b: int = 0, prefix: GroupWord = ()) -> Letter:
    return Letter(reduce_word(prefix), "F", name, a, b)


def jet_letter(generator: str, n: int, prefix: GroupWord = ()) -> Letter:
    if n < 1:
        raise ValueError(f"jet order must be ≥ 1, got {n}")
    return Letter(reduce_word(prefix), "J", generator, n, 0)


# Jet polynomials

JetMonomial = Tuple[Tuple[Letter, int], ...]


@lru_cache(maxsize=500000)
def _monomial_mul(m1: JetMonomial, m2: JetMonomial) -> JetMonomial:
    if not m1:
        return m2
    if not m2:
        return m1
    merged = dict(m1)
    for letter, e in m2:
        merged[letter] = merged.get(letter, 0) + e
    return tuple(sorted(merged.items()))


class JetPoly:
    """Polynomial in commuting letters with HbarScalar coefficients"""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[JetMonomial, HbarScalar]] = None):
        self.terms: Dict[JetMonomial, HbarScalar] = {}
        if terms:
            for m in sorted(terms):
                c = terms[m]
                if c:
                    self.terms[m] = c

    @classmethod
    def one(cls) -> "JetPoly":
        return cls({(): ONE})

    @classmethod
    def scalar(cls, value: Union[HbarScalar, Rational]) -> "JetPoly":
        return cls({(): as_scalar(value)})

    @classmethod
    def letter(cls, letter: Letter, coeff: Union[HbarScalar, Rational] = 1) -> "JetPoly":
        return cls({((letter, 1),): as_scalar(coeff)})

    @classmethod
    def function(cls, name: str, a: int = 0, b: int = 0, prefix: GroupWord = ()) -> "JetPoly":
        return cls.letter(function_letter(name, a, b, prefix))

    @classmethod
    def jet(cls, generator: str, n: int, prefix: GroupWord = ()) -> "JetPoly":
        return cls.letter(jet_letter(generator, n, prefix))

    def items(self) -> Iterator[Tuple[JetMonomial, HbarScalar]]:
        return iter(self.terms.items())

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: "JetPoly") -> "JetPoly":
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return JetPoly(out)

    def __neg__(self) -> "JetPoly":
        return JetPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "JetPoly") -> "JetPoly":
        return self + (-other)

    def __mul__(self, other: Union["JetPoly", HbarScalar, Rational]) -> "JetPoly":
        if isinstance(other, JetPoly):
            return self.multiply(other)
        s = as_scalar(other)
        if not s:
            return JetPoly()
        return JetPoly({m: c * s for m, c in self.terms.items()})

    __rmul__ = __mul__

    def multiply(self, other: "JetPoly", order: Optional[int] = None) -> "JetPoly":
        out: Dict[JetMonomial, HbarScalar] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                c = c1 * c2
                if order is not None:
                    c = c.truncate(order)
                    if not c:
                        continue
                m = _monomial_mul(m1, m2)
                out[m] = out[m] + c if m in out else c
        return JetPoly(out)

    def scale(self, q: Rational) -> "JetPoly":
        if q == 0:
            return JetPoly()
        return JetPoly({m: c.scale(q) for m, c in self.terms.items()})

    def truncate(self, order: Optional[int]) -> "JetPoly":
        if order is None:
            return self
        return JetPoly({m: c.truncate(order) for m, c in self.terms.items()})

    def valuation(self) -> Optional[int]:
        vals = [c.valuation() for c in self.terms.values()]
        return min(vals) if vals else None

    def prefixed(self, word: GroupWord) -> "JetPoly":
        """Apply the group word to every letter."""
        if not word:
            return self
        out: Dict[JetMonomial, HbarScalar] = {}
        for m, c in self.terms.items():
            merged: Dict[Letter, int] = {}
            for letter, e in m:
                key = letter.with_prefix(word)
                merged[key] = merged.get(key, 0) + e
            mono = tuple(sorted(merged.items()))
            out[mono] = out[mono] + c if mono in out else c
        return JetPoly(out)

    def derivative(self, which: str) -> "JetPoly":
        """Action of X or Y as a derivation of the function algebra."""
        rule = letter_x if which == "X" else letter_y if which == "Y" else None
        if rule is None:
            raise ValueError(f"Unknown derivation: {which}")
        out = JetPoly()
        for m, c in self.terms.items():
            for letter, e in m:
                image = rule(letter)
                if not image:
                    continue
                rest = dict(m)
                if e == 1:
                    del rest[letter]
                else:
                    rest[letter] = e - 1
                cofactor = JetPoly({tuple(sorted(rest.items())): c.scale(e)})
                out = out + cofactor * image
        return out

    def letters(self) -> List[Letter]:
        seen = set()
        for m in self.terms:
            for letter, _ in m:
                seen.add(letter)
        return sorted(seen)

    def function_degree(self, name: str) -> Optional[int]:
        """Common degree of every monomial in the function letters of `name`, None if mixed."""
        degrees = set()
        for m in self.terms:
            degrees.add(sum(e for letter, e in m if letter.kind == "F" and letter.name == name))
        return degrees.pop() if len(degrees) == 1 else None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, JetPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(tuple(self.terms.items()))

    def text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.terms.items():
            body = "·".join(letter.text() if e == 1 else f"{letter.text()}^{e}" for letter, e in m)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                head = str(c) if c.is_monomial() else f"({c})"
                parts.append(f"{head}·{body}")
        return " + ".join(parts).replace("+ -", "- ")

    def latex(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.terms.items():
            body = "".join(letter.latex() if e == 1 else f"{letter.latex()}^{{{e}}}" for letter, e in m)
            if not body:
                parts.append(c.latex())
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                head = c.latex() if c.is_monomial() else f"\\left({c.latex()}\\right)"
                parts.append(head + body)
        return "+".join(parts).replace("+-", "-")

    def __repr__(self) -> str:
        return f"JetPoly({self.text()})"


@lru_cache(maxsize=None)
def letter_y(letter: Letter) -> JetPoly:
    base = letter.base()
    if base.kind == "F":
        image = JetPoly.letter(Letter((), "F", base.name, base.i, base.j + 1))
        if base.i:
            image = image + JetPoly.letter(base, base.i)
    else:
        image = JetPoly.letter(base, base.i)
    return image.prefixed(letter.prefix)


@lru_cache(maxsize=None)
def letter_x(letter: Letter) -> JetPoly:
    if not letter.prefix:
        if letter.kind == "F":
            return JetPoly.letter(Letter((), "F", letter.name, letter.i + 1, letter.j))
        return JetPoly.letter(Letter((), "J", letter.name, letter.i + 1))
    (g, e), rest = letter.prefix[0], letter.prefix[1:]
    inner = Letter(rest, letter.kind, letter.name, letter.i, letter.j)
    x_inner = letter_x(inner)
    y_inner = letter_y(inner)
    jet = JetPoly.jet(g, 1)
    if e == 1:
        return x_inner.prefixed(((g, 1),)) + jet * y_inner.prefixed(((g, 1),))
    return (x_inner - jet * y_inner).prefixed(((g, -1),))


# Jets of group words

@lru_cache(maxsize=None)
def _delta1(word: GroupWord) -> JetPoly:
    total = JetPoly()
    for idx, (g, e) in enumerate(word):
        head = word[:idx]
        if e == 1:
            piece = JetPoly.jet(g, 1)
        else:
            piece = -JetPoly.jet(g, 1, ((g, -1),))
        total = total + piece.prefixed(head)
    return total


@lru_cache(maxsize=None)
def _delta_n(word: GroupWord, n: int) -> JetPoly:
    if n == 1:
        return _delta1(word)
    return _delta_n(word, n - 1).derivative("X")


def jet_of_product(word: Sequence[Tuple[str, int]], n: int = 1, variant: str = "delta") -> JetPoly:
    """
    Expand δ_n(w) (variant "delta") or δ₂′(w) (variant "delta2_prime") into
    jets of the forward generators. The word does not need to be reduced.
    """
    word = tuple(word)
    if variant == "delta2_prime":
        d1 = _delta_n(word, 1)
        return _delta_n(word, 2) - (d1 * d1).scale(Fraction(1, 2))
    if variant != "delta":
        raise ValueError(f"Unknown jet variant: {variant}")
    if n < 1:
        raise ValueError(f"δ_n needs n ≥ 1, got {n}")
    return _delta_n(word, n)


def delta2_prime(word: Sequence[Tuple[str, int]]) -> JetPoly:
    return jet_of_product(word, 2, "delta2_prime")


# Crossed elements

class CrossedElement:
    """Sum of JetPoly·w over reduced group words w"""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[GroupWord, JetPoly]] = None):
        self.terms: Dict[GroupWord, JetPoly] = {}
        if terms:
            for w in sorted(terms):
                if terms[w]:
                    self.terms[reduce_word(w)] = terms[w]

    @classmethod
    def single(cls, poly: JetPoly, word: GroupWord = IDENTITY) -> "CrossedElement":
        return cls({reduce_word(word): poly})

    @classmethod
    def function(cls, name: str, word: GroupWord = IDENTITY) -> "CrossedElement":
        return cls.single(JetPoly.function(name), word)

    @classmethod
    def one(cls) -> "CrossedElement":
        return cls.single(JetPoly.one())

    def items(self) -> Iterator[Tuple[GroupWord, JetPoly]]:
        return iter(self.terms.items())

    def words(self) -> List[GroupWord]:
        return list(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "CrossedElement") -> "CrossedElement":
        out = dict(self.terms)
        for w, p in other.terms.items():
            out[w] = out[w] + p if w in out else p
        return CrossedElement(out)

    def __neg__(self) -> "CrossedElement":
        return CrossedElement({w: -p for w, p in self.terms.items()})

    def __sub__(self, other: "CrossedElement") -> "CrossedElement":
        return self + (-other)

    def __mul__(self, other: Union["CrossedElement", HbarScalar, Rational]) -> "CrossedElement":
        if isinstance(other, CrossedElement):
            return cross_multiply(self, other)
        return CrossedElement({w: p * other for w, p in self.terms.items()})

    def truncate(self, order: Optional[int]) -> "CrossedElement":
        return CrossedElement({w: p.truncate(order) for w, p in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CrossedElement):
            return NotImplemented
        return self.terms == other.terms

    def text(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"[{p.text()}]·{word_text(w)}" for w, p in self.terms.items())

    def __repr__(self) -> str:
        return f"CrossedElement({self.text()})"


def cross_multiply(a: CrossedElement, b: CrossedElement, order: Optional[int] = None) -> CrossedElement:
    out: Dict[GroupWord, JetPoly] = {}
    for w1, p1 in a.terms.items():
        for w2, p2 in b.terms.items():
            w = word_product(w1, w2)
            piece = p1.multiply(p2.prefixed(w1), order)
            out[w] = out[w] + piece if w in out else piece
    return CrossedElement(out)


def act_monomial(m: H1Monomial, poly: JetPoly, word: GroupWord) -> JetPoly:
    """D X^a Y^b applied to poly·word, returned without the word."""
    result = poly
    for _ in range(m.y_pow):
        result = result.derivative("Y")
    for _ in range(m.x_pow):
        result = result.derivative("X")
    for n, e in m.deltas:
        jet = jet_of_product(word, n)
        for _ in range(e):
            result = result * jet
    return result


def act(h: H1Element, e: CrossedElement, order: Optional[int] = None) -> CrossedElement:
    out: Dict[GroupWord, JetPoly] = {}
    for w, p in e.terms.items():
        acc = JetPoly()
        for m, c in h.terms.items():
            acc = acc + act_monomial(m, p, w) * c
        out[w] = acc.truncate(order)
    return CrossedElement(out)


def faithfulness_rank(d: int) -> Dict[str, object]:
    """
    Rank of the map PBW monomials of degree ≤ d -> their action on a spanning
    family of crossed elements: function letters X^aY^b f with a, b ≤ d on
    the words id, a, ab.
    """
    if d > 5:
        raise ValueError(f"faithfulness_rank is limited to degree 5, got {d}")
    monomials = pbw_monomials(d)
    family = []
    for word in (IDENTITY, make_word("a"), make_word("a b")):
        for a, b in itertools.product(range(d + 1), repeat=2):
            family.append(CrossedElement.single(JetPoly.function("f", a, b), word))
    columns: Dict[Tuple, int] = {}
    rows = []
    for m in monomials:
        row: Dict[int, HbarScalar] = {}
        h = H1Element.monomial(m)
        for idx, element in enumerate(family):
            for w, poly in act(h, element).items():
                for mono, c in poly.items():
                    for k, g in c.items():
                        for part, value in (("re", g.re), ("im", g.im)):
                            if value:
                                key = (idx, w, mono, k, part)
                                col = columns.setdefault(key, len(columns))
                                row[col] = value
        rows.append(row)
    entries = {
        (r, col): sympy.Rational(value.numerator, value.denominator)
        for r, row in enumerate(rows)
        for col, value in row.items()
    }
    matrix = sympy.SparseMatrix(len(rows), max(len(columns), 1), entries)
    rank = matrix.rank()
    return {
        "degree": d,
        "monomials": len(monomials),
        "family": len(family),
        "rank": int(rank),
        "full_rank": int(rank) == len(monomials),
    }
