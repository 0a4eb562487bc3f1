"""
The Hopf algebra H1 in PBW normal form.

Monomials are written (δ-part)·X^a·Y^b with the δ indices ascending. The
relations [Y, X] = X, [X, δ_n] = δ_{n+1}, [Y, δ_n] = n·δ_n and [δ_n, δ_m] = 0
are applied in closed form:

    (D1 X^a Y^b)(D2 X^c Y^d)
        = Σ_{k,j} C(a,k) C(b,j) s^(b-j) · D1·∂^k(D2) · X^(a-k+c) Y^(j+d)

where ∂ is the derivation δ_n -> δ_{n+1} of the commutative δ-algebra and
s = weight(D2) + c. Each step either moves a Y to the right past a factor of
known weight or lowers the X power at the left while raising the δ weight, so
the rewrite terminates.

Coproduct and antipode are fixed on generators and extended multiplicatively
(anti-multiplicatively for S); Δ(δ_{n+1}) = [Δ(X), Δ(δ_n)] and
S(δ_{n+1}) = [S(δ_n), S(X)].
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from exact_scalars import ONE, HbarScalar, Rational, as_scalar

DeltaPart = Tuple[Tuple[int, int], ...]


class RankMismatchError(ValueError):
    """Raised when tensors of different rank are combined."""


@dataclass(frozen=True, order=True)
class H1Monomial:
    deltas: DeltaPart = ()
    x_pow: int = 0
    y_pow: int = 0

    def is_unit(self) -> bool:
        return not self.deltas and self.x_pow == 0 and self.y_pow == 0

    def degree(self) -> int:
        """Filtration degree: δ_n counts n, X and Y count 1."""
        return sum(n * e for n, e in self.deltas) + self.x_pow + self.y_pow

    def text(self) -> str:
        if self.is_unit():
            return "1"
        parts = [f"d{n}" if e == 1 else f"d{n}^{e}" for n, e in self.deltas]
        for name, power in (("X", self.x_pow), ("Y", self.y_pow)):
            if power:
                parts.append(name if power == 1 else f"{name}^{power}")
        return " ".join(parts)

    def latex(self) -> str:
        if self.is_unit():
            return "1"
        parts = [f"\\delta_{{{n}}}" + ("" if e == 1 else f"^{{{e}}}") for n, e in self.deltas]
        for name, power in (("X", self.x_pow), ("Y", self.y_pow)):
            if power:
                parts.append(name if power == 1 else f"{name}^{{{power}}}")
        return "".join(parts)

    @classmethod
    def parse(cls, text: str) -> "H1Monomial":
        text = text.strip()
        if text == "1":
            return cls()
        deltas: Dict[int, int] = {}
        x_pow = y_pow = 0
        for token in text.split():
            base, _, exp = token.partition("^")
            e = int(exp) if exp else 1
            if base == "X":
                x_pow += e
            elif base == "Y":
                y_pow += e
            elif base.startswith("d") and base[1:].isdigit():
                n = int(base[1:])
                deltas[n] = deltas.get(n, 0) + e
            else:
                raise ValueError(f"Cannot parse H1 monomial token: {token}")
        return cls(tuple(sorted(deltas.items())), x_pow, y_pow)

    def __str__(self) -> str:
        return self.text()


UNIT = H1Monomial()


def delta_weight(d: DeltaPart) -> int:
    return sum(n * e for n, e in d)


@lru_cache(maxsize=None)
def delta_mul(d1: DeltaPart, d2: DeltaPart) -> DeltaPart:
    if not d1:
        return d2
    if not d2:
        return d1
    merged = dict(d1)
    for n, e in d2:
        merged[n] = merged.get(n, 0) + e
    return tuple(sorted(merged.items()))


@lru_cache(maxsize=None)
def delta_derivative(d: DeltaPart) -> Dict[DeltaPart, int]:
    """Apply ∂: δ_n -> δ_{n+1} as a derivation."""
    out: Dict[DeltaPart, int] = {}
    for idx, (n, e) in enumerate(d):
        rest = dict(d)
        if e == 1:
            del rest[n]
        else:
            rest[n] = e - 1
        rest[n + 1] = rest.get(n + 1, 0) + 1
        key = tuple(sorted(rest.items()))
        out[key] = out.get(key, 0) + e
    return out


@lru_cache(maxsize=None)
def delta_derivative_power(d: DeltaPart, k: int) -> Dict[DeltaPart, int]:
    if k == 0:
        return {d: 1}
    out: Dict[DeltaPart, int] = {}
    for part, c in delta_derivative_power(d, k - 1).items():
        for nxt, c2 in delta_derivative(part).items():
            out[nxt] = out.get(nxt, 0) + c * c2
    return {p: c for p, c in out.items() if c}


@lru_cache(maxsize=None)
def monomial_product(m1: H1Monomial, m2: H1Monomial) -> Dict[H1Monomial, int]:
    """PBW normal form of m1·m2 with integer coefficients."""
    if m1.is_unit():
        return {m2: 1}
    if m2.is_unit():
        return {m1: 1}
    a, b = m1.x_pow, m1.y_pow
    c, d = m2.x_pow, m2.y_pow
    s = delta_weight(m2.deltas) + c
    out: Dict[H1Monomial, int] = {}
    for k in range(a + 1):
        ck = comb(a, k)
        for part, cd in delta_derivative_power(m2.deltas, k).items():
            deltas = delta_mul(m1.deltas, part)
            for j in range(b + 1):
                coeff = ck * cd * comb(b, j) * s ** (b - j)
                if coeff:
                    key = H1Monomial(deltas, a - k + c, j + d)
                    out[key] = out.get(key, 0) + coeff
    return {m: v for m, v in out.items() if v}


class H1Element:
    """Element of H1[ħ, ħ⁻¹] as a map PBW monomial -> HbarScalar"""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[H1Monomial, HbarScalar]] = None):
        self.terms: Dict[H1Monomial, HbarScalar] = {}
        if terms:
            for m in sorted(terms):
                c = terms[m]
                if c:
                    self.terms[m] = c

    @classmethod
    def one(cls) -> "H1Element":
        return cls({UNIT: ONE})

    @classmethod
    def scalar(cls, value: Union[HbarScalar, Rational]) -> "H1Element":
        return cls({UNIT: as_scalar(value)})

    @classmethod
    def monomial(cls, m: H1Monomial, coeff: Union[HbarScalar, Rational] = 1) -> "H1Element":
        return cls({m: as_scalar(coeff)})

    @classmethod
    def X(cls) -> "H1Element":
        return cls.monomial(H1Monomial(x_pow=1))

    @classmethod
    def Y(cls) -> "H1Element":
        return cls.monomial(H1Monomial(y_pow=1))

    @classmethod
    def delta(cls, n: int) -> "H1Element":
        if n < 1:
            raise ValueError(f"δ_n needs n ≥ 1, got {n}")
        return cls.monomial(H1Monomial(((n, 1),)))

    @classmethod
    def delta2_prime(cls) -> "H1Element":
        """δ₂′ = δ₂ − ½δ₁²"""
        return cls({
            H1Monomial(((1, 2),)): HbarScalar.const(Fraction(-1, 2)),
            H1Monomial(((2, 1),)): ONE,
        })

    def items(self) -> Iterator[Tuple[H1Monomial, HbarScalar]]:
        return iter(self.terms.items())

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, m: H1Monomial) -> HbarScalar:
        return self.terms.get(m, HbarScalar())

    def __add__(self, other: "H1Element") -> "H1Element":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return H1Element(out)

    def __neg__(self) -> "H1Element":
        return H1Element({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "H1Element") -> "H1Element":
        return self + (-other)

    def __mul__(self, other: Union["H1Element", HbarScalar, Rational]) -> "H1Element":
        if isinstance(other, H1Element):
            return multiply(self, other)
        s = as_scalar(other)
        return H1Element({m: c * s for m, c in self.terms.items()})

    def __rmul__(self, other: Union[HbarScalar, Rational]) -> "H1Element":
        return self * other

    def __pow__(self, n: int) -> "H1Element":
        result = H1Element.one()
        for _ in range(n):
            result = result * self
        return result

    def truncate(self, order: Optional[int]) -> "H1Element":
        return H1Element({m: c.truncate(order) for m, c in self.terms.items()})

    def hbar_part(self, power: int) -> "H1Element":
        """The ħ^power component, with ħ removed from the coefficients."""
        return H1Element({m: HbarScalar({0: c.coeff(power)}) for m, c in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, H1Element):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(tuple(self.terms.items()))

    def text(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(_term_text(c, m.text()) for m, c in self.terms.items()).replace("+ -", "- ")

    def latex(self) -> str:
        if not self.terms:
            return "0"
        return "+".join(_term_latex(c, m.latex()) for m, c in self.terms.items()).replace("+-", "-")

    def __repr__(self) -> str:
        return f"H1Element({self.text()})"


def _term_text(c: HbarScalar, body: str) -> str:
    if body == "1":
        return str(c)
    if c == 1:
        return body
    if c == -1:
        return "-" + body
    text = str(c)
    if " " in text and not c.is_monomial():
        text = f"({text})"
    return f"{text}·{body}"


def _term_latex(c: HbarScalar, body: str) -> str:
    if body == "1":
        return c.latex()
    if c == 1:
        return body
    if c == -1:
        return "-" + body
    text = c.latex()
    if not c.is_monomial():
        text = f"\\left({text}\\right)"
    return f"{text}{body}"


def multiply(a: H1Element, b: H1Element) -> H1Element:
    out: Dict[H1Monomial, HbarScalar] = {}
    for m1, c1 in a.terms.items():
        for m2, c2 in b.terms.items():
            c12 = c1 * c2
            for m, k in monomial_product(m1, m2).items():
                term = c12.scale(k)
                out[m] = out[m] + term if m in out else term
    return H1Element(out)


def counit(a: H1Element) -> HbarScalar:
    return a.coeff(UNIT)


def counit_monomial(m: H1Monomial) -> int:
    return 1 if m.is_unit() else 0


# Tensors

IntTensor = Dict[Tuple[H1Monomial, ...], int]


def _int_tensor_mul(s: IntTensor, t: IntTensor) -> IntTensor:
    out: IntTensor = {}
    for legs1, c1 in s.items():
        for legs2, c2 in t.items():
            expansions = [monomial_product(m1, m2).items() for m1, m2 in zip(legs1, legs2)]
            for combo in product(*expansions):
                coeff = c1 * c2
                for _, k in combo:
                    coeff *= k
                key = tuple(m for m, _ in combo)
                out[key] = out.get(key, 0) + coeff
    return {k: v for k, v in out.items() if v}


def _int_tensor_sub(s: IntTensor, t: IntTensor) -> IntTensor:
    out = dict(s)
    for k, v in t.items():
        out[k] = out.get(k, 0) - v
    return {k: v for k, v in out.items() if v}


_X = H1Monomial(x_pow=1)
_Y = H1Monomial(y_pow=1)
_D1 = H1Monomial(((1, 1),))


@lru_cache(maxsize=None)
def _coproduct_delta(n: int) -> IntTensor:
    if n == 1:
        return {(_D1, UNIT): 1, (UNIT, _D1): 1}
    dx = _coproduct_generator("X")
    prev = _coproduct_delta(n - 1)
    return _int_tensor_sub(_int_tensor_mul(dx, prev), _int_tensor_mul(prev, dx))


@lru_cache(maxsize=None)
def _coproduct_generator(name: str) -> IntTensor:
    if name == "X":
        return {(_X, UNIT): 1, (UNIT, _X): 1, (_D1, _Y): 1}
    if name == "Y":
        return {(_Y, UNIT): 1, (UNIT, _Y): 1}
    raise ValueError(f"Unknown generator: {name}")


@lru_cache(maxsize=None)
def coproduct_monomial(m: H1Monomial) -> IntTensor:
    result: IntTensor = {(UNIT, UNIT): 1}
    for n, e in m.deltas:
        for _ in range(e):
            result = _int_tensor_mul(result, _coproduct_delta(n))
    for _ in range(m.x_pow):
        result = _int_tensor_mul(result, _coproduct_generator("X"))
    for _ in range(m.y_pow):
        result = _int_tensor_mul(result, _coproduct_generator("Y"))
    return result


def _int_element_mul(a: Dict[H1Monomial, int], b: Dict[H1Monomial, int]) -> Dict[H1Monomial, int]:
    out: Dict[H1Monomial, int] = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            for m, k in monomial_product(m1, m2).items():
                out[m] = out.get(m, 0) + c1 * c2 * k
    return {m: v for m, v in out.items() if v}


@lru_cache(maxsize=None)
def _antipode_generator(name: str) -> Dict[H1Monomial, int]:
    if name == "X":
        return {_X: -1, H1Monomial(((1, 1),), 0, 1): 1}
    if name == "Y":
        return {_Y: -1}
    raise ValueError(f"Unknown generator: {name}")


@lru_cache(maxsize=None)
def _antipode_delta(n: int) -> Dict[H1Monomial, int]:
    if n == 1:
        return {_D1: -1}
    sx = _antipode_generator("X")
    prev = _antipode_delta(n - 1)
    left = _int_element_mul(prev, sx)
    right = _int_element_mul(sx, prev)
    out = dict(left)
    for m, v in right.items():
        out[m] = out.get(m, 0) - v
    return {m: v for m, v in out.items() if v}


@lru_cache(maxsize=None)
def antipode_monomial(m: H1Monomial) -> Dict[H1Monomial, int]:
    """S(D X^a Y^b) = S(Y)^b S(X)^a S(D)"""
    result: Dict[H1Monomial, int] = {UNIT: 1}
    for _ in range(m.y_pow):
        result = _int_element_mul(result, _antipode_generator("Y"))
    for _ in range(m.x_pow):
        result = _int_element_mul(result, _antipode_generator("X"))
    for n, e in m.deltas:
        for _ in range(e):
            result = _int_element_mul(result, _antipode_delta(n))
    return result


def antipode(a: H1Element) -> H1Element:
    out: Dict[H1Monomial, HbarScalar] = {}
    for m, c in a.terms.items():
        for m2, k in antipode_monomial(m).items():
            term = c.scale(k)
            out[m2] = out[m2] + term if m2 in out else term
    return H1Element(out)


class H1Tensor:
    """Element of H1⊗k (k = 2 or 3) with ħ-Laurent coefficients"""

    __slots__ = ("rank", "terms")

    def __init__(self, rank: int, terms: Optional[Dict[Tuple[H1Monomial, ...], HbarScalar]] = None):
        if rank not in (1, 2, 3):
            raise RankMismatchError(f"Unsupported tensor rank: {rank}")
        self.rank = rank
        self.terms: Dict[Tuple[H1Monomial, ...], HbarScalar] = {}
        if terms:
            for legs in sorted(terms):
                if len(legs) != rank:
                    raise RankMismatchError(f"Term {legs} does not have rank {rank}")
                c = terms[legs]
                if c:
                    self.terms[legs] = c

    @classmethod
    def unit(cls, rank: int) -> "H1Tensor":
        return cls(rank, {(UNIT,) * rank: ONE})

    @classmethod
    def from_elements(cls, *elements: H1Element) -> "H1Tensor":
        """Pure tensor a ⊗ b (⊗ c)."""
        out: Dict[Tuple[H1Monomial, ...], HbarScalar] = {}
        for combo in product(*(e.terms.items() for e in elements)):
            coeff = ONE
            for _, c in combo:
                coeff = coeff * c
            key = tuple(m for m, _ in combo)
            out[key] = out[key] + coeff if key in out else coeff
        return cls(len(elements), out)

    def items(self) -> Iterator[Tuple[Tuple[H1Monomial, ...], HbarScalar]]:
        return iter(self.terms.items())

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: "H1Tensor") -> None:
        if self.rank != other.rank:
            raise RankMismatchError(f"rank mismatch: {self.rank} vs {other.rank}")

    def __add__(self, other: "H1Tensor") -> "H1Tensor":
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return H1Tensor(self.rank, out)

    def __neg__(self) -> "H1Tensor":
        return H1Tensor(self.rank, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "H1Tensor") -> "H1Tensor":
        return self + (-other)

    def __mul__(self, other: Union["H1Tensor", HbarScalar, Rational]) -> "H1Tensor":
        if isinstance(other, H1Tensor):
            return tensor_compose(self, other)
        s = as_scalar(other)
        return H1Tensor(self.rank, {k: c * s for k, c in self.terms.items()})

    def __rmul__(self, other: Union[HbarScalar, Rational]) -> "H1Tensor":
        return self * other

    def truncate(self, order: Optional[int]) -> "H1Tensor":
        return H1Tensor(self.rank, {k: c.truncate(order) for k, c in self.terms.items()})

    def hbar_part(self, power: int) -> "H1Tensor":
        return H1Tensor(self.rank, {k: HbarScalar({power: c.coeff(power)}) for k, c in self.terms.items()})

    def hbar_powers(self) -> List[int]:
        powers = set()
        for c in self.terms.values():
            powers.update(c.exponents())
        return sorted(powers)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, H1Tensor):
            return NotImplemented
        return self.rank == other.rank and self.terms == other.terms

    def text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for legs, c in self.terms.items():
            body = " ⊗ ".join(m.text() for m in legs)
            parts.append(_term_text(c, f"({body})") if c != 1 else body)
        return " + ".join(parts).replace("+ -", "- ")

    def latex(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for legs, c in self.terms.items():
            body = "\\otimes ".join(m.latex() for m in legs)
            parts.append(_term_latex(c, f"({body})") if c != 1 else body)
        return "+".join(parts).replace("+-", "-")

    def to_json(self) -> List[dict]:
        return [{"legs": [m.text() for m in legs], "coeff": c.to_json()} for legs, c in self.terms.items()]

    @classmethod
    def from_json(cls, rank: int, data: List[dict]) -> "H1Tensor":
        terms = {}
        for entry in data:
            legs = tuple(H1Monomial.parse(t) for t in entry["legs"])
            terms[legs] = HbarScalar.from_json(entry["coeff"])
        return cls(rank, terms)

    def __repr__(self) -> str:
        return f"H1Tensor[{self.rank}]({self.text()})"


def tensor_compose(s: H1Tensor, t: H1Tensor, order: Optional[int] = None) -> H1Tensor:
    """Leg-wise product, optionally truncated at ħ^order."""
    s._check(t)
    out: Dict[Tuple[H1Monomial, ...], HbarScalar] = {}
    for legs1, c1 in s.terms.items():
        v1 = c1.valuation()
        for legs2, c2 in t.terms.items():
            if order is not None and v1 + c2.valuation() > order:
                continue
            c12 = (c1 * c2).truncate(order)
            if not c12:
                continue
            expansions = [monomial_product(m1, m2).items() for m1, m2 in zip(legs1, legs2)]
            for combo in product(*expansions):
                k = 1
                for _, v in combo:
                    k *= v
                key = tuple(m for m, _ in combo)
                term = c12.scale(k)
                out[key] = out[key] + term if key in out else term
    return H1Tensor(s.rank, out)


def coproduct(a: H1Element) -> H1Tensor:
    out: Dict[Tuple[H1Monomial, ...], HbarScalar] = {}
    for m, c in a.terms.items():
        for legs, k in coproduct_monomial(m).items():
            term = c.scale(k)
            out[legs] = out[legs] + term if legs in out else term
    return H1Tensor(2, out)


def coproduct_leg(t: H1Tensor, leg: int) -> H1Tensor:
    """(Δ⊗1)t for leg=1, (1⊗Δ)t for leg=2."""
    if t.rank != 2:
        raise RankMismatchError(f"coproduct_leg needs a rank 2 tensor, got rank {t.rank}")
    if leg not in (1, 2):
        raise ValueError(f"leg must be 1 or 2, got {leg}")
    out: Dict[Tuple[H1Monomial, ...], HbarScalar] = {}
    for (left, right), c in t.terms.items():
        split = left if leg == 1 else right
        for (a, b), k in coproduct_monomial(split).items():
            key = (a, b, right) if leg == 1 else (left, a, b)
            term = c.scale(k)
            out[key] = out[key] + term if key in out else term
    return H1Tensor(3, out)


def extend_unit(t: H1Tensor, position: int) -> H1Tensor:
    """Insert 1 as a new leg at the given 0-based position (R⊗1 is position 2)."""
    return H1Tensor(t.rank + 1, {legs[:position] + (UNIT,) + legs[position:]: c for legs, c in t.terms.items()})


def apply_counit(t: H1Tensor, leg: int) -> Union[H1Element, H1Tensor]:
    """Contract the given 1-based leg with ε."""
    out: Dict[Tuple[H1Monomial, ...], HbarScalar] = {}
    for legs, c in t.terms.items():
        if not legs[leg - 1].is_unit():
            continue
        key = legs[:leg - 1] + legs[leg:]
        out[key] = out[key] + c if key in out else c
    if t.rank == 2:
        return H1Element({k[0]: c for k, c in out.items()})
    return H1Tensor(t.rank - 1, out)


def legs_product(t: H1Tensor, left_map=None) -> H1Element:
    """m(φ⊗1)t for a rank 2 tensor, φ given on monomials (identity by default)."""
    if t.rank != 2:
        raise RankMismatchError("legs_product needs a rank 2 tensor")
    out: Dict[H1Monomial, HbarScalar] = {}
    for (left, right), c in t.terms.items():
        images = left_map(left) if left_map else {left: 1}
        for m1, k1 in images.items():
            for m, k in monomial_product(m1, right).items():
                term = c.scale(k1 * k)
                out[m] = out[m] + term if m in out else term
    return H1Element(out)


def pbw_monomials(max_degree: int) -> List[H1Monomial]:
    """All PBW monomials of filtration degree ≤ max_degree, sorted."""
    result = []
    for dpart in _delta_parts(max_degree, 1):
        w = delta_weight(dpart)
        for a in range(max_degree - w + 1):
            for b in range(max_degree - w - a + 1):
                result.append(H1Monomial(dpart, a, b))
    return sorted(result)


def _delta_parts(budget: int, smallest: int) -> Iterable[DeltaPart]:
    yield ()
    for n in range(smallest, budget + 1):
        for e in range(1, budget // n + 1):
            for rest in _delta_parts(budget - n * e, n + 1):
                yield ((n, e),) + rest


def element_from_ints(terms: Dict[H1Monomial, int]) -> H1Element:
    return H1Element({m: HbarScalar.const(k) for m, k in terms.items()})


def parse_element(text: str) -> H1Element:
    """Parse a sum of monomials with optional integer/fraction coefficients, e.g. "2 d1 Y - X"."""
    total = H1Element()
    for chunk in text.replace("-", "+-").split("+"):
        chunk = chunk.strip()
        if not chunk:
            continue
        sign = 1
        if chunk.startswith("-"):
            sign, chunk = -1, chunk[1:].strip()
        head, _, rest = chunk.partition(" ")
        try:
            coeff = Fraction(head)
            body = rest or "1"
        except ValueError:
            coeff, body = Fraction(1), chunk
        total = total + H1Element.monomial(H1Monomial.parse(body), coeff * sign)
    return total


def sequence_product(elements: Sequence[H1Element]) -> H1Element:
    result = H1Element.one()
    for e in elements:
        result = result * e
    return result
