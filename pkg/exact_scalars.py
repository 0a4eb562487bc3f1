"""
Exact scalars for the deformation engine.

GaussianRational holds a + b·i with arbitrary precision rationals, HbarScalar
holds finite Laurent polynomials in ħ over the Gaussian rationals. Every
coefficient in the engine (H1 elements, jet polynomials, Weyl sections) is an
HbarScalar.
"""

from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple, Union

Rational = Union[int, Fraction]


class NonInvertibleScalarError(ValueError):
    """Raised when inverting a scalar that is zero or not a single ħ-monomial."""


class GaussianRational:
    """a + b·i with a, b exact rationals"""

    __slots__ = ("re", "im")

    def __init__(self, re: Rational = 0, im: Rational = 0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def scale(self, q: Rational) -> "GaussianRational":
        return GaussianRational(self.re * q, self.im * q)

    def inverse(self) -> "GaussianRational":
        norm = self.re * self.re + self.im * self.im
        if norm == 0:
            raise NonInvertibleScalarError("non-invertible scalar: 0")
        return GaussianRational(self.re / norm, -self.im / norm)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if not isinstance(other, GaussianRational):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __repr__(self) -> str:
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self) -> str:
        if self.im == 0:
            return _fraction_text(self.re)
        imag = _imag_text(self.im)
        if self.re == 0:
            return imag
        sign = "" if imag.startswith("-") else "+"
        return f"({_fraction_text(self.re)}{sign}{imag})"

    def latex(self) -> str:
        if self.im == 0:
            return _fraction_latex(self.re)
        imag = _fraction_latex(self.im, unit="i")
        if self.re == 0:
            return imag
        sign = "" if imag.startswith("-") else "+"
        return f"\\left({_fraction_latex(self.re)}{sign}{imag}\\right)"


def _fraction_text(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _imag_text(q: Fraction) -> str:
    num = q.numerator
    head = "-" if num < 0 else ""
    num = abs(num)
    body = "i" if num == 1 else f"{num}i"
    return head + body if q.denominator == 1 else f"{head}{body}/{q.denominator}"


def _fraction_latex(q: Fraction, unit: str = "") -> str:
    head = "-" if q < 0 else ""
    q = abs(q)
    if q.denominator == 1:
        body = unit if (q.numerator == 1 and unit) else f"{q.numerator}{unit}"
        return head + body
    top = unit if (q.numerator == 1 and unit) else f"{q.numerator}{unit}"
    return f"{head}\\frac{{{top}}}{{{q.denominator}}}"


class HbarScalar:
    """
    Finite Laurent polynomial in ħ with Gaussian rational coefficients.

    Values are immutable once built. Zero coefficients are never stored and
    exponents are kept in ascending order so iteration and serialization are
    deterministic.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Dict[int, GaussianRational]] = None):
        clean = {}
        if terms:
            for k in sorted(terms):
                c = terms[k]
                if not c.is_zero():
                    clean[k] = c
        self._terms = clean

    # Construction helpers

    @classmethod
    def zero(cls) -> "HbarScalar":
        return cls()

    @classmethod
    def one(cls) -> "HbarScalar":
        return cls({0: GaussianRational(1)})

    @classmethod
    def const(cls, re: Rational = 0, im: Rational = 0) -> "HbarScalar":
        return cls({0: GaussianRational(re, im)})

    @classmethod
    def monomial(cls, power: int, re: Rational = 1, im: Rational = 0) -> "HbarScalar":
        return cls({power: GaussianRational(re, im)})

    # Access

    def items(self) -> Iterator[Tuple[int, GaussianRational]]:
        return iter(self._terms.items())

    def coeff(self, power: int) -> GaussianRational:
        return self._terms.get(power, GaussianRational())

    def exponents(self) -> List[int]:
        return list(self._terms)

    def valuation(self) -> Optional[int]:
        if not self._terms:
            return None
        return next(iter(self._terms))

    def degree(self) -> Optional[int]:
        if not self._terms:
            return None
        return next(reversed(self._terms))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    # Arithmetic

    def __add__(self, other: "HbarScalar") -> "HbarScalar":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            prev = out.get(k)
            out[k] = c if prev is None else prev + c
        return HbarScalar(out)

    __radd__ = __add__

    def __sub__(self, other: "HbarScalar") -> "HbarScalar":
        return self + (-as_scalar(other))

    def __rsub__(self, other: "HbarScalar") -> "HbarScalar":
        return as_scalar(other) - self

    def __neg__(self) -> "HbarScalar":
        return HbarScalar({k: -c for k, c in self._terms.items()})

    def __mul__(self, other: "HbarScalar") -> "HbarScalar":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if not self._terms or not other._terms:
            return HbarScalar()
        out: Dict[int, GaussianRational] = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                k = k1 + k2
                prod = c1 * c2
                prev = out.get(k)
                out[k] = prod if prev is None else prev + prod
        return HbarScalar(out)

    __rmul__ = __mul__

    def scale(self, q: Rational) -> "HbarScalar":
        if q == 0:
            return HbarScalar()
        return HbarScalar({k: c.scale(q) for k, c in self._terms.items()})

    def shift(self, power: int) -> "HbarScalar":
        """Multiply by ħ^power."""
        return HbarScalar({k + power: c for k, c in self._terms.items()})

    def inverse(self) -> "HbarScalar":
        if len(self._terms) != 1:
            raise NonInvertibleScalarError(f"non-invertible scalar: {self}")
        (k, c), = self._terms.items()
        return HbarScalar({-k: c.inverse()})

    def __pow__(self, n: int) -> "HbarScalar":
        if n < 0:
            return self.inverse() ** (-n)
        result = HbarScalar.one()
        for _ in range(n):
            result = result * self
        return result

    def truncate(self, order: Optional[int]) -> "HbarScalar":
        if order is None:
            return self
        return HbarScalar({k: c for k, c in self._terms.items() if k <= order})

    def conjugate(self) -> "HbarScalar":
        return HbarScalar({k: GaussianRational(c.re, -c.im) for k, c in self._terms.items()})

    # Comparison

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = HbarScalar.const(other)
        if not isinstance(other, HbarScalar):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(tuple(self._terms.items()))

    # Rendering and serialization

    def __repr__(self) -> str:
        return f"HbarScalar({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for k, c in self._terms.items():
            if k == 0:
                parts.append(str(c))
            else:
                power = "ħ" if k == 1 else f"ħ^{k}"
                parts.append(power if c == 1 else f"-{power}" if c == -1 else f"{c} {power}")
        return " + ".join(parts).replace("+ -", "- ")

    def latex(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for k, c in self._terms.items():
            power = "" if k == 0 else "\\hbar" if k == 1 else f"\\hbar^{{{k}}}"
            if k != 0 and c == 1:
                parts.append(power)
            elif k != 0 and c == -1:
                parts.append("-" + power)
            else:
                parts.append(c.latex() + power)
        return "+".join(parts).replace("+-", "-")

    def to_json(self) -> List[List[int]]:
        return [
            [k, c.re.numerator, c.re.denominator, c.im.numerator, c.im.denominator]
            for k, c in self._terms.items()
        ]

    @classmethod
    def from_json(cls, data: List[List[int]]) -> "HbarScalar":
        terms = {}
        for k, rn, rd, im_n, im_d in data:
            terms[int(k)] = GaussianRational(Fraction(rn, rd), Fraction(im_n, im_d))
        return cls(terms)


ZERO = HbarScalar.zero()
ONE = HbarScalar.one()
I = HbarScalar.const(0, 1)
HBAR = HbarScalar.monomial(1)


def _coerce(value) -> Optional[HbarScalar]:
    if isinstance(value, (HbarScalar, GaussianRational, int, Fraction)):
        return as_scalar(value)
    return None


def as_scalar(value: Union[HbarScalar, Rational, GaussianRational]) -> HbarScalar:
    """Coerce ints, Fractions and Gaussian rationals to HbarScalar"""
    if isinstance(value, HbarScalar):
        return value
    if isinstance(value, GaussianRational):
        return HbarScalar({0: value})
    if isinstance(value, (int, Fraction)):
        return HbarScalar.const(value)
    raise TypeError(f"cannot use {type(value).__name__} as a scalar")


def scalar_arith(a: HbarScalar, b: Optional[HbarScalar], op: str) -> HbarScalar:
    """Dispatch one of add, mul, neg, inv on exact scalars."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "inv":
        return a.inverse()
    raise ValueError(f"Unknown scalar operation: {op}")


def valuation(a: HbarScalar) -> Optional[int]:
    return a.valuation()


def truncate(a: HbarScalar, order: int) -> HbarScalar:
    return a.truncate(order)
