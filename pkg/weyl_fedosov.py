"""
Formal Weyl algebra sections over ℝ×ℝ⁺ and the Fedosov construction.

A section is Σ c_{mn} u^m v^n with coefficients c_{mn} that are y-graded jet
polynomials (CoeffExpr). The fiber product is

    a∘b = Σ_k (c^k/k!) (∂_u⊗∂_v − ∂_v⊗∂_u)^k (a⊗b),   c = σ·(−iħ/2),

so u∘v − v∘u = σ(−iħ). The connection is D = d − δ + (i/ħ)[Γ, ·] with
Γ = (σ/4y)(v² dx + 2uv dy) and the twist terms are Δ_w = (σ/2) y³ δ₂′(w) u² dx.

Every section family V solves

    D V + (i/ħ) Δ_L∘V − (i/ħ) V∘Δ_R = 0,    V|_{u=v=0} = seed,

and is produced three ways: the coefficient recursion (ground truth), the
closed forms built from H1 elements A_m, and the Fedosov fixed point
iteration U = seed + δ⁻¹{(D+δ)U + (i/ħ)Δ_L∘U − (i/ħ)U∘Δ_R}.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from exact_scalars import ONE, HbarScalar, Rational
from h1_hopf import H1Element
from jet_model import (
    IDENTITY, CrossedElement, GroupWord, JetPoly, act, delta2_prime, make_word, word_product,
)

SECTION_KINDS = ["hat_f", "alpha_hat_g", "u_alpha_inv", "u_alpha_beta", "v_alphabeta", "u_alpha"]

I_OVER_HBAR = HbarScalar.monomial(-1, 0, 1)


class UnknownSectionKindError(ValueError):
    """Raised for a section family name that does not exist."""


class FedosovConvergenceError(ValueError):
    """Raised when the fixed point iteration does not stabilise within the degree bound."""


def _falling(n: int, k: int) -> int:
    if k > n:
        return 0
    out = 1
    for i in range(k):
        out *= n - i
    return out


class CoeffExpr:
    """Coefficient Σ y^k φ_k with φ_k jet polynomials"""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[int, JetPoly]] = None):
        self.terms: Dict[int, JetPoly] = {}
        if terms:
            for k in sorted(terms):
                if terms[k]:
                    self.terms[k] = terms[k]

    @classmethod
    def of(cls, poly: JetPoly, y_power: int = 0) -> "CoeffExpr":
        return cls({y_power: poly})

    @classmethod
    def one(cls) -> "CoeffExpr":
        return cls({0: JetPoly.one()})

    def items(self) -> Iterator[Tuple[int, JetPoly]]:
        return iter(self.terms.items())

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: "CoeffExpr") -> "CoeffExpr":
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for k, p in other.terms.items():
            out[k] = out[k] + p if k in out else p
        return CoeffExpr(out)

    def __neg__(self) -> "CoeffExpr":
        return CoeffExpr({k: -p for k, p in self.terms.items()})

    def __sub__(self, other: "CoeffExpr") -> "CoeffExpr":
        return self + (-other)

    def times(self, scalar) -> "CoeffExpr":
        return CoeffExpr({k: p * scalar for k, p in self.terms.items()})

    def scale(self, q: Rational) -> "CoeffExpr":
        return CoeffExpr({k: p.scale(q) for k, p in self.terms.items()})

    def multiply(self, other: "CoeffExpr", order: Optional[int] = None) -> "CoeffExpr":
        out: Dict[int, JetPoly] = {}
        for k1, p1 in self.terms.items():
            for k2, p2 in other.terms.items():
                piece = p1.multiply(p2, order)
                k = k1 + k2
                out[k] = out[k] + piece if k in out else piece
        return CoeffExpr(out)

    def shift_y(self, power: int) -> "CoeffExpr":
        return CoeffExpr({k + power: p for k, p in self.terms.items()})

    def dx(self) -> "CoeffExpr":
        """∂_x(y^k φ) = y^{k+1} X(φ)"""
        return CoeffExpr({k + 1: p.derivative("X") for k, p in self.terms.items()})

    def dy(self, shift: Rational = 0) -> "CoeffExpr":
        """(∂_y + shift/y)(y^k φ) = y^{k-1}((k + shift)φ − Y(φ))"""
        return CoeffExpr({k - 1: p.scale(k + shift) - p.derivative("Y") for k, p in self.terms.items()})

    def truncate(self, order: Optional[int]) -> "CoeffExpr":
        if order is None:
            return self
        return CoeffExpr({k: p.truncate(order) for k, p in self.terms.items()})

    def valuation(self) -> Optional[int]:
        vals = [p.valuation() for p in self.terms.values()]
        vals = [v for v in vals if v is not None]
        return min(vals) if vals else None

    def y_grades(self) -> List[int]:
        return list(self.terms)

    def grade_zero(self) -> JetPoly:
        return self.terms.get(0, JetPoly())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoeffExpr):
            return NotImplemented
        return self.terms == other.terms

    def text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, p in self.terms.items():
            body = p.text()
            if k == 0:
                parts.append(body)
            else:
                parts.append(f"y^{k}·({body})" if len(p.terms) > 1 else f"y^{k}·{body}")
        return " + ".join(parts)

    def latex(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, p in self.terms.items():
            body = p.latex()
            if k == 0:
                parts.append(body)
            else:
                body = f"\\left({body}\\right)" if len(p.terms) > 1 else body
                parts.append(f"y^{{{k}}}{body}")
        return "+".join(parts)

    def __repr__(self) -> str:
        return f"CoeffExpr({self.text()})"


Index = Tuple[int, int]


class WeylSection:
    """Σ c_{mn} u^m v^n"""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[Index, CoeffExpr]] = None):
        self.terms: Dict[Index, CoeffExpr] = {}
        if terms:
            for key in sorted(terms):
                if terms[key]:
                    self.terms[key] = terms[key]

    @classmethod
    def one(cls) -> "WeylSection":
        return cls({(0, 0): CoeffExpr.one()})

    @classmethod
    def monomial(cls, m: int, n: int, coeff: Optional[CoeffExpr] = None) -> "WeylSection":
        return cls({(m, n): coeff if coeff is not None else CoeffExpr.one()})

    @classmethod
    def constant(cls, poly: JetPoly) -> "WeylSection":
        return cls({(0, 0): CoeffExpr.of(poly)})

    def items(self) -> Iterator[Tuple[Index, CoeffExpr]]:
        return iter(self.terms.items())

    def coefficient(self, m: int, n: int) -> CoeffExpr:
        return self.terms.get((m, n), CoeffExpr())

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "WeylSection") -> "WeylSection":
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out[key] + c if key in out else c
        return WeylSection(out)

    def __neg__(self) -> "WeylSection":
        return WeylSection({key: -c for key, c in self.terms.items()})

    def __sub__(self, other: "WeylSection") -> "WeylSection":
        return self + (-other)

    def times(self, scalar) -> "WeylSection":
        return WeylSection({key: c.times(scalar) for key, c in self.terms.items()})

    def scale(self, q: Rational) -> "WeylSection":
        return WeylSection({key: c.scale(q) for key, c in self.terms.items()})

    def map_coefficients(self, fn: Callable[[CoeffExpr], CoeffExpr]) -> "WeylSection":
        return WeylSection({key: fn(c) for key, c in self.terms.items()})

    def partial_u(self) -> "WeylSection":
        return WeylSection({(m - 1, n): c.scale(m) for (m, n), c in self.terms.items() if m})

    def partial_v(self) -> "WeylSection":
        return WeylSection({(m, n - 1): c.scale(n) for (m, n), c in self.terms.items() if n})

    def lower_degree(self) -> Optional[int]:
        """Smallest total degree m + n + 2k over stored terms."""
        degrees = [m + n + 2 * c.valuation() for (m, n), c in self.terms.items()]
        return min(degrees) if degrees else None

    def truncate(self, order: Optional[int] = None, degree: Optional[int] = None) -> "WeylSection":
        """Drop ħ powers above `order` and terms of total degree 2k + m + n above `degree`."""
        out = {}
        for (m, n), c in self.terms.items():
            limit = order
            if degree is not None:
                by_degree = (degree - m - n) // 2
                limit = by_degree if limit is None else min(limit, by_degree)
            out[(m, n)] = c.truncate(limit)
        return WeylSection(out)

    def window(self, max_m: int, max_n: int) -> "WeylSection":
        return WeylSection({(m, n): c for (m, n), c in self.terms.items() if m <= max_m and n <= max_n})

    def restrict_origin(self) -> CoeffExpr:
        return self.coefficient(0, 0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeylSection):
            return NotImplemented
        return self.terms == other.terms

    def text(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"[{c.text()}]u^{m}v^{n}" for (m, n), c in self.terms.items())

    def __repr__(self) -> str:
        return f"WeylSection({self.text()})"


FORM_SLOTS = ("0", "x", "y", "xy")


@dataclass
class FormSection:
    """Weyl-valued differential form, one WeylSection per slot 1, dx, dy, dx∧dy"""

    components: Dict[str, WeylSection] = field(default_factory=dict)

    def component(self, slot: str) -> WeylSection:
        return self.components.get(slot, WeylSection())

    def __add__(self, other: "FormSection") -> "FormSection":
        return FormSection({s: self.component(s) + other.component(s) for s in FORM_SLOTS
                            if s in self.components or s in other.components})

    def __sub__(self, other: "FormSection") -> "FormSection":
        return FormSection({s: self.component(s) - other.component(s) for s in FORM_SLOTS
                            if s in self.components or s in other.components})

    def truncate(self, order: Optional[int] = None, degree: Optional[int] = None) -> "FormSection":
        return FormSection({s: w.truncate(order, degree) for s, w in self.components.items()})

    def window(self, max_m: int, max_n: int) -> "FormSection":
        return FormSection({s: w.window(max_m, max_n) for s, w in self.components.items()})

    def is_zero(self) -> bool:
        return all(w.is_zero() for w in self.components.values())


def restrict_origin(a: WeylSection) -> CoeffExpr:
    return a.restrict_origin()


# Fiber product

@lru_cache(maxsize=None)
def moyal_weight(m1: int, n1: int, m2: int, n2: int, k: int) -> Fraction:
    """Rational factor of c^k u^{m1+m2-k} v^{n1+n2-k} in u^{m1}v^{n1} ∘ u^{m2}v^{n2}."""
    total = 0
    for j in range(k + 1):
        term = _falling(m1, j) * _falling(n1, k - j) * _falling(n2, j) * _falling(m2, k - j)
        if term:
            total += comb(k, j) * (-1) ** (k - j) * term
    return Fraction(total, factorial(k))


class MoyalProduct:
    """Fiberwise product with the calibrated sign σ"""

    def __init__(self, sign: int = 1):
        if sign not in (1, -1):
            raise ValueError(f"Moyal sign must be +1 or -1, got {sign}")
        self.sign = sign
        self.c = HbarScalar.monomial(1, 0, Fraction(-sign, 2))
        self._powers = [ONE]

    def c_power(self, k: int) -> HbarScalar:
        while len(self._powers) <= k:
            self._powers.append(self._powers[-1] * self.c)
        return self._powers[k]

    def product(self, a: WeylSection, b: WeylSection, order: Optional[int] = None,
                degree: Optional[int] = None) -> WeylSection:
        out: Dict[Index, CoeffExpr] = {}
        for (m1, n1), c1 in a.terms.items():
            d1 = m1 + n1 + 2 * c1.valuation()
            for (m2, n2), c2 in b.terms.items():
                if degree is not None and d1 + m2 + n2 + 2 * c2.valuation() > degree:
                    continue
                base = c1.multiply(c2)
                for k in range(min(m1, n2) + min(n1, m2) + 1):
                    w = moyal_weight(m1, n1, m2, n2, k)
                    if not w:
                        continue
                    key = (m1 + m2 - k, n1 + n2 - k)
                    piece = base.times(self.c_power(k).scale(w))
                    out[key] = out[key] + piece if key in out else piece
        return WeylSection(out).truncate(order, degree)

    def commutator(self, a: WeylSection, b: WeylSection, order: Optional[int] = None,
                   degree: Optional[int] = None) -> WeylSection:
        return self.product(a, b, order, degree) - self.product(b, a, order, degree)

    def product_chain(self, sections: List[WeylSection], order: Optional[int] = None,
                      degree: Optional[int] = None) -> WeylSection:
        result = sections[0]
        for s in sections[1:]:
            result = self.product(result, s, order, degree)
        return result

    @lru_cache(maxsize=None)
    def origin_contraction(self, pairs: Tuple[Index, ...]) -> HbarScalar:
        """Constant term of u^{m1}v^{n1} ∘ … ∘ u^{mr}v^{nr}."""
        rest_m = [sum(m for m, _ in pairs[i + 1:]) for i in range(len(pairs))]
        rest_n = [sum(n for _, n in pairs[i + 1:]) for i in range(len(pairs))]
        state: Dict[Index, HbarScalar] = {pairs[0]: ONE}
        if pairs[0][0] > rest_n[0] or pairs[0][1] > rest_m[0]:
            return HbarScalar()
        for idx in range(1, len(pairs)):
            m2, n2 = pairs[idx]
            nxt: Dict[Index, HbarScalar] = {}
            for (m1, n1), coeff in state.items():
                for k in range(min(m1, n2) + min(n1, m2) + 1):
                    a, b = m1 + m2 - k, n1 + n2 - k
                    if a > rest_n[idx] or b > rest_m[idx]:
                        continue
                    w = moyal_weight(m1, n1, m2, n2, k)
                    if not w:
                        continue
                    term = coeff * self.c_power(k).scale(w)
                    nxt[(a, b)] = nxt[(a, b)] + term if (a, b) in nxt else term
            state = {key: v for key, v in nxt.items() if v}
            if not state:
                return HbarScalar()
        return state.get((0, 0), HbarScalar())


def moyal(a: WeylSection, b: WeylSection, order: Optional[int] = None, sign: int = 1) -> WeylSection:
    return MoyalProduct(sign).product(a, b, order)


# Connection

def delta_section(rho: JetPoly, sign: int = 1) -> WeylSection:
    """dx-component (σ/2) y³ ρ u² of Δ."""
    return WeylSection({(2, 0): CoeffExpr.of(rho.scale(Fraction(sign, 2)), 3)})


def delta_form(rho: JetPoly, sign: int = 1) -> FormSection:
    return FormSection({"x": delta_section(rho, sign)})


class FedosovConnection:
    """
    D (rho None) or its transport α(D) = D + (i/ħ)[Δ_α, ·] (rho = δ₂′(α)).
    """

    def __init__(self, sign: int = 1, rho: Optional[JetPoly] = None):
        self.moyal = MoyalProduct(sign)
        quarter = Fraction(sign, 4)
        self.gamma_x = WeylSection({(0, 2): CoeffExpr.of(JetPoly.scalar(quarter), -1)})
        self.gamma_y = WeylSection({(1, 1): CoeffExpr.of(JetPoly.scalar(2 * quarter), -1)})
        self.delta_x = delta_section(rho, sign) if rho is not None else None

    def bracket(self, potential: WeylSection, a: WeylSection, order: Optional[int], degree: Optional[int]) -> WeylSection:
        # i/ħ lowers the total degree by two
        lifted = None if degree is None else degree + 2
        return self.moyal.commutator(potential, a, None, lifted).times(I_OVER_HBAR).truncate(order, degree)

    def covariant(self, a: WeylSection, order: Optional[int] = None,
                  degree: Optional[int] = None) -> Tuple[WeylSection, WeylSection]:
        """The pair (∇_x a, ∇_y a) of ∇ = d + (i/ħ)[Γ, ·] (+ twist)."""
        nx = a.map_coefficients(CoeffExpr.dx) + self.bracket(self.gamma_x, a, order, degree)
        if self.delta_x is not None:
            nx = nx + self.bracket(self.delta_x, a, order, degree)
        ny = a.map_coefficients(CoeffExpr.dy) + self.bracket(self.gamma_y, a, order, degree)
        return nx.truncate(order, degree), ny.truncate(order, degree)

    def components(self, a: WeylSection, order: Optional[int] = None) -> Tuple[WeylSection, WeylSection]:
        nx, ny = self.covariant(a, order)
        return nx - a.partial_u(), ny - a.partial_v()

    def apply(self, a, order: Optional[int] = None) -> FormSection:
        if isinstance(a, WeylSection):
            dx_part, dy_part = self.components(a, order)
            return FormSection({"x": dx_part, "y": dy_part})
        if isinstance(a, FormSection):
            if not a.component("0").is_zero() or not a.component("xy").is_zero():
                raise ValueError("connection_apply on forms supports pure 1-forms")
            dx_of_y, _ = self.components(a.component("y"), order)
            _, dy_of_x = self.components(a.component("x"), order)
            return FormSection({"xy": dx_of_y - dy_of_x})
        raise TypeError(f"Cannot apply the connection to {type(a).__name__}")


def connection_apply(which: str, a, order: Optional[int] = None, sign: int = 1,
                     rho: Optional[JetPoly] = None) -> FormSection:
    if which == "D":
        return FedosovConnection(sign).apply(a, order)
    if which == "alpha_D":
        if rho is None:
            raise ValueError("alpha_D needs the jet coefficient δ₂′(α)")
        return FedosovConnection(sign, rho).apply(a, order)
    raise ValueError(f"Unknown connection: {which}")


# Koszul differential

def fiber_delta(a) -> FormSection:
    """δ = dx∧∂_u + dy∧∂_v on 0-forms and 1-forms."""
    if isinstance(a, WeylSection):
        return FormSection({"x": a.partial_u(), "y": a.partial_v()})
    return FormSection({"xy": a.component("y").partial_u() - a.component("x").partial_v()})


def fiber_delta_inverse(form: FormSection) -> FormSection:
    """δ⁻¹ on 1-forms (to 0-forms) and 2-forms (to 1-forms); zero on 0-forms."""
    zero_form: Dict[Index, CoeffExpr] = {}
    for slot, shift in (("x", (1, 0)), ("y", (0, 1))):
        for (m, n), c in form.component(slot).items():
            key = (m + shift[0], n + shift[1])
            piece = c.scale(Fraction(1, m + n + 1))
            zero_form[key] = zero_form[key] + piece if key in zero_form else piece
    out_x: Dict[Index, CoeffExpr] = {}
    out_y: Dict[Index, CoeffExpr] = {}
    for (m, n), c in form.component("xy").items():
        out_y[(m + 1, n)] = c.scale(Fraction(1, m + n + 2))
        out_x[(m, n + 1)] = c.scale(Fraction(-1, m + n + 2))
    result = {"0": WeylSection(zero_form)}
    if out_x or out_y:
        result["x"] = WeylSection(out_x)
        result["y"] = WeylSection(out_y)
    return FormSection(result)


# Section families

@dataclass(frozen=True)
class SectionContext:
    alpha: GroupWord = make_word("a")
    beta: GroupWord = make_word("b")
    f_name: str = "f"
    g_name: str = "g"


@dataclass(frozen=True)
class SectionFamily:
    """
    Data of D V + (i/ħ)Δ_L∘V − (i/ħ)V∘Δ_R = 0 with V_00 = seed. When both
    twist coefficients are multiples of δ₂′(word) the family also carries the
    H1 data (word, a, b) used by the closed forms.
    """

    kind: str
    seed: JetPoly
    rho_left: JetPoly
    rho_right: JetPoly
    word: Optional[GroupWord] = None
    seed_word: GroupWord = IDENTITY
    left_unit: Fraction = Fraction(0)
    right_unit: Fraction = Fraction(0)

    def twist_coefficients(self, sign: int) -> Tuple[JetPoly, JetPoly]:
        """A = (σ/2)(ρ_L − ρ_R) and B = ½(ρ_L + ρ_R)."""
        half = Fraction(1, 2)
        return ((self.rho_left - self.rho_right).scale(half * sign), (self.rho_left + self.rho_right).scale(half))


def family_for(kind: str, context: SectionContext = SectionContext()) -> SectionFamily:
    alpha, beta = context.alpha, context.beta
    ab = word_product(alpha, beta)
    zero = JetPoly()
    if kind == "hat_f":
        return SectionFamily(kind, JetPoly.function(context.f_name), zero, zero, IDENTITY)
    if kind == "alpha_hat_g":
        d = delta2_prime(alpha)
        return SectionFamily(kind, JetPoly.function(context.g_name, prefix=alpha), d, d, alpha,
                             alpha, Fraction(1), Fraction(1))
    if kind == "u_alpha_inv":
        return SectionFamily(kind, JetPoly.one(), zero, delta2_prime(alpha), alpha, alpha,
                             Fraction(0), Fraction(1))
    if kind == "u_alpha":
        return SectionFamily(kind, JetPoly.one(), delta2_prime(alpha), zero, alpha, alpha,
                             Fraction(1), Fraction(0))
    if kind == "u_alpha_beta":
        return SectionFamily(kind, JetPoly.one(), delta2_prime(alpha), delta2_prime(alpha + beta))
    if kind == "v_alphabeta":
        return SectionFamily(kind, JetPoly.one(), delta2_prime(alpha + beta), zero, ab, ab,
                             Fraction(1), Fraction(0))
    raise UnknownSectionKindError(f"Unknown section kind: {kind}")


def star_families(left_poly: JetPoly, left_word: GroupWord, right_poly: JetPoly,
                  right_word: GroupWord) -> List[SectionFamily]:
    """The five factors f̂, U_w⁻¹, w(ĝ), w(U_w′⁻¹), U_{ww′} of a star product."""
    zero = JetPoly()
    d_w = delta2_prime(left_word)
    d_ww = delta2_prime(left_word + right_word)
    return [
        SectionFamily("hat_f", left_poly, zero, zero),
        SectionFamily("u_alpha_inv", JetPoly.one(), zero, d_w),
        SectionFamily("alpha_hat_g", right_poly.prefixed(left_word), d_w, d_w),
        SectionFamily("u_alpha_beta", JetPoly.one(), d_w, d_ww),
        SectionFamily("v_alphabeta", JetPoly.one(), d_ww, zero),
    ]


def solve_family(family: SectionFamily, max_m: int, max_n: int, sign: int = 1,
                 order: Optional[int] = None) -> WeylSection:
    """
    Coefficient recursion. Rows:
      (m+1)V_{m+1,0} = ∂_x V_{m0} + (i/ħ)y³A V_{m-2,0} + y³B V_{m-1,1} − (iħ/2)y³A V_{m,2}
    columns:
      n V_{mn} = (∂_y + (n-1-m)/2y) V_{m,n-1}.
    """
    big_a, big_b = family.twist_coefficients(sign)
    ya = CoeffExpr.of(big_a, 3)
    yb = CoeffExpr.of(big_b, 3)
    half_i_hbar = HbarScalar.monomial(1, 0, Fraction(1, 2))
    width = max(max_n, 2)
    table: Dict[Index, CoeffExpr] = {}
    for m in range(max_m + 1):
        if m == 0:
            row = CoeffExpr.of(family.seed)
        else:
            row = table[(m - 1, 0)].dx()
            if ya and m >= 3:
                row = row + ya.multiply(table[(m - 3, 0)]).times(I_OVER_HBAR)
            if yb and m >= 2:
                row = row + yb.multiply(table[(m - 2, 1)])
            if ya:
                row = row - ya.multiply(table[(m - 1, 2)]).times(half_i_hbar)
            row = row.scale(Fraction(1, m))
        table[(m, 0)] = row
        for n in range(1, width + 1):
            table[(m, n)] = table[(m, n - 1)].dy(Fraction(n - 1 - m, 2)).scale(Fraction(1, n))
    section = WeylSection(table).window(max_m, max_n)
    return section.truncate(order)


def _y_shift(value: Rational) -> H1Element:
    return H1Element.Y() + H1Element.scalar(Fraction(value))


def _ladder(m: int, n: int) -> H1Element:
    """Π_{j=1..n} (Y + (j−1−m)/2)"""
    result = H1Element.one()
    for j in range(1, n + 1):
        result = result * _y_shift(Fraction(j - 1 - m, 2))
    return result


def closed_form_operators(a: Fraction, b: Fraction, max_m: int) -> List[H1Element]:
    """
    A_0 = 1,
    A_{m+1} = (X − (iħ/4)a δ₂′(Y−m/2)(Y−(m−1)/2)) A_m − m b δ₂′(Y−(m−1)/2) A_{m−1}
              + (i/ħ) m(m−1) a δ₂′ A_{m−2}.
    """
    d2p = H1Element.delta2_prime()
    X = H1Element.X()
    quarter_i_hbar = HbarScalar.monomial(1, 0, Fraction(1, 4))
    ops = [H1Element.one()]
    for m in range(max_m):
        nxt = X * ops[m]
        if a:
            factor = d2p * _y_shift(Fraction(-m, 2)) * _y_shift(Fraction(1 - m, 2))
            nxt = nxt - factor * ops[m] * (quarter_i_hbar.scale(a))
        if b and m >= 1:
            nxt = nxt - d2p * _y_shift(Fraction(1 - m, 2)) * ops[m - 1] * Fraction(m) * b
        if a and m >= 2:
            nxt = nxt + d2p * ops[m - 2] * (I_OVER_HBAR.scale(a * m * (m - 1)))
        ops.append(nxt)
    return ops


def _phi_recursion(family: SectionFamily, max_m: int, hbar_coeff: JetPoly,
                   lower: Callable[[int], JetPoly], inverse: Callable[[int], JetPoly],
                   sign_hbar: int = 1) -> List[JetPoly]:
    """
    φ_0 = seed,
    φ_{m+1} = Xφ_m + hbar_coeff·(Y−m/2)(Y−(m−1)/2)φ_m + lower(m)·(Y−(m−1)/2)φ_{m−1} + inverse(m)·φ_{m−2}
    """
    def y_minus(p: JetPoly, s: Fraction) -> JetPoly:
        return p.derivative("Y") - p.scale(s)

    phis = [family.seed]
    for m in range(max_m):
        cur = phis[m]
        nxt = cur.derivative("X")
        if hbar_coeff:
            nxt = nxt + hbar_coeff * y_minus(y_minus(cur, Fraction(m - 1, 2)), Fraction(m, 2))
        if m >= 1:
            low = lower(m)
            if low:
                nxt = nxt + low * y_minus(phis[m - 1], Fraction(m - 1, 2))
        if m >= 2:
            inv = inverse(m)
            if inv:
                nxt = nxt + inv * phis[m - 2]
        phis.append(nxt)
    return phis


def _ladder_apply(poly: JetPoly, m: int, n: int) -> JetPoly:
    for j in range(1, n + 1):
        poly = poly.derivative("Y") + poly.scale(Fraction(j - 1 - m, 2))
    return poly


def _section_from_phis(phis: List[JetPoly], max_m: int, max_n: int, with_n_factorial: bool = True) -> WeylSection:
    terms = {}
    for m in range(max_m + 1):
        for n in range(max_n + 1):
            poly = _ladder_apply(phis[m], m, n)
            denom = factorial(m) * (factorial(n) if with_n_factorial else 1)
            terms[(m, n)] = CoeffExpr.of(poly.scale(Fraction((-1) ** n, denom)), m - n)
    return WeylSection(terms)


def build_family(family: SectionFamily, max_m: int, max_n: int, sign: int = 1,
                 variant: str = "resolved", order: Optional[int] = None) -> WeylSection:
    """
    Closed form coefficients V_{mn} = ((−1)^n y^{m−n}/(m!n!))·Π(Y + (j−1−m)/2)·A_m(seed).
    variant "printed" reproduces the displayed normalisations literally.
    """
    if variant == "printed":
        return _printed_family(family, max_m, max_n).truncate(order)
    if variant != "resolved":
        raise ValueError(f"Unknown closed form variant: {variant}")
    if family.word is not None:
        a = Fraction(sign, 2) * (family.left_unit - family.right_unit)
        b = Fraction(1, 2) * (family.left_unit + family.right_unit)
        ops = closed_form_operators(a, b, max_m)
        element = CrossedElement.single(family.seed, family.seed_word)
        terms = {}
        for m in range(max_m + 1):
            for n in range(max_n + 1):
                op = _ladder(m, n) * ops[m]
                poly = act(op, element).terms.get(family.seed_word, JetPoly())
                denom = factorial(m) * factorial(n)
                terms[(m, n)] = CoeffExpr.of(poly.scale(Fraction((-1) ** n, denom)), m - n)
        return WeylSection(terms).truncate(order)
    big_a, big_b = family.twist_coefficients(sign)
    quarter = HbarScalar.monomial(1, 0, Fraction(-1, 4))
    phis = _phi_recursion(
        family, max_m,
        big_a * quarter,
        lambda m: big_b.scale(-m),
        lambda m: big_a * I_OVER_HBAR.scale(m * (m - 1)),
    )
    return _section_from_phis(phis, max_m, max_n).truncate(order)


def _printed_family(family: SectionFamily, max_m: int, max_n: int) -> WeylSection:
    if family.kind == "hat_f":
        terms = {}
        for m in range(max_m + 1):
            for n in range(max_n + 1):
                op = H1Element.X() ** m
                for j in range(1, n + 1):
                    op = op * _y_shift(Fraction(m + j - 1, 2))
                poly = act(op, CrossedElement.single(family.seed)).terms.get(IDENTITY, JetPoly())
                terms[(m, n)] = CoeffExpr.of(poly.scale(Fraction((-1) ** n, factorial(m))), m - n)
        return WeylSection(terms)
    if family.kind == "alpha_hat_g":
        ops = closed_form_operators(Fraction(0), Fraction(1), max_m)
        element = CrossedElement.single(family.seed, family.seed_word)
        terms = {}
        for m in range(max_m + 1):
            for n in range(max_n + 1):
                op = ops[m]
                for j in range(1, n + 1):
                    op = op * _y_shift(Fraction(m + j - 1, 2))
                poly = act(op, element).terms.get(family.seed_word, JetPoly())
                terms[(m, n)] = CoeffExpr.of(poly.scale(Fraction((-1) ** n, factorial(m) * factorial(n))), m - n)
        return WeylSection(terms)
    quarter_i_hbar = HbarScalar.monomial(1, 0, Fraction(1, 4))
    if family.kind in ("u_alpha_inv", "u_alpha"):
        z = family.rho_right if family.kind == "u_alpha_inv" else -family.rho_left
        lower_poly = -(family.rho_left + family.rho_right)
    elif family.kind == "u_alpha_beta":
        z = family.rho_right - family.rho_left
        lower_poly = -(family.rho_left + family.rho_right)
    elif family.kind == "v_alphabeta":
        z = -family.rho_left
        lower_poly = family.rho_left
    else:
        raise UnknownSectionKindError(f"No printed closed form for {family.kind}")
    phis = _phi_recursion(
        family, max_m,
        z * quarter_i_hbar,
        lambda m: lower_poly,
        lambda m: -(z * I_OVER_HBAR),
    )
    return _section_from_phis(phis, max_m, max_n)


def build_section(kind: str, context: SectionContext = SectionContext(), max_m: int = 4,
                  max_n: Optional[int] = None, sign: int = 1, variant: str = "resolved",
                  order: Optional[int] = None) -> WeylSection:
    family = family_for(kind, context)
    return build_family(family, max_m, max_m if max_n is None else max_n, sign, variant, order)


def solve_recursion(kind: str, context: SectionContext = SectionContext(), max_m: int = 4,
                    max_n: Optional[int] = None, sign: int = 1, order: Optional[int] = None) -> WeylSection:
    family = family_for(kind, context)
    return solve_family(family, max_m, max_m if max_n is None else max_n, sign, order)


def degree_section(kind: str, context: SectionContext = SectionContext(), degree: int = 3,
                   sign: int = 1) -> WeylSection:
    """
    All terms of total degree m + n + 2k ≤ `degree`. The ħ-valuation bound
    −⌊m/3⌋ puts every such term in rows m ≤ 3·degree and columns n ≤ degree.
    """
    if degree < 0:
        raise ValueError(f"degree must be non-negative, got {degree}")
    return solve_recursion(kind, context, 3 * degree, degree, sign).truncate(degree=degree)


def flat_associator(context: SectionContext = SectionContext(), degree: int = 3, sign: int = 1) -> WeylSection:
    """v_{α,β} = U_α⁻¹ ∘ α(U_β⁻¹) ∘ αβ(U⁻¹_{(αβ)⁻¹}), exact to total degree `degree`."""
    factors = [degree_section(kind, context, degree, sign)
               for kind in ("u_alpha_inv", "u_alpha_beta", "v_alphabeta")]
    return MoyalProduct(sign).product_chain(factors, degree=degree)


def fedosov_iterate(delta_left: Optional[FormSection], delta_right: Optional[FormSection],
                    degree: int, sign: int = 1, seed: Optional[JetPoly] = None) -> WeylSection:
    """
    Fixed point of U = seed + δ⁻¹{(D+δ)U + (i/ħ)Δ_L∘U − (i/ħ)U∘Δ_R}, exact in
    all terms of total degree ≤ `degree`.
    """
    connection = FedosovConnection(sign)
    moyal_product = connection.moyal
    dl = delta_left.component("x") if delta_left is not None else None
    dr = delta_right.component("x") if delta_right is not None else None
    for d in (delta_left, delta_right):
        if d is not None and not (d.component("y").is_zero() and d.component("xy").is_zero()):
            raise ValueError("twist forms must be pure dx forms")
    start = WeylSection.constant(seed if seed is not None else JetPoly.one())
    current = start
    for _ in range(degree + 3):
        nx, ny = connection.covariant(current, degree=degree)
        if dl is not None:
            nx = nx + moyal_product.product(dl, current, degree=degree + 2).times(I_OVER_HBAR)
        if dr is not None:
            nx = nx - moyal_product.product(current, dr, degree=degree + 2).times(I_OVER_HBAR)
        lifted = fiber_delta_inverse(FormSection({"x": nx, "y": ny})).component("0")
        nxt = (start + lifted).truncate(degree=degree)
        if nxt == current:
            return current
        current = nxt
    raise FedosovConvergenceError(f"Fedosov iteration did not stabilise at degree {degree}")


def family_residual(family: SectionFamily, section: WeylSection, sign: int = 1) -> FormSection:
    """D V + (i/ħ)Δ_L∘V − (i/ħ)V∘Δ_R"""
    connection = FedosovConnection(sign)
    form = connection.apply(section)
    x_part = form.component("x")
    if family.rho_left:
        x_part = x_part + connection.moyal.product(delta_section(family.rho_left, sign), section).times(I_OVER_HBAR)
    if family.rho_right:
        x_part = x_part - connection.moyal.product(section, delta_section(family.rho_right, sign)).times(I_OVER_HBAR)
    return FormSection({"x": x_part, "y": form.component("y")})


def residual_window(max_m: int, max_n: int) -> Tuple[int, int]:
    """Indices (m, n) where the residual of a section computed on [0, max_m]×[0, max_n] is exact."""
    return max_m - 1, max_n - 2


def valuation_bound_holds(section: WeylSection) -> bool:
    """ħ-valuation of the u^m v^n coefficient is ≥ −⌊m/3⌋."""
    for (m, _), c in section.items():
        v = c.valuation()
        if v is not None and v < -(m // 3):
            return False
    return True
