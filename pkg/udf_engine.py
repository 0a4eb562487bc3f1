"""
Star product on the jet model and the universal deformation formula R.

    fα ⋆ gβ = (f̂ ∘ U_α⁻¹ ∘ α(ĝ) ∘ α(U_β⁻¹) ∘ U_{αβ})|_{u=v=0} αβ

Expanding every factor in u, v, only tuples with Σmᵢ = Σnᵢ survive the
restriction; tuple (m; n) is first seen at ħ-order
Σm − ⌊m₂/3⌋ − ⌊m₄/3⌋ − ⌊m₅/3⌋. Evaluated on formal letters f, g and formal
generators a, b the result is bilinear in F(f) and a(F(g)), and reading the
jets of a and a(b) back as δ-monomials gives the two legs of R.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Tuple

from exact_scalars import HbarScalar
from exporter import VerificationReport
from h1_hopf import (
    H1Element, H1Monomial, H1Tensor, antipode, antipode_monomial, apply_counit, coproduct,
    coproduct_leg, extend_unit, legs_product, tensor_compose,
)
from jet_model import (
    CrossedElement, GroupWord, JetPoly, act, cross_multiply, make_word, word_product,
)
from weyl_fedosov import MoyalProduct, SectionFamily, WeylSection, solve_family, star_families

ALPHA = make_word("a")
BETA = make_word("b")
# slots whose coefficients may carry negative ħ powers
TWIST_SLOTS = (1, 3, 4)

Tuple5 = Tuple[int, int, int, int, int]


class StarConsistencyError(ValueError):
    """Raised when the origin restriction keeps a y-power or the group word is wrong."""


class ExtractionError(ValueError):
    """Raised for a monomial of the star product that cannot be read as a term of R."""


class TwistError(ValueError):
    """Raised when twisting by a tensor whose order 0 part is not 1⊗1."""


@dataclass
class StarResult:
    value: CrossedElement
    order: int


def compositions(total: int, parts: int = 5) -> Iterable[Tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in compositions(total - head, parts - 1):
            yield (head,) + rest


def tuple_order(ms: Tuple[int, ...]) -> int:
    """Lowest ħ power a tuple with these u-exponents can contribute."""
    return sum(ms) - sum(ms[i] // 3 for i in TWIST_SLOTS)


@lru_cache(maxsize=None)
def max_total_degree(order: int) -> int:
    """Largest Σmᵢ of a tuple contributing at ħ-order ≤ order."""
    best = 0
    for total in range(0, 2 * order + 3):
        if any(tuple_order(ms) <= order for ms in compositions(total)):
            best = total
    return best


def first_order_R() -> H1Tensor:
    """(−iħ/2)(−X⊗Y + δ₁Y⊗Y + Y⊗X)"""
    c = HbarScalar.monomial(1, 0, Fraction(-1, 2))
    X, Y = H1Element.X(), H1Element.Y()
    tensor = (H1Tensor.from_elements(-X, Y)
              + H1Tensor.from_elements(H1Element.delta(1) * Y, Y)
              + H1Tensor.from_elements(Y, X))
    return tensor * c


def second_order_R() -> H1Tensor:
    """The six-term ħ² component, (−iħ/2)² times a rational combination."""
    c = HbarScalar.monomial(1, 0, Fraction(-1, 2))
    X, Y = H1Element.X(), H1Element.Y()
    s_x = antipode(X)
    d2p = H1Element.delta2_prime()
    half = Fraction(1, 2)
    yh = Y + H1Element.scalar(half)
    y1 = Y + H1Element.one()
    tensor = (H1Tensor.from_elements(s_x * s_x, yh * Y) * half
              + H1Tensor.from_elements(s_x * yh, X * yh)
              + H1Tensor.from_elements(Y * yh, X * X) * half
              + H1Tensor.from_elements(d2p * yh * Y, Y) * half
              + H1Tensor.from_elements(d2p, y1 * yh * Y) * Fraction(1, 6)
              + H1Tensor.from_elements(d2p * Y, yh * Y) * half)
    return tensor * (c * c)


class RTensor:
    """R split by ħ-order: orders[k] holds the ħ^k terms with ħ^k kept in the coefficients"""

    def __init__(self, orders: List[H1Tensor], sign: int = 1):
        self.orders = orders
        self.sign = sign

    @classmethod
    def from_total(cls, total: H1Tensor, max_order: int, sign: int = 1) -> "RTensor":
        powers = total.hbar_powers()
        if powers and powers[0] < 0:
            raise ExtractionError(f"R has a negative ħ power: ħ^{powers[0]}")
        return cls([total.hbar_part(k) for k in range(max_order + 1)], sign)

    @property
    def max_order(self) -> int:
        return len(self.orders) - 1

    def order(self, k: int) -> H1Tensor:
        return self.orders[k] if k < len(self.orders) else H1Tensor(2)

    def total(self, order: Optional[int] = None) -> H1Tensor:
        top = self.max_order if order is None else min(order, self.max_order)
        result = H1Tensor(2)
        for k in range(top + 1):
            result = result + self.orders[k]
        return result

    def truncate(self, order: int) -> "RTensor":
        return RTensor(self.orders[:order + 1], self.sign)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RTensor):
            return NotImplemented
        return self.orders == other.orders

    def to_json(self) -> Dict[str, object]:
        return {
            "sign": self.sign,
            "orders": [
                {
                    "k": k,
                    "terms": [
                        {"left": left.text(), "right": right.text(), "coeff": c.to_json()}
                        for (left, right), c in tensor.items()
                    ],
                }
                for k, tensor in enumerate(self.orders)
            ],
        }

    @classmethod
    def from_json(cls, data: Dict[str, object]) -> "RTensor":
        orders = []
        for entry in sorted(data["orders"], key=lambda e: e["k"]):
            terms = {}
            for term in entry["terms"]:
                legs = (H1Monomial.parse(term["left"]), H1Monomial.parse(term["right"]))
                terms[legs] = HbarScalar.from_json(term["coeff"])
            orders.append(H1Tensor(2, terms))
        return cls(orders, int(data.get("sign", 1)))

    def text(self) -> str:
        lines = []
        for k, tensor in enumerate(self.orders):
            lines.append(f"ħ^{k}: {tensor.text()}")
        return "\n".join(lines)

    def latex_lines(self) -> List[Tuple[int, str]]:
        """Per order LaTeX, with (−iħ/2)^k pulled out when every coefficient allows it."""
        out = []
        unit = HbarScalar.monomial(1, 0, Fraction(-1, 2))
        for k, tensor in enumerate(self.orders):
            factor = unit ** k
            inverse = factor.inverse()
            ratios = {legs: c * inverse for legs, c in tensor.items()}
            rational = all(r.exponents() == [0] and r.coeff(0).is_real() for r in ratios.values())
            if k == 0 or not tensor.terms or not rational:
                out.append((k, tensor.latex()))
                continue
            inner = H1Tensor(2, ratios).latex()
            head = "\\left(-\\frac{i\\hbar}{2}\\right)" + ("" if k == 1 else f"^{{{k}}}")
            out.append((k, f"{head}\\left[{inner}\\right]"))
        return out

    def latex(self) -> str:
        return " \\\\\n".join(f"R_{{{k}}} &= {body}" for k, body in self.latex_lines())

    def __repr__(self) -> str:
        return f"RTensor(max_order={self.max_order})"


@dataclass
class TwistResult:
    r_inverse: RTensor
    v: H1Element
    v_inverse: H1Element
    twisted_coproduct: Dict[str, H1Tensor] = field(default_factory=dict)
    twisted_antipode: Dict[str, H1Element] = field(default_factory=dict)


TWIST_GENERATORS = {
    "X": H1Element.X,
    "Y": H1Element.Y,
    "d1": lambda: H1Element.delta(1),
}


class UDFEngine:
    """
    Star product, R extraction and UDF checks for one Moyal sign.
    """

    def __init__(self, sign: int = 1, log: Optional[Callable[[str], None]] = None):
        if sign not in (1, -1):
            raise ValueError(f"Moyal sign must be +1 or -1, got {sign}")
        self.sign = sign
        self.moyal = MoyalProduct(sign)
        self._log = log or (lambda message: None)
        self._sections: Dict[Tuple[SectionFamily, int], WeylSection] = {}
        self._terms: Dict[int, Dict[Tuple[Tuple5, Tuple5], H1Tensor]] = {}

    # Sections

    def section(self, family: SectionFamily, width: int) -> WeylSection:
        key = (family, width)
        if key not in self._sections:
            self._sections[key] = solve_family(family, width, width, self.sign)
        return self._sections[key]

    def _tuple_value(self, sections: List[WeylSection], ms: Tuple5, ns: Tuple5, order: int) -> JetPoly:
        """Contribution of one (m; n) tuple, truncated at ħ^order."""
        pairs = tuple(zip(ms, ns))
        contraction = self.moyal.origin_contraction(pairs)
        if not contraction:
            return JetPoly()
        coeffs = [s.coefficient(m, n) for s, (m, n) in zip(sections, pairs)]
        if any(c.is_zero() for c in coeffs):
            return JetPoly()
        budget = order - sum(ms)
        floors = [-(ms[i] // 3) if i in TWIST_SLOTS else 0 for i in range(5)]
        product = coeffs[0].truncate(budget - sum(floors[1:]))
        for i in range(1, 5):
            product = product.multiply(coeffs[i], budget - sum(floors[i + 1:]))
            if product.is_zero():
                return JetPoly()
        grades = product.y_grades()
        if any(g != 0 for g in grades):
            raise StarConsistencyError(f"tuple {ms};{ns} leaves y-grades {grades} at the origin")
        return (product.grade_zero() * contraction).truncate(order)

    def _star_poly(self, left: JetPoly, alpha: GroupWord, right: JetPoly, beta: GroupWord,
                   order: int, per_tuple: bool = False):
        width = max_total_degree(order)
        sections = [self.section(family, width) for family in star_families(left, alpha, right, beta)]
        total = JetPoly()
        pieces: Dict[Tuple[Tuple5, Tuple5], JetPoly] = {}
        for s in range(width + 1):
            m_tuples = [ms for ms in compositions(s) if tuple_order(ms) <= order]
            if not m_tuples:
                continue
            n_tuples = list(compositions(s))
            for ms in m_tuples:
                for ns in n_tuples:
                    value = self._tuple_value(sections, ms, ns, order)
                    if value:
                        total = total + value
                        if per_tuple:
                            pieces[(ms, ns)] = value
        return (total, pieces) if per_tuple else total

    def star(self, f_word: Tuple[JetPoly, GroupWord], g_word: Tuple[JetPoly, GroupWord], order: int) -> StarResult:
        if order < 0:
            raise ValueError(f"order must be ≥ 0, got {order}")
        (left, alpha), (right, beta) = f_word, g_word
        value = self._star_poly(left, alpha, right, beta, order).truncate(order)
        return StarResult(CrossedElement.single(value, word_product(alpha, beta)), order)

    def star_elements(self, a: CrossedElement, b: CrossedElement, order: int) -> CrossedElement:
        """Bilinear extension of star to crossed elements."""
        result = CrossedElement()
        for wa, pa in a.items():
            for wb, pb in b.items():
                result = result + self.star((pa, wa), (pb, wb), order).value
        return result.truncate(order)

    # Extraction

    def _extract(self, poly: JetPoly, f_name: str = "f", g_name: str = "g") -> H1Tensor:
        out: Dict[Tuple[H1Monomial, H1Monomial], HbarScalar] = {}
        for mono, coeff in poly.items():
            left_deltas: Dict[int, int] = {}
            right_deltas: Dict[int, int] = {}
            left_fn = right_fn = None
            for letter, e in mono:
                if letter.kind == "J" and not letter.prefix and letter.name == ALPHA[0][0]:
                    left_deltas[letter.i] = left_deltas.get(letter.i, 0) + e
                elif letter.kind == "J" and letter.prefix == ALPHA and letter.name == BETA[0][0]:
                    right_deltas[letter.i] = right_deltas.get(letter.i, 0) + e
                elif letter.kind == "F" and e == 1 and not letter.prefix and letter.name == f_name and left_fn is None:
                    left_fn = letter
                elif letter.kind == "F" and e == 1 and letter.prefix == ALPHA and letter.name == g_name and right_fn is None:
                    right_fn = letter
                else:
                    raise ExtractionError(f"cannot place letter {letter.text()}^{e} in H1⊗H1")
            if left_fn is None or right_fn is None:
                raise ExtractionError(f"monomial is not bilinear in {f_name} and a({g_name})")
            legs = (
                H1Monomial(tuple(sorted(left_deltas.items())), left_fn.i, left_fn.j),
                H1Monomial(tuple(sorted(right_deltas.items())), right_fn.i, right_fn.j),
            )
            out[legs] = out[legs] + coeff if legs in out else coeff
        return H1Tensor(2, out)

    def extract_terms(self, order: int) -> Dict[Tuple[Tuple5, Tuple5], H1Tensor]:
        """Per-tuple pieces of R up to ħ^order, zero pieces dropped."""
        if order not in self._terms:
            self._log(f"📊 Expanding the five-factor product to ħ^{order}")
            _, pieces = self._star_poly(JetPoly.function("f"), ALPHA, JetPoly.function("g"), BETA,
                                        order, per_tuple=True)
            extracted = {key: self._extract(value) for key, value in pieces.items()}
            self._terms[order] = {key: t for key, t in extracted.items() if not t.is_zero()}
        return self._terms[order]

    def extract_R(self, order: int) -> RTensor:
        if order < 0:
            raise ValueError(f"order must be ≥ 0, got {order}")
        total = H1Tensor(2)
        for tensor in self.extract_terms(order).values():
            total = total + tensor
        r_tensor = RTensor.from_total(total, order, self.sign)
        self._log(f"✅ R extracted to ħ^{order}")
        return r_tensor

    def contributing_tuples(self, order: int) -> List[Dict[str, object]]:
        """The (m; n) tuples with a nonzero piece, grouped by their lowest ħ-order."""
        rows = []
        for (ms, ns), tensor in sorted(self.extract_terms(order).items()):
            rows.append({
                "m": ms,
                "n": ns,
                "order": min(tensor.hbar_powers()),
                "value": tensor,
            })
        rows.sort(key=lambda row: (row["order"], row["m"], row["n"]))
        return rows

    # Using R

    def star_via_R(self, r_tensor: RTensor, a: CrossedElement, b: CrossedElement, order: int) -> CrossedElement:
        result = CrossedElement()
        for (left, right), coeff in r_tensor.total(order).items():
            if coeff.valuation() > order:
                continue
            la = act(H1Element.monomial(left), a, order)
            rb = act(H1Element.monomial(right), b, order)
            result = result + cross_multiply(la, rb, order) * coeff
        return result.truncate(order)

    def verify_udf(self, r_tensor: RTensor, order: Optional[int] = None) -> VerificationReport:
        """Pentagon and counit identities of R, order by order."""
        top = r_tensor.max_order if order is None else min(order, r_tensor.max_order)
        report = VerificationReport("udf")
        r_total = r_tensor.total(top)
        lhs = tensor_compose(coproduct_leg(r_total, 1), extend_unit(r_total, 2), top)
        rhs = tensor_compose(coproduct_leg(r_total, 2), extend_unit(r_total, 0), top)
        for k in range(top + 1):
            same = lhs.hbar_part(k) == rhs.hbar_part(k)
            report.add(f"pentagon ħ^{k}", same, "" if same else (lhs - rhs).hbar_part(k).text())
            self._log(f"📊 pentagon at ħ^{k}: {'ok' if same else 'mismatch'}")
        one = H1Element.one()
        for leg in (1, 2):
            contracted = apply_counit(r_total, leg)
            same = contracted == one
            side = "ε⊗1" if leg == 1 else "1⊗ε"
            report.add(f"counit {side}", same, "" if same else contracted.text())
        return report

    # Twisting

    def twist(self, r_tensor: RTensor, order: Optional[int] = None) -> TwistResult:
        top = r_tensor.max_order if order is None else min(order, r_tensor.max_order)
        if r_tensor.order(0) != H1Tensor.unit(2):
            raise TwistError("R does not start with 1⊗1")
        r_total = r_tensor.total(top)
        unit2 = H1Tensor.unit(2)
        correction = r_total - unit2
        inverse = unit2
        power = unit2
        for i in range(1, top + 1):
            power = tensor_compose(power, correction, top)
            inverse = inverse + power * (-1) ** i
        r_inverse = RTensor.from_total(inverse, top, r_tensor.sign)

        v = legs_product(r_total, antipode_monomial).truncate(top)
        v_inverse = _series_inverse(v, top)

        twisted_coproduct = {}
        twisted_antipode = {}
        for name, make in TWIST_GENERATORS.items():
            a = make()
            twisted_coproduct[name] = tensor_compose(tensor_compose(inverse, coproduct(a), top), r_total, top)
            twisted_antipode[name] = (v_inverse * antipode(a) * v).truncate(top)
        return TwistResult(r_inverse, v, v_inverse, twisted_coproduct, twisted_antipode)

    def check_twist(self, r_tensor: RTensor, order: Optional[int] = None) -> VerificationReport:
        top = r_tensor.max_order if order is None else min(order, r_tensor.max_order)
        result = self.twist(r_tensor, top)
        report = VerificationReport("twist")
        r_total = r_tensor.total(top)
        product = tensor_compose(result.r_inverse.total(), r_total, top)
        report.add("R⁻¹R = 1⊗1", product == H1Tensor.unit(2))
        report.add("v·v⁻¹ = 1", (result.v * result.v_inverse).truncate(top) == H1Element.one())

        coassoc_order = min(top, 2)
        inverse = result.r_inverse.total(coassoc_order)
        r_low = r_tensor.total(coassoc_order)
        cache: Dict[H1Monomial, H1Tensor] = {}

        def twisted(m: H1Monomial) -> H1Tensor:
            if m not in cache:
                cache[m] = tensor_compose(tensor_compose(inverse, coproduct(H1Element.monomial(m)), coassoc_order),
                                          r_low, coassoc_order)
            return cache[m]

        for name, tensor in result.twisted_coproduct.items():
            tensor = tensor.truncate(coassoc_order)
            left = _apply_on_leg(tensor, 0, twisted, coassoc_order)
            right = _apply_on_leg(tensor, 1, twisted, coassoc_order)
            report.add(f"twisted coproduct coassociative on {name}", left == right)

        for name, tensor in result.twisted_coproduct.items():
            total = H1Element()
            for (l, r), c in tensor.truncate(coassoc_order).items():
                s_left = (result.v_inverse * antipode(H1Element.monomial(l)) * result.v).truncate(coassoc_order)
                total = total + s_left * H1Element.monomial(r) * c
            total = total.truncate(coassoc_order)
            if total.is_zero():
                report.note(f"twisted antipode axiom on {name}", "holds")
            else:
                report.discrepancy(f"twisted antipode axiom on {name}", total.text())
        return report


def _series_inverse(v: H1Element, order: int) -> H1Element:
    one = H1Element.one()
    correction = v - one
    result = one
    power = one
    for i in range(1, order + 1):
        power = (power * correction).truncate(order)
        result = result + power * (-1) ** i
    return result.truncate(order)


def _apply_on_leg(tensor: H1Tensor, leg: int, fn: Callable[[H1Monomial], H1Tensor], order: int) -> H1Tensor:
    """Replace leg 0 or 1 of a rank 2 tensor by fn(leg), giving a rank 3 tensor."""
    out: Dict[Tuple[H1Monomial, ...], HbarScalar] = {}
    for (l, r), c in tensor.items():
        image = fn(l if leg == 0 else r)
        for (a, b), d in image.items():
            key = (a, b, r) if leg == 0 else (l, a, b)
            term = (c * d).truncate(order)
            out[key] = out[key] + term if key in out else term
    return H1Tensor(3, out)


def calibrate_moyal_sign(order: int = 1, log: Optional[Callable[[str], None]] = None) -> Dict[str, object]:
    """Extract R at ħ¹ under both signs; exactly one should reproduce first_order_R()."""
    expected = first_order_R()
    matches = {}
    for sign in (1, -1):
        r_tensor = UDFEngine(sign, log).extract_R(order)
        matches[sign] = r_tensor.order(1) == expected
    chosen = [s for s, ok in matches.items() if ok]
    return {"matches": matches, "sign": chosen[0] if len(chosen) == 1 else None}
