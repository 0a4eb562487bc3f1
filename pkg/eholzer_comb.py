"""
Exact checks of the binomial identities behind associativity of the
Eholzer product and the Cohen-Manin-Zagier identity at a = 1/2.

Every identity here is polynomial in its free variables once the integer
indices are fixed, so agreement on a grid with more points per variable than
the per-variable degree is a proof for that index. The grid runner records
whether each grid clears the bound.
"""

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

import sympy

from exporter import VerificationReport

HALF = Fraction(1, 2)
IDENTITIES = ["assoc", "zagier", "s_sums", "triple"]
POCHHAMBER_FORMS = ["rising_product", "binomial"]
VARIABLE_LABELS = {"k2": "2k", "l2": "2l", "m2": "2m"}


class ExcludedPointError(ValueError):
    """A Pochhammer denominator vanishes at this point."""


def to_rational(value: Any) -> Fraction:
    """Exact rational from an int, a Fraction or a string such as '3/2'."""
    if isinstance(value, bool):
        raise ValueError(f"Not a rational value: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as e:
            raise ValueError(f"Not a rational value: {value!r}") from e
    raise ValueError(f"Not a rational value: {value!r}")


def _exact(value):
    return to_rational(value) if isinstance(value, (int, float, str)) else value


def rising(x, n: int):
    """Pochhammer symbol x(x+1)...(x+n-1)."""
    if n < 0:
        raise ValueError(f"Pochhammer index must be non-negative, got {n}")
    x = _exact(x)
    result = Fraction(1)
    for i in range(n):
        result = result * (x + i)
    return result


def binom(x, k: int):
    """Generalized binomial x(x-1)...(x-k+1)/k!, zero for k < 0."""
    if k < 0:
        return Fraction(0)
    x = _exact(x)
    if isinstance(x, Fraction) and x.denominator == 1:
        top = x.numerator
        return Fraction(comb(top, k) if top >= 0 else (-1) ** k * comb(k - top - 1, k))
    result = Fraction(1)
    for i in range(k):
        result = result * (x - i)
    return result / factorial(k)


def pochhammer_binom(x: Any, n: int, which: str = "binomial"):
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if which == "rising_product":
        return rising(to_rational(x), n)
    if which == "binomial":
        return binom(to_rational(x), n)
    raise ValueError(f"Unknown form '{which}'. Choose from: {', '.join(POCHHAMBER_FORMS)}")


def _agree(lhs, rhs) -> bool:
    if isinstance(lhs, sympy.Basic) or isinstance(rhs, sympy.Basic):
        return sympy.expand(sympy.sympify(lhs) - sympy.sympify(rhs)) == 0
    return lhs == rhs


def _digest(value) -> str:
    return str(sympy.factor(value)) if isinstance(value, sympy.Basic) else str(value)


@dataclass(frozen=True)
class RationalPoint:
    """Exact values for the free variables of one identity"""
    values: Tuple[Tuple[str, Fraction], ...] = ()

    @classmethod
    def of(cls, **values: Any) -> "RationalPoint":
        return cls(tuple((name, to_rational(value)) for name, value in values.items()))

    def __getitem__(self, name: str) -> Fraction:
        for key, value in self.values:
            if key == name:
                return value
        raise KeyError(name)

    def get(self, name: str, default: Any = None) -> Any:
        try:
            return self[name]
        except KeyError:
            return default

    def as_dict(self) -> Dict[str, Fraction]:
        return dict(self.values)

    def sort_key(self) -> Tuple:
        return tuple((name, value) for name, value in sorted(self.values))

    def label(self) -> str:
        return ", ".join(f"{VARIABLE_LABELS.get(name, name)}={value}" for name, value in self.values)


# Associativity identity

def assoc_pochhammer_sides(n: int, p: int, k2, l2, m2) -> Tuple[Any, Any]:
    """Both sides in the Pochhammer fraction form; raises ExcludedPointError on a zero denominator."""
    def quotient(numerator, denominator, what):
        if denominator == 0:
            raise ExcludedPointError(what)
        return numerator / denominator

    lhs = Fraction(0)
    for r in range(n - p + 1):
        first = quotient(rising(k2, r) * rising(l2, r) / factorial(r), rising(k2, r), f"(2k)_{r}")
        top = rising(k2 + l2 + 2 * r, n - r) * rising(m2, n - r) / factorial(n - r)
        bottom = rising(k2 + l2 + 2 * r, n - p - r) * rising(m2, p)
        lhs += binom(n - r, p) * first * quotient(top, bottom, f"(2k+2l+{2 * r})_{n - p - r}(2m)_{p}")
    rhs = Fraction(0)
    for s in range(p + 1):
        first = quotient(rising(l2, s) * rising(m2, s) / factorial(s), rising(m2, s), f"(2m)_{s}")
        top = rising(k2, n - s) * rising(l2 + m2 + 2 * s, n - s) / factorial(n - s)
        bottom = rising(l2 + m2 + 2 * s, p - s) * rising(k2, n - p)
        rhs += binom(n - s, n - p) * first * quotient(top, bottom, f"(2l+2m+{2 * s})_{p - s}(2k)_{n - p}")
    return lhs, rhs


def assoc_binomial_sides(n: int, p: int, k2, l2, m2) -> Tuple[Any, Any]:
    lhs = sum((binom(l2 + r - 1, r) * binom(k2 + l2 + n + r - 1, p) * binom(m2 + n - r - 1, n - p - r)
               for r in range(n - p + 1)), Fraction(0))
    rhs = sum((binom(l2 + s - 1, s) * binom(k2 + n - s - 1, p - s) * binom(l2 + m2 + s + n - 1, n - p)
               for s in range(p + 1)), Fraction(0))
    return lhs, rhs


def assoc_t_sum(n: int, p: int, k2, l2, m2):
    """The common value both sides reduce to."""
    return sum((binom(k2 + l2 + n - 1, p - t) * binom(l2 + m2 + n - 1, n - p - t)
                * (-1) ** t * binom(-l2, t)
                for t in range(min(p, n - p) + 1)), Fraction(0))


def assoc_identity_check(n: int, point: RationalPoint) -> VerificationReport:
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    k2, l2, m2 = point["k2"], point["l2"], point["m2"]
    report = VerificationReport("assoc", metadata={"n": n, "point": point.label()})
    for p in range(n + 1):
        name = f"n={n} p={p}"
        binomial_lhs, binomial_rhs = assoc_binomial_sides(n, p, k2, l2, m2)
        common = assoc_t_sum(n, p, k2, l2, m2)
        try:
            lhs, rhs = assoc_pochhammer_sides(n, p, k2, l2, m2)
        except ExcludedPointError as e:
            report.note(f"{name} excluded", f"vanishing denominator {e}", excluded=True)
            lhs, rhs = binomial_lhs, binomial_rhs
        ok = _agree(lhs, rhs) and _agree(lhs, binomial_lhs) and _agree(binomial_lhs, binomial_rhs) \
            and _agree(binomial_rhs, common)
        report.add(name, ok, f"{_digest(lhs)} vs {_digest(rhs)}", lhs=_digest(lhs), rhs=_digest(rhs),
                   t_sum=_digest(common))
    return report


# Zagier's identity

def zagier_P(n: int, y, z, a):
    total = Fraction(0)
    for r in range(n + 1):
        total += (binom(y, r) * binom(y - a, r) * binom(2 * y - r, n - r)
                  * binom(z, n - r) * binom(z + a, n - r) * binom(2 * z - n + r, r)
                  * (factorial(r) * factorial(n - r)) ** 2)
    return (-4) ** n * total


def zagier_Q(n: int, y, z, a):
    """Right side with x eliminated through x + y + z = n - 1."""
    x = n - y - z - 1
    total = Fraction(0)
    for j in range(n // 2 + 1):
        weight = Fraction(factorial(n - 2 * j) ** 2 * factorial(j) ** 6 * 2 ** (6 * j), factorial(2 * j))
        total += (weight * binom(-HALF, j) * binom(a - HALF, j) * binom(-a - HALF, j)
                  * binom(x, j) * binom(2 * x - 2 * j, n - 2 * j)
                  * binom(y, j) * binom(2 * y - 2 * j, n - 2 * j)
                  * binom(z, j) * binom(2 * z - 2 * j, n - 2 * j))
    return total


def half_weight_sides(n: int, y, z) -> Tuple[Any, Any]:
    """The a = 1/2 specialisation with both denominators cleared."""
    lhs = Fraction(0)
    for r in range(n + 1):
        lhs += (binom(2 * y, 2 * r) * binom(2 * y - r, n - r) * binom(2 * z + 1, 2 * (n - r))
                * binom(2 * z - n + r, r)
                * Fraction(factorial(2 * r) * factorial(2 * (n - r)), factorial(n) ** 2))
    rhs = binom(2 * n - 2 * y - 2 * z - 2, n) * binom(2 * y, n) * binom(2 * z, n)
    return (-1) ** n * lhs, rhs


def _bracket(n: int, r: int, z):
    return binom(2 * z - n + r, n - r) + 2 * binom(2 * z - n + r, n - r - 1)


def reduced_half_weight_sides(n: int, y, z) -> Tuple[Any, Any]:
    lhs = sum((binom(2 * y - r, r) * _bracket(n, r, z) for r in range(n + 1)), Fraction(0))
    return lhs, binom(2 * y + 2 * z - n + 1, n)


def simplification_check(n: int, y, z) -> VerificationReport:
    report = VerificationReport("simplification")
    for r in range(n + 1):
        left = binom(2 * y, 2 * r) * binom(2 * y - r, n - r) * Fraction(factorial(2 * r), factorial(n))
        right = binom(2 * y, n) * binom(2 * y - r, r) * Fraction(factorial(r), factorial(n - r))
        report.add(f"y-factor r={r}", _agree(left, right))
        left = binom(2 * z + 1, 2 * (n - r)) * binom(2 * z - n + r, r) \
            * Fraction(factorial(2 * (n - r)), factorial(n))
        right = binom(2 * z, n) * _bracket(n, r, z) * Fraction(factorial(n - r), factorial(r))
        report.add(f"z-factor r={r}", _agree(left, right))
    s = 2 * y + 2 * z
    report.add("reflection", _agree(binom(2 * n - s - 2, n), (-1) ** n * binom(s - n + 1, n)))
    return report


def denominator_clearing_check(n: int, x) -> VerificationReport:
    """Cleared forms of the reciprocal-binomial and doubled-argument identities."""
    report = VerificationReport("denominators")
    for r in range(n + 1):
        left = binom(x, n) * factorial(n)
        right = binom(x, r) * binom(x - r, n - r) * factorial(r) * factorial(n - r)
        report.add(f"reciprocal r={r}", _agree(left, right))
    for j in range(n // 2 + 1):
        left = binom(2 * x, 2 * j) * factorial(2 * j)
        right = binom(x - HALF, j) * binom(x, j) * factorial(j) ** 2 * 4 ** j
        report.add(f"doubling j={j}", _agree(left, right))
    return report


def zagier_check(n: int, a: Any, y: Any, z: Any) -> VerificationReport:
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    a, y, z = _exact(a), _exact(y), _exact(z)
    report = VerificationReport("zagier", metadata={"n": n, "a": str(a), "y": str(y), "z": str(z)})
    p_value, q_value = zagier_P(n, y, z, a), zagier_Q(n, y, z, a)
    report.add(f"P_{n} = Q_{n}", _agree(p_value, q_value), f"{_digest(p_value)} vs {_digest(q_value)}")
    for value in (y, z):
        report.extend(denominator_clearing_check(n, value))
    if a == HALF:
        lhs, rhs = half_weight_sides(n, y, z)
        report.add("a=1/2 cleared form", _agree(lhs, rhs), f"{_digest(lhs)} vs {_digest(rhs)}")
        lhs, rhs = reduced_half_weight_sides(n, y, z)
        report.add("a=1/2 reduced form", _agree(lhs, rhs), f"{_digest(lhs)} vs {_digest(rhs)}")
        report.extend(simplification_check(n, y, z))
    return report


# S-sums

def s0(n: int, a, b):
    if n < 0:
        return Fraction(0)
    return sum((binom(k + a, n - k) * binom(n - k + b, k) for k in range(n + 1)), Fraction(0))


def s_sum(n: int, x):
    if n < 0:
        return Fraction(0)
    return sum((binom(x + n - 1 - 2 * p, n - 2 * p) for p in range(n // 2 + 1)), Fraction(0))


def s_closed(n: int, x):
    """Alternating form of S(n; X)."""
    if n < 0:
        return Fraction(0)
    return sum(((-1) ** j * binom(x + n - j, n - j) for j in range(n + 1)), Fraction(0))


@dataclass
class SSumBundle:
    values: Dict[str, Any] = field(default_factory=dict)
    report: VerificationReport = field(default_factory=lambda: VerificationReport("s_sums"))


def s_sums(n: int, A: Any = None, B: Any = None, X: Any = None, y: Any = None, z: Any = None) -> SSumBundle:
    """Evaluate S0 and S at whatever arguments are given and check every relation between them."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    bundle = SSumBundle()
    values, report = bundle.values, bundle.report
    report.metadata["n"] = n
    if A is not None and B is not None:
        A, B = _exact(A), _exact(B)
        values["S0"] = s0(n, A, B)
        values["S(A+B)"] = s_sum(n, A + B)
        report.add("S0 = S", _agree(values["S0"], values["S(A+B)"]),
                   f"{_digest(values['S0'])} vs {_digest(values['S(A+B)'])}")
        report.add("S0 shift in A", _agree(s0(n + 1, A, B), s0(n, A - 1, B + 1) + s0(n + 1, A - 1, B)))
        report.add("S0 shift in B", _agree(s0(n + 1, A, B), s0(n, A + 1, B - 1) + s0(n + 1, A, B - 1)))
    if X is not None:
        X = _exact(X)
        values["S"] = s_sum(n, X)
        report.add("S recurrence", _agree(s_sum(n + 1, X), s_sum(n + 1, X - 1) + s_sum(n, X)))
        report.add("S closed form", _agree(values["S"], s_closed(n, X)))
        lhs = s_sum(n, X - 1) + 2 * s_sum(n - 1, X)
        report.add("S(n;X-1) + 2S(n-1;X)", _agree(lhs, binom(X + n, n)), f"{_digest(lhs)}")
    if y is not None and z is not None:
        y, z = _exact(y), _exact(z)
        lhs, rhs = reduced_half_weight_sides(n, y, z)
        via_s0 = s0(n, 2 * z - n, 2 * y - n) + 2 * s0(n - 1, 2 * z - n, 2 * y - n + 1)
        via_s = s_sum(n, 2 * y + 2 * z - 2 * n) + 2 * s_sum(n - 1, 2 * y + 2 * z - 2 * n + 1)
        values["resummed"] = lhs
        report.add("resummation into S0", _agree(lhs, via_s0))
        report.add("S0 to S", _agree(via_s0, via_s))
        report.add("resummed closed form", _agree(via_s, rhs), f"{_digest(via_s)} vs {_digest(rhs)}")
    return bundle


# Triple identity

def triple_sides(l1: int, l2: int, l3: int, x, y=None, z=None) -> Tuple[Any, Any]:
    """Both triple sums; y and z default to x, the scalar Euler-operator reading."""
    x = _exact(x)
    y = x if y is None else _exact(y)
    z = x if z is None else _exact(z)
    lhs = rhs = Fraction(0)
    for r, s, t in itertools.product(range(l1 + 1), range(l2 + 1), range(l3 + 1)):
        sign = (-1) ** (l1 + l2 - s)
        outer = binom(x + l1 + s + l3 - t - 1, l3 - t) * binom(z + l1 - r + l2 - s + l3 - 1, l1 - r)
        lhs += sign * outer * (binom(x + r + s - 1, s)
                               * binom(y + l2 + r + t - 1, t) * binom(y + r + s - 1, r)
                               * binom(z + l3 + l2 - s - 1, l2 - s))
        rhs += sign * outer * (binom(x + l1 + s - 1, s)
                               * binom(y + l2 - s + t - 1, t) * binom(y + l2 + t + r - 1, r)
                               * binom(z + t + l2 - s - 1, l2 - s))
    return lhs, rhs


def triple_identity_check(l1: int, l2: int, l3: int, E: Any,
                          weights: Optional[Tuple[Any, Any, Any]] = None) -> VerificationReport:
    if min(l1, l2, l3) < 0:
        raise ValueError(f"Indices must be non-negative, got {(l1, l2, l3)}")
    report = VerificationReport("triple", metadata={"l": [l1, l2, l3], "E": str(E)})
    lhs, rhs = triple_sides(l1, l2, l3, E)
    detail = f"{_digest(lhs)} vs {_digest(rhs)}"
    if not _agree(lhs, rhs):
        detail += " (interpretation mismatch under the scalar Euler-operator reading)"
    report.add(f"l={l1},{l2},{l3}", _agree(lhs, rhs), detail)
    if weights is not None:
        lhs, rhs = triple_sides(l1, l2, l3, *weights)
        label = f"separate weights l={l1},{l2},{l3}"
        if _agree(lhs, rhs):
            report.note(label, "agree", weights=[str(w) for w in weights])
        else:
            report.discrepancy(label, f"{_digest(lhs)} vs {_digest(rhs)}", weights=[str(w) for w in weights])
    return report


# Symbolic verification

def symbolic_check(identity: str, n: int) -> VerificationReport:
    """Expand both sides as polynomials over Q in the free variables."""
    report = VerificationReport(f"{identity} symbolic", metadata={"n": n})
    if identity == "assoc":
        k2, l2, m2 = sympy.symbols("k2 l2 m2")
        for p in range(n + 1):
            lhs, rhs = assoc_binomial_sides(n, p, k2, l2, m2)
            common = assoc_t_sum(n, p, k2, l2, m2)
            report.add(f"n={n} p={p}", _agree(lhs, rhs) and _agree(rhs, common))
    elif identity == "zagier":
        y, z, a = sympy.symbols("y z a")
        report.add(f"P_{n} = Q_{n}", _agree(zagier_P(n, y, z, a), zagier_Q(n, y, z, a)))
        report.add("a=1/2 cleared form", _agree(*half_weight_sides(n, y, z)))
    elif identity == "s_sums":
        A, B, X = sympy.symbols("A B X")
        report.add("S0 = S", _agree(s0(n, A, B), s_sum(n, A + B)))
        report.add("S closed form", _agree(s_sum(n, X), s_closed(n, X)))
    elif identity == "triple":
        E, X, Y, Z = sympy.symbols("E X Y Z")
        report.add(f"l={n},{n},{n}", _agree(*triple_sides(n, n, n, E)))
        lhs, rhs = triple_sides(n, n, n, X, Y, Z)
        if _agree(lhs, rhs):
            report.note("separate weights", "agree")
        else:
            report.discrepancy("separate weights", "sides differ as polynomials in X, Y, Z")
    else:
        raise ValueError(f"Unknown identity '{identity}'. Choose from: {', '.join(IDENTITIES)}")
    return report


# Grid runner

def degree_bounds(identity: str, n: int) -> Dict[str, int]:
    """Per-variable degree of both sides at index n."""
    if identity == "assoc":
        return {"k2": n, "l2": n, "m2": n}
    if identity == "zagier":
        return {"a": n, "y": 2 * n, "z": 2 * n}
    if identity == "s_sums":
        return {"A": n + 1, "B": n + 1, "X": n + 1, "y": n, "z": n}
    if identity == "triple":
        return {"E": 3 * n, "X": 3 * n, "Y": 3 * n, "Z": 3 * n}
    raise ValueError(f"Unknown identity '{identity}'. Choose from: {', '.join(IDENTITIES)}")


def _check_point(identity: str, n: int, point: RationalPoint) -> VerificationReport:
    values = point.as_dict()
    if identity == "assoc":
        return assoc_identity_check(n, point)
    if identity == "zagier":
        return zagier_check(n, values["a"], values["y"], values["z"])
    if identity == "s_sums":
        return s_sums(n, **values).report
    # for the triple identity n bounds each index
    report = VerificationReport("triple")
    weights = tuple(values[k] for k in ("X", "Y", "Z")) if {"X", "Y", "Z"} <= set(values) else None
    for l1, l2, l3 in itertools.product(range(n + 1), repeat=3):
        if max(l1, l2, l3) == n:
            report.extend(triple_identity_check(l1, l2, l3, values["E"], weights))
    return report


def _run_task(task: Tuple[str, int, RationalPoint]) -> Tuple[int, Tuple, Dict[str, Any]]:
    identity, n, point = task
    report = _check_point(identity, n, point)
    return n, point.sort_key(), {
        "label": point.label(),
        "passed": report.passed,
        "failures": [e.name for e in report.failures],
        "excluded": [e.name for e in report.entries if e.data.get("excluded")],
        "discrepancies": [e.name for e in report.discrepancies],
    }


REQUIRED_VARIABLES = {
    "assoc": ("k2", "l2", "m2"),
    "zagier": ("a", "y", "z"),
    "s_sums": (),
    "triple": ("E",),
}


def grid_points(grid: Dict[str, Iterable[Any]]) -> List[RationalPoint]:
    names = sorted(grid)
    axes = [sorted({to_rational(v) for v in grid[name]}) for name in names]
    points = [RationalPoint(tuple(zip(names, combo))) for combo in itertools.product(*axes)]
    return sorted(points, key=RationalPoint.sort_key)


def run_identity_grid(identity: str, n_max: int, grid: Dict[str, Iterable[Any]], jobs: int = 1,
                      log: Optional[Callable[[str], None]] = None,
                      fixed: Optional[Dict[str, Any]] = None) -> VerificationReport:
    """
    Check an identity at every grid point for n = 0..n_max; results merge in point order.

    `fixed` pins variables to one value each. They join every point but take no part in the
    degree-bound count, so the identity is established only for that specialisation.
    """
    if identity not in IDENTITIES:
        raise ValueError(f"Unknown identity '{identity}'. Choose from: {', '.join(IDENTITIES)}")
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    if jobs < 1:
        raise ValueError(f"jobs must be at least 1, got {jobs}")
    fixed = {name: to_rational(value) for name, value in (fixed or {}).items()}
    overlap = sorted(set(fixed) & set(grid))
    if overlap:
        raise ValueError(f"Variables both fixed and gridded: {', '.join(overlap)}")
    missing = [name for name in REQUIRED_VARIABLES[identity] if name not in grid and name not in fixed]
    if missing or not grid:
        raise ValueError(f"Grid for '{identity}' is missing variables: {', '.join(missing) or 'all'}")
    log = log or (lambda message: None)
    points = grid_points({**grid, **{name: [value] for name, value in fixed.items()}})
    sizes = {name: len(set(to_rational(v) for v in values)) for name, values in grid.items()}
    report = VerificationReport(f"appendix {identity}", metadata={
        "identity": identity, "n_max": n_max, "points": len(points),
        "fixed": {name: str(value) for name, value in fixed.items()}})

    established = True
    for n in range(n_max + 1):
        bounds = degree_bounds(identity, n)
        sufficient = {name: sizes[name] > bounds.get(name, 0) for name in sizes}
        established = established and all(sufficient.values())
        report.note(f"degree bound n={n}", "grid exceeds bound" if all(sufficient.values())
                    else "grid below bound, numerical evidence only",
                    bounds={k: bounds.get(k, 0) for k in sizes}, sizes=sizes)
    report.metadata["polynomial_identity_established"] = established

    tasks = [(identity, n, point) for n in range(n_max + 1) for point in points]
    if jobs == 1:
        results = list(map(_run_task, tasks))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    results.sort(key=lambda item: (item[0], item[1]))

    for n in range(n_max + 1):
        rows = [row for m, _, row in results if m == n]
        failed = [row["label"] for row in rows if not row["passed"]]
        excluded = [row["label"] for row in rows if row["excluded"]]
        report.add(f"{identity} n={n}", not failed,
                   f"{len(rows) - len(failed)}/{len(rows)} points agree", failed=failed, excluded=excluded)
        for row in rows:
            for name in row["discrepancies"]:
                report.discrepancy(f"{identity} n={n} {row['label']}", name)
        log(f"📊 {identity} n={n}: {'ok' if not failed else f'{len(failed)} failing points'}")
    return report
