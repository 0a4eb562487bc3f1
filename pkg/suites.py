"""
Verification suites behind `udf verify <suite>` and `--paper-check`.

Each suite returns a VerificationReport; failures are entries. run_suite turns engine errors
into a failed entry too, so only bad arguments escape as exceptions.
"""

import random
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

from eholzer_comb import IDENTITIES, ExcludedPointError, run_identity_grid, symbolic_check
from exact_scalars import NonInvertibleScalarError
from exporter import VerificationReport
from h1_hopf import (
    H1Element, H1Tensor, RankMismatchError, antipode, antipode_monomial, coproduct, coproduct_leg, counit,
    element_from_ints, legs_product, pbw_monomials,
)
from jet_model import (
    CrossedElement, JetPoly, act, cross_multiply, delta2_prime, faithfulness_rank, jet_of_product,
    make_word, word_inverse, word_text,
)
from udf_engine import (
    ExtractionError, StarConsistencyError, TwistError, UDFEngine, calibrate_moyal_sign, first_order_R,
    second_order_R,
)
from weyl_fedosov import (
    SECTION_KINDS, CoeffExpr, FedosovConvergenceError, MoyalProduct, SectionContext, WeylSection,
    build_section, connection_apply, degree_section, delta_form, family_for, family_residual, fedosov_iterate,
    flat_associator, residual_window, solve_recursion, valuation_bound_holds,
)

SUITES = ["hopf", "jet", "fedosov", "udf", "twist", "appendix", "all"]
Log = Optional[Callable[[str], None]]

A = make_word("a")
B = make_word("b")
RANDOM_WORDS = ["a", "b", "a b", "b^-1", "id"]


def _quiet(log: Log) -> Callable[[str], None]:
    return log or (lambda message: None)


def _random_element(rng: random.Random, max_degree: int = 2, terms: int = 3) -> H1Element:
    basis = pbw_monomials(max_degree)
    total = H1Element()
    for _ in range(terms):
        total = total + H1Element.monomial(rng.choice(basis), rng.randint(-3, 3))
    return total


def _random_crossed(rng: random.Random) -> CrossedElement:
    poly = JetPoly.function(rng.choice("fgh"), rng.randint(0, 1), rng.randint(0, 1))
    return CrossedElement.single(poly, make_word(rng.choice(RANDOM_WORDS)))


def hopf_suite(degree: int = 4, log: Log = None) -> VerificationReport:
    log = _quiet(log)
    log("📊 Hopf algebra relations and axioms")
    report = VerificationReport("hopf", metadata={"degree": degree})
    rng = random.Random(4)
    X, Y, D1 = H1Element.X(), H1Element.Y(), H1Element.delta(1)

    report.add("[Y,X] = X", Y * X - X * Y == X)
    report.add("[X,δ₁] = δ₂", X * D1 - D1 * X == H1Element.delta(2))
    report.add("Δ(X)", coproduct(X) == (H1Tensor.from_elements(X, H1Element.one())
                                         + H1Tensor.from_elements(H1Element.one(), X)
                                         + H1Tensor.from_elements(D1, Y)))
    report.add("S(X) = −X + δ₁Y", antipode(X) == -X + D1 * Y)

    triples_ok = True
    for _ in range(10):
        a, b, c = (_random_element(rng) for _ in range(3))
        triples_ok = triples_ok and (a * b) * c == a * (b * c)
    report.add("associativity on random triples", triples_ok)

    coassoc = [m for m in pbw_monomials(min(degree + 1, 5))
               if coproduct_leg(coproduct(H1Element.monomial(m)), 1)
               != coproduct_leg(coproduct(H1Element.monomial(m)), 2)]
    report.add("coassociativity", not coassoc, ", ".join(str(m) for m in coassoc))

    bad = []
    for m in pbw_monomials(min(degree, 4)):
        a = H1Element.monomial(m)
        t = coproduct(a)
        expected = H1Element.scalar(counit(a))
        right = H1Element()
        for (left, r), c in t.items():
            right = right + H1Element.monomial(left, c) * element_from_ints(antipode_monomial(r))
        if legs_product(t, antipode_monomial) != expected or right != expected:
            bad.append(str(m))
    report.add("antipode axioms", not bad, ", ".join(bad))

    maps_ok = anti_ok = True
    for _ in range(10):
        a, b = _random_element(rng), _random_element(rng)
        maps_ok = maps_ok and coproduct(a * b) == coproduct(a) * coproduct(b) \
            and counit(a * b) == counit(a) * counit(b)
        anti_ok = anti_ok and antipode(a * b) == antipode(b) * antipode(a)
    report.add("Δ and ε are algebra maps", maps_ok)
    report.add("S is an anti-homomorphism", anti_ok)
    return report


def jet_suite(degree: int = 3, log: Log = None) -> VerificationReport:
    log = _quiet(log)
    log("📊 Jet model action")
    report = VerificationReport("jet", metadata={"degree": degree})
    rng = random.Random(11)
    samples = [
        CrossedElement.single(JetPoly.function("f"), A),
        CrossedElement.single(JetPoly.function("g", prefix=A), B),
        CrossedElement.single(JetPoly.function("f", 1, 1) * JetPoly.jet("b", 2), make_word("a^-1 b")),
    ]
    basis = pbw_monomials(min(degree + 1, 4))
    representation = True
    for _ in range(12):
        h1, h2 = H1Element.monomial(rng.choice(basis)), H1Element.monomial(rng.choice(basis))
        representation = representation and all(act(h1 * h2, e) == act(h1, act(h2, e)) for e in samples)
    report.add("action is a representation", representation)

    a = CrossedElement.single(JetPoly.function("f"), A)
    b = CrossedElement.single(JetPoly.function("g", 1, 0), B)
    leibniz = []
    for m in pbw_monomials(min(degree, 3)):
        h = H1Element.monomial(m)
        expected = CrossedElement()
        for (left, right), c in coproduct(h).items():
            expected = expected + cross_multiply(act(H1Element.monomial(left), a),
                                                 act(H1Element.monomial(right), b)) * c
        if act(h, cross_multiply(a, b)) != expected:
            leibniz.append(str(m))
    report.add("action is compatible with Δ", not leibniz, ", ".join(leibniz))

    cocycle = delta2_prime(A + B) - delta2_prime(A) - delta2_prime(B).prefixed(A)
    report.add("δ₂′ cocycle", cocycle.is_zero(), cocycle.text())
    for word in (A, B, make_word("a b")):
        w = word + word_inverse(word)
        vanish = all(jet_of_product(w, n).is_zero() for n in range(1, 5))
        report.add(f"jets of w·w⁻¹ vanish for w = {word_text(word)}", vanish)

    for d in range(min(degree, 3) + 1):
        outcome = faithfulness_rank(d)
        report.add(f"faithful at degree {d}", outcome["full_rank"],
                   f"rank {outcome['rank']} of {outcome['monomials']}")
    return report


def fedosov_suite(degree: int = 3, cutoff: int = 6, sign: int = 1, product_degree: Optional[int] = None,
                  log: Log = None) -> VerificationReport:
    """Closed forms = recursion = iteration for every family, plus connection properties."""
    log = _quiet(log)
    context = SectionContext()
    report = VerificationReport("fedosov", metadata={"degree": degree, "cutoff": cutoff, "sign": sign})
    columns = min(cutoff, 8)
    for kind in SECTION_KINDS:
        log(f"📊 {kind}: closed form, recursion, iteration")
        family = family_for(kind, context)
        recursion = solve_recursion(kind, context, cutoff, columns, sign)
        closed = build_section(kind, context, cutoff, columns, sign)
        report.add(f"{kind}: closed form = recursion", closed == recursion)

        residual = family_residual(family, recursion, sign).window(*residual_window(cutoff, columns))
        report.add(f"{kind}: solves its equation", residual.is_zero())

        left = delta_form(family.rho_left, sign) if family.rho_left else None
        right = delta_form(family.rho_right, sign) if family.rho_right else None
        iterated = fedosov_iterate(left, right, degree, sign, seed=family.seed)
        deep = solve_recursion(kind, context, 3 * degree, degree, sign).truncate(degree=degree)
        report.add(f"{kind}: iteration = recursion to degree {degree}", iterated == deep)

        if sign == 1:
            printed = build_section(kind, context, cutoff, columns, sign, variant="printed")
            if printed == closed:
                report.note(f"{kind}: displayed closed form agrees")
            else:
                differing = sorted(idx for idx in {i for i, _ in printed.items()} | {i for i, _ in closed.items()}
                                   if printed.coefficient(*idx) != closed.coefficient(*idx))
                report.discrepancy(f"{kind}: displayed closed form differs",
                                   f"first differing coefficient u^{differing[0][0]}v^{differing[0][1]}",
                                   indices=[list(i) for i in differing[:10]])
        if kind in ("u_alpha_inv", "v_alphabeta", "u_alpha_beta"):
            deep_rows = solve_recursion(kind, context, 3 * cutoff // 2, 2, sign)
            report.add(f"{kind}: ħ-valuation ≥ −⌊m/3⌋", valuation_bound_holds(deep_rows))

    f = JetPoly.function("f")
    sample = (WeylSection.monomial(2, 1, CoeffExpr.of(f, 1))
              + WeylSection.monomial(0, 3, CoeffExpr.of(JetPoly.function("g", 1, 0), -2)))
    report.add("D² = 0", connection_apply("D", connection_apply("D", sample, sign=sign), sign=sign).is_zero())
    rho = delta2_prime(A)
    twisted = connection_apply("alpha_D", sample, sign=sign, rho=rho)
    report.add("α(D)² = 0", connection_apply("alpha_D", twisted, sign=sign, rho=rho).is_zero())

    top = min(degree, 4) if product_degree is None else product_degree
    log(f"📊 unit laws and flat associator to degree {top}")
    star = MoyalProduct(sign)
    inverse = degree_section("u_alpha_inv", context, top, sign)
    unit = degree_section("u_alpha", context, top, sign)
    report.add(f"U_α⁻¹∘U_α = 1 to degree {top}", star.product(inverse, unit, degree=top) == WeylSection.one())
    report.add(f"U_α∘U_α⁻¹ = 1 to degree {top}", star.product(unit, inverse, degree=top) == WeylSection.one())
    transported = degree_section("u_alpha_beta", SectionContext(beta=word_inverse(context.alpha)), top, sign)
    report.add(f"α(U⁻¹_(α⁻¹)) = U_α to degree {top}", transported == unit)
    if top >= 1:
        flatness = connection_apply("D", flat_associator(context, top, sign), sign=sign).truncate(degree=top - 1)
        report.add(f"D(v_α,β) = 0 to degree {top - 1}", flatness.is_zero())
    report.metadata["product_degree"] = top
    return report


def udf_suite(order: int = 2, sign: int = 1, samples: Optional[int] = None,
              engine: Optional[UDFEngine] = None, log: Log = None) -> VerificationReport:
    log = _quiet(log)
    engine = engine or UDFEngine(sign, log)
    report = VerificationReport("udf", metadata={"order": order, "sign": sign})
    log(f"🚀 Extracting R to ħ^{order}")
    r_tensor = engine.extract_R(order)
    report.add("R at ħ⁰ is 1⊗1", r_tensor.order(0) == H1Tensor.unit(2))
    if order >= 1:
        report.add("R at ħ¹", r_tensor.order(1) == first_order_R(), r_tensor.order(1).text())
    if order >= 2:
        report.add("R at ħ²", r_tensor.order(2) == second_order_R())
    report.extend(engine.verify_udf(r_tensor))

    rng = random.Random(5)
    count = samples if samples is not None else (20 if order >= 3 else 5)
    agree = 0
    for _ in range(count):
        a, b = _random_crossed(rng), _random_crossed(rng)
        if engine.star_via_R(r_tensor, a, b, order) == engine.star_elements(a, b, order):
            agree += 1
    report.add("star through R = star", agree == count, f"{agree}/{count} pairs")

    g = CrossedElement.single(JetPoly.function("g"), B)
    f = CrossedElement.single(JetPoly.function("f"), A)
    one = CrossedElement.one()
    report.add("1 ⋆ gβ = gβ", engine.star_elements(one, g, order) == g)
    report.add("fα ⋆ 1 = fα", engine.star_elements(f, one, order) == f)

    triples = max(count // 2, 3)
    assoc = 0
    for _ in range(triples):
        a, b, c = (_random_crossed(rng) for _ in range(3))
        left = engine.star_elements(engine.star_elements(a, b, order), c, order)
        right = engine.star_elements(a, engine.star_elements(b, c, order), order)
        assoc += left == right
    report.add("star is associative", assoc == triples, f"{assoc}/{triples} triples")

    calibration = calibrate_moyal_sign()
    report.add("exactly one Moyal sign reproduces R at ħ¹", calibration["sign"] == 1,
               detail=str(calibration["matches"]))
    return report


def twist_suite(order: int = 2, sign: int = 1, engine: Optional[UDFEngine] = None,
                log: Log = None) -> VerificationReport:
    log = _quiet(log)
    engine = engine or UDFEngine(sign, log)
    log(f"📊 Twisting H1 by R to ħ^{order}")
    return engine.check_twist(engine.extract_R(order))


@dataclass(frozen=True)
class AppendixRun:
    """One grid sweep of an identity; `fixed` variables are pinned rather than swept."""
    label: str
    identity: str
    n_max: int
    grid: Dict[str, List[Any]]
    fixed: Dict[str, Any] = field(default_factory=dict)


# each swept variable takes more values than its degree at n_max
APPENDIX_RUNS: List[AppendixRun] = [
    AppendixRun("assoc", "assoc", 8, {"k2": list(range(1, 10)), "l2": list(range(1, 10)),
                                      "m2": list(range(2, 11))}),
    AppendixRun("zagier", "zagier", 8, {"a": ["1/2", 1, "3/2", 2, "5/2", 3, "7/2", 4, "9/2"],
                                        "y": list(range(1, 18)), "z": list(range(1, 18))}),
    AppendixRun("half_weight", "zagier", 16, {"y": list(range(1, 34)), "z": list(range(1, 34))},
                fixed={"a": "1/2"}),
    AppendixRun("s_lemma", "s_sums", 30, {"A": list(range(0, 32)), "B": list(range(1, 33))}),
    AppendixRun("s_recurrence", "s_sums", 30, {"X": list(range(-2, 30))}),
    AppendixRun("s_resummation", "s_sums", 16, {"y": list(range(0, 17)), "z": list(range(0, 17))}),
    AppendixRun("triple", "triple", 3, {"E": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, "1/2", "7/3"]}),
]


def appendix_suite(identities: Optional[List[str]] = None, n_max: Optional[int] = None,
                   grid: Optional[Dict[str, List[Any]]] = None, jobs: int = 1, symbolic_n: int = 2,
                   log: Log = None) -> VerificationReport:
    """
    Sweep the appendix identities. Each run goes to its own n_max unless `n_max` lowers it;
    an explicit `grid` replaces the stock runs with one sweep per identity.
    """
    log = _quiet(log)
    chosen = identities or IDENTITIES
    if grid is not None:
        runs = [AppendixRun(identity, identity, 4 if n_max is None else n_max, grid) for identity in chosen]
    else:
        runs = [run for run in APPENDIX_RUNS if run.identity in chosen]
    report = VerificationReport("appendix", metadata={"n_max": n_max})
    for run in runs:
        bound = run.n_max if n_max is None else min(n_max, run.n_max)
        log(f"📊 {run.label} ({run.identity}) up to n={bound}")
        sub = run_identity_grid(run.identity, bound, run.grid, jobs, log, fixed=run.fixed)
        report.extend(sub)
        report.metadata[f"{run.label}_established"] = sub.metadata["polynomial_identity_established"]
    for identity in chosen:
        for n in range(symbolic_n + 1):
            report.extend(symbolic_check(identity, n))
    return report


# internal failures of the engine, as opposed to bad arguments
ENGINE_ERRORS = (NonInvertibleScalarError, RankMismatchError, FedosovConvergenceError, StarConsistencyError,
                 ExtractionError, TwistError, ExcludedPointError)


def run_suite(name: str, order: int = 2, degree: int = 3, n_max: Optional[int] = None, sign: int = 1, jobs: int = 1,
              grid: Optional[Dict[str, Any]] = None, identities: Optional[List[str]] = None,
              log: Log = None) -> VerificationReport:
    """Run one suite by name. Engine errors come back as a failed entry; bad arguments still raise."""
    if name not in SUITES:
        raise ValueError(f"Unknown suite '{name}'. Choose from: {', '.join(SUITES)}")
    unknown = [identity for identity in identities or [] if identity not in IDENTITIES]
    if unknown:
        raise ValueError(f"Unknown identity '{unknown[0]}'. Choose from: {', '.join(IDENTITIES)}")
    try:
        return _dispatch(name, order, degree, n_max, sign, jobs, grid, identities, log)
    except ENGINE_ERRORS as e:
        report = VerificationReport(name)
        report.add(f"{name} suite aborted", False, f"{type(e).__name__}: {e}")
        return report


def _dispatch(name: str, order: int, degree: int, n_max: Optional[int], sign: int, jobs: int,
              grid: Optional[Dict[str, Any]], identities: Optional[List[str]], log: Log) -> VerificationReport:
    if name == "hopf":
        return hopf_suite(degree + 1, log)
    if name == "jet":
        return jet_suite(degree, log)
    if name == "fedosov":
        return fedosov_suite(degree, max(2 * degree, 8), sign, log=log)
    if name == "udf":
        return udf_suite(order, sign, log=log)
    if name == "twist":
        return twist_suite(order, sign, log=log)
    if name == "appendix":
        if grid is not None:
            identity = grid.get("identity")
            if identity not in IDENTITIES:
                raise ValueError(f"Grid spec names unknown identity '{identity}'")
            return appendix_suite([identity], int(grid.get("n_max", n_max or 4)), grid.get("grid"), jobs, log=log)
        return appendix_suite(identities, n_max=n_max, jobs=jobs, log=log)
    report = VerificationReport("all")
    engine = UDFEngine(sign, log)
    for sub in (hopf_suite(degree + 1, log), jet_suite(degree, log),
                fedosov_suite(degree, max(2 * degree, 8), sign, log=log),
                udf_suite(order, sign, engine=engine, log=log),
                twist_suite(order, sign, engine=engine, log=log),
                appendix_suite(identities, n_max=n_max, jobs=jobs, log=log)):
        report.extend(sub)
    return report


def acceptance_check(order: int = 3, jobs: int = 1, log: Log = None) -> VerificationReport:
    """The acceptance checklist, one summary entry per headline result."""
    log = _quiet(log)
    report = VerificationReport("acceptance-check", metadata={"order": order})
    engine = UDFEngine(1, log)
    r_tensor = engine.extract_R(order)

    report.add("R starts with 1⊗1", r_tensor.order(0) == H1Tensor.unit(2))
    report.add("ħ¹ component (−iħ/2)(S(X)⊗Y + Y⊗X)", r_tensor.order(1) == first_order_R())
    report.add("ħ² component, six terms", r_tensor.order(2) == second_order_R())
    report.add("pentagon and counit identities", engine.verify_udf(r_tensor).passed)

    udf = udf_suite(order, 1, engine=engine, log=log)
    for name in ("star through R = star", "star is associative", "1 ⋆ gβ = gβ", "fα ⋆ 1 = fα",
                 "exactly one Moyal sign reproduces R at ħ¹"):
        entry = next(e for e in udf.entries if e.name == name)
        report.add(name, entry.status == "pass", entry.detail)

    fedosov = fedosov_suite(8, 8, 1, product_degree=4, log=log)
    report.add("closed forms, recursions and iteration agree", fedosov.passed)
    for entry in fedosov.discrepancies:
        report.discrepancy(entry.name, entry.detail)

    appendix = appendix_suite(jobs=jobs, log=log)
    report.add("appendix identities", appendix.passed)
    report.metadata["appendix_established"] = {
        key: value for key, value in appendix.metadata.items() if key.endswith("_established")}
    return report
