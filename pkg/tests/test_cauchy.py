from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from padic_arc.cauchy import (
    Hole,
    HoleyDomain,
    LargeHolePresent,
    NotClosedDiscHolomorphic,
    ZOnArc,
    ZOutsideDStar,
    cauchy_coefficients,
    cauchy_eval_disc,
    cauchy_formula_holes,
    cauchy_one_large_hole,
    choose_a0,
    det_D,
    goursat_large,
    goursat_small,
    max_modulus_check,
    residue_krasner,
    UnitDeterminantViolated,
)
from padic_arc.exact_oracle import parse_rational_function
from padic_arc.integrator import GeometryViolation, integrate_rational_closed_form
from padic_arc.padic_core import PadicContext, omega_power, teichmuller
from padic_arc.series import Arc, from_rational

C5 = PadicContext(5)
C7 = PadicContext(7)


def _small_domain(ctx):
    p = ctx.p
    return HoleyDomain(ctx(0), 0, ctx(1), (
        Hole(ctx(p), 1, 1, ctx(2 * p)),
        Hole(ctx(2), 1, 1, ctx(2 + p)),
    ))


def test_domain_validation():
    with pytest.raises(GeometryViolation):
        HoleyDomain(C5(0), 0, C5(5))
    with pytest.raises(GeometryViolation):
        HoleyDomain(C5(0), 0, C5(1), (Hole(C5(6), 1, 1, C5(11)),))
    with pytest.raises(GeometryViolation):
        HoleyDomain(C5(0), 0, C5(1), (Hole(C5(5), 1, 1, C5(10)), Hole(C5(0), 0, 0, C5(2))))
    dom = _small_domain(C5)
    assert dom.hole_of(C5(30)) == 0 and dom.hole_of(C5(3)) is None


def test_residue_theorem_and_goursat_small_holes():
    dom = _small_domain(C5)
    f = parse_rational_function("1/(x-5) + 3/(x-2) + 7/(x-1/5) + x^2")
    F = from_rational(f, dom.arc)
    closed = integrate_rational_closed_form(f, dom.arc)
    assert residue_krasner(F, dom).agreement(closed) >= C5.N
    gw = goursat_small(F, dom)
    assert gw.agreement >= C5.N
    assert gw.mu[0] == C5.one()


def test_large_hole_rejected_by_small_hole_formulas():
    dom = HoleyDomain(C5(-1), 0, C5(1), (Hole(C5(0), 0, 0, C5(2)),))
    F = from_rational(parse_rational_function("1/x"), dom.arc)
    with pytest.raises(LargeHolePresent):
        residue_krasner(F, dom)
    with pytest.raises(LargeHolePresent):
        goursat_small(F, dom)
    assert goursat_large(F, dom).agreement >= C5.N


def test_cauchy_eval_disc_recovers_values_and_derivatives():
    arc = Arc.of(C5, 0, 1)
    f = parse_rational_function("x^3 - 2x + 1/3")
    F = from_rational(f, arc)
    for z in (Fraction(0), Fraction(3), Fraction(13, 7)):
        for method in ("residue", "limit"):
            v = cauchy_eval_disc(F, arc, C5(z), 0, 0, method=method)
            assert v.agreement(C5(f(z))) >= 12
        d = cauchy_eval_disc(F, arc, C5(z), 0, 1)
        assert d == C5(3 * z * z - 2)
    with pytest.raises(ZOnArc):
        cauchy_eval_disc(F, arc, C5(6), 0, 0)
    G = from_rational(parse_rational_function("1/(x-3)"), arc)
    with pytest.raises(NotClosedDiscHolomorphic):
        cauchy_eval_disc(G, arc, C5(0))


def test_cauchy_with_holes_and_dstar():
    ctx = PadicContext(5, 40)
    dom = HoleyDomain(ctx(-1), 0, ctx(1), (Hole(ctx(0), 0, 0, ctx(2)),))
    i = teichmuller(ctx(2))
    mu = cauchy_coefficients(dom, ctx(-1))
    assert mu[0].agreement(ctx(2)) >= 38 and mu[1].agreement(-(1 - i)) >= 38
    f = parse_rational_function("x^2 + 1/x + 2/(x-1/5)")
    F = from_rational(f, Arc.of(ctx, 3, 1))
    for z in (4, 9, Fraction(3, 2)):
        assert cauchy_formula_holes(F, dom, ctx(z), 0, ctx(-1)).agreement(ctx(f(Fraction(z)))) >= 38
    with pytest.raises(ZOutsideDStar):
        cauchy_formula_holes(F, dom, ctx(3), 0, ctx(-1))


def test_one_large_hole_and_a0_choice():
    ctx = PadicContext(5, 40)
    f = parse_rational_function("x^2 + 1/x")
    F = from_rational(f, Arc.of(ctx, 3, 1))
    val, info = cauchy_one_large_hole(F, ctx(-1), ctx(0), ctx(1), ctx(4))
    assert val.agreement(ctx(f(Fraction(4)))) >= 36
    assert info["D"].valuation >= 1
    # p = 7: x0 chosen so that omega((x1 - x0)/(x1 - b)) is a primitive sixth root
    c7 = PadicContext(7, 30)
    zeta = teichmuller(c7(3))
    x1, b = c7(0), c7(1)
    x0 = x1 - (x1 - b) * zeta
    assert omega_power((x1 - x0) / (x1 - b), 0) == zeta
    a0 = choose_a0(x0, x1, b)
    assert not (a0 - x0).is_zero()
    assert choose_a0(c7(2), x1, b) == c7(2)


def test_det_examples():
    assert det_D([C5(0), C5(1)], [C5(2), C5(3)]).valuation == 0
    with pytest.raises(GeometryViolation):
        det_D([C5(0), C5(5)], [C5(2), C5(3)])
    with pytest.raises(ValueError):
        det_D([], [])
    assert issubclass(UnitDeterminantViolated, ArithmeticError)


@given(st.permutations(range(7)), st.integers(1, 3), st.lists(st.integers(-20, 20), min_size=6, max_size=6),
       st.integers(0, 2))
def test_det_is_unit_for_distinct_residues(perm, n, lifts, alpha):
    res = [perm[i] + 7 * lifts[i] for i in range(2 * n)]
    pts = [C7(r) for r in res]
    d = det_D(pts[:n], pts[n:], alpha)
    assert not d.is_zero() and d.valuation == 0


def test_max_modulus():
    a = C5(0)
    f = from_rational(parse_rational_function("x^3/25 + 1/(x-1/5)"), Arc.of(C5, 0, 1))
    out = max_modulus_check(f, a, 0, [C5(1), C5(2), C5(13)])
    assert out["equal"] and out["disc"] == -2
    with pytest.raises(GeometryViolation):
        max_modulus_check(f, a, 0, [C5(Fraction(1, 5))])
    g = from_rational(parse_rational_function("1/(x-3)"), Arc.of(C5, 0, 1))
    with pytest.raises(NotClosedDiscHolomorphic):
        max_modulus_check(g, a, 0, [C5(1)])
