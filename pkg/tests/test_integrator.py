from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from padic_arc.exact_oracle import ExactRationalFunction, PoleOnSampleSet, Poly, direct_A, parse_rational_function
from padic_arc.integrator import (
    BasepointInHole,
    BetaTooLarge,
    CertificateRequired,
    ClassInconsistency,
    EvalStrategy,
    GeometryViolation,
    NoConvergence,
    NotAnAutomorphism,
    UnsupportedOrder,
    arc_weight,
    check_substitution_invariance,
    delta_coefficients,
    eval_A,
    integrate_limit,
    integrate_rational_closed_form,
    integrate_via_raylimits,
    paper_nk,
    ray_limits,
    residue_laurent,
    sufficiency_check,
    zp_count,
)
from padic_arc.padic_core import PadicContext, PrecisionExhausted, omega_power
from padic_arc.series import Arc, InterlockedFamily, PathSequence, PoleInArc, SeriesFunction, builtin, from_rational

C5 = PadicContext(5)
C3 = PadicContext(3)
IDENT = PathSequence.identity()


pole = st.builds(Fraction, st.integers(-30, 30), st.sampled_from([1, 2, 3, 5, 25]))
residue = st.builds(Fraction, st.integers(-6, 6).filter(bool), st.integers(1, 4))


@settings(max_examples=25)
@given(st.lists(st.tuples(pole, residue), min_size=1, max_size=2), st.sampled_from([1, 2]))
def test_closed_sum_and_series_match_exact_oracle(terms, k):
    arc = Arc.of(C5, 0, 1)
    f = ExactRationalFunction.from_poly(Poly([1]))
    for r, e in terms:
        f = f + ExactRationalFunction.simple_pole(r, 1, e)
    # a pole on the sample set or inside the arc is out of scope
    try:
        F = from_rational(f, arc)
        exact = C5(direct_A(f, 0, 1, k, 5))
    except (PoleInArc, PoleOnSampleSet):
        assume(False)
    for strat in (EvalStrategy.closed_sum(), EvalStrategy.full()):
        v = eval_A(F, arc, IDENT, k, strat)
        assert v.agreement(exact) >= v.precision >= 30


def test_A1_exact_value():
    # 1/(x - 3) over A(0, 1) at level 1: see the oracle module example
    f = parse_rational_function("1/(x-3)")
    arc = Arc.of(C5, 0, 1)
    exact = direct_A(f, 0, 1, 1, 5)
    v = eval_A(from_rational(f, arc), arc, IDENT, 1, EvalStrategy.closed_sum())
    assert v == C5(exact)


def test_linearity_in_f():
    arc = Arc.of(C5, 0, 1)
    F = from_rational(parse_rational_function("1/(x-3)"), arc)
    G = from_rational(parse_rational_function("x^2/(x+1/5)"), arc)
    c = C5(Fraction(7, 3))
    for k in (1, 2):
        lhs = eval_A(F + G.scale(c), arc, IDENT, k, EvalStrategy.full())
        rhs = eval_A(F, arc, IDENT, k, EvalStrategy.full()) + c * eval_A(G, arc, IDENT, k, EvalStrategy.full())
        assert lhs.agreement(rhs) >= 36


def test_strategies_agree_for_certified_series():
    arc = Arc.of(C5, 1, 0)
    F = builtin("binom_t", (Fraction(1, 2),), arc)
    for k in (1, 2):
        ref = eval_A(F, arc, IDENT, k, EvalStrategy.full())
        for strat in (EvalStrategy.truncated(), EvalStrategy.filtered()):
            try:
                v = eval_A(F, arc, IDENT, k, strat)
            except PrecisionExhausted:
                continue
            assert v.agreement(ref) >= min(v.precision, ref.precision)


def test_strategy_errors():
    arc = Arc.of(C5, 1, 0)
    bare = SeriesFunction(C5, C5(1), lambda n, c: c(1))
    with pytest.raises(CertificateRequired):
        eval_A(bare, arc, IDENT, 1, EvalStrategy.full())
    with pytest.raises(BetaTooLarge):
        eval_A(builtin("log1m", (), arc), arc, IDENT, 1, EvalStrategy.filtered())
    assert paper_nk(3, 5, Fraction(0)) >= 5**3


def test_polynomial_integrates_to_zero():
    arc = Arc.of(C5, 0, 1)
    F = from_rational(parse_rational_function("x^4 - 3x + 2"), arc)
    res = integrate_limit(F, arc, IDENT, 12)
    assert res.converged and res.value.is_zero()


def test_simple_pole_limit_matches_closed_form():
    arc = Arc.of(C5, 0, 1)
    f = parse_rational_function("1/(x-3)")
    res = integrate_limit(from_rational(f, arc), arc)
    exact = integrate_rational_closed_form(f, arc)
    assert res.converged and res.precision >= 12
    assert res.value.agreement(exact) >= res.precision


def test_boundary_pole_on_identity_path_does_not_converge_quickly():
    arc = Arc.of(C5, 0, 1)
    F = from_rational(parse_rational_function("1/(x-3)"), arc)
    with pytest.raises(NoConvergence) as info:
        integrate_limit(F, arc, IDENT, 12, k_max=6)
    assert info.value.result.precision < 12


def test_gap_series_does_not_converge():
    arc = Arc.of(C3, 1, 0)
    F = builtin("gap_series", (2,), arc)
    with pytest.raises(NoConvergence):
        integrate_limit(F, arc, IDENT, 12, k_max=4)


def test_arc_weight_cases():
    arc = Arc.of(C5, 0, 1)
    assert arc_weight(arc, C5(Fraction(1, 5))) == C5.zero()
    assert arc_weight(arc, C5(5)) == C5.one()
    w = arc_weight(arc, C5(3))
    assert w == C5.one() / (C5.one() - omega_power(C5(Fraction(-3, -1)), 0))


def test_closed_form_ignores_far_poles_and_counts_inner_ones():
    arc = Arc.of(C5, 0, 1)
    assert integrate_rational_closed_form(parse_rational_function("1/(x-1/5)"), arc).is_zero()
    assert integrate_rational_closed_form(parse_rational_function("2/(x-10)"), arc) == C5(2)


def test_residue_laurent():
    arc = Arc.of(C5, 3, 1)
    v = residue_laurent({-1: Fraction(2), 0: Fraction(5), 3: Fraction(1)}, C5(0), arc)
    assert v == integrate_rational_closed_form(parse_rational_function("2/x"), arc)
    with pytest.raises(GeometryViolation):
        residue_laurent({-1: 1}, C5(0), Arc.of(C5, 1, 6))


def test_zp_count():
    arc = Arc.of(C5, 0, 1)
    # a zero near the centre counts fully; one outside the disc counts zero
    assert zp_count([(C5(5), 2)], [(C5(Fraction(1, 5)), 1)], arc) == C5(2)
    f = parse_rational_function("(x-3)^2/(x-5)")
    lhs = integrate_rational_closed_form(parse_rational_function("2/(x-3) - 1/(x-5)"), arc)
    assert zp_count([(C5(3), 2)], [(C5(5), 1)], arc) == lhs
    with pytest.raises(BasepointInHole):
        zp_count([(C5(6), 1)], [], arc)
    assert f(Fraction(0)) == Fraction(-9, 5)


def test_ray_limits_and_reconstruction():
    # rays of 1/(x - 3) about 0 tend to -omega(3)^(-d), constant on d mod p - 1
    ctx = PadicContext(5, 30)
    arc = Arc.of(ctx, 1, 0)
    f = parse_rational_function("1/(x-3)")
    table = ray_limits(from_rational(f, arc), arc, IDENT, 8, 5)
    for d in range(1, 9):
        assert table[d].stabilized
        assert table.limit(d).agreement(-omega_power(ctx(3), 0) ** (-d)) >= table[d].trusted_precision
    via = integrate_via_raylimits(table, 4)
    assert via.agreement(integrate_rational_closed_form(f, arc)) >= table.uniform_residual
    with pytest.raises(UnsupportedOrder):
        delta_coefficients(3, 0, ctx)
    assert len(delta_coefficients(2, 0, ctx)) == 2


def test_ray_class_inconsistency_detected():
    # Artin-Hasse rays: d = 1 tends to 1 while d = 3 is identically 0
    arc = Arc.of(C5, 1, 0)
    table = ray_limits(builtin("artin_hasse_loderiv", (), arc), arc, IDENT, 4, 4)
    with pytest.raises(ClassInconsistency):
        integrate_via_raylimits(table, 2)


def test_sufficiency_report():
    arc = Arc.of(C5, 1, 0)
    rep = sufficiency_check(builtin("binom_t", (Fraction(1, 3),), arc), arc, IDENT, 2, 4)
    assert set(rep["per_d"]) == {1, 2}
    with pytest.raises(BetaTooLarge):
        sufficiency_check(builtin("log1m", (), arc), arc, IDENT, 2, 4)


def test_substitution_invariance():
    src, dst = Arc.of(C5, 1, 2), Arc.of(C5, 3, 8)
    f = parse_rational_function("1/(x-4) + 3/(x-1/5)")
    rep = check_substitution_invariance(f, dst, [Fraction(-2), Fraction(5)], src)
    assert rep["agreement"] >= 12
    with pytest.raises(NotAnAutomorphism):
        check_substitution_invariance(f, Arc.of(C5, 0, 1), [0, 0, 1], Arc.of(C5, 0, 1))
    with pytest.raises(GeometryViolation):
        check_substitution_invariance(f, Arc.of(C5, 3, 13), [Fraction(-2), Fraction(5)], src)
