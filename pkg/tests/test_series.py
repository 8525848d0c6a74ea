import threading
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from padic_arc.exact_oracle import ExactRationalFunction, Poly, parse_rational_function
from padic_arc.padic_core import PadicContext, valuation
from padic_arc.series import (
    Arc,
    BasepointOutsideArc,
    CenterMismatch,
    IncompatibleArc,
    InterlockedFamily,
    IrrationalPole,
    NoCertificate,
    PathSequence,
    PoleInArc,
    SeriesFunction,
    UnknownBuiltin,
    builtin,
    check_disc_automorphism,
    from_rational,
    log_p,
    parse_function_spec,
    rational_partial_fractions,
    recenter,
)

C5 = PadicContext(5)
small_q = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 7))


def test_arc_geometry():
    arc = Arc.of(C5, 0, 1)
    assert arc.radius_valuation == 0 and arc.R == 1
    assert arc.contains(C5(6)) and not arc.contains(C5(3))
    assert Arc.of(C5, 2, 7).R == Fraction(1, 5)
    with pytest.raises(ValueError):
        Arc.of(C5, 1, 1)


def test_path_sequences():
    assert [PathSequence.affine(2, 3)(k) for k in (1, 2, 3)] == [5, 8, 11]
    assert [PathSequence.power(0, 2)(k) for k in (1, 2, 3)] == [1, 4, 9]
    assert PathSequence.identity().nabla(4) == 1
    with pytest.raises(ValueError):
        PathSequence.explicit([1, 3, 2])
    fam = InterlockedFamily.phi_alpha(1)
    members = [str(s) for _, s in fam.members(3)]
    assert len(members) == 3 and str(fam) == "Phi_1"


def test_from_rational_simple_pole():
    arc = Arc.of(C5, 0, 1)
    f = from_rational(parse_rational_function("1/(x-3)"), arc)
    assert f.coeff(0) == C5(Fraction(-1, 2))
    for n in range(6):
        assert f.coeff(n) == C5(Fraction(-1, 2 ** (n + 1)))


def test_from_rational_polynomial_and_division():
    arc = Arc.of(C5, 0, 1)
    sq = from_rational(parse_rational_function("x^2"), arc)
    assert [sq.coeff(n) for n in range(4)] == [C5(1), C5(2), C5(1), C5(0)]
    g = parse_rational_function("(x^2+1)/(x-3)")
    G = from_rational(g, arc)
    # x^2 + 1 = (x + 3)(x - 3) + 10, expanded about 1
    for n in range(5):
        want = Fraction(-10, 2 ** (n + 1)) + (Fraction(4) if n == 0 else Fraction(1) if n == 1 else 0)
        assert G.coeff(n) == C5(want)


def test_pole_errors():
    arc = Arc.of(C5, 0, 1)
    with pytest.raises(PoleInArc):
        from_rational(parse_rational_function("1/(x-6)"), arc)
    with pytest.raises(IrrationalPole):
        from_rational(parse_rational_function("1/(x^2-2)"), arc)


def test_partial_fractions_reassemble():
    f = parse_rational_function("(x^3+2)/((x-3)^2*(x+1/2))")
    poly, terms = rational_partial_fractions(f)
    for x in (Fraction(7), Fraction(-2, 3), Fraction(11, 5)):
        total = poly(x) + sum(e / (x - r) ** m for r, m, e in terms)
        assert total == f(x)


def test_builtins():
    c3 = PadicContext(3)
    arc = Arc.of(c3, 1, 0)
    ah = builtin("artin_hasse_loderiv", (), arc)
    assert ah.coeff(2) == c3(1) and ah.coeff(8) == c3(1) and ah.coeff(5).is_zero()
    lg = builtin("log1m", (), arc)
    assert lg.coeff(1) == c3(-1) and lg.coeff(3).valuation == -1
    a5 = Arc.of(C5, 1, 0)
    psi = builtin("bernoulli_psi", (2,), a5)
    assert psi.coeff(1) == C5(Fraction(1, 2))
    with pytest.raises(UnknownBuiltin):
        builtin("nope", (), a5)
    with pytest.raises(IncompatibleArc):
        builtin("log1m", (), Arc.of(C5, 0, 1))


@pytest.mark.parametrize("name,params", [
    ("log1m", ()), ("artin_hasse_loderiv", ()), ("binom_t", (Fraction(1, 2),)),
    ("bernoulli_psi", (2,)), ("gap_series", (2,)),
])
@pytest.mark.parametrize("p", [3, 5])
def test_certificates_hold_on_samples(name, params, p):
    ctx = PadicContext(p)
    arc = Arc.of(ctx, 1, 0)
    f = builtin(name, params, arc)
    cert = f.certificate
    for n in range(cert.n0 + 1, cert.n0 + 201):
        assert cert.holds_at(f.coeff(n), n, arc.radius_valuation)


def test_recenter_examples():
    arc = Arc.of(C5, 0, 1)
    f = from_rational(parse_rational_function("1/(x-3)"), arc)
    same = recenter(f, arc, C5(1), 5)
    assert all(same.coeff(n) == f.coeff(n) for n in range(4))
    moved = recenter(f, arc, C5(6), 60)
    assert moved.coeff(0).agreement(C5(Fraction(1, 3))) >= min(20, moved.coeff(0).precision)
    assert moved.coeff(0).precision >= 20
    poly = from_rational(parse_rational_function("x^3 - 2x + 1"), arc)
    pr = recenter(poly, arc, C5(11), 4)
    exact = Poly([1, -2, 0, 1]).taylor(Fraction(11))
    assert [pr.coeff(n) for n in range(4)] == [C5(c) for c in exact]
    with pytest.raises(BasepointOutsideArc):
        recenter(f, arc, C5(2), 3)
    bare = SeriesFunction(C5, C5(1), lambda n, c: c(1))
    with pytest.raises(NoCertificate):
        recenter(bare, arc, C5(6), 3)


def test_recenter_converges_with_window():
    arc = Arc.of(C5, 0, 1)
    f = from_rational(parse_rational_function("1/(x-3)"), arc)
    b_new = Fraction(1 + 5)
    prev = -1
    for w in (2, 6, 12, 24):
        c0 = recenter(f, arc, C5(b_new), w).coeff(0)
        agree = c0.agreement(C5(1 / (b_new - 3)))
        assert agree >= prev
        prev = agree
    assert prev >= 20


def test_recentered_certificate_still_holds():
    c3 = PadicContext(3)
    arc = Arc.of(c3, 1, 0)
    lg = builtin("log1m", (), arc)
    moved = recenter(lg, arc, c3(3), 40)
    cert = moved.certificate
    for n in range(cert.n0 + 1, cert.n0 + 15):
        c = moved.coeff(n)
        if c.relative_precision > 0:
            assert cert.holds_at(c, n, arc.radius_valuation)


def test_disc_automorphism_examples():
    ok, parts = check_disc_automorphism([3 - 5, 5], C5(1), 0, C5(3), 1)
    assert ok and all(g.is_zero() for g in parts["g"])
    ok, parts = check_disc_automorphism([0, 1, 5], C5(0), 0, C5(0), 0)
    assert ok and parts["g_sup_valuation"] == 1
    ok, _ = check_disc_automorphism([0, 0, 1], C5(0), 0, C5(0), 0)
    assert not ok
    with pytest.raises(CenterMismatch):
        check_disc_automorphism([1, 1], C5(0), 0, C5(0), 0)


def test_function_spec_parsing():
    arc = Arc.of(C5, 1, 0)
    assert parse_function_spec("builtin:binom_t:1/3", arc).coeff(1) == C5(Fraction(1, 3))
    with pytest.raises(ValueError, match="position"):
        parse_function_spec("rat:1/(x-", arc)
    with pytest.raises(ValueError):
        parse_function_spec("poly:x", arc)


def test_concurrent_coefficients_identical():
    arc = Arc.of(C5, 1, 0)
    f = builtin("bernoulli_psi", (2,), arc)
    out = [None] * 8

    def work(i):
        out[i] = [f.coeff(n).to_json() for n in range(0, 120, 7)]

    threads = [threading.Thread(target=work, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(o == out[0] for o in out)


@given(st.lists(small_q, min_size=1, max_size=4), small_q, small_q)
def test_coefficients_match_exact_taylor(coeffs, r, e):
    # c_n of P + e/(x - r) about b = 1, compared with exact rationals
    assume(r != 1 and e != 0)
    arc = Arc.of(C5, 0, 1)
    rv = valuation((r - 1).numerator, 5) - valuation((r - 1).denominator, 5)
    assume(rv <= 0)
    f = ExactRationalFunction.from_poly(Poly(coeffs)) + ExactRationalFunction.simple_pole(r, 1, e)
    F = from_rational(f, arc)
    tay = Poly(coeffs).taylor(Fraction(1))
    for n in range(6):
        want = (tay[n] if n < len(tay) else 0) - e / (r - 1) ** (n + 1)
        assert F.coeff(n).agreement(C5(want)) >= min(30, F.coeff(n).precision)


def test_log_p():
    assert log_p(25, 5) == pytest.approx(2)
