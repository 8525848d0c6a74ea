import cmath
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from padic_arc.exact_oracle import (
    CyclotomicElement,
    ExactRationalFunction,
    LevelTooLarge,
    PoleOnSampleSet,
    Poly,
    direct_A,
    parse_rational_function,
)

small_q = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 7))


def complex_A(f: ExactRationalFunction, a, b, m, p):
    # floating-point evaluation of the same root-of-unity sum
    q = p**m
    tot = 0
    for r in range(q):
        z = cmath.exp(2j * cmath.pi * r / q)
        x = complex(a) + complex(b - a) * z
        num = sum(complex(c) * x**i for i, c in enumerate(f.numerator.c))
        den = sum(complex(c) * x**i for i, c in enumerate(f.denominator.c))
        tot += (x - complex(a)) * num / den
    return tot / q


def test_zeta_full_cycle_and_root_sum():
    for p, k in ((3, 1), (3, 2), (5, 1)):
        z = CyclotomicElement.zeta_power(p, k, 1)
        assert (z * CyclotomicElement.zeta_power(p, k, p**k - 1)).rational_value() == 1
        s = CyclotomicElement.rational(p, k, 0)
        for r in range(p**k):
            s = s + CyclotomicElement.zeta_power(p, k, r)
        assert s.is_zero()


def test_inverse_of_one_minus_zeta():
    one = CyclotomicElement.rational(3, 1, 1)
    d = one - CyclotomicElement.zeta_power(3, 1, 1)
    assert (d * d.inv()).rational_value() == 1


def test_constant_integrates_to_zero():
    f = ExactRationalFunction.from_poly(Poly([Fraction(7, 3)]))
    for m in (1, 2):
        assert direct_A(f, 0, 1, m, 5) == 0


def test_simple_pole_closed_form():
    f = parse_rational_function("1/(x-3)")
    assert direct_A(f, 0, 1, 1, 5) == Fraction(-1, 242)
    assert direct_A(f, 0, 1, 1, 5) == 1 / (1 - Fraction(3) ** 5)


def test_pole_on_sample_set_and_cap():
    with pytest.raises(PoleOnSampleSet):
        direct_A(parse_rational_function("1/(x-1)"), 0, 1, 1, 3)
    with pytest.raises(LevelTooLarge):
        direct_A(parse_rational_function("x"), 0, 1, 4, 5)


def test_parser_positions():
    with pytest.raises(ValueError, match="position"):
        parse_rational_function("1/(x-")
    with pytest.raises(ValueError, match="position 2"):
        parse_rational_function("x+$")
    f = parse_rational_function("(x^2+1)/((x-3)^2*(x+5)) + 2/3*x^3")
    assert f(Fraction(1)) == Fraction(2, 4 * 6) + Fraction(2, 3)
    # an exponent followed by a division
    assert parse_rational_function("x^3/25")(Fraction(5)) == 5
    assert parse_rational_function("x^-2/4")(Fraction(2)) == Fraction(1, 16)
    with pytest.raises(ValueError, match="exponent"):
        parse_rational_function("x^(2)")


@given(st.lists(small_q, min_size=1, max_size=5), st.sampled_from([(3, 1), (3, 2), (5, 1)]))
def test_polynomials_below_level_vanish(coeffs, pk):
    p, m = pk
    P = Poly(coeffs[: p**m - 1])
    assert direct_A(ExactRationalFunction.from_poly(P), 0, 1, m, p) == 0


@given(st.lists(small_q, min_size=1, max_size=4), small_q, small_q,
       st.sampled_from([(3, 1), (3, 2), (5, 1)]), st.integers(2, 4))
def test_galois_stability(coeffs, r, a, pk, e):
    p, m = pk
    assume(e % p)
    num = Poly(coeffs)
    assume(not num.is_zero())
    f = ExactRationalFunction(num, Poly([-r, 1]))
    b = a + 1
    try:
        v1 = direct_A(f, a, b, m, p)
    except PoleOnSampleSet:
        return
    assert direct_A(f, a, b, m, p, root_exponent=e) == v1


@given(st.lists(small_q, min_size=1, max_size=4), small_q, st.sampled_from([(3, 1), (3, 2), (5, 1), (7, 1)]))
def test_matches_floating_point_sum(coeffs, r, pk):
    p, m = pk
    num = Poly(coeffs)
    assume(not num.is_zero())
    f = ExactRationalFunction(num, Poly([-r, 1]) * Poly([Fraction(1, 2), 1]))
    a, b = Fraction(0), Fraction(1)
    try:
        exact = direct_A(f, a, b, m, p)
    except PoleOnSampleSet:
        return
    approx = complex_A(f, a, b, m, p)
    assume(all(abs(complex(a) + complex(b - a) * cmath.exp(2j * cmath.pi * k / p**m) - complex(r)) > 1e-3
               for k in range(p**m)))
    assert abs(approx - complex(exact)) < 1e-6 * max(1.0, abs(complex(exact)))
