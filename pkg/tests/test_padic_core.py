from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from padic_arc.padic_core import (
    INF,
    DivisionByZero,
    NormTooLarge,
    PadicContext,
    PadicMatrix,
    PadicNumber,
    SingularToPrecision,
    omega_power,
    solve_linear,
    teichmuller,
    valuation,
)

PRIMES = [3, 5, 7, 11]


def qval(q: Fraction, p: int):
    q = Fraction(q)
    return INF if q == 0 else valuation(q.numerator, p) - valuation(q.denominator, p)


rationals = st.fractions(max_denominator=500).filter(lambda q: abs(q.numerator) < 10**6)
primes = st.sampled_from(PRIMES)


def test_sum_gains_valuation():
    ctx = PadicContext(5)
    s = ctx(2) + ctx(3)
    # "10" in base 5
    assert s == ctx(5)
    assert s.valuation == 1 and s.digits[0] == 1


def test_half_in_z5():
    ctx = PadicContext(5)
    h = ctx(1) / 2
    assert h.digits[:3] == [3, 2, 2]
    assert (h * 2 - 1).is_zero()


def test_difference_with_itself_is_zero():
    ctx = PadicContext(3)
    x = ctx(Fraction(7, 4))
    d = x - x
    assert d.is_zero() and d.valuation == INF


def test_rejects_p_two_and_composites():
    with pytest.raises(ValueError):
        PadicContext(2)
    with pytest.raises(ValueError):
        PadicContext(9)


def test_division_by_zero():
    ctx = PadicContext(5)
    with pytest.raises(DivisionByZero):
        ctx(1) / ctx(0)


def test_digits_roundtrip_and_render():
    ctx = PadicContext(5, 10)
    x = PadicNumber.from_digits(ctx, [1, 2, 3], valuation=1)
    assert x == ctx(5 + 2 * 25 + 3 * 125)
    assert x.render() == "1*5 + 2*5^2 + 3*5^3 (mod 5^4)"
    assert x.compact() == "val:1;digits:[1,2,3]"
    assert PadicNumber.from_json(x.to_json()).to_json() == x.to_json()


def test_norm_and_residue():
    ctx = PadicContext(5)
    assert ctx(Fraction(1, 25)).norm == 25
    assert ctx(50).norm == Fraction(1, 25)
    assert ctx(Fraction(1, 2)).residue(1) == 3
    with pytest.raises(NormTooLarge):
        ctx(Fraction(1, 5)).residue()


def test_teichmuller_examples():
    ctx = PadicContext(5)
    i = teichmuller(ctx(2))
    assert i.residue(1) == 2
    assert (i * i + 1).is_zero()
    assert teichmuller(ctx(1)) == ctx(1)
    assert teichmuller(ctx(10)).is_zero()
    assert teichmuller(ctx(7)) == i


def test_omega_power_examples():
    c5, c7 = PadicContext(5), PadicContext(7)
    assert omega_power(c5(2), 0) == teichmuller(c5(2))
    assert omega_power(c5(2), 1) == teichmuller(c5(2))
    assert omega_power(c7(3), 1) == teichmuller(c7(3))


def test_solve_identity_and_worked_system():
    ctx = PadicContext(5)
    eye = PadicMatrix([[1, 0], [0, 1]], ctx)
    assert solve_linear(eye, [3, 4]) == [ctx(3), ctx(4)]
    with pytest.raises(SingularToPrecision):
        solve_linear(PadicMatrix([[0, 0], [0, 1]], ctx), [1, 1])


@given(rationals, rationals, primes)
def test_field_operations_match_rationals(x, y, p):
    ctx = PadicContext(p, 30)
    X, Y = ctx(x), ctx(y)
    assert (X + Y).agreement(ctx(x + y)) >= 30 - max(0, -min(qval(x, p), qval(y, p), 0))
    assert X * Y == ctx(x * y)
    if y != 0:
        assert X / Y == ctx(x / y)


@given(rationals, rationals, primes)
def test_ultrametric(x, y, p):
    ctx = PadicContext(p, 30)
    s = ctx(x) + ctx(y)
    if not s.is_zero():
        assert s.valuation >= min(ctx(x).valuation, ctx(y).valuation)


@given(st.integers(1, 10**6), primes)
def test_teichmuller_is_a_root_of_unity(n, p):
    assume(n % p)
    ctx = PadicContext(p, 25)
    w = teichmuller(ctx(n))
    assert (w ** (p - 1) - 1).is_zero()
    assert w.residue(1) == n % p


@given(st.integers(1, 10**6), st.integers(0, 10**6), primes)
def test_teichmuller_locally_constant(n, m, p):
    assume(n % p)
    ctx = PadicContext(p, 25)
    assert teichmuller(ctx(n)) == teichmuller(ctx(n + p * m))


@given(st.lists(st.integers(-20, 20), min_size=9, max_size=9),
       st.lists(st.integers(-50, 50), min_size=3, max_size=3))
def test_solve_inverts_unimodular_systems(entries, v):
    ctx = PadicContext(5, 30)
    A = PadicMatrix([entries[0:3], entries[3:6], entries[6:9]], ctx)
    d = A.det()
    assume(not d.is_zero() and d.valuation == 0)
    rhs = A @ [ctx(x) for x in v]
    sol = solve_linear(A, rhs)
    for s, x in zip(sol, v):
        assert s.agreement(ctx(x)) >= 28


@given(st.lists(st.integers(-9, 9), min_size=4, max_size=4))
def test_det_matches_integer_det(e):
    ctx = PadicContext(7, 20)
    d = PadicMatrix([e[:2], e[2:]], ctx).det()
    assert d == ctx(e[0] * e[3] - e[1] * e[2])
