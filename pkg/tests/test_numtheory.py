import math
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from padic_arc.numtheory import (
    BernoulliCache,
    IndexTooLarge,
    bernoulli,
    bernoulli_padic,
    binom_mod_pN,
    binom_valuation,
    kazandzidis_check,
    kubota_leopoldt,
)
from padic_arc.padic_core import PadicContext, teichmuller, valuation


def qval(q, p):
    q = Fraction(q)
    return valuation(q.numerator, p) - valuation(q.denominator, p)


def bernoulli_by_recurrence(n):
    # sum_{k<=m} C(m+1, k) B_k = 0 gives B_k for t/(e^t-1); flip B_1 afterwards
    B = [Fraction(1)]
    for m in range(1, n + 1):
        B.append(-sum(math.comb(m + 1, k) * B[k] for k in range(m)) / (m + 1))
    if n >= 1:
        B[1] = -B[1]
    return B


def test_small_values():
    assert bernoulli(0) == 1
    assert bernoulli(1) == Fraction(1, 2)
    assert bernoulli(12) == Fraction(-691, 2730)


def test_matches_textbook_recurrence():
    ref = bernoulli_by_recurrence(120)
    assert [bernoulli(n) for n in range(121)] == ref


def test_von_staudt_clausen():
    for k in range(1, 200):
        den = math.prod(q for q in range(2, 2 * k + 2) if all(q % d for d in range(2, q)) and (2 * k) % (q - 1) == 0)
        assert bernoulli(2 * k).denominator == den
        assert bernoulli(2 * k + 1) == 0


def test_index_too_large():
    c = BernoulliCache(nmax=10)
    with pytest.raises(IndexTooLarge):
        c(11)


def test_cache_file_roundtrip(tmp_path):
    c = BernoulliCache()
    c(300)
    path = tmp_path / "b.bin"
    c.save(path)
    d = BernoulliCache()
    assert d.load(path)
    assert d.values(300) == c.values(300)
    path.write_bytes(b"junk")
    assert not BernoulliCache().load(path)
    assert not BernoulliCache().load(tmp_path / "missing.bin")


@pytest.mark.parametrize("p", [3, 5, 7])
def test_padic_bernoulli_agrees_with_exact(p):
    ctx = PadicContext(p, 30)
    for n in list(range(0, 80)) + [500, 998, 1000]:
        assert bernoulli_padic(n, ctx) == ctx(bernoulli(n))


def test_binom_valuation_examples():
    for p in (3, 5, 7, 11):
        assert binom_valuation(p, 1, p) == 1
    assert binom_valuation(9, 4, 5) == 0


def test_binom_valuation_exhaustive_small():
    for p in (3, 5):
        for n in range(0, 300):
            for k in range(0, n + 1, 7):
                assert binom_valuation(n, k, p) == valuation(math.comb(n, k), p)


@given(st.sampled_from([3, 5, 7]), st.integers(1, 3), st.integers(1, 3), st.integers(0, 2000), st.data())
def test_binomial_removal_lemma(p, N, j, extra, data):
    t = data.draw(st.integers(1, N))
    n = j * p**N - 1 + extra
    assume((n + 1) % p**t)
    assert binom_valuation(n, j * p**N - 1, p) > N - t


def test_kazandzidis_examples():
    assert kazandzidis_check(2, 1, 1, 5)
    assert valuation(math.comb(9, 4) - 1, 5) == 3
    assert kazandzidis_check(7, 7, 2, 3)


@given(st.sampled_from([3, 5, 7]), st.integers(1, 40), st.data(), st.integers(1, 2))
def test_kazandzidis_random(p, a, data, t):
    b = data.draw(st.integers(1, a))
    assert kazandzidis_check(a, b, t, p)


def test_binom_mod_examples():
    one = binom_mod_pN(17, 0, 5, 6)
    assert one.valuation == 0 and one.unit == 1
    c = binom_mod_pN(9, 4, 5, 6)
    assert c.valuation == 0 and c.unit == 126


@given(st.integers(90000, 100000), st.data(), st.sampled_from([3, 5, 7]))
def test_binom_paths_agree(n, data, p):
    k = data.draw(st.integers(0, n))
    a = binom_mod_pN(n, k, p, 8, force_path="exact")
    b = binom_mod_pN(n, k, p, 8, force_path="pfree")
    assert a.valuation == b.valuation
    assert a.unit % p**8 == b.unit % p**8


def test_kummer_ray_stability():
    # residuals of B_{d 5^k - 1} along k shrink strictly for each odd class
    p = 5
    for d in (1, 3, 5, 7):
        vals = [bernoulli(d * p**k - 1) for k in range(1, 4)]
        res = [qval(vals[i + 1] - vals[i], p) for i in range(2)]
        assert res[0] < res[1]


@pytest.mark.parametrize("n", [1, 2, 3, 5])
@pytest.mark.parametrize("t", [0, 1, 2, 3])
def test_kubota_leopoldt_at_negative_integers(n, t):
    # L_p(1-n, omega^t) = -(1 - chi omega^-n (p) p^(n-1)) B_{n, chi omega^-n} / n
    p = 5
    ctx = PadicContext(p, 30)
    e = (t - n) % (p - 1)
    if e == 0:
        Bn = Fraction(-1, 2) if n == 1 else bernoulli(n)
        want = ctx(-(1 - Fraction(p) ** (n - 1)) * Bn / n)
    else:
        # generalised Bernoulli number of conductor p
        tot = ctx.zero()
        for a in range(1, p):
            poly = sum(math.comb(n, k) * (Fraction(-1, 2) if k == 1 else bernoulli(k)) * Fraction(a, p) ** (n - k)
                       for k in range(n + 1))
            tot = tot + teichmuller(ctx(a)) ** e * ctx(poly)
        want = -(tot * p ** (n - 1)) / n
    got = kubota_leopoldt(1 - n, t, ctx)
    assert got.agreement(want) >= 15
