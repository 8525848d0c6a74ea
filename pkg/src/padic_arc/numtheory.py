"""Integer support: Bernoulli numbers, binomial valuations and congruences.

Bernoulli numbers follow the ``t e^t / (e^t - 1)`` convention, so
``B_1 = +1/2``; all other values agree with the ``t / (e^t - 1)`` ones.
"""

from __future__ import annotations

import math
import struct
import threading
from fractions import Fraction

from .padic_core import PadicContext, PadicNumber, valuation

__all__ = [
    "IndexTooLarge",
    "BernoulliCache",
    "default_cache",
    "bernoulli",
    "bernoulli_padic",
    "binom_valuation",
    "kazandzidis_check",
    "binom_mod_pN",
    "legendre_factorial_valuation",
    "EXACT_BINOMIAL_LIMIT",
    "kubota_leopoldt",
]

EXACT_BINOMIAL_LIMIT = 10**5


class IndexTooLarge(ValueError):
    """Requested Bernoulli index exceeds the cache bound."""


def _tangent_numbers(K: int, mod: int | None = None) -> list[int]:
    """Tangent numbers T_1..T_K (index 0 unused), optionally reduced mod ``mod``.

    Uses the in-place integer recurrence of Brent and Harvey, which needs
    only additions and small multiplications.
    """
    T = [0] * (K + 1)
    if K == 0:
        return T
    T[1] = 1
    for k in range(2, K + 1):
        T[k] = (k - 1) * T[k - 1]
        if mod:
            T[k] %= mod
    for k in range(2, K + 1):
        for j in range(k, K + 1):
            T[j] = (j - k) * T[j - 1] + (j - k + 2) * T[j]
            if mod:
                T[j] %= mod
    return T


def _bernoulli_from_tangent(k: int, t: int) -> Fraction:
    """B_{2k} from the tangent number T_k."""
    four = 4**k
    return Fraction((-1) ** (k - 1) * 2 * k * t, four * (four - 1))


class BernoulliCache:
    """Exact Bernoulli numbers B_0..B_nmax, built lazily and shared.

    Args:
        nmax: largest index served.
    """

    def __init__(self, nmax: int = 4096):
        self.nmax = nmax
        self._values: list[Fraction] = []
        self._lock = threading.Lock()

    def _build(self, n: int) -> None:
        # grow geometrically so repeated requests stay O(n^2) overall
        target = max(n, 2 * len(self._values), 16)
        target = min(target, self.nmax)
        K = target // 2
        T = _tangent_numbers(K)
        vals = [Fraction(0)] * (target + 1)
        vals[0] = Fraction(1)
        if target >= 1:
            vals[1] = Fraction(1, 2)
        for k in range(1, K + 1):
            vals[2 * k] = _bernoulli_from_tangent(k, T[k])
        self._values = vals

    def __call__(self, n: int) -> Fraction:
        if n < 0:
            raise ValueError("Bernoulli index must be nonnegative")
        if n > self.nmax:
            raise IndexTooLarge(f"B_{n} exceeds the cache bound nmax={self.nmax}")
        if n >= len(self._values):
            with self._lock:
                if n >= len(self._values):
                    self._build(n)
        return self._values[n]

    def values(self, upto: int) -> list[Fraction]:
        self(upto)
        return self._values[: upto + 1]

    # versioned binary file: magic, version, count, then per value a sign
    # byte and length-prefixed big-endian numerator and denominator
    MAGIC = b"PABN"
    VERSION = 1

    def save(self, path) -> None:
        vals = list(self._values)
        with open(path, "wb") as fh:
            fh.write(self.MAGIC + struct.pack(">HI", self.VERSION, len(vals)))
            for b in vals:
                num, den = abs(b.numerator), b.denominator
                nb = num.to_bytes((num.bit_length() + 7) // 8, "big")
                db = den.to_bytes((den.bit_length() + 7) // 8, "big")
                fh.write(struct.pack(">BII", b < 0, len(nb), len(db)) + nb + db)

    def load(self, path) -> bool:
        """Load a cache file; returns False if it is missing, stale or corrupt."""
        try:
            with open(path, "rb") as fh:
                data = fh.read()
        except OSError:
            return False
        if data[:4] != self.MAGIC or len(data) < 10:
            return False
        version, count = struct.unpack_from(">HI", data, 4)
        if version != self.VERSION:
            return False
        pos, vals = 10, []
        try:
            for _ in range(count):
                neg, ln, ld = struct.unpack_from(">BII", data, pos)
                pos += 9
                num = int.from_bytes(data[pos:pos + ln], "big")
                den = int.from_bytes(data[pos + ln:pos + ln + ld], "big")
                pos += ln + ld
                vals.append(Fraction(-num if neg else num, den))
        except (struct.error, ZeroDivisionError):
            return False
        if not vals or vals[0] != 1 or (len(vals) > 1 and vals[1] != Fraction(1, 2)):
            return False
        with self._lock:
            if len(vals) > len(self._values):
                self._values = vals[: self.nmax + 1]
        return True


_DEFAULT_CACHE = BernoulliCache()


def default_cache() -> BernoulliCache:
    """The process-wide cache used by :func:`bernoulli`."""
    return _DEFAULT_CACHE


def bernoulli(n: int, cache: BernoulliCache | None = None) -> Fraction:
    """Exact B_n with ``B_1 = +1/2``.

    >>> bernoulli(12)
    Fraction(-691, 2730)
    """
    return (cache or _DEFAULT_CACHE)(n)


class _PadicBernoulliTable:
    """B_n modulo a power of p, for indices far beyond the exact cache."""

    def __init__(self, p: int, W: int):
        self.p = p
        self.W = W
        self.limit = 1
        self.table: dict[int, tuple[int, int, int, int]] = {}
        # nu_p(4^k - 1) is e0 + nu_p(k) when ord_p(4) | k, else 0
        o, x = 1, 4 % p
        while x != 1:
            x = x * 4 % p
            o += 1
        self.order = o
        self.e0 = valuation(4**o - 1, p)

    def extend(self, n: int) -> None:
        K = max(n, 2 * self.limit, 64) // 2
        p = self.p
        extra = self.e0 + int(math.log(K, p)) + 2
        E = self.W + extra
        M = p**E
        T = _tangent_numbers(K, M)
        for k in range(1, K + 1):
            num = (-1) ** (k - 1) * 2 * k * T[k] % M
            vden = 0 if k % self.order else self.e0 + valuation(k, p)
            # denominator 4^k (4^k - 1); only the second factor can hold p
            d_unit = pow(4, k, M) * ((pow(4, k, M * p**vden) - 1) // p**vden) % M
            self.table[2 * k] = (num, vden, d_unit, E)
        self.limit = 2 * K

    def value(self, n: int, ctx: PadicContext) -> PadicNumber:
        if n == 0:
            return ctx(1)
        if n == 1:
            return ctx(Fraction(1, 2))
        if n % 2:
            return ctx.zero()
        if n > self.limit:
            self.extend(n)
        num, vden, d_unit, E = self.table[n]
        if num == 0:
            return ctx.zero(min(self.W, E - vden))
        vn = valuation(num, self.p)
        r = E - vn
        mod = self.p**r
        unit = (num // self.p**vn) * pow(d_unit, -1, mod) % mod
        v = vn - vden
        return PadicNumber._make(ctx, v, unit, v + r).with_precision(self.W)


_PADIC_TABLES: dict[tuple[int, int], _PadicBernoulliTable] = {}
_PADIC_LOCK = threading.Lock()


def bernoulli_padic(n: int, ctx: PadicContext, W: int | None = None) -> PadicNumber:
    """B_n as a p-adic number known modulo ``p**min(W, ctx.N)``.

    Computed from tangent numbers reduced modulo a power of p, so indices
    in the tens of thousands are cheap.  Independent of :func:`bernoulli`.
    """
    W = ctx.N if W is None else min(W, ctx.N)
    key = (ctx.p, W)
    with _PADIC_LOCK:
        tab = _PADIC_TABLES.get(key)
        if tab is None:
            tab = _PADIC_TABLES[key] = _PadicBernoulliTable(ctx.p, W)
        if n > tab.limit:
            tab.extend(n)
    return tab.value(n, ctx)


def legendre_factorial_valuation(n: int, p: int) -> int:
    """nu_p(n!) by Legendre's formula."""
    s = 0
    while n:
        n //= p
        s += n
    return s


def binom_valuation(n: int, k: int, p: int) -> int:
    """nu_p(C(n, k)) via Legendre's formula."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    return (legendre_factorial_valuation(n, p) - legendre_factorial_valuation(k, p)
            - legendre_factorial_valuation(n - k, p))


def kazandzidis_check(a: int, b: int, t: int, p: int) -> bool:
    """Check |C(a p^t - 1, b p^t - 1) - C(a - 1, b - 1)|_p <= p^-e |b|_p^2 |a - b|_p.

    The exponent e is 3, or 2 when p = 3.  Both binomials are exact.
    """
    if not (1 <= b <= a and t >= 1):
        raise ValueError("need 1 <= b <= a and t >= 1")
    e = 2 if p == 3 else 3
    diff = math.comb(a * p**t - 1, b * p**t - 1) - math.comb(a - 1, b - 1)
    if diff == 0:
        return True
    # |diff| <= p^-e |b|^2 |a-b|  <=>  nu(diff) >= e + 2 nu(b) + nu(a-b)
    vab = valuation(a - b, p)
    if vab == math.inf:
        return False
    return valuation(diff, p) >= e + 2 * valuation(b, p) + vab


def _factorial_p_free(n: int, p: int, mod: int) -> int:
    """Product of the p-free parts of 1..n modulo ``mod``."""
    acc = 1
    for i in range(2, n + 1):
        while i % p == 0:
            i //= p
        acc = acc * i % mod
    return acc


def binom_mod_pN(n: int, k: int, p: int, N: int, *, force_path: str | None = None) -> PadicNumber:
    """C(n, k) as a p-adic number with its exact valuation and unit mod p^N.

    Exact big-integer arithmetic is used for ``n <= 10**5`` and the
    Legendre valuation with p-free factorials beyond; ``force_path`` of
    ``"exact"`` or ``"pfree"`` selects one explicitly.
    """
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    path = force_path or ("exact" if n <= EXACT_BINOMIAL_LIMIT else "pfree")
    if path == "exact":
        c = math.comb(n, k)
        v = valuation(c, p)
        ctx = PadicContext(p, v + N)
        return PadicNumber._make(ctx, v, (c // p**v) % p**N, v + N)
    v = binom_valuation(n, k, p)
    mod = p**N
    num = _factorial_p_free(n, p, mod)
    den = _factorial_p_free(k, p, mod) * _factorial_p_free(n - k, p, mod) % mod
    ctx = PadicContext(p, v + N)
    return PadicNumber._make(ctx, v, num * pow(den, -1, mod) % mod, v + N)


def _gen_binom(x: int, m: int) -> Fraction:
    r = Fraction(1)
    for i in range(m):
        r = r * (x - i) / (i + 1)
    return r


def kubota_leopoldt(s: int, t: int, ctx: PadicContext, terms: int | None = None) -> PadicNumber:
    """p-adic L-function L_p(s, omega^t) at an integer s != 1.

    Uses the series
        L_p(s, chi) = 1/(p (s-1)) sum_{a=1}^{p-1} chi(a) <a>^(1-s)
                      sum_j C(1-s, j) B_j (p/a)^j
    with ``<a> = a / omega(a)`` and ``B_1 = -1/2`` inside the series.  This
    route shares nothing with ray limits of Bernoulli numbers.
    """
    from .padic_core import teichmuller

    if s == 1:
        raise ValueError("s = 1 is a pole for the trivial character")
    p = ctx.p
    terms = terms if terms is not None else ctx.N + 8
    wctx = ctx.with_precision(ctx.N + 4)
    total = wctx.zero()
    for a in range(1, p):
        w = teichmuller(wctx(a))
        br = wctx(a) / w
        inner = Fraction(0)
        for j in range(terms):
            bj = Fraction(-1, 2) if j == 1 else bernoulli(j)
            if bj:
                inner += _gen_binom(1 - s, j) * bj * Fraction(p, a) ** j
        total = total + w ** (t % (p - 1)) * br ** (1 - s) * wctx(inner)
    return ctx(total / (p * (s - 1)))
