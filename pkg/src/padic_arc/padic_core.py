"""Truncated p-adic arithmetic with explicit valuation and absolute precision.

Every value is an element of Q_p known modulo ``p**precision``.  Nonzero
values are stored as ``p**valuation * unit`` where ``unit`` is an integer
prime to ``p`` known modulo ``p**(precision - valuation)``.  Zero is stored
with valuation ``math.inf`` and still carries the precision to which it is
known to vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

__all__ = [
    "PadicError",
    "DivisionByZero",
    "PrecisionExhausted",
    "NormTooLarge",
    "SingularToPrecision",
    "PadicContext",
    "PadicNumber",
    "PadicMatrix",
    "valuation",
    "teichmuller",
    "omega_power",
    "solve_linear",
]

INF = math.inf


class PadicError(ArithmeticError):
    """Base class for p-adic arithmetic failures."""


class DivisionByZero(PadicError, ZeroDivisionError):
    """Divisor is indistinguishable from zero at its precision."""


class PrecisionExhausted(PadicError):
    """A result would carry no information at all."""


class NormTooLarge(PadicError):
    """Input lies outside the closed unit disc where the operation is defined."""


class SingularToPrecision(PadicError):
    """No usable pivot exists at the available precision."""


def valuation(n: int, p: int) -> Union[int, float]:
    """Return the p-adic valuation of an integer (``inf`` for 0)."""
    if n == 0:
        return INF
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _split(n: int, p: int) -> tuple[int, int]:
    """Split a nonzero integer as ``p**v * m`` with ``m`` prime to p."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


Scalar = Union[int, Fraction, "PadicNumber"]


@dataclass(frozen=True)
class PadicContext:
    """Prime and working precision shared by a family of p-adic values.

    Attributes:
        p: odd prime.
        N: absolute precision cap; values are never known beyond ``p**N``.
    """

    p: int
    N: int = 40

    def __post_init__(self) -> None:
        if not isinstance(self.p, int) or not _is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p!r}")
        if self.p == 2:
            raise ValueError("p = 2 is not supported; use an odd prime")
        if not isinstance(self.N, int) or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")

    def __call__(self, x: Scalar, precision: int | None = None) -> "PadicNumber":
        """Coerce an int, Fraction, rational string or PadicNumber."""
        if isinstance(x, PadicNumber):
            if x.ctx.p != self.p:
                raise ValueError("cannot mix different primes")
            if x.ctx == self and precision is None:
                return x
            A = x.precision if precision is None else min(precision, x.precision)
            return PadicNumber._make(self, x.valuation, x.unit, A)
        if isinstance(x, str):
            x = Fraction(x)
        if isinstance(x, bool):
            x = int(x)
        if isinstance(x, int):
            x = Fraction(x)
        if not isinstance(x, Fraction):
            raise TypeError(f"cannot convert {type(x).__name__} to a p-adic number")
        A = self.N if precision is None else precision
        return PadicNumber.from_fraction(self, x, A)

    def zero(self, precision: int | None = None) -> "PadicNumber":
        A = self.N if precision is None else precision
        return PadicNumber._make(self, INF, 0, A)

    def one(self) -> "PadicNumber":
        return PadicNumber._make(self, 0, 1, self.N)

    def with_precision(self, N: int) -> "PadicContext":
        """Context with the same prime and a different cap."""
        return PadicContext(self.p, N)


class PadicNumber:
    """Element of Q_p known to a finite absolute precision.

    Instances are immutable.  Arithmetic follows the capped-absolute model:
    the absolute precision of a result is what the operands guarantee,
    truncated at ``ctx.N``, and never increases.
    """

    __slots__ = ("ctx", "valuation", "unit", "precision")

    ctx: PadicContext
    valuation: Union[int, float]
    unit: int
    precision: int

    def __init__(self, ctx: PadicContext, valuation, unit: int, precision: int):
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "valuation", valuation)
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "precision", precision)

    def __setattr__(self, name, value):
        raise AttributeError("PadicNumber is immutable")

    # ------------------------------------------------------------------ build
    @staticmethod
    def _make(ctx: PadicContext, v, u: int, A: int) -> "PadicNumber":
        """Normalise ``p**v * u`` known modulo ``p**A`` (A capped at ctx.N)."""
        p = ctx.p
        if A > ctx.N:
            A = ctx.N
        if v == INF or u == 0:
            if A <= 0:
                raise PrecisionExhausted("result carries no digits")
            return PadicNumber(ctx, INF, 0, A)
        if u % p == 0:
            dv, u = _split(u, p)
            v += dv
        r = A - v
        if r <= 0:
            if A <= 0:
                raise PrecisionExhausted("result carries no digits")
            return PadicNumber(ctx, INF, 0, A)
        return PadicNumber(ctx, v, u % p**r, A)

    @classmethod
    def from_fraction(cls, ctx: PadicContext, q: Fraction, precision: int | None = None) -> "PadicNumber":
        """Image of an exact rational, known to ``precision`` (default ctx.N)."""
        A = ctx.N if precision is None else precision
        q = Fraction(q)
        if q == 0:
            return cls._make(ctx, INF, 0, A)
        p = ctx.p
        vn, n = _split(q.numerator, p)
        vd, d = _split(q.denominator, p)
        v = vn - vd
        r = min(A, ctx.N) - v
        if r <= 0:
            return cls._make(ctx, INF, 0, A)
        mod = p**r
        return cls._make(ctx, v, n * pow(d, -1, mod) % mod, A)

    @classmethod
    def from_digits(cls, ctx: PadicContext, digits: Sequence[int], valuation: int = 0, precision: int | None = None) -> "PadicNumber":
        """Build from little-endian base-p digits starting at ``p**valuation``."""
        p = ctx.p
        u = 0
        for d in reversed(list(digits)):
            if not 0 <= d < p:
                raise ValueError(f"digit {d} out of range for p={p}")
            u = u * p + d
        A = valuation + len(digits) if precision is None else precision
        return cls._make(ctx, valuation, u, A)

    # ------------------------------------------------------------ properties
    @property
    def p(self) -> int:
        return self.ctx.p

    def is_zero(self) -> bool:
        """True when the value vanishes to its known precision."""
        return self.valuation == INF

    @property
    def relative_precision(self) -> int:
        if self.valuation == INF:
            return 0
        return self.precision - self.valuation

    @property
    def norm(self) -> Fraction:
        """|x|_p as an exact rational (0 for zero-to-precision)."""
        if self.valuation == INF:
            return Fraction(0)
        return Fraction(1, self.p**self.valuation) if self.valuation >= 0 else Fraction(self.p ** (-self.valuation))

    @property
    def digits(self) -> list[int]:
        """Little-endian base-p digits of the unit part (first digit nonzero)."""
        out = []
        u = self.unit
        for _ in range(self.relative_precision):
            u, d = divmod(u, self.p)
            out.append(d)
        return out

    def residue(self, A: int | None = None) -> int:
        """Integer representative of ``x mod p**A`` for x in Z_p."""
        A = self.precision if A is None else min(A, self.precision)
        if self.valuation == INF or self.valuation >= A:
            return 0
        if self.valuation < 0:
            raise NormTooLarge("value is not in Z_p")
        return (self.unit * self.p**self.valuation) % self.p**A

    def lift(self) -> Fraction:
        """Exact rational representative ``p**valuation * unit``."""
        if self.valuation == INF:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.valuation

    def with_precision(self, A: int) -> "PadicNumber":
        """Forget digits beyond absolute precision A (never adds digits)."""
        return PadicNumber._make(self.ctx, self.valuation, self.unit, min(A, self.precision))

    # ------------------------------------------------------------ arithmetic
    def _coerce(self, other) -> "PadicNumber":
        if isinstance(other, PadicNumber):
            if other.ctx.p != self.ctx.p:
                raise ValueError("cannot mix different primes")
            return other
        return self.ctx(other)

    def _out_ctx(self, other: "PadicNumber") -> PadicContext:
        return self.ctx if self.ctx.N >= other.ctx.N else other.ctx

    def __add__(self, other) -> "PadicNumber":
        y = self._coerce(other)
        ctx = self._out_ctx(y)
        A = min(self.precision, y.precision)
        if self.valuation == INF:
            return PadicNumber._make(ctx, y.valuation, y.unit, A)
        if y.valuation == INF:
            return PadicNumber._make(ctx, self.valuation, self.unit, A)
        p = ctx.p
        m = min(self.valuation, y.valuation)
        if m >= A:
            return PadicNumber._make(ctx, INF, 0, A)
        s = self.unit * p ** (self.valuation - m) + y.unit * p ** (y.valuation - m)
        return PadicNumber._make(ctx, m, s % p ** (A - m), A)

    __radd__ = __add__

    def __neg__(self) -> "PadicNumber":
        if self.valuation == INF:
            return self
        return PadicNumber._make(self.ctx, self.valuation, -self.unit, self.precision)

    def __sub__(self, other) -> "PadicNumber":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "PadicNumber":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "PadicNumber":
        y = self._coerce(other)
        ctx = self._out_ctx(y)
        vx = self.precision if self.valuation == INF else self.valuation
        vy = y.precision if y.valuation == INF else y.valuation
        A = min(self.precision + vy, y.precision + vx)
        if self.valuation == INF or y.valuation == INF:
            return PadicNumber._make(ctx, INF, 0, A)
        return PadicNumber._make(ctx, vx + vy, self.unit * y.unit, A)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "PadicNumber":
        y = self._coerce(other)
        if y.valuation == INF:
            raise DivisionByZero("divisor is zero to its precision")
        ctx = self._out_ctx(y)
        if self.valuation == INF:
            return PadicNumber._make(ctx, INF, 0, self.precision - y.valuation)
        r = min(self.relative_precision, y.relative_precision)
        v = self.valuation - y.valuation
        mod = ctx.p**r
        return PadicNumber._make(ctx, v, self.unit * pow(y.unit, -1, mod) % mod, v + r)

    def __rtruediv__(self, other) -> "PadicNumber":
        return self._coerce(other) / self

    def __pow__(self, n: int) -> "PadicNumber":
        if not isinstance(n, int):
            raise TypeError("only integer exponents are supported")
        if n == 0:
            return self.ctx.one()
        if n < 0:
            return self.ctx.one() / (self ** (-n))
        if self.valuation == INF:
            if self.precision <= 0:
                raise PrecisionExhausted("power of an unknown zero")
            return PadicNumber._make(self.ctx, INF, 0, self.precision * n)
        r = self.relative_precision
        v = self.valuation * n
        return PadicNumber._make(self.ctx, v, pow(self.unit, n, self.p**r), v + r)

    # ------------------------------------------------------------ comparison
    def __eq__(self, other) -> bool:
        try:
            y = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        try:
            return (self - y).is_zero()
        except PrecisionExhausted:
            return True

    __hash__ = None  # equality is precision-dependent

    def agreement(self, other) -> Union[int, float]:
        """Valuation of ``self - other`` (its precision when zero)."""
        d = self - self._coerce(other)
        return d.precision if d.is_zero() else d.valuation

    # ------------------------------------------------------------ rendering
    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"PadicNumber(p={self.p}, {self.compact()}, prec={self.precision})"

    def render(self) -> str:
        """Text form ``d0 + d1*p + ... (mod p^A)``."""
        p = self.p
        terms = []
        if self.valuation != INF:
            for i, d in enumerate(self.digits):
                if d == 0:
                    continue
                e = self.valuation + i
                if e == 0:
                    terms.append(f"{d}")
                elif e == 1:
                    terms.append(f"{d}*{p}")
                else:
                    terms.append(f"{d}*{p}^{e}")
        body = " + ".join(terms) if terms else "0"
        return f"{body} (mod {p}^{self.precision})"

    def compact(self) -> str:
        """Compact form ``val:v;digits:[...]``."""
        v = "inf" if self.valuation == INF else str(self.valuation)
        return f"val:{v};digits:[{','.join(map(str, self.digits))}]"

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "valuation": None if self.valuation == INF else self.valuation,
            "digits": self.digits,
            "precision": self.precision,
        }

    @classmethod
    def from_json(cls, obj: dict, N: int | None = None) -> "PadicNumber":
        p = obj["p"]
        A = obj["precision"]
        ctx = PadicContext(p, max(A, 1) if N is None else N)
        if obj["valuation"] is None:
            return cls._make(ctx, INF, 0, A)
        return cls.from_digits(ctx, obj["digits"], obj["valuation"], A)

    # --------------------------------------------------------------- helpers
    def teichmuller(self) -> "PadicNumber":
        return teichmuller(self)


def teichmuller(x: PadicNumber) -> PadicNumber:
    """Teichmüller representative of x, or 0 when |x|_p < 1.

    The result is locally constant in x, so it is returned to full
    precision ``ctx.N`` whatever the precision of x.
    """
    ctx = x.ctx
    if x.valuation == INF:
        if x.precision < 1:
            raise PrecisionExhausted("cannot decide whether |x|_p < 1")
        return ctx.zero()
    if x.valuation < 0:
        raise NormTooLarge(f"|x|_p = {x.p}^{-x.valuation} > 1")
    if x.valuation > 0:
        return ctx.zero()
    p, mod = ctx.p, ctx.p**ctx.N
    y = x.unit % p
    while True:
        z = pow(y, p, mod)
        if z == y:
            return PadicNumber._make(ctx, 0, y, ctx.N)
        y = z


def omega_power(x: PadicNumber, alpha: int) -> PadicNumber:
    """``teichmuller(x) ** (p ** alpha)``."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    w = teichmuller(x)
    if w.is_zero():
        return w
    mod = x.p**x.ctx.N
    return PadicNumber._make(x.ctx, 0, pow(w.unit, x.p**alpha, mod), x.ctx.N)


class PadicMatrix:
    """Dense matrix of p-adic numbers sharing one prime."""

    def __init__(self, rows: Iterable[Iterable[Scalar]], ctx: PadicContext | None = None):
        raw = [list(r) for r in rows]
        if not raw or any(len(r) != len(raw[0]) for r in raw) or not raw[0]:
            raise ValueError("matrix must be rectangular and nonempty")
        if ctx is None:
            ctx = next((e.ctx for r in raw for e in r if isinstance(e, PadicNumber)), None)
            if ctx is None:
                raise ValueError("context required for scalar-only matrices")
        self.ctx = ctx
        self.entries = [[ctx(e) if not isinstance(e, PadicNumber) else e for e in r] for r in raw]
        self.rows = len(raw)
        self.cols = len(raw[0])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __matmul__(self, other):
        if isinstance(other, PadicMatrix):
            if self.cols != other.rows:
                raise ValueError("shape mismatch")
            return PadicMatrix(
                [[_dot(self.entries[i], [other.entries[k][j] for k in range(other.rows)], self.ctx)
                  for j in range(other.cols)] for i in range(self.rows)],
                self.ctx,
            )
        vec = list(other)
        if len(vec) != self.cols:
            raise ValueError("shape mismatch")
        return [_dot(row, vec, self.ctx) for row in self.entries]

    def det(self) -> PadicNumber:
        """Determinant by elimination with minimal-valuation pivots."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        a = [row[:] for row in self.entries]
        n = self.rows
        det = self.ctx.one()
        for c in range(n):
            piv = _pivot(a, c)
            if piv is None:
                prec = min(a[r][c].precision for r in range(c, n))
                return det * self.ctx.zero(prec)
            if piv != c:
                a[c], a[piv] = a[piv], a[c]
                det = -det
            det = det * a[c][c]
            for r in range(c + 1, n):
                if a[r][c].is_zero():
                    continue
                f = a[r][c] / a[c][c]
                a[r] = [a[r][j] - f * a[c][j] if j >= c else a[r][j] for j in range(n)]
        return det

    def __repr__(self) -> str:
        return f"PadicMatrix({self.rows}x{self.cols}, p={self.ctx.p})"


def _dot(u, v, ctx: PadicContext) -> PadicNumber:
    acc = ctx.zero()
    for x, y in zip(u, v):
        acc = acc + x * y
    return acc


def _pivot(a, c: int):
    best, best_v = None, INF
    for r in range(c, len(a)):
        v = a[r][c].valuation
        if v < best_v:
            best, best_v = r, v
    return best


def solve_linear(A: PadicMatrix, rhs: Sequence[Scalar]) -> list[PadicNumber]:
    """Solve ``A x = rhs`` by Gaussian elimination over Q_p.

    Each column is pivoted on the remaining entry of least valuation, which
    keeps the multipliers integral and the precision loss minimal.

    Raises:
        SingularToPrecision: a column has no entry distinguishable from 0.
    """
    if A.rows != A.cols:
        raise ValueError("solve_linear needs a square system")
    n = A.rows
    if len(rhs) != n:
        raise ValueError("right-hand side has the wrong length")
    ctx = A.ctx
    a = [row[:] + [ctx(rhs[i]) if not isinstance(rhs[i], PadicNumber) else rhs[i]] for i, row in enumerate(A.entries)]
    for c in range(n):
        piv = _pivot(a, c)
        if piv is None:
            raise SingularToPrecision(f"no nonzero pivot in column {c}")
        a[c], a[piv] = a[piv], a[c]
        for r in range(n):
            if r == c or a[r][c].is_zero():
                continue
            f = a[r][c] / a[c][c]
            a[r] = [a[r][j] - f * a[c][j] if j >= c else a[r][j] for j in range(n + 1)]
    return [a[i][n] / a[i][i] for i in range(n)]
