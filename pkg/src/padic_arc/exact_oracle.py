"""Exact rational and cyclotomic arithmetic: a brute-force oracle for A(k).

Nothing here touches truncated p-adic numbers.  The defining root-of-unity
sum is evaluated in Q(zeta_{p^m}) and descends to an exact rational, which
is then compared against the p-adic series evaluation elsewhere.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "ExactRational",
    "NotInvertible",
    "PoleOnSampleSet",
    "LevelTooLarge",
    "Poly",
    "ExactRationalFunction",
    "CyclotomicElement",
    "cyclo_arith",
    "direct_A",
    "parse_rational_function",
    "DEFAULT_LEVEL_CAP",
]

ExactRational = Fraction
DEFAULT_LEVEL_CAP = 250


class NotInvertible(ZeroDivisionError):
    """The element has no inverse (it is zero)."""


class PoleOnSampleSet(ValueError):
    """A sample point of the defining sum is a pole of f."""


class LevelTooLarge(ValueError):
    """p**m exceeds the enumeration cap."""


# --------------------------------------------------------------------------
# dense polynomials over Q, coefficient lists low degree first
# --------------------------------------------------------------------------


class Poly:
    """Polynomial with Fraction coefficients, stored low degree first."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Iterable = ()):
        c = [Fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.c = tuple(c)

    @classmethod
    def x(cls) -> "Poly":
        return cls([0, 1])

    @classmethod
    def const(cls, a) -> "Poly":
        return cls([a])

    @property
    def degree(self) -> int:
        return len(self.c) - 1

    def is_zero(self) -> bool:
        return not self.c

    def lead(self) -> Fraction:
        return self.c[-1] if self.c else Fraction(0)

    def __getitem__(self, i: int) -> Fraction:
        return self.c[i] if 0 <= i < len(self.c) else Fraction(0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            other = Poly([other])
        return self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __add__(self, other) -> "Poly":
        other = other if isinstance(other, Poly) else Poly([other])
        n = max(len(self.c), len(other.c))
        return Poly(self[i] + other[i] for i in range(n))

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(-a for a in self.c)

    def __sub__(self, other) -> "Poly":
        other = other if isinstance(other, Poly) else Poly([other])
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return Poly([other]) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return Poly(a * other for a in self.c)
        if not self.c or not other.c:
            return Poly()
        out = [Fraction(0)] * (len(self.c) + len(other.c) - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(other.c):
                    out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        out = Poly([1])
        for _ in range(n):
            out = out * self
        return out

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.c)
        dq = len(r) - len(other.c)
        if dq < 0:
            return Poly(), self
        q = [Fraction(0)] * (dq + 1)
        lead = other.c[-1]
        for k in range(dq, -1, -1):
            coef = r[k + len(other.c) - 1] / lead
            q[k] = coef
            if coef:
                for j, b in enumerate(other.c):
                    r[k + j] -= coef * b
        return Poly(q), Poly(r[: len(other.c) - 1])

    def __call__(self, x):
        acc = 0 * x if not isinstance(x, (int, Fraction)) else Fraction(0)
        for a in reversed(self.c):
            acc = acc * x + a
        return acc

    def derivative(self) -> "Poly":
        return Poly(i * a for i, a in enumerate(self.c) if i)

    def compose(self, inner: "Poly") -> "Poly":
        acc = Poly()
        for a in reversed(self.c):
            acc = acc * inner + a
        return acc

    def monic(self) -> "Poly":
        return self * (1 / self.lead())

    def taylor(self, b) -> list[Fraction]:
        """Coefficients of the expansion in powers of (x - b)."""
        return list(self.compose(Poly([b, 1])).c)

    def __repr__(self) -> str:
        return f"Poly({[str(a) for a in self.c]})"

    def __str__(self) -> str:
        if not self.c:
            return "0"
        parts = []
        for i, a in enumerate(self.c):
            if a == 0:
                continue
            mon = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            coef = str(a)
            if mon and a == 1:
                coef = ""
            elif mon and a == -1:
                coef = "-"
            elif mon and "/" in coef:
                coef = f"({coef})*"
            elif mon:
                coef = coef + "*"
            parts.append(coef + mon if mon else coef)
        return " + ".join(parts)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    return a.monic() if not a.is_zero() else a


def poly_xgcd(a: Poly, b: Poly) -> tuple[Poly, Poly, Poly]:
    """Return (g, s, t) with s*a + t*b = g monic."""
    r0, r1 = a, b
    s0, s1 = Poly([1]), Poly()
    t0, t1 = Poly(), Poly([1])
    while not r1.is_zero():
        q, r = r0.divmod(r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    lc = r0.lead()
    return r0 * (1 / lc), s0 * (1 / lc), t0 * (1 / lc)


# --------------------------------------------------------------------------
# rational functions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactRationalFunction:
    """Quotient of two polynomials over Q, kept gcd-reduced with monic denominator."""

    numerator: Poly
    denominator: Poly

    def __post_init__(self):
        if self.denominator.is_zero():
            raise ZeroDivisionError("zero denominator")
        g = poly_gcd(self.numerator, self.denominator) if not self.numerator.is_zero() else self.denominator
        num = self.numerator.divmod(g)[0] if g.degree > 0 else self.numerator
        den = self.denominator.divmod(g)[0] if g.degree > 0 else self.denominator
        if self.numerator.is_zero():
            num, den = Poly(), Poly([1])
        lc = den.lead()
        object.__setattr__(self, "numerator", num * (1 / lc))
        object.__setattr__(self, "denominator", den * (1 / lc))

    @classmethod
    def from_poly(cls, p: Poly) -> "ExactRationalFunction":
        return cls(p, Poly([1]))

    @classmethod
    def simple_pole(cls, x0, m: int = 1, coeff=1) -> "ExactRationalFunction":
        """``coeff / (x - x0)**m``."""
        return cls(Poly([coeff]), Poly([-Fraction(x0), 1]) ** m)

    def is_polynomial(self) -> bool:
        return self.denominator.degree == 0

    def __call__(self, x):
        return self.numerator(x) / self.denominator(x)

    def __add__(self, other: "ExactRationalFunction") -> "ExactRationalFunction":
        return ExactRationalFunction(
            self.numerator * other.denominator + other.numerator * self.denominator,
            self.denominator * other.denominator,
        )

    def __mul__(self, other) -> "ExactRationalFunction":
        if not isinstance(other, ExactRationalFunction):
            return ExactRationalFunction(self.numerator * other, self.denominator)
        return ExactRationalFunction(self.numerator * other.numerator, self.denominator * other.denominator)

    __rmul__ = __mul__

    def __neg__(self):
        return ExactRationalFunction(-self.numerator, self.denominator)

    def __sub__(self, other):
        return self + (-other)

    def derivative(self) -> "ExactRationalFunction":
        n, d = self.numerator, self.denominator
        return ExactRationalFunction(n.derivative() * d - n * d.derivative(), d * d)

    def compose(self, inner: Poly) -> "ExactRationalFunction":
        """f(inner(t)) for a polynomial substitution."""
        return ExactRationalFunction(self.numerator.compose(inner), self.denominator.compose(inner))

    def __str__(self) -> str:
        if self.is_polynomial():
            return str(self.numerator)
        return f"({self.numerator})/({self.denominator})"


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|(x)|(\*\*|[-+*/^()]))")


class _Parser:
    """Recursive-descent parser for rational expressions in x."""

    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ValueError(f"unexpected character {text[pos]!r} at position {pos}")
            num, var, op = m.groups()
            start = m.start(m.lastindex)
            if num is not None:
                self.toks.append(("num", num, start))
            elif var is not None:
                self.toks.append(("x", var, start))
            else:
                self.toks.append(("op", "^" if op == "**" else op, start))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("end", "", len(self.text))

    def take(self, value=None):
        tok = self.peek()
        if value is not None and tok[1] != value:
            raise ValueError(f"expected {value!r} at position {tok[2]}")
        self.i += 1
        return tok

    def parse(self) -> ExactRationalFunction:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ValueError(f"unexpected {tok[1]!r} at position {tok[2]}")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in ("*", "/"):
                self.take()
                rhs = self.unary()
                if tok[1] == "*":
                    e = e * rhs
                else:
                    if rhs.numerator.is_zero():
                        raise ValueError(f"division by zero at position {tok[2]}")
                    e = e * ExactRationalFunction(rhs.denominator, rhs.numerator)
            elif tok[0] in ("num", "x") or tok[1] == "(":
                e = e * self.unary()  # implicit multiplication such as 3x
            else:
                return e

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("+", "-"):
            self.take()
            e = self.unary()
            return -e if tok[1] == "-" else e
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            tok = self.take()
            if tok[0] == "num" and "/" in tok[1]:
                # x^3/25 lexes 3/25 as one literal; split it back
                top, bottom = tok[1].split("/", 1)
                slash = tok[2] + len(top)
                self.toks[self.i:self.i] = [("op", "/", slash), ("num", bottom, slash + 1)]
                tok = ("num", top, tok[2])
            if tok[0] != "num":
                raise ValueError(f"integer exponent expected at position {tok[2]}")
            n = int(tok[1])
            out = ExactRationalFunction.from_poly(Poly([1]))
            for _ in range(n):
                out = out * base
            if sign < 0:
                if out.numerator.is_zero():
                    raise ValueError(f"division by zero at position {tok[2]}")
                out = ExactRationalFunction(out.denominator, out.numerator)
            return out
        return base

    def atom(self):
        tok = self.take()
        if tok[0] == "num":
            return ExactRationalFunction.from_poly(Poly([Fraction(tok[1])]))
        if tok[0] == "x":
            return ExactRationalFunction.from_poly(Poly.x())
        if tok[1] == "(":
            e = self.expr()
            self.take(")")
            return e
        raise ValueError(f"unexpected {tok[1] or 'end of input'!r} at position {tok[2]}")


def parse_rational_function(text: str) -> ExactRationalFunction:
    """Parse e.g. ``"(x^2+1)/(x-3)"`` or ``"1/2*x^3 - x"``.

    Raises:
        ValueError: with the character position of the first problem.
    """
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# cyclotomic field Q(zeta) with zeta a primitive p^k-th root of unity
# --------------------------------------------------------------------------


def _cyclotomic_modulus(p: int, k: int) -> Poly:
    """Phi_{p^k}(y) = sum_{i<p} y^(i p^(k-1))."""
    step = p ** (k - 1)
    c = [0] * ((p - 1) * step + 1)
    for i in range(p):
        c[i * step] = 1
    return Poly(c)


def _reduce_exponents(p: int, k: int, terms: dict[int, Fraction]) -> list[Fraction]:
    """Reduce sum c_e y^e (any e >= 0) modulo y^(p^k) - 1 and Phi_{p^k}."""
    q = p**k
    step = p ** (k - 1)
    d = (p - 1) * step
    out = [Fraction(0)] * d
    for e, c in terms.items():
        if not c:
            continue
        e %= q
        if e < d:
            out[e] += c
        else:
            t = e - d
            for i in range(p - 1):
                out[i * step + t] -= c
    return out


@dataclass(frozen=True)
class CyclotomicElement:
    """Element of Q(zeta_{p^k}) in the power basis 1, zeta, ..., zeta^(d-1)."""

    p: int
    level: int
    coeffs: tuple

    def __post_init__(self):
        d = (self.p - 1) * self.p ** (self.level - 1) if self.level >= 1 else 1
        c = tuple(Fraction(x) for x in self.coeffs)
        if len(c) != d:
            raise ValueError(f"expected {d} coefficients, got {len(c)}")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    @classmethod
    def from_terms(cls, p: int, k: int, terms: dict[int, Fraction]) -> "CyclotomicElement":
        if k == 0:
            return cls(p, 0, (sum(terms.values(), Fraction(0)),))
        return cls(p, k, _reduce_exponents(p, k, terms))

    @classmethod
    def zeta_power(cls, p: int, k: int, e: int = 1) -> "CyclotomicElement":
        return cls.from_terms(p, k, {e: Fraction(1)})

    @classmethod
    def rational(cls, p: int, k: int, a) -> "CyclotomicElement":
        return cls.from_terms(p, k, {0: Fraction(a)})

    @classmethod
    def from_poly(cls, p: int, k: int, poly: Poly) -> "CyclotomicElement":
        return cls.from_terms(p, k, dict(enumerate(poly.c)))

    def to_poly(self) -> Poly:
        return Poly(self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element is not in Q")
        return self.coeffs[0]

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def _check(self, other: "CyclotomicElement"):
        if (self.p, self.level) != (other.p, other.level):
            raise ValueError("elements live at different levels")

    def __add__(self, other: "CyclotomicElement") -> "CyclotomicElement":
        self._check(other)
        return CyclotomicElement(self.p, self.level, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return CyclotomicElement(self.p, self.level, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "CyclotomicElement":
        if not isinstance(other, CyclotomicElement):
            return CyclotomicElement(self.p, self.level, tuple(a * other for a in self.coeffs))
        self._check(other)
        terms: dict[int, Fraction] = {}
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        terms[i + j] = terms.get(i + j, Fraction(0)) + a * b
        return CyclotomicElement.from_terms(self.p, self.level, terms)

    __rmul__ = __mul__

    def inv(self) -> "CyclotomicElement":
        """Inverse via the extended Euclidean algorithm over Q[y]."""
        return _inverse_of_poly(self.p, self.level, self.to_poly())

    def galois(self, r: int) -> "CyclotomicElement":
        """Image under zeta -> zeta^r (r prime to p)."""
        if r % self.p == 0:
            raise ValueError("r must be prime to p")
        if self.level == 0:
            return self
        return CyclotomicElement.from_terms(self.p, self.level, {i * r: c for i, c in enumerate(self.coeffs) if c})

    def embed(self, level: int) -> "CyclotomicElement":
        """View an element of a smaller level inside Q(zeta_{p^level})."""
        if level < self.level:
            raise ValueError("can only embed upward")
        s = self.p ** (level - self.level)
        if self.level == 0:
            return CyclotomicElement.rational(self.p, level, self.coeffs[0])
        return CyclotomicElement.from_terms(self.p, level, {i * s: c for i, c in enumerate(self.coeffs) if c})


def _inverse_of_poly(p: int, k: int, poly: Poly) -> CyclotomicElement:
    """Inverse of poly(zeta) for zeta a primitive p^k-th root of unity."""
    if k == 0:
        v = poly(Fraction(1))
        if v == 0:
            raise NotInvertible("element is zero")
        return CyclotomicElement(p, 0, (1 / v,))
    phi = _cyclotomic_modulus(p, k)
    g, s, _ = poly_xgcd(poly, phi)
    if g.degree != 0:
        raise NotInvertible("element is zero")
    return CyclotomicElement.from_poly(p, k, s)


def cyclo_arith(x: CyclotomicElement, y: CyclotomicElement | None, op: str) -> CyclotomicElement:
    """Ring operations in Q(zeta_{p^k}); ``op`` is ``add``, ``mul`` or ``inv``."""
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "inv":
        return x.inv()
    raise ValueError(f"unknown operation {op!r}")


def direct_A(
    f: ExactRationalFunction,
    a,
    b,
    m: int,
    p: int,
    *,
    cap: int = DEFAULT_LEVEL_CAP,
    root_exponent: int = 1,
) -> Fraction:
    """Evaluate p^-m * sum_{zeta^(p^m)=1} (x - a) f(x), x = a + (b - a) zeta, exactly.

    The sum is split by the exact order p^s of each root.  For each s the
    value at one primitive root is computed in Q(zeta_{p^s}) and the other
    primitive roots are reached through Galois automorphisms; every term
    is embedded in Q(zeta_{p^m}) and added there.  ``root_exponent`` picks
    a different primitive root as the starting generator; the result is
    the same rational either way.

    Raises:
        LevelTooLarge: p**m exceeds ``cap``.
        PoleOnSampleSet: some sample point is a pole of f.
    """
    if m < 1:
        raise ValueError("m must be positive")
    if p**m > cap:
        raise LevelTooLarge(f"p^m = {p**m} exceeds cap {cap}")
    if root_exponent % p == 0:
        raise ValueError("root_exponent must be prime to p")
    a, b = Fraction(a), Fraction(b)
    y_to_x = Poly([a, b - a])  # x as a polynomial in the root y
    num = Poly([0, b - a]) * f.numerator.compose(y_to_x)  # (x - a) * numerator
    den = f.denominator.compose(y_to_x)
    total = CyclotomicElement.rational(p, m, 0)
    for s in range(m + 1):
        try:
            dinv = _inverse_of_poly(p, s, den)
        except NotInvertible:
            raise PoleOnSampleSet(f"f has a pole at a primitive {p}^{s}-th sample point") from None
        g = CyclotomicElement.from_poly(p, s, num) * dinv if s else CyclotomicElement(p, 0, (num(Fraction(1)) * dinv.coeffs[0],))
        if s == 0:
            total = total + g.embed(m)
            continue
        q = p**s
        for r in range(1, q):
            if r % p:
                total = total + g.galois(r * root_exponent % q).embed(m)
    if not total.is_rational():
        raise ArithmeticError("Galois descent failed: sum is not rational")
    return total.rational_value() / Fraction(p) ** m
