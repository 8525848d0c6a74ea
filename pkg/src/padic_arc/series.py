"""Functions on arcs: coefficient oracles, partial fractions and builtins.

A :class:`SeriesFunction` is a lazily evaluated power series about the arc
basepoint ``b``.  Rational inputs additionally carry a
:class:`PartialFractions` form, which the integrator uses for closed-form
sums at levels far beyond what the series can reach.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

from .exact_oracle import ExactRationalFunction, Poly
from .numtheory import bernoulli_padic
from .padic_core import INF, NormTooLarge, PadicContext, PadicNumber, _split, teichmuller

__all__ = [
    "PoleInArc",
    "IrrationalPole",
    "UnknownBuiltin",
    "IncompatibleArc",
    "BasepointOutsideArc",
    "NoCertificate",
    "CenterMismatch",
    "Arc",
    "PathSequence",
    "InterlockedFamily",
    "Certificate",
    "SeriesFunction",
    "PoleTerm",
    "PartialFractions",
    "LaurentTail",
    "KrasnerFunction",
    "from_rational",
    "rational_partial_fractions",
    "builtin",
    "BUILTINS",
    "recenter",
    "check_disc_automorphism",
    "log_p",
    "parse_function_spec",
    "series_from_partial_fractions",
]


class PoleInArc(ValueError):
    """f has a pole inside the arc (or too close to tell)."""


class IrrationalPole(ValueError):
    """A denominator root is not rational; such inputs are unsupported."""


class UnknownBuiltin(KeyError):
    """No builtin function with that name."""


class IncompatibleArc(ValueError):
    """The builtin's expansion does not live on this arc."""


class BasepointOutsideArc(ValueError):
    """New basepoint is not in the open disc D^-(b, R)."""


class NoCertificate(ValueError):
    """A tail bound is needed but the function has no growth certificate."""


class CenterMismatch(ValueError):
    """The map does not send a1 to a."""


def log_p(x: Union[int, float, Fraction], p: int) -> float:
    """Real logarithm base p."""
    return math.log(x) / math.log(p)


def _val(x: PadicNumber) -> Union[int, float]:
    return x.valuation


# --------------------------------------------------------------------------
# arcs and path sequences
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Arc:
    """The arc A(a, b) = D^-(b, R) on the circle |x - a|_p = R = |a - b|_p.

    ``a_exact``/``b_exact`` keep rational endpoints when known so that
    higher-precision recomputation is possible.
    """

    a: PadicNumber
    b: PadicNumber
    a_exact: Optional[Fraction] = None
    b_exact: Optional[Fraction] = None

    def __post_init__(self):
        d = self.a - self.b
        if d.is_zero():
            raise ValueError("arc needs a != b")

    @classmethod
    def of(cls, ctx: PadicContext, a, b) -> "Arc":
        """Build from ints, Fractions, strings or PadicNumbers."""
        ae = Fraction(a) if isinstance(a, (int, Fraction, str)) else None
        be = Fraction(b) if isinstance(b, (int, Fraction, str)) else None
        return cls(ctx(a), ctx(b), ae, be)

    @property
    def ctx(self) -> PadicContext:
        return self.a.ctx

    @property
    def p(self) -> int:
        return self.a.ctx.p

    @property
    def radius_valuation(self) -> int:
        """nu_p(a - b); the radius is R = p**(-radius_valuation)."""
        return (self.a - self.b).valuation

    @property
    def R(self) -> Fraction:
        return Fraction(self.p) ** (-self.radius_valuation)

    def a_at(self, ctx: PadicContext) -> PadicNumber:
        return ctx(self.a_exact) if self.a_exact is not None else ctx(self.a)

    def b_at(self, ctx: PadicContext) -> PadicNumber:
        return ctx(self.b_exact) if self.b_exact is not None else ctx(self.b)

    def contains(self, x: PadicNumber) -> bool:
        """Whether |x - b|_p < R; raises PoleInArc if undecidable."""
        d = x - self.b
        rv = self.radius_valuation
        if d.is_zero():
            if d.precision <= rv:
                raise PoleInArc("point too close to the basepoint to classify")
            return True
        return d.valuation > rv

    def __str__(self) -> str:
        a = self.a_exact if self.a_exact is not None else self.a
        b = self.b_exact if self.b_exact is not None else self.b
        return f"A({a}, {b})"


@dataclass(frozen=True)
class PathSequence:
    """Strictly increasing schedule k -> phi(k) of root-of-unity levels.

    Kinds: ``affine`` (alpha + lam*k), ``power`` (alpha + k**mu) and
    ``explicit`` (a listed increasing sequence starting at k0).
    """

    kind: str
    alpha: int = 0
    step: int = 1
    values: tuple = ()
    k0: int = 1

    def __post_init__(self):
        if self.kind not in ("affine", "power", "explicit"):
            raise ValueError(f"unknown path kind {self.kind!r}")
        if self.kind in ("affine", "power") and self.step < 1:
            raise ValueError("lambda and mu must be positive")
        if self.kind == "explicit":
            v = self.values
            if not v or any(x < 1 for x in v) or any(b <= a for a, b in zip(v, v[1:])):
                raise ValueError("explicit path must be positive and strictly increasing")
        k0 = self.k0
        while self.kind != "explicit" and self._raw(k0) < 1:
            k0 += 1
        object.__setattr__(self, "k0", k0)

    @classmethod
    def identity(cls) -> "PathSequence":
        return cls("affine", 0, 1)

    @classmethod
    def affine(cls, alpha: int, lam: int) -> "PathSequence":
        return cls("affine", alpha, lam)

    @classmethod
    def power(cls, alpha: int, mu: int) -> "PathSequence":
        return cls("power", alpha, mu)

    @classmethod
    def explicit(cls, values: Sequence[int], k0: int = 1) -> "PathSequence":
        return cls("explicit", 0, 1, tuple(values), k0)

    def _raw(self, k: int) -> int:
        if self.kind == "affine":
            return self.alpha + self.step * k
        if self.kind == "power":
            return self.alpha + k**self.step
        return self.values[k - self.k0]

    def __call__(self, k: int) -> int:
        if k < self.k0:
            raise ValueError(f"k={k} is below k0={self.k0}")
        if self.kind == "explicit" and k - self.k0 >= len(self.values):
            raise ValueError("explicit path exhausted")
        return self._raw(k)

    def nabla(self, k: int) -> int:
        return self(k + 1) - self(k)

    @property
    def last_k(self) -> Optional[int]:
        return self.k0 + len(self.values) - 1 if self.kind == "explicit" else None

    def __str__(self) -> str:
        if self.kind == "affine":
            if self.alpha == 0 and self.step == 1:
                return "phi(k)=k"
            return f"phi(k)={self.alpha}+{self.step}k"
        if self.kind == "power":
            return f"phi(k)={self.alpha}+k^{self.step}"
        return f"phi={list(self.values)}"


@dataclass(frozen=True)
class InterlockedFamily:
    """A searchable family of path sequences.

    ``phi``: Phi_alpha = {alpha + lam*k : lam >= 1};
    ``psi``: Psi_alpha = {alpha + k**mu : mu >= 1};
    ``singleton``: one fixed sequence.
    """

    kind: str
    alpha: int = 0
    member: Optional[PathSequence] = None

    def __post_init__(self):
        if self.kind not in ("phi", "psi", "singleton"):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == "singleton" and self.member is None:
            raise ValueError("singleton family needs its sequence")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")

    @classmethod
    def phi_alpha(cls, alpha: int = 0) -> "InterlockedFamily":
        return cls("phi", alpha)

    @classmethod
    def psi_alpha(cls, alpha: int = 0) -> "InterlockedFamily":
        return cls("psi", alpha)

    @classmethod
    def singleton(cls, phi: PathSequence) -> "InterlockedFamily":
        return cls("singleton", 0, phi)

    def members(self, max_param: int) -> Iterator[tuple[int, PathSequence]]:
        """Yield (parameter, sequence) in search order."""
        if self.kind == "singleton":
            yield 1, self.member
            return
        for t in range(1, max_param + 1):
            if self.kind == "phi":
                yield t, PathSequence.affine(self.alpha, t)
            else:
                yield t, PathSequence.power(self.alpha, t)

    def __str__(self) -> str:
        if self.kind == "singleton":
            return str(self.member)
        return f"{'Phi' if self.kind == 'phi' else 'Psi'}_{self.alpha}"


# --------------------------------------------------------------------------
# series with growth certificates
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    """Growth bound |c_n|_p R^n < M n^beta for all n > n0."""

    M: Fraction
    beta: Fraction
    n0: int = 0

    @property
    def bounded(self) -> bool:
        return self.beta == 0

    def log_bound(self, n: int, p: int) -> float:
        """log_p of M n^beta."""
        return log_p(self.M, p) + float(self.beta) * (log_p(n, p) if n > 0 else 0.0)

    def holds_at(self, c: PadicNumber, n: int, rv: int) -> bool:
        """Check one coefficient against the bound (R = p**-rv)."""
        if c.is_zero():
            return True
        lhs = -c.valuation - n * rv  # log_p(|c_n| R^n)
        return lhs < self.log_bound(max(n, 1), c.p) - 1e-12


CoeffFn = Callable[[int, PadicContext], PadicNumber]


class SeriesFunction:
    """Power series sum_n c_n (x - center)^n with a lazy coefficient oracle.

    Args:
        ctx: default context for coefficients.
        center: expansion point (the arc basepoint b).
        coeff_fn: ``(n, ctx) -> c_n``.
        certificate: optional growth certificate relative to an arc radius.
        support: optional ``(lo, hi) -> iterable`` of indices that may be nonzero.
        degree: largest nonzero index when the series is finite.
        partial_fractions: closed form for rational inputs.
        name: label used in reports.
    """

    def __init__(
        self,
        ctx: PadicContext,
        center: PadicNumber,
        coeff_fn: CoeffFn,
        certificate: Optional[Certificate] = None,
        *,
        support: Optional[Callable[[int, int], Iterable[int]]] = None,
        degree: Optional[int] = None,
        partial_fractions: Optional["PartialFractions"] = None,
        name: str = "f",
    ):
        self.ctx = ctx
        self.center = center
        self._coeff_fn = coeff_fn
        self.certificate = certificate
        self._support = support
        self.degree = degree
        self.partial_fractions = partial_fractions
        self.name = name
        self._memo: dict[tuple[int, int], PadicNumber] = {}
        self._lock = threading.Lock()

    def coeff(self, n: int, ctx: Optional[PadicContext] = None) -> PadicNumber:
        """c_n, memoised per context precision; safe under concurrency."""
        ctx = ctx or self.ctx
        if n < 0:
            raise ValueError("coefficient index must be nonnegative")
        if self.degree is not None and n > self.degree:
            return ctx.zero()
        key = (n, ctx.N)
        got = self._memo.get(key)
        if got is None:
            val = self._coeff_fn(n, ctx)
            with self._lock:
                got = self._memo.setdefault(key, val)
        return got

    def support(self, lo: int, hi: int) -> Iterable[int]:
        """Indices in [lo, hi) whose coefficient may be nonzero."""
        if self.degree is not None:
            hi = min(hi, self.degree + 1)
        if self._support is None:
            return range(lo, hi)
        return (n for n in self._support(lo, hi) if lo <= n < hi)

    @property
    def sparse(self) -> bool:
        return self._support is not None

    def is_polynomial(self) -> bool:
        return self.degree is not None

    def evaluate(self, x: PadicNumber, max_terms: int = 100000) -> PadicNumber:
        """Direct evaluation of the series (or its closed form) at x."""
        if self.partial_fractions is not None:
            return self.partial_fractions.evaluate(x)
        t = x - self.center
        if self.degree is not None:
            acc = x.ctx.zero()
            for n in range(self.degree, -1, -1):
                acc = acc * t + self.coeff(n, x.ctx)
            return acc
        if self.certificate is None:
            raise NoCertificate("cannot bound the tail of an infinite series")
        vt = t.valuation if not t.is_zero() else t.precision
        acc = x.ctx.zero()
        tn = x.ctx.one()
        for n in range(max_terms):
            c = self.coeff(n, x.ctx)
            acc = acc + c * tn
            tn = tn * t
            if n > self.certificate.n0 and n > 0:
                # remaining terms: |c_m t^m| < M m^beta (|t|/R)^m R^0 ...
                rv = 0
                floor = -self.certificate.log_bound(n + 1, x.p) + (n + 1) * vt
                if floor >= x.ctx.N + 1 and vt > 0:
                    break
        return acc

    def __add__(self, other: "SeriesFunction") -> "SeriesFunction":
        if self.ctx.p != other.ctx.p:
            raise ValueError("different primes")
        if not (self.center - other.center).is_zero():
            raise ValueError("series must share their center")
        cert = None
        if self.certificate and other.certificate:
            cert = Certificate(
                max(self.certificate.M, other.certificate.M),
                max(self.certificate.beta, other.certificate.beta),
                max(self.certificate.n0, other.certificate.n0),
            )
        deg = None
        if self.degree is not None and other.degree is not None:
            deg = max(self.degree, other.degree)
        sup = None
        if self._support is not None and other._support is not None:
            def sup(lo, hi, s=self, o=other):
                return sorted(set(s.support(lo, hi)) | set(o.support(lo, hi)))
        pf = None
        if self.partial_fractions is not None and other.partial_fractions is not None:
            pf = self.partial_fractions + other.partial_fractions
        return SeriesFunction(
            self.ctx, self.center,
            lambda n, ctx: self.coeff(n, ctx) + other.coeff(n, ctx),
            cert, support=sup, degree=deg, partial_fractions=pf,
            name=f"({self.name} + {other.name})",
        )

    def scale(self, c) -> "SeriesFunction":
        """c * f for a p-adic or rational constant c."""
        cc = self.ctx(c)
        cert = None
        if self.certificate is not None:
            factor = cc.norm if not cc.is_zero() else Fraction(1)
            cert = Certificate(self.certificate.M * max(factor, Fraction(1)), self.certificate.beta, self.certificate.n0)
        pf = self.partial_fractions.scale(cc) if self.partial_fractions is not None else None
        return SeriesFunction(
            self.ctx, self.center, lambda n, ctx: ctx(c) * self.coeff(n, ctx) if not isinstance(c, PadicNumber) else c * self.coeff(n, ctx),
            cert, support=self._support, degree=self.degree, partial_fractions=pf, name=f"{c}*{self.name}",
        )

    def __repr__(self) -> str:
        return f"SeriesFunction({self.name}, p={self.ctx.p})"


# --------------------------------------------------------------------------
# partial fractions with p-adic poles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PoleTerm:
    """coeff / (x - center)**order with order >= 1."""

    center: PadicNumber
    order: int
    coeff: PadicNumber
    center_exact: Optional[Fraction] = None
    coeff_exact: Optional[Fraction] = None


def _binom_signed(m: int, n: int) -> int:
    """C(-m, n) = (-1)^n C(m + n - 1, n)."""
    return (-1) ** n * math.comb(m + n - 1, n)


@dataclass(frozen=True)
class PartialFractions:
    """Polynomial plus finitely many pole terms, all over Q_p.

    The polynomial part is stored as coefficients about ``poly_center``.
    """

    ctx: PadicContext
    poly: tuple = ()
    poles: tuple = ()
    poly_center: Optional[PadicNumber] = None
    exact_poly: Optional[Poly] = None

    def _pc(self) -> PadicNumber:
        return self.poly_center if self.poly_center is not None else self.ctx.zero()

    def evaluate(self, x: PadicNumber) -> PadicNumber:
        acc = x.ctx.zero()
        t = x - self._pc()
        for c in reversed(self.poly):
            acc = acc * t + c
        for pt in self.poles:
            d = x - pt.center
            acc = acc + pt.coeff / d**pt.order
        return acc

    def __add__(self, other: "PartialFractions") -> "PartialFractions":
        a = self.poly_coeffs_about(self._pc())
        b = other.poly_coeffs_about(self._pc())
        n = max(len(a), len(b))
        z = self.ctx.zero()
        poly = tuple((a[i] if i < len(a) else z) + (b[i] if i < len(b) else z) for i in range(n))
        return PartialFractions(self.ctx, poly, self.poles + other.poles, self.poly_center)

    def scale(self, c: PadicNumber) -> "PartialFractions":
        return PartialFractions(
            self.ctx, tuple(c * x for x in self.poly),
            tuple(PoleTerm(t.center, t.order, c * t.coeff, t.center_exact) for t in self.poles),
            self.poly_center,
        )

    def poly_coeffs_about(self, b: PadicNumber) -> list[PadicNumber]:
        """Taylor coefficients of the polynomial part about b."""
        t = b - self._pc()
        d = len(self.poly)
        out = []
        for n in range(d):
            s = b.ctx.zero()
            for k in range(n, d):
                s = s + self.poly[k] * math.comb(k, n) * t ** (k - n)
            out.append(s)
        return out

    def coeff_about(
        self, b: PadicNumber, n: int, ctx: PadicContext, b_exact: Optional[Fraction] = None
    ) -> PadicNumber:
        """n-th Taylor coefficient about b (b must not be a pole).

        With ``b_exact`` and exact pole data the inverses (b - r)^-1 are taken
        from exact rationals, so no relative precision is lost.
        """
        acc = ctx.zero()
        if self.exact_poly is not None and b_exact is not None:
            if n <= self.exact_poly.degree:
                acc = acc + ctx(self.exact_poly.taylor(b_exact)[n])
        elif n < len(self.poly):
            acc = acc + ctx(self.poly_coeffs_about(ctx(b))[n])
        for pt in self.poles:
            if b_exact is not None and pt.center_exact is not None:
                inv = ctx(1 / (b_exact - pt.center_exact))
            else:
                inv = ctx.one() / (ctx(b) - ctx(pt.center))
            e = ctx(pt.coeff_exact) if pt.coeff_exact is not None else ctx(pt.coeff)
            acc = acc + e * _binom_signed(pt.order, n) * inv ** (pt.order + n)
        return acc

    def divide_by_linear_power(self, z: PadicNumber, k: int) -> "PartialFractions":
        """Partial fractions of self(x) / (x - z)**k."""
        ctx = self.ctx
        new_poles: list[PoleTerm] = []
        zpole = [ctx.zero() for _ in range(k)]  # zpole[j] multiplies (x - z)^(j - k)
        for pt in self.poles:
            rz = pt.center - z
            if rz.is_zero():
                raise ValueError("z coincides with an existing pole")
            # (x - z)^-k about r: sum_j C(-k, j) (r - z)^(-k - j) (x - r)^j
            for j in range(pt.order):
                g = _binom_signed(k, j) / rz ** (k + j)
                new_poles.append(PoleTerm(pt.center, pt.order - j, pt.coeff * g, pt.center_exact))
            # (x - r)^-m about z: sum_j C(-m, j) (z - r)^(-m - j) (x - z)^j
            zr = -rz
            for j in range(k):
                h = _binom_signed(pt.order, j) / zr ** (pt.order + j)
                zpole[j] = zpole[j] + pt.coeff * h
        coeffs = self.poly_coeffs_about(z)
        for j, c in enumerate(coeffs):
            if j < k:
                zpole[j] = zpole[j] + c
        poly = tuple(coeffs[k:])
        for j in range(k):
            if not zpole[j].is_zero():
                new_poles.append(PoleTerm(z, k - j, zpole[j]))
        return PartialFractions(ctx, poly, tuple(new_poles), z)

    def residue_at(self, x0: PadicNumber) -> PadicNumber:
        """Sum of 1/(x - x0) coefficients over poles equal to x0."""
        acc = self.ctx.zero()
        for pt in self.poles:
            if pt.order == 1 and (pt.center - x0).is_zero():
                acc = acc + pt.coeff
        return acc


def _rational_roots(den: Poly) -> list[tuple[Fraction, int]]:
    """Rational roots with multiplicity; raises IrrationalPole otherwise."""
    import sympy

    x = sympy.Symbol("x")
    expr = sum(sympy.Rational(c.numerator, c.denominator) * x**i for i, c in enumerate(den.c))
    _, factors = sympy.factor_list(sympy.Poly(expr, x, domain="QQ"))
    roots = []
    for fac, mult in factors:
        if fac.degree() == 0:
            continue
        if fac.degree() != 1:
            raise IrrationalPole(f"denominator factor {fac.as_expr()} has no rational root")
        c1, c0 = (sympy.Rational(v) for v in fac.all_coeffs())
        r = -c0 / c1
        roots.append((Fraction(int(r.p), int(r.q)), int(mult)))
    return roots


def _series_quotient(num: Poly, den: Poly, terms: int) -> list[Fraction]:
    """First ``terms`` coefficients of num/den as a power series (den(0) != 0)."""
    out = []
    d0 = den[0]
    for i in range(terms):
        s = num[i] - sum(den[j] * out[i - j] for j in range(1, i + 1))
        out.append(s / d0)
    return out


def rational_partial_fractions(f: ExactRationalFunction) -> tuple[Poly, list[tuple[Fraction, int, Fraction]]]:
    """Exact decomposition f = P + sum e / (x - r)^m over Q.

    Raises:
        IrrationalPole: the denominator does not split over Q.
    """
    q, rem = f.numerator.divmod(f.denominator)
    if f.denominator.degree == 0:
        return f.numerator * (1 / f.denominator.lead()), []
    roots = _rational_roots(f.denominator)
    terms = []
    for r, m in roots:
        lin = Poly([-r, 1]) ** m
        other, zero = f.denominator.divmod(lin)
        assert zero.is_zero()
        shift = Poly([r, 1])
        coeffs = _series_quotient(rem.compose(shift), other.compose(shift), m)
        for j, e in enumerate(coeffs):
            if e != 0:
                terms.append((r, m - j, e))
    return q, terms


def _pf_from_rational(f: ExactRationalFunction, ctx: PadicContext) -> PartialFractions:
    poly, terms = rational_partial_fractions(f)
    return PartialFractions(
        ctx, tuple(ctx(c) for c in poly.c),
        tuple(PoleTerm(ctx(r), m, ctx(e), r, e) for r, m, e in terms),
        None, poly,
    )


def _pf_certificate(pf: PartialFractions, arc: Arc) -> Certificate:
    p = arc.p
    rv = arc.radius_valuation
    logs = []
    for n, c in enumerate(pf.poly_coeffs_about(arc.b)):
        if not c.is_zero():
            logs.append(-c.valuation - n * rv)
    for pt in pf.poles:
        vbr = (arc.b - pt.center).valuation
        if not pt.coeff.is_zero():
            logs.append(-pt.coeff.valuation + pt.order * vbr)
    top = max(logs) if logs else 0
    return Certificate(Fraction(p) ** (int(math.floor(top)) + 1), Fraction(0), 0)


def _check_poles_off_arc(pf: PartialFractions, arc: Arc) -> None:
    for pt in pf.poles:
        if arc.contains(pt.center):
            raise PoleInArc(f"pole at {pt.center_exact if pt.center_exact is not None else pt.center} lies in {arc}")


def from_rational(f: ExactRationalFunction, arc: Arc, ctx: Optional[PadicContext] = None) -> SeriesFunction:
    """Series about the arc basepoint for a rational function without poles in the arc.

    Raises:
        PoleInArc: a pole lies in D^-(b, R).
        IrrationalPole: the denominator does not split over Q.
    """
    ctx = ctx or arc.ctx
    pf = _pf_from_rational(f, ctx)
    _check_poles_off_arc(pf, arc)
    cert = _pf_certificate(pf, arc)
    deg = f.numerator.degree if f.is_polynomial() else None
    if f.is_polynomial():
        exact = f.numerator.taylor(arc.b_exact) if arc.b_exact is not None else None

        def coeff(n, c, pf=pf, exact=exact):
            if exact is not None:
                return c(exact[n]) if n < len(exact) else c.zero()
            return pf.coeff_about(arc.b_at(c), n, c, arc.b_exact)
    else:
        def coeff(n, c, pf=pf):
            return pf.coeff_about(arc.b_at(c), n, c, arc.b_exact)

    return SeriesFunction(ctx, arc.b, coeff, cert, degree=deg, partial_fractions=pf, name=str(f))


def series_from_partial_fractions(pf: PartialFractions, arc: Arc, name: str = "f") -> SeriesFunction:
    """Series about the arc basepoint for an already decomposed function."""
    _check_poles_off_arc(pf, arc)
    cert = _pf_certificate(pf, arc)
    deg = len(pf.poly) - 1 if not pf.poles else None
    return SeriesFunction(
        pf.ctx, arc.b, lambda n, c: pf.coeff_about(arc.b_at(c), n, c, arc.b_exact), cert,
        degree=deg if deg is not None and deg >= 0 else (0 if not pf.poles else None),
        partial_fractions=pf, name=name,
    )


# --------------------------------------------------------------------------
# Krasner functions: holomorphic part plus Laurent tails
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LaurentTail:
    """sum_n coeffs[n] / (x - center)^n over n >= 1 (finitely many terms)."""

    center: PadicNumber
    coeffs: dict
    inner_radius_valuation: int = 1

    @property
    def residue(self) -> PadicNumber:
        c = self.coeffs.get(1)
        return c if c is not None else self.center.ctx.zero()


@dataclass(frozen=True)
class KrasnerFunction:
    """Holomorphic part on D^+(a, R) plus finitely many Laurent tails.

    ``holo`` is a PartialFractions whose poles (if any) lie outside the domain.
    """

    holo: PartialFractions
    tails: tuple = ()

    @property
    def ctx(self) -> PadicContext:
        return self.holo.ctx

    def partial_fractions(self) -> PartialFractions:
        poles = list(self.holo.poles)
        for t in self.tails:
            for n, c in sorted(t.coeffs.items()):
                if not c.is_zero():
                    poles.append(PoleTerm(t.center, n, c))
        return PartialFractions(self.holo.ctx, self.holo.poly, tuple(poles), self.holo.poly_center)

    def evaluate(self, x: PadicNumber) -> PadicNumber:
        return self.partial_fractions().evaluate(x)

    def residue(self, i: int) -> PadicNumber:
        return self.tails[i].residue


# --------------------------------------------------------------------------
# builtins
# --------------------------------------------------------------------------


def _require_origin_unit_arc(arc: Arc, name: str, *, unit_radius: bool = True) -> None:
    if not arc.b.is_zero():
        raise IncompatibleArc(f"{name} is expanded about 0; the arc basepoint must be 0")
    rv = arc.radius_valuation
    if unit_radius and rv != 0:
        raise IncompatibleArc(f"{name} needs an arc of radius 1, got radius {arc.R}")
    if rv < 0:
        raise IncompatibleArc(f"{name} diverges on arcs of radius {arc.R}")


def _log1m(arc: Arc, params) -> SeriesFunction:
    _require_origin_unit_arc(arc, "log1m")
    # c_n = -1/n; |1/n|_p <= n < 2n, so order 1 with M = 2
    return SeriesFunction(
        arc.ctx, arc.b, lambda n, c: c.zero() if n == 0 else c(Fraction(-1, n)),
        Certificate(Fraction(2), Fraction(1), 0), name="log(1-x)",
    )


def _p_power_support(p: int, offset: int = -1, start_t: int = 0):
    def sup(lo: int, hi: int):
        t = start_t
        while True:
            n = p**t + offset
            if n >= hi:
                return
            if n >= lo:
                yield n
            t += 1
    return sup


def _artin_hasse(arc: Arc, params) -> SeriesFunction:
    _require_origin_unit_arc(arc, "artin_hasse_loderiv")
    p = arc.p

    def coeff(n, c):
        m = n + 1
        while m % p == 0:
            m //= p
        return c.one() if m == 1 else c.zero()

    return SeriesFunction(
        arc.ctx, arc.b, coeff, Certificate(Fraction(2), Fraction(0), 0),
        support=_p_power_support(p), name="(E'/E)(x)",
    )


def _binom_t(arc: Arc, params) -> SeriesFunction:
    _require_origin_unit_arc(arc, "binom_t", unit_radius=False)
    t = Fraction(params[0]) if params else Fraction(1, 2)
    p = arc.p
    if t.denominator % p == 0:
        raise ValueError("binom_t needs t in Z_p")
    # C(t, n) as (valuation, unit mod p^W); exact rationals grow too fast
    state = {"W": 0, "rows": []}
    lock = threading.Lock()

    def _rebuild(W):
        state["W"], state["rows"] = W, [(0, 1)]

    def _extend(n):
        rows, mod = state["rows"], p ** state["W"]
        v, u = rows[-1]
        while len(rows) <= n:
            k = len(rows)
            num = t.numerator - (k - 1) * t.denominator
            if num == 0 or v == INF:
                rows.append((INF, 0))
                v, u = INF, 0
                continue
            dv, a = _split(num, p)
            ev, b = _split(k, p)
            v += dv - ev
            u = u * a * pow(b * t.denominator, -1, mod) % mod
            rows.append((v, u))

    def coeff(n, c):
        with lock:
            if state["W"] < c.N:
                _rebuild(max(c.N, 2 * state["W"]))
            _extend(n)
            v, u = state["rows"][n]
            W = state["W"]
        if v == INF:
            return c.zero()
        return PadicNumber._make(c, v, u, v + W)

    rv = arc.radius_valuation
    # |C(t, n)|_p <= 1 for t in Z_p, and R <= 1
    return SeriesFunction(arc.ctx, arc.b, coeff, Certificate(Fraction(2), Fraction(0), 0), name=f"(1+x)^({t})")


def _bernoulli_psi(arc: Arc, params) -> SeriesFunction:
    _require_origin_unit_arc(arc, "bernoulli_psi")
    j = int(params[0]) if params else 2
    if j < 2:
        raise ValueError("bernoulli_psi needs j >= 2")
    p = arc.p

    def coeff(n, c):
        if n < j - 2:
            return c.zero()
        return bernoulli_padic(n - j + 2, c)

    # von Staudt-Clausen: |B_m|_p <= p < p + 1
    return SeriesFunction(
        arc.ctx, arc.b, coeff, Certificate(Fraction(p + 1), Fraction(0), 0),
        name=f"x^{j - 3} psi'(1/x)",
    )


def _gap_series(arc: Arc, params) -> SeriesFunction:
    """sum_m L_m (a-b)^(-p^phi(m)) (x-b)^(p^phi(m) - 1) with phi(m) = m^mu."""
    mu = int(params[0]) if params else 2
    rule = params[1] if len(params) > 1 else Fraction(1)
    L = rule if callable(rule) else (lambda m, v=Fraction(rule): v)
    p = arc.p
    phi = PathSequence.power(0, mu)
    idx: dict[int, int] = {}
    m = 1
    while phi(m) < 64:
        idx[p ** phi(m) - 1] = m
        m += 1

    def lookup(n):
        t = n + 1
        e = 0
        while t % p == 0:
            t //= p
            e += 1
        if t != 1:
            return None
        m = round(e ** (1.0 / mu))
        for cand in (m - 1, m, m + 1):
            if cand >= 1 and phi(cand) == e:
                return cand
        return None

    def coeff(n, c):
        m = lookup(n)
        if m is None:
            return c.zero()
        ab = arc.a_at(c) - arc.b_at(c)
        return c(L(m)) / ab ** (n + 1)

    def support(lo, hi):
        m = 1
        while True:
            n = p ** phi(m) - 1
            if n >= hi:
                return
            if n >= lo:
                yield n
            m += 1

    rv = arc.radius_valuation
    # |c_n| R^n = |L_m| / R with |L_m|_p <= 1
    return SeriesFunction(
        arc.ctx, arc.b, coeff, Certificate(Fraction(p) ** (rv + 1), Fraction(0), 0),
        support=support, name=f"gap series phi(m)=m^{mu}",
    )


BUILTINS: dict[str, Callable[[Arc, tuple], SeriesFunction]] = {
    "log1m": _log1m,
    "artin_hasse_loderiv": _artin_hasse,
    "binom_t": _binom_t,
    "bernoulli_psi": _bernoulli_psi,
    "gap_series": _gap_series,
}


def builtin(name: str, params: Sequence = (), arc: Optional[Arc] = None) -> SeriesFunction:
    """Named series from the function library.

    Names: ``log1m`` (log(1-x)), ``artin_hasse_loderiv`` (sum x^(p^n - 1)),
    ``binom_t`` ((1+x)^t, param t), ``bernoulli_psi`` (sum B_(n-j+2) x^n,
    param j), ``gap_series`` (params mu and the limit rule L).
    """
    if arc is None:
        raise ValueError("an arc is required")
    try:
        make = BUILTINS[name]
    except KeyError:
        raise UnknownBuiltin(name) from None
    return make(arc, tuple(params))


# --------------------------------------------------------------------------
# recentering and disc automorphisms
# --------------------------------------------------------------------------


def recenter(f: SeriesFunction, arc: Arc, b_new: PadicNumber, window: int) -> SeriesFunction:
    """Re-expand f about b_new using ``window`` terms of each inner sum.

    c'_n = sum_{m < window} c_{n+m} C(n+m, n) (b_new - b)^m.  The omitted
    part is bounded through the certificate and folded into the precision
    of each c'_n.

    Raises:
        BasepointOutsideArc: |b_new - b|_p >= R.
        NoCertificate: infinite series without a growth certificate.
    """
    rv = arc.radius_valuation
    d = b_new - f.center
    if not d.is_zero() and d.valuation <= rv:
        raise BasepointOutsideArc("new basepoint must satisfy |b' - b|_p < R")
    if f.degree is None and f.certificate is None:
        raise NoCertificate("recentering an infinite series needs a certificate")
    cert = f.certificate
    p = arc.p
    vt = (d.valuation - rv) if not d.is_zero() else INF  # nu_p of t = d/(a - b)

    def coeff(n, ctx):
        dd = ctx(d)
        span = window
        if cert is not None and f.degree is None:
            span = max(window, cert.n0 - n + 1)
        if f.degree is not None:
            span = min(span, f.degree - n + 1)
        acc = ctx.zero()
        if span <= 0:
            return acc
        for m in range(span):
            term = f.coeff(n + m, ctx) * math.comb(n + m, n)
            if m:
                if dd.is_zero():
                    break
                term = term * dd**m
            acc = acc + term
        if f.degree is not None and n + span > f.degree:
            return acc
        if vt == INF:
            return acc
        # omitted m >= span: |c_{n+m}| C |d|^m < M (n+m)^beta |t|^m R^-n
        worst = min(
            -cert.log_bound(n + m, p) + m * vt + n * rv for m in range(span, span + 64)
        )
        return acc.with_precision(int(math.floor(worst)))

    new_cert = None
    if cert is not None:
        j0 = cert.n0
        if vt != INF and cert.beta > 0:
            j0 = max(j0, int(math.ceil(float(cert.beta) / (vt * math.log(p)))) + 1)
        new_cert = Certificate(cert.M, cert.beta, j0)
    return SeriesFunction(f.ctx, b_new, coeff, new_cert, degree=f.degree, name=f"{f.name} about b'")


def check_disc_automorphism(
    coeffs: Sequence, a1: PadicNumber, R_val: int, a: PadicNumber, r_val: int
) -> tuple[bool, dict]:
    """Decide whether x(t) = sum coeffs[k] t^k maps D^+(a1, R) onto D^+(a, r) bijectively.

    Radii are given by valuations: R = p**-R_val, r = p**-r_val.  The map
    is written a + gamma (t - a1) + g(t); the test is |gamma|_p = r/R and
    sup |g| < r on D^+(a1, R), the sup being max_k |g_k|_p R^k.

    Raises:
        CenterMismatch: x(a1) != a.
    """
    ctx = a1.ctx
    cs = [ctx(c) for c in coeffs]
    # Taylor coefficients about a1
    about = []
    for n in range(len(cs)):
        s = ctx.zero()
        for k in range(n, len(cs)):
            s = s + cs[k] * math.comb(k, n) * a1 ** (k - n)
        about.append(s)
    while len(about) < 2:
        about.append(ctx.zero())
    if not (about[0] - a).is_zero():
        raise CenterMismatch("map(a1) differs from a")
    gamma = about[1]
    g = about[2:]
    gamma_ok = (not gamma.is_zero()) and gamma.valuation == r_val - R_val
    g_ok = all(c.is_zero() or c.valuation + (k + 2) * R_val > r_val for k, c in enumerate(g))
    g_norm_val = min((c.valuation + (k + 2) * R_val for k, c in enumerate(g) if not c.is_zero()), default=INF)
    return gamma_ok and g_ok, {"gamma": gamma, "g": [ctx.zero(), ctx.zero()] + g, "g_sup_valuation": g_norm_val}


def parse_function_spec(spec: str, arc: Arc) -> SeriesFunction:
    """Build a function from ``rat:<expr>`` or ``builtin:<name>[:<p1>,<p2>...]``.

    Builtin parameters are rationals written ``n/d``.
    """
    from .exact_oracle import parse_rational_function

    kind, _, rest = spec.partition(":")
    if kind == "rat":
        if not rest:
            raise ValueError("empty rational function")
        return from_rational(parse_rational_function(rest), arc)
    if kind == "builtin":
        name, _, params = rest.partition(":")
        vals = []
        for tok in filter(None, (t.strip() for t in params.split(","))):
            try:
                vals.append(Fraction(tok))
            except ValueError:
                raise ValueError(f"bad builtin parameter {tok!r}") from None
        return builtin(name, tuple(vals), arc)
    raise ValueError(f"function spec must start with 'rat:' or 'builtin:', got {spec!r}")
