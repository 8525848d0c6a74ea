"""Residue, Goursat and Cauchy formulas on holey discs.

A :class:`HoleyDomain` is a closed disc D^+(a, R) with finitely many open
holes D^-(x_i, rho_i) removed.  Holes with rho_i = R are *large*; they are
listed first.  Functions are given in partial-fraction form, each pole
lying in some hole or outside the closed disc.

All radii are passed as valuations: a radius p**-v is stored as ``v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .integrator import GeometryViolation, integrate_limit, integrate_partial_fractions
from .padic_core import (
    INF,
    PadicContext,
    PadicMatrix,
    PadicNumber,
    omega_power,
    solve_linear,
)
from .series import (
    Arc,
    InterlockedFamily,
    KrasnerFunction,
    PartialFractions,
    SeriesFunction,
    series_from_partial_fractions,
)

__all__ = [
    "LargeHolePresent",
    "UnitDeterminantViolated",
    "ZOnArc",
    "NotClosedDiscHolomorphic",
    "ZOutsideDStar",
    "DeterminantZero",
    "Hole",
    "HoleyDomain",
    "GoursatWeights",
    "weight",
    "residue_krasner",
    "goursat_small",
    "det_D",
    "goursat_large",
    "cauchy_eval_disc",
    "cauchy_coefficients",
    "cauchy_formula_holes",
    "choose_a0",
    "cauchy_one_large_hole",
    "max_modulus_check",
]


class LargeHolePresent(ValueError):
    """The formula needs every hole to be smaller than the disc."""


class UnitDeterminantViolated(ArithmeticError):
    """|det D|_p != 1 for a configuration where it must be a unit."""


class ZOnArc(ValueError):
    """z lies on an integration arc."""


class NotClosedDiscHolomorphic(ValueError):
    """f has a pole in the closed disc."""


class ZOutsideDStar(ValueError):
    """z is not in D^-(xbar, r*)."""


class DeterminantZero(ArithmeticError):
    """The 2x2 determinant vanishes for the chosen a0."""


def _val(x: PadicNumber) -> Union[int, float]:
    return INF if x.is_zero() else x.valuation


def _as_pf(f) -> PartialFractions:
    if isinstance(f, PartialFractions):
        return f
    if isinstance(f, KrasnerFunction):
        return f.partial_fractions()
    if isinstance(f, SeriesFunction) and f.partial_fractions is not None:
        return f.partial_fractions
    raise TypeError("expected a PartialFractions, KrasnerFunction or rational SeriesFunction")


def weight(center: PadicNumber, base: PadicNumber, point: PadicNumber, alpha: int = 0) -> PadicNumber:
    """1 / (1 - omega^(p^alpha)((center - point)/(center - base)))."""
    ctx = center.ctx
    w = omega_power((center - point) / (center - base), alpha)
    return ctx.one() / (ctx.one() - w)


@dataclass(frozen=True)
class Hole:
    """Open hole D^-(center, p**-rho_val); its arc is A(center, base) of radius p**-r_val."""

    center: PadicNumber
    rho_val: int
    r_val: int
    base: PadicNumber

    @property
    def arc(self) -> Arc:
        return Arc(self.center, self.base)


@dataclass(frozen=True)
class HoleyDomain:
    """D^+(a, p**-R_val) minus the holes, with outer arc A(a, b)."""

    a: PadicNumber
    R_val: int
    b: PadicNumber
    holes: tuple = ()

    def __post_init__(self):
        self.validate()

    @property
    def ctx(self) -> PadicContext:
        return self.a.ctx

    @property
    def arc(self) -> Arc:
        return Arc(self.a, self.b)

    @property
    def large(self) -> list[Hole]:
        return [h for h in self.holes if h.rho_val == self.R_val]

    @property
    def small(self) -> list[Hole]:
        return [h for h in self.holes if h.rho_val > self.R_val]

    def validate(self) -> None:
        R = self.R_val
        if _val(self.a - self.b) != R:
            raise GeometryViolation("|a - b|_p must equal R")
        seen_small = False
        for h in self.holes:
            if not (h.rho_val >= h.r_val >= R):
                raise GeometryViolation("need rho_i <= r_i <= R")
            if _val(h.center - self.a) < R:
                raise GeometryViolation("hole centre outside the disc")
            if _val(h.base - h.center) != h.r_val:
                raise GeometryViolation("hole basepoint must satisfy |b_i - x_i| = r_i")
            if _val(self.b - h.center) > R:
                raise GeometryViolation("the outer arc may not contain a hole centre")
            if h.rho_val == R:
                if seen_small:
                    raise GeometryViolation("large holes must be listed first")
                if h.r_val != R:
                    raise GeometryViolation("a large hole uses the full radius")
            else:
                seen_small = True
        for i, h in enumerate(self.holes):
            for g in self.holes[i + 1:]:
                d = _val(h.center - g.center)
                if h.rho_val == R or g.rho_val == R:
                    if d != R:
                        raise GeometryViolation("large holes must sit in their own residue discs")
                elif not d < min(h.r_val, g.r_val):
                    raise GeometryViolation("hole circles overlap")
        for h in self.large:
            for g in self.holes:
                if g is not h and _val(g.center - h.base) > R:
                    raise GeometryViolation("a large-hole arc may not contain another hole centre")

    def hole_of(self, x: PadicNumber) -> Optional[int]:
        """Index of the hole containing x, or None."""
        for i, h in enumerate(self.holes):
            if _val(x - h.center) > h.rho_val:
                return i
        return None


@dataclass
class GoursatWeights:
    """Weights mu_i with int_A(a,b) f = sum_i mu_i int_A(x_i,b_i) f."""

    mu: list
    lhs: PadicNumber
    rhs: PadicNumber

    @property
    def agreement(self) -> Union[int, float]:
        return self.lhs.agreement(self.rhs)


def _check_poles(pf: PartialFractions, dom: HoleyDomain) -> list:
    """Hole index of each pole (None for poles outside the closed disc)."""
    out = []
    for pt in pf.poles:
        i = dom.hole_of(pt.center)
        if i is None and _val(pt.center - dom.a) >= dom.R_val:
            raise GeometryViolation("f has a pole in the domain")
        out.append(i)
    return out


def _hole_residues(pf: PartialFractions, dom: HoleyDomain) -> list[PadicNumber]:
    res = [dom.ctx.zero() for _ in dom.holes]
    for pt, i in zip(pf.poles, _check_poles(pf, dom)):
        if i is not None and pt.order == 1:
            res[i] = res[i] + pt.coeff
    return res


def residue_krasner(f, domain: HoleyDomain, alpha: int = 0) -> PadicNumber:
    """Residue theorem: sum_i c_(1,i) / (1 - omega^(p^alpha)((a - x_i)/(a - b))).

    Raises:
        LargeHolePresent: some hole has radius R.
    """
    if domain.large:
        raise LargeHolePresent("residue formula needs all holes smaller than R")
    pf = _as_pf(f)
    res = _hole_residues(pf, domain)
    total = domain.ctx.zero()
    for h, c in zip(domain.holes, res):
        total = total + weight(domain.a, domain.b, h.center, alpha) * c
    return total


def goursat_small(f, domain: HoleyDomain, alpha: int = 0) -> GoursatWeights:
    """Goursat with small holes: mu_i = 1/(1 - omega((a - x_i)/(a - b))).

    Raises:
        LargeHolePresent: some hole has radius R.
    """
    if domain.large:
        raise LargeHolePresent("use goursat_large when a hole has radius R")
    pf = _as_pf(f)
    _check_poles(pf, domain)
    mu = [weight(domain.a, domain.b, h.center, alpha) for h in domain.holes]
    lhs = integrate_partial_fractions(pf, domain.arc, alpha)
    rhs = domain.ctx.zero()
    for m, h in zip(mu, domain.holes):
        rhs = rhs + m * integrate_partial_fractions(pf, h.arc, alpha)
    return GoursatWeights(mu, lhs, rhs)


def _D_matrix(points: Sequence[PadicNumber], bases: Sequence[PadicNumber], alpha: int) -> PadicMatrix:
    n = len(points)
    ctx = points[0].ctx
    rows = [[weight(points[i], bases[i], points[j], alpha) for j in range(n)] for i in range(n)]
    return PadicMatrix(rows, ctx)


def det_D(points: Sequence[PadicNumber], bases: Sequence[PadicNumber], alpha: int = 0) -> PadicNumber:
    """det[1/(1 - omega^(p^alpha)((x_i - x_j)/(x_i - b_i)))], required to be a unit.

    Requires |x_i - x_j| = |b_i - b_j| = R for i != j and |x_i - b_j| = R
    for all i, j; so 2n distinct residue classes are needed and n <= p/2.

    Raises:
        GeometryViolation: the distance conditions fail.
        UnitDeterminantViolated: |det|_p != 1.
    """
    n = len(points)
    if n == 0 or len(bases) != n:
        raise ValueError("need matching nonempty point and basepoint lists")
    R = _val(points[0] - bases[0])
    for i in range(n):
        for j in range(n):
            if _val(points[i] - bases[j]) != R:
                raise GeometryViolation("need |x_i - b_j| = R for all i, j")
            if i != j and (_val(points[i] - points[j]) != R or _val(bases[i] - bases[j]) != R):
                raise GeometryViolation("need |x_i - x_j| = |b_i - b_j| = R for i != j")
    d = _D_matrix(points, bases, alpha).det()
    if d.is_zero() or d.valuation != 0:
        raise UnitDeterminantViolated(f"|det D|_p = {d.norm}")
    return d


def _system_matrix(domain: HoleyDomain, first_col: Optional[list], alpha: int) -> PadicMatrix:
    """Rows for i <= m use circle weights, rows for small holes are unit rows."""
    ctx = domain.ctx
    m = len(domain.large)
    centers = [domain.a] + [h.center for h in domain.holes]
    bases = [domain.b] + [h.base for h in domain.holes]
    M = len(domain.holes)
    rows = []
    for i in range(M + 1):
        row = [] if first_col is None else [first_col[i]]
        for j in range(1, M + 1):
            if i <= m:
                row.append(weight(centers[i], bases[i], centers[j], alpha))
            else:
                row.append(ctx.one() if i == j else ctx.zero())
        rows.append(row)
    return PadicMatrix(rows, ctx)


def goursat_large(f, domain: HoleyDomain, alpha: int = 0) -> GoursatWeights:
    """Goursat with large holes; the weights solve a linear system.

    The hole integrals determine the hole residues c through I = K c
    (rows 1..m weighted, rows for small holes trivial), and the outer
    integral is w . c, so mu = K^(-T) w.
    """
    pf = _as_pf(f)
    _check_poles(pf, domain)
    ctx = domain.ctx
    M = len(domain.holes)
    if M == 0:
        return GoursatWeights([], integrate_partial_fractions(pf, domain.arc, alpha), ctx.zero())
    K = _system_matrix(domain, None, alpha)
    # drop row 0 (the outer circle): rows 1..M form K
    Kh = [[K[i, j] for j in range(M)] for i in range(1, M + 1)]
    w = [weight(domain.a, domain.b, h.center, alpha) for h in domain.holes]
    KT = PadicMatrix([[Kh[j][i] for j in range(M)] for i in range(M)], ctx)
    mu = solve_linear(KT, w)
    lhs = integrate_partial_fractions(pf, domain.arc, alpha)
    rhs = ctx.zero()
    for m_i, h in zip(mu, domain.holes):
        rhs = rhs + m_i * integrate_partial_fractions(pf, h.arc, alpha)
    return GoursatWeights(mu, lhs, rhs)


def _disc_pf(f, arc: Arc) -> PartialFractions:
    if isinstance(f, SeriesFunction) and f.partial_fractions is None:
        if f.degree is None:
            raise NotClosedDiscHolomorphic("need a polynomial or a rational function")
        ctx = arc.ctx
        coeffs = tuple(f.coeff(n, ctx) for n in range(f.degree + 1))
        return PartialFractions(ctx, coeffs, (), f.center)
    pf = _as_pf(f)
    rv = arc.radius_valuation
    for pt in pf.poles:
        if _val(pt.center - arc.a) >= rv:
            raise NotClosedDiscHolomorphic("f has a pole in the closed disc")
    return pf


def cauchy_eval_disc(
    f,
    arc: Arc,
    z: PadicNumber,
    alpha: int = 0,
    n: int = 0,
    *,
    method: str = "residue",
    target_precision: int = 12,
) -> PadicNumber:
    """f^(n)(z) = n! (1 - omega^(p^alpha)((a - z)/(a - b))) int f(x)/(x - z)^(n+1) dx.

    ``method="residue"`` takes the integral in closed form;
    ``method="limit"`` takes it as the limit of A(k).

    Raises:
        ZOnArc: z lies in the arc.
        NotClosedDiscHolomorphic: f has a pole in D^+(a, R).
    """
    rv = arc.radius_valuation
    if _val(z - arc.a) < rv:
        raise GeometryViolation("z must lie in the closed disc D^+(a, R)")
    if _val(z - arc.b) > rv:
        raise ZOnArc("z lies on the integration arc")
    pf = _disc_pf(f, arc)
    g = pf.divide_by_linear_power(z, n + 1)
    if method == "residue":
        integral = integrate_partial_fractions(g, arc, alpha)
    elif method == "limit":
        s = series_from_partial_fractions(g, arc, "f/(x-z)^(n+1)")
        integral = integrate_limit(s, arc, InterlockedFamily.phi_alpha(alpha), target_precision).value
    else:
        raise ValueError(f"unknown method {method!r}")
    ctx = arc.ctx
    factor = ctx.one() - omega_power((arc.a - z) / (arc.a - arc.b), alpha)
    return factor * integral * math.factorial(n)


def cauchy_coefficients(domain: HoleyDomain, xbar: PadicNumber, alpha: int = 0) -> list[PadicNumber]:
    """Coefficients mu with f(z) = sum_i mu_i int_A(x_i, b_i) f(x)/(x - z) dx.

    Index 0 is the outer arc A(a, b).  Valid for every z in D^-(xbar, r*).

    Raises:
        GeometryViolation: xbar violates |xbar - b_i| = R for large holes.
    """
    R = domain.R_val
    for h in domain.large:
        if _val(xbar - h.base) != R:
            raise GeometryViolation("need |xbar - b_i| = R for large holes")
    if domain.hole_of(xbar) is not None:
        raise GeometryViolation("xbar lies in a hole")
    ctx = domain.ctx
    m = len(domain.large)
    centers = [domain.a] + [h.center for h in domain.large]
    bases = [domain.b] + [h.base for h in domain.large]
    col = [weight(centers[i], bases[i], xbar, alpha) for i in range(m + 1)]
    col += [ctx.zero()] * len(domain.small)
    K = _system_matrix(domain, col, alpha)
    M = len(domain.holes)
    # first row of K^-1: solve K^T y = e_0
    KT = PadicMatrix([[K[j, i] for j in range(M + 1)] for i in range(M + 1)], ctx)
    e0 = [ctx.one()] + [ctx.zero()] * M
    return solve_linear(KT, e0)


def _d_star_check(domain: HoleyDomain, xbar: PadicNumber, z: PadicNumber) -> None:
    rstar = max((_val(xbar - h.center) for h in domain.holes), default=domain.R_val)
    rstar = min(rstar, domain.R_val) if domain.holes else domain.R_val
    if not _val(z - xbar) > rstar:
        raise ZOutsideDStar("z must satisfy |z - xbar| < min_i |xbar - x_i|")


def cauchy_formula_holes(
    f, domain: HoleyDomain, z: PadicNumber, alpha: int = 0, xbar: Optional[PadicNumber] = None
) -> PadicNumber:
    """f(z) from the arc integrals of f(x)/(x - z) over the outer arc and the holes.

    Raises:
        ZOutsideDStar: z is not in D^-(xbar, r*).
        ZOnArc: z lies on one of the arcs.
    """
    xbar = z if xbar is None else xbar
    _d_star_check(domain, xbar, z)
    arcs = [domain.arc] + [h.arc for h in domain.holes]
    for arc in arcs:
        if _val(z - arc.b) > arc.radius_valuation:
            raise ZOnArc("z lies on an integration arc")
    pf = _as_pf(f)
    _check_poles(pf, domain)
    mu = cauchy_coefficients(domain, xbar, alpha)
    g = pf.divide_by_linear_power(z, 1)
    total = domain.ctx.zero()
    for m, arc in zip(mu, arcs):
        total = total + m * integrate_partial_fractions(g, arc, alpha)
    return total


def choose_a0(x0: PadicNumber, x1: PadicNumber, b: PadicNumber, alpha: int = 0) -> PadicNumber:
    """a0 = x0 unless zeta = omega((x1 - x0)/(x1 - b)) is a primitive sixth root of unity.

    In that case a0 = x1 + (b - x1) omega(c) for the smallest residue c >= 2
    with omega((a0 - x1)/(a0 - b)) != -zeta.
    """
    ctx = x0.ctx
    zeta = omega_power((x1 - x0) / (x1 - b), alpha)
    one = ctx.one()
    primitive6 = (zeta**6 - one).is_zero() and not (zeta**2 - one).is_zero() and not (zeta**3 - one).is_zero()
    if not primitive6:
        return x0
    for c in range(2, ctx.p):
        w = omega_power(ctx(c), 0)
        a0 = x1 + (b - x1) * w
        if not (omega_power((a0 - x1) / (a0 - b), alpha) + zeta).is_zero():
            return a0
    raise DeterminantZero("no admissible a0 among the residues")


def cauchy_one_large_hole(
    f,
    x0: PadicNumber,
    x1: PadicNumber,
    b: PadicNumber,
    z: PadicNumber,
    alpha: int = 0,
    a0: Optional[PadicNumber] = None,
) -> tuple[PadicNumber, dict]:
    """f(z) = (I_A(a0,b) - I_A(x1,b) / (1 - omega((a0 - x1)/(a0 - b)))) / D.

    D = det[1/(1 - omega((a_i - x_j)/(a_i - b)))] with a_1 = x1 and columns
    x0, x1.  Returns the value and the coefficient pair.

    Raises:
        DeterminantZero: D vanishes.
        ZOutsideDStar: |z - x0| >= R.
    """
    ctx = x0.ctx
    R = _val(x1 - b)
    if _val(x0 - b) != R or _val(x0 - x1) != R:
        raise GeometryViolation("need |x0 - x1| = |x0 - b| = |x1 - b| = R")
    if not _val(z - x0) > R:
        raise ZOutsideDStar("z must lie in D^-(x0, R)")
    a0 = choose_a0(x0, x1, b, alpha) if a0 is None else a0
    if _val(a0 - b) != R:
        raise GeometryViolation("need |a0 - b| = R")
    A = [a0, x1]
    X = [x0, x1]
    Dm = [[weight(A[i], b, X[j], alpha) for j in range(2)] for i in range(2)]
    D = Dm[0][0] * Dm[1][1] - Dm[0][1] * Dm[1][0]
    if D.is_zero():
        raise DeterminantZero("D vanishes for this a0")
    c0 = Dm[1][1] / D
    c1 = -Dm[0][1] / D
    pf = _as_pf(f)
    g = pf.divide_by_linear_power(z, 1)
    I0 = integrate_partial_fractions(g, Arc(a0, b), alpha)
    I1 = integrate_partial_fractions(g, Arc(x1, b), alpha)
    return c0 * I0 + c1 * I1, {"D": D, "coefficients": (c0, c1), "a0": a0}


def max_modulus_check(f, a: PadicNumber, R_val: int, basepoints: Sequence[PadicNumber]) -> dict:
    """Compare the max over D^+(a, R) with the sup over each open disc D^-(b', R) inside it.

    Sups are reported as valuations: min_n nu(c_n) + n R_val for the
    expansion about the relevant centre.

    Raises:
        NotClosedDiscHolomorphic: f has a pole in D^+(a, R).
    """
    pf = _disc_pf(f, Arc(a, a + a.ctx(a.p) ** R_val))

    def sup_val(center: PadicNumber) -> Union[int, float]:
        best = INF
        deg = len(pf.poly)
        n = 0
        while True:
            c = pf.coeff_about(center, n, center.ctx)
            if not c.is_zero():
                best = min(best, c.valuation + n * R_val)
            if n >= deg:
                # pole terms: nu >= nu(e) - (m + n) nu(c - r) + n R_val, increasing in n
                floor = min(
                    (pt.coeff.valuation - (pt.order + n) * _val(center - pt.center) + n * R_val
                     for pt in pf.poles if not pt.coeff.is_zero()),
                    default=INF,
                )
                if floor > best or not pf.poles:
                    return best
            n += 1
            if n > 10000:
                return best

    disc = sup_val(a)
    arcs = []
    for bp in basepoints:
        if _val(bp - a) < R_val:
            raise GeometryViolation("basepoints must lie in D^+(a, R)")
        arcs.append(sup_val(bp))
    return {"disc": disc, "arcs": arcs, "equal": all(v == disc for v in arcs)}
