"""Line integrals on arcs as limits of root-of-unity sums.

For a path sequence phi the k-th approximation is

    A(k) = (1/q) sum_{zeta^q = 1, zeta != 1} (b - a) zeta f(a + (b - a) zeta),
    q = p**phi(k),

which for f = sum c_n (x - b)^n equals

    A(k) = -sum_{n >= q-1} c_n (a - b)^(n+1) S(n),
    S(n) = sum_{j >= 1} (-1)^(j-1) C(n, jq - 1).

Every value carries the absolute precision that the arithmetic and the
certified tail bounds justify.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

from .exact_oracle import ExactRationalFunction, Poly
from .padic_core import (
    INF,
    PadicContext,
    PrecisionExhausted,
    PadicNumber,
    omega_power,
    teichmuller,
    valuation,
)
from .series import (
    Arc,
    Certificate,
    InterlockedFamily,
    PartialFractions,
    PathSequence,
    PoleInArc,
    SeriesFunction,
    _pf_from_rational,
    check_disc_automorphism,
    from_rational,
    log_p,
    rational_partial_fractions,
)

__all__ = [
    "CertificateRequired",
    "BetaTooLarge",
    "NoConvergence",
    "ScheduleUnsupported",
    "GeometryViolation",
    "BasepointInHole",
    "GrowthConditionViolated",
    "ClassInconsistency",
    "UnsupportedOrder",
    "NotAnAutomorphism",
    "BudgetExceeded",
    "EvalStrategy",
    "IntegralResult",
    "eval_A",
    "integrate_limit",
    "integrate_rational_closed_form",
    "integrate_partial_fractions",
    "arc_weight",
    "residue_laurent",
    "zp_count",
    "sufficiency_check",
    "RayLimitEntry",
    "RayLimitTable",
    "ray_limits",
    "delta_coefficients",
    "integrate_via_raylimits",
    "check_substitution_invariance",
    "paper_nk",
]

DEBUG = os.environ.get("PADIC_ARC_DEBUG", "") not in ("", "0")
DEFAULT_BUDGET = 6 * 10**7
MAX_DENSE_TERMS = 2 * 10**6


class CertificateRequired(ValueError):
    """A tail bound is needed but f has no growth certificate."""


class BetaTooLarge(ValueError):
    """The strategy needs a certificate of order beta < 1."""


class NoConvergence(ArithmeticError):
    """The sequence A(k) did not stabilise; ``result`` holds the partial run."""

    def __init__(self, message: str, result: "IntegralResult"):
        super().__init__(message)
        self.result = result


class ScheduleUnsupported(ValueError):
    """The schedule is not usable for this request."""


class GeometryViolation(ValueError):
    """Points or radii do not satisfy the required configuration."""


class BasepointInHole(ValueError):
    """The arc basepoint lies inside one of the zero/pole discs."""


class GrowthConditionViolated(ValueError):
    """phi(k) - (beta+1) nabla phi(k) - beta log_p phi(k) does not grow."""


class ClassInconsistency(ValueError):
    """Ray limits in the same residue class mod n disagree."""


class UnsupportedOrder(ValueError):
    """Roots of unity of this order are not in Q_p."""


class NotAnAutomorphism(ValueError):
    """The substitution map is not a disc automorphism."""


class BudgetExceeded(RuntimeError):
    """Evaluating A(k) would exceed the work budget."""


# --------------------------------------------------------------------------
# strategies
# --------------------------------------------------------------------------


def paper_nk(phi: int, p: int, beta: Fraction) -> int:
    """Truncation point (1 + floor((beta + 2)(p - 1)/p * phi)) * p**phi."""
    return (1 + math.floor((Fraction(beta) + 2) * Fraction(p - 1, p) * phi)) * p**phi


@dataclass(frozen=True)
class EvalStrategy:
    """How A(k) is summed.

    kinds:
        ``full``: every term not provably below p**-N.
        ``truncated``: terms with n < n_k only.
        ``filtered``: n < n_k and n = -1 mod p**theta(k); needs beta < 1.
        ``closed``: closed-form sum for rational f.
    """

    kind: str = "full"
    theta: Union[str, Callable[[int, int, int], int]] = "half_phi"
    nk: Callable[[int, int, Fraction], int] = paper_nk

    def __post_init__(self):
        if self.kind not in ("full", "truncated", "filtered", "closed"):
            raise ValueError(f"unknown strategy {self.kind!r}")

    @classmethod
    def full(cls) -> "EvalStrategy":
        return cls("full")

    @classmethod
    def truncated(cls, nk=paper_nk) -> "EvalStrategy":
        return cls("truncated", nk=nk)

    @classmethod
    def filtered(cls, theta="half_phi", nk=paper_nk) -> "EvalStrategy":
        return cls("filtered", theta=theta, nk=nk)

    @classmethod
    def closed_sum(cls) -> "EvalStrategy":
        return cls("closed")

    def theta_value(self, k: int, phi: int, p: int) -> int:
        if callable(self.theta):
            return int(self.theta(k, phi, p))
        if self.theta == "half_phi":
            return 1 + phi // 2
        if self.theta == "log_phi":
            t = 0
            while p ** (t + 1) <= k:
                t += 1
            return t
        raise ValueError(f"unknown theta rule {self.theta!r}")

    def __str__(self) -> str:
        if self.kind == "filtered":
            name = self.theta if isinstance(self.theta, str) else "custom"
            return f"filtered[{name}]"
        return self.kind


# --------------------------------------------------------------------------
# S(n) = sum_j (-1)^(j-1) C(n, jq - 1) modulo p**W
# --------------------------------------------------------------------------


def _int_tables(hi: int, p: int, mod: int):
    """nu_p(i), p-free part mod ``mod`` and its inverse, for i in 0..hi."""
    vt = [0] * (hi + 1)
    pf = [1] * (hi + 1)
    for i in range(1, hi + 1):
        v, u = 0, i
        while u % p == 0:
            u //= p
            v += 1
        vt[i] = v
        pf[i] = u % mod
    # batch inversion
    pref = [1] * (hi + 2)
    for i in range(1, hi + 1):
        pref[i + 1] = pref[i] * pf[i] % mod
    inv = [1] * (hi + 1)
    run = pow(pref[hi + 1], -1, mod) if hi >= 1 else 1
    for i in range(hi, 0, -1):
        inv[i] = run * pref[i] % mod
        run = run * pf[i] % mod
    return vt, pf, inv


def _S_dense(q: int, hi: int, p: int, W: int, wanted: Optional[set] = None) -> list[int]:
    """S(n) mod p**W for all n < hi by walking the columns m = jq - 1."""
    mod = p**W
    S = [0] * hi
    if hi < q:
        return S
    vt, pf, inv = _int_tables(hi, p, mod)
    ppow = [p**e for e in range(W)]
    sign = 1
    m = q - 1
    while m < hi:
        S[m] += sign
        unit, v = 1, 0
        for n in range(m + 1, hi):
            unit = unit * pf[n] % mod * inv[n - m] % mod
            v += vt[n] - vt[n - m]
            if v < W:
                S[n] += sign * unit * ppow[v]
        sign = -sign
        m += q
    return [s % mod for s in S]


def _binom_row(n: int, upto: int, p: int, mod: int) -> list[tuple[int, int]]:
    """(valuation, unit mod ``mod``) of C(n, i) for i = 0..upto."""
    out = [(0, 1)]
    v, num, den = 0, 1, 1
    for i in range(1, upto + 1):
        a, b = n - i + 1, i
        while a % p == 0:
            a //= p
            v += 1
        while b % p == 0:
            b //= p
            v -= 1
        num = num * a % mod
        den = den * b % mod
        out.append((v, num * pow(den, -1, mod) % mod if v < 10**9 else 0))
    return out


def _S_single(n: int, q: int, p: int, W: int) -> int:
    """S(n) mod p**W for one n, sweeping a single row of Pascal's triangle."""
    mod = p**W
    ms = list(range(q - 1, n + 1, q))
    if not ms:
        return 0
    need = max(min(m, n - m) for m in ms)
    row = _binom_row(n, need, p, mod) if need > 0 else [(0, 1)]
    s = 0
    for j, m in enumerate(ms):
        v, u = row[min(m, n - m)]
        if v < W:
            s += (-1) ** j * u * p**v
    return s % mod


def _sparse_cost(ns: Iterable[int], q: int) -> int:
    c = 0
    for n in ns:
        c += max((min(m, n - m) for m in range(q - 1, n + 1, q)), default=0) if n // q < 10**6 else n
    return c


# --------------------------------------------------------------------------
# A(k)
# --------------------------------------------------------------------------


def _tail_floor(n: int, cert: Certificate, p: int, rv: int, q: int, phi: int) -> float:
    """Lower bound on nu_p(c_n (a-b)^(n+1) S(n)) for n > n0."""
    base = rv - cert.log_bound(max(n, 1), p)
    return base + max(0.0, n * p / (q * (p - 1)) - phi)


def _min_tail_from(n_start: int, cert: Certificate, p: int, rv: int, q: int, phi: int) -> float:
    """min over n >= n_start of the tail floor."""
    beta = float(cert.beta)
    if beta == 0:
        return _tail_floor(n_start, cert, p, rv, q, phi)
    # increasing once p/(q(p-1)) > beta/(n ln p)
    n_star = max(n_start, math.ceil(beta * q * (p - 1) / (p * math.log(p))) + 1)
    vals = [_tail_floor(n_start, cert, p, rv, q, phi), _tail_floor(n_star, cert, p, rv, q, phi)]
    # the floor is unimodal; also check the kink at n = q(p-1)phi/p
    kink = max(n_start, math.ceil(q * (p - 1) * phi / p))
    vals.append(_tail_floor(kink, cert, p, rv, q, phi))
    return min(vals)


def _full_cutoff(cert: Certificate, p: int, rv: int, q: int, phi: int, N: int) -> int:
    """Smallest n beyond which every term is below p**-N."""
    beta = float(cert.beta)
    lo = max(q - 1, cert.n0 + 1)
    if beta > 0:
        lo = max(lo, math.ceil(beta * q * (p - 1) / (p * math.log(p))) + 1)
    n = lo
    for _ in range(200):
        need = N + phi + cert.log_bound(max(n, 1), p) - rv
        n_new = max(lo, math.ceil(need * q * (p - 1) / p))
        if n_new <= n:
            break
        n = n_new
    while _tail_floor(n, cert, p, rv, q, phi) < N:
        n += q
    return n


def _auto_strategy(f: SeriesFunction) -> EvalStrategy:
    if f.partial_fractions is not None:
        return EvalStrategy.closed_sum()
    return EvalStrategy.full()


def eval_A(
    f: SeriesFunction,
    arc: Arc,
    phi: Union[PathSequence, int],
    k: Optional[int] = None,
    strategy: Optional[EvalStrategy] = None,
    *,
    budget: int = DEFAULT_BUDGET,
    N: Optional[int] = None,
) -> PadicNumber:
    """A(k) for the level phi(k) (or for the level itself when ``phi`` is an int).

    The returned value carries an absolute precision backed by the tail
    bounds of the strategy.

    Raises:
        CertificateRequired: infinite series without certificate.
        BetaTooLarge: filtered strategy with beta >= 1.
        BudgetExceeded: the summation would exceed ``budget`` steps.
    """
    level = phi if isinstance(phi, int) else phi(k)
    if k is None:
        k = level
    strategy = strategy or _auto_strategy(f)
    ctx = arc.ctx if N is None else arc.ctx.with_precision(N)
    if strategy.kind == "closed":
        if f.partial_fractions is None:
            raise ScheduleUnsupported("closed-form sums need a rational function")
        val = _closed_sum(f.partial_fractions, arc, level, ctx)
    else:
        val = _series_sum(f, arc, level, k, strategy, ctx, budget)
    if DEBUG and f.certificate is not None and f.certificate.beta == 0 and not val.is_zero():
        # |A(k)|_p <= M R
        assert val.valuation >= arc.radius_valuation - log_p(f.certificate.M, arc.p) - 1e-9
    return val


def _series_sum(f, arc, phi, k, strategy, ctx, budget) -> PadicNumber:
    p = arc.p
    N = ctx.N
    q = p**phi
    rv = arc.radius_valuation
    cert = f.certificate
    finite = f.degree is not None
    bound_prec = float(N)

    if strategy.kind == "filtered":
        if cert is None:
            raise CertificateRequired("filtered sums need a growth certificate")
        if cert.beta >= 1:
            raise BetaTooLarge(f"filtered sums need beta < 1, certificate has beta = {cert.beta}")
    if strategy.kind in ("truncated", "filtered") and cert is None and not finite:
        raise CertificateRequired("truncated sums need a growth certificate")

    if finite:
        hi = f.degree + 1
        if strategy.kind in ("truncated", "filtered"):
            beta = cert.beta if cert else Fraction(0)
            hi = min(hi, strategy.nk(phi, p, beta))
    else:
        if cert is None:
            raise CertificateRequired(f"{f.name} has no certificate; the tail cannot be bounded")
        if strategy.kind == "full":
            hi = _full_cutoff(cert, p, rv, q, phi, N)
        else:
            hi = max(strategy.nk(phi, p, cert.beta), cert.n0 + 1)
            bound_prec = min(bound_prec, _min_tail_from(hi, cert, p, rv, q, phi))
    if finite and strategy.kind != "full" and hi <= f.degree:
        if cert is not None:
            bound_prec = min(bound_prec, _min_tail_from(hi, cert, p, rv, q, phi))

    if not f.sparse and not finite:
        # refuse before materialising the index range
        if hi - q + 1 > MAX_DENSE_TERMS or hi * hi // (2 * q) + hi > budget:
            raise BudgetExceeded(f"A(k) at level {phi} needs {hi - q + 1} dense terms")
    candidates = [n for n in f.support(q - 1, hi)]
    theta = None
    if strategy.kind == "filtered":
        theta = strategy.theta_value(k, phi, p)
        pt = p**theta
        kept = []
        n0 = cert.n0
        for n in candidates:
            if (n + 1) % pt == 0 or n <= n0:
                kept.append(n)
        if len(kept) < len(candidates):
            # dropped terms: nu(S(n)) >= phi - nu(n+1) >= phi - theta + 1
            drop = rv - cert.log_bound(max(hi, 1), p) + max(phi - theta + 1, 0)
            bound_prec = min(bound_prec, drop)
        candidates = kept

    # skip terms that are provably below the target
    if cert is not None:
        pruned = []
        for n in candidates:
            if n > cert.n0:
                fl = rv - cert.log_bound(max(n, 1), p) + max(
                    0.0, n * p / (q * (p - 1)) - phi, phi - valuation(n + 1, p)
                )
                if fl >= N:
                    continue
            pruned.append(n)
        candidates = pruned

    if bound_prec < 1:
        raise PrecisionExhausted(f"strategy {strategy} certifies no digits at level {phi}")
    if not candidates:
        return ctx.zero(min(N, int(math.floor(bound_prec))))

    sparse = f.sparse or finite and len(candidates) < (hi - q + 1) // 4
    if sparse:
        cost = _sparse_cost(candidates, q)
    else:
        cost = hi * hi // (2 * q) + hi
    if cost > budget:
        raise BudgetExceeded(f"A(k) at level {phi} needs about {cost} steps")

    # working precisions
    low = rv - (cert.log_bound(max(hi, 1), p) if cert is not None else 0.0)
    guard = 2 + max(0, math.ceil(-low))
    n_hi_small = [n for n in candidates if cert is None or n <= cert.n0]
    cctx = ctx.with_precision(N + guard + max(0, -rv) * (hi + 1))
    coeffs = {}
    for n in candidates:
        c = f.coeff(n, cctx)
        if not c.is_zero():
            coeffs[n] = c
    if not coeffs:
        prec = min(N, int(math.floor(bound_prec)))
        prec = min([prec] + [cctx.N + rv * (n + 1) for n in candidates])
        return ctx.zero(max(prec, 1))
    min_term_val = min(c.valuation + rv * (n + 1) for n, c in coeffs.items())
    W = max(1, N - min_term_val + 1)
    if sparse:
        S = {n: _S_single(n, q, p, W) for n in coeffs}
    else:
        dense = _S_dense(q, hi, p, W)
        S = {n: dense[n] for n in coeffs}

    ab = arc.a_at(cctx) - arc.b_at(cctx)
    vab, uab, rab = ab.valuation, ab.unit, ab.relative_precision
    acc = ctx.zero(N)
    prec = min(N, int(math.floor(bound_prec)))
    for n, c in coeffs.items():
        s = S[n]
        if s == 0:
            # S(n) vanishes modulo p^W, far below the target
            continue
        vs = 0
        while s % p == 0:
            s //= p
            vs += 1
        r = min(c.relative_precision, rab, W - vs)
        mod = p**r
        v = c.valuation + vab * (n + 1) + vs
        u = c.unit * pow(uab, n + 1, mod) * s % mod
        acc = acc + PadicNumber._make(ctx, v, u, v + r)
    if prec < 1:
        raise PrecisionExhausted(f"strategy {strategy} certifies no digits at level {phi}")
    acc = acc.with_precision(prec) if prec < acc.precision else acc
    return -acc


def _closed_sum(pf: PartialFractions, arc: Arc, phi: int, ctx: PadicContext) -> PadicNumber:
    """A(k) for a partial-fraction form, summed in closed form.

    For e/(x - r)^m with c = (a - r)/(a - b):
        A = -e (a - b)^(1 - m) (-1)^(m-1) [h^(m-1)] 1/((c + h)^q - 1).
    """
    p = arc.p
    q = p**phi
    N = ctx.N
    wctx = ctx.with_precision(N + 8)
    a = arc.a_at(wctx)
    b = arc.b_at(wctx)
    ab = a - b
    total = wctx.zero()
    # polynomial part: a finite series about b
    if pf.exact_poly is not None and arc.b_exact is not None:
        poly = [wctx(c) for c in pf.exact_poly.taylor(arc.b_exact)] if not pf.exact_poly.is_zero() else []
    else:
        poly = pf.poly_coeffs_about(b) if pf.poly else []
    if len(poly) >= q:
        rv = arc.radius_valuation
        W = N + 8 + max(0, -min((c.valuation + rv * (n + 1) for n, c in enumerate(poly) if not c.is_zero()), default=0))
        for n in range(q - 1, len(poly)):
            c = poly[n]
            if c.is_zero():
                continue
            s = _S_single(n, q, p, W)
            if s:
                total = total - c * ab ** (n + 1) * PadicNumber._make(wctx, 0, s, W)
    for pt in pf.poles:
        r = wctx(pt.center_exact) if pt.center_exact is not None else wctx(pt.center)
        if arc.contains(r):
            raise PoleInArc("pole inside the arc")
        c = (a - r) / ab
        m = pt.order
        # 1/((c + h)^q - 1) = inv_D0 / (1 + sum_j ratio_j h^j), scaled so that
        # poles far outside the disc (|c| > 1) never form huge powers
        if not c.is_zero() and c.valuation < 0:
            ci = wctx.one() / c
            w = ci**q
            inv_D0 = w / (1 - w)
            ratio = [math.comb(q, j) * ci**j / (1 - w) if j <= q else wctx.zero() for j in range(1, m)]
        else:
            inv_D0 = wctx.one() / (c**q - 1)
            ratio = []
            for j in range(1, m):
                if j > q:
                    ratio.append(wctx.zero())
                elif j == q:
                    ratio.append(inv_D0)
                else:
                    ratio.append(math.comb(q, j) * c ** (q - j) * inv_D0)
        G = [wctx.one()]
        for i in range(1, m):
            acc = wctx.zero()
            for j in range(1, i + 1):
                acc = acc + ratio[j - 1] * G[i - j]
            G.append(-acc)
        F = inv_D0 * G[m - 1] * (-1) ** (m - 1)
        total = total - wctx(pt.coeff) * ab ** (1 - m) * F
    return ctx(total)


# --------------------------------------------------------------------------
# limits
# --------------------------------------------------------------------------


@dataclass
class IntegralResult:
    """Outcome of a limit computation.

    Attributes:
        value: last A(k) computed.
        precision: digits certified by stabilisation (and value precision).
        k_used: index of the last A(k).
        converged: whether the stopping rule was met.
        strategy: strategy name.
        schedule: schedule description.
        trace: per-k records ``(k, phi(k), A(k), nu(A(k) - A(k-1)))``.
    """

    value: PadicNumber
    precision: Union[int, float]
    k_used: int
    converged: bool
    strategy: str
    schedule: str
    trace: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "value": self.value.to_json(),
            "precision": self.precision if self.precision != INF else None,
            "k_used": self.k_used,
            "converged": self.converged,
            "strategy": self.strategy,
            "schedule": self.schedule,
            "trace": [
                {"k": k, "phi": ph, "value": v.to_json(), "diff_valuation": (None if d is None or d == INF else d)}
                for k, ph, v, d in self.trace
            ],
        }


def _run_sequence(f, arc, phi: PathSequence, tau, k_max, window, strategy, budget):
    trace = []
    prev = None
    k = phi.k0
    last = phi.last_k
    k_end = k_max if last is None else min(k_max, last)
    good = 0
    while k <= k_end:
        try:
            val = eval_A(f, arc, phi, k, strategy, budget=budget)
        except BudgetExceeded:
            break
        except PrecisionExhausted:
            prev, good = None, 0
            k += 1
            continue
        d = None
        if prev is not None:
            d = val.agreement(prev)
            good = good + 1 if d >= tau else 0
        trace.append((k, phi(k), val, d))
        prev = val
        if good >= window and val.precision >= tau:
            prec = min(min(t[3] for t in trace[-window:]), val.precision)
            return IntegralResult(val.with_precision(prec), prec, k, True, str(strategy), str(phi), trace)
        k += 1
    if not trace:
        return None
    tail = [t[3] for t in trace[-window:] if t[3] is not None]
    prec = min(tail) if len(tail) == window else 0
    return IntegralResult(trace[-1][2], prec, trace[-1][0], False, str(strategy), str(phi), trace)


def integrate_limit(
    f: SeriesFunction,
    arc: Arc,
    schedule: Union[PathSequence, InterlockedFamily, None] = None,
    target_precision: int = 12,
    *,
    k_max: int = 6,
    window: int = 2,
    lambda_max: int = 12,
    strategy: Optional[EvalStrategy] = None,
    budget: int = DEFAULT_BUDGET,
) -> IntegralResult:
    """The limit of A(k), stopping once ``window`` consecutive differences
    have valuation >= ``target_precision``.

    For an interlocked family the members are tried in order
    (lambda = 1, 2, ...) and the first that stabilises is returned.

    Raises:
        NoConvergence: no member stabilised within k_max; ``.result`` holds
            the run that came closest.
    """
    if schedule is None:
        schedule = InterlockedFamily.phi_alpha(0)
    if isinstance(schedule, PathSequence):
        schedule = InterlockedFamily.singleton(schedule)
    strategy = strategy or _auto_strategy(f)
    best = None
    for _, member in schedule.members(lambda_max):
        res = _run_sequence(f, arc, member, target_precision, k_max, window, strategy, budget)
        if res is None:
            continue
        res.schedule = f"{schedule} / {member}" if schedule.kind != "singleton" else str(member)
        if res.converged:
            return res
        if best is None or res.precision > best.precision:
            best = res
    if best is None:
        raise NoConvergence("no A(k) could be evaluated within the budget",
                            IntegralResult(arc.ctx.zero(), 0, 0, False, str(strategy), str(schedule)))
    raise NoConvergence(
        f"A(k) did not stabilise to {target_precision} digits within k <= {k_max} ({schedule})", best
    )


# --------------------------------------------------------------------------
# closed forms
# --------------------------------------------------------------------------


def arc_weight(arc: Arc, r: PadicNumber, alpha: int = 0) -> PadicNumber:
    """Integral of 1/(x - r) over the arc.

    1 when |r - a| < R, 1/(1 - omega^(p^alpha)((a - r)/(a - b))) when r is on
    the circle outside the arc, 0 when |r - a| > R.

    Raises:
        PoleInArc: r lies in the arc.
    """
    ctx = arc.ctx
    if arc.contains(r):
        raise PoleInArc("pole lies in the arc")
    rv = arc.radius_valuation
    da = arc.a - r
    if da.is_zero():
        if da.precision <= rv:
            raise PoleInArc("pole too close to the circle to classify")
        return ctx.one()
    if da.valuation > rv:
        return ctx.one()
    if da.valuation < rv:
        return ctx.zero()
    w = omega_power(da / (arc.a - arc.b), alpha)
    return ctx.one() / (ctx.one() - w)


def integrate_partial_fractions(pf: PartialFractions, arc: Arc, alpha: int = 0) -> PadicNumber:
    """Closed-form integral: sum of residue times arc weight over simple poles."""
    total = arc.ctx.zero()
    for pt in pf.poles:
        r = arc.ctx(pt.center_exact) if pt.center_exact is not None else pt.center
        w = arc_weight(arc, r, alpha)
        if pt.order == 1:
            total = total + pt.coeff * w
    return total


def integrate_rational_closed_form(
    f: Union[ExactRationalFunction, PartialFractions, SeriesFunction], arc: Arc, alpha: int = 0
) -> PadicNumber:
    """Integral of a rational function over the arc along Phi_alpha.

    Raises:
        PoleInArc: a pole lies in the arc.
        IrrationalPole: the denominator does not split over Q.
    """
    if isinstance(f, ExactRationalFunction):
        pf = _pf_from_rational(f, arc.ctx)
    elif isinstance(f, SeriesFunction):
        if f.partial_fractions is None:
            raise ValueError("series has no closed form")
        pf = f.partial_fractions
    else:
        pf = f
    return integrate_partial_fractions(pf, arc, alpha)


def residue_laurent(
    coeffs: dict, x0: PadicNumber, arc: Arc, alpha: int = 0
) -> PadicNumber:
    """Integral of sum_n coeffs[n] (x - x0)^n over an arc on a circle about x0.

    Only n = -1 contributes: c_-1 / (1 - omega^(p^alpha)((a - x0)/(a - b))).

    Raises:
        GeometryViolation: b is not on the circle |x - x0| = R.
    """
    rv = arc.radius_valuation
    db = arc.b - x0
    if db.is_zero() or db.valuation != rv:
        raise GeometryViolation("the arc must lie on a circle centred at x0 with |b - x0| = R")
    c = coeffs.get(-1)
    if c is None:
        return arc.ctx.zero()
    c = arc.ctx(c)
    w = omega_power((arc.a - x0) / (arc.a - arc.b), alpha)
    return c / (arc.ctx.one() - w)


def zp_count(zeros: Sequence, poles: Sequence, arc: Arc, alpha: int = 0) -> PadicNumber:
    """Weighted count sum_i (Z_i - P_i) / (1 - omega^(p^alpha)((a - z_i)/(a - b))).

    ``zeros`` and ``poles`` are sequences of ``(point, multiplicity)``.  A
    point with |z - a|_p > R contributes nothing.

    Raises:
        BasepointInHole: |b - z_i|_p < R for some i.
    """
    rv = arc.radius_valuation
    ctx = arc.ctx
    total = ctx.zero()
    for pts, sign in ((zeros, 1), (poles, -1)):
        for z, mult in pts:
            z = ctx(z)
            d = arc.b - z
            if d.is_zero() or d.valuation > rv:
                raise BasepointInHole("the basepoint lies in D^-(z_i, R)")
            da = arc.a - z
            if not da.is_zero() and da.valuation < rv:
                continue
            w = omega_power(da / (arc.a - arc.b), alpha)
            total = total + sign * mult * (ctx.one() / (ctx.one() - w))
    return total


# --------------------------------------------------------------------------
# ray limits
# --------------------------------------------------------------------------


@dataclass
class RayLimitEntry:
    d: int
    values: list
    residuals: list
    limit: PadicNumber
    stabilized: bool
    stabilized_at_k: Optional[int]

    @property
    def trusted_precision(self) -> Union[int, float]:
        """Digits supported by the last residual (value precision if constant)."""
        if not self.residuals:
            return 0
        last = self.residuals[-1]
        return min(last, self.limit.precision)


@dataclass
class RayLimitTable:
    p: int
    m: int
    phi: str
    entries: dict

    def __getitem__(self, d: int) -> RayLimitEntry:
        return self.entries[d]

    def limit(self, d: int) -> PadicNumber:
        return self.entries[d].limit

    @property
    def uniform_residual(self) -> Union[int, float]:
        """min over d of the last residual valuation."""
        return min(e.trusted_precision for e in self.entries.values())

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "m": self.m,
            "phi": self.phi,
            "entries": [
                {
                    "d": e.d,
                    "limit": e.limit.to_json(),
                    "residuals": [None if r == INF else r for r in e.residuals],
                    "stabilized": e.stabilized,
                    "stabilized_at_k": e.stabilized_at_k,
                }
                for e in self.entries.values()
            ],
        }


def _stable_from(residuals: list, values: list) -> Optional[int]:
    """First index i such that the residual norms decrease strictly from i on
    (exactly equal consecutive values count as converged)."""
    n = len(residuals)
    for i in range(n):
        ok = True
        for j in range(i, n):
            if residuals[j] < 1:
                ok = False
                break
            if j + 1 < n:
                exact_j = values[j + 1].agreement(values[j]) >= values[j + 1].precision
                if not exact_j and residuals[j + 1] <= residuals[j]:
                    ok = False
                    break
        if ok:
            return i
    return None


def ray_limits(
    f: SeriesFunction,
    arc: Arc,
    phi: PathSequence,
    d_max: int,
    k_max: int,
    m: int = -1,
) -> RayLimitTable:
    """Sequences a(m + d p^phi(k)) with a(n) = c_n (a - b)^(n+1), for d = 1..d_max.

    Each entry records the residual valuations nu(a_(k+1) - a_k) and
    whether their norms decrease strictly.
    """
    ctx = arc.ctx
    p = arc.p
    ab = arc.a_at(ctx) - arc.b_at(ctx)
    entries = {}
    for d in range(1, d_max + 1):
        vals = []
        ks = list(range(phi.k0, k_max + 1))
        for k in ks:
            n = m + d * p ** phi(k)
            if n < 0:
                raise ValueError("index m + d p^phi(k) must be nonnegative")
            vals.append(f.coeff(n, ctx) * ab ** (n + 1))
        res = [vals[i + 1].agreement(vals[i]) for i in range(len(vals) - 1)]
        start = _stable_from(res, vals[1:]) if res else None
        entries[d] = RayLimitEntry(
            d, vals, res, vals[-1], start is not None,
            None if start is None else ks[start + 1],
        )
    return RayLimitTable(p, m, str(phi), entries)


def _roots_of_unity(n: int, ctx: PadicContext) -> list[PadicNumber]:
    p = ctx.p
    if (p - 1) % n:
        raise UnsupportedOrder(f"Q_{p} has no primitive {n}-th roots of unity")
    out = []
    for c in range(1, p):
        w = teichmuller(ctx(c))
        if (w**n - 1).is_zero():
            out.append(w)
    return out


def delta_coefficients(n: int, alpha: int, ctx: PadicContext) -> list[PadicNumber]:
    """delta_i = sum_{zeta^n = 1} zeta^(i+1) / (1 - omega^(p^alpha)(1 - zeta)), i < n."""
    roots = _roots_of_unity(n, ctx)
    out = []
    for i in range(n):
        s = ctx.zero()
        for z in roots:
            w = omega_power(ctx.one() - z, alpha)
            s = s + z ** (i + 1) / (ctx.one() - w)
        out.append(s)
    return out


def integrate_via_raylimits(
    table: RayLimitTable, n: int, alpha: int = 0, *, tolerance: Optional[int] = None
) -> PadicNumber:
    """-(1/n) sum_i delta_i L(alpha' (i + 1)) from a table of ray limits.

    ``alpha'`` satisfies alpha' p^alpha = 1 mod n and ray indices are taken
    mod n.  Limits in the same class mod n must agree to ``tolerance``
    digits (default: the smaller trusted precision of the pair).

    Raises:
        ClassInconsistency: two rays of one class disagree.
        UnsupportedOrder: n does not divide p - 1.
    """
    p = table.p
    entries = table.entries
    if any(d not in entries for d in range(1, n + 1)):
        raise ValueError(f"table must contain rays 1..{n}")
    ctx = entries[1].limit.ctx
    for d in entries:
        if d + n in entries:
            e1, e2 = entries[d], entries[d + n]
            tol = tolerance if tolerance is not None else min(e1.trusted_precision, e2.trusted_precision)
            if e1.limit.agreement(e2.limit) < tol:
                raise ClassInconsistency(f"rays {d} and {d + n} disagree")
    alpha_p = pow(p**alpha % n, -1, n) if n > 1 else 1
    deltas = delta_coefficients(n, alpha, ctx)
    total = ctx.zero()
    for i in range(n):
        d = (alpha_p * (i + 1)) % n or n
        total = total + deltas[i] * entries[d].limit
    return -total / n


def sufficiency_check(
    f: SeriesFunction,
    arc: Arc,
    phi: PathSequence,
    d_max: int,
    k_max: int,
) -> dict:
    """Empirical report on ray stabilisation and the growth condition.

    Raises:
        BetaTooLarge: certificate with beta >= 1.
        GrowthConditionViolated: phi(k) - (beta+1) nabla phi(k) - beta log_p phi(k)
            fails to increase over the sampled k.
    """
    cert = f.certificate
    beta = cert.beta if cert is not None else Fraction(0)
    if beta >= 1:
        raise BetaTooLarge("sufficiency criteria need beta < 1")
    p = arc.p
    ks = list(range(phi.k0, k_max))
    g = [phi(k) - float(beta + 1) * phi.nabla(k) - float(beta) * log_p(phi(k), p) for k in ks]
    if any(b <= a for a, b in zip(g, g[1:])) and not all(b >= a for a, b in zip(g, g[1:])):
        raise GrowthConditionViolated("growth term is not increasing on the sampled range")
    if len(g) >= 2 and g[-1] <= g[0]:
        raise GrowthConditionViolated("growth term does not increase on the sampled range")
    table = ray_limits(f, arc, phi, d_max, k_max)
    per_d = {d: {"stabilized": e.stabilized, "stabilized_at_k": e.stabilized_at_k,
                 "residuals": e.residuals} for d, e in table.entries.items()}
    all_ok = all(e.stabilized for e in table.entries.values())
    return {
        "per_d": per_d,
        "uniform_residual": table.uniform_residual,
        "growth": g,
        "verdict": (f"sufficiency criteria hold empirically up to k = {k_max}"
                    if all_ok else "some rays have not stabilised"),
        "table": table,
    }


# --------------------------------------------------------------------------
# substitution invariance
# --------------------------------------------------------------------------


def check_substitution_invariance(
    f: ExactRationalFunction,
    arc: Arc,
    map_coeffs: Sequence[Fraction],
    source_arc: Arc,
    alpha: int = 0,
    *,
    target_precision: int = 12,
) -> dict:
    """Compare the integral of f over ``arc`` with that of f(x(t)) x'(t) over
    ``source_arc``, where x(t) = sum map_coeffs[k] t^k.

    The left side uses the closed form; the right side is the limit of A(k)
    for the composed function.

    Raises:
        NotAnAutomorphism: x is not an automorphism of the discs.
        GeometryViolation: x(b1) != b.
    """
    xm = Poly([Fraction(c) for c in map_coeffs])
    ok, parts = check_disc_automorphism(
        xm.c, source_arc.a, source_arc.radius_valuation, arc.a, arc.radius_valuation
    )
    if not ok:
        raise NotAnAutomorphism("the map is not a disc automorphism")
    b1 = source_arc.b_at(arc.ctx)
    xb1 = sum((arc.ctx(c) * b1**k for k, c in enumerate(xm.c)), arc.ctx.zero())
    if not (xb1 - arc.b).is_zero():
        raise GeometryViolation("the map must send b1 to b")
    lhs = integrate_rational_closed_form(f, arc, alpha)
    composed = f.compose(xm) * ExactRationalFunction.from_poly(xm.derivative())
    g = from_rational(composed, source_arc)
    res = integrate_limit(g, source_arc, InterlockedFamily.phi_alpha(alpha), target_precision)
    return {
        "lhs": lhs,
        "rhs": res.value,
        "agreement": lhs.agreement(res.value),
        "rhs_result": res,
        "gamma": parts["gamma"],
    }
