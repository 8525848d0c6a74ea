"""Command-line entry point: ``padic-arc``.

Subcommands::

    padic-arc integrate --p 5 --func "rat:1/(x-3)" --arc a=0,b=1 --path k
    padic-arc verify oracle --p 3 --kmax 2
    padic-arc teichmuller --p 5 2
    padic-arc raylimits --p 5 --func builtin:bernoulli_psi:2 --dmax 8 --kmax 3

Defaults can be overridden through the environment: ``PADIC_ARC_N``,
``PADIC_ARC_KMAX``, ``PADIC_ARC_TAU``, ``PADIC_ARC_WINDOW``,
``PADIC_ARC_LAMBDA_MAX``, ``PADIC_ARC_SEED`` and ``PADIC_ARC_CACHE_DIR``.
Command-line flags win over the environment.

Exit codes: 0 success, 1 usage or input error, 2 no convergence,
3 a verification suite ran but some check failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .integrator import NoConvergence, integrate_limit, integrate_rational_closed_form, ray_limits
from .numtheory import default_cache
from .padic_core import PadicContext, PadicError, teichmuller
from .series import Arc, InterlockedFamily, PathSequence, parse_function_spec
from .suites import SUITES, SuiteConfig, UnknownSuite, run_suite

__all__ = ["RunConfig", "main", "parse_arc", "parse_path", "render_json"]

EXIT_OK, EXIT_INPUT, EXIT_NOCONV, EXIT_CHECKS = 0, 1, 2, 3
CACHE_FILE = "bernoulli.bin"

_ENV = {
    "N": ("PADIC_ARC_N", 40),
    "k_max": ("PADIC_ARC_KMAX", 6),
    "tau": ("PADIC_ARC_TAU", 12),
    "window": ("PADIC_ARC_WINDOW", 2),
    "lambda_max": ("PADIC_ARC_LAMBDA_MAX", 12),
    "seed": ("PADIC_ARC_SEED", 1),
}


class InputError(ValueError):
    """Bad command-line input."""


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))


@dataclass
class RunConfig:
    """Resolved settings for one command."""

    p: Optional[int] = None
    N: int = 40
    k_max: int = 6
    tau: int = 12
    window: int = 2
    lambda_max: int = 12
    seed: int = 1
    format: str = "human"
    cache_dir: Optional[str] = None

    def validate(self) -> None:
        if self.p is not None and (self.p == 2 or not _is_prime(self.p)):
            raise InputError(f"p must be an odd prime, got {self.p}")
        if self.tau > self.N:
            raise InputError(f"target precision {self.tau} exceeds N = {self.N}")
        for name in ("N", "k_max", "tau", "window", "lambda_max"):
            if getattr(self, name) < 1:
                raise InputError(f"{name} must be positive")

    @classmethod
    def from_args(cls, args: argparse.Namespace, env=None) -> "RunConfig":
        env = os.environ if env is None else env
        vals = {}
        for name, (var, default) in _ENV.items():
            flag = getattr(args, name, None)
            if flag is not None:
                vals[name] = flag
            elif var in env:
                try:
                    vals[name] = int(env[var])
                except ValueError:
                    raise InputError(f"{var} must be an integer, got {env[var]!r}") from None
            else:
                vals[name] = default
        cfg = cls(
            p=getattr(args, "p", None),
            format="json" if getattr(args, "json", False) else "human",
            cache_dir=getattr(args, "cache_dir", None) or env.get("PADIC_ARC_CACHE_DIR"),
            **vals,
        )
        cfg.validate()
        return cfg

    def suite_config(self, k_max_given: bool) -> SuiteConfig:
        return SuiteConfig(self.p, self.N, self.k_max if k_max_given else None, self.tau,
                           self.window, self.lambda_max, self.seed)


# --------------------------------------------------------------------------
# argument parsing helpers
# --------------------------------------------------------------------------


def _rational(text: str, what: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise InputError(f"{what}: expected a rational n/d, got {text!r}") from None


def parse_arc(text: str) -> tuple[Fraction, Fraction]:
    """``a=<rat>,b=<rat>`` -> (a, b)."""
    parts = {}
    for item in text.split(","):
        key, eq, val = item.partition("=")
        key = key.strip()
        if not eq or key not in ("a", "b"):
            raise InputError(f"arc spec must look like a=<rat>,b=<rat>, got {text!r}")
        parts[key] = _rational(val, f"arc endpoint {key}")
    if set(parts) != {"a", "b"}:
        raise InputError(f"arc spec needs both a and b, got {text!r}")
    return parts["a"], parts["b"]


def parse_path(text: str):
    """``k`` | ``affine:<alpha>,<lambda>`` | ``power:<alpha>,<mu>`` | ``family:phi<alpha>`` | ``family:psi<alpha>``."""
    text = text.strip()
    if text == "k":
        return PathSequence.identity()
    kind, _, rest = text.partition(":")
    try:
        if kind in ("affine", "power"):
            x, y = (int(t) for t in rest.split(","))
            return PathSequence.affine(x, y) if kind == "affine" else PathSequence.power(x, y)
        if kind == "family":
            if rest.startswith("phi"):
                return InterlockedFamily.phi_alpha(int(rest[3:]))
            if rest.startswith("psi"):
                return InterlockedFamily.psi_alpha(int(rest[3:]))
    except ValueError as e:
        raise InputError(f"bad path spec {text!r}: {e}") from None
    raise InputError(f"path spec must be k, affine:a,l, power:a,m or family:phiA/psiA, got {text!r}")


def render_json(obj) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(cfg: RunConfig, obj: dict, human: str) -> None:
    sys.stdout.write(render_json(obj) if cfg.format == "json" else human + "\n")


def _require_p(cfg: RunConfig) -> int:
    if cfg.p is None:
        raise InputError("--p is required")
    return cfg.p


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_integrate(args, cfg: RunConfig) -> int:
    p = _require_p(cfg)
    ctx = PadicContext(p, cfg.N)
    a, b = parse_arc(args.arc)
    if a == b:
        raise InputError("arc needs a != b")
    arc = Arc.of(ctx, a, b)
    f = parse_function_spec(args.func, arc)
    if args.closed_form:
        alpha = args.alpha or 0
        val = integrate_rational_closed_form(f, arc, alpha)
        obj = {"function": args.func, "arc": str(arc), "alpha": alpha, "method": "closed form",
               "value": val.to_json()}
        _emit(cfg, obj, f"closed form over {arc} (alpha={alpha}):\n  {val.render()}")
        return EXIT_OK
    path = parse_path(args.path)
    try:
        res = integrate_limit(f, arc, path, cfg.tau, k_max=cfg.k_max, window=cfg.window,
                              lambda_max=cfg.lambda_max)
        code = EXIT_OK
    except NoConvergence as e:
        res, code = e.result, EXIT_NOCONV
    obj = {"function": args.func, "arc": str(arc), "result": res.to_json()}
    lines = [
        f"integral of {args.func} over {arc} along {res.schedule}",
        f"  value      {res.value.render()}",
        f"  valuation  {res.value.valuation}",
        f"  precision  {res.precision}",
        f"  k_used     {res.k_used}",
        f"  converged  {res.converged}",
        f"  strategy   {res.strategy}",
    ]
    for k, ph, v, d in res.trace:
        lines.append(f"    k={k} phi={ph} diff_valuation={d} A={v.compact()}")
    _emit(cfg, obj, "\n".join(lines))
    return code


def cmd_verify(args, cfg: RunConfig) -> int:
    rep = run_suite(args.suite, cfg.suite_config(args.k_max is not None or "PADIC_ARC_KMAX" in os.environ))
    obj = rep.to_json()
    lines = [f"suite {rep.suite}"]
    for c in rep.checks:
        res = "" if c.residual is None else f" residual={c.residual}"
        det = f" ({c.detail})" if c.detail else ""
        lines.append(f"  {'PASS' if c.passed else 'FAIL'} {c.name}{res}{det}")
    lines.append(f"{'PASS' if rep.passed else 'FAIL'}: {sum(c.passed for c in rep.checks)}"
                 f"/{len(rep.checks)} checks passed")
    _emit(cfg, obj, "\n".join(lines))
    return EXIT_OK if rep.passed else EXIT_CHECKS


def cmd_teichmuller(args, cfg: RunConfig) -> int:
    p = _require_p(cfg)
    ctx = PadicContext(p, cfg.N)
    x = _rational(args.x, "x")
    w = teichmuller(ctx(x))
    _emit(cfg, {"x": str(x), "omega": w.to_json()}, f"omega({x}) = {w.render()}")
    return EXIT_OK


def cmd_raylimits(args, cfg: RunConfig) -> int:
    p = _require_p(cfg)
    ctx = PadicContext(p, cfg.N)
    a, b = parse_arc(args.arc)
    arc = Arc.of(ctx, a, b)
    f = parse_function_spec(args.func, arc)
    path = parse_path(args.path)
    if not isinstance(path, PathSequence):
        raise InputError("raylimits needs a single path sequence, not a family")
    if args.dmax < 1:
        raise InputError("--dmax must be positive")
    table = ray_limits(f, arc, path, args.dmax, cfg.k_max, args.m)
    lines = [f"ray limits of c_n (a-b)^(n+1) along n = {args.m} + d p^phi(k), {table.phi}"]
    for d, e in table.entries.items():
        res = ", ".join("exact" if r == float("inf") else str(r) for r in e.residuals)
        lines.append(f"  d={d} stabilized={e.stabilized} residuals=[{res}] limit={e.limit.render()}")
    ur = table.uniform_residual
    lines.append(f"uniform residual: {'exact' if ur == float('inf') else ur}")
    obj = table.to_json()
    obj["uniform_residual"] = None if ur == float("inf") else ur
    _emit(cfg, obj, "\n".join(lines))
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--p", type=int, help="odd prime")
    sp.add_argument("--N", type=int, default=None, help="working precision in digits (default 40)")
    sp.add_argument("--kmax", dest="k_max", type=int, default=None, help="largest k (default 6)")
    sp.add_argument("--tau", type=int, default=None, help="target precision (default 12)")
    sp.add_argument("--window", type=int, default=None, help="stabilisation window (default 2)")
    sp.add_argument("--lambda-max", dest="lambda_max", type=int, default=None,
                    help="largest family parameter tried (default 12)")
    sp.add_argument("--seed", type=int, default=None, help="seed for randomised suites (default 1)")
    sp.add_argument("--json", action="store_true", help="machine-readable output")
    sp.add_argument("--cache-dir", default=None, help="directory for the Bernoulli cache file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="padic-arc", description="p-adic line integrals on arcs.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("integrate", help="integrate a function over an arc")
    _common(sp)
    sp.add_argument("--func", required=True, help="rat:<expr> or builtin:<name>[:<params>]")
    sp.add_argument("--arc", required=True, help="a=<rat>,b=<rat>")
    sp.add_argument("--path", default="family:phi0",
                    help="k | affine:A,L | power:A,M | family:phiA | family:psiA (default family:phi0)")
    sp.add_argument("--closed-form", action="store_true", help="use the rational closed form")
    sp.add_argument("--alpha", type=int, default=None, help="alpha for --closed-form (default 0)")
    sp.set_defaults(handler=cmd_integrate)

    sp = sub.add_parser("verify", help="run a verification suite")
    _common(sp)
    sp.add_argument("suite", help=", ".join(SUITES))
    sp.set_defaults(handler=cmd_verify)

    sp = sub.add_parser("teichmuller", help="Teichmuller lift of a rational")
    _common(sp)
    sp.add_argument("x", help="rational n/d")
    sp.set_defaults(handler=cmd_teichmuller)

    sp = sub.add_parser("raylimits", help="ray limits of series coefficients")
    _common(sp)
    sp.add_argument("--func", required=True)
    sp.add_argument("--arc", default="a=1,b=0", help="a=<rat>,b=<rat> (default a=1,b=0)")
    sp.add_argument("--path", default="k")
    sp.add_argument("--dmax", type=int, required=True)
    sp.add_argument("--m", type=int, default=-1, help="ray offset (default -1)")
    sp.set_defaults(handler=cmd_raylimits)
    return ap


def _with_cache(cfg: RunConfig, run):
    if not cfg.cache_dir:
        return run()
    path = Path(cfg.cache_dir) / CACHE_FILE
    cache = default_cache()
    cache.load(path)
    try:
        return run()
    finally:
        path.parent.mkdir(parents=True, exist_ok=True)
        cache.save(path)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        cfg = RunConfig.from_args(args)
        return _with_cache(cfg, lambda: args.handler(args, cfg))
    except UnknownSuite as e:
        print(f"error: {e.args[0]}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, PadicError, ValueError, KeyError) as e:
        msg = e.args[0] if e.args else type(e).__name__
        print(f"error: {type(e).__name__}: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
