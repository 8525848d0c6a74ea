"""Acceptance criteria 1-10, each backed by one or more verification suites.

Run with ``pytest -v tests/test_acceptance.py`` or directly as a script;
either way one PASS/FAIL line is printed per criterion.
"""

import sys
import time

import pytest

from padic_arc.suites import SuiteConfig, run_suite

CRITERIA = {
    1: ("oracle equivalence", ["oracle"]),
    2: ("rational closed forms", ["rational"]),
    3: ("Artin-Hasse congruence", ["artin-hasse"]),
    4: ("zero-pole count", ["zp"]),
    5: ("Cauchy on discs", ["cauchy-disc"]),
    6: ("worked p=5 examples", ["cauchy-example-p5"]),
    7: ("determinant unit norm", ["det-unit"]),
    8: ("Kazandzidis inequality", ["kazandzidis"]),
    9: ("ray limits and L_p values", ["ray-lp"]),
    10: ("property suites", ["maxmod", "substitution", "invariants"]),
}


def evaluate(number: int):
    """Run the suites of one criterion; returns (passed, summary line, failing checks)."""
    title, suites = CRITERIA[number]
    t0 = time.time()
    failing = []
    total = 0
    for name in suites:
        rep = run_suite(name, SuiteConfig())
        total += len(rep.checks)
        failing += [f"{name}: {c.name} (residual {c.residual}; {c.detail})" for c in rep.checks if not c.passed]
    ok = not failing
    line = (f"criterion {number:2d} {'PASS' if ok else 'FAIL'} {title}: "
            f"{total - len(failing)}/{total} checks, {time.time() - t0:.1f} s")
    return ok, line, failing


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    ok, line, failing = evaluate(number)
    with capsys.disabled():
        print(f"\n{line}")
        for f in failing:
            print(f"    {f}")
    assert ok, "; ".join(failing)


if __name__ == "__main__":
    results = [evaluate(n) for n in sorted(CRITERIA)]
    for ok, line, failing in results:
        print(line)
        for f in failing:
            print(f"    {f}")
    sys.exit(0 if all(r[0] for r in results) else 1)
