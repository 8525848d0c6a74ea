import json
import subprocess
import sys
from fractions import Fraction

import pytest

from padic_arc.cli import InputError, RunConfig, build_parser, main, parse_arc, parse_path, render_json
from padic_arc.padic_core import PadicContext, PadicNumber, teichmuller
from padic_arc.series import InterlockedFamily, PathSequence


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_integrate_default_family_converges(capsys):
    code, out, _ = run(capsys, "integrate", "--p", "5", "--func", "rat:1/(x-3)", "--arc", "a=0,b=1", "--json")
    assert code == 0
    obj = json.loads(out)
    res = obj["result"]
    assert res["converged"] and res["precision"] >= 12
    value = PadicNumber.from_json(res["value"], 40)
    w = PadicContext(5).one() / (1 - teichmuller(PadicContext(5)(3)))
    # the integral of 1/(x - 3) is the boundary weight 1/(1 - omega(3))
    assert value.agreement(w) >= res["precision"]


def test_integrate_identity_path_reports_no_convergence(capsys):
    code, out, _ = run(capsys, "integrate", "--p", "5", "--func", "rat:1/(x-3)", "--arc", "a=0,b=1",
                       "--path", "k", "--json")
    assert code == 2
    res = json.loads(out)["result"]
    assert not res["converged"] and res["precision"] < 12


def test_closed_form(capsys):
    code, out, _ = run(capsys, "integrate", "--p", "5", "--func", "rat:2/(x-10) + 1/(x-1/5)",
                       "--arc", "a=0,b=1", "--closed-form", "--json")
    assert code == 0
    assert PadicNumber.from_json(json.loads(out)["value"], 40) == PadicContext(5)(2)


def test_human_output_lists_trace(capsys):
    code, out, _ = run(capsys, "integrate", "--p", "3", "--func", "rat:x^2+1", "--arc", "a=0,b=1")
    assert code == 0
    assert "converged  True" in out and "k=1" in out


def test_teichmuller_command(capsys):
    code, out, _ = run(capsys, "teichmuller", "--p", "5", "2", "--json")
    assert code == 0
    w = PadicNumber.from_json(json.loads(out)["omega"], 40)
    assert (w**4 - 1).is_zero() and w.residue(1) == 2


def test_raylimits_command(capsys):
    code, out, _ = run(capsys, "raylimits", "--p", "5", "--func", "builtin:artin_hasse_loderiv",
                       "--dmax", "3", "--kmax", "3", "--json")
    assert code == 0
    obj = json.loads(out)
    # every ray is exact, so the residual is the full working precision
    assert obj["uniform_residual"] == 40


def test_verify_passing_suite_and_json_roundtrip(capsys):
    code, out, _ = run(capsys, "verify", "kazandzidis", "--json")
    assert code == 0
    obj = json.loads(out)
    assert obj["passed"] and render_json(obj) == out


def test_exit_codes_for_bad_input(capsys):
    assert run(capsys, "verify", "no-such-suite")[0] == 1
    assert run(capsys, "integrate", "--p", "4", "--func", "rat:x", "--arc", "a=0,b=1")[0] == 1
    assert run(capsys, "integrate", "--p", "2", "--func", "rat:x", "--arc", "a=0,b=1")[0] == 1
    code, _, err = run(capsys, "integrate", "--p", "5", "--func", "rat:1/(x-", "--arc", "a=0,b=1")
    assert code == 1 and "position" in err
    assert run(capsys, "integrate", "--p", "5", "--func", "rat:1/(x-6)", "--arc", "a=0,b=1")[0] == 1
    assert run(capsys, "integrate", "--p", "5", "--func", "rat:x", "--arc", "a=0,b=0")[0] == 1
    assert run(capsys, "integrate", "--p", "5", "--tau", "50", "--func", "rat:x", "--arc", "a=0,b=1")[0] == 1
    assert run(capsys, "bogus")[0] == 1


def test_parsers():
    assert parse_arc("a=1/2, b=3") == (Fraction(1, 2), Fraction(3))
    with pytest.raises(InputError):
        parse_arc("a=1")
    assert isinstance(parse_path("k"), PathSequence)
    assert parse_path("affine:2,3")(1) == 5
    assert parse_path("power:0,2")(3) == 9
    assert isinstance(parse_path("family:psi1"), InterlockedFamily)
    with pytest.raises(InputError):
        parse_path("spiral")


def test_env_overrides_and_flag_precedence():
    parser = build_parser()
    args = parser.parse_args(["integrate", "--func", "rat:x", "--arc", "a=0,b=1", "--tau", "9"])
    cfg = RunConfig.from_args(args, {"PADIC_ARC_N": "30", "PADIC_ARC_TAU": "5", "PADIC_ARC_KMAX": "4"})
    assert (cfg.N, cfg.tau, cfg.k_max) == (30, 9, 4)
    with pytest.raises(InputError):
        RunConfig.from_args(args, {"PADIC_ARC_N": "many"})


def test_cache_dir_written(tmp_path, capsys):
    code, _, _ = run(capsys, "integrate", "--p", "5", "--func", "builtin:bernoulli_psi:2", "--arc", "a=1,b=0",
                     "--kmax", "2", "--tau", "2", "--path", "k", "--cache-dir", str(tmp_path))
    assert code in (0, 2)
    assert (tmp_path / "bernoulli.bin").read_bytes()[:4] == b"PABN"


def test_console_script_exit_code():
    proc = subprocess.run([sys.executable, "-m", "padic_arc.cli", "teichmuller", "--p", "7", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "omega(3)" in proc.stdout
