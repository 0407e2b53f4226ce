import io

import pytest

from cacc.cli import main

from oracles import PAPER

NAT = "sort nat\ncons 0 : nat\ncons s : nat -> nat\n"


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


@pytest.fixture
def spec(tmp_path):
    def write(text, name="t.cac"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


def test_check_bundled_theory():
    code, out = run("check", str(PAPER))
    assert code == 0
    assert "General Schema: PASS" in out
    code, out = run("check", "@paper", "--machine")
    assert code == 0 and out.splitlines()[-1] == "GLOBAL PASS"


def test_normalize_ackermann():
    code, out = run("normalize", "@paper", "-e", "ack(s(s(0)),s(s(0)))")
    assert code == 0 and out.strip() == "s(s(s(s(s(s(s(0)))))))"


def test_normalize_trace_and_strategy():
    code, out = run("normalize", "@paper", "-e", "plus(s(0),s(0))", "--trace", "--strategy", "innermost")
    assert code == 0
    lines = out.splitlines()
    assert lines[-1] == "s(s(0))"
    assert all(" ~> " in line for line in lines[:-1])


def test_type_against_with_conversion():
    code, out = run("type", "@paper", "-E", "a:Pi n:nat.*, n:nat, x:a (plus(n,0))", "-e", "x",
                    "--against", "a n", "--explain")
    assert code == 0
    assert out.splitlines()[0] == "x : a n"
    assert "(conv)" in out


def test_type_error_exit_code(capsys):
    code, _ = run("type", "@paper", "-e", "plus(true, 0)")
    assert code == 1
    assert "at 1" in capsys.readouterr().err


def test_parse_error_exit_code(capsys, spec):
    code, _ = run("check", spec(NAT + "fun f : nat ->\n"))
    assert code == 2
    assert "t.cac:5:1:" in capsys.readouterr().err
    code, _ = run("type", "@paper", "-e", "plus(0,")
    assert code == 2


def test_missing_file_and_usage():
    assert run("check", "/nonexistent/x.cac")[0] == 2
    assert run("frobnicate")[0] == 2
    assert run("normalize", "@paper", "-e", "0", "--fuel", "0")[0] == 2


def test_fuel_exhaustion(capsys, spec):
    path = spec(NAT + "fun loop : nat -> nat\nrule loop(x) => loop(x)\n")
    code, _ = run("normalize", path, "-e", "loop(0)", "--fuel", "100")
    assert code == 1
    assert "fuel exhausted" in capsys.readouterr().err


def test_check_failure_reports_rule_location(capsys, spec):
    path = spec(NAT + "fun g : nat -> nat\nfun h : nat -> nat -> nat\nrule g(x) => h(x, x)\n")
    code, out = run("check", path, "--machine")
    assert code == 1
    assert "RULE g.1 FAIL not-conservative" in out
    assert "t.cac:6:1: rule g.1: not-conservative" in capsys.readouterr().err


def test_assume_fo_terminating(spec):
    path = spec(NAT + "fun p : nat -> nat -> nat\nrule p(x, y) => p(y, x)\n")
    assert run("check", path)[0] == 1
    code, out = run("check", path, "--assume-fo-terminating", "--machine")
    assert "FIRST-ORDER PASS assumed" in out


def test_recursor_command(spec):
    code, out = run("recursor", "@paper", "ord", "nat")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("fun rec_ord_nat : ord -> nat -> ")
    assert lines[3] == ("rule rec_ord_nat(lim_ord(a1), u, v, w) => "
                        "w a1 (\\x1:nat. rec_ord_nat(a1 x1, u, v, w))  # rec_ord_nat.lim_ord")


def test_recursor_output_reparses(spec, tmp_path):
    code, out = run("recursor", "@paper", "nat", "nat -> nat")
    base = (PAPER.read_text())
    path = spec(base + out, "r.cac")
    code, report = run("check", path, "--machine")
    assert code == 0, report


def test_recursor_rejected_sort(capsys, spec):
    path = spec(NAT + "sort w\ncons c : (w -> nat) -> w\n")
    assert run("recursor", path, "w", "nat")[0] == 1
    assert "not a strictly positive" in capsys.readouterr().err


def test_recursor_request_rejected_in_file(capsys, spec):
    path = spec(NAT + "sort w\ncons c : (w -> nat) -> w\nrecursor r of w to nat\n")
    assert run("check", path)[0] == 1
    assert "t.cac:6:1:" in capsys.readouterr().err
