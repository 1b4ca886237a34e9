import os
import stat
import sys
import textwrap

import pytest

from tcsim.formulas import Atom, Const, Vocabulary
from tcsim.parser import parse_formula
from tcsim.prover import ERROR, PROVED, TIMEOUT, COUNTERSAT, Verdict, find_prover, prove
from tcsim.tptp import ProblemBundle


def fake_prover(tmp_path, body):
    """A tiny executable that plays the role of an external prover."""
    path = tmp_path / "fakeprover.py"
    path.write_text("#!%s\n" % sys.executable + textwrap.dedent(body))
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    return "%s %s {file} {timeout_s}" % (sys.executable, path)


def _bundle():
    return ProblemBundle("b", axioms=[("a", parse_formula("ALL u. p(u)"))],
                         conjecture=("c", parse_formula("ALL u. p(u)")))


def test_szs_theorem(tmp_path):
    cmd = fake_prover(tmp_path, """
        print("% SZS status Theorem for x")
    """)
    v = prove(_bundle(), 5, cmd)
    assert v.kind == PROVED and v.status == "Theorem"


def test_szs_without_percent(tmp_path):
    cmd = fake_prover(tmp_path, """
        print("SZS status CounterSatisfiable")
    """)
    assert prove(_bundle(), 5, cmd).kind == COUNTERSAT


def test_szs_gaveup_is_timeout(tmp_path):
    cmd = fake_prover(tmp_path, """
        print("% SZS status GaveUp")
    """)
    assert prove(_bundle(), 5, cmd).kind == TIMEOUT


def test_no_status_line_is_error_not_proved(tmp_path):
    cmd = fake_prover(tmp_path, """
        print("proof found!!")
    """)
    v = prove(_bundle(), 5, cmd)
    assert v.kind == ERROR
    assert not v.proved


def test_unknown_status_is_error(tmp_path):
    cmd = fake_prover(tmp_path, """
        print("% SZS status Shrug")
    """)
    assert prove(_bundle(), 5, cmd).kind == ERROR


def test_missing_executable_is_error():
    v = prove(_bundle(), 5, "/nonexistent/prover {file} {timeout_s}")
    assert v.kind == ERROR


def test_watchdog_timeout(tmp_path):
    cmd = fake_prover(tmp_path, """
        import time
        time.sleep(60)
    """)
    v = prove(_bundle(), 0.2, cmd)
    assert v.kind == TIMEOUT


def test_prover_receives_tptp_file(tmp_path):
    cmd = fake_prover(tmp_path, """
        import sys
        text = open(sys.argv[1]).read()
        assert "conjecture" in text
        print("% SZS status Theorem")
    """)
    assert prove(_bundle(), 5, cmd).kind == PROVED


def test_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("TCSIM_PROVER", "myprover {file}")
    assert find_prover("other") == "myprover {file}"
    monkeypatch.delenv("TCSIM_PROVER")
    assert find_prover("other") == "other"
