import pytest

from tcsim.formulas import (
    Atom,
    Const,
    Equal,
    Exists,
    Forall,
    FormulaError,
    Implies,
    Not,
    Var,
    Vocabulary,
    alpha_equal,
)
from tcsim.axioms import t1
from tcsim.parser import parse_formula
from tcsim.tptp import ProblemBundle, sanitize_symbol, to_tptp
from tcsim.tptp_read import parse_tptp

from helpers import MiniTptp


def _bundle():
    voc = Vocabulary()
    voc.declare("n'", 2)
    b = ProblemBundle(
        "demo",
        axioms=[("t1_n'", t1("n'", voc).whole)],
        hypotheses=[("h", parse_formula("ALL u. p(u) -> q(u)"))],
        conjecture=("goal", parse_formula("ALL u,v. stc_n'(u, v) -> stc_n'(u, v)")),
    )
    return b


GOLDEN = """% bundle: demo
fof(ax_000_t1_n_ap, axiom,
    (! [X0,X1] : (stc_n_ap(X0,X1) <=> ((X0 = X1) | (? [X2] : (n_ap(X0,X2) & stc_n_ap(X2,X1))))))).
fof(hyp_000_h, hypothesis,
    (! [X0] : (p(X0) => q(X0)))).
fof(goal_000_goal, conjecture,
    (! [X0,X1] : (stc_n_ap(X0,X1) => stc_n_ap(X0,X1)))).
"""


def test_golden_bytes():
    assert to_tptp(_bundle()) == GOLDEN


def test_deterministic():
    assert to_tptp(_bundle()) == to_tptp(_bundle())


def test_roles():
    text = to_tptp(_bundle())
    assert "axiom," in text and "hypothesis," in text and "conjecture," in text


def test_equality_rendering():
    b = ProblemBundle("eq", conjecture=("c", parse_formula("ALL u,v. u = v | u != v")))
    text = to_tptp(b)
    assert "(X0 = X1)" in text and "(X0 != X1)" in text


def test_sanitize_primes_and_collisions():
    assert sanitize_symbol("n'") == "n_ap"
    assert sanitize_symbol("0") == "c_0"
    assert sanitize_symbol("f_cut_x") == "f_cut_x"
    voc = Vocabulary()
    b = ProblemBundle("clash", conjecture=(
        "c", Implies(Atom("n'", (Const("a"), Const("a"))),
                     Atom("n_ap", (Const("a"), Const("a"))))))
    with pytest.raises(FormulaError):
        to_tptp(b)


def test_rejects_open_and_tc_formulas():
    from tcsim.formulas import TC
    b = ProblemBundle("open", conjecture=("c", Atom("p", (Var("u"),))))
    with pytest.raises(FormulaError):
        to_tptp(b)
    b2 = ProblemBundle("tc", conjecture=("c", Forall("u", TC("f", Var("u"), Var("u")))))
    with pytest.raises(FormulaError):
        to_tptp(b2)


def test_reparse_oracle_independent():
    """The emitted file re-read by an independent reader matches the source
    formulas up to renaming."""
    b = _bundle()
    text = to_tptp(b)
    entries = MiniTptp(text).parse()
    assert [role for _, role, _ in entries] == ["axiom", "hypothesis", "conjecture"]
    rename = {"n'": "n_ap", "stc_n'": "stc_n_ap"}
    from tcsim.parser import rename_relations
    for (name, role, got), (label, want) in zip(
            entries, b.axioms + b.hypotheses + [b.conjecture]):
        assert alpha_equal(got, rename_relations(want, rename)), name


def test_reparse_with_package_reader():
    b = _bundle()
    entries = parse_tptp(to_tptp(b))
    assert len(entries) == 3
    assert entries[2][1] == "conjecture"


def test_injective_on_distinct_bundles():
    b1 = ProblemBundle("x", conjecture=("c", parse_formula("ALL u. p(u)")))
    b2 = ProblemBundle("x", conjecture=("c", parse_formula("ALL u. q(u)")))
    assert to_tptp(b1) != to_tptp(b2)
