import random

import pytest

from tcsim.formulas import (
    And,
    Atom,
    Bot,
    Equal,
    Exists,
    Forall,
    Iff,
    Implies,
    Not,
    Or,
    TC,
    Top,
    Var,
    alpha_equal,
    free_vars,
)
from tcsim.parser import (
    SpecError,
    parse_formula,
    parse_spec,
    print_formula,
    rename_relations,
)

from helpers import random_formula


def test_precedence_example():
    f = parse_formula("!a(u) & b(u) -> c(u)")
    want = Implies(And((Not(Atom("a", (Var("u"),))), Atom("b", (Var("u"),)))),
                   Atom("c", (Var("u"),)))
    assert f == want


def test_quantified_iff():
    f = parse_formula("ALL v1,v2. n(v1,v2) <-> n'(v2,v1)")
    want = Forall("v1", Forall("v2", Iff(Atom("n", (Var("v1"), Var("v2"))),
                                         Atom("n'", (Var("v2"), Var("v1"))))))
    assert f == want


def test_tc_node():
    assert parse_formula("TC[n](u,v)") == TC("n", Var("u"), Var("v"))


def test_and_binds_tighter_than_or():
    f = parse_formula("a(u) & b(u) | c(u)")
    assert isinstance(f, Or) and isinstance(f.parts[0], And)


def test_arrows_right_assoc():
    f = parse_formula("a(u) -> b(u) -> c(u)")
    assert isinstance(f, Implies) and isinstance(f.right, Implies)


def test_true_false_and_neq():
    assert parse_formula("true") == Top()
    assert parse_formula("false") == Bot()
    assert parse_formula("u != v") == Not(Equal(Var("u"), Var("v")))


def test_print_examples():
    assert print_formula(TC("n", Var("u"), Var("v"))) == "TC[n](u, v)"
    f = parse_formula("(a(u) | b(u)) & c(u)")
    assert print_formula(f) == "(a(u) | b(u)) & c(u)"
    g = parse_formula("a(u) & b(u) & c(u)")
    assert print_formula(g) == "a(u) & b(u) & c(u)"


def test_roundtrip_random():
    rng = random.Random(23)
    for _ in range(300):
        f = random_formula(rng, 4, ("u",))
        printed = print_formula(f)
        again = parse_formula(printed)
        assert alpha_equal(f, again), printed


def test_syntax_error_position():
    with pytest.raises(SpecError) as exc:
        parse_formula("ALL v. &")
    assert exc.value.line == 1


MINI = """
vocab { p/1 var  q/1  f/2 field  f'/2 after f  c/0 }
loop_cond { EX v. p(v) }
invariant { ALL v. p(v) -> q(v) }
transformer { ALL v1,v2. f'(v1,v2) <-> f(v1,v2) }
goal maintain
"""


def test_parse_spec_mini():
    task = parse_spec(MINI, "mini")
    assert task.goal_kind == "maintain"
    assert task.tc_relations == []
    assert len(task.hypotheses) == 3
    # renamed invariant: p, q have no after versions, so unchanged
    assert alpha_equal(task.conclusion, parse_formula("ALL v. p(v) -> q(v)"))
    assert "c" in task.vocab.constants


def test_maintain_requires_transformer():
    bad = MINI.replace("transformer { ALL v1,v2. f'(v1,v2) <-> f(v1,v2) }\n", "")
    with pytest.raises(SpecError) as exc:
        parse_spec(bad, "bad")
    assert "transformer" in str(exc.value)


def test_undeclared_symbol_rejected():
    bad = MINI.replace("EX v. p(v)", "EX v. zz(v)")
    with pytest.raises(SpecError):
        parse_spec(bad, "bad")


def test_arity_mismatch_rejected():
    bad = MINI.replace("EX v. p(v)", "EX v. f(v)")
    with pytest.raises(SpecError):
        parse_spec(bad, "bad")


def test_primed_relation_must_be_after():
    bad = """
vocab { p/1  g'/2 }
loop_cond { EX v. p(v) }
invariant { ALL v. p(v) }
transformer { ALL v1,v2. g'(v1,v2) <-> g'(v1,v2) }
goal maintain
"""
    with pytest.raises(SpecError) as exc:
        parse_spec(bad, "bad")
    assert "after" in str(exc.value)


def test_exit_goal_shape():
    text = """
vocab { pending/1 var  marked/1 var  f/2 field }
loop_cond { EX v. pending(v) }
invariant { ALL v. marked(v) -> marked(v) }
post { ALL v. marked(v) -> TC[f](v, v) }
goal exit
"""
    task = parse_spec(text, "exit")
    assert alpha_equal(task.hypotheses[0],
                       Not(parse_formula("EX v. pending(v)")))
    assert task.tc_relations == ["f"]


def test_custom_goal_with_block_refs():
    text = """
vocab { p/1  f/2 }
pre { ALL v. p(v) }
post { EX v. p(v) }
goal custom { $pre -> $post }
"""
    task = parse_spec(text, "c")
    assert alpha_equal(task.hypotheses[0], parse_formula("ALL v. p(v)"))
    assert alpha_equal(task.conclusion, parse_formula("EX v. p(v)"))


def test_colors_and_axioms_blocks():
    text = """
vocab { x/1 var  marked/1 var  e/2 field  e'/2 after e }
colors { frontier(v) = marked(v) & (EX w. e(v, w) & !marked(w)) ; }
axioms {
  OUT[marked, e];
  NC[true, e, e'];
  NC[reach[x, e] & !reachback[x, e], e', e];
  SEP[x, frontier, e];
  T1[e];
}
pre { ALL v. x(v) -> marked(v) }
post { ALL v. x(v) -> marked(v) }
goal custom { $pre -> $post }
"""
    task = parse_spec(text, "colors")
    assert [c.name for c in task.user_colors] == ["frontier"]
    labels = [i.label for i in task.explicit_axioms]
    assert labels[0] == "NoExit[marked,e]"
    assert labels[1] == "NewStart[true,e',e]"
    assert "r[x,e]&!rb[x,e]" in labels[2]
    assert labels[3] == "GoOut[x,frontier,e]"
    assert labels[4] == "T1[e]"
    # user color formulas are closure-level (no TC nodes)
    from tcsim.formulas import subformulas, TC as TCNode
    for c in task.user_colors:
        assert not any(isinstance(s, TCNode) for s in subformulas(c.formula))


def test_rename_relations():
    f = parse_formula("ALL v1,v2. n(v1,v2) & TC[n](v1,v2) -> m(v1)")
    got = rename_relations(f, {"n": "n'"})
    assert alpha_equal(got, parse_formula("ALL v1,v2. n'(v1,v2) & TC[n'](v1,v2) -> m(v1)"))


def test_goal_vc_split_maintain():
    text = """
vocab { x/1 var  n/2 field  n'/2 after n }
loop_cond { EX v. x(v) }
invariant { acyclic[n] }
transformer { ALL v1,v2. n'(v1,v2) <-> n(v1,v2) }
goal maintain
"""
    task = parse_spec(text, "m")
    assert len(task.hypotheses) == 3
    assert alpha_equal(task.conclusion,
                       parse_formula("ALL v1,v2. !n'(v1, v2) | !stc_n'(v2, v1)"))
    assert task.tc_relations == ["n", "n'"]


def test_corpus_files_parse():
    from importlib import resources
    for name in ("reverse", "append", "mark", "mark_maintain",
                 "precise_add", "precise_remove_func", "precise_remove_tree"):
        text = resources.files("tcsim").joinpath("corpus/%s.spec" % name).read_text()
        task = parse_spec(text, name)
        assert task.conclusion is not None
        for h in task.hypotheses:
            assert not free_vars(h)
