import itertools

import pytest

from tcsim.formulas import (
    And,
    Atom,
    Const,
    Equal,
    Exists,
    Forall,
    FormulaError,
    Implies,
    Not,
    Var,
    alpha_equal,
    conj,
)
from tcsim.models import evaluate, is_tc_model
from tcsim.words import (
    WordVocabulary,
    all_words,
    compile_formula_to_dfa,
    mark,
    marker_env,
    nonempty_within,
    plain,
    word_axioms,
    word_model,
)

WV = WordVocabulary(("a", "b"))
x, y, v = Var("x"), Var("y"), Var("v")


def test_word_model_ab():
    m = word_model(plain("ab"), WV)
    assert m.size == 2
    assert m.rels["s"] == frozenset({(0, 1)})
    assert m.rels["p_a"] == frozenset({(0,)})
    assert m.rels["p_b"] == frozenset({(1,)})
    assert m.consts == {"0": 0, "max": 1}
    assert is_tc_model(m)


def test_word_models_satisfy_axioms():
    ax = word_axioms(WV)
    for length in range(1, 7):
        for w in all_words(WV, length):
            assert evaluate(word_model(w, WV), ax)


def test_axiom_a4_shapes():
    ax = word_axioms(WV)
    a4 = ax.parts[-1]
    want = Forall("x", conj([
        conj([Atom("p_a", (x,)), Not(Atom("p_b", (x,)))]),
    ]))
    # two-letter alphabet: exactly one of p_a, p_b at each position
    got = evaluate(word_model(plain("ab"), WV), a4)
    assert got
    single = WordVocabulary(("a",))
    a4_single = word_axioms(single).parts[-1]
    assert alpha_equal(a4_single, Forall("x", Atom("p_a", (x,))))


def test_acyclicity_consequence():
    acyc = Forall("x", Forall("y", Implies(Atom("s", (x, y)),
                                           Not(Atom("stc_s", (y, x))))))
    for length in range(1, 7):
        for w in all_words(WV, length):
            assert evaluate(word_model(w, WV), acyc)


def test_letter_automaton_published_tables():
    d = compile_formula_to_dfa(Atom("p_a", (x,)), WV)
    assert len(d.state_defs) == 3
    assert alpha_equal(d.state_defs[0], Not(Atom("stc_s", (x, v))))
    assert alpha_equal(d.state_defs[1],
                       And((Atom("stc_s", (x, v)), Atom("p_a", (x,)))))
    assert alpha_equal(d.state_defs[2],
                       And((Atom("stc_s", (x, v)), Not(Atom("p_a", (x,))))))


def test_stc_automaton_published_tables():
    d = compile_formula_to_dfa(Atom("stc_s", (x, y)), WV)
    assert len(d.state_defs) == 3
    assert alpha_equal(d.state_defs[2],
                       And((Atom("stc_s", (x, y)), Atom("stc_s", (y, v)))))


def test_succ_automaton_has_four_states():
    d = compile_formula_to_dfa(Atom("s", (x, y)), WV)
    assert len(d.state_defs) == 4


def test_accepts_letter_marked():
    d = compile_formula_to_dfa(Atom("p_a", (x,)), WV)
    assert d.accepts(mark(plain("bab"), "x", 1))
    assert not d.accepts(mark(plain("bab"), "x", 0))


def test_accepts_eq():
    d = compile_formula_to_dfa(Equal(x, y), WV)
    w = mark(mark(plain("aba"), "x", 1), "y", 1)
    assert d.accepts(w)
    w2 = mark(mark(plain("aba"), "x", 1), "y", 2)
    assert not d.accepts(w2)


def test_accepts_requires_markers():
    d = compile_formula_to_dfa(Atom("p_a", (x,)), WV)
    with pytest.raises(FormulaError):
        d.accepts(plain("ab"))
    with pytest.raises(FormulaError):
        marker_env(mark(mark(plain("ab"), "x", 0), "x", 1))


def test_empty_word_rejected():
    d = compile_formula_to_dfa(Exists("x", Atom("p_a", (x,))), WV)
    with pytest.raises(FormulaError):
        d.accepts([])


def test_exists_rejects_all_b():
    d = compile_formula_to_dfa(Exists("x", Atom("p_a", (x,))), WV)
    assert not d.accepts(plain("bbb"))
    assert d.accepts(plain("bba"))


def test_constants_unsupported_in_compile():
    with pytest.raises(FormulaError):
        compile_formula_to_dfa(Atom("stc_s", (Const("0"), x)), WV)
    with pytest.raises(FormulaError):
        compile_formula_to_dfa(Atom("q", (x,)), WV)


def test_base_state_definitions_faithful():
    """After reading positions 0..u the run sits in state q iff q's defining
    formula holds at u -- exhaustively for words up to length 5."""
    base = {
        "letter": (Atom("p_a", (x,)), ("x",)),
        "eq": (Equal(x, y), ("x", "y")),
        "succ": (Atom("s", (x, y)), ("x", "y")),
        "stc": (Atom("stc_s", (x, y)), ("x", "y")),
    }
    for name, (phi, vs) in base.items():
        d = compile_formula_to_dfa(phi, WV)
        for length in range(1, 6):
            for w0 in all_words(WV, length):
                for marks in itertools.product(range(length), repeat=len(vs)):
                    w = w0
                    for var, pos in zip(vs, marks):
                        w = mark(w, var, pos)
                    env = marker_env(w)
                    m = word_model(w, WV)
                    trace = d.run(w)
                    for u, state in enumerate(trace):
                        for q, qdef in enumerate(d.state_defs):
                            holds = evaluate(m, qdef, {**env, "v": u})
                            assert holds == (state == q), (
                                name, w, u, q)


def test_subset_states_keep_one_unprimed():
    # the construction asserts this internally; exercise it on nested exists
    f = Exists("x", Exists("y", And((Atom("s", (x, y)), Atom("p_b", (y,))))))
    d = compile_formula_to_dfa(f, WV)
    assert d.accepts(plain("ab"))
    assert not d.accepts(plain("ba"))


def test_nonempty_within():
    d = compile_formula_to_dfa(Exists("x", Atom("p_a", (x,))), WV)
    w = nonempty_within(d, 4)
    assert w is not None and any(lt == "a" for lt, _ in w)
    contradiction = compile_formula_to_dfa(
        Exists("x", And((Atom("p_a", (x,)), Not(Atom("p_a", (x,)))))), WV)
    assert nonempty_within(contradiction, 5) is None


def test_dfa_exports():
    d = compile_formula_to_dfa(Exists("x", Atom("p_a", (x,))), WV)
    dot = d.dot()
    assert dot.startswith("digraph") and "doublecircle" in dot
    table = d.table()
    assert "q0" in table and ":=" in table


def test_agreement_smoke_depth2():
    fam = [
        Exists("x", Atom("p_a", (x,))),
        Not(Exists("x", Atom("p_b", (x,)))),
        Exists("x", Exists("y", And((Atom("stc_s", (x, y)),
                                     Atom("p_a", (x,)), Atom("p_b", (y,)))))),
        Exists("x", Not(Exists("y", Atom("s", (x, y))))),
        Exists("x", Exists("y", And((Equal(x, y), Atom("p_a", (x,)))))),
    ]
    for phi in fam:
        d = compile_formula_to_dfa(phi, WV)
        for length in range(1, 5):
            for w in all_words(WV, length):
                assert d.accepts(w) == evaluate(word_model(w, WV), phi), (phi, w)
