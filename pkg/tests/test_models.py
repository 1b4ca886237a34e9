import random

import pytest

from tcsim.axioms import Color, ind_instance, induction_support, noexit, t1, t2
from tcsim.formulas import (
    And,
    Atom,
    Const,
    Equal,
    Exists,
    Forall,
    Implies,
    Not,
    TC,
    Var,
    Vocabulary,
)
from tcsim.models import (
    FiniteModel,
    OracleReport,
    check_entailment_bounded,
    check_tc_valid,
    closure,
    evaluate,
    evaluate_naive,
    format_model,
    is_tc_model,
)
from tcsim.oracles import free_color, g1_model

from helpers import random_formula, random_model


def test_closure_empty_is_diagonal():
    assert closure([], 3) == frozenset({(0, 0), (1, 1), (2, 2)})


def test_closure_two_cycles():
    # two disjoint 2-cycles: all pairs within each cycle plus the diagonal
    table = {(0, 1), (1, 0), (2, 3), (3, 2)}
    want = {(i, j) for i in (0, 1) for j in (0, 1)}
    want |= {(i, j) for i in (2, 3) for j in (2, 3)}
    assert closure(table, 4) == frozenset(want)


def test_closure_chain():
    got = closure({(0, 1), (1, 2)}, 3)
    assert got == frozenset({(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)})


def test_closure_algebra_small():
    rng = random.Random(2)
    for _ in range(200):
        n = rng.randint(1, 6)
        t = frozenset((rng.randrange(n), rng.randrange(n))
                      for _ in range(rng.randint(0, n * n)))
        c = closure(t, n)
        assert closure(c, n) == c  # idempotent
        assert all((i, i) in c for i in range(n))  # reflexive
        assert all((a, c2) in c for (a, b) in c for (b2, c2) in c if b == b2)  # transitive
        t2_ = t | {(0, n - 1)}
        assert closure(t2_, n) >= c  # monotone


def test_evaluate_word_like():
    m = FiniteModel(2, {"s": frozenset({(0, 1)}), "stc_s": closure({(0, 1)}, 2)},
                    {"0": 0, "max": 1}, {"s": "stc_s"})
    assert evaluate(m, Atom("stc_s", (Const("0"), Const("max"))))


def test_evaluate_tc_reflexive():
    m = FiniteModel(3, {"f": frozenset()}, {"a": 1}, {})
    assert evaluate(m, TC("f", Const("a"), Const("a")))


def test_evaluate_g1_noexit_false():
    voc = Vocabulary()
    voc.declare("f", 2)
    voc.declare("A", 1)
    inst = noexit(free_color("A"), "f", voc)
    assert not evaluate(g1_model(), inst.whole)


def test_is_tc_model():
    g1 = g1_model()
    assert not is_tc_model(g1)
    fixed = g1.replace(stc_f=closure(g1.rels["f"], 4))
    assert is_tc_model(fixed)
    assert is_tc_model(FiniteModel(2, {"f": frozenset()}, {}, {}))  # no pairs


def test_check_tc_valid_t1():
    voc = Vocabulary()
    voc.declare("f", 2)
    rep = check_tc_valid(t1("f", voc).whole, 3, voc)
    assert rep.verdict == "valid_up_to"


def test_check_tc_valid_refutes_nontheorem():
    voc = Vocabulary()
    voc.declare("f", 2)
    bad = Forall("u", Forall("v", Atom("stc_f", (Var("u"), Var("v")))))
    rep = check_tc_valid(bad, 3, voc)
    assert rep.verdict == "refuted"
    assert rep.countermodel is not None
    assert "universe" in format_model(rep.countermodel)


def test_entailment_trivial_refutation():
    voc = Vocabulary()
    voc.declare("p", 1)
    voc.constants.append("a")
    rep = check_entailment_bounded([], Atom("p", (Const("a"),)), 2, voc)
    assert rep.verdict == "refuted"
    assert rep.countermodel.size == 1


def test_entailment_t1_t2_noexit_separation():
    voc = Vocabulary()
    voc.declare("f", 2)
    voc.declare("A", 1)
    inst = noexit(free_color("A"), "f", voc)
    rep = check_entailment_bounded([t1("f", voc).whole, t2("f", voc).whole],
                                   inst.whole, 4, voc)
    assert rep.verdict == "refuted"
    assert rep.countermodel.size <= 4


def test_budget_is_explicit():
    voc = Vocabulary()
    voc.declare("f", 2)
    rep = check_tc_valid(t1("f", voc).whole, 4, voc, budget=10)
    assert rep.verdict == "budget_exceeded"


def test_dual_evaluators_agree():
    rng = random.Random(13)
    for _ in range(400):
        m = random_model(rng, rng.randint(1, 4))
        f = random_formula(rng, 3)
        env = {}
        for name in sorted(__import__("tcsim.formulas", fromlist=["free_vars"]).free_vars(f)):
            env[name] = rng.randrange(m.size)
        assert evaluate(m, f, env) == evaluate_naive(m, f, env)


def test_single_induction_witness_does_not_give_t2():
    """Regression: T1 plus the lone last-edge induction witness admits a
    5-element model violating T2, so the witness alone cannot prove it."""
    voc = Vocabulary()
    voc.declare("f", 2)
    m = FiniteModel(
        5,
        {
            "f": frozenset({(0, 4), (4, 4), (1, 2), (2, 3)}),
            "stc_f": frozenset([(i, i) for i in range(5)]
                               + [(0, 1), (0, 4), (4, 1), (1, 2), (1, 3), (2, 3)]),
        },
        {},
        {"f": "stc_f"},
    )
    sup = induction_support("T2", "f", voc)
    transfer_witness, lastedge_witness = sup
    assert evaluate(m, t1("f", voc).whole)
    assert evaluate(m, lastedge_witness.whole)
    assert not evaluate(m, t2("f", voc).whole)
    # the reachability-transfer witness is what rules the model out
    assert not evaluate(m, transfer_witness.whole)


def test_nelson_diagonal_matters():
    """The schemes must be instantiated with repetition: dropping the
    diagonal stop-point pair re-admits a fake closure fact."""
    from tcsim.axioms import nelson_axioms

    voc = Vocabulary()
    voc.declare("f", 2)
    voc.constants.extend(["c0", "c1"])
    insts = nelson_axioms("f", [Const("c0"), Const("c1")], voc)
    labels = [i.label for i in insts]
    assert "N5[f,c1,c1]" in labels
    m = FiniteModel(
        2,
        {
            "f": frozenset({(1, 1)}),
            "f_cut_c0": frozenset({(1, 1)}),
            "f_cut_c1": frozenset(),
            "stc_f": frozenset({(0, 0), (1, 1), (0, 1)}),
            "stc_f_cut_c0": frozenset({(0, 0), (1, 1)}),
            "stc_f_cut_c1": frozenset({(0, 0), (1, 1)}),
        },
        {"c0": 0, "c1": 1},
        {},
    )
    # f here is functional, so the guards are live; every instance except
    # the diagonal N5 at c1 is satisfied
    failing = [i.label for i in insts if not evaluate(m, i.whole)]
    assert failing == ["N5[f,c1,c1]"]
