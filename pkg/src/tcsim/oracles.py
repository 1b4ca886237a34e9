"""Named bounded checks: scheme soundness, the two-cycle separation model,
precise-update semantics, and the word-theory characterization.

These are the self-contained (no prover) cases behind `tcsim oracle`,
`tcsim corpus run-all --oracle-only`, and the acceptance suite.
"""

from __future__ import annotations

from typing import Callable, Dict, Optional, Tuple

from .axioms import Color, base_axioms, noexit, t1, t2, tleft, trans, order
from .formulas import (
    Atom,
    Const,
    Equal,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Var,
    Vocabulary,
    conj,
    disj,
    eliminate_tc,
    exists,
    expand_shorthands,
    forall,
)
from .models import (
    FiniteModel,
    OracleReport,
    check_entailment_bounded,
    check_tc_valid,
    evaluate,
    format_model,
    is_tc_model,
)
from . import sweeps
from .words import WordVocabulary, all_words, word_axioms, word_model


def _generic_vocab() -> Vocabulary:
    v = Vocabulary()
    v.declare("f", 2)
    v.declare("g", 2)
    v.declare("A", 1)
    v.declare("B", 1)
    return v


def free_color(name: str) -> Color:
    return Color(name, "v", Atom(name, (Var("v"),)), "free-table")


# ---------------------------------------------------------------------------
# named validity checks


def _sweep_report(scheme: str, n_max: int) -> OracleReport:
    import time
    t0 = time.time()
    try:
        checked = sweeps.SCHEME_SWEEPS[scheme](n_max)
    except sweeps.SweepFailure as exc:
        return OracleReport("refuted", n_max, None, 0, time.time() - t0)
    return OracleReport("valid_up_to", n_max, None, checked, time.time() - t0)


def _plain_check(builder) -> Callable[[int], OracleReport]:
    def run(n_max: int) -> OracleReport:
        voc = _generic_vocab()
        return check_tc_valid(builder(voc), n_max, voc)
    return run


def update_vocabulary() -> Vocabulary:
    v = Vocabulary()
    v.declare("s", 1)
    v.declare("t", 1)
    v.declare("e", 2)
    v.declare("e'", 2)
    v.ensure_closure("e")
    v.ensure_closure("e'")
    return v


def _st_hypotheses(vocab: Vocabulary):
    s, t = "s", "t"
    v1, v2 = Var("v1"), Var("v2")
    uniq = []
    for z in (s, t):
        uniq.append(forall(["v1", "v2"], Implies(
            conj([Atom(z, (v1,)), Atom(z, (v2,))]), Equal(v1, v2))))
    nonempty = [Exists("v", Atom(s, (Var("v"),))), Exists("v", Atom(t, (Var("v"),)))]
    return uniq + nonempty


def edge_change(vocab: Vocabulary, add: bool) -> Formula:
    v1, v2 = Var("v1"), Var("v2")
    stamp = conj([Atom("s", (v1,)), Atom("t", (v2,))])
    old = Atom("e", (v1, v2))
    new = Atom("e'", (v1, v2))
    body = disj([old, stamp]) if add else conj([old, Not(stamp)])
    return forall(["v1", "v2"], Iff(new, body))


def precise_update_formula(vocab: Vocabulary, add: bool) -> Formula:
    stc_e = vocab.stc_name("e")
    stc_ep = vocab.stc_name("e'")
    v1, v2, vs, vt = Var("v1"), Var("v2"), Var("vs"), Var("vt")
    through = conj([Atom(stc_e, (v1, vs)), Atom(stc_e, (vt, v2))])
    if add:
        rhs = disj([Atom(stc_e, (v1, v2)), through])
    else:
        rhs = conj([Atom(stc_e, (v1, v2)), Not(through)])
    inner = forall(["v1", "v2"], Iff(Atom(stc_ep, (v1, v2)), rhs))
    return exists(["vs", "vt"],
                  conj([Atom("s", (vs,)), Atom("t", (vt,)), inner]))


def edge_exists(vocab: Vocabulary) -> Formula:
    v1, v2 = Var("v1"), Var("v2")
    return forall(["v1", "v2"], Implies(
        conj([Atom("s", (v1,)), Atom("t", (v2,))]), Atom("e", (v1, v2))))


def _func_acyclic(vocab: Vocabulary, rel: str):
    stc = vocab.stc_name(rel)
    u, v, w = Var("u"), Var("v"), Var("w")
    func = forall(["u", "v", "w"], Implies(
        conj([Atom(rel, (u, v)), Atom(rel, (u, w))]), Equal(v, w)))
    acyc = forall(["v1", "v2"], disj([
        Not(Atom(rel, (Var("v1"), Var("v2")))),
        Not(Atom(stc, (Var("v2"), Var("v1")))),
    ]))
    return func, acyc


def _unshared(rel: str) -> Formula:
    u, v, w = Var("u"), Var("v"), Var("w")
    return forall(["u", "v", "w"], Implies(
        conj([Atom(rel, (u, w)), Atom(rel, (v, w))]), Equal(u, v)))


def check_update_add(n_max: int) -> OracleReport:
    voc = update_vocabulary()
    constraints = _st_hypotheses(voc) + [edge_change(voc, True)]
    return check_tc_valid(precise_update_formula(voc, True), n_max, voc, constraints)


def check_update_remove(n_max: int, shape: str) -> OracleReport:
    voc = update_vocabulary()
    constraints = _st_hypotheses(voc) + [edge_change(voc, False), edge_exists(voc)]
    func, acyc = _func_acyclic(voc, "e")
    if shape == "func":
        constraints += [func, acyc]
    elif shape == "tree":
        constraints += [_unshared("e"), acyc]
    elif shape == "acyclic":
        constraints += [acyc]
    elif shape != "general":
        raise KeyError(shape)
    return check_tc_valid(precise_update_formula(voc, False), n_max, voc, constraints)


NAMED_CHECKS: Dict[str, Callable[[int], OracleReport]] = {
    "t1": _plain_check(lambda voc: t1("f", voc).whole),
    "t2": _plain_check(lambda voc: t2("f", voc).whole),
    "tleft": _plain_check(lambda voc: tleft("f", voc).whole),
    "trans": _plain_check(lambda voc: trans("f", voc).whole),
    "order": lambda n: _sweep_report("Order", n),
    "noexit": lambda n: _sweep_report("NoExit", n),
    "goout": lambda n: _sweep_report("GoOut", n),
    "newstart": lambda n: _sweep_report("NewStart", n),
    "ind": lambda n: _sweep_report("Ind", n),
    "tree-order": lambda n: _sweep_report("TreeOrder", n),
    "tree-disjoint": lambda n: _sweep_report("TreeDisjoint", n),
    "update-add": check_update_add,
    "update-remove-func": lambda n: check_update_remove(n, "func"),
    "update-remove-tree": lambda n: check_update_remove(n, "tree"),
    "update-remove-general": lambda n: check_update_remove(n, "general"),
}


def run_named_check(name: str, n_max: int) -> OracleReport:
    return NAMED_CHECKS[name](n_max)


# ---------------------------------------------------------------------------
# the two-cycle separation model


def g1_model() -> FiniteModel:
    """Two disjoint 2-cycles with a deliberately oversized closure table."""
    return FiniteModel(
        4,
        {
            "f": frozenset({(0, 1), (1, 0), (2, 3), (3, 2)}),
            "stc_f": frozenset((i, j) for i in range(4) for j in range(4)),
            "A": frozenset({(0,), (1,)}),
        },
        {},
        {"f": "stc_f"},
    )


def g1_facts() -> Dict[str, bool]:
    voc = _generic_vocab()
    m = g1_model()
    A = free_color("A")
    return {
        "is_tc_model": is_tc_model(m),
        "satisfies_t1": evaluate(m, t1("f", voc).whole),
        "satisfies_t2": evaluate(m, t2("f", voc).whole),
        "satisfies_noexit": evaluate(m, noexit(A, "f", voc).whole),
    }


def run_builtin(name: str, n_max: int) -> Tuple[Optional[OracleReport], str]:
    if name == "g1-noexit":
        voc = _generic_vocab()
        A = free_color("A")
        rep = check_entailment_bounded(
            [t1("f", voc).whole, t2("f", voc).whole],
            noexit(A, "f", voc).whole, n_max, voc)
        facts = g1_facts()
        lines = ["published model: is_tc_model=%s t1=%s t2=%s noexit=%s" % (
            facts["is_tc_model"], facts["satisfies_t1"],
            facts["satisfies_t2"], facts["satisfies_noexit"])]
        lines.append("bounded entailment T1 & T2 |- NoExit: " + rep.describe())
        return rep, "\n".join(lines)
    raise KeyError(name)


# ---------------------------------------------------------------------------
# word-theory characterization


def words_satisfy_axioms(max_len: int = 5, alphabet=("a", "b")) -> bool:
    wv = WordVocabulary(tuple(alphabet))
    ax = word_axioms(wv)
    for length in range(1, max_len + 1):
        for w in all_words(wv, length):
            if not evaluate(word_model(w, wv), ax):
                return False
    return True


def tc_models_of_word_axioms_are_words(n_max: int = 4, alphabet=("a", "b")) -> bool:
    """Every closure model of the word axioms up to n_max is a word: the
    successor table is a path from 0 to max covering the universe, and the
    letter predicates partition it."""
    from .models import enumerate_models

    wv = WordVocabulary(tuple(alphabet))
    ax = word_axioms(wv)
    rels = {"s": 2, "stc_s": 2}
    for a in alphabet:
        rels[wv.letter_pred(a)] = 1
    for m in enumerate_models(rels, range(1, n_max + 1), ["0", "max"],
                              {"s": "stc_s"}, True, [ax], None, 50_000_000):
        # walk the successor chain from 0
        succ = {}
        for (i, j) in m.rels["s"]:
            if i in succ:
                return False
            succ[i] = j
        seen = [m.consts["0"]]
        while seen[-1] in succ:
            nxt = succ[seen[-1]]
            if nxt in seen:
                return False
            seen.append(nxt)
        if len(seen) != m.size or seen[-1] != m.consts["max"]:
            return False
        for pos in range(m.size):
            letters = [a for a in alphabet
                       if (seen[pos],) in m.rels[wv.letter_pred(a)]]
            if len(letters) != 1:
                return False
    return True


# ---------------------------------------------------------------------------
# corpus oracle cases (prover-free regressions for `corpus run-all`)


def _case_g1() -> Tuple[bool, str]:
    rep, text = run_builtin("g1-noexit", 4)
    facts = g1_facts()
    ok = (rep.verdict == "refuted" and rep.countermodel.size <= 4
          and not facts["is_tc_model"] and facts["satisfies_t1"]
          and facts["satisfies_t2"] and not facts["satisfies_noexit"])
    return ok, text


def _case_update_semantics() -> Tuple[bool, str]:
    lines = []
    ok = True
    r = check_update_add(3)
    lines.append("addition (n<=3): " + r.describe().splitlines()[0])
    ok &= r.verdict == "valid_up_to"
    r = check_update_remove(3, "func")
    lines.append("removal func (n<=3): " + r.describe().splitlines()[0])
    ok &= r.verdict == "valid_up_to"
    r = check_update_remove(3, "general")
    lines.append("removal general (n<=3): " + r.describe().splitlines()[0])
    ok &= r.verdict == "refuted"
    return ok, "\n".join(lines)


def _case_base_soundness() -> Tuple[bool, str]:
    voc = _generic_vocab()
    lines = []
    ok = True
    for inst in base_axioms(["f"], voc):
        r = check_tc_valid(inst.whole, 3, voc)
        ok &= r.verdict == "valid_up_to"
        lines.append("%-10s %s" % (inst.label, r.describe().splitlines()[0]))
    for scheme in ("NoExit", "GoOut", "NewStart", "Ind"):
        r = _sweep_report(scheme, 3)
        ok &= r.verdict == "valid_up_to"
        lines.append("%-10s %s" % (scheme, r.describe().splitlines()[0]))
    return ok, "\n".join(lines)


def _case_word_axioms() -> Tuple[bool, str]:
    a = words_satisfy_axioms(4)
    b = tc_models_of_word_axioms_are_words(3)
    return a and b, "word models satisfy axioms: %s; closure models are words: %s" % (a, b)


CORPUS_ORACLE_CASES: Dict[str, Callable[[], Tuple[bool, str]]] = {
    "g1-separation": _case_g1,
    "update-semantics": _case_update_semantics,
    "base-scheme-soundness": _case_base_soundness,
    "word-axioms": _case_word_axioms,
}
