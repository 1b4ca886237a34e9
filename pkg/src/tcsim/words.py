"""Word models and the compilation of closure formulas to DFAs.

A word over alphabet sigma is a finite model with positions 0..n-1, the
successor relation s, its reflexive closure stc_s, endpoint constants,
and one letter predicate per symbol.  Formulas over this vocabulary
compile to total DFAs whose states carry first-order defining formulas:
the run of the automaton over positions 0..u sits in state q exactly
when q's defining formula holds of u.  Conjunction is the product
construction, negation flips the accepting set, and an existential
introduces the guess-where-x-sits NFA followed by the subset
construction (each reachable subset keeps exactly one unprimed state,
which is asserted).

Open formulas run over a marked alphabet: each position carries the set
of free variables sitting there, and a valid input marks every free
variable exactly once.  Compilation handles variable arguments only;
formulas naming the endpoint constants are rejected.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .formulas import (
    And,
    Atom,
    Bot,
    Const,
    Equal,
    Exists,
    Forall,
    Formula,
    FormulaError,
    Iff,
    Implies,
    Not,
    Or,
    Top,
    Var,
    conj,
    disj,
    forall,
    free_vars,
)
from .models import FiniteModel, closure


@dataclass(frozen=True)
class WordVocabulary:
    alphabet: Tuple[str, ...]

    def __post_init__(self):
        if not self.alphabet:
            raise FormulaError("alphabet must be non-empty")

    def letter_pred(self, letter: str) -> str:
        return "p_" + letter


Symbol = Tuple[str, FrozenSet[str]]  # (letter, markers)
Word = Sequence[Symbol]


def plain(text: str) -> List[Symbol]:
    """Markless word from a plain string."""
    return [(ch, frozenset()) for ch in text]


def mark(word: Sequence[Symbol], var: str, pos: int) -> List[Symbol]:
    out = list(word)
    letter, ms = out[pos]
    out[pos] = (letter, ms | {var})
    return out


# ---------------------------------------------------------------------------
# word models


def word_model(word: Word, wv: WordVocabulary) -> FiniteModel:
    if not word:
        raise FormulaError("empty words have no model (universe must be non-empty)")
    n = len(word)
    s = frozenset((i, i + 1) for i in range(n - 1))
    rels: Dict[str, frozenset] = {
        "s": s,
        "stc_s": closure(s, n),
    }
    for a in wv.alphabet:
        rels[wv.letter_pred(a)] = frozenset(
            (i,) for i, (letter, _) in enumerate(word) if letter == a)
    return FiniteModel(n, rels, {"0": 0, "max": n - 1}, {"s": "stc_s"})


def marker_env(word: Word) -> Dict[str, int]:
    env: Dict[str, int] = {}
    for i, (_, ms) in enumerate(word):
        for v in ms:
            if v in env:
                raise FormulaError("marker %s occurs twice" % v)
            env[v] = i
    return env


def word_axioms(wv: WordVocabulary) -> Formula:
    """The four word-theory axioms: endpoint/successor structure, in- and
    out-degree one, total reachability, and letter partition."""
    x, y, z = Var("x"), Var("y"), Var("z")
    zero, mx = Const("0"), Const("max")
    a1 = Forall("x", conj([
        Not(Atom("s", (x, zero))),
        Not(Atom("s", (mx, x))),
        Implies(Not(Equal(x, zero)), Exists("y", Atom("s", (y, x)))),
        Implies(Not(Equal(x, mx)), Exists("y", Atom("s", (x, y)))),
    ]))
    a2 = forall(["x", "y", "z"], Implies(
        disj([
            conj([Atom("s", (x, y)), Atom("s", (x, z))]),
            conj([Atom("s", (y, x)), Atom("s", (z, x))]),
        ]),
        Equal(y, z),
    ))
    a3 = Forall("x", conj([Atom("stc_s", (zero, x)), Atom("stc_s", (x, mx))]))
    a4 = Forall("x", disj([
        conj([Atom(wv.letter_pred(a), (x,))]
             + [Not(Atom(wv.letter_pred(b), (x,))) for b in wv.alphabet if b != a])
        for a in wv.alphabet
    ]))
    return conj([a1, a2, a3, a4])


# ---------------------------------------------------------------------------
# compiled automata


@dataclass
class CompiledDfa:
    wv: WordVocabulary
    variables: FrozenSet[str]
    state_defs: List[Formula]  # index = state id; one free variable v
    start: int
    accepting: FrozenSet[int]
    delta: Dict[Tuple[int, Symbol], int]

    @property
    def symbols(self) -> List[Symbol]:
        out = []
        ms = sorted(self.variables)
        for letter in self.wv.alphabet:
            for k in range(len(ms) + 1):
                for sub in itertools.combinations(ms, k):
                    out.append((letter, frozenset(sub)))
        return out

    def step(self, state: int, sym: Symbol) -> int:
        letter, markers = sym
        return self.delta[(state, (letter, frozenset(markers) & self.variables))]

    def run(self, word: Word) -> List[int]:
        """States after each position (the state trace, start excluded)."""
        st = self.start
        out = []
        for sym in word:
            st = self.step(st, sym)
            out.append(st)
        return out

    def accepts(self, word: Word) -> bool:
        if not word:
            raise FormulaError("empty word")
        env = marker_env(word)
        missing = self.variables - set(env)
        if missing:
            raise FormulaError("free variables %s not marked" % sorted(missing))
        return self.run(word)[-1] in self.accepting

    def table(self) -> str:
        lines = ["states: %d  start: q%d  accepting: %s" % (
            len(self.state_defs), self.start,
            " ".join("q%d" % q for q in sorted(self.accepting)))]
        from .parser import print_formula
        for i, d in enumerate(self.state_defs):
            lines.append("  q%d(v) := %s" % (i, print_formula(d)))
        for (st, (letter, ms)), dst in sorted(self.delta.items(),
                                              key=lambda kv: (kv[0][0], kv[0][1][0], sorted(kv[0][1][1]))):
            m = "{%s}" % ",".join(sorted(ms)) if ms else "{}"
            lines.append("  q%d --%s,%s--> q%d" % (st, letter, m, dst))
        return "\n".join(lines)

    def dot(self) -> str:
        lines = ["digraph dfa {", "  rankdir=LR;", '  start [shape=none,label=""];',
                 "  start -> q%d;" % self.start]
        for i in range(len(self.state_defs)):
            shape = "doublecircle" if i in self.accepting else "circle"
            lines.append('  q%d [shape=%s];' % (i, shape))
        grouped: Dict[Tuple[int, int], List[str]] = {}
        for (st, (letter, ms)), dst in self.delta.items():
            lab = letter + ("{%s}" % ",".join(sorted(ms)) if ms else "")
            grouped.setdefault((st, dst), []).append(lab)
        for (st, dst), labs in sorted(grouped.items()):
            lines.append('  q%d -> q%d [label="%s"];' % (st, dst, ",".join(sorted(labs))))
        lines.append("}")
        return "\n".join(lines)


def _fresh_dfa(wv, variables, defs, start, accepting, delta) -> CompiledDfa:
    return CompiledDfa(wv, frozenset(variables), defs, start, frozenset(accepting), delta)


def _total_symbols(wv: WordVocabulary, variables: Iterable[str]) -> List[Symbol]:
    ms = sorted(set(variables))
    out = []
    for letter in wv.alphabet:
        for k in range(len(ms) + 1):
            for sub in itertools.combinations(ms, k):
                out.append((letter, frozenset(sub)))
    return out


def _stc(a, b) -> Formula:
    return Atom("stc_s", (a, b))


# base automata ------------------------------------------------------------


def _dfa_letter(wv: WordVocabulary, letter: str, x: str) -> CompiledDfa:
    v = Var("v")
    xt = Var(x)
    p = Atom(wv.letter_pred(letter), (xt,))
    defs = [Not(_stc(xt, v)), conj([_stc(xt, v), p]), conj([_stc(xt, v), Not(p)])]
    delta = {}
    for (lt, ms) in _total_symbols(wv, {x}):
        if x in ms:
            delta[(0, (lt, ms))] = 1 if lt == letter else 2
        else:
            delta[(0, (lt, ms))] = 0
        delta[(1, (lt, ms))] = 1
        delta[(2, (lt, ms))] = 2
    return _fresh_dfa(wv, {x}, defs, 0, {1}, delta)


def _dfa_eq(wv: WordVocabulary, x: str, y: str) -> CompiledDfa:
    v, xt, yt = Var("v"), Var(x), Var(y)
    defs = [Not(_stc(xt, v)),
            conj([Equal(xt, yt), _stc(xt, v)]),
            conj([Not(Equal(xt, yt)), _stc(xt, v)])]
    delta = {}
    for (lt, ms) in _total_symbols(wv, {x, y}):
        if x in ms and y in ms:
            delta[(0, (lt, ms))] = 1
        elif x in ms:
            delta[(0, (lt, ms))] = 2
        else:
            delta[(0, (lt, ms))] = 0
        delta[(1, (lt, ms))] = 1
        delta[(2, (lt, ms))] = 2
    return _fresh_dfa(wv, {x, y}, defs, 0, {1}, delta)


def _dfa_succ(wv: WordVocabulary, x: str, y: str) -> CompiledDfa:
    # the q3 definition reads the marker structure literally: ~s(x,y) at a
    # position past x covers both "y elsewhere later" and "y before x"
    v, xt, yt = Var("v"), Var(x), Var(y)
    s_xy = Atom("s", (xt, yt))
    defs = [Not(_stc(xt, v)),
            Equal(xt, v),
            conj([s_xy, _stc(yt, v)]),
            conj([_stc(xt, v), Not(Equal(xt, v)), Not(s_xy)])]
    delta = {}
    for (lt, ms) in _total_symbols(wv, {x, y}):
        delta[(0, (lt, ms))] = 1 if x in ms else 0
        delta[(1, (lt, ms))] = 2 if y in ms else 3
        delta[(2, (lt, ms))] = 2
        delta[(3, (lt, ms))] = 3
    return _fresh_dfa(wv, {x, y}, defs, 0, {2}, delta)


def _dfa_stc(wv: WordVocabulary, x: str, y: str) -> CompiledDfa:
    v, xt, yt = Var("v"), Var(x), Var(y)
    sxy = _stc(xt, yt)
    defs = [Not(_stc(xt, v)),
            conj([_stc(xt, v), Not(conj([sxy, _stc(yt, v)]))]),
            conj([sxy, _stc(yt, v)])]
    delta = {}
    for (lt, ms) in _total_symbols(wv, {x, y}):
        if x in ms:
            delta[(0, (lt, ms))] = 2 if y in ms else 1
        else:
            delta[(0, (lt, ms))] = 0
        delta[(1, (lt, ms))] = 2 if y in ms else 1
        delta[(2, (lt, ms))] = 2
    return _fresh_dfa(wv, {x, y}, defs, 0, {2}, delta)


def _dfa_const(wv: WordVocabulary, value: bool) -> CompiledDfa:
    defs = [Top() if value else Bot()]
    delta = {(0, sym): 0 for sym in _total_symbols(wv, set())}
    return _fresh_dfa(wv, set(), defs, 0, {0} if value else set(), delta)


# combinators ---------------------------------------------------------------


def _lift(d: CompiledDfa, variables: FrozenSet[str]) -> CompiledDfa:
    if d.variables == variables:
        return d
    delta = {}
    for (lt, ms) in _total_symbols(d.wv, variables):
        for st in range(len(d.state_defs)):
            delta[(st, (lt, ms))] = d.delta[(st, (lt, ms & d.variables))]
    return _fresh_dfa(d.wv, variables, list(d.state_defs), d.start, d.accepting, delta)


def _trim(d: CompiledDfa) -> CompiledDfa:
    syms = d.symbols
    seen = {d.start}
    frontier = [d.start]
    while frontier:
        st = frontier.pop()
        for sym in syms:
            nxt = d.delta[(st, sym)]
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    order = sorted(seen)
    remap = {old: i for i, old in enumerate(order)}
    defs = [d.state_defs[old] for old in order]
    delta = {({**remap}[st], sym): remap[dst]
             for (st, sym), dst in d.delta.items() if st in seen}
    accepting = {remap[q] for q in d.accepting if q in seen}
    return _fresh_dfa(d.wv, d.variables, defs, remap[d.start], accepting, delta)


def _product(a: CompiledDfa, b: CompiledDfa) -> CompiledDfa:
    variables = a.variables | b.variables
    a, b = _lift(a, variables), _lift(b, variables)
    na = len(a.state_defs)
    defs = []
    for i in range(na):
        for j in range(len(b.state_defs)):
            defs.append(conj([a.state_defs[i], b.state_defs[j]]))
    delta = {}
    for (lt, ms) in _total_symbols(a.wv, variables):
        for i in range(na):
            for j in range(len(b.state_defs)):
                delta[(i * len(b.state_defs) + j, (lt, ms))] = (
                    a.delta[(i, (lt, ms))] * len(b.state_defs) + b.delta[(j, (lt, ms))])
    accepting = {i * len(b.state_defs) + j for i in a.accepting for j in b.accepting}
    return _trim(_fresh_dfa(a.wv, variables, defs, a.start * len(b.state_defs) + b.start,
                            accepting, delta))


def _complement(d: CompiledDfa) -> CompiledDfa:
    accepting = set(range(len(d.state_defs))) - set(d.accepting)
    return _fresh_dfa(d.wv, d.variables, list(d.state_defs), d.start, accepting,
                      dict(d.delta))


def _exists(d: CompiledDfa, x: str) -> CompiledDfa:
    """Subset construction over the guess-the-position NFA for x."""
    if x not in d.variables:
        # vacuous quantifier: any position works as the witness marker
        return d
    variables = d.variables - {x}
    wv = d.wv
    v = Var("v")

    def p_def(i: int, primed: bool) -> Formula:
        q = d.state_defs[i]
        guard = _stc(Var(x), v) if primed else Not(_stc(Var(x), v))
        return Exists(x, conj([guard, q]))

    n = len(d.state_defs)
    start = (d.start, frozenset())

    def step(state, sym):
        base, primes = state
        lt, ms = sym
        new_base = d.delta[(base, (lt, ms))]
        new_primes = {d.delta[(p, (lt, ms))] for p in primes}
        new_primes.add(d.delta[(base, (lt, ms | {x}))])
        return (new_base, frozenset(new_primes))

    syms = _total_symbols(wv, variables)
    states = {start: 0}
    order = [start]
    delta: Dict[Tuple[int, Symbol], int] = {}
    frontier = [start]
    while frontier:
        st = frontier.pop(0)
        for sym in syms:
            nxt = step(st, sym)
            if nxt not in states:
                states[nxt] = len(order)
                order.append(nxt)
                frontier.append(nxt)
            delta[(states[st], sym)] = states[nxt]
    # each reachable subset carries exactly one unprimed state by construction
    defs = []
    for (base, primes) in order:
        assert isinstance(base, int)
        parts = [p_def(base, False)]
        for j in range(n):
            pj = p_def(j, True)
            parts.append(pj if j in primes else Not(pj))
        defs.append(conj(parts))
    accepting = {idx for (base, primes), idx in states.items()
                 if primes & set(d.accepting)}
    return _trim(_fresh_dfa(wv, variables, defs, 0, accepting, delta))


# compilation ---------------------------------------------------------------


def _desugar(phi: Formula) -> Formula:
    if isinstance(phi, Or):
        return Not(And(tuple(Not(_desugar(p)) for p in phi.parts)))
    if isinstance(phi, And):
        return And(tuple(_desugar(p) for p in phi.parts))
    if isinstance(phi, Implies):
        return Not(And((_desugar(phi.left), Not(_desugar(phi.right)))))
    if isinstance(phi, Iff):
        a, b = _desugar(phi.left), _desugar(phi.right)
        return Not(And((Not(And((a, b))), Not(And((Not(a), Not(b)))))))
    if isinstance(phi, Not):
        return Not(_desugar(phi.body))
    if isinstance(phi, Forall):
        return Not(Exists(phi.var, Not(_desugar(phi.body))))
    if isinstance(phi, Exists):
        return Exists(phi.var, _desugar(phi.body))
    return phi


def compile_formula_to_dfa(phi: Formula, wv: WordVocabulary) -> CompiledDfa:
    """Compile a formula over the word vocabulary into a DFA.

    Arguments must be variables; the endpoint constants are not supported
    inside compiled formulas.
    """
    phi = _desugar(phi)

    def var_arg(t) -> str:
        if isinstance(t, Const):
            raise FormulaError("constants are not supported in compiled formulas")
        return t.name

    def go(f: Formula) -> CompiledDfa:
        if isinstance(f, Top):
            return _dfa_const(wv, True)
        if isinstance(f, Bot):
            return _dfa_const(wv, False)
        if isinstance(f, Atom):
            preds = {wv.letter_pred(a): a for a in wv.alphabet}
            if f.rel in preds:
                return _dfa_letter(wv, preds[f.rel], var_arg(f.args[0]))
            if f.rel == "s":
                x, y = (var_arg(a) for a in f.args)
                if x == y:
                    return _dfa_const(wv, False)  # no position succeeds itself
                return _dfa_succ(wv, x, y)
            if f.rel == "stc_s":
                x, y = (var_arg(a) for a in f.args)
                if x == y:
                    return _dfa_const(wv, True)  # closure is reflexive
                return _dfa_stc(wv, x, y)
            raise FormulaError("symbol %s outside the word vocabulary" % f.rel)
        if isinstance(f, Equal):
            x, y = var_arg(f.left), var_arg(f.right)
            if x == y:
                return _dfa_const(wv, True)
            return _dfa_eq(wv, x, y)
        if isinstance(f, Not):
            return _complement(go(f.body))
        if isinstance(f, And):
            out = go(f.parts[0])
            for p in f.parts[1:]:
                out = _product(out, go(p))
            return out
        if isinstance(f, Exists):
            return _exists(go(f.body), f.var)
        raise FormulaError("cannot compile %r" % (f,))

    return go(phi)


def nonempty_within(d: CompiledDfa, max_len: int) -> Optional[List[Symbol]]:
    """Shortest accepted word of length <= max_len, if any (closed DFAs only)."""
    if d.variables:
        raise FormulaError("emptiness check needs a closed formula")
    paths: Dict[int, List[Symbol]] = {d.start: []}
    for _ in range(max_len):
        nxt: Dict[int, List[Symbol]] = {}
        for st, path in paths.items():
            for sym in d.symbols:
                t = d.delta[(st, sym)]
                cand = path + [sym]
                if t in d.accepting and cand:
                    return cand
                if t not in nxt:
                    nxt[t] = cand
        merged = dict(nxt)
        for st, path in paths.items():
            merged.setdefault(st, path)
        if merged.keys() == paths.keys():
            paths = merged
            break
        paths = merged
    # one more sweep to catch accepting states found exactly at the horizon
    for st, path in paths.items():
        if st in d.accepting and path:
            return path
    return None


def all_words(wv: WordVocabulary, length: int) -> Iterable[List[Symbol]]:
    for letters in itertools.product(wv.alphabet, repeat=length):
        yield [(lt, frozenset()) for lt in letters]
