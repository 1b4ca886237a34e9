"""First-order formulas with a reflexive-transitive-closure operator.

Terms are variables and constants only; the vocabulary is purely
relational.  ``TC(f, s, t)`` asserts a path of zero or more ``f``-edges
from ``s`` to ``t`` (so it is reflexive by convention, everywhere in
this package).  ``eliminate_tc`` rewrites every TC node to an atom over
a fresh closure symbol ``stc_f``, which is the form every downstream
consumer (axiom instantiation, prover emission, model checking) works
with.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self):
        return self.name


Term = Union[Var, Const]


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class Equal(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Atom(Formula):
    rel: str
    args: Tuple[Term, ...]


@dataclass(frozen=True)
class TC(Formula):
    """Reflexive transitive closure of a binary relation, applied to two terms."""

    rel: str
    left: Term
    right: Term


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    parts: Tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    parts: Tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Shorthand(Formula):
    """Unexpanded surface shorthand such as acyclic[f] or reach[x,f](v).

    ``params`` are relation names, ``args`` the term arguments (only the
    reach forms take one).  ``expand_shorthands`` rewrites these away.
    """

    kind: str  # unique | func | acyclic | unshared | total | reach | reachback
    params: Tuple[str, ...]
    args: Tuple[Term, ...] = ()


SHORTHAND_ARITIES = {
    # kind -> (number of relation/predicate params, number of term args)
    "unique": (1, 0),
    "func": (1, 0),
    "acyclic": (1, 0),
    "unshared": (1, 0),
    "total": (3, 0),
    "reach": (2, 1),
    "reachback": (2, 1),
}


class FormulaError(Exception):
    pass


def conj(parts: Iterable[Formula]) -> Formula:
    """N-ary conjunction; collapses the 0- and 1-element cases."""
    items = [p for p in parts if not isinstance(p, Top)]
    if any(isinstance(p, Bot) for p in items):
        return Bot()
    if not items:
        return Top()
    if len(items) == 1:
        return items[0]
    return And(tuple(items))


def disj(parts: Iterable[Formula]) -> Formula:
    items = [p for p in parts if not isinstance(p, Bot)]
    if any(isinstance(p, Top) for p in items):
        return Top()
    if not items:
        return Bot()
    if len(items) == 1:
        return items[0]
    return Or(tuple(items))


def forall(names: Iterable[str], body: Formula) -> Formula:
    out = body
    for nm in reversed(list(names)):
        out = Forall(nm, out)
    return out


def exists(names: Iterable[str], body: Formula) -> Formula:
    out = body
    for nm in reversed(list(names)):
        out = Exists(nm, out)
    return out


# ---------------------------------------------------------------------------
# traversal helpers


def children(phi: Formula) -> Tuple[Formula, ...]:
    if isinstance(phi, Not):
        return (phi.body,)
    if isinstance(phi, (And, Or)):
        return phi.parts
    if isinstance(phi, (Implies, Iff)):
        return (phi.left, phi.right)
    if isinstance(phi, (Forall, Exists)):
        return (phi.body,)
    return ()


def subformulas(phi: Formula) -> Iterator[Formula]:
    yield phi
    for c in children(phi):
        yield from subformulas(c)


def free_vars(phi: Formula) -> frozenset:
    """Exactly the variables with a free occurrence in phi."""
    if isinstance(phi, (Top, Bot)):
        return frozenset()
    if isinstance(phi, Equal):
        return frozenset(t.name for t in (phi.left, phi.right) if isinstance(t, Var))
    if isinstance(phi, Atom):
        return frozenset(t.name for t in phi.args if isinstance(t, Var))
    if isinstance(phi, TC):
        return frozenset(t.name for t in (phi.left, phi.right) if isinstance(t, Var))
    if isinstance(phi, Shorthand):
        return frozenset(t.name for t in phi.args if isinstance(t, Var))
    if isinstance(phi, (Forall, Exists)):
        return free_vars(phi.body) - {phi.var}
    out = frozenset()
    for c in children(phi):
        out |= free_vars(c)
    return out


def term_constants(phi: Formula) -> frozenset:
    out = set()
    for sub in subformulas(phi):
        ts: Tuple[Term, ...] = ()
        if isinstance(sub, Equal):
            ts = (sub.left, sub.right)
        elif isinstance(sub, Atom):
            ts = sub.args
        elif isinstance(sub, TC):
            ts = (sub.left, sub.right)
        elif isinstance(sub, Shorthand):
            ts = sub.args
        out.update(t.name for t in ts if isinstance(t, Const))
    return frozenset(out)


def relations_in(phi: Formula) -> Dict[str, int]:
    """All relation symbols with their arities (TC counts its base relation)."""
    out: Dict[str, int] = {}
    for sub in subformulas(phi):
        if isinstance(sub, Atom):
            out[sub.rel] = len(sub.args)
        elif isinstance(sub, TC):
            out[sub.rel] = 2
        elif isinstance(sub, Shorthand):
            # reach/total mix unary and binary parameters
            if sub.kind in ("unique",):
                out[sub.params[0]] = 1
            elif sub.kind in ("func", "acyclic", "unshared"):
                out[sub.params[0]] = 2
            elif sub.kind == "total":
                out[sub.params[0]] = 1
                out[sub.params[1]] = 1
                out[sub.params[2]] = 2
            elif sub.kind in ("reach", "reachback"):
                out[sub.params[0]] = 1
                out[sub.params[1]] = 2
    return out


_FRESH = itertools.count()


def fresh_var(base: str, avoid) -> str:
    if base not in avoid:
        return base
    root = base.rstrip("0123456789")
    i = 1
    while True:
        cand = "%s%d" % (root if root else base, i)
        if cand not in avoid:
            return cand
        i += 1


def _subst_term(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var) and t.name in mapping:
        return mapping[t.name]
    return t


def substitute(phi: Formula, mapping: Mapping[str, Term]) -> Formula:
    """Simultaneous capture-avoiding substitution of terms for free variables."""
    mapping = {k: v for k, v in mapping.items() if not (isinstance(v, Var) and v.name == k)}
    if not mapping:
        return phi
    if isinstance(phi, (Top, Bot)):
        return phi
    if isinstance(phi, Equal):
        return Equal(_subst_term(phi.left, mapping), _subst_term(phi.right, mapping))
    if isinstance(phi, Atom):
        return Atom(phi.rel, tuple(_subst_term(a, mapping) for a in phi.args))
    if isinstance(phi, TC):
        return TC(phi.rel, _subst_term(phi.left, mapping), _subst_term(phi.right, mapping))
    if isinstance(phi, Shorthand):
        return Shorthand(phi.kind, phi.params, tuple(_subst_term(a, mapping) for a in phi.args))
    if isinstance(phi, Not):
        return Not(substitute(phi.body, mapping))
    if isinstance(phi, And):
        return And(tuple(substitute(p, mapping) for p in phi.parts))
    if isinstance(phi, Or):
        return Or(tuple(substitute(p, mapping) for p in phi.parts))
    if isinstance(phi, Implies):
        return Implies(substitute(phi.left, mapping), substitute(phi.right, mapping))
    if isinstance(phi, Iff):
        return Iff(substitute(phi.left, mapping), substitute(phi.right, mapping))
    if isinstance(phi, (Forall, Exists)):
        inner = {k: v for k, v in mapping.items() if k != phi.var}
        if not inner:
            return phi
        relevant = free_vars(phi.body) & set(inner)
        if not relevant:
            return phi
        captured = {v.name for k in relevant for v in [inner[k]] if isinstance(v, Var)}
        var = phi.var
        body = phi.body
        if var in captured:
            avoid = set(captured) | free_vars(body) | set(inner)
            var = fresh_var(phi.var, avoid)
            body = substitute(body, {phi.var: Var(var)})
        body = substitute(body, inner)
        return type(phi)(var, body)
    raise FormulaError("unknown node %r" % (phi,))


# ---------------------------------------------------------------------------
# alpha normalization


def alpha_normalize(phi: Formula) -> Formula:
    """Rename bound variables to _b0, _b1, ... in traversal order.

    Two formulas are alpha-equivalent iff their normal forms are equal;
    this is the notion of structural equality used throughout the tests.
    """

    def walk(f: Formula, env: Dict[str, str], counter: Iterator[int]) -> Formula:
        if isinstance(f, (Top, Bot)):
            return f
        if isinstance(f, Equal):
            return Equal(_ren_term(f.left, env), _ren_term(f.right, env))
        if isinstance(f, Atom):
            return Atom(f.rel, tuple(_ren_term(a, env) for a in f.args))
        if isinstance(f, TC):
            return TC(f.rel, _ren_term(f.left, env), _ren_term(f.right, env))
        if isinstance(f, Shorthand):
            return Shorthand(f.kind, f.params, tuple(_ren_term(a, env) for a in f.args))
        if isinstance(f, Not):
            return Not(walk(f.body, env, counter))
        if isinstance(f, And):
            return And(tuple(walk(p, env, counter) for p in f.parts))
        if isinstance(f, Or):
            return Or(tuple(walk(p, env, counter) for p in f.parts))
        if isinstance(f, Implies):
            return Implies(walk(f.left, env, counter), walk(f.right, env, counter))
        if isinstance(f, Iff):
            return Iff(walk(f.left, env, counter), walk(f.right, env, counter))
        if isinstance(f, (Forall, Exists)):
            nm = "_b%d" % next(counter)
            env2 = dict(env)
            env2[f.var] = nm
            return type(f)(nm, walk(f.body, env2, counter))
        raise FormulaError("unknown node %r" % (f,))

    def _ren_term(t: Term, env: Dict[str, str]) -> Term:
        if isinstance(t, Var) and t.name in env:
            return Var(env[t.name])
        return t

    return walk(phi, {}, itertools.count())


def alpha_equal(a: Formula, b: Formula) -> bool:
    return alpha_normalize(a) == alpha_normalize(b)


# ---------------------------------------------------------------------------
# polarity of closure occurrences


def tc_polarity(phi: Formula, rel: str, stc_name: Optional[str] = None) -> str:
    """Classify occurrences of TC(rel) / the paired closure atom by polarity.

    Returns one of "none", "positive", "negative", "mixed".  Negation and
    implication antecedents flip the sign; any occurrence below an Iff
    counts both ways.
    """
    signs = set()

    def hit(f: Formula) -> bool:
        if isinstance(f, TC) and f.rel == rel:
            return True
        return stc_name is not None and isinstance(f, Atom) and f.rel == stc_name

    def walk(f: Formula, sign: int, under_iff: bool):
        if hit(f):
            if under_iff:
                signs.update((1, -1))
            else:
                signs.add(sign)
            return
        if isinstance(f, Shorthand):
            walk(expand_shorthands(f), sign, under_iff)
            return
        if isinstance(f, Not):
            walk(f.body, -sign, under_iff)
        elif isinstance(f, Implies):
            walk(f.left, -sign, under_iff)
            walk(f.right, sign, under_iff)
        elif isinstance(f, Iff):
            walk(f.left, sign, True)
            walk(f.right, sign, True)
        else:
            for c in children(f):
                walk(c, sign, under_iff)

    walk(phi, 1, False)
    if not signs:
        return "none"
    if signs == {1}:
        return "positive"
    if signs == {-1}:
        return "negative"
    return "mixed"


# ---------------------------------------------------------------------------
# shorthand expansion


def expand_shorthands(phi: Formula) -> Formula:
    """Rewrite every surface shorthand to its defining formula.

    Idempotent; the defining formulas are the usual list-verification
    properties (uniqueness of a pointer variable, partial-functionality,
    acyclicity, absence of sharing, totality of reachability, and the
    forward/backward reachability predicates).
    """
    if isinstance(phi, Shorthand):
        return _expand_one(phi)
    if isinstance(phi, Not):
        return Not(expand_shorthands(phi.body))
    if isinstance(phi, And):
        return And(tuple(expand_shorthands(p) for p in phi.parts))
    if isinstance(phi, Or):
        return Or(tuple(expand_shorthands(p) for p in phi.parts))
    if isinstance(phi, Implies):
        return Implies(expand_shorthands(phi.left), expand_shorthands(phi.right))
    if isinstance(phi, Iff):
        return Iff(expand_shorthands(phi.left), expand_shorthands(phi.right))
    if isinstance(phi, (Forall, Exists)):
        return type(phi)(phi.var, expand_shorthands(phi.body))
    return phi


def _expand_one(s: Shorthand) -> Formula:
    k = s.kind
    if k == "unique":
        z = s.params[0]
        return forall(
            ["v1", "v2"],
            Implies(
                conj([Atom(z, (Var("v1"),)), Atom(z, (Var("v2"),))]),
                Equal(Var("v1"), Var("v2")),
            ),
        )
    if k == "func":
        f = s.params[0]
        return forall(
            ["v1", "v2", "v"],
            Implies(
                conj([Atom(f, (Var("v"), Var("v1"))), Atom(f, (Var("v"), Var("v2")))]),
                Equal(Var("v1"), Var("v2")),
            ),
        )
    if k == "acyclic":
        f = s.params[0]
        return forall(
            ["v1", "v2"],
            disj(
                [
                    Not(Atom(f, (Var("v1"), Var("v2")))),
                    Not(TC(f, Var("v2"), Var("v1"))),
                ]
            ),
        )
    if k == "unshared":
        f = s.params[0]
        return forall(
            ["v1", "v2", "v"],
            Implies(
                conj([Atom(f, (Var("v1"), Var("v"))), Atom(f, (Var("v2"), Var("v")))]),
                Equal(Var("v1"), Var("v2")),
            ),
        )
    if k == "total":
        z1, z2, f = s.params
        return Forall(
            "v",
            Exists(
                "w",
                conj(
                    [
                        disj([Atom(z1, (Var("w"),)), Atom(z2, (Var("w"),))]),
                        TC(f, Var("w"), Var("v")),
                    ]
                ),
            ),
        )
    if k in ("reach", "reachback"):
        x, f = s.params
        (arg,) = s.args
        w = fresh_var("w", {arg.name} if isinstance(arg, Var) else set())
        src, dst = (Var(w), arg) if k == "reach" else (arg, Var(w))
        return Exists(w, conj([Atom(x, (Var(w),)), TC(f, src, dst)]))
    raise FormulaError("unknown shorthand %r" % (k,))


# ---------------------------------------------------------------------------
# vocabulary


@dataclass
class Vocabulary:
    """Relation/constant declarations plus role tags and closure pairing."""

    relations: Dict[str, int] = field(default_factory=dict)
    constants: list = field(default_factory=list)
    closure_pairs: Dict[str, str] = field(default_factory=dict)  # base -> stc symbol
    program_vars: set = field(default_factory=set)  # unary predicates denoting variables
    fields: set = field(default_factory=set)  # binary predicates denoting fields
    after: Dict[str, str] = field(default_factory=dict)  # before name -> after name

    def validate(self):
        names = list(self.relations) + list(self.constants)
        if len(names) != len(set(names)):
            raise FormulaError("duplicate names in vocabulary")
        for base, stc in self.closure_pairs.items():
            if self.relations.get(base) != 2:
                raise FormulaError("closure base %s is not a declared binary relation" % base)
            if self.relations.get(stc) != 2:
                raise FormulaError("closure symbol %s is not a declared binary relation" % stc)
        rev: Dict[str, str] = {}
        for base, stc in self.closure_pairs.items():
            if stc in rev:
                raise FormulaError("closure symbol %s paired twice" % stc)
            rev[stc] = base
        for before, after in self.after.items():
            if before == after:
                raise FormulaError("after-relation %s equals its before version" % before)

    def declare(self, name: str, arity: int):
        have = self.relations.get(name)
        if have is not None and have != arity:
            raise FormulaError("arity clash for %s: %d vs %d" % (name, have, arity))
        self.relations[name] = arity

    def stc_name(self, rel: str) -> str:
        return self.closure_pairs.get(rel, "stc_" + rel)

    def ensure_closure(self, rel: str) -> str:
        if self.relations.get(rel) != 2:
            raise FormulaError("TC over non-binary relation %s" % rel)
        stc = self.stc_name(rel)
        self.closure_pairs[rel] = stc
        self.relations.setdefault(stc, 2)
        return stc

    def copy(self) -> "Vocabulary":
        return Vocabulary(
            dict(self.relations),
            list(self.constants),
            dict(self.closure_pairs),
            set(self.program_vars),
            set(self.fields),
            dict(self.after),
        )


def eliminate_tc(phi: Formula, vocab: Vocabulary) -> Formula:
    """Replace every TC node by an atom over the paired closure symbol.

    Registers missing closure symbols in ``vocab`` (the one mutation in
    this module); the result is plain first-order.
    """
    if isinstance(phi, TC):
        stc = vocab.ensure_closure(phi.rel)
        return Atom(stc, (phi.left, phi.right))
    if isinstance(phi, Shorthand):
        return eliminate_tc(_expand_one(phi), vocab)
    if isinstance(phi, Not):
        return Not(eliminate_tc(phi.body, vocab))
    if isinstance(phi, And):
        return And(tuple(eliminate_tc(p, vocab) for p in phi.parts))
    if isinstance(phi, Or):
        return Or(tuple(eliminate_tc(p, vocab) for p in phi.parts))
    if isinstance(phi, Implies):
        return Implies(eliminate_tc(phi.left, vocab), eliminate_tc(phi.right, vocab))
    if isinstance(phi, Iff):
        return Iff(eliminate_tc(phi.left, vocab), eliminate_tc(phi.right, vocab))
    if isinstance(phi, (Forall, Exists)):
        return type(phi)(phi.var, eliminate_tc(phi.body, vocab))
    return phi


def well_formed(phi: Formula, vocab: Vocabulary, bound=frozenset()):
    """Raise FormulaError on undeclared symbols, arity clashes, or TC misuse."""
    if isinstance(phi, Atom):
        arity = vocab.relations.get(phi.rel)
        if arity is None:
            raise FormulaError("undeclared relation %s" % phi.rel)
        if arity != len(phi.args):
            raise FormulaError(
                "arity mismatch: %s/%d used with %d arguments" % (phi.rel, arity, len(phi.args))
            )
        _check_terms(phi.args, vocab)
    elif isinstance(phi, TC):
        if vocab.relations.get(phi.rel) != 2:
            raise FormulaError("TC over non-binary or undeclared relation %s" % phi.rel)
        _check_terms((phi.left, phi.right), vocab)
    elif isinstance(phi, Equal):
        _check_terms((phi.left, phi.right), vocab)
    elif isinstance(phi, Shorthand):
        want_params, want_args = SHORTHAND_ARITIES[phi.kind]
        if len(phi.params) != want_params or len(phi.args) != want_args:
            raise FormulaError("bad shorthand signature %s" % (phi,))
        for p in phi.params:
            if p not in vocab.relations:
                raise FormulaError("unknown relation %s in shorthand" % p)
        well_formed(_expand_one(phi), vocab, bound)
        _check_terms(phi.args, vocab)
    elif isinstance(phi, (Forall, Exists)):
        well_formed(phi.body, vocab, bound | {phi.var})
    else:
        for c in children(phi):
            well_formed(c, vocab, bound)


def _check_terms(ts: Tuple[Term, ...], vocab: Vocabulary):
    for t in ts:
        if isinstance(t, Const) and t.name not in vocab.constants:
            raise FormulaError("undeclared constant %s" % t.name)
