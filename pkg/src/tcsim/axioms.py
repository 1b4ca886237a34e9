"""Axiom schemes over closure symbols, and their instantiation.

Schemes come in two groups.  Base schemes (T1, T2, Tleft, Trans, Order)
and the structural families (induction, Nelson's translated schemes,
tree schemes) produce a single closed formula.  The three coloring
schemes (NoExit, GoOut, NewStart) are premise/conclusion split: the
verifier proves the premise as a subgoal and then admits the conclusion.
OUT, SEP and NC are accepted as aliases for NoExit, GoOut and NewStart
(NC[c, f, g] reads: every f-edge inside c is a g-edge, hence every
f-path that is not a g-path leaves c).

All instances are TC-free: they speak about stc_f atoms, never TC nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .formulas import (
    And,
    Atom,
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
    Term,
    Var,
    Vocabulary,
    alpha_equal,
    alpha_normalize,
    conj,
    disj,
    exists,
    forall,
    free_vars,
    fresh_var,
    substitute,
)


@dataclass(frozen=True)
class Color:
    """A named unary predicate given by a formula with one free variable."""

    name: str
    var: str
    formula: Formula
    provenance: str = "user"

    def __post_init__(self):
        # closed defining formulas (e.g. `true`) are allowed; extra free
        # variables are only legal for induction witnesses, which are built
        # with parametric_color and closed over explicitly
        extra = free_vars(self.formula) - {self.var}
        if extra:
            raise FormulaError(
                "color %s has extra free variables %s" % (self.name, sorted(extra))
            )

    def at(self, term: Term) -> Formula:
        return substitute(self.formula, {self.var: term})

    def negated(self) -> "Color":
        return Color("!" + self.name, self.var, Not(self.formula), self.provenance)

    def key(self) -> Formula:
        return alpha_normalize(Exists(self.var, self.formula))


def parametric_color(name: str, var: str, formula: Formula) -> Color:
    """Color whose body may mention extra parameters; for ind_instance only."""
    c = object.__new__(Color)
    object.__setattr__(c, "name", name)
    object.__setattr__(c, "var", var)
    object.__setattr__(c, "formula", formula)
    object.__setattr__(c, "provenance", "induction-witness")
    return c


TRUE_COLOR = Color("true", "v", Equal(Var("v"), Var("v")), "builtin")


@dataclass(frozen=True)
class AxiomInstance:
    scheme: str
    params: Tuple[str, ...]
    whole: Formula
    premise: Optional[Formula] = None
    conclusion: Optional[Formula] = None

    @property
    def split(self) -> bool:
        return self.premise is not None

    @property
    def label(self) -> str:
        return "%s[%s]" % (self.scheme, ",".join(self.params))

    def key(self):
        return (self.scheme, alpha_normalize(self.whole))


def _stc(vocab: Vocabulary, rel: str) -> str:
    return vocab.ensure_closure(rel)


def _vars(*names: str) -> Tuple[Var, ...]:
    return tuple(Var(n) for n in names)


def _check_binary(vocab: Vocabulary, rel: str):
    if vocab.relations.get(rel) != 2:
        raise FormulaError("scheme parameter %s must be a declared binary relation" % rel)


# ---------------------------------------------------------------------------
# base schemes


def t1(f: str, vocab: Vocabulary) -> AxiomInstance:
    _check_binary(vocab, f)
    stc = _stc(vocab, f)
    u, v, w = _vars("u", "v", "w")
    body = forall(
        ["u", "v"],
        Iff(
            Atom(stc, (u, v)),
            disj([Equal(u, v), Exists("w", conj([Atom(f, (u, w)), Atom(stc, (w, v))]))]),
        ),
    )
    return AxiomInstance("T1", (f,), body)


def t2(f: str, vocab: Vocabulary) -> AxiomInstance:
    _check_binary(vocab, f)
    stc = _stc(vocab, f)
    u, v, w = _vars("u", "v", "w")
    body = forall(
        ["u", "v"],
        Iff(
            Atom(stc, (u, v)),
            disj([Equal(u, v), Exists("w", conj([Atom(stc, (u, w)), Atom(f, (w, v))]))]),
        ),
    )
    return AxiomInstance("T2", (f,), body)


def tleft(f: str, vocab: Vocabulary) -> AxiomInstance:
    _check_binary(vocab, f)
    stc = _stc(vocab, f)
    u, v, w = _vars("u", "v", "w")
    body = forall(
        ["u", "v"],
        Implies(
            disj([Equal(u, v), Exists("w", conj([Atom(f, (u, w)), Atom(stc, (w, v))]))]),
            Atom(stc, (u, v)),
        ),
    )
    return AxiomInstance("Tleft", (f,), body)


def trans(f: str, vocab: Vocabulary) -> AxiomInstance:
    _check_binary(vocab, f)
    stc = _stc(vocab, f)
    u, v, w = _vars("u", "v", "w")
    body = forall(
        ["u", "v", "w"],
        Implies(conj([Atom(stc, (u, w)), Atom(stc, (w, v))]), Atom(stc, (u, v))),
    )
    return AxiomInstance("Trans", (f,), body)


def func_formula(f: str) -> Formula:
    u, v, w = _vars("u", "v", "w")
    return forall(
        ["u", "v", "w"],
        Implies(conj([Atom(f, (u, v)), Atom(f, (u, w))]), Equal(v, w)),
    )


def order(f: str, vocab: Vocabulary) -> AxiomInstance:
    """Linear order of the points reachable from any point, guarded by func[f].

    The guard keeps the instance closure-valid on arbitrary graphs, so it can
    always sit in the base axiom set.
    """
    _check_binary(vocab, f)
    stc = _stc(vocab, f)
    u, v, w = _vars("u", "v", "w")
    concl = forall(
        ["u", "v", "w"],
        Implies(
            conj([Atom(stc, (u, v)), Atom(stc, (u, w))]),
            disj([Atom(stc, (v, w)), Atom(stc, (w, v))]),
        ),
    )
    return AxiomInstance("Order", (f,), Implies(func_formula(f), concl))


def base_axioms(F: Sequence[str], vocab: Vocabulary, natural: str = "t1") -> List[AxiomInstance]:
    """Trans, Order, the chosen generative scheme, and T2 per relation."""
    natural_fn = {"t1": t1, "tleft": tleft}.get(natural)
    if natural_fn is None:
        raise FormulaError("unknown natural scheme %r" % natural)
    out: List[AxiomInstance] = []
    for f in F:
        out.append(trans(f, vocab))
        out.append(order(f, vocab))
    for f in F:
        out.append(natural_fn(f, vocab))
        out.append(t2(f, vocab))
    return out


# ---------------------------------------------------------------------------
# coloring schemes (premise -> conclusion split)


def _freshen(names: Sequence[str], *colors: Color) -> List[str]:
    avoid = set()
    for c in colors:
        avoid |= free_vars(c.formula)
    out = []
    for n in names:
        nm = fresh_var(n, avoid | set(out))
        out.append(nm)
    return out


def noexit(A: Color, f: str, vocab: Vocabulary) -> AxiomInstance:
    _check_binary(vocab, f)
    stc = _stc(vocab, f)
    un, vn = _freshen(["u", "v"], A)
    u, v = Var(un), Var(vn)
    premise = forall(
        [un, vn], Implies(conj([A.at(u), Not(A.at(v))]), Not(Atom(f, (u, v))))
    )
    concl = forall(
        [un, vn], Implies(conj([A.at(u), Not(A.at(v))]), Not(Atom(stc, (u, v))))
    )
    return AxiomInstance("NoExit", (A.name, f), Implies(premise, concl), premise, concl)


def goout(A: Color, B: Color, f: str, vocab: Vocabulary) -> AxiomInstance:
    _check_binary(vocab, f)
    stc = _stc(vocab, f)
    un, vn, wn = _freshen(["u", "v", "w"], A, B)
    u, v, w = Var(un), Var(vn), Var(wn)
    premise = forall(
        [un, vn],
        Implies(conj([A.at(u), Not(A.at(v)), Atom(f, (u, v))]), B.at(v)),
    )
    concl = forall(
        [un, vn],
        Implies(
            conj([A.at(u), Not(A.at(v)), Atom(stc, (u, v))]),
            Exists(wn, conj([B.at(w), Atom(stc, (u, w)), Atom(stc, (w, v))])),
        ),
    )
    return AxiomInstance("GoOut", (A.name, B.name, f), Implies(premise, concl), premise, concl)


def newstart(A: Color, f: str, g: str, vocab: Vocabulary) -> AxiomInstance:
    """f is the previous edge relation, g the current one."""
    _check_binary(vocab, f)
    _check_binary(vocab, g)
    stc_f, stc_g = _stc(vocab, f), _stc(vocab, g)
    un, vn, wn = _freshen(["u", "v", "w"], A)
    u, v, w = Var(un), Var(vn), Var(wn)
    premise = forall(
        [un, vn],
        Implies(conj([A.at(u), A.at(v), Atom(g, (u, v))]), Atom(f, (u, v))),
    )
    concl = forall(
        [un, vn],
        Implies(
            conj([Atom(stc_g, (u, v)), Not(Atom(stc_f, (u, v)))]),
            Exists(wn, conj([Not(A.at(w)), Atom(stc_g, (u, w)), Atom(stc_g, (w, v))])),
        ),
    )
    return AxiomInstance("NewStart", (A.name, f, g), Implies(premise, concl), premise, concl)


def nc(c: Color, f: str, g: str, vocab: Vocabulary) -> AxiomInstance:
    """NC[c, f, g]: f-edges inside c are g-edges => f-paths that are not
    g-paths pass outside c.  Alias for NewStart with the relations swapped."""
    inst = newstart(c, g, f, vocab)
    return AxiomInstance("NewStart", (c.name, g, f), inst.whole, inst.premise, inst.conclusion)


def goout_premise_immediate(A: Color, B: Color, f: str) -> bool:
    """True when B is definitionally the f-image of A, making the GoOut
    premise valid outright (no prover call needed)."""
    w = fresh_var("w", free_vars(A.formula) | {B.var})
    image = Exists(w, conj([A.at(Var(w)), Atom(f, (Var(w), Var(B.var)))]))
    return alpha_equal(Exists(B.var, B.formula), Exists(B.var, image))


# ---------------------------------------------------------------------------
# induction


def ind_instance(Z: Color, P: Color, f: str, vocab: Vocabulary) -> AxiomInstance:
    """The induction principle instantiated at Z, P.

    Colors here may carry extra free parameters (e.g. the fixed source node
    in the transitivity witness); the instance is closed by universally
    quantifying them outermost.
    """
    _check_binary(vocab, f)
    stc = _stc(vocab, f)
    params = sorted((free_vars(Z.formula) - {Z.var}) | (free_vars(P.formula) - {P.var}))
    un, vn, wn = _freshen(["u", "v", "w"], Z, P)
    u, v, w = Var(un), Var(vn), Var(wn)
    zero = Forall(wn, Implies(Z.at(w), P.at(w)))
    step = forall([un, vn], Implies(conj([P.at(u), Atom(f, (u, v))]), P.at(v)))
    concl = forall([un, wn], Implies(conj([Z.at(w), Atom(stc, (w, u))]), P.at(u)))
    body = Implies(conj([zero, step]), concl)
    return AxiomInstance("Ind", (Z.name, P.name, f), forall(params, body))


def induction_support(goal_scheme: str, f: str, vocab: Vocabulary, g: Optional[str] = None,
                      colors: Sequence[Color] = ()) -> List[AxiomInstance]:
    """Ind instances from which T1 derives the named scheme.

    The reachability-transfer witness (giving transitivity) is included
    whenever the target proof needs to extend paths edge by edge; a single
    paper-style witness is not enough on its own (see the regression model
    in the tests).
    """
    stc = _stc(vocab, f)
    u = Var("u")
    out: List[AxiomInstance] = []

    def trans_witness(rel: str) -> AxiomInstance:
        s = _stc(vocab, rel)
        Zc = parametric_color("eq_u", "y", Equal(Var("y"), u))
        Pc = parametric_color(
            "transfer_u", "x",
            Forall("t", Implies(Atom(s, (Var("x"), Var("t"))), Atom(s, (u, Var("t"))))),
        )
        return ind_instance(Zc, Pc, rel, vocab)

    if goal_scheme == "Trans":
        out.append(trans_witness(f))
    elif goal_scheme == "T2":
        out.append(trans_witness(f))
        Zc = parametric_color("eq_u", "y", Equal(Var("y"), u))
        Pc = parametric_color(
            "lastedge_u", "x",
            disj([
                Equal(u, Var("x")),
                Exists("t", conj([Atom(stc, (u, Var("t"))), Atom(f, (Var("t"), Var("x")))])),
            ]),
        )
        out.append(ind_instance(Zc, Pc, f, vocab))
    elif goal_scheme == "NoExit":
        (A,) = colors
        out.append(ind_instance(A, A, f, vocab))
    elif goal_scheme == "GoOut":
        A, B = colors
        out.append(trans_witness(f))
        Pc = parametric_color(
            "escape_u", "x",
            disj([
                Not(A.at(u)),
                conj([
                    Atom(stc, (u, Var("x"))),
                    disj([
                        A.at(Var("x")),
                        Exists("t", conj([
                            B.at(Var("t")),
                            Atom(stc, (u, Var("t"))),
                            Atom(stc, (Var("t"), Var("x"))),
                        ])),
                    ]),
                ]),
            ]),
        )
        Zc = parametric_color("eq_u", "y", Equal(Var("y"), u))
        out.append(ind_instance(Zc, Pc, f, vocab))
    elif goal_scheme == "NewStart":
        if g is None:
            raise FormulaError("NewStart support needs both relations")
        (A,) = colors
        stc_g = _stc(vocab, g)
        out.append(trans_witness(f))
        out.append(trans_witness(g))
        Pc = parametric_color(
            "newpath_u", "x",
            conj([
                Atom(stc_g, (u, Var("x"))),
                disj([
                    Atom(stc, (u, Var("x"))),
                    Exists("t", conj([
                        Not(A.at(Var("t"))),
                        Atom(stc_g, (u, Var("t"))),
                        Atom(stc_g, (Var("t"), Var("x"))),
                    ])),
                ]),
            ]),
        )
        Zc = parametric_color("eq_u", "y", Equal(Var("y"), u))
        out.append(ind_instance(Zc, Pc, g, vocab))
    else:
        raise FormulaError("no induction support for %s" % goal_scheme)
    return out


# ---------------------------------------------------------------------------
# Nelson's translated schemes


def nelson_cut_name(f: str, x: Const) -> str:
    return "%s_cut_%s" % (f, x.name)


def nelson_axioms(f: str, stop_points: Sequence[Const], vocab: Vocabulary) -> List[AxiomInstance]:
    """N1-N7 over the derived relations f_cut_x (f minus edges leaving x).

    Stop points are constants; tuples range over them with repetition, which
    matters (several schemes only bite on the diagonal).  The defining axiom
    of each derived relation is emitted alongside.  The numbered schemes are
    guarded by func[f], like Order: the source system is stated for function
    graphs and several members (the ordering one, the bypass one) are false
    without it, so the guard is what makes every emitted instance
    closure-valid outright.  Definitional instances are conservative
    extensions rather than valid formulas; they are tagged NelsonDef.
    """
    _check_binary(vocab, f)
    stc_f = _stc(vocab, f)
    guard = func_formula(f)
    out: List[AxiomInstance] = []
    cut: Dict[str, str] = {}
    for x in stop_points:
        if x.name not in vocab.constants:
            raise FormulaError("stop point %s is not a declared constant" % x.name)
        name = nelson_cut_name(f, x)
        vocab.declare(name, 2)
        cut[x.name] = _stc(vocab, name)
        u, v = _vars("u", "v")
        defin = forall(
            ["u", "v"],
            Iff(
                Atom(name, (u, v)),
                conj([Atom(f, (u, v)), Not(Equal(u, x))]),
            ),
        )
        out.append(AxiomInstance("NelsonDef", (f, x.name), defin))
    if not stop_points:
        return out

    u, v, w = _vars("u", "v", "w")
    for x in stop_points:
        fx = nelson_cut_name(f, x)
        sx = cut[x.name]
        n1 = forall(
            ["u", "v"],
            Iff(
                Atom(sx, (u, v)),
                disj([Equal(u, v), Exists("z", conj([Atom(fx, (u, Var("z"))), Atom(sx, (Var("z"), v))]))]),
            ),
        )
        out.append(AxiomInstance("N1", (f, x.name), Implies(guard, n1)))
        n2 = forall(
            ["u", "v", "w"],
            Implies(conj([Atom(sx, (u, v)), Atom(sx, (v, w))]), Atom(sx, (u, w))),
        )
        out.append(AxiomInstance("N2", (f, x.name), Implies(guard, n2)))
        n3 = forall(["u", "v"], Implies(Atom(sx, (u, v)), Atom(stc_f, (u, v))))
        out.append(AxiomInstance("N3", (f, x.name), Implies(guard, n3)))
        n7 = forall(
            ["u", "v"],
            Implies(conj([Atom(f, (x, u)), Atom(stc_f, (u, v))]), Atom(sx, (u, v))),
        )
        out.append(AxiomInstance("N7", (f, x.name), Implies(guard, n7)))
    for x in stop_points:
        for y in stop_points:
            sx, sy = cut[x.name], cut[y.name]
            n5 = Forall(
                "u",
                Implies(
                    Atom(stc_f, (u, x)),
                    disj([Atom(sy, (u, x)), Atom(sx, (u, y))]),
                ),
            )
            out.append(AxiomInstance("N5", (f, x.name, y.name), Implies(guard, n5)))
    for x in stop_points:
        for y in stop_points:
            for z in stop_points:
                sy, sz = cut[y.name], cut[z.name]
                n4 = Forall(
                    "u",
                    Implies(
                        conj([Atom(sy, (u, x)), Atom(sz, (u, y))]),
                        Atom(sz, (u, x)),
                    ),
                )
                out.append(AxiomInstance("N4", (f, x.name, y.name, z.name), Implies(guard, n4)))
                n6 = Forall(
                    "u",
                    Implies(
                        conj([Atom(sy, (u, x)), Atom(sz, (u, y))]),
                        Atom(sz, (x, y)),
                    ),
                )
                out.append(AxiomInstance("N6", (f, x.name, y.name, z.name), Implies(guard, n6)))
    return out


# ---------------------------------------------------------------------------
# trees


def unshared_formula(f: str) -> Formula:
    u, v, w = _vars("u", "v", "w")
    return forall(
        ["u", "v", "w"],
        Implies(conj([Atom(f, (u, w)), Atom(f, (v, w))]), Equal(u, v)),
    )


def acyclic_stc_formula(f: str, vocab: Vocabulary) -> Formula:
    stc = _stc(vocab, f)
    v1, v2 = _vars("v1", "v2")
    return forall(["v1", "v2"], disj([Not(Atom(f, (v1, v2))), Not(Atom(stc, (v2, v1)))]))


def tree_axioms(selectors: Sequence[str], vocab: Vocabulary, down: str = "down") -> List[AxiomInstance]:
    """The down-definition, ancestor linearity, and subtree disjointness.

    Both tree schemes carry the structural guards (no sharing, acyclicity,
    selector disjointness) that make them closure-valid on arbitrary
    structures; on actual trees the guards are facts and the conclusions
    are usable directly.
    """
    for s in selectors:
        _check_binary(vocab, s)
    vocab.declare(down, 2)
    stc = _stc(vocab, down)
    out: List[AxiomInstance] = []
    v1, v2 = _vars("v1", "v2")
    defin = forall(
        ["v1", "v2"],
        Iff(Atom(down, (v1, v2)), disj([Atom(s, (v1, v2)) for s in selectors])),
    )
    out.append(AxiomInstance("TreeDef", (down,) + tuple(selectors), defin))

    u, v, w = _vars("u", "v", "w")
    linear = forall(
        ["u", "v", "w"],
        Implies(
            conj([Atom(stc, (v, u)), Atom(stc, (w, u))]),
            disj([Atom(stc, (v, w)), Atom(stc, (w, v))]),
        ),
    )
    out.append(AxiomInstance("TreeOrder", (down,), Implies(unshared_formula(down), linear)))

    for i, s1 in enumerate(selectors):
        for s2 in selectors[i + 1:]:
            vv, v1_, v2_, ww = _vars("v", "v1", "v2", "w")
            nojoint = forall(
                ["v", "u"],
                Not(conj([Atom(s1, (Var("v"), Var("u"))), Atom(s2, (Var("v"), Var("u")))])),
            )
            covers = forall(
                ["v1", "v2"],
                Implies(
                    disj([Atom(s1, (v1, v2)), Atom(s2, (v1, v2))]),
                    Atom(down, (v1, v2)),
                ),
            )
            guard = conj([unshared_formula(down), acyclic_stc_formula(down, vocab), covers, nojoint])
            disjoint = forall(
                ["v", "v1", "v2", "w"],
                Not(
                    conj(
                        [
                            Atom(s1, (vv, v1_)),
                            Atom(s2, (vv, v2_)),
                            Atom(stc, (v1_, ww)),
                            Atom(stc, (v2_, ww)),
                        ]
                    )
                ),
            )
            out.append(
                AxiomInstance("TreeDisjoint", (s1, s2, down), Implies(guard, disjoint))
            )
    return out


# ---------------------------------------------------------------------------
# dispatcher


SPLIT_SCHEMES = {"NoExit", "GoOut", "NewStart"}
ALIASES = {"OUT": "NoExit", "SEP": "GoOut", "NC": "NC", "NoExit": "NoExit",
           "GoOut": "GoOut", "NewStart": "NewStart", "T1": "T1", "T2": "T2",
           "Tleft": "Tleft", "Trans": "Trans", "Order": "Order"}


def instantiate(scheme: str, params: Sequence, vocab: Vocabulary) -> AxiomInstance:
    """Instantiate a scheme by canonical id or surface alias.

    Color parameters must be Color values; relation parameters strings.
    """
    canon = ALIASES.get(scheme)
    if canon is None:
        raise FormulaError("unknown scheme %s" % scheme)
    def want_color(p) -> Color:
        if not isinstance(p, Color):
            raise FormulaError("%s expects a color, got %r" % (scheme, p))
        if free_vars(p.formula) - {p.var}:
            raise FormulaError("color %s must have exactly one free variable" % p.name)
        return p

    def want_rel(p) -> str:
        if not isinstance(p, str):
            raise FormulaError("%s expects a relation name, got %r" % (scheme, p))
        return p

    if canon in ("T1", "T2", "Tleft", "Trans", "Order"):
        (f,) = params
        fn = {"T1": t1, "T2": t2, "Tleft": tleft, "Trans": trans, "Order": order}[canon]
        return fn(want_rel(f), vocab)
    if canon == "NoExit":
        A, f = params
        return noexit(want_color(A), want_rel(f), vocab)
    if canon == "GoOut":
        A, B, f = params
        return goout(want_color(A), want_color(B), want_rel(f), vocab)
    if canon == "NC":
        c, f, g = params
        return nc(want_color(c), want_rel(f), want_rel(g), vocab)
    if canon == "NewStart":
        A, f, g = params
        return newstart(want_color(A), want_rel(f), want_rel(g), vocab)
    raise FormulaError("unhandled scheme %s" % scheme)
