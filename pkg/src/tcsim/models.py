"""Bounded finite-model oracle with exact closure semantics.

A FiniteModel interprets every relation by an explicit table.  A *TC
model* additionally interprets each registered closure symbol as the
reflexive transitive closure of its base table; ``check_tc_valid``
enumerates exactly those models (base tables free, closure tables
forced), which makes it a sound refuter and a bounded confirmer for
closure-validity.  ``check_entailment_bounded`` drops the closure
forcing and searches arbitrary models, which is the right notion when
probing what a first-order prover can conclude.

Everything here is exhaustive and budgeted: exceeding the model budget
is reported explicitly, never silently treated as a pass.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

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
    Shorthand,
    TC,
    Top,
    Var,
    Vocabulary,
    alpha_normalize,
    expand_shorthands,
    free_vars,
    relations_in,
    term_constants,
)


# ---------------------------------------------------------------------------
# models


def closure(pairs: Iterable[Tuple[int, int]], size: int) -> frozenset:
    """Reflexive transitive closure of a binary table on 0..size-1."""
    rows = [0] * size
    for (a, b) in pairs:
        rows[a] |= 1 << b
    for i in range(size):
        rows[i] |= 1 << i
    changed = True
    while changed:
        changed = False
        for i in range(size):
            acc = rows[i]
            scan = acc
            while scan:
                j = (scan & -scan).bit_length() - 1
                scan &= scan - 1
                acc |= rows[j]
            if acc != rows[i]:
                rows[i] = acc
                changed = True
    out = set()
    for i in range(size):
        row = rows[i]
        while row:
            j = (row & -row).bit_length() - 1
            row &= row - 1
            out.add((i, j))
    return frozenset(out)


@dataclass
class FiniteModel:
    size: int
    rels: Dict[str, frozenset] = field(default_factory=dict)
    consts: Dict[str, int] = field(default_factory=dict)
    closure_pairs: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self._closures: Dict[str, frozenset] = {}

    def rel(self, name: str) -> frozenset:
        try:
            return self.rels[name]
        except KeyError:
            raise FormulaError("uninterpreted relation %s" % name)

    def computed_closure(self, rel: str) -> frozenset:
        got = self._closures.get(rel)
        if got is None:
            got = closure(self.rel(rel), self.size)
            self._closures[rel] = got
        return got

    def replace(self, **rels) -> "FiniteModel":
        new = dict(self.rels)
        new.update({k: frozenset(v) for k, v in rels.items()})
        return FiniteModel(self.size, new, dict(self.consts), dict(self.closure_pairs))


def is_tc_model(model: FiniteModel) -> bool:
    """True iff every registered closure table equals the closure of its base."""
    for base, stc in model.closure_pairs.items():
        if model.rel(stc) != model.computed_closure(base):
            return False
    return True


def format_model(model: FiniteModel, env: Optional[Dict[str, int]] = None) -> str:
    lines = ["universe: 0..%d" % (model.size - 1)]
    for name in sorted(model.consts):
        lines.append("  const %s = %d" % (name, model.consts[name]))
    for name in sorted(model.rels):
        rows = sorted(model.rels[name])
        lines.append("  %s = {%s}" % (name, ", ".join(str(t if len(t) > 1 else t[0]) for t in rows)))
    if env:
        lines.append("  assignment: " + ", ".join("%s=%d" % kv for kv in sorted(env.items())))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# evaluation

# primary evaluator: compiles a formula once into nested closures over an
# environment list; used by the enumeration loops where the same formula is
# evaluated on millions of candidate tables.


def _term_getter(t, slots):
    if isinstance(t, Var):
        idx = slots[t.name]
        return lambda m, e: e[idx]
    name = t.name
    return lambda m, e: m.consts[name]


def compile_formula(phi: Formula, extra_free: Sequence[str] = ()) -> Tuple[Callable, Dict[str, int]]:
    """Compile to fn(model, env_list) -> bool; returns (fn, slot map for free vars)."""
    phi = alpha_normalize(expand_shorthands(phi))
    slots: Dict[str, int] = {}
    for v in sorted(free_vars(phi)) + list(extra_free):
        slots.setdefault(v, len(slots))
    free_count = len(slots)

    def comp(f: Formula, slots: Dict[str, int]):
        if isinstance(f, Top):
            return lambda m, e: True
        if isinstance(f, Bot):
            return lambda m, e: False
        if isinstance(f, Equal):
            tl, tr = _term_getter(f.left, slots), _term_getter(f.right, slots)
            return lambda m, e: tl(m, e) == tr(m, e)
        if isinstance(f, Atom):
            getters = [_term_getter(a, slots) for a in f.args]
            name = f.rel
            if len(getters) == 1:
                (g0,) = getters
                return lambda m, e: (g0(m, e),) in m.rels[name]
            if len(getters) == 2:
                g0, g1 = getters
                return lambda m, e: (g0(m, e), g1(m, e)) in m.rels[name]
            return lambda m, e: tuple(g(m, e) for g in getters) in m.rels[name]
        if isinstance(f, TC):
            g0, g1 = _term_getter(f.left, slots), _term_getter(f.right, slots)
            name = f.rel
            return lambda m, e: (g0(m, e), g1(m, e)) in m.computed_closure(name)
        if isinstance(f, Not):
            sub = comp(f.body, slots)
            return lambda m, e: not sub(m, e)
        if isinstance(f, And):
            subs = [comp(p, slots) for p in f.parts]
            return lambda m, e: all(s(m, e) for s in subs)
        if isinstance(f, Or):
            subs = [comp(p, slots) for p in f.parts]
            return lambda m, e: any(s(m, e) for s in subs)
        if isinstance(f, Implies):
            l, r = comp(f.left, slots), comp(f.right, slots)
            return lambda m, e: (not l(m, e)) or r(m, e)
        if isinstance(f, Iff):
            l, r = comp(f.left, slots), comp(f.right, slots)
            return lambda m, e: l(m, e) == r(m, e)
        if isinstance(f, (Forall, Exists)):
            inner_slots = dict(slots)
            inner_slots[f.var] = idx = len(inner_slots)
            sub = comp(f.body, inner_slots)
            if isinstance(f, Forall):
                def run_all(m, e, sub=sub, idx=idx):
                    e.append(0)
                    try:
                        for x in range(m.size):
                            e[idx] = x
                            if not sub(m, e):
                                return False
                        return True
                    finally:
                        e.pop()
                return run_all

            def run_any(m, e, sub=sub, idx=idx):
                e.append(0)
                try:
                    for x in range(m.size):
                        e[idx] = x
                        if sub(m, e):
                            return True
                    return False
                finally:
                    e.pop()
            return run_any
        raise FormulaError("cannot evaluate %r" % (f,))

    fn = comp(phi, slots)
    del free_count
    return fn, slots


def evaluate(model: FiniteModel, phi: Formula, env: Optional[Dict[str, int]] = None) -> bool:
    """Tarskian truth of phi in model under env (which must cover its free variables)."""
    env = env or {}
    fv = free_vars(phi)
    missing = fv - set(env)
    if missing:
        raise FormulaError("unbound variables %s" % sorted(missing))
    fn, slots = compile_formula(phi)
    elist = [0] * len(slots)
    for v, i in slots.items():
        elist[i] = env[v]
    return bool(fn(model, elist))


def evaluate_naive(model: FiniteModel, phi: Formula, env: Optional[Dict[str, int]] = None) -> bool:
    """Second, independently coded evaluator (plain recursion, closure by BFS).

    Used as the dual-implementation check for `evaluate`; keep this free of
    caching and compilation on purpose.
    """
    env = dict(env or {})

    def term(t):
        if isinstance(t, Var):
            return env[t.name]
        return model.consts[t.name]

    def reach(rel, a, b):
        if a == b:
            return True
        table = model.rels[rel]
        seen = {a}
        frontier = [a]
        while frontier:
            nxt = []
            for u in frontier:
                for (p, q) in table:
                    if p == u and q not in seen:
                        if q == b:
                            return True
                        seen.add(q)
                        nxt.append(q)
            frontier = nxt
        return False

    def ev(f) -> bool:
        if isinstance(f, Top):
            return True
        if isinstance(f, Bot):
            return False
        if isinstance(f, Shorthand):
            return ev(expand_shorthands(f))
        if isinstance(f, Equal):
            return term(f.left) == term(f.right)
        if isinstance(f, Atom):
            return tuple(term(a) for a in f.args) in model.rels[f.rel]
        if isinstance(f, TC):
            return reach(f.rel, term(f.left), term(f.right))
        if isinstance(f, Not):
            return not ev(f.body)
        if isinstance(f, And):
            return all(ev(p) for p in f.parts)
        if isinstance(f, Or):
            return any(ev(p) for p in f.parts)
        if isinstance(f, Implies):
            return (not ev(f.left)) or ev(f.right)
        if isinstance(f, Iff):
            return ev(f.left) == ev(f.right)
        if isinstance(f, (Forall, Exists)):
            outer = env.get(f.var)
            hits = 0
            for x in range(model.size):
                env[f.var] = x
                if ev(f.body):
                    hits += 1
            if outer is None:
                env.pop(f.var, None)
            else:
                env[f.var] = outer
            return hits == model.size if isinstance(f, Forall) else hits > 0
        raise FormulaError("cannot evaluate %r" % (f,))

    return ev(phi)


# ---------------------------------------------------------------------------
# enumeration


@dataclass
class OracleReport:
    verdict: str  # "valid_up_to" | "refuted" | "budget_exceeded"
    bound: int
    countermodel: Optional[FiniteModel] = None
    models_checked: int = 0
    elapsed: float = 0.0

    @property
    def valid(self) -> bool:
        return self.verdict == "valid_up_to"

    def describe(self) -> str:
        if self.verdict == "valid_up_to":
            return "ValidUpTo(%d) [%d models, %.2fs]" % (
                self.bound, self.models_checked, self.elapsed)
        if self.verdict == "refuted":
            return "Refuted [%d models, %.2fs]\n%s" % (
                self.models_checked, self.elapsed, format_model(self.countermodel))
        return "InconclusiveBudget(%d models checked)" % self.models_checked


class BudgetExceeded(Exception):
    pass


def _all_tables(size: int, arity: int) -> Iterator[frozenset]:
    univ = [tuple(t) for t in itertools.product(range(size), repeat=arity)]
    total = len(univ)
    for mask in range(1 << total):
        if mask == 0:
            yield frozenset()
            continue
        yield frozenset(univ[i] for i in range(total) if mask >> i & 1)


def _const_assignments(names: Sequence[str], size: int) -> Iterator[Dict[str, int]]:
    # restricted-growth strings: canonical up to permuting the universe,
    # sound here because all relation tables are enumerated in full
    if not names:
        yield {}
        return

    def rec(i: int, used: int, cur: List[int]):
        if i == len(names):
            yield dict(zip(names, cur))
            return
        top = min(used + 1, size)
        for v in range(top):
            cur.append(v)
            yield from rec(i + 1, max(used, v + 1), cur)
            cur.pop()

    yield from rec(0, 0, [])


def enumerate_models(
    relations: Dict[str, int],
    sizes: Iterable[int],
    constants: Sequence[str] = (),
    closure_pairs: Optional[Dict[str, str]] = None,
    force_closures: bool = True,
    constraints: Sequence[Formula] = (),
    defined: Optional[Dict[str, Tuple[Tuple[str, ...], Formula]]] = None,
    budget: Optional[int] = None,
    counter: Optional[List[int]] = None,
) -> Iterator[FiniteModel]:
    """Yield models over the given signature, smallest size first.

    Closure symbols are computed (never enumerated) when force_closures is
    set; `defined` relations are computed from their defining formula once
    its dependencies are assigned.  Constraints are checked as early as
    their symbols allow, which prunes the search drastically for things
    like functionality.  `counter` (a one-element list) accumulates the
    number of complete candidates inspected; `budget` caps it.
    """
    closure_pairs = closure_pairs or {}
    defined = defined or {}
    stc_syms = set(closure_pairs.values()) if force_closures else set()
    base_of = {v: k for k, v in closure_pairs.items()}
    counter = counter if counter is not None else [0]

    # higher-arity tables first: closures then get computed once per base
    # table, and structural constraints (func, acyclic) prune the big axes
    # before the cheap unary ones fan out
    free_rels = [
        (name, ar)
        for name, ar in sorted(relations.items(), key=lambda kv: (-kv[1], kv[0]))
        if name not in stc_syms and name not in defined
    ]
    con_list = [c for c in constants]

    compiled_cons = [
        (compile_formula(c)[0], set(relations_in(c)), set(term_constants(c)))
        for c in constraints
    ]
    compiled_defs = {
        name: (params, compile_formula(body, extra_free=params), set(relations_in(body)) - {name})
        for name, (params, body) in defined.items()
    }

    for size in sizes:
        for const_env in _const_assignments(con_list, size):
            assigned: Dict[str, frozenset] = {}

            def fill_derived():
                progress = True
                while progress:
                    progress = False
                    for stc in stc_syms:
                        if stc not in assigned and base_of[stc] in assigned:
                            assigned[stc] = closure(assigned[base_of[stc]], size)
                            progress = True
                    for name, (params, (fn, slots), need) in compiled_defs.items():
                        if name in assigned or not need <= set(assigned):
                            continue
                        m = FiniteModel(size, assigned, const_env, {})
                        table = set()
                        for tup in itertools.product(range(size), repeat=len(params)):
                            elist = [0] * len(slots)
                            for p, x in zip(params, tup):
                                elist[slots[p]] = x
                            if fn(m, elist):
                                table.add(tup)
                        assigned[name] = frozenset(table)
                        progress = True

            def rec(i: int, pending) -> Iterator[FiniteModel]:
                fill_derived()
                model = FiniteModel(size, assigned, const_env, dict(closure_pairs))
                still = []
                for item in pending:
                    fn, crels, cconsts = item
                    if crels <= set(assigned) and cconsts <= set(const_env):
                        if not fn(model, []):
                            return
                    else:
                        still.append(item)
                if i == len(free_rels):
                    counter[0] += 1
                    if budget is not None and counter[0] > budget:
                        raise BudgetExceeded()
                    yield FiniteModel(size, dict(assigned), dict(const_env), dict(closure_pairs))
                    return
                name, ar = free_rels[i]
                before = set(assigned)
                for table in _all_tables(size, ar):
                    assigned[name] = table
                    yield from rec(i + 1, still)
                    for k in list(assigned):
                        if k not in before:
                            del assigned[k]

            yield from rec(0, compiled_cons)


def _signature_for(phi: Formula, vocab: Optional[Vocabulary], extra: Sequence[Formula]):
    rels: Dict[str, int] = {}
    consts: List[str] = []
    closure_pairs: Dict[str, str] = {}
    for f in (phi, *extra):
        f = expand_shorthands(f)
        for name, ar in relations_in(f).items():
            have = rels.get(name)
            if have is not None and have != ar:
                raise FormulaError("arity clash for %s" % name)
            rels[name] = ar
        for c in sorted(term_constants(f)):
            if c not in consts:
                consts.append(c)
    if vocab is not None:
        for base, stc in vocab.closure_pairs.items():
            if stc in rels or base in rels:
                rels.setdefault(base, 2)
                rels.setdefault(stc, 2)
                closure_pairs[base] = stc
    else:
        # without a vocabulary, recognize closure symbols by the stc_ prefix
        for name, ar in list(rels.items()):
            if ar == 2 and name.startswith("stc_"):
                base = name[4:]
                rels.setdefault(base, 2)
                closure_pairs[base] = name
    return rels, consts, closure_pairs


def check_tc_valid(
    phi: Formula,
    n_max: int,
    vocab: Optional[Vocabulary] = None,
    constraints: Sequence[Formula] = (),
    budget: int = 20_000_000,
    defined: Optional[Dict[str, Tuple[Tuple[str, ...], Formula]]] = None,
) -> OracleReport:
    """Exhaustively check phi over all TC models of sizes 1..n_max.

    Optional constraints filter the model class (their symbols join the
    signature); closure tables are always forced to true closures.
    """
    if free_vars(phi):
        raise FormulaError("check_tc_valid needs a closed formula")
    phi = expand_shorthands(phi)
    constraints = [expand_shorthands(c) for c in constraints]
    rels, consts, closure_pairs = _signature_for(phi, vocab, constraints)
    counter = [0]
    start = time.time()
    fn, _ = compile_formula(phi)
    try:
        for model in enumerate_models(
            rels,
            range(1, n_max + 1),
            consts,
            closure_pairs,
            True,
            constraints,
            defined,
            budget,
            counter,
        ):
            if not fn(model, []):
                return OracleReport("refuted", n_max, model, counter[0], time.time() - start)
    except BudgetExceeded:
        return OracleReport("budget_exceeded", n_max, None, counter[0], time.time() - start)
    return OracleReport("valid_up_to", n_max, None, counter[0], time.time() - start)


def check_entailment_bounded(
    sigma: Sequence[Formula],
    phi: Formula,
    n_max: int,
    vocab: Optional[Vocabulary] = None,
    budget: int = 20_000_000,
    defined: Optional[Dict[str, Tuple[Tuple[str, ...], Formula]]] = None,
) -> OracleReport:
    """Search arbitrary (not TC) models of sigma and not-phi up to n_max.

    Refuted means a countermodel to the entailment was found, i.e. no
    first-order prover can derive phi from sigma.
    """
    if free_vars(phi):
        raise FormulaError("check_entailment_bounded needs a closed formula")
    phi = expand_shorthands(phi)
    sigma = [expand_shorthands(s) for s in sigma]
    rels, consts, closure_pairs = _signature_for(phi, vocab, sigma)
    # TC nodes still mean true closure; only stc atoms are free
    counter = [0]
    start = time.time()
    fn, _ = compile_formula(phi)
    try:
        for model in enumerate_models(
            rels,
            range(1, n_max + 1),
            consts,
            closure_pairs,
            False,
            sigma,
            defined,
            budget,
            counter,
        ):
            if not fn(model, []):
                return OracleReport("refuted", n_max, model, counter[0], time.time() - start)
    except BudgetExceeded:
        return OracleReport("budget_exceeded", n_max, None, counter[0], time.time() - start)
    return OracleReport("valid_up_to", n_max, None, counter[0], time.time() - start)
