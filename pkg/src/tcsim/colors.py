"""Candidate color generation: initial colors, reachability colors, and
bounded Boolean combinations.

Output order is part of the contract: program-variable colors (sorted),
then start/end change colors per before/after relation pair, then user
colors, then forward and backward reachability over all of those.  The
exploration loop depends on this order for reproducible transcripts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

from .axioms import Color
from .formulas import (
    Atom,
    Exists,
    Formula,
    Iff,
    Not,
    Var,
    alpha_normalize,
    conj,
    free_vars,
    fresh_var,
    relations_in,
    substitute,
)
from .parser import VerificationTask


@dataclass
class ColorSpace:
    initial: List[Color]
    derived: List[Color] = field(default_factory=list)
    combination_budget: int = 1

    @property
    def atoms(self) -> List[Color]:
        return self.initial + self.derived


def initial_colors(task: VerificationTask, include_change: bool = True) -> List[Color]:
    """Unary predicates of the goal VC, change colors per before/after pair,
    then user-declared colors."""
    out: List[Color] = []
    seen = set()

    def add(c: Color):
        k = alpha_normalize(Exists(c.var, c.formula))
        if k not in seen:
            seen.add(k)
            out.append(c)

    unary = sorted(
        name
        for f in [*task.hypotheses, task.conclusion]
        for name, ar in relations_in(f).items()
        if ar == 1
    )
    for name in sorted(set(unary)):
        add(Color(name, "v", Atom(name, (Var("v"),)), "program-variable"))

    if include_change:
        for before, after in sorted(task.vocab.after.items()):
            if task.vocab.relations.get(before) != 2:
                continue
            if before not in task.tc_relations and after not in task.tc_relations:
                continue
            v, w = Var("v"), Var("w")
            start = Exists("w", Not(Iff(Atom(before, (v, w)), Atom(after, (v, w)))))
            end = Exists("w", Not(Iff(Atom(before, (w, v)), Atom(after, (w, v)))))
            add(Color("dstart[%s,%s]" % (before, after), "v", start, "start-change"))
            add(Color("dend[%s,%s]" % (before, after), "v", end, "end-change"))

    for c in task.user_colors:
        add(c)
    return out


def reachability_colors(colors: Sequence[Color], F: Sequence[str],
                        vocab) -> List[Color]:
    """Forward and backward closure-reachability from every color, both kept
    in the emission order forward-first."""
    out: List[Color] = []
    for direction in ("r", "rb"):
        for c in colors:
            for f in F:
                stc = vocab.ensure_closure(f)
                w = fresh_var("w", free_vars(c.formula) | {c.var})
                v = Var(c.var)
                if direction == "r":
                    body = Exists(w, conj([c.at(Var(w)), Atom(stc, (Var(w), v))]))
                    prov = "reach_fwd"
                else:
                    body = Exists(w, conj([c.at(Var(w)), Atom(stc, (v, Var(w)))]))
                    prov = "reach_bwd"
                out.append(Color("%s[%s,%s]" % (direction, c.name, f), c.var, body, prov))
    return out


def boolean_combinations(i: int, colors: Sequence[Color]) -> List[Color]:
    """All conjunctions of at most i literals over the colors.

    Size-1 combinations are the colors then their negations; larger sizes
    enumerate index-ordered subsets with every sign pattern, skipping the
    contradictory c & !c pairs by construction.  Deduplicated by
    alpha-equivalence of the defining formulas.
    """
    if i < 1:
        raise ValueError("combination budget must be >= 1")
    out: List[Color] = []
    seen = set()

    def add(c: Color):
        k = alpha_normalize(Exists(c.var, c.formula))
        if k not in seen:
            seen.add(k)
            out.append(c)

    for c in colors:
        add(c)
    for c in colors:
        add(c.negated())
    for size in range(2, i + 1):
        for combo in itertools.combinations(range(len(colors)), size):
            for signs in itertools.product((False, True), repeat=size):
                parts = []
                names = []
                var = "v"
                for idx, neg in zip(combo, signs):
                    c = colors[idx]
                    body = substitute(c.formula, {c.var: Var(var)})
                    parts.append(Not(body) if neg else body)
                    names.append(("!" if neg else "") + c.name)
                add(Color("&".join(names), var, conj(parts), "boolean-combination"))
    return out


def color_space(task: VerificationTask, vocab, include_change: bool = True) -> ColorSpace:
    init = initial_colors(task, include_change)
    derived = reachability_colors(init, task.tc_relations, vocab)
    return ColorSpace(initial=init, derived=derived)
