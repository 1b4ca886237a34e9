"""Deterministic TPTP FOF emission.

Bundles carry named axioms, named hypotheses, and one conjecture; every
formula must be closed and TC-free.  Output is byte-stable for a given
bundle: bound variables are renamed X0, X1, ... from the alpha-normal
form, and symbol sanitization (primes become _ap) is injective or the
emitter refuses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

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
    alpha_normalize,
    free_vars,
    relations_in,
    subformulas,
    term_constants,
)


@dataclass
class ProblemBundle:
    name: str
    axioms: List[Tuple[str, Formula]] = field(default_factory=list)
    hypotheses: List[Tuple[str, Formula]] = field(default_factory=list)
    conjecture: Tuple[str, Formula] = ("goal", Top())

    def validate(self):
        names = [n for n, _ in self.axioms] + [n for n, _ in self.hypotheses]
        names.append(self.conjecture[0])
        if len(set(names)) != len(names):
            raise FormulaError("duplicate formula names in bundle")
        for _, f in [*self.axioms, *self.hypotheses, self.conjecture]:
            if free_vars(f):
                raise FormulaError("bundle formula with free variables: %s" % sorted(free_vars(f)))
            for sub in subformulas(f):
                if isinstance(sub, (TC, Shorthand)):
                    raise FormulaError("bundle formulas must be TC-free and shorthand-free")


def sanitize_symbol(name: str) -> str:
    out = name.replace("'", "_ap")
    out = re.sub(r"[^A-Za-z0-9_]", "_", out)
    if not out or not (out[0].isalpha() and out[0].islower()):
        out = "c_" + out
    return out


def _symbol_map(bundle: ProblemBundle) -> Dict[str, str]:
    syms = set()
    for _, f in [*bundle.axioms, *bundle.hypotheses, bundle.conjecture]:
        syms.update(relations_in(f))
        syms.update(term_constants(f))
    mapping = {}
    used: Dict[str, str] = {}
    for s in sorted(syms):
        t = sanitize_symbol(s)
        if t in used and used[t] != s:
            raise FormulaError("symbol collision after sanitization: %r and %r -> %s"
                               % (used[t], s, t))
        used[t] = s
        mapping[s] = t
    return mapping


def _fof_formula(phi: Formula, symmap: Dict[str, str]) -> str:
    phi = alpha_normalize(phi)

    def vname(n: str) -> str:
        # alpha normalization produced _b<k>
        return "X" + n[2:]

    def term(t) -> str:
        if isinstance(t, Var):
            return vname(t.name)
        return symmap[t.name]

    def go(f: Formula) -> str:
        if isinstance(f, Top):
            return "$true"
        if isinstance(f, Bot):
            return "$false"
        if isinstance(f, Equal):
            return "(%s = %s)" % (term(f.left), term(f.right))
        if isinstance(f, Atom):
            if not f.args:
                return symmap[f.rel]
            return "%s(%s)" % (symmap[f.rel], ",".join(term(a) for a in f.args))
        if isinstance(f, Not):
            if isinstance(f.body, Equal):
                return "(%s != %s)" % (term(f.body.left), term(f.body.right))
            return "~(%s)" % go(f.body)
        if isinstance(f, And):
            return "(" + " & ".join(go(p) for p in f.parts) + ")"
        if isinstance(f, Or):
            return "(" + " | ".join(go(p) for p in f.parts) + ")"
        if isinstance(f, Implies):
            return "(%s => %s)" % (go(f.left), go(f.right))
        if isinstance(f, Iff):
            return "(%s <=> %s)" % (go(f.left), go(f.right))
        if isinstance(f, (Forall, Exists)):
            q = "!" if isinstance(f, Forall) else "?"
            names = [f.var]
            body = f.body
            while isinstance(body, type(f)):
                names.append(body.var)
                body = body.body
            return "(%s [%s] : %s)" % (q, ",".join(vname(n) for n in names), go(body))
        raise FormulaError("cannot emit %r" % (f,))

    return go(phi)


_NAME_RE = re.compile(r"[^a-z0-9_]")


def _fof_name(prefix: str, idx: int, label: str) -> str:
    slug = _NAME_RE.sub("_", label.lower().replace("'", "_ap"))[:48].strip("_")
    return "%s_%03d_%s" % (prefix, idx, slug or "f")


def to_tptp(bundle: ProblemBundle) -> str:
    """Render the bundle as TPTP FOF text (deterministic bytes)."""
    bundle.validate()
    symmap = _symbol_map(bundle)
    lines = ["%% bundle: %s" % sanitize_symbol(bundle.name)]
    for i, (label, f) in enumerate(bundle.axioms):
        lines.append("fof(%s, axiom," % _fof_name("ax", i, label))
        lines.append("    %s)." % _fof_formula(f, symmap))
    for i, (label, f) in enumerate(bundle.hypotheses):
        lines.append("fof(%s, hypothesis," % _fof_name("hyp", i, label))
        lines.append("    %s)." % _fof_formula(f, symmap))
    label, f = bundle.conjecture
    lines.append("fof(%s, conjecture," % _fof_name("goal", 0, label))
    lines.append("    %s)." % _fof_formula(f, symmap))
    return "\n".join(lines) + "\n"
