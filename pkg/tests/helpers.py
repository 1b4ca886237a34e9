"""Shared test utilities: an independent TPTP reader for the reparse
oracle, random formula/model generators for the dual-implementation
checks, and prover availability probing."""

import os
import random
import re
import shutil

from tcsim.formulas import (
    And,
    Atom,
    Bot,
    Const,
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
)
from tcsim.models import FiniteModel, closure
from tcsim.prover import find_prover


def prover_command():
    cmd = find_prover()
    if cmd and "tcsim-z3" in cmd and shutil.which("tcsim-z3") is None:
        return None
    return cmd


# ---------------------------------------------------------------------------
# independent TPTP reader (deliberately separate from tcsim.tptp_read)

_TOKEN = re.compile(r"\s*(%[^\n]*|<=>|=>|!=|\$[a-z]+|[A-Za-z_][A-Za-z0-9_]*|.)")


def _lex(text):
    toks = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            break
        t = m.group(1)
        i = m.end()
        if not t.startswith("%") and t.strip():
            toks.append(t)
    toks.append(None)
    return toks


class MiniTptp:
    def __init__(self, text):
        self.toks = _lex(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def pop(self, want=None):
        t = self.toks[self.i]
        self.i += 1
        assert want is None or t == want, "wanted %r got %r" % (want, t)
        return t

    def parse(self):
        out = []
        while self.peek() == "fof":
            self.pop("fof")
            self.pop("(")
            name = self.pop()
            self.pop(",")
            role = self.pop()
            self.pop(",")
            f = self.formula()
            self.pop(")")
            self.pop(".")
            out.append((name, role, f))
        assert self.peek() is None, "trailing " + repr(self.peek())
        return out

    def formula(self):
        f = self.unit()
        while self.peek() in ("&", "|", "=>", "<=>"):
            op = self.pop()
            g = self.unit()
            if op == "&":
                f = And((f, g)) if not isinstance(f, And) else And(f.parts + (g,))
            elif op == "|":
                f = Or((f, g)) if not isinstance(f, Or) else Or(f.parts + (g,))
            elif op == "=>":
                f = Implies(f, g)
            else:
                f = Iff(f, g)
        return f

    def unit(self):
        t = self.pop()
        if t == "(":
            f = self.formula()
            self.pop(")")
            return f
        if t == "~":
            return Not(self.unit())
        if t in ("!", "?"):
            self.pop("[")
            names = [self.pop()]
            while self.peek() == ",":
                self.pop(",")
                names.append(self.pop())
            self.pop("]")
            self.pop(":")
            body = self.unit()
            cls = Forall if t == "!" else Exists
            for n in reversed(names):
                body = cls(n, body)
            return body
        if t == "$true":
            return Top()
        if t == "$false":
            return Bot()
        if self.peek() == "(":
            self.pop("(")
            args = [self.term()]
            while self.peek() == ",":
                self.pop(",")
                args.append(self.term())
            self.pop(")")
            return Atom(t, tuple(args))
        if self.peek() in ("=", "!="):
            op = self.pop()
            rhs = self.term()
            eq = Equal(self._mk_term(t), rhs)
            return eq if op == "=" else Not(eq)
        return Atom(t, ())

    def term(self):
        return self._mk_term(self.pop())

    def _mk_term(self, t):
        return Var(t) if t[0].isupper() else Const(t)


# ---------------------------------------------------------------------------
# random generators


def random_model(rng, size, unary=("A", "B"), binary=("f", "g"), tc=True):
    rels = {}
    for u in unary:
        rels[u] = frozenset((i,) for i in range(size) if rng.random() < 0.5)
    pairs = {"f": None}
    closure_pairs = {}
    for b in binary:
        table = frozenset(
            (i, j) for i in range(size) for j in range(size) if rng.random() < 0.3)
        rels[b] = table
        if tc:
            rels["stc_" + b] = closure(table, size)
            closure_pairs[b] = "stc_" + b
    return FiniteModel(size, rels, {}, closure_pairs)


def random_formula(rng, depth, scope=()):
    unary = ["A", "B"]
    binary = ["f", "g"]
    leaf = depth <= 0 or rng.random() < 0.25
    if leaf:
        if scope and rng.random() < 0.85:
            pick = rng.choice(["atom1", "atom2", "tc", "eq"])
            a = Var(rng.choice(scope))
            b = Var(rng.choice(scope))
            if pick == "atom1":
                return Atom(rng.choice(unary), (a,))
            if pick == "atom2":
                return Atom(rng.choice(binary), (a, b))
            if pick == "tc":
                return TC(rng.choice(binary), a, b)
            return Equal(a, b)
        return rng.choice([Top(), Bot()])
    kind = rng.choice(["not", "and", "or", "imp", "iff", "all", "ex"])
    if kind == "not":
        return Not(random_formula(rng, depth - 1, scope))
    if kind in ("and", "or"):
        parts = tuple(random_formula(rng, depth - 1, scope) for _ in range(2))
        return And(parts) if kind == "and" else Or(parts)
    if kind in ("imp", "iff"):
        l = random_formula(rng, depth - 1, scope)
        r = random_formula(rng, depth - 1, scope)
        return Implies(l, r) if kind == "imp" else Iff(l, r)
    var = "v%d" % len(scope)
    body = random_formula(rng, depth - 1, scope + (var,))
    return Forall(var, body) if kind == "all" else Exists(var, body)
