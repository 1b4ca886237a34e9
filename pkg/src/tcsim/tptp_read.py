"""Reader for the TPTP FOF fragment this tool emits (and that provers eat).

Supports fof(name, role, formula) statements with the usual connectives,
both quantifiers, =/!=, $true/$false, and %-comments.  Uppercase names
are variables, lowercase names in term position are constants.
"""

from __future__ import annotations

import re
from typing import List, Tuple

from .formulas import (
    And,
    Atom,
    Bot,
    Const,
    Equal,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Top,
    Var,
)


class TptpError(Exception):
    pass


_TOK = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<dword>\$[a-z_]+)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=>|=>|!=|[()\[\],.:&|~!?=])
    """,
    re.VERBOSE,
)


def _tokens(text: str) -> List[str]:
    out = []
    i = 0
    while i < len(text):
        m = _TOK.match(text, i)
        if not m:
            raise TptpError("bad character %r at offset %d" % (text[i], i))
        if m.lastgroup not in ("ws", "comment"):
            out.append(m.group())
        i = m.end()
    out.append("<eof>")
    return out


class _R:
    def __init__(self, toks: List[str]):
        self.toks = toks
        self.i = 0

    def peek(self) -> str:
        return self.toks[self.i]

    def next(self) -> str:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, t: str):
        got = self.next()
        if got != t:
            raise TptpError("expected %r, got %r" % (t, got))

    def formula(self) -> Formula:
        left = self.unit()
        t = self.peek()
        if t == "&":
            parts = [left]
            while self.peek() == "&":
                self.next()
                parts.append(self.unit())
            return And(tuple(parts))
        if t == "|":
            parts = [left]
            while self.peek() == "|":
                self.next()
                parts.append(self.unit())
            return Or(tuple(parts))
        if t == "=>":
            self.next()
            return Implies(left, self.unit_or_binary())
        if t == "<=>":
            self.next()
            return Iff(left, self.unit_or_binary())
        return left

    def unit_or_binary(self) -> Formula:
        # emitted problems parenthesize nested arrows, so a unit suffices;
        # accept a full formula for robustness with hand-written files
        return self.formula()

    def unit(self) -> Formula:
        t = self.next()
        if t == "(":
            f = self.formula()
            self.expect(")")
            return f
        if t == "~":
            return Not(self.unit())
        if t in ("!", "?"):
            self.expect("[")
            names = [self._var()]
            while self.peek() == ",":
                self.next()
                names.append(self._var())
            self.expect("]")
            self.expect(":")
            body = self.unit()
            cls = Forall if t == "!" else Exists
            for n in reversed(names):
                body = cls(n, body)
            return body
        if t == "$true":
            return Top()
        if t == "$false":
            return Bot()
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", t):
            return self._atom_or_eq(t)
        raise TptpError("unexpected token %r" % t)

    def _var(self) -> str:
        t = self.next()
        if not re.fullmatch(r"[A-Z][A-Za-z0-9_]*", t):
            raise TptpError("expected variable, got %r" % t)
        return t

    def _term(self, tok=None):
        t = tok if tok is not None else self.next()
        if re.fullmatch(r"[A-Z][A-Za-z0-9_]*", t):
            return Var(t)
        if re.fullmatch(r"[a-z_][A-Za-z0-9_]*", t):
            if self.peek() == "(":
                raise TptpError("function terms are not supported")
            return Const(t)
        raise TptpError("expected term, got %r" % t)

    def _atom_or_eq(self, head: str) -> Formula:
        if head[0].islower() and self.peek() == "(":
            self.next()
            args = [self._term()]
            while self.peek() == ",":
                self.next()
                args.append(self._term())
            self.expect(")")
            atom = Atom(head, tuple(args))
            return self._maybe_eq_tail(atom)
        # bare term or propositional constant
        if self.peek() in ("=", "!="):
            op = self.next()
            rhs = self._term()
            eq = Equal(self._term(head), rhs)
            return eq if op == "=" else Not(eq)
        if head[0].isupper():
            raise TptpError("dangling variable %r" % head)
        return Atom(head, ())

    def _maybe_eq_tail(self, atom: Formula) -> Formula:
        if self.peek() in ("=", "!="):
            raise TptpError("equality over predicate application")
        return atom


def parse_tptp(text: str) -> List[Tuple[str, str, Formula]]:
    r = _R(_tokens(text))
    out = []
    while r.peek() != "<eof>":
        r.expect("fof")
        r.expect("(")
        name = r.next()
        r.expect(",")
        role = r.next()
        r.expect(",")
        f = r.formula()
        r.expect(")")
        r.expect(".")
        out.append((name, role, f))
    return out
