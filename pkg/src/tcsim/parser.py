"""Surface syntax: formulas, spec files, and the deterministic printer.

Formula grammar (precedence low to high, mirroring the usual convention
that negation binds tightest, then conjunction over disjunction, then
the arrows, with quantifiers scoping as far right as possible):

    formula  := ('ALL'|'EX') names '.' formula | arrows
    arrows   := or_ (('->'|'<->') arrows)?          # right associative
    or_      := and_ ('|' and_)*
    and_     := unary ('&' unary)*
    unary    := '!' unary | atom
    atom     := '(' formula ')' | 'true' | 'false'
              | 'TC' '[' name ']' '(' term ',' term ')'
              | shorthand | name '(' terms ')' | term ('='|'!=') term
              | '$' name                            # block reference
    shorthand:= ('unique'|'func'|'acyclic'|'unshared') '[' name ']'
              | 'total' '[' name ',' name ',' name ']'
              | ('reach'|'reachback') '[' name ',' name ']' '(' term ')'

Spec files are a sequence of blocks:

    vocab { decl* }           decl := name '/' INT ('var'|'field'|'after' name)?
    pre|post|invariant|loop_cond|transformer { formula }
    colors { (name '(' name ')' '=' formula ';')* }
    axioms { (SCHEME '[' args ']' ';')* }
    goal ('init'|'maintain'|'exit'|'custom' '{' formula '}')

Arity-0 declarations introduce constants.  Primed names (trailing ')
belong to the after-state vocabulary.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .axioms import ALIASES, AxiomInstance, Color, TRUE_COLOR, instantiate
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
    Term,
    Top,
    Var,
    Vocabulary,
    conj,
    eliminate_tc,
    expand_shorthands,
    free_vars,
    relations_in,
    subformulas,
    substitute,
    well_formed,
)


class SpecError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        if line:
            message = "%d:%d: %s" % (line, col, message)
        super().__init__(message)
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*'*)
  | (?P<int>\d+)
  | (?P<op><->|->|!=|[(){}\[\],.=&|!/;$])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str  # name | int | op | eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    toks: List[Token] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise SpecError("unexpected character %r" % text[i], line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind not in ("ws", "comment"):
            toks.append(Token("op" if kind == "op" else kind, lexeme, line, col))
        nl = lexeme.count("\n")
        if nl:
            line += nl
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        i = m.end()
    toks.append(Token("eof", "", line, col))
    return toks


QUANTIFIERS = {"ALL": Forall, "EX": Exists}
SHORTHAND_KEYWORDS = {"unique", "func", "acyclic", "unshared", "total", "reach", "reachback"}
RESERVED = {"ALL", "EX", "TC", "true", "false"} | SHORTHAND_KEYWORDS


class _Parser:
    def __init__(self, tokens: List[Token], vocab: Optional[Vocabulary],
                 blocks: Optional[Dict[str, Formula]] = None):
        self.toks = tokens
        self.pos = 0
        self.vocab = vocab
        self.blocks = blocks or {}

    # -- token plumbing

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text:
            raise SpecError("expected %r, found %r" % (text, t.text or "end of input"),
                            t.line, t.col)
        return t

    def at(self, text: str) -> bool:
        return self.peek().text == text

    def eat(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def name(self, what="name") -> Token:
        t = self.next()
        if t.kind != "name":
            raise SpecError("expected %s, found %r" % (what, t.text or "end of input"),
                            t.line, t.col)
        return t

    # -- terms

    def term(self, tok: Optional[Token] = None) -> Term:
        t = tok or self.name("term")
        if self.vocab is not None and t.text in self.vocab.constants:
            return Const(t.text)
        return Var(t.text)

    # -- formulas

    def formula(self) -> Formula:
        t = self.peek()
        if t.kind == "name" and t.text in QUANTIFIERS:
            self.next()
            names = [self.name("variable").text]
            while self.eat(","):
                names.append(self.name("variable").text)
            self.expect(".")
            body = self.formula()
            for nm in reversed(names):
                body = QUANTIFIERS[t.text](nm, body)
            return body
        return self.arrows()

    def arrows(self) -> Formula:
        left = self.or_()
        if self.at("->"):
            self.next()
            return Implies(left, self.arrow_rhs())
        if self.at("<->"):
            self.next()
            return Iff(left, self.arrow_rhs())
        return left

    def arrow_rhs(self) -> Formula:
        # right operand may itself be a quantified formula or another arrow
        t = self.peek()
        if t.kind == "name" and t.text in QUANTIFIERS:
            return self.formula()
        return self.arrows()

    def or_(self) -> Formula:
        parts = [self.and_()]
        while self.at("|"):
            self.next()
            parts.append(self.and_())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def and_(self) -> Formula:
        parts = [self.unary()]
        while self.at("&"):
            self.next()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Formula:
        if self.eat("!"):
            return Not(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        t = self.next()
        if t.text == "(":
            f = self.formula()
            self.expect(")")
            return f
        if t.text == "$":
            ref = self.name("block name").text
            if ref not in self.blocks:
                raise SpecError("unknown block reference $%s" % ref, t.line, t.col)
            return self.blocks[ref]
        if t.kind != "name":
            raise SpecError("expected a formula, found %r" % (t.text or "end of input"),
                            t.line, t.col)
        if t.text == "true":
            return Top()
        if t.text == "false":
            return Bot()
        if t.text == "TC":
            self.expect("[")
            rel = self.name("relation").text
            self.expect("]")
            self.expect("(")
            a = self.term()
            self.expect(",")
            b = self.term()
            self.expect(")")
            self._check_rel(rel, 2, t)
            return TC(rel, a, b)
        if t.text in SHORTHAND_KEYWORDS:
            return self.shorthand(t)
        # predicate atom or equality
        if self.at("("):
            self.next()
            args = [self.term()]
            while self.eat(","):
                args.append(self.term())
            self.expect(")")
            self._check_rel(t.text, len(args), t)
            return Atom(t.text, tuple(args))
        left = self.term(t)
        if self.eat("="):
            return Equal(left, self.term())
        if self.eat("!="):
            return Not(Equal(left, self.term()))
        raise SpecError("dangling term %r (expected '=', '!=' or '(')" % t.text,
                        t.line, t.col)

    def shorthand(self, t: Token) -> Formula:
        self.expect("[")
        params = [self.name("relation").text]
        while self.eat(","):
            params.append(self.name("relation").text)
        self.expect("]")
        args: Tuple[Term, ...] = ()
        if t.text in ("reach", "reachback"):
            self.expect("(")
            args = (self.term(),)
            self.expect(")")
        sh = Shorthand(t.text, tuple(params), args)
        if self.vocab is not None:
            for p in params:
                if p not in self.vocab.relations:
                    raise SpecError("unknown relation %s in %s[...]" % (p, t.text),
                                    t.line, t.col)
        return sh

    def _check_rel(self, rel: str, arity: int, t: Token):
        if self.vocab is None:
            return
        have = self.vocab.relations.get(rel)
        if have is None:
            raise SpecError("undeclared symbol %s" % rel, t.line, t.col)
        if have != arity:
            raise SpecError("arity mismatch: %s declared /%d, used with %d argument(s)"
                            % (rel, have, arity), t.line, t.col)


def parse_formula(text: str, vocab: Optional[Vocabulary] = None) -> Formula:
    p = _Parser(tokenize(text), vocab)
    f = p.formula()
    tail = p.peek()
    if tail.kind != "eof":
        raise SpecError("trailing input %r" % tail.text, tail.line, tail.col)
    if vocab is not None:
        well_formed(f, vocab)
    return f


# ---------------------------------------------------------------------------
# printer

_PREC = {"arrow": 1, "or": 2, "and": 3, "not": 4, "atom": 5}


def print_formula(phi: Formula) -> str:
    def term(t: Term) -> str:
        return t.name

    def go(f: Formula, ctx: int) -> str:
        if isinstance(f, Top):
            return "true"
        if isinstance(f, Bot):
            return "false"
        if isinstance(f, Equal):
            return "%s = %s" % (term(f.left), term(f.right))
        if isinstance(f, Atom):
            return "%s(%s)" % (f.rel, ", ".join(term(a) for a in f.args))
        if isinstance(f, TC):
            return "TC[%s](%s, %s)" % (f.rel, term(f.left), term(f.right))
        if isinstance(f, Shorthand):
            base = "%s[%s]" % (f.kind, ", ".join(f.params))
            if f.args:
                base += "(%s)" % ", ".join(term(a) for a in f.args)
            return base
        if isinstance(f, Not):
            if isinstance(f.body, Equal):
                return "%s != %s" % (term(f.body.left), term(f.body.right))
            return wrap("!" + go(f.body, _PREC["not"]), _PREC["not"], ctx)
        if isinstance(f, And):
            s = " & ".join(go(p, _PREC["and"] + 1) for p in f.parts)
            return wrap(s, _PREC["and"], ctx)
        if isinstance(f, Or):
            s = " | ".join(go(p, _PREC["or"] + 1) for p in f.parts)
            return wrap(s, _PREC["or"], ctx)
        if isinstance(f, (Implies, Iff)):
            opr = "->" if isinstance(f, Implies) else "<->"
            s = "%s %s %s" % (go(f.left, _PREC["arrow"] + 1), opr, go(f.right, _PREC["arrow"]))
            return wrap(s, _PREC["arrow"], ctx)
        if isinstance(f, (Forall, Exists)):
            names = [f.var]
            body = f.body
            while isinstance(body, type(f)):
                names.append(body.var)
                body = body.body
            s = "%s %s. %s" % ("ALL" if isinstance(f, Forall) else "EX",
                               ",".join(names), go(body, 0))
            return wrap(s, 0, ctx)
        raise FormulaError("cannot print %r" % (f,))

    def wrap(s: str, prec: int, ctx: int) -> str:
        return "(" + s + ")" if prec < ctx else s

    return go(phi, 0)


# ---------------------------------------------------------------------------
# spec files


@dataclass
class SpecFile:
    vocab: Vocabulary
    blocks: Dict[str, Formula]
    colors: List[Color]
    axiom_entries: List[Tuple[str, List]]  # (scheme, params) as parsed
    goal_kind: str
    custom_goal: Optional[Formula] = None


@dataclass
class VerificationTask:
    """A parsed spec with its goal verification condition assembled.

    `hypotheses` and `conclusion` are the implication split used by the
    prover pipeline; all formulas here are shorthand-expanded and TC-free.
    `tc_relations` lists the relations that appeared under TC in the goal,
    in sorted order (the F set of the instantiation loop).
    """

    name: str
    vocab: Vocabulary
    blocks: Dict[str, Formula]
    goal_kind: str
    hypotheses: List[Formula]
    conclusion: Formula
    tc_relations: List[str]
    user_colors: List[Color]
    explicit_axioms: List[AxiomInstance]

    @property
    def goal(self) -> Formula:
        if not self.hypotheses:
            return self.conclusion
        return Implies(conj(self.hypotheses), self.conclusion)


BLOCK_NAMES = ("pre", "post", "invariant", "loop_cond", "transformer")
GOAL_REQUIRES = {
    "init": ("pre", "transformer", "invariant"),
    "maintain": ("loop_cond", "invariant", "transformer"),
    "exit": ("loop_cond", "invariant", "post"),
    "custom": (),
}


def parse_spec(text: str, name: str = "spec") -> VerificationTask:
    toks = tokenize(text)
    p = _Parser(toks, None)
    vocab = Vocabulary()
    blocks: Dict[str, Formula] = {}
    raw_blocks: Dict[str, List[Token]] = {}
    colors: List[Color] = []
    axiom_entries: List[Tuple[str, List]] = []
    goal_kind: Optional[str] = None
    custom_goal: Optional[Formula] = None

    def block_tokens() -> List[Token]:
        # capture the token span of a braced block for later (vocab-aware) parsing
        open_tok = p.expect("{")
        depth = 1
        out: List[Token] = []
        while depth:
            t = p.next()
            if t.kind == "eof":
                raise SpecError("unterminated block", open_tok.line, open_tok.col)
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                depth -= 1
                if depth == 0:
                    break
            out.append(t)
        out.append(Token("eof", "", t.line, t.col))
        return out

    saw_vocab = False
    while p.peek().kind != "eof":
        head = p.name("block keyword")
        if head.text == "vocab":
            saw_vocab = True
            p.expect("{")
            while not p.eat("}"):
                nm = p.name("declaration").text
                p.expect("/")
                ar_tok = p.next()
                if ar_tok.kind != "int":
                    raise SpecError("expected arity", ar_tok.line, ar_tok.col)
                arity = int(ar_tok.text)
                if arity == 0:
                    vocab.constants.append(nm)
                else:
                    vocab.declare(nm, arity)
                nxt = p.peek()
                if nxt.kind == "name" and nxt.text in ("var", "field", "after"):
                    p.next()
                    if nxt.text == "var":
                        vocab.program_vars.add(nm)
                    elif nxt.text == "field":
                        vocab.fields.add(nm)
                    else:
                        before = p.name("before-relation").text
                        vocab.after[before] = nm
            vocab.validate()
        elif head.text in BLOCK_NAMES:
            raw_blocks[head.text] = block_tokens()
        elif head.text in ("colors", "axioms"):
            raw_blocks[head.text] = block_tokens()
        elif head.text == "goal":
            kind = p.name("goal kind").text
            if kind not in GOAL_REQUIRES:
                raise SpecError("unknown goal kind %r" % kind)
            goal_kind = kind
            if kind == "custom":
                raw_blocks["__custom__"] = block_tokens()
        else:
            raise SpecError("unknown block %r" % head.text, head.line, head.col)

    if not saw_vocab:
        raise SpecError("missing vocab block")
    if goal_kind is None:
        raise SpecError("missing goal selector")

    for bname in BLOCK_NAMES:
        if bname in raw_blocks:
            bp = _Parser(raw_blocks[bname], vocab)
            f = bp.formula()
            if bp.peek().kind != "eof":
                t = bp.peek()
                raise SpecError("trailing input in %s block: %r" % (bname, t.text),
                                t.line, t.col)
            well_formed(f, vocab)
            blocks[bname] = f

    if "colors" in raw_blocks:
        cp = _Parser(raw_blocks["colors"], vocab)
        while cp.peek().kind != "eof":
            cname = cp.name("color name").text
            cp.expect("(")
            cvar = cp.name("color variable").text
            cp.expect(")")
            cp.expect("=")
            body = cp.formula()
            cp.expect(";")
            well_formed(body, vocab)
            fv = free_vars(body)
            if fv - {cvar}:
                raise SpecError("color %s mentions variables %s besides %s"
                                % (cname, sorted(fv - {cvar}), cvar))
            colors.append(Color(cname, cvar, _stc_level(body, vocab), "user"))

    if "axioms" in raw_blocks:
        ap = _Parser(raw_blocks["axioms"], vocab)
        while ap.peek().kind != "eof":
            scheme_tok = ap.name("scheme name")
            scheme = scheme_tok.text
            if scheme not in ALIASES:
                raise SpecError("unknown axiom scheme %r" % scheme,
                                scheme_tok.line, scheme_tok.col)
            ap.expect("[")
            params: List = []
            while True:
                params.append(_axiom_param(ap, vocab, colors))
                if not ap.eat(","):
                    break
            ap.expect("]")
            ap.eat(";")
            axiom_entries.append((scheme, params))

    # goal assembly
    missing = [b for b in GOAL_REQUIRES[goal_kind] if b not in blocks]
    if missing:
        raise SpecError("goal %r needs block(s): %s" % (goal_kind, ", ".join(missing)))
    if goal_kind == "custom":
        cp = _Parser(raw_blocks["__custom__"], vocab, blocks)
        custom_goal = cp.formula()
        well_formed(custom_goal, vocab)

    _check_transformer_primes(blocks.get("transformer"), vocab)

    hypotheses, conclusion = _assemble_goal(goal_kind, blocks, vocab, custom_goal)

    # determine the closure relations of the goal before eliminating TC
    goal_with_tc = conj([*hypotheses, Not(conclusion)])
    tc_rels = sorted(
        {s.rel for s in subformulas(expand_shorthands(goal_with_tc)) if isinstance(s, TC)}
    )

    work = vocab.copy()
    hyp_elim = [eliminate_tc(expand_shorthands(h), work) for h in hypotheses]
    concl_elim = eliminate_tc(expand_shorthands(conclusion), work)

    # instantiate the explicit axiom list against the working vocabulary
    instances: List[AxiomInstance] = []
    for scheme, params in axiom_entries:
        resolved = [
            _color_to_stc(prm, work) if isinstance(prm, Color) else prm for prm in params
        ]
        instances.append(instantiate(scheme, resolved, work))

    stc_colors = [Color(c.name, c.var, _stc_level(c.formula, work), c.provenance)
                  for c in colors]

    return VerificationTask(
        name=name,
        vocab=work,
        blocks=blocks,
        goal_kind=goal_kind,
        hypotheses=hyp_elim,
        conclusion=concl_elim,
        tc_relations=tc_rels,
        user_colors=stc_colors,
        explicit_axioms=instances,
    )


def _stc_level(f: Formula, vocab: Vocabulary) -> Formula:
    return eliminate_tc(expand_shorthands(f), vocab)


def _color_to_stc(c: Color, vocab: Vocabulary) -> Color:
    return Color(c.name, c.var, _stc_level(c.formula, vocab), c.provenance)


def _axiom_param(p: _Parser, vocab: Vocabulary, colors: List[Color]):
    """A scheme argument: either a bare relation name or a color expression."""
    t = p.peek()
    named = {c.name: c for c in colors}
    if t.kind == "name" and vocab.relations.get(t.text) == 2 and t.text not in named \
            and not _looks_like_colorexpr(p):
        p.next()
        return t.text
    return _color_expr(p, vocab, named)


def _looks_like_colorexpr(p: _Parser) -> bool:
    nxt = p.toks[p.pos + 1].text
    return nxt == "&"


def _color_expr(p: _Parser, vocab: Vocabulary, named: Dict[str, Color]) -> Color:
    terms: List[Tuple[bool, Color]] = []
    while True:
        neg = p.eat("!")
        terms.append((neg, _color_prim(p, vocab, named)))
        if not p.eat("&"):
            break
    if len(terms) == 1 and not terms[0][0]:
        return terms[0][1]
    parts = []
    names = []
    for neg, c in terms:
        body = substitute(c.formula, {c.var: Var("v")})
        parts.append(Not(body) if neg else body)
        names.append(("!" if neg else "") + c.name)
    return Color("&".join(names), "v", conj(parts), "boolean-combination")


def _color_prim(p: _Parser, vocab: Vocabulary, named: Dict[str, Color]) -> Color:
    t = p.next()
    if t.text == "(":
        c = _color_expr(p, vocab, named)
        p.expect(")")
        return c
    if t.text == "true":
        return TRUE_COLOR
    if t.text in ("reach", "reachback"):
        p.expect("[")
        x = p.name("predicate").text
        p.expect(",")
        f = p.name("relation").text
        p.expect("]")
        sh = Shorthand(t.text, (x, f), (Var("v"),))
        if x not in vocab.relations or vocab.relations.get(f) != 2:
            raise SpecError("bad reach parameters [%s, %s]" % (x, f), t.line, t.col)
        prefix = "r" if t.text == "reach" else "rb"
        return Color("%s[%s,%s]" % (prefix, x, f), "v", _stc_level(sh, vocab),
                     "reach_fwd" if t.text == "reach" else "reach_bwd")
    if t.kind == "name":
        if t.text in named:
            return named[t.text]
        if vocab.relations.get(t.text) == 1:
            return Color(t.text, "v", Atom(t.text, (Var("v"),)), "program-variable")
    raise SpecError("expected a color, found %r" % t.text, t.line, t.col)


def _check_transformer_primes(tr: Optional[Formula], vocab: Vocabulary):
    if tr is None:
        return
    after_names = set(vocab.after.values())
    for rel in relations_in(expand_shorthands(tr)):
        if rel.endswith("'") and rel not in after_names:
            raise SpecError(
                "primed relation %s used in transformer but not declared 'after'" % rel)


def rename_relations(phi: Formula, mapping: Dict[str, str]) -> Formula:
    """Syntactic relation renaming (used to build the primed invariant)."""
    if isinstance(phi, Atom):
        return Atom(mapping.get(phi.rel, phi.rel), phi.args)
    if isinstance(phi, TC):
        return TC(mapping.get(phi.rel, phi.rel), phi.left, phi.right)
    if isinstance(phi, Shorthand):
        return Shorthand(phi.kind, tuple(mapping.get(x, x) for x in phi.params), phi.args)
    if isinstance(phi, Not):
        return Not(rename_relations(phi.body, mapping))
    if isinstance(phi, And):
        return And(tuple(rename_relations(x, mapping) for x in phi.parts))
    if isinstance(phi, Or):
        return Or(tuple(rename_relations(x, mapping) for x in phi.parts))
    if isinstance(phi, Implies):
        return Implies(rename_relations(phi.left, mapping), rename_relations(phi.right, mapping))
    if isinstance(phi, Iff):
        return Iff(rename_relations(phi.left, mapping), rename_relations(phi.right, mapping))
    if isinstance(phi, (Forall, Exists)):
        return type(phi)(phi.var, rename_relations(phi.body, mapping))
    return phi


def _assemble_goal(kind: str, blocks: Dict[str, Formula], vocab: Vocabulary,
                   custom: Optional[Formula]) -> Tuple[List[Formula], Formula]:
    if kind == "custom":
        assert custom is not None
        if isinstance(custom, Implies):
            left = custom.left
            hyps = list(left.parts) if isinstance(left, And) else [left]
            return hyps, custom.right
        return [], custom
    if kind == "maintain":
        primed = rename_relations(blocks["invariant"], vocab.after)
        return [blocks["loop_cond"], blocks["invariant"], blocks["transformer"]], primed
    if kind == "init":
        primed = rename_relations(blocks["invariant"], vocab.after)
        return [blocks["pre"], blocks["transformer"]], primed
    if kind == "exit":
        return [Not(blocks["loop_cond"]), blocks["invariant"]], blocks["post"]
    raise SpecError("unknown goal kind %r" % kind)
