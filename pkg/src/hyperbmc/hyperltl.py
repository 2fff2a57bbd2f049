"""HyperLTL formulas: AST, ``.hq`` parser, NNF, negation and typechecking.

Concrete syntax::

    formula := (("forall" | "exists") tid ".")+ body
    body    := G F X ! (prefix), U R (right assoc), /\, \/, -> (right), <->
    atom    := vid "[" tid "]" | "*" term ("=" | "!=") term "*"
             | TRUE | FALSE | "(" body ")"
    term    := vid "[" tid "]" | int

Operators are listed from tightest to loosest. ``//`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .model import SymbolicKripke


class FormulaError(Exception):
    """Syntax or typing problem in a formula, located by line and column."""

    def __init__(self, message: str, line: int = 0, col: int = 0, origin: str = "<formula>", kind: str = "error"):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.origin = origin
        self.kind = kind

    def __str__(self):
        if self.line:
            return f"{self.origin}:{self.line}:{self.col}: {self.message}"
        return f"{self.origin}: {self.message}"


class ArityError(FormulaError):
    """The number of models does not match the number of quantified traces."""


_NOPOS = field(default=(0, 0), compare=False, repr=False)


class LtlExpr:
    __slots__ = ()


@dataclass(frozen=True)
class LTrue(LtlExpr):
    pos: tuple = _NOPOS


@dataclass(frozen=True)
class LFalse(LtlExpr):
    pos: tuple = _NOPOS


@dataclass(frozen=True)
class Prop(LtlExpr):
    var: str
    tid: str
    pos: tuple = _NOPOS


@dataclass(frozen=True)
class VarRef:
    var: str
    tid: str
    pos: tuple = _NOPOS


@dataclass(frozen=True)
class IntLit:
    value: int
    pos: tuple = _NOPOS


@dataclass(frozen=True)
class ArithCmp(LtlExpr):
    op: str  # "=" or "!="
    lhs: VarRef | IntLit
    rhs: VarRef | IntLit
    pos: tuple = _NOPOS


@dataclass(frozen=True)
class LNot(LtlExpr):
    arg: LtlExpr
    pos: tuple = _NOPOS


@dataclass(frozen=True)
class Next(LtlExpr):
    arg: LtlExpr
    pos: tuple = _NOPOS


@dataclass(frozen=True)
class Globally(LtlExpr):
    arg: LtlExpr
    pos: tuple = _NOPOS


@dataclass(frozen=True)
class Finally(LtlExpr):
    arg: LtlExpr
    pos: tuple = _NOPOS


@dataclass(frozen=True)
class LAnd(LtlExpr):
    lhs: LtlExpr
    rhs: LtlExpr
    pos: tuple = _NOPOS


@dataclass(frozen=True)
class LOr(LtlExpr):
    lhs: LtlExpr
    rhs: LtlExpr
    pos: tuple = _NOPOS


@dataclass(frozen=True)
class LImplies(LtlExpr):
    lhs: LtlExpr
    rhs: LtlExpr
    pos: tuple = _NOPOS


@dataclass(frozen=True)
class LIff(LtlExpr):
    lhs: LtlExpr
    rhs: LtlExpr
    pos: tuple = _NOPOS


@dataclass(frozen=True)
class Until(LtlExpr):
    lhs: LtlExpr
    rhs: LtlExpr
    pos: tuple = _NOPOS


@dataclass(frozen=True)
class Release(LtlExpr):
    lhs: LtlExpr
    rhs: LtlExpr
    pos: tuple = _NOPOS


UNARY = (LNot, Next, Globally, Finally)
BINARY = (LAnd, LOr, LImplies, LIff, Until, Release)

EXISTS, FORALL = "exists", "forall"


@dataclass(frozen=True)
class Quantifier:
    kind: str  # EXISTS | FORALL
    tid: str
    pos: tuple = _NOPOS

    def flipped(self) -> "Quantifier":
        return Quantifier(FORALL if self.kind == EXISTS else EXISTS, self.tid, self.pos)


@dataclass(frozen=True)
class HyperFormula:
    prefix: tuple[Quantifier, ...]
    body: LtlExpr

    @property
    def tids(self) -> list[str]:
        return [q.tid for q in self.prefix]

    def __str__(self):
        quants = " ".join(f"{q.kind} {q.tid}." for q in self.prefix)
        return f"{quants} {format_body(self.body)}"


# --------------------------------------------------------------------------
# helpers


def children(e) -> tuple:
    if isinstance(e, UNARY):
        return (e.arg,)
    if isinstance(e, BINARY):
        return (e.lhs, e.rhs)
    return ()


def subformulas(e):
    """Pre-order walk over the body."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def body_tids(e) -> set[str]:
    out = set()
    for node in subformulas(e):
        if isinstance(node, Prop):
            out.add(node.tid)
        elif isinstance(node, ArithCmp):
            out.update(t.tid for t in (node.lhs, node.rhs) if isinstance(t, VarRef))
    return out


def size(e) -> int:
    return sum(1 for _ in subformulas(e))


def is_nnf(e) -> bool:
    for node in subformulas(e):
        if isinstance(node, (LImplies, LIff, Globally, Finally)):
            return False
        if isinstance(node, LNot) and not isinstance(node.arg, Prop):
            return False
    return True


def _term_str(t) -> str:
    return str(t.value) if isinstance(t, IntLit) else f"{t.var}[{t.tid}]"


_BIN_SYM = {LAnd: "/\\", LOr: "\\/", LImplies: "->", LIff: "<->", Until: "U", Release: "R"}
_UN_SYM = {LNot: "!", Next: "X", Globally: "G", Finally: "F"}


def format_body(e) -> str:
    """Fully parenthesized concrete syntax accepted by ``parse_formula``."""
    if isinstance(e, LTrue):
        return "TRUE"
    if isinstance(e, LFalse):
        return "FALSE"
    if isinstance(e, Prop):
        return f"{e.var}[{e.tid}]"
    if isinstance(e, ArithCmp):
        return f"*{_term_str(e.lhs)} {e.op} {_term_str(e.rhs)}*"
    if isinstance(e, UNARY):
        return f"{_UN_SYM[type(e)]}({format_body(e.arg)})"
    return f"({format_body(e.lhs)} {_BIN_SYM[type(e)]} {format_body(e.rhs)})"


# --------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><->|->|/\\|\\/|!=|[!=*()\[\].])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int

    @property
    def pos(self):
        return (self.line, self.col)


def _lex(text: str, origin: str) -> list[_Tok]:
    toks = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise FormulaError(f"unexpected character {text[i]!r}", line, i - line_start + 1, origin, "syntax")
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, i - line_start + 1))
        i = m.end()
    toks.append(_Tok("eof", "", line, i - line_start + 1))
    return toks


_CONSTS = {"TRUE": True, "true": True, "FALSE": False, "false": False}


class _Parser:
    def __init__(self, text: str, origin: str):
        self.origin = origin
        self.toks = _lex(text, origin)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, n: int = 1) -> _Tok:
        return self.toks[min(self.i + n, len(self.toks) - 1)]

    def error(self, msg: str, tok: _Tok | None = None) -> FormulaError:
        tok = tok or self.tok
        return FormulaError(msg, tok.line, tok.col, self.origin, "syntax")

    def advance(self) -> _Tok:
        tok = self.tok
        self.i += 1
        return tok

    def at_op(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def at_keyword(self, word: str) -> bool:
        # G, F, X, U, R double as operators unless used as a variable `v[...]`
        return self.tok.kind == "ident" and self.tok.text == word and not (
            self.peek().kind == "op" and self.peek().text == "["
        )

    def expect_op(self, text: str) -> _Tok:
        if not self.at_op(text):
            raise self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def ident(self, what: str = "identifier") -> _Tok:
        if self.tok.kind != "ident":
            raise self.error(f"expected {what}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def formula(self) -> HyperFormula:
        prefix: list[Quantifier] = []
        while self.tok.kind == "ident" and self.tok.text in (EXISTS, FORALL):
            q = self.advance()
            tid = self.ident("trace variable")
            if any(p.tid == tid.text for p in prefix):
                raise self.error(f"trace variable {tid.text} quantified twice", tid)
            self.expect_op(".")
            prefix.append(Quantifier(q.text, tid.text, q.pos))
        if not prefix:
            raise self.error("formula must start with a quantifier (exists/forall)")
        body = self.iff()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r} after formula")
        bound = {q.tid for q in prefix}
        for node in subformulas(body):
            refs = [node] if isinstance(node, Prop) else (
                [t for t in (node.lhs, node.rhs) if isinstance(t, VarRef)] if isinstance(node, ArithCmp) else []
            )
            for r in refs:
                if r.tid not in bound:
                    raise FormulaError(f"trace variable {r.tid} is not quantified", *r.pos, self.origin, "scope")
        return HyperFormula(tuple(prefix), body)

    def iff(self):
        lhs = self.implies()
        while self.at_op("<->"):
            op = self.advance()
            lhs = LIff(lhs, self.implies(), op.pos)
        return lhs

    def implies(self):
        lhs = self.disj()
        if self.at_op("->"):
            op = self.advance()
            return LImplies(lhs, self.implies(), op.pos)
        return lhs

    def disj(self):
        lhs = self.conj()
        while self.at_op("\\/"):
            op = self.advance()
            lhs = LOr(lhs, self.conj(), op.pos)
        return lhs

    def conj(self):
        lhs = self.binary_temporal()
        while self.at_op("/\\"):
            op = self.advance()
            lhs = LAnd(lhs, self.binary_temporal(), op.pos)
        return lhs

    def binary_temporal(self):
        lhs = self.unary()
        for word, ctor in (("U", Until), ("R", Release)):
            if self.at_keyword(word):
                op = self.advance()
                return ctor(lhs, self.binary_temporal(), op.pos)
        return lhs

    def unary(self):
        tok = self.tok
        if self.at_op("!"):
            self.advance()
            return LNot(self.unary(), tok.pos)
        for word, ctor in (("G", Globally), ("F", Finally), ("X", Next)):
            if self.at_keyword(word):
                self.advance()
                return ctor(self.unary(), tok.pos)
        return self.atom()

    def atom(self):
        tok = self.tok
        if self.at_op("("):
            self.advance()
            e = self.iff()
            self.expect_op(")")
            return e
        if self.at_op("*"):
            self.advance()
            lhs = self.term()
            if not (self.at_op("=") or self.at_op("!=")):
                raise self.error("expected '=' or '!=' in arithmetic comparison")
            op = self.advance().text
            rhs = self.term()
            self.expect_op("*")
            return ArithCmp(op, lhs, rhs, tok.pos)
        if tok.kind == "ident" and tok.text in _CONSTS and not (self.peek().kind == "op" and self.peek().text == "["):
            self.advance()
            return LTrue(tok.pos) if _CONSTS[tok.text] else LFalse(tok.pos)
        if tok.kind == "ident":
            ref = self.var_ref()
            return Prop(ref.var, ref.tid, ref.pos)
        raise self.error(f"unexpected {tok.text or 'end of input'!r}")

    def var_ref(self) -> VarRef:
        name = self.ident("variable")
        self.expect_op("[")
        tid = self.ident("trace variable")
        self.expect_op("]")
        return VarRef(name.text, tid.text, name.pos)

    def term(self):
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return IntLit(int(tok.text), tok.pos)
        return self.var_ref()


def parse_formula(text: str, origin: str = "<formula>") -> HyperFormula:
    return _Parser(text, origin).formula()


def load_formula(path) -> HyperFormula:
    path = Path(path)
    return parse_formula(path.read_text(encoding="utf-8"), str(path))


# --------------------------------------------------------------------------
# normal forms


def nnf(e: LtlExpr, negated: bool = False) -> LtlExpr:
    """Negation normal form of ``e`` (of ``!e`` when ``negated``).

    Implications, biconditionals, G and F are eliminated; negation is left
    only directly above propositions, and ``!=``/``=`` absorb it.
    """
    if isinstance(e, LTrue):
        return LFalse(e.pos) if negated else e
    if isinstance(e, LFalse):
        return LTrue(e.pos) if negated else e
    if isinstance(e, Prop):
        return LNot(e, e.pos) if negated else e
    if isinstance(e, ArithCmp):
        if not negated:
            return e
        return ArithCmp("!=" if e.op == "=" else "=", e.lhs, e.rhs, e.pos)
    if isinstance(e, LNot):
        return nnf(e.arg, not negated)
    if isinstance(e, Next):
        return Next(nnf(e.arg, negated), e.pos)
    if isinstance(e, Globally):  # false R a
        if negated:
            return Until(LTrue(e.pos), nnf(e.arg, True), e.pos)
        return Release(LFalse(e.pos), nnf(e.arg), e.pos)
    if isinstance(e, Finally):  # true U a
        if negated:
            return Release(LFalse(e.pos), nnf(e.arg, True), e.pos)
        return Until(LTrue(e.pos), nnf(e.arg), e.pos)
    if isinstance(e, (LAnd, LOr)):
        conj = isinstance(e, LAnd) != negated
        return (LAnd if conj else LOr)(nnf(e.lhs, negated), nnf(e.rhs, negated), e.pos)
    if isinstance(e, (Until, Release)):
        until = isinstance(e, Until) != negated
        return (Until if until else Release)(nnf(e.lhs, negated), nnf(e.rhs, negated), e.pos)
    if isinstance(e, LImplies):
        if negated:
            return LAnd(nnf(e.lhs), nnf(e.rhs, True), e.pos)
        return LOr(nnf(e.lhs, True), nnf(e.rhs), e.pos)
    if isinstance(e, LIff):
        a, b = nnf(e.lhs), nnf(e.rhs)
        na, nb = nnf(e.lhs, True), nnf(e.rhs, True)
        if negated:
            return LAnd(LOr(na, nb, e.pos), LOr(a, b, e.pos), e.pos)
        return LOr(LAnd(a, b, e.pos), LAnd(na, nb, e.pos), e.pos)
    raise TypeError(f"not an LTL expression: {e!r}")


def to_nnf(f: HyperFormula) -> HyperFormula:
    return HyperFormula(f.prefix, nnf(f.body))


def negate(f: HyperFormula) -> HyperFormula:
    """Flip every quantifier and negate the body; the result is in NNF."""
    return HyperFormula(tuple(q.flipped() for q in f.prefix), nnf(f.body, True))


# --------------------------------------------------------------------------
# typechecking


def bind_models(f: HyperFormula, models: Sequence[SymbolicKripke] | Mapping[str, SymbolicKripke]) -> dict:
    """Positional (or by-name) binding of models to the quantified traces."""
    if isinstance(models, Mapping):
        missing = [t for t in f.tids if t not in models]
        if missing:
            raise ArityError(f"no model bound to trace variable(s) {', '.join(missing)}", kind="arity")
        return {t: models[t] for t in f.tids}
    models = list(models)
    if len(models) != len(f.prefix):
        raise ArityError(
            f"{len(models)} model(s) given for a formula with {len(f.prefix)} quantified trace(s); "
            "pass one model per quantifier, in prefix order",
            kind="arity",
        )
    return dict(zip(f.tids, models))


def typecheck(f: HyperFormula, models, origin: str = "<formula>") -> dict:
    """Check ``f`` against its models and return the tid-to-model binding.

    Raises ``FormulaError`` for undefined variables, operator/operand kind
    mismatches and integer literals outside the compared variable's range.
    """
    binding = bind_models(f, models)

    def lookup(var, tid, pos):
        model = binding[tid]
        if not model.has_var(var):
            raise FormulaError(f"variable {var} is not defined in the model bound to {tid}", *pos, origin, "undefined")
        return model.decl(var)

    for node in subformulas(f.body):
        if isinstance(node, Prop):
            decl = lookup(node.var, node.tid, node.pos)
            if not decl.boolean:
                raise FormulaError(
                    f"{node.var}[{node.tid}] is an integer; boolean operators need boolean operands",
                    *node.pos, origin, "type",
                )
        elif isinstance(node, ArithCmp):
            decls = []
            for t in (node.lhs, node.rhs):
                if isinstance(t, VarRef):
                    decl = lookup(t.var, t.tid, t.pos)
                    if decl.boolean:
                        raise FormulaError(
                            f"{t.var}[{t.tid}] is boolean; arithmetic comparison needs integer operands",
                            *t.pos, origin, "type",
                        )
                    decls.append(decl)
            for t in (node.lhs, node.rhs):
                if isinstance(t, IntLit):
                    for decl in decls:
                        if not decl.lo <= t.value <= decl.hi:
                            raise FormulaError(
                                f"value out of bound: {t.value} not in {decl.lo}..{decl.hi} of {decl.name}",
                                *t.pos, origin, "bound",
                            )
    return binding
