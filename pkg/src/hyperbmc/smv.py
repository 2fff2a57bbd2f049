"""Parser and compiler for a small SMV subset.

Grammar (``MODULE main`` only)::

    model   := "MODULE" "main" section+
    section := "VAR" (ident ":" type ";")+ | "ASSIGN" assign+
             | "INIT" expr ";" | "TRANS" expr ";"
    type    := "boolean" | int ".." int
    assign  := ("init" | "next") "(" ident ")" ":=" rhs ";"
    rhs     := expr | "{" literal ("," literal)* "}"
             | "case" (expr ":" rhs ";")+ "esac"

Expressions use ``! & | -> <-> = != < <= > >= + -`` with the usual binding
(comparisons bind tighter than boolean connectives, ``->``/``<->`` loosest)
plus ``next(x)`` inside TRANS. ``--`` starts a comment; ``-- @halt: x``
names the halting variable (a variable called ``halt`` is picked up
automatically).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .bitvec import Int, int_eq, int_le, int_lt
from .boolexpr import FALSE, TRUE, And, BoolExpr, Iff, Implies, Not, Or, Var, conj, disj
from .model import ModelError, SymbolicKripke, VarDecl, bit_blast, with_domain_constraints


class SmvError(Exception):
    def __init__(self, message: str, origin: str = "<string>", line: int = 0, col: int = 0):
        super().__init__(message)
        self.message = message
        self.origin = origin
        self.line = line
        self.col = col

    def __str__(self):
        return f"{self.origin}:{self.line}:{self.col}: {self.message}"


@dataclass(frozen=True)
class SmvModelSource:
    text: str
    origin: str = "<string>"

    @classmethod
    def from_path(cls, path) -> "SmvModelSource":
        path = Path(path)
        return cls(path.read_text(encoding="utf-8"), str(path))


# --------------------------------------------------------------------------
# AST

Pos = tuple  # (line, col)


@dataclass(frozen=True)
class Name:
    name: str
    next: bool = False
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Unary:
    op: str
    arg: object
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: object
    rhs: object
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SetRhs:
    items: tuple
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class CaseRhs:
    branches: tuple  # ((guard, rhs), ...)
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class VarSpec:
    name: str
    lo: int | None = None  # None for boolean
    hi: int | None = None
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Assign:
    kind: str  # "init" | "next"
    target: str
    rhs: object
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SmvModule:
    vars: tuple[VarSpec, ...]
    assigns: tuple[Assign, ...]
    inits: tuple = ()
    transes: tuple = ()
    halt_pragma: str | None = None
    origin: str = field(default="<string>", compare=False)


# --------------------------------------------------------------------------
# lexer

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_$#.]*)
  | (?P<op>:=|\.\.|<->|->|!=|<=|>=|[=<>!&|+\-(){},;:])
    """,
    re.VERBOSE,
)
_HALT_PRAGMA = re.compile(r"--\s*@halt\s*:\s*([A-Za-z_][A-Za-z0-9_]*)")
_KEYWORDS = {"MODULE", "VAR", "ASSIGN", "INIT", "TRANS", "boolean", "case", "esac", "TRUE", "FALSE"}


@dataclass
class _Tok:
    kind: str  # int | ident | kw | op | eof
    text: str
    line: int
    col: int


def _lex(text: str, origin: str):
    toks, pragma = [], None
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise SmvError(f"unexpected character {text[i]!r}", origin, line, i - line_start + 1)
        kind = m.lastgroup
        col = i - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "comment":
            p = _HALT_PRAGMA.match(m.group())
            if p:
                pragma = p.group(1)
        elif kind != "ws":
            tok_text = m.group()
            if kind == "ident" and tok_text in _KEYWORDS:
                kind = "kw"
            toks.append(_Tok(kind, tok_text, line, col))
        i = m.end()
    toks.append(_Tok("eof", "", line, i - line_start + 1))
    return toks, pragma


# --------------------------------------------------------------------------
# parser

_SECTION_KW = {"VAR", "ASSIGN", "INIT", "TRANS"}
_CMP_OPS = {"=", "!=", "<", "<=", ">", ">="}


class _Parser:
    def __init__(self, text: str, origin: str):
        self.origin = origin
        self.toks, self.pragma = _lex(text, origin)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        return SmvError(msg, self.origin, tok.line, tok.col)

    def advance(self) -> _Tok:
        tok = self.tok
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("kw", "op", "ident")

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def ident(self) -> _Tok:
        if self.tok.kind != "ident":
            raise self.error(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def integer(self) -> int:
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        if self.tok.kind != "int":
            raise self.error(f"expected integer, found {self.tok.text or 'end of input'!r}")
        v = int(self.advance().text)
        return -v if neg else v

    def module(self) -> SmvModule:
        self.expect("MODULE")
        name = self.ident()
        if name.text != "main":
            raise self.error("only MODULE main is supported", name)
        vars_, assigns, inits, transes = [], [], [], []
        if self.tok.text not in _SECTION_KW:
            raise self.error("expected a VAR, ASSIGN, INIT or TRANS section")
        while self.tok.kind != "eof":
            kw = self.tok
            if kw.text == "VAR":
                self.advance()
                vars_.append(self.var_spec())
                while self.tok.kind == "ident":
                    vars_.append(self.var_spec())
            elif kw.text == "ASSIGN":
                self.advance()
                assigns.append(self.assign())
                while self.tok.text in ("init", "next") and self.tok.kind == "ident":
                    assigns.append(self.assign())
            elif kw.text in ("INIT", "TRANS"):
                self.advance()
                e = self.expr()
                if self.at(";"):
                    self.advance()
                (inits if kw.text == "INIT" else transes).append(e)
            else:
                raise self.error(f"unexpected {kw.text!r}; expected a section keyword")
        return SmvModule(tuple(vars_), tuple(assigns), tuple(inits), tuple(transes), self.pragma, self.origin)

    def var_spec(self) -> VarSpec:
        name = self.ident()
        self.expect(":")
        if self.at("boolean"):
            self.advance()
            item = VarSpec(name.text, pos=(name.line, name.col))
        elif self.at("{"):
            raise self.error("enumerated types are not supported; use a range or booleans")
        else:
            lo = self.integer()
            self.expect("..")
            hi = self.integer()
            item = VarSpec(name.text, lo, hi, pos=(name.line, name.col))
        self.expect(";")
        return item

    def assign(self) -> Assign:
        kind = self.ident()
        if kind.text not in ("init", "next"):
            raise self.error("expected init(...) or next(...)", kind)
        self.expect("(")
        target = self.ident()
        self.expect(")")
        self.expect(":=")
        rhs = self.rhs()
        self.expect(";")
        return Assign(kind.text, target.text, rhs, pos=(kind.line, kind.col))

    def rhs(self):
        tok = self.tok
        if self.at("{"):
            self.advance()
            items = [self.literal()]
            while self.at(","):
                self.advance()
                items.append(self.literal())
            self.expect("}")
            return SetRhs(tuple(items), pos=(tok.line, tok.col))
        if self.at("case"):
            self.advance()
            branches = []
            while not self.at("esac"):
                if self.tok.kind == "eof":
                    raise self.error("unterminated case: expected 'esac'")
                guard = self.expr()
                self.expect(":")
                branch = self.rhs()
                self.expect(";")
                branches.append((guard, branch))
            if not branches:
                raise self.error("empty case expression")
            self.expect("esac")
            return CaseRhs(tuple(branches), pos=(tok.line, tok.col))
        return self.expr()

    def literal(self):
        tok = self.tok
        if self.at("TRUE") or self.at("FALSE"):
            self.advance()
            return BoolLit(tok.text == "TRUE", pos=(tok.line, tok.col))
        return IntLit(self.integer(), pos=(tok.line, tok.col))

    # precedence climbing: (-> <->) < | < & < comparison < (+ -) < unary
    def expr(self):
        lhs = self.disjunction()
        if self.at("->") or self.at("<->"):
            op = self.advance()
            rhs = self.expr()
            return Binary(op.text, lhs, rhs, pos=(op.line, op.col))
        return lhs

    def disjunction(self):
        lhs = self.conjunction()
        while self.at("|"):
            op = self.advance()
            lhs = Binary("|", lhs, self.conjunction(), pos=(op.line, op.col))
        return lhs

    def conjunction(self):
        lhs = self.comparison()
        while self.at("&"):
            op = self.advance()
            lhs = Binary("&", lhs, self.comparison(), pos=(op.line, op.col))
        return lhs

    def comparison(self):
        lhs = self.additive()
        if self.tok.kind == "op" and self.tok.text in _CMP_OPS:
            op = self.advance()
            return Binary(op.text, lhs, self.additive(), pos=(op.line, op.col))
        return lhs

    def additive(self):
        lhs = self.unary()
        while self.at("+") or self.at("-"):
            op = self.advance()
            lhs = Binary(op.text, lhs, self.unary(), pos=(op.line, op.col))
        return lhs

    def unary(self):
        tok = self.tok
        if self.at("!") or self.at("-"):
            self.advance()
            return Unary(tok.text, self.unary(), pos=(tok.line, tok.col))
        return self.primary()

    def primary(self):
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return IntLit(int(tok.text), pos=(tok.line, tok.col))
        if self.at("TRUE") or self.at("FALSE"):
            self.advance()
            return BoolLit(tok.text == "TRUE", pos=(tok.line, tok.col))
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "ident":
            self.advance()
            if tok.text == "next" and self.at("("):
                self.advance()
                name = self.ident()
                self.expect(")")
                return Name(name.text, True, pos=(name.line, name.col))
            return Name(tok.text, pos=(tok.line, tok.col))
        raise self.error(f"unexpected {tok.text or 'end of input'!r} in expression")


def parse_module(src: SmvModelSource | str, origin: str = "<string>") -> SmvModule:
    if isinstance(src, SmvModelSource):
        text, origin = src.text, src.origin
    else:
        text = src
    return _Parser(text, origin).module()


# --------------------------------------------------------------------------
# printer


def format_expr(e) -> str:
    if isinstance(e, Name):
        return f"next({e.name})" if e.next else e.name
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "TRUE" if e.value else "FALSE"
    if isinstance(e, Unary):
        return f"{e.op}{format_expr(e.arg)}"
    if isinstance(e, Binary):
        return f"({format_expr(e.lhs)} {e.op} {format_expr(e.rhs)})"
    raise TypeError(e)


def format_rhs(r) -> str:
    if isinstance(r, SetRhs):
        return "{" + ", ".join(format_expr(i) for i in r.items) + "}"
    if isinstance(r, CaseRhs):
        inner = " ".join(f"{format_expr(g)} : {format_rhs(b)};" for g, b in r.branches)
        return f"case {inner} esac"
    return format_expr(r)


def format_module(m: SmvModule) -> str:
    """Canonical text for ``m``; parsing it yields an equal module."""
    out = ["MODULE main"]
    if m.halt_pragma:
        out.append(f"-- @halt: {m.halt_pragma}")
    if m.vars:
        out.append("VAR")
        for v in m.vars:
            typ = "boolean" if v.lo is None else f"{v.lo}..{v.hi}"
            out.append(f"  {v.name} : {typ};")
    if m.assigns:
        out.append("ASSIGN")
        for a in m.assigns:
            out.append(f"  {a.kind}({a.target}) := {format_rhs(a.rhs)};")
    for e in m.inits:
        out.append(f"INIT {format_expr(e)};")
    for e in m.transes:
        out.append(f"TRANS {format_expr(e)};")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# compiler


class _Compiler:
    def __init__(self, module: SmvModule):
        self.m = module
        self.decls: dict[str, VarDecl] = {}
        for item in module.vars:
            if item.name in self.decls:
                raise self.error(f"duplicate declaration of {item.name}", item.pos)
            try:
                if item.lo is None:
                    decl = VarDecl.of_bool(item.name)
                else:
                    decl = VarDecl.of_range(item.name, item.lo, item.hi)
            except ModelError as exc:
                raise self.error(str(exc), item.pos) from None
            self.decls[item.name] = decl

    def error(self, msg: str, pos) -> SmvError:
        return SmvError(msg, self.m.origin, *pos)

    def var_term(self, name: str, primed: bool, pos):
        decl = self.decls.get(name)
        if decl is None:
            raise self.error(f"undeclared variable {name}", pos)
        atoms = [Var(a) for a in bit_blast(decl, primed)]
        if decl.boolean:
            return "bool", atoms[0]
        return "int", Int.unsigned(atoms, decl.lo, decl.hi)

    def expr(self, e, allow_next: bool):
        if isinstance(e, Name):
            if e.next and not allow_next:
                raise self.error("next() is only allowed in TRANS constraints", e.pos)
            return self.var_term(e.name, e.next, e.pos)
        if isinstance(e, IntLit):
            return "int", Int.const(e.value)
        if isinstance(e, BoolLit):
            return "bool", TRUE if e.value else FALSE
        if isinstance(e, Unary):
            if e.op == "!":
                return "bool", Not(self.as_bool(e.arg, allow_next))
            return "int", -self.as_int(e.arg, allow_next)
        op = e.op
        if op in ("&", "|", "->", "<->"):
            a, b = self.as_bool(e.lhs, allow_next), self.as_bool(e.rhs, allow_next)
            ctor = {"&": And, "|": Or, "->": Implies, "<->": Iff}[op]
            return "bool", ctor(a, b)
        if op in ("+", "-"):
            a, b = self.as_int(e.lhs, allow_next), self.as_int(e.rhs, allow_next)
            return "int", a + b if op == "+" else a - b
        if op in ("=", "!="):
            ka, a = self.expr(e.lhs, allow_next)
            kb, b = self.expr(e.rhs, allow_next)
            if ka != kb:
                raise self.error(f"type mismatch: cannot compare {ka} with {kb}", e.pos)
            res = Iff(a, b) if ka == "bool" else int_eq(a, b)
            return "bool", Not(res) if op == "!=" else res
        a, b = self.as_int(e.lhs, allow_next), self.as_int(e.rhs, allow_next)
        res = {
            "<": lambda: int_lt(a, b),
            "<=": lambda: int_le(a, b),
            ">": lambda: int_lt(b, a),
            ">=": lambda: int_le(b, a),
        }[op]()
        return "bool", res

    def as_bool(self, e, allow_next: bool) -> BoolExpr:
        kind, val = self.expr(e, allow_next)
        if kind != "bool":
            raise self.error("type mismatch: integer expression where boolean expected", e.pos)
        return val

    def as_int(self, e, allow_next: bool) -> Int:
        kind, val = self.expr(e, allow_next)
        if kind != "int":
            raise self.error("type mismatch: boolean expression where integer expected", e.pos)
        return val

    def constraint(self, decl: VarDecl, target, rhs) -> BoolExpr:
        """Predicate stating that ``target`` takes (one of) the values of ``rhs``."""
        if isinstance(rhs, SetRhs):
            return disj(self.constraint(decl, target, item) for item in rhs.items)
        if isinstance(rhs, CaseRhs):
            acc: BoolExpr = FALSE
            for guard, branch in reversed(rhs.branches):
                g = self.as_bool(guard, False)
                acc = Or(And(g, self.constraint(decl, target, branch)), And(Not(g), acc))
            return acc
        kind, val = self.expr(rhs, False)
        if decl.boolean:
            if kind != "bool":
                raise self.error(f"type mismatch: integer value assigned to boolean {decl.name}", rhs.pos)
            return Iff(target, val)
        if kind != "int":
            raise self.error(f"type mismatch: boolean value assigned to integer {decl.name}", rhs.pos)
        if val.hi < decl.lo or val.lo > decl.hi:
            what = "constant" if val.lo == val.hi else "expression"
            raise self.error(
                f"{what} out of declared range {decl.lo}..{decl.hi} of {decl.name} (value out of bound)",
                rhs.pos,
            )
        return int_eq(target, val)

    def compile(self) -> SymbolicKripke:
        init_parts, trans_parts = [], []
        seen = set()
        for a in self.m.assigns:
            decl = self.decls.get(a.target)
            if decl is None:
                raise self.error(f"undeclared variable {a.target}", a.pos)
            if (a.kind, a.target) in seen:
                raise self.error(f"multiple {a.kind}() assignments to {a.target}", a.pos)
            seen.add((a.kind, a.target))
            primed = a.kind == "next"
            _, target = self.var_term(a.target, primed, a.pos)
            (trans_parts if primed else init_parts).append(self.constraint(decl, target, a.rhs))
        for e in self.m.inits:
            init_parts.append(self.as_bool(e, False))
        for e in self.m.transes:
            trans_parts.append(self.as_bool(e, True))

        halt = self.m.halt_pragma
        if halt is not None:
            d = self.decls.get(halt)
            if d is None or not d.boolean:
                raise self.error(f"@halt pragma names {halt!r}, which is not a boolean variable", (0, 0))
        elif "halt" in self.decls and self.decls["halt"].boolean:
            halt = "halt"

        name = "main"
        if self.m.origin != "<string>":
            path = Path(self.m.origin)
            name = path.parent.name if path.stem == "model" and path.parent.name else path.stem
        model = SymbolicKripke(
            tuple(self.decls.values()), conj(init_parts), conj(trans_parts), halt, name
        )
        return with_domain_constraints(model)


def compile_module(module: SmvModule) -> SymbolicKripke:
    return _Compiler(module).compile()


def parse_model(src: SmvModelSource | str, origin: str = "<string>") -> SymbolicKripke:
    """Parse SMV text and compile it to a symbolic Kripke structure.

    Raises ``SmvError`` (with origin, line and column) on lexical, syntax,
    scoping and typing errors.
    """
    return compile_module(parse_module(src, origin))


def load_model(path) -> SymbolicKripke:
    return parse_model(SmvModelSource.from_path(path))
