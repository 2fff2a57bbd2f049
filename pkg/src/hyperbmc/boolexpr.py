"""Propositional expression DAGs.

Nodes are immutable and hash their structure once at construction, so large
shared DAGs (unrolled temporal formulas) can be used as dict keys cheaply.
Atom payloads are arbitrary hashable keys: model atoms, unrolled atoms, or
plain integers for instances read back from QCIR/QDIMACS files.
"""

from __future__ import annotations

from typing import Hashable, Iterable, Iterator, Mapping


class MissingAtomError(KeyError):
    """An evaluated expression references an atom absent from the assignment."""


class BoolExpr:
    __slots__ = ("_hash",)

    def _fields(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or self._hash != other._hash:
            return False
        return self._fields() == other._fields()

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return self._hash

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def _init(self, **fields):
        for name, value in fields.items():
            object.__setattr__(self, name, value)
        object.__setattr__(self, "_hash", hash((type(self).__name__,) + self._fields()))

    def children(self) -> tuple["BoolExpr", ...]:
        return ()

    def __repr__(self):
        return to_str(self)

    # operator sugar used heavily in tests
    def __and__(self, other: "BoolExpr") -> "BoolExpr":
        return And(self, other)

    def __or__(self, other: "BoolExpr") -> "BoolExpr":
        return Or(self, other)

    def __invert__(self) -> "BoolExpr":
        return Not(self)


class Const(BoolExpr):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self._init(value=bool(value))

    def _fields(self):
        return (self.value,)


TRUE = Const(True)
FALSE = Const(False)


class Var(BoolExpr):
    __slots__ = ("key",)

    def __init__(self, key: Hashable):
        self._init(key=key)

    def _fields(self):
        return (self.key,)


class Not(BoolExpr):
    __slots__ = ("arg",)

    def __init__(self, arg: BoolExpr):
        self._init(arg=arg)

    def _fields(self):
        return (self.arg,)

    def children(self):
        return (self.arg,)


class _NAry(BoolExpr):
    __slots__ = ("args",)

    def __init__(self, *args: BoolExpr):
        if len(args) == 1 and not isinstance(args[0], BoolExpr):
            args = tuple(args[0])
        if not args:
            raise ValueError(f"{type(self).__name__} needs at least one operand")
        self._init(args=tuple(args))

    def _fields(self):
        return self.args

    def children(self):
        return self.args


class And(_NAry):
    __slots__ = ()


class Or(_NAry):
    __slots__ = ()


class Implies(BoolExpr):
    __slots__ = ("lhs", "rhs")

    def __init__(self, lhs: BoolExpr, rhs: BoolExpr):
        self._init(lhs=lhs, rhs=rhs)

    def _fields(self):
        return (self.lhs, self.rhs)

    def children(self):
        return (self.lhs, self.rhs)


class Iff(BoolExpr):
    __slots__ = ("lhs", "rhs")

    def __init__(self, lhs: BoolExpr, rhs: BoolExpr):
        self._init(lhs=lhs, rhs=rhs)

    def _fields(self):
        return (self.lhs, self.rhs)

    def children(self):
        return (self.lhs, self.rhs)


def conj(exprs: Iterable[BoolExpr]) -> BoolExpr:
    """And over ``exprs``; the unit and singleton cases avoid a wrapper node."""
    items = tuple(exprs)
    if not items:
        return TRUE
    if len(items) == 1:
        return items[0]
    return And(items)


def disj(exprs: Iterable[BoolExpr]) -> BoolExpr:
    items = tuple(exprs)
    if not items:
        return FALSE
    if len(items) == 1:
        return items[0]
    return Or(items)


def ite(cond: BoolExpr, then: BoolExpr, other: BoolExpr) -> BoolExpr:
    return Or(And(cond, then), And(Not(cond), other))


def iter_nodes(expr: BoolExpr) -> Iterator[BoolExpr]:
    """Each distinct node of the DAG once, children before parents."""
    seen: set[int] = set()
    stack: list[tuple[BoolExpr, bool]] = [(expr, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in seen:
            continue
        if expanded:
            seen.add(id(node))
            yield node
            continue
        stack.append((node, True))
        for child in reversed(node.children()):
            if id(child) not in seen:
                stack.append((child, False))


def atoms(expr: BoolExpr) -> set:
    return {node.key for node in iter_nodes(expr) if isinstance(node, Var)}


def node_count(expr: BoolExpr) -> int:
    return sum(1 for _ in iter_nodes(expr))


def evaluate(expr: BoolExpr, assignment: Mapping[Hashable, bool]) -> bool:
    """Evaluate under a total assignment of the atoms in ``expr``."""
    values: dict[int, bool] = {}
    for node in iter_nodes(expr):
        if isinstance(node, Var):
            try:
                val = bool(assignment[node.key])
            except KeyError:
                raise MissingAtomError(node.key) from None
        elif isinstance(node, Const):
            val = node.value
        elif isinstance(node, Not):
            val = not values[id(node.arg)]
        elif isinstance(node, And):
            val = all(values[id(a)] for a in node.args)
        elif isinstance(node, Or):
            val = any(values[id(a)] for a in node.args)
        elif isinstance(node, Implies):
            val = (not values[id(node.lhs)]) or values[id(node.rhs)]
        elif isinstance(node, Iff):
            val = values[id(node.lhs)] == values[id(node.rhs)]
        else:
            raise TypeError(f"not a BoolExpr node: {node!r}")
        values[id(node)] = val
    return values[id(expr)]


def substitute(expr: BoolExpr, mapping) -> BoolExpr:
    """Replace atoms: ``mapping(key)`` returns a BoolExpr or None to keep the atom.

    ``mapping`` may also be a dict from keys to BoolExpr. Sharing is preserved.
    """
    lookup = mapping.get if isinstance(mapping, Mapping) else mapping
    out: dict[int, BoolExpr] = {}
    for node in iter_nodes(expr):
        if isinstance(node, Var):
            repl = lookup(node.key)
            new = node if repl is None else repl
        elif isinstance(node, Const):
            new = node
        elif isinstance(node, Not):
            new = Not(out[id(node.arg)])
        elif isinstance(node, (And, Or)):
            new = type(node)(tuple(out[id(a)] for a in node.args))
        else:
            new = type(node)(out[id(node.lhs)], out[id(node.rhs)])
        out[id(node)] = new
    return out[id(expr)]


def to_str(expr: BoolExpr, name=str) -> str:
    """Fully parenthesized infix rendering (tree-expanded; meant for small terms)."""
    if isinstance(expr, Const):
        return "TRUE" if expr.value else "FALSE"
    if isinstance(expr, Var):
        return name(expr.key)
    if isinstance(expr, Not):
        return "!" + to_str(expr.arg, name)
    if isinstance(expr, (And, Or)):
        op = " & " if isinstance(expr, And) else " | "
        return "(" + op.join(to_str(a, name) for a in expr.args) + ")"
    op = " -> " if isinstance(expr, Implies) else " <-> "
    return "(" + to_str(expr.lhs, name) + op + to_str(expr.rhs, name) + ")"
