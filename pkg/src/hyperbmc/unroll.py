"""Bounded unrolling of models and of NNF formula bodies."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping

from .bitvec import bnot, const_vec, eq
from .boolexpr import FALSE, TRUE, And, BoolExpr, Implies, Not, Or, Var, conj, substitute
from .hyperltl import (
    ArithCmp,
    IntLit,
    LAnd,
    LFalse,
    LNot,
    LOr,
    LTrue,
    Next,
    Prop,
    Release,
    Until,
    body_tids,
    is_nnf,
)
from .model import Atom, SymbolicKripke, bit_blast


class Semantics(str, enum.Enum):
    PES = "pes"
    OPT = "opt"
    HPES = "hpes"
    HOPT = "hopt"

    @property
    def halting(self) -> bool:
        return self in (Semantics.HPES, Semantics.HOPT)

    @property
    def pessimistic(self) -> bool:
        return self in (Semantics.PES, Semantics.HPES)

    def __str__(self):
        return self.value


class UnrollError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class UnrolledAtom:
    """Model bit ``base`` of trace ``tid`` at time ``step``."""

    tid: str
    step: int
    base: Atom

    def __str__(self):
        return f"{self.base}[{self.tid}]@{self.step}"


def _step_mapper(tid: str, step: int):
    def mapping(a: Atom):
        return Var(UnrolledAtom(tid, step + 1 if a.primed else step, a.unprime()))

    return mapping


def unroll_model(model: SymbolicKripke, tid: str, k: int) -> BoolExpr:
    """I(x^0) & d(x^0, x^1) & ... & d(x^(k-1), x^k); k = 0 gives I(x^0)."""
    if k < 0:
        raise UnrollError("bound k must be non-negative")
    parts = [substitute(model.init, _step_mapper(tid, 0))]
    parts += [substitute(model.trans, _step_mapper(tid, i)) for i in range(k)]
    return conj(parts)


def unrolled_atoms(model: SymbolicKripke, tid: str, k: int) -> list[UnrolledAtom]:
    """Step-major, then declaration order, MSB first."""
    bits = model.state_atoms()
    return [UnrolledAtom(tid, i, a) for i in range(k + 1) for a in bits]


def halted_predicate(tids: Iterable[str], k: int, binding: Mapping[str, SymbolicKripke]) -> BoolExpr:
    parts = []
    for tid in tids:
        halt = binding[tid].halt_var
        if halt is None:
            raise UnrollError(
                f"halting semantics need a halt variable, but the model bound to {tid} ({binding[tid].name}) has none"
            )
        parts.append(Var(UnrolledAtom(tid, k, Atom(halt))))
    return conj(parts)


class _BodyUnroller:
    def __init__(self, k: int, sem: Semantics, binding: Mapping[str, SymbolicKripke]):
        self.k = k
        self.sem = Semantics(sem)
        self.binding = binding
        self.order = list(binding)  # prefix order, for a stable halted conjunction
        self.memo: dict = {}
        self.stutter_memo: dict = {}

    def atom(self, var: str, tid: str, step: int) -> BoolExpr:
        return Var(UnrolledAtom(tid, step, Atom(var)))

    def term(self, t, step: int) -> list[BoolExpr]:
        if isinstance(t, IntLit):
            return const_vec(t.value, max(t.value.bit_length(), 1))
        decl = self.binding[t.tid].decl(t.var)
        return [Var(UnrolledAtom(t.tid, step, a)) for a in bit_blast(decl)]

    def leaf(self, node, step: int) -> BoolExpr | None:
        if isinstance(node, LTrue):
            return TRUE
        if isinstance(node, LFalse):
            return FALSE
        if isinstance(node, Prop):
            return self.atom(node.var, node.tid, step)
        if isinstance(node, LNot):
            return Not(self.atom(node.arg.var, node.arg.tid, step))
        if isinstance(node, ArithCmp):
            same = eq(self.term(node.lhs, step), self.term(node.rhs, step))
            return same if node.op == "=" else bnot(same)
        return None

    def unroll(self, node, i: int) -> BoolExpr:
        key = (node, i)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if i > self.k:
            out = self.base(node)
        else:
            out = self.leaf(node, i)
            if out is None:
                if isinstance(node, LAnd):
                    out = And(self.unroll(node.lhs, i), self.unroll(node.rhs, i))
                elif isinstance(node, LOr):
                    out = Or(self.unroll(node.lhs, i), self.unroll(node.rhs, i))
                elif isinstance(node, Next):
                    out = self.unroll(node.arg, i + 1)
                elif isinstance(node, Until):
                    out = Or(self.unroll(node.rhs, i), And(self.unroll(node.lhs, i), self.unroll(node, i + 1)))
                elif isinstance(node, Release):
                    out = And(self.unroll(node.rhs, i), Or(self.unroll(node.lhs, i), self.unroll(node, i + 1)))
                else:
                    raise UnrollError(f"body is not in negation normal form at {node!r}")
        self.memo[key] = out
        return out

    def base(self, node) -> BoolExpr:
        if self.sem is Semantics.PES:
            return FALSE
        if self.sem is Semantics.OPT:
            return TRUE
        tids = body_tids(node)
        halted = halted_predicate([t for t in self.order if t in tids], self.k, self.binding)
        value = self.stutter(node)
        if self.sem is Semantics.HPES:
            return And(halted, value)
        return Implies(halted, value)

    def stutter(self, node) -> BoolExpr:
        """Value of ``node`` on traces that repeat their step-k state forever."""
        hit = self.stutter_memo.get(node)
        if hit is not None:
            return hit
        out = self.leaf(node, self.k)
        if out is None:
            if isinstance(node, LAnd):
                out = And(self.stutter(node.lhs), self.stutter(node.rhs))
            elif isinstance(node, LOr):
                out = Or(self.stutter(node.lhs), self.stutter(node.rhs))
            elif isinstance(node, Next):
                out = self.stutter(node.arg)
            elif isinstance(node, (Until, Release)):
                # on a constant suffix both reduce to their right operand
                out = self.stutter(node.rhs)
            else:
                raise UnrollError(f"body is not in negation normal form at {node!r}")
        self.stutter_memo[node] = out
        return out


def check_halting(sem: Semantics, binding: Mapping[str, SymbolicKripke]) -> None:
    if Semantics(sem).halting:
        for tid, model in binding.items():
            if model.halt_var is None:
                raise UnrollError(
                    f"-{Semantics(sem).value} needs a halt variable, but the model bound to {tid} "
                    f"({model.name}) declares none (name it `halt` or add `-- @halt: <var>`)"
                )


def unroll_body(body, k: int, sem: Semantics | str, binding: Mapping[str, SymbolicKripke], i: int = 0) -> BoolExpr:
    """[[body]]^sem_{i,k}; ``binding`` maps each tid to its model (prefix order)."""
    if not is_nnf(body):
        raise UnrollError("unroll_body expects a formula body in negation normal form")
    if k < 0 or not 0 <= i <= k + 1:
        raise UnrollError(f"need 0 <= i <= k + 1, got i={i}, k={k}")
    return _BodyUnroller(k, Semantics(sem), binding).unroll(body, i)
