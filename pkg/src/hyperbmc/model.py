"""Symbolic Kripke structures over bit-blasted variables.

Integer variables use the raw binary encoding of their value (no offset by the
lower bound), most-significant bit first, so ``PC: 1..3`` gets two bits and
``PC = 1`` is ``!PC_1 & PC_0``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .boolexpr import (
    FALSE,
    TRUE,
    BoolExpr,
    Not,
    Var,
    atoms,
    conj,
    disj,
    evaluate,
)

log = logging.getLogger(__name__)

MAX_RANGE_HI = 2**30


class ModelError(ValueError):
    """Malformed model or value outside a declared domain."""


@dataclass(frozen=True, order=True)
class Atom:
    """One state bit. ``primed`` atoms refer to the successor state."""

    var: str
    bit: int = 0
    primed: bool = False

    def prime(self) -> "Atom":
        return Atom(self.var, self.bit, True)

    def unprime(self) -> "Atom":
        return Atom(self.var, self.bit, False)

    def __str__(self):
        return f"{self.var}_{self.bit}" + ("'" if self.primed else "")


@dataclass(frozen=True)
class VarDecl:
    name: str
    lo: int = 0
    hi: int = 1
    boolean: bool = True

    @classmethod
    def of_bool(cls, name: str) -> "VarDecl":
        return cls(name, 0, 1, True)

    @classmethod
    def of_range(cls, name: str, lo: int, hi: int) -> "VarDecl":
        return cls(name, lo, hi, False)

    def __post_init__(self):
        if self.boolean:
            if (self.lo, self.hi) != (0, 1):
                raise ModelError(f"boolean variable {self.name} cannot carry a range")
            return
        if self.lo < 0:
            raise ModelError(f"{self.name}: negative lower bound {self.lo} is not supported")
        if self.hi <= self.lo:
            raise ModelError(f"{self.name}: empty or singleton range {self.lo}..{self.hi}")
        if self.hi >= MAX_RANGE_HI:
            raise ModelError(f"{self.name}: upper bound {self.hi} exceeds the 2^30 limit (model too large)")

    @property
    def bit_count(self) -> int:
        return 1 if self.boolean else self.hi.bit_length()

    def values(self) -> range:
        return range(self.lo, self.hi + 1)

    def atom_name(self, bit: int) -> str:
        return self.name if self.boolean else f"{self.name}_{bit}"

    def __str__(self):
        return f"{self.name}: " + ("boolean" if self.boolean else f"{self.lo}..{self.hi}")


def bit_blast(decl: VarDecl, primed: bool = False) -> list[Atom]:
    """State atoms for ``decl``, most-significant bit first."""
    if decl.boolean:
        return [Atom(decl.name, 0, primed)]
    return [Atom(decl.name, b, primed) for b in reversed(range(decl.bit_count))]


def value_bits(decl: VarDecl, value: int) -> list[bool]:
    """Raw binary of ``value`` at the declaration's width, MSB first."""
    if isinstance(value, bool):
        value = int(value)
    if not decl.lo <= value <= decl.hi:
        raise ModelError(f"value out of bound: {value} not in {decl.lo}..{decl.hi} for {decl.name}")
    return [bool((value >> b) & 1) for b in reversed(range(decl.bit_count))]


def encode_value(decl: VarDecl, value: int, primed: bool = False) -> BoolExpr:
    lits = [
        Var(a) if bit else Not(Var(a))
        for a, bit in zip(bit_blast(decl, primed), value_bits(decl, value))
    ]
    return conj(lits)


def decode_value(decl: VarDecl, bits: Sequence[bool]):
    """Inverse of ``value_bits``; booleans decode to ``bool``."""
    if len(bits) != decl.bit_count:
        raise ModelError(f"{decl.name}: expected {decl.bit_count} bits, got {len(bits)}")
    if decl.boolean:
        return bool(bits[0])
    return int("".join("1" if b else "0" for b in bits), 2)


def domain_constraint(decl: VarDecl, primed: bool = False) -> BoolExpr:
    """Excludes bit patterns in [0, 2^bits) that lie outside [lo, hi]."""
    if decl.boolean or (decl.lo == 0 and decl.hi == 2**decl.bit_count - 1):
        return TRUE
    from .bitvec import const_vec, uge, ule

    vec = [Var(a) for a in bit_blast(decl, primed)]
    parts = []
    if decl.lo > 0:
        parts.append(uge(vec, const_vec(decl.lo, len(vec))))
    if decl.hi < 2**decl.bit_count - 1:
        parts.append(ule(vec, const_vec(decl.hi, len(vec))))
    return conj(parts)


@dataclass(frozen=True)
class SymbolicKripke:
    """Variables, an initial-state predicate and a transition predicate.

    ``trans`` ranges over unprimed (current) and primed (next) atoms. The
    domain constraints of range variables are expected to be part of ``init``
    and ``trans`` already (see ``with_domain_constraints``).
    """

    vars: tuple[VarDecl, ...]
    init: BoolExpr
    trans: BoolExpr
    halt_var: str | None = None
    name: str = "model"

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        names = [v.name for v in self.vars]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise ModelError(f"duplicate variable declarations: {sorted(dup)}")
        by_name = {v.name: v for v in self.vars}
        for label, expr, allow_primed in (("init", self.init, False), ("trans", self.trans, True)):
            for a in atoms(expr):
                if not isinstance(a, Atom):
                    raise ModelError(f"{label}: non-model atom {a!r}")
                if a.primed and not allow_primed:
                    raise ModelError(f"init references next-state atom {a}")
                decl = by_name.get(a.var)
                if decl is None:
                    raise ModelError(f"{label}: undeclared variable {a.var}")
                if not 0 <= a.bit < decl.bit_count:
                    raise ModelError(f"{label}: bit {a.bit} out of range for {decl}")
        if self.halt_var is not None:
            decl = by_name.get(self.halt_var)
            if decl is None or not decl.boolean:
                raise ModelError(f"halt variable {self.halt_var!r} must be a declared boolean")

    def decl(self, name: str) -> VarDecl:
        for v in self.vars:
            if v.name == name:
                return v
        raise KeyError(name)

    def has_var(self, name: str) -> bool:
        return any(v.name == name for v in self.vars)

    def state_atoms(self, primed: bool = False) -> list[Atom]:
        """All state bits in declaration order, MSB first within a variable."""
        return [a for v in self.vars for a in bit_blast(v, primed)]

    @property
    def state_bits(self) -> int:
        return sum(v.bit_count for v in self.vars)


def with_domain_constraints(model: SymbolicKripke) -> SymbolicKripke:
    cur = [domain_constraint(v) for v in model.vars]
    nxt = [domain_constraint(v, primed=True) for v in model.vars]
    cur = [c for c in cur if c != TRUE]
    nxt = [c for c in nxt if c != TRUE]
    init = conj([model.init, *cur]) if cur else model.init
    trans = conj([model.trans, *cur, *nxt]) if (cur or nxt) else model.trans
    return SymbolicKripke(model.vars, init, trans, model.halt_var, model.name)


def state_assignment(decls: Iterable[VarDecl], values: Mapping[str, int], primed: bool = False) -> dict:
    """Bit-level assignment for a state given as ``{var: value}``."""
    out = {}
    for d in decls:
        for a, b in zip(bit_blast(d, primed), value_bits(d, values[d.name])):
            out[a] = b
    return out


@dataclass(frozen=True)
class ExplicitKripke:
    """Enumerated state graph. States are tuples of values in declaration order."""

    vars: tuple[VarDecl, ...]
    states: tuple[tuple, ...]
    initial: frozenset[int]
    edges: tuple[tuple[int, ...], ...]
    deadlocks: tuple[int, ...] = field(default=())

    def valuation(self, index: int) -> dict:
        return {d.name: v for d, v in zip(self.vars, self.states[index])}

    def index_of(self, values: Mapping[str, int]) -> int:
        key = tuple(values[d.name] for d in self.vars)
        return self.states.index(key)

    def reachable(self) -> list[int]:
        seen = set(self.initial)
        frontier = sorted(self.initial)
        while frontier:
            nxt = []
            for s in frontier:
                for t in self.edges[s]:
                    if t not in seen:
                        seen.add(t)
                        nxt.append(t)
            frontier = nxt
        return sorted(seen)

    def paths(self, length: int) -> list[tuple[int, ...]]:
        """All paths with ``length`` states starting in an initial state."""
        if length <= 0:
            return [()]
        out = [(s,) for s in sorted(self.initial)]
        for _ in range(length - 1):
            out = [p + (t,) for p in out for t in self.edges[p[-1]]]
        return out


def _domain_product(decls: Sequence[VarDecl]) -> int:
    n = 1
    for d in decls:
        n *= len(d.values())
    return n


def enumerate_states(
    model: SymbolicKripke, max_states: int = 4096, reachable_only: bool = False
) -> ExplicitKripke:
    """Explicit state graph of ``model``.

    Every domain-respecting valuation is a state. With ``reachable_only``
    the edge relation is computed just for states reachable from the initial
    ones (other states keep empty successor lists), which is much cheaper
    for the oracle's path enumeration.
    """
    size = _domain_product(model.vars)
    if size > max_states:
        raise ModelError(f"state space of {model.name} has {size} valuations > budget {max_states}")
    decls = model.vars
    states = tuple(itertools.product(*(
        (False, True) if d.boolean else tuple(d.values()) for d in decls
    )))
    cur_bits = [state_assignment(decls, dict(zip((d.name for d in decls), s))) for s in states]
    nxt_bits = [{a.prime(): b for a, b in bits.items()} for bits in cur_bits]
    initial = frozenset(i for i, bits in enumerate(cur_bits) if evaluate(model.init, bits))

    edges: list[tuple[int, ...]] = [()] * len(states)
    todo = sorted(initial) if reachable_only else list(range(len(states)))
    done = set()
    while todo:
        i = todo.pop()
        if i in done:
            continue
        done.add(i)
        succ = tuple(
            j for j in range(len(states)) if evaluate(model.trans, {**cur_bits[i], **nxt_bits[j]})
        )
        edges[i] = succ
        if reachable_only:
            todo.extend(j for j in succ if j not in done)

    explicit = ExplicitKripke(decls, states, initial, tuple(edges))
    dead = tuple(i for i in explicit.reachable() if not explicit.edges[i])
    if dead:
        log.warning(
            "%s: transition relation is not total; reachable deadlock states: %s",
            model.name,
            [explicit.valuation(i) for i in dead],
        )
    return ExplicitKripke(decls, states, initial, tuple(edges), dead)


def explicit_model(
    decls: Sequence[VarDecl],
    states: Sequence[Mapping[str, int]],
    initial: Iterable[int],
    edges: Mapping[int, Iterable[int]],
    halt_var: str | None = None,
    name: str = "explicit",
) -> SymbolicKripke:
    """Symbolic model whose reachable graph is exactly the given state table.

    ``states`` must be pairwise distinct valuations; ``edges`` maps a state
    index to successor indices.
    """
    decls = tuple(decls)
    enc = [conj(encode_value(d, s[d.name]) for d in decls) for s in states]
    enc_next = [conj(encode_value(d, s[d.name], primed=True) for d in decls) for s in states]
    init = disj(enc[i] for i in sorted(set(initial)))
    trans = disj(
        enc[i] & disj(enc_next[j] for j in sorted(set(succ)))
        for i, succ in sorted(edges.items())
        if succ
    )
    if trans == TRUE:  # pragma: no cover - disj never returns TRUE
        trans = FALSE
    return SymbolicKripke(decls, init, trans, halt_var, name)
