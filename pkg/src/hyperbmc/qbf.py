"""Prenex QBF instances, assembly from models and formulas, QCIR/QDIMACS I/O."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

from .boolexpr import FALSE, TRUE, And, BoolExpr, Const, Iff, Implies, Not, Or, Var, atoms, conj, iter_nodes, substitute
from .hyperltl import EXISTS, FORALL, HyperFormula, is_nnf
from .model import SymbolicKripke
from .unroll import Semantics, UnrolledAtom, check_halting, unroll_body, unroll_model, unrolled_atoms


class QbfError(ValueError):
    pass


@dataclass(frozen=True)
class QbfMeta:
    k: int
    semantics: str
    mode: str | None = None
    models: tuple[tuple[str, str], ...] = ()  # (tid, model name)


@dataclass(frozen=True)
class QbfInstance:
    """Quantifier blocks (outermost first) over atom keys, plus a matrix."""

    blocks: tuple[tuple[str, tuple[Hashable, ...]], ...]
    matrix: BoolExpr
    meta: QbfMeta | None = field(default=None, compare=False)

    def __post_init__(self):
        blocks = tuple((q, tuple(xs)) for q, xs in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        seen = set()
        for q, xs in blocks:
            if q not in (EXISTS, FORALL):
                raise QbfError(f"unknown quantifier {q!r}")
            for x in xs:
                if x in seen:
                    raise QbfError(f"atom {x} bound twice")
                seen.add(x)
        free = atoms(self.matrix) - seen
        if free:
            raise QbfError(f"matrix has unbound atoms: {sorted(map(str, free))[:5]}")

    @property
    def variables(self) -> list:
        return [x for _, xs in self.blocks for x in xs]

    def quantifier_of(self) -> dict:
        return {x: q for q, xs in self.blocks for x in xs}

    def leading_run(self) -> tuple[str | None, list]:
        """Quantifier and atoms of the maximal outermost run of one kind."""
        kind, out = None, []
        for q, xs in self.blocks:
            if not xs:
                continue
            if kind is None:
                kind = q
            if q != kind:
                break
            out.extend(xs)
        return kind, out


def assemble(
    binding: Mapping[str, SymbolicKripke] | Sequence[SymbolicKripke],
    formula: HyperFormula,
    k: int,
    sem: Semantics | str,
    mode: str | None = None,
) -> QbfInstance:
    """Q_A x_A ... Q_Z x_Z. [[K_A]] o_A ([[K_B]] o_B ( ... [[body]]^sem_{0,k}))

    with o = & for an existential and -> for a universal quantifier. The
    formula must already be in NNF (negate it first for bug hunting).
    """
    sem = Semantics(sem)
    if not is_nnf(formula.body):
        raise QbfError("assemble expects a formula in negation normal form")
    if not isinstance(binding, Mapping):
        binding = dict(zip(formula.tids, binding))
    binding = {t: binding[t] for t in formula.tids}
    check_halting(sem, binding)
    matrix = unroll_body(formula.body, k, sem, binding)
    for q in reversed(formula.prefix):
        unrolled = unroll_model(binding[q.tid], q.tid, k)
        matrix = And(unrolled, matrix) if q.kind == EXISTS else Implies(unrolled, matrix)
    blocks = tuple((q.kind, tuple(unrolled_atoms(binding[q.tid], q.tid, k))) for q in formula.prefix)
    meta = QbfMeta(k, sem.value, mode, tuple((t, m.name) for t, m in binding.items()))
    return QbfInstance(blocks, matrix, meta)


def restrict(q: QbfInstance, assignment: Mapping[Hashable, bool]) -> QbfInstance:
    """Fix some atoms to constants and drop them from the prefix."""
    matrix = substitute(q.matrix, lambda x: (TRUE if assignment[x] else FALSE) if x in assignment else None)
    blocks = tuple((k, tuple(x for x in xs if x not in assignment)) for k, xs in q.blocks)
    return QbfInstance(blocks, matrix, q.meta)


# --------------------------------------------------------------------------
# circuits


@dataclass(frozen=True)
class Circuit:
    """Variables 1..n in prefix order; gate ids n+1.. in topological order.

    ``gates[j]`` is ``(op, literals)`` for gate id ``n + 1 + j`` where op is
    ``"and"`` or ``"or"``; literals are signed ids. ``output`` is a signed id.
    A constant output is expressed with an empty ``and`` gate (true).
    """

    blocks: tuple[tuple[str, tuple[int, ...]], ...]
    keys: tuple  # keys[i - 1] is the atom for variable i
    gates: tuple[tuple[str, tuple[int, ...]], ...]
    output: int

    @property
    def nvars(self) -> int:
        return len(self.keys)


def _lit_order(lit: int):
    return (abs(lit), lit < 0)


def compile_circuit(q: QbfInstance) -> Circuit:
    keys = tuple(q.variables)
    index = {x: i + 1 for i, x in enumerate(keys)}
    n = len(keys)
    gates: list[tuple[str, tuple[int, ...]]] = []
    gate_ids: dict = {}

    def gate(op: str, lits) -> int | bool:
        absorbing = op == "or"  # value that decides the gate
        out = set()
        for lit in lits:
            if isinstance(lit, bool):
                if lit == absorbing:
                    return absorbing
                continue
            if -lit in out:
                return absorbing
            out.add(lit)
        if not out:
            return not absorbing
        if len(out) == 1:
            return out.pop()
        key = (op, tuple(sorted(out, key=_lit_order)))
        gid = gate_ids.get(key)
        if gid is None:
            gates.append(key)
            gid = gate_ids[key] = n + len(gates)
        return gid

    def neg(v):
        return (not v) if isinstance(v, bool) else -v

    val: dict[int, int | bool] = {}
    for node in iter_nodes(q.matrix):
        if isinstance(node, Var):
            v = index[node.key]
        elif isinstance(node, Const):
            v = node.value
        elif isinstance(node, Not):
            v = neg(val[id(node.arg)])
        elif isinstance(node, And):
            v = gate("and", [val[id(a)] for a in node.args])
        elif isinstance(node, Or):
            v = gate("or", [val[id(a)] for a in node.args])
        elif isinstance(node, Implies):
            v = gate("or", [neg(val[id(node.lhs)]), val[id(node.rhs)]])
        elif isinstance(node, Iff):
            a, b = val[id(node.lhs)], val[id(node.rhs)]
            v = gate("or", [gate("and", [a, b]), gate("and", [neg(a), neg(b)])])
        else:
            raise QbfError(f"unknown node {node!r}")
        val[id(node)] = v
    out = val[id(q.matrix)]
    if isinstance(out, bool):
        gates.append(("and", ()))
        tid = n + len(gates)
        out = tid if out else -tid
    blocks = tuple((kind, tuple(index[x] for x in xs)) for kind, xs in q.blocks)
    return Circuit(blocks, keys, tuple(gates), out)


def _merged_blocks(blocks) -> list[tuple[str, list[int]]]:
    merged: list[tuple[str, list[int]]] = []
    for kind, xs in blocks:
        if not xs:
            continue
        if merged and merged[-1][0] == kind:
            merged[-1][1].extend(xs)
        else:
            merged.append((kind, list(xs)))
    return merged


def to_qcir(q: QbfInstance | Circuit) -> str:
    c = q if isinstance(q, Circuit) else compile_circuit(q)
    lines = ["#QCIR-G14"]
    for kind, xs in _merged_blocks(c.blocks):
        lines.append(f"{kind}({', '.join(map(str, xs))})")
    lines.append(f"output({c.output})")
    for j, (op, lits) in enumerate(c.gates):
        lines.append(f"{c.nvars + 1 + j} = {op}({', '.join(map(str, lits))})")
    return "\n".join(lines) + "\n"


def to_qdimacs(q: QbfInstance | Circuit) -> str:
    """Tseitin encoding; gate variables join the innermost existential block."""
    c = q if isinstance(q, Circuit) else compile_circuit(q)
    clauses: list[tuple[int, ...]] = []
    for j, (op, lits) in enumerate(c.gates):
        g = c.nvars + 1 + j
        if op == "and":
            clauses.extend((-g, lit) for lit in lits)
            clauses.append((g, *(-lit for lit in lits)))
        else:
            clauses.extend((g, -lit) for lit in lits)
            clauses.append((-g, *lits))
    clauses.append((c.output,))
    blocks = _merged_blocks(c.blocks)
    aux = list(range(c.nvars + 1, c.nvars + 1 + len(c.gates)))
    if aux:
        if blocks and blocks[-1][0] == EXISTS:
            blocks[-1][1].extend(aux)
        else:
            blocks.append((EXISTS, aux))
    total = c.nvars + len(c.gates)
    lines = [f"p cnf {total} {len(clauses)}"]
    for kind, xs in blocks:
        lines.append(f"{'e' if kind == EXISTS else 'a'} {' '.join(map(str, xs))} 0")
    lines.extend(" ".join(map(str, cl)) + " 0" for cl in clauses)
    return "\n".join(lines) + "\n"


def to_map(q: QbfInstance | Circuit) -> str:
    """Sidecar lines ``id tid var bit step`` decoding variable ids."""
    c = q if isinstance(q, Circuit) else compile_circuit(q)
    lines = []
    for i, key in enumerate(c.keys, start=1):
        if isinstance(key, UnrolledAtom):
            lines.append(f"{i} {key.tid} {key.base.var} {key.base.bit} {key.step}")
        else:
            lines.append(f"{i} {key}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_map(text: str) -> dict[int, Hashable]:
    from .model import Atom

    out = {}
    for raw in text.splitlines():
        parts = raw.split()
        if not parts:
            continue
        if len(parts) == 5:
            i, tid, var, bit, step = parts
            out[int(i)] = UnrolledAtom(tid, int(step), Atom(var, int(bit)))
        elif len(parts) == 2:
            out[int(parts[0])] = int(parts[1]) if parts[1].lstrip("-").isdigit() else parts[1]
        else:
            raise QbfError(f"malformed map line: {raw!r}")
    return out


# --------------------------------------------------------------------------
# readers (atoms become plain integers)


def _lit_expr(lit: int, env: Mapping[int, BoolExpr]) -> BoolExpr:
    base = env[abs(lit)]
    return Not(base) if lit < 0 else base


def parse_qcir(text: str) -> QbfInstance:
    blocks: list[tuple[str, tuple[int, ...]]] = []
    env: dict[int, BoolExpr] = {}
    output = None
    gates: list[tuple[int, str, list[int]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            head, _, rest = line.partition("(")
            args = [a.strip() for a in rest.rstrip(")").split(",") if a.strip()]
            head = head.strip()
            if head in (EXISTS, FORALL):
                xs = tuple(int(a) for a in args)
                blocks.append((head, xs))
                env.update((x, Var(x)) for x in xs)
            elif head == "output":
                output = int(args[0])
            else:
                gid, _, op = head.partition("=")
                op = op.strip()
                if op not in ("and", "or"):
                    raise QbfError(f"unsupported gate type {op!r}")
                gates.append((int(gid), op, [int(a) for a in args]))
        except (ValueError, IndexError) as exc:
            raise QbfError(f"line {lineno}: cannot parse {raw!r}: {exc}") from None
    if output is None:
        raise QbfError("QCIR text has no output statement")
    for gid, op, lits in gates:
        kids = [_lit_expr(lit, env) for lit in lits]
        if not kids:
            env[gid] = TRUE if op == "and" else FALSE
        else:
            env[gid] = And(kids) if op == "and" else Or(kids)
    return QbfInstance(tuple(blocks), _lit_expr(output, env))


def parse_qdimacs(text: str) -> QbfInstance:
    blocks: list[tuple[str, tuple[int, ...]]] = []
    clauses: list[BoolExpr] = []
    nvars = None
    pending: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        try:
            if parts[0] == "p":
                if parts[1] != "cnf":
                    raise QbfError("expected 'p cnf'")
                nvars = int(parts[2])
            elif parts[0] in ("e", "a"):
                xs = tuple(int(p) for p in parts[1:])
                if not xs or xs[-1] != 0:
                    raise QbfError("quantifier line must end in 0")
                blocks.append((EXISTS if parts[0] == "e" else FORALL, xs[:-1]))
            else:
                pending.extend(int(p) for p in parts)
                while 0 in pending:
                    cut = pending.index(0)
                    lits, pending = pending[:cut], pending[cut + 1:]
                    clauses.append(Or([Not(Var(abs(l))) if l < 0 else Var(l) for l in lits]) if lits else FALSE)
        except ValueError as exc:
            raise QbfError(f"line {lineno}: cannot parse {raw!r}: {exc}") from None
    if nvars is None:
        raise QbfError("QDIMACS text has no 'p cnf' header")
    bound = {x for _, xs in blocks for x in xs}
    free = sorted(set(range(1, nvars + 1)) - bound)
    if free:  # free variables are existential at the outermost level
        blocks.insert(0, (EXISTS, tuple(free)))
    return QbfInstance(tuple(blocks), conj(clauses))
