"""End-to-end checking: formula mode, QBF query, verdict and trace decoding."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

from .boolexpr import evaluate
from .hyperltl import EXISTS, HyperFormula, negate, to_nnf, typecheck
from .model import SymbolicKripke, bit_blast, decode_value, state_assignment
from .qbf import QbfInstance, assemble
from .solver import SAT, UNSAT, BudgetExceeded, SolveResult, solve, solve_external
from .unroll import Semantics, UnrolledAtom

BUGHUNT, FIND = "bughunt", "find"
MODES = (BUGHUNT, FIND)

HOLDS, VIOLATED, INCONCLUSIVE = "holds", "violated", "inconclusive"


class TraceDecodeError(RuntimeError):
    """A certificate does not describe a path of its model (an encoder bug)."""


def decide(mode: str, sem: Semantics | str, status: str) -> str:
    """The normative (mode, semantics, status) -> answer table."""
    sem = Semantics(sem)
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if status not in (SAT, UNSAT):
        raise ValueError(f"unknown status {status!r}")
    if sem.pessimistic and status == SAT:
        return VIOLATED if mode == BUGHUNT else HOLDS
    if not sem.pessimistic and status == UNSAT:
        return HOLDS if mode == BUGHUNT else VIOLATED
    return INCONCLUSIVE


def yes_no(mode: str, status: str | None) -> str:
    """Raw status read in the mode's terms: bug hunting asks 'is it clean?'."""
    if status is None:
        return "UNKNOWN"
    found = status == SAT
    return ("YES" if found else "NO") if mode == FIND else ("NO" if found else "YES")


@dataclass(frozen=True)
class Trace:
    tid: str
    model: str
    steps: tuple[dict, ...]

    def format(self) -> str:
        lines = [f"trace {self.tid} ({self.model}):"]
        for i, rec in enumerate(self.steps):
            vals = ", ".join(f"{k}={_fmt_val(v)}" for k, v in rec.items())
            lines.append(f"  step {i}: {vals}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {"tid": self.tid, "model": self.model, "steps": [dict(s) for s in self.steps]}


def _fmt_val(v) -> str:
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    return str(v)


@dataclass(frozen=True)
class Verdict:
    answer: str
    qbf_status: str | None
    k: int
    semantics: str
    mode: str
    traces: tuple[Trace, ...] = ()
    note: str = ""
    stats: object = field(default=None, compare=False)

    @property
    def yes_no(self) -> str:
        return yes_no(self.mode, self.qbf_status)

    def explanation(self) -> str:
        if self.qbf_status is None:
            return f"no result: {self.note}"
        what = {
            (BUGHUNT, VIOLATED): "counterexample found, the property is violated",
            (BUGHUNT, HOLDS): "no counterexample exists, the property holds",
            (FIND, HOLDS): "witness found, the property holds",
            (FIND, VIOLATED): "no witness exists, the property is violated",
        }.get((self.mode, self.answer), "the bounded result does not decide the property")
        return f"{what} ({self.qbf_status} under -{self.semantics}, k={self.k}, {self.mode} mode)"

    def format(self) -> str:
        lines = [self.yes_no, f"({self.answer}) {self.explanation()}"]
        if self.note and self.qbf_status is not None:
            lines.append(f"note: {self.note}")
        if self.traces:
            lines.append("counterexample:" if self.mode == BUGHUNT or self.answer == VIOLATED else "witness:")
            lines.extend(t.format() for t in self.traces)
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "answer": self.answer,
            "verdict": self.yes_no,
            "qbf_status": self.qbf_status,
            "k": self.k,
            "semantics": self.semantics,
            "mode": self.mode,
            "traces": [t.to_json() for t in self.traces],
            "note": self.note,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


def decode_trace(assignment: Mapping[Hashable, bool], model: SymbolicKripke, tid: str, k: int) -> Trace:
    """Per-step variable values of ``tid``, validated against the model."""
    steps = []
    for i in range(k + 1):
        rec = {}
        for decl in model.vars:
            bits = [bool(assignment.get(UnrolledAtom(tid, i, a), False)) for a in bit_blast(decl)]
            value = decode_value(decl, bits)
            if not decl.boolean and not decl.lo <= value <= decl.hi:
                raise TraceDecodeError(f"{tid} step {i}: {decl.name}={value} outside {decl.lo}..{decl.hi}")
            rec[decl.name] = value
        steps.append(rec)
    bits = [state_assignment(model.vars, s) for s in steps]
    if not evaluate(model.init, bits[0]):
        raise TraceDecodeError(f"{tid}: step 0 is not an initial state of {model.name}")
    for i in range(k):
        pair = {**bits[i], **{a.prime(): v for a, v in bits[i + 1].items()}}
        if not evaluate(model.trans, pair):
            raise TraceDecodeError(f"{tid}: step {i} -> {i + 1} is not a transition of {model.name}")
    return Trace(tid, model.name, tuple(steps))


def query(models, formula: HyperFormula, k: int, sem, mode: str = BUGHUNT) -> QbfInstance:
    """Typecheck and build the QBF asked in ``mode``."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if k < 0:
        raise ValueError("bound k must be non-negative")
    binding = typecheck(formula, models)
    asked = negate(formula) if mode == BUGHUNT else to_nnf(formula)
    return assemble(binding, asked, k, sem, mode)


def check(
    models: Sequence[SymbolicKripke] | Mapping[str, SymbolicKripke],
    formula: HyperFormula,
    k: int,
    sem: Semantics | str,
    mode: str = BUGHUNT,
    *,
    budget: int | None = None,
    solver: str | None = None,
    solver_format: str = "qdimacs",
    timeout: float | None = 60.0,
) -> Verdict:
    sem = Semantics(sem)
    binding = typecheck(formula, models)
    q = query(binding, formula, k, sem, mode)
    try:
        result: SolveResult = (
            solve_external(q, solver, solver_format, timeout) if solver else solve(q, budget)
        )
    except BudgetExceeded as exc:
        return Verdict(INCONCLUSIVE, None, k, sem.value, mode, note=str(exc))
    answer = decide(mode, sem, result.status)
    traces: tuple[Trace, ...] = ()
    note = ""
    if answer != INCONCLUSIVE:
        run_kind, _ = q.leading_run()
        if result.outer_assignment is not None:
            asked_prefix = q.blocks
            tids = []
            for kind, xs in asked_prefix:
                if kind != run_kind:
                    break
                tids.append(xs[0].tid if xs else None)
            traces = tuple(decode_trace(result.outer_assignment, binding[t], t, k) for t in tids if t)
        elif run_kind != EXISTS and result.status == SAT:
            note = "no certificate for a leading universal block"
        elif run_kind == EXISTS and result.status == UNSAT:
            note = "no certificate for a leading existential block"
        else:
            note = "solver returned no certificate"
    return Verdict(answer, result.status, k, sem.value, mode, traces, note, result.stats)
