"""QBF decision procedures.

``solve`` is a search over the prefix in order, evaluating the compiled
circuit incrementally: each gate keeps counts of true and false inputs, so
assigning a variable only touches the gates it can affect, and a trail
undoes the work on backtrack. A branch stops as soon as the output gate is
decided. ``brute_eval`` is the plain semantic recursion used as ground truth.
"""

from __future__ import annotations

import logging
import os
import shlex
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Mapping

from .boolexpr import evaluate
from .hyperltl import EXISTS, FORALL
from .qbf import Circuit, QbfInstance, compile_circuit, to_map, to_qcir, to_qdimacs

log = logging.getLogger(__name__)

SAT, UNSAT = "SAT", "UNSAT"


class BudgetExceeded(RuntimeError):
    """The search visited more nodes than allowed; no answer was reached."""

    def __init__(self, budget: int):
        super().__init__(f"solver node budget of {budget} exceeded")
        self.budget = budget


@dataclass(frozen=True)
class SolveStats:
    decisions: int = 0
    seconds: float = 0.0
    engine: str = "internal"


@dataclass(frozen=True)
class SolveResult:
    status: str
    outer_assignment: Mapping[Hashable, bool] | None = None
    stats: SolveStats = field(default_factory=SolveStats, compare=False)

    @property
    def sat(self) -> bool:
        return self.status == SAT


class _Search:
    def __init__(self, c: Circuit, budget: int | None):
        self.c = c
        self.budget = budget
        n = c.nvars
        total = n + len(c.gates)
        self.is_and = [False] * (total + 1)
        self.size = [0] * (total + 1)
        self.parents: list[list[tuple[int, bool]]] = [[] for _ in range(total + 1)]
        for j, (op, lits) in enumerate(c.gates):
            g = n + 1 + j
            self.is_and[g] = op == "and"
            self.size[g] = len(lits)
            for lit in lits:
                self.parents[abs(lit)].append((g, lit > 0))
        self.val: list[bool | None] = [None] * (total + 1)
        self.ntrue = [0] * (total + 1)
        self.nfalse = [0] * (total + 1)
        self.trail: list[int] = []
        for j, (_, lits) in enumerate(c.gates):
            if not lits:  # constant-true gate
                self.assign(n + 1 + j, True)
        self.trail.clear()

        self.order = [x for _, xs in c.blocks for x in xs]
        self.is_exists = [False] * (n + 1)
        for kind, xs in c.blocks:
            for x in xs:
                self.is_exists[x] = kind == EXISTS
        self.run_kind = None
        self.run_len = 0
        for kind, xs in c.blocks:
            if not xs:
                continue
            if self.run_kind is None:
                self.run_kind = kind
            if kind != self.run_kind:
                break
            self.run_len += len(xs)
        self.out = abs(c.output)
        self.out_pos = c.output > 0
        self.nodes = 0
        self.certificate: dict[int, bool] | None = None

    def assign(self, node: int, value: bool) -> None:
        val, ntrue, nfalse, size, is_and = self.val, self.ntrue, self.nfalse, self.size, self.is_and
        stack = [(node, value)]
        while stack:
            nd, v = stack.pop()
            if val[nd] is not None:
                continue
            val[nd] = v
            self.trail.append(nd)
            for g, pos in self.parents[nd]:
                lv = v if pos else not v
                if lv:
                    ntrue[g] += 1
                else:
                    nfalse[g] += 1
                if val[g] is None:
                    if is_and[g]:
                        if not lv:
                            stack.append((g, False))
                        elif ntrue[g] == size[g]:
                            stack.append((g, True))
                    elif lv:
                        stack.append((g, True))
                    elif nfalse[g] == size[g]:
                        stack.append((g, False))

    def undo(self, mark: int) -> None:
        val, trail, ntrue, nfalse = self.val, self.trail, self.ntrue, self.nfalse
        while len(trail) > mark:
            nd = trail.pop()
            v = val[nd]
            for g, pos in self.parents[nd]:
                if v == pos:
                    ntrue[g] -= 1
                else:
                    nfalse[g] -= 1
            val[nd] = None

    def root(self) -> bool | None:
        v = self.val[self.out]
        return v if v is None or self.out_pos else not v

    def snapshot(self) -> None:
        self.certificate = {x: bool(self.val[x]) for x in self.order[: self.run_len]}

    def search(self, depth: int) -> bool:
        self.nodes += 1
        if self.budget is not None and self.nodes > self.budget:
            raise BudgetExceeded(self.budget)
        r = self.root()
        if r is not None:
            if depth <= self.run_len:
                self.snapshot()
            return r
        if depth == self.run_len:
            self.snapshot()
        x = self.order[depth]
        exists = self.is_exists[x]
        for b in (True, False):
            mark = len(self.trail)
            self.assign(x, b)
            res = self.search(depth + 1)
            self.undo(mark)
            if res == exists:
                return res
        return not exists


def solve(q: QbfInstance | Circuit, budget: int | None = None) -> SolveResult:
    """Decide ``q``; the certificate covers the leading run of one quantifier."""
    start = time.perf_counter()
    c = q if isinstance(q, Circuit) else compile_circuit(q)
    s = _Search(c, budget)
    limit = sys.getrecursionlimit()
    if limit < c.nvars + 1000:
        sys.setrecursionlimit(c.nvars + 1000)
    result = s.search(0)
    status = SAT if result else UNSAT
    outer = None
    if s.run_kind is not None and (s.run_kind == EXISTS) == result and s.certificate is not None:
        outer = {c.keys[x - 1]: v for x, v in s.certificate.items()}
    stats = SolveStats(s.nodes, time.perf_counter() - start)
    return SolveResult(status, outer, stats)


class BruteBudgetError(ValueError):
    pass


def brute_eval(q: QbfInstance, max_atoms: int = 24) -> str:
    """Status by plain recursion over every atom in prefix order."""
    order = [(kind, x) for kind, xs in q.blocks for x in xs]
    if len(order) > max_atoms:
        raise BruteBudgetError(f"{len(order)} atoms exceed the brute-force budget of {max_atoms}")
    assignment: dict = {}

    def rec(i: int) -> bool:
        if i == len(order):
            return evaluate(q.matrix, assignment)
        kind, x = order[i]
        outcomes = []
        for b in (True, False):
            assignment[x] = b
            outcomes.append(rec(i + 1))
            if kind == EXISTS and outcomes[-1] or kind == FORALL and not outcomes[-1]:
                break
        del assignment[x]
        return any(outcomes) if kind == EXISTS else all(outcomes)

    return SAT if rec(0) else UNSAT


# --------------------------------------------------------------------------
# external solvers


class ExternalSolverError(RuntimeError):
    kind = "external"


class SolverSpawnError(ExternalSolverError):
    kind = "spawn"


class SolverTimeout(ExternalSolverError):
    kind = "timeout"


class SolverOutputError(ExternalSolverError):
    kind = "output"


def _classify(returncode: int, stdout: str) -> tuple[str | None, list[int]]:
    status = None
    cert: list[int] = []
    for raw in stdout.splitlines():
        parts = raw.split()
        if not parts:
            continue
        head = parts[0]
        found = None
        if head == "s" and len(parts) >= 3 and parts[1] == "cnf" and parts[2] in ("0", "1"):
            found = SAT if parts[2] == "1" else UNSAT
        elif head == "r" and len(parts) >= 2 and parts[1] in (SAT, UNSAT):
            found = parts[1]
        elif head in ("V", "v"):
            for p in parts[1:]:
                lit = int(p)
                if lit != 0:
                    cert.append(lit)
        if found is not None:
            if status is not None and status != found:
                raise SolverOutputError(f"solver printed both {status} and {found}")
            status = found
    by_code = {10: SAT, 20: UNSAT}.get(returncode)
    if status is not None and by_code is not None and status != by_code:
        raise SolverOutputError(f"solver printed {status} but exited with code {returncode}")
    return status or by_code, cert


def solve_external(
    q: QbfInstance,
    command: str,
    fmt: str = "qdimacs",
    timeout: float | None = 60.0,
) -> SolveResult:
    """Run an external QBF solver on ``q`` written in ``fmt``.

    The query file path is appended to ``command``. Exit codes 10/20 and
    the lines ``s cnf 1|0`` and ``r SAT|UNSAT`` are recognised; ``V``/``v``
    certificate lines are decoded through the variable map.
    """
    if fmt not in ("qcir", "qdimacs"):
        raise ValueError(f"unknown format {fmt!r}")
    start = time.perf_counter()
    c = compile_circuit(q)
    text = to_qcir(c) if fmt == "qcir" else to_qdimacs(c)
    argv = shlex.split(command)
    if not argv:
        raise SolverSpawnError("empty solver command")
    with tempfile.TemporaryDirectory(prefix="hyperbmc-") as tmp:
        path = Path(tmp) / f"query.{fmt}"
        path.write_text(text)
        (Path(tmp) / f"query.{fmt}.map").write_text(to_map(c))
        try:
            proc = subprocess.run(
                argv + [str(path)], capture_output=True, text=True, timeout=timeout, env=os.environ.copy()
            )
        except (FileNotFoundError, PermissionError, OSError) as exc:
            raise SolverSpawnError(f"cannot start solver {argv[0]!r}: {exc}") from None
        except subprocess.TimeoutExpired:
            raise SolverTimeout(f"solver {argv[0]!r} did not finish within {timeout} s") from None
    status, cert = _classify(proc.returncode, proc.stdout)
    if status is None:
        head = "\n".join(proc.stdout.splitlines()[:5])
        raise SolverOutputError(
            f"cannot read a verdict from solver {argv[0]!r} (exit code {proc.returncode}); output starts:\n{head}"
        )
    outer = None
    run_kind = next((k for k, xs in c.blocks if xs), None)
    if cert and run_kind is not None and (run_kind == EXISTS) == (status == SAT):
        run = []
        for kind, xs in c.blocks:
            if not xs:
                continue
            if kind != run_kind:
                break
            run.extend(xs)
        signs = {abs(l): l > 0 for l in cert}
        outer = {c.keys[x - 1]: signs.get(x, False) for x in run}
    log.debug("external solver %s: %s in %.3fs", argv[0], status, time.perf_counter() - start)
    return SolveResult(status, outer, SolveStats(0, time.perf_counter() - start, "external"))
