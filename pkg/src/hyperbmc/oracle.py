"""Brute-force bounded semantics over explicit traces.

Nothing here builds propositional formulas: bodies are evaluated directly
on concrete state valuations, and quantifiers range over every path prefix
of the enumerated models. It exists to cross-check the symbolic pipeline.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Mapping, Sequence

from .hyperltl import (
    EXISTS,
    ArithCmp,
    HyperFormula,
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
    VarRef,
    to_nnf,
)
from .model import SymbolicKripke, enumerate_states

PES, OPT, HPES, HOPT = "pes", "opt", "hpes", "hopt"


class OracleBudgetExceeded(RuntimeError):
    pass


def _sem(sem) -> str:
    s = getattr(sem, "value", sem)
    if s not in (PES, OPT, HPES, HOPT):
        raise ValueError(f"unknown semantics {sem!r}")
    return s


def _mentioned(node) -> frozenset:
    if isinstance(node, Prop):
        return frozenset([node.tid])
    if isinstance(node, LNot):
        return _mentioned(node.arg)
    if isinstance(node, ArithCmp):
        return frozenset(t.tid for t in (node.lhs, node.rhs) if isinstance(t, VarRef))
    if isinstance(node, Next):
        return _mentioned(node.arg)
    if isinstance(node, (LAnd, LOr, Until, Release)):
        return _mentioned(node.lhs) | _mentioned(node.rhs)
    return frozenset()


def eval_bounded(
    traces: Mapping[str, Sequence[Mapping[str, object]]],
    body,
    i: int,
    k: int,
    sem,
    halt_vars: Mapping[str, str] | None = None,
) -> bool:
    """Truth of an NNF ``body`` at position ``i`` of the given trace prefixes.

    ``traces[tid]`` lists the k+1 state valuations of that trace. Positions
    past k fall back on the semantics' assumption; the halting variants look
    at the halt variables (``halt_vars[tid]``) at step k.
    """
    sem = _sem(sem)
    halt_vars = halt_vars or {}

    def value(t, step):
        return t.value if isinstance(t, IntLit) else int(traces[t.tid][step][t.var])

    def atomic(node, step):
        if isinstance(node, LTrue):
            return True
        if isinstance(node, LFalse):
            return False
        if isinstance(node, Prop):
            return bool(traces[node.tid][step][node.var])
        if isinstance(node, LNot):
            if not isinstance(node.arg, Prop):
                raise ValueError("oracle expects NNF: negation above a non-atom")
            return not traces[node.arg.tid][step][node.arg.var]
        if isinstance(node, ArithCmp):
            same = value(node.lhs, step) == value(node.rhs, step)
            return same if node.op == "=" else not same
        return None

    @lru_cache(maxsize=None)
    def frozen(node) -> bool:
        # the traces stay in their step-k state forever
        a = atomic(node, k)
        if a is not None:
            return a
        if isinstance(node, LAnd):
            return frozen(node.lhs) and frozen(node.rhs)
        if isinstance(node, LOr):
            return frozen(node.lhs) or frozen(node.rhs)
        if isinstance(node, Next):
            return frozen(node.arg)
        if isinstance(node, (Until, Release)):
            return frozen(node.rhs)
        raise ValueError(f"oracle expects NNF, got {type(node).__name__}")

    def beyond(node) -> bool:
        if sem == PES:
            return False
        if sem == OPT:
            return True
        halted = True
        for tid in _mentioned(node):
            var = halt_vars.get(tid)
            if var is None:
                raise ValueError(f"no halt variable known for trace {tid}")
            halted = halted and bool(traces[tid][k][var])
        if sem == HPES:
            return halted and frozen(node)
        return (not halted) or frozen(node)

    @lru_cache(maxsize=None)
    def ev(node, j) -> bool:
        if j > k:
            return beyond(node)
        a = atomic(node, j)
        if a is not None:
            return a
        if isinstance(node, LAnd):
            return ev(node.lhs, j) and ev(node.rhs, j)
        if isinstance(node, LOr):
            return ev(node.lhs, j) or ev(node.rhs, j)
        if isinstance(node, Next):
            return ev(node.arg, j + 1)
        if isinstance(node, Until):
            return ev(node.rhs, j) or (ev(node.lhs, j) and ev(node, j + 1))
        if isinstance(node, Release):
            return ev(node.rhs, j) and (ev(node.lhs, j) or ev(node, j + 1))
        raise ValueError(f"oracle expects NNF, got {type(node).__name__}")

    return ev(body, i)


def path_prefixes(model: SymbolicKripke, k: int, max_states: int = 4096, max_paths: int = 100_000) -> list[list[dict]]:
    """Every (k+1)-state path prefix from an initial state, as valuations."""
    explicit = enumerate_states(model, max_states=max_states, reachable_only=True)
    paths = [[s] for s in sorted(explicit.initial)]
    for _ in range(k):
        paths = [p + [t] for p in paths for t in explicit.edges[p[-1]]]
        if len(paths) > max_paths:
            raise OracleBudgetExceeded(f"{model.name}: more than {max_paths} path prefixes of length {k + 1}")
    vals = [explicit.valuation(i) for i in range(len(explicit.states))]
    return [[vals[s] for s in p] for p in paths]


def check_brute(
    models: Sequence[SymbolicKripke] | Mapping[str, SymbolicKripke],
    formula: HyperFormula,
    k: int,
    sem,
    max_paths: int = 100_000,
) -> bool:
    """Does ``formula`` hold on the models under the bounded semantics?"""
    sem = _sem(sem)
    f = to_nnf(formula)
    tids = [q.tid for q in f.prefix]
    if isinstance(models, Mapping):
        binding = {t: models[t] for t in tids}
    else:
        models = list(models)
        if len(models) != len(tids):
            raise ValueError(f"{len(models)} models for {len(tids)} quantified traces")
        binding = dict(zip(tids, models))
    cache: dict[int, list] = {}
    paths = {}
    for tid, m in binding.items():
        if id(m) not in cache:
            cache[id(m)] = path_prefixes(m, k, max_paths=max_paths)
        paths[tid] = cache[id(m)]
    halts = {tid: m.halt_var for tid, m in binding.items() if m.halt_var is not None}

    chosen: dict[str, list] = {}

    def rec(level: int) -> bool:
        if level == len(f.prefix):
            return eval_bounded(chosen, f.body, 0, k, sem, halts)
        q = f.prefix[level]
        want = q.kind == EXISTS
        for p in paths[q.tid]:
            chosen[q.tid] = p
            if rec(level + 1) == want:
                del chosen[q.tid]
                return want
        chosen.pop(q.tid, None)
        return not want

    return rec(0)
