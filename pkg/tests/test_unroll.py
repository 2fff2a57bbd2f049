import itertools
import random

import pytest

from hyperbmc.boolexpr import FALSE, TRUE, atoms, evaluate, node_count
from hyperbmc.hyperltl import (
    LAnd,
    LNot,
    Next,
    Prop,
    Release,
    Until,
    LFalse,
    LTrue,
    nnf,
)
from hyperbmc.model import VarDecl, bit_blast, explicit_model, state_assignment
from hyperbmc.oracle import eval_bounded, path_prefixes
from hyperbmc.unroll import (
    Semantics,
    UnrollError,
    UnrolledAtom,
    check_halting,
    halted_predicate,
    unroll_body,
    unroll_model,
    unrolled_atoms,
)
from randgen import random_body, random_model

SEMS = list(Semantics)


def trace_assignment(model, tid, path):
    env = {}
    for step, val in enumerate(path):
        for a, b in state_assignment(model.vars, val).items():
            env[UnrolledAtom(tid, step, a)] = b
    return env


@pytest.mark.parametrize("seed", range(12))
def test_model_unrolling_accepts_exactly_the_paths(seed):
    rng = random.Random(seed)
    m = random_model(rng, max_states=4)
    k = rng.randint(0, 1)  # 2^(6(k+1)) assignments are enumerated
    formula = unroll_model(m, "A", k)
    xs = unrolled_atoms(m, "A", k)
    assert atoms(formula) <= set(xs)
    paths = {tuple(tuple(sorted(s.items())) for s in p) for p in path_prefixes(m, k)}
    accepted = set()
    for bits in itertools.product((False, True), repeat=len(xs)):
        env = dict(zip(xs, bits))
        if evaluate(formula, env):
            path = []
            for step in range(k + 1):
                val = {}
                for d in m.vars:
                    ws = [env[UnrolledAtom("A", step, a)] for a in bit_blast(d)]
                    val[d.name] = ws[0] if d.boolean else int("".join("1" if w else "0" for w in ws), 2)
                path.append(tuple(sorted(val.items())))
            accepted.add(tuple(path))
    assert accepted == paths


def test_unrolled_atom_order_is_step_major():
    d = [VarDecl.of_bool("p"), VarDecl.of_range("n", 0, 2)]
    m = explicit_model(d, [{"p": False, "n": 0}], [0], {0: [0]})
    xs = unrolled_atoms(m, "A", 1)
    assert [(x.step, str(x.base)) for x in xs] == [
        (0, "p_0"), (0, "n_1"), (0, "n_0"), (1, "p_0"), (1, "n_1"), (1, "n_0"),
    ]


@pytest.mark.parametrize("seed", range(40))
def test_body_unrolling_agrees_with_direct_evaluation(seed):
    rng = random.Random(seed)
    mA, mB = random_model(rng, name="mA"), random_model(rng, name="mB")
    binding = {"A": mA, "B": mB}
    lo_hi = {t: (m.decl("n").lo, m.decl("n").hi) for t, m in binding.items()}
    body = nnf(random_body(rng, ["A", "B"], lo_hi, 4))
    k = rng.randint(0, 3)
    pa, pb = path_prefixes(mA, k), path_prefixes(mB, k)
    for sem in SEMS:
        enc = unroll_body(body, k, sem, binding)
        for _ in range(6):
            ta, tb = rng.choice(pa), rng.choice(pb)
            env = {**trace_assignment(mA, "A", ta), **trace_assignment(mB, "B", tb)}
            expect = eval_bounded({"A": ta, "B": tb}, body, 0, k, sem, {"A": "halt", "B": "halt"})
            assert evaluate(enc, env) == expect, (sem, k, body)


def _loop_model():
    d = [VarDecl.of_bool("p"), VarDecl.of_bool("halt")]
    return explicit_model(d, [{"p": False, "halt": False}], [0], {0: [0]}, halt_var="halt")


def test_base_cases_of_eventually_never_true():
    m = _loop_model()
    f = Until(LTrue(), Prop("p", "A"))
    env = trace_assignment(m, "A", [{"p": False, "halt": False}] * 3)
    results = {s: evaluate(unroll_body(f, 2, s, {"A": m}), env) for s in SEMS}
    assert results == {Semantics.PES: False, Semantics.OPT: True, Semantics.HPES: False, Semantics.HOPT: True}
    g = Release(LFalse(), LNot(Prop("p", "A")))
    results = {s: evaluate(unroll_body(g, 2, s, {"A": m}), env) for s in SEMS}
    assert results == {Semantics.PES: False, Semantics.OPT: True, Semantics.HPES: False, Semantics.HOPT: True}


def test_halted_traces_are_decided_by_their_last_state():
    m = _loop_model()
    halted = [{"p": False, "halt": True}] * 2
    env = trace_assignment(m, "A", halted)
    always_not_p = Release(LFalse(), LNot(Prop("p", "A")))
    assert evaluate(unroll_body(always_not_p, 1, "hpes", {"A": m}), env) is True
    assert evaluate(unroll_body(Until(LTrue(), Prop("p", "A")), 1, "hopt", {"A": m}), env) is False


def test_halted_predicate_scope():
    m = _loop_model()
    binding = {"A": m, "B": m}
    assert halted_predicate([], 2, binding) == TRUE
    h = halted_predicate(["B", "A"], 2, binding)
    assert [str(a) for a in sorted(atoms(h))] == ["halt_0[A]@2", "halt_0[B]@2"]
    # the body beyond k only mentions A, so B's halt bit never appears
    enc = unroll_body(Next(Next(Prop("p", "A"))), 0, "hpes", binding)
    assert {a.tid for a in atoms(enc)} == {"A"}


def test_memoization_keeps_nested_until_linear():
    p, q = Prop("p", "A"), Prop("halt", "A")
    f = Until(p, Until(q, Until(p, q)))
    sizes = [node_count(unroll_body(f, k, "pes", {"A": _loop_model()})) for k in (10, 20, 40)]
    assert sizes[2] - sizes[1] == 2 * (sizes[1] - sizes[0])


def test_errors():
    m = _loop_model()
    with pytest.raises(UnrollError, match="negation normal form"):
        unroll_body(LNot(LAnd(Prop("p", "A"), Prop("p", "A"))), 1, "pes", {"A": m})
    with pytest.raises(UnrollError):
        unroll_body(Prop("p", "A"), 1, "pes", {"A": m}, i=3)
    with pytest.raises(UnrollError):
        unroll_model(m, "A", -1)
    plain = explicit_model([VarDecl.of_bool("p")], [{"p": True}], [0], {0: [0]})
    with pytest.raises(UnrollError, match="halt variable"):
        check_halting(Semantics.HOPT, {"A": plain})
    check_halting(Semantics.OPT, {"A": plain})


def test_pes_beyond_bound_is_false():
    m = _loop_model()
    assert unroll_body(Next(Prop("p", "A")), 0, "pes", {"A": m}) == FALSE
