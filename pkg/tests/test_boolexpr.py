import itertools
import random

import pytest

from hyperbmc.boolexpr import (
    FALSE,
    TRUE,
    And,
    Iff,
    Implies,
    MissingAtomError,
    Not,
    Or,
    Var,
    atoms,
    conj,
    disj,
    evaluate,
    node_count,
    substitute,
    to_str,
)
from randgen import random_matrix


def truth(expr, env):
    """Independent tree-recursive evaluator."""
    if expr is TRUE or expr is FALSE:
        return expr.value
    kind = type(expr).__name__
    if kind == "Var":
        return env[expr.key]
    if kind == "Not":
        return not truth(expr.arg, env)
    if kind == "And":
        return all([truth(a, env) for a in expr.args])
    if kind == "Or":
        return any([truth(a, env) for a in expr.args])
    if kind == "Implies":
        return (not truth(expr.lhs, env)) or truth(expr.rhs, env)
    if kind == "Iff":
        return truth(expr.lhs, env) == truth(expr.rhs, env)
    if kind == "Const":
        return expr.value
    raise AssertionError(kind)


a, b = Var("a"), Var("b")


def test_simple_evaluations():
    assert evaluate(a & ~b, {"a": True, "b": False}) is True
    assert evaluate(Iff(a, b), {"a": True, "b": False}) is False
    assert evaluate(Implies(a, b), {"a": False, "b": False}) is True


def test_missing_atom_is_reported():
    with pytest.raises(MissingAtomError) as info:
        evaluate(a & b, {"a": True})
    assert info.value.args[0] == "b"


@pytest.mark.parametrize("seed", range(40))
def test_random_expressions_match_truth_table(seed):
    rng = random.Random(seed)
    keys = list("abcdefgh")
    expr = random_matrix(rng, keys, 6)
    for bits in itertools.product((False, True), repeat=len(keys)):
        env = dict(zip(keys, bits))
        assert evaluate(expr, env) == truth(expr, env)


@pytest.mark.parametrize("seed", range(20))
def test_and_is_compositional(seed):
    rng = random.Random(seed)
    keys = list("abcde")
    e1, e2 = random_matrix(rng, keys, 4), random_matrix(rng, keys, 4)
    for bits in itertools.product((False, True), repeat=len(keys)):
        env = dict(zip(keys, bits))
        assert evaluate(And(e1, e2), env) == (evaluate(e1, env) and evaluate(e2, env))


def test_structural_equality_and_hashing():
    x = And(Var("p"), Not(Var("q")))
    y = And(Var("p"), Not(Var("q")))
    assert x == y and hash(x) == hash(y) and x is not y
    assert x != Or(Var("p"), Not(Var("q")))
    assert len({x, y}) == 1


def test_nodes_are_immutable():
    with pytest.raises(AttributeError):
        a.key = "z"


def test_empty_nary_rejected():
    with pytest.raises(ValueError):
        And()


def test_conj_disj_units():
    assert conj([]) == TRUE and disj([]) == FALSE
    assert conj([a]) is a and disj([b]) is b
    assert conj([a, b]) == And(a, b)


def test_atoms_count_and_render():
    e = Or(And(a, b), And(Not(a), Not(b)))
    assert atoms(e) == {"a", "b"}
    assert node_count(e) == 7  # shared leaves counted once
    assert to_str(e) == "((a & b) | (!a & !b))"


def test_substitute_preserves_sharing_and_semantics():
    shared = And(a, b)
    e = Or(shared, Not(shared))
    out = substitute(e, {"a": TRUE})
    assert out.args[0] is out.args[1].arg
    assert all(evaluate(out, {"b": v}) for v in (False, True))
    assert substitute(e, lambda k: None) == e


def test_deep_dag_does_not_recurse():
    e = Var(0)
    for i in range(1, 20000):
        e = And(e, Var(i % 7))
    assert evaluate(e, {i: True for i in range(7)})
