import random

import pytest

from hyperbmc.hyperltl import (
    EXISTS,
    FORALL,
    ArithCmp,
    ArityError,
    Finally,
    FormulaError,
    Globally,
    IntLit,
    LAnd,
    LFalse,
    LIff,
    LImplies,
    LNot,
    LOr,
    LTrue,
    Next,
    Prop,
    Release,
    Until,
    VarRef,
    body_tids,
    format_body,
    is_nnf,
    negate,
    nnf,
    parse_formula,
    to_nnf,
    typecheck,
)
from hyperbmc.model import VarDecl, explicit_model
from randgen import random_body


def lasso_eval(node, traces, n, loop):
    """Positions 0..n-1 of a lasso (n-1 continues at ``loop``) where ``node`` holds.

    Standard infinite-word LTL semantics, computed by fixpoint iteration.
    """
    succ = [i + 1 for i in range(n - 1)] + [loop]

    def val(t, i):
        return traces[t.tid][i][t.var] if isinstance(t, VarRef) else t.value

    def go(e):
        name = type(e).__name__
        if name == "LTrue":
            return [True] * n
        if name == "LFalse":
            return [False] * n
        if name == "Prop":
            return [bool(traces[e.tid][i][e.var]) for i in range(n)]
        if name == "ArithCmp":
            return [(val(e.lhs, i) == val(e.rhs, i)) == (e.op == "=") for i in range(n)]
        if name == "LNot":
            return [not v for v in go(e.arg)]
        if name == "Next":
            a = go(e.arg)
            return [a[succ[i]] for i in range(n)]
        if name == "Globally":
            return go(Release(LFalse(), e.arg))
        if name == "Finally":
            return go(Until(LTrue(), e.arg))
        a, b = go(e.lhs), go(e.rhs)
        if name == "LAnd":
            return [x and y for x, y in zip(a, b)]
        if name == "LOr":
            return [x or y for x, y in zip(a, b)]
        if name == "LImplies":
            return [(not x) or y for x, y in zip(a, b)]
        if name == "LIff":
            return [x == y for x, y in zip(a, b)]
        if name == "Until":
            cur = [False] * n
            while True:
                new = [b[i] or (a[i] and cur[succ[i]]) for i in range(n)]
                if new == cur:
                    return cur
                cur = new
        if name == "Release":
            cur = [True] * n
            while True:
                new = [b[i] and (a[i] or cur[succ[i]]) for i in range(n)]
                if new == cur:
                    return cur
                cur = new
        raise AssertionError(name)

    return go(node)


def random_lasso(rng, tids, lo_hi):
    n = rng.randint(1, 5)
    loop = rng.randrange(n)
    traces = {
        t: [
            {"a": rng.random() < 0.5, "b": rng.random() < 0.5, "halt": rng.random() < 0.5,
             "n": rng.randint(*lo_hi[t])}
            for _ in range(n)
        ]
        for t in tids
    }
    return traces, n, loop


TIDS = ["A", "B"]
LOHI = {"A": (0, 3), "B": (0, 3)}


@pytest.mark.parametrize("seed", range(60))
def test_nnf_preserves_and_negation_complements_infinite_semantics(seed):
    rng = random.Random(seed)
    body = random_body(rng, TIDS, LOHI, 4)
    pos, neg = nnf(body), nnf(body, True)
    assert is_nnf(pos) and is_nnf(neg)
    for _ in range(8):
        traces, n, loop = random_lasso(rng, TIDS, LOHI)
        ref = lasso_eval(body, traces, n, loop)
        assert lasso_eval(pos, traces, n, loop) == ref
        assert lasso_eval(neg, traces, n, loop) == [not v for v in ref]


@pytest.mark.parametrize("seed", range(30))
def test_negation_is_involutive(seed):
    rng = random.Random(1000 + seed)
    body = random_body(rng, TIDS, LOHI, 4)
    from hyperbmc.hyperltl import HyperFormula, Quantifier

    f = HyperFormula((Quantifier(FORALL, "A"), Quantifier(EXISTS, "B")), body)
    g = negate(f)
    assert [q.kind for q in g.prefix] == [EXISTS, FORALL]
    assert negate(g) == to_nnf(f)


def test_nnf_shapes():
    p, q = Prop("p", "A"), Prop("q", "A")
    assert nnf(Globally(p)) == Release(LFalse(), p)
    assert nnf(Finally(p), True) == Release(LFalse(), LNot(p))
    assert nnf(LImplies(p, q)) == LOr(LNot(p), q)
    assert nnf(LNot(Until(p, q))) == Release(LNot(p), LNot(q))
    assert nnf(Next(p), True) == Next(LNot(p))
    cmp = ArithCmp("=", VarRef("n", "A"), IntLit(2))
    assert nnf(LNot(cmp)) == ArithCmp("!=", VarRef("n", "A"), IntLit(2))
    assert nnf(LNot(LTrue())) == LFalse()


def test_parse_precedence_and_printing():
    f = parse_formula("forall A. exists B. a[A] /\\ b[B] \\/ !c[A] -> X d[B] U e[A] <-> TRUE")
    assert [(q.kind, q.tid) for q in f.prefix] == [(FORALL, "A"), (EXISTS, "B")]
    assert f.body == LIff(
        LImplies(LOr(LAnd(Prop("a", "A"), Prop("b", "B")), LNot(Prop("c", "A"))),
                 Until(Next(Prop("d", "B")), Prop("e", "A"))),
        LTrue(),
    )
    assert parse_formula("exists A. " + format_body(f.body).replace("[B]", "[A]")).body is not None
    g = parse_formula(str(f))
    assert g == f


def test_implication_is_right_associative_and_until_too():
    f = parse_formula("exists A. a[A] -> b[A] -> c[A]")
    assert f.body == LImplies(Prop("a", "A"), LImplies(Prop("b", "A"), Prop("c", "A")))
    f = parse_formula("exists A. a[A] U b[A] R c[A]")
    assert f.body == Until(Prop("a", "A"), Release(Prop("b", "A"), Prop("c", "A")))


def test_operator_letters_can_be_variable_names():
    f = parse_formula("exists A. G(X[A] /\\ *U[A] = 3*) // comment")
    assert f.body == Globally(LAnd(Prop("X", "A"), ArithCmp("=", VarRef("U", "A"), IntLit(3))))


def test_ni_formula_from_corpus(ni):
    assert [(q.kind, q.tid) for q in ni.prefix] == [(FORALL, "A"), (EXISTS, "B")]
    assert body_tids(ni.body) == {"A", "B"}


@pytest.mark.parametrize("text,kind,pos", [
    ("a[A]", "syntax", (1, 1)),
    ("forall A. a[B]", "scope", (1, 11)),
    ("forall A. forall A. a[A]", "syntax", (1, 18)),
    ("exists A. a[A] /\\", "syntax", (1, 18)),
    ("exists A.\n  *n[A] < 3*", "syntax", (2, 9)),
    ("exists A. a[A] $", "syntax", (1, 16)),
])
def test_parse_errors_are_located(text, kind, pos):
    with pytest.raises(FormulaError) as info:
        parse_formula(text)
    assert info.value.kind == kind
    assert (info.value.line, info.value.col) == pos


def _tiny_model():
    d = [VarDecl.of_bool("a"), VarDecl.of_range("n", 1, 3)]
    return explicit_model(d, [{"a": False, "n": 1}], [0], {0: [0]})


def test_typecheck():
    m = _tiny_model()
    f = parse_formula("forall A. exists B. a[A] /\\ *n[A] = n[B]*")
    assert typecheck(f, [m, m]) == {"A": m, "B": m}
    with pytest.raises(ArityError):
        typecheck(f, [m])
    cases = [
        ("exists A. zz[A]", "undefined"),
        ("exists A. n[A]", "type"),
        ("exists A. *a[A] = 1*", "type"),
        ("exists A. *n[A] = 7*", "bound"),
    ]
    for text, kind in cases:
        with pytest.raises(FormulaError) as info:
            typecheck(parse_formula(text), [m])
        assert info.value.kind == kind, text
