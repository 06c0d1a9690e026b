import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from lazysl import benchmarks
from lazysl.core_lang import Loc
from lazysl.seplog import (
    NULL, PAnd, POr, PtrEq, PtrNe, PredicateEnv, free_vars, parse_heap, parse_spec, satisfies,
)
from lazysl.solver import (
    SAT, UNKNOWN, UNSAT, ContractError, SolverBudget, augment, base_pairs, check_sat, get_model,
    project, pure_implies,
)

PRE = parse_spec(benchmarks.read("add.sl"))[0]
P2 = parse_spec(benchmarks.read("p2.sl"))[0]
CORPUS = parse_spec(oracles.CORPUS_SPEC)[0]
INT_SORTS = {v: "int" for v in oracles.INTS}


def test_pre_with_null_x():
    v = check_sat(parse_heap("pre(X,Y) & X = null", PRE), PRE)
    assert v.status == SAT
    assert v.model.assignment["X"] is None and v.model.assignment["Y"] is None
    assert v.model.heap == {}


def test_double_points_to_unsat():
    assert check_sat(parse_heap("X->node{_,n} * X->node{_,m}", PRE), PRE).status == UNSAT


def test_lsegp2_n2_model():
    v = check_sat(parse_heap("lsegP2(x,null,n) & n = 2", P2, {"n": "int"}), P2)
    assert v.status == SAT
    assert len(v.model.heap) == 4
    assert {r.fields["val"] for r in v.model.heap.values()} == {0}


def test_model_of_base():
    m = get_model(parse_heap("emp & X = null & Y = null", PRE), PRE)
    assert m.assignment == {"X": None, "Y": None} and m.heap == {}


def test_model_smallest_value():
    m = get_model(parse_heap("ex v. X->node{v,null} & v >= 3", PRE), PRE)
    (rec,) = m.heap.values()
    assert rec.fields["val"] == 3


def test_model_digit_bound():
    h = parse_heap("ex a,b,c,d,n1,n2. X->node{a,n1} * Y->node{b,n2} * n1->node{c,null} * n2->node{d,null}"
                   " & 0 <= a & a < 5 & 0 <= b & b < 5 & 0 <= c & c < 5 & 0 <= d & d < 5", PRE)
    m = get_model(h, PRE)
    assert len(m.heap) == 4
    assert all(0 <= r.fields["val"] <= 4 for r in m.heap.values())
    assert satisfies(m.to_state(["X", "Y"]), parse_heap("pre(X,Y)", PRE), PRE) is True


def test_get_model_requires_sat():
    with pytest.raises(ContractError):
        get_model(parse_heap("emp & X != X", PRE), PRE)


def test_pure_implies():
    assert pure_implies(PAnd((PtrEq("x", "y"), PtrEq("y", NULL))), PtrEq("x", NULL))
    assert not pure_implies(PtrNe("x", "y"), PtrEq("x", "y"))
    assert pure_implies(PAnd((PtrNe("x", "x"),)), PtrEq("a", "b"))
    # a disjunction is valid only if every disjunct implies the goal
    assert pure_implies(POr((PtrEq("x", NULL), PAnd((PtrEq("x", "y"), PtrEq("y", NULL))))), PtrEq("x", NULL))
    assert not pure_implies(POr((PtrEq("x", NULL), PtrEq("x", "y"))), PtrEq("x", NULL))


def test_project():
    assert project(PAnd(()), {"x"}) == PAnd(())
    assert set(project(PAnd((PtrEq("x", "t"), PtrNe("t", "y"))), {"x", "y"}).items) == {PtrNe("x", "y")}
    assert project(PAnd((PtrNe("a", "b"),)), {"a"}) == PAnd(())


def test_base_pairs_pre():
    bp = base_pairs(PRE["pre"], PRE)
    assert bp.complete
    texts = sorted(str(h) for h in bp.formula.disjuncts)
    assert texts == ["a->node{_,_} * b->node{_,_}", "emp & a = null & b = null"]


def test_base_pairs_lsegp2_always_allocates():
    bp = base_pairs(P2["lsegP2"], P2)
    assert bp.complete and len(bp.formula.disjuncts) == 2
    assert all(h.points_to and h.points_to[0].root == "root" for h in bp.formula.disjuncts)


def test_base_pairs_single_base_case():
    env = parse_spec("pred z(v) == emp & v = null;")[0]
    (h,) = base_pairs(env["z"], env).formula.disjuncts
    assert set(h.pure) == {PtrEq("v", NULL)} and not h.spatial


def test_augment_pre_unchanged():
    assert augment(PRE)["pre"].body == PRE["pre"].body


def test_augment_empty_env():
    assert augment(PredicateEnv()).preds == {}


WRAP = parse_spec("""
data node { int val; node next; }
pred v(x,y) == emp & x = null & y = null \\/ ex n. x->node{_,n} * v(n,y);
pred w(x,y) == ex n. x->node{_,n} * w(n,y) \\/ v(x,y);
""")[0]


def test_augment_adds_missing_base_case():
    before = WRAP["w"].body.disjuncts
    after = augment(WRAP)["w"].body.disjuncts
    assert len(after) == len(before) + 1
    (extra,) = [h for h in after if h not in before]
    assert not extra.spatial and set(extra.pure) == {PtrEq("x", NULL), PtrEq("y", NULL)}


BP_CASES = [
    ("add.sl", "pre(A,B)", ("A", "B")),
    ("sll.sl", "sll(A)", ("A",)),
    ("dll.sl", "dll(A,B)", ("A", "B")),
    ("p2.sl", "lsegP2(A,B,N)", ("A", "B", "N")),
    (None, "w(A,B)", ("A", "B")),
]


@pytest.mark.parametrize("fname, text, params", BP_CASES, ids=[c[1] for c in BP_CASES])
def test_base_pairs_against_models(fname, text, params):
    """Every small model is summarized by some base pair, and every base pair has a model."""
    env = WRAP if fname is None else parse_spec(benchmarks.read(fname))[0]
    h = parse_heap(text, env, {"N": "int"})
    name = h.preds[0].name
    formals = env[name].params
    pairs = [oracles.subst_params(b, dict(zip(formals, params))) for b in base_pairs(env[name], env).formula.disjuncts]
    models = oracles.all_models(h, env, params, 4, (-2, 2), sorts={"N": "int"})
    assert models
    used = set()
    for m in models:
        hits = [i for i, b in enumerate(pairs) if oracles.base_pair_matches(b, params, m.stack, m.heap)]
        assert hits, m
        used.update(hits)
    assert used == set(range(len(pairs)))


# --- random corpus against the brute-force generator

BUDGET = SolverBudget(unfold_depth=3, int_lo=-3, int_hi=3)


def judge(text):
    h = parse_heap(text, CORPUS, INT_SORTS)
    fv = sorted(free_vars(h))
    v = check_sat(h, CORPUS, BUDGET)
    m = oracles.has_model(h, CORPUS, fv, 6, (-3, 3), sorts=INT_SORTS)
    if v.status == SAT:
        state = v.model.to_state(fv)
        assert satisfies(state, h, CORPUS) is True, text
        assert oracles.holds(state, h, CORPUS, range(-3, 4), fv), text
        assert m is not None or len(state.heap) > 6, text
    elif v.status == UNSAT:
        assert m is None, (text, m)
    return v.status


@settings(max_examples=150, deadline=None)
@given(st.randoms(use_true_random=False))
def test_check_sat_agrees_with_enumeration(rng):
    judge(oracles.random_formula_text(rng))


def test_check_sat_corpus_unknown_rate():
    rng = random.Random(7)
    verdicts = [judge(oracles.random_formula_text(rng)) for _ in range(200)]
    assert verdicts.count(UNKNOWN) < 0.05 * len(verdicts)
    assert verdicts.count(SAT) and verdicts.count(UNSAT)


def test_verdict_is_deterministic():
    h = parse_heap("pre(x,y) * sll(z) & x != null", CORPUS)
    a, b = check_sat(h, CORPUS, BUDGET), check_sat(h, CORPUS, SolverBudget(unfold_depth=3, int_lo=-3, int_hi=3))
    assert a.status == b.status == SAT
    assert a.model.assignment == b.model.assignment
    assert isinstance(a.model.assignment["x"], Loc)
