import pytest
from hypothesis import given, settings, strategies as st

import oracles
from lazysl import benchmarks
from lazysl.core_lang import ConcreteState, Loc, Record
from lazysl.seplog import (
    NULL, LinCon, PAnd, PointsTo, PredApp, PtrEq, PtrNe, SpecError, SymHeap, alias, format_heap,
    free_vars, parse_heap, parse_spec, satisfies, subst, unfold,
)


def env_of(fname):
    return parse_spec(benchmarks.read(fname))[0]


PRE = env_of("add.sl")
P2 = env_of("p2.sl")
DLL = env_of("dll.sl")
SLL = env_of("sll.sl")


def test_pre_definition():
    p = PRE["pre"]
    assert p.params == ("a", "b")
    assert len(p.body.disjuncts) == 2
    base, rec = p.body.disjuncts
    assert base.spatial == () and set(base.pure) == {PtrEq("a", NULL), PtrEq("b", NULL)}
    assert [type(a).__name__ for a in rec.spatial] == ["PointsTo", "PointsTo", "PredApp"]


def test_lsegp2_definition():
    base, rec = P2["lsegP2"].body.disjuncts
    assert base.spatial == (PointsTo("root", "node", (0, "end")),)
    assert LinCon((("n", 1),), 0, "==") in base.pure
    assert [a.name for a in rec.preds] == ["lsegP2", "lsegP2"]
    assert P2["lsegP2"].sorts[2] == "int"


@pytest.mark.parametrize("text", [
    "data node { int val; node next; }\npred bad(x) == x->node{_,z};",
    "pred p(x) == q(x);",
    "data node { int val; node next; }\npred p(x) == x->node{1};",
    "pred p(x) == x = ;",
])
def test_spec_errors(text):
    with pytest.raises(SpecError):
        parse_spec(text)


def test_subst_simple():
    h = SymHeap((), (), (PtrEq("x", NULL),))
    assert subst(h, {"x": "y"}).pure == (PtrEq("y", NULL),)


def test_subst_avoids_capture():
    h = parse_heap("ex n. x->node{_,n}", PRE)
    out = subst(h, {"x": "n"})
    (pt,) = out.points_to
    assert pt.root == "n"
    assert pt.args[1] != "n" and pt.args[1] in out.bound


def test_subst_predicate_args():
    h = SymHeap((), (PredApp("pre", ("a", "b")),), ())
    assert format_heap(subst(h, {"a": "X", "b": "Y"})) == "pre(X,Y)"


def test_free_vars():
    assert free_vars(parse_heap("ex n1,n2. X->node{_,n1} * pre(n1,n2)", PRE)) == {"X"}
    assert free_vars(parse_heap("emp & x = null & y = null", PRE)) == {"x", "y"}
    assert free_vars(parse_heap("emp", PRE)) == frozenset()


def test_unfold_pre():
    out = unfold(parse_heap("pre(X,Y)", PRE), 0, PRE)
    assert [format_heap(h) for h in out] == [
        "emp & X = null & Y = null",
        "ex n1,n2. X->node{_,n1} * Y->node{_,n2} * pre(n1,n2)",
    ]


def test_unfold_lsegp2():
    base, rec = unfold(parse_heap("lsegP2(x,null,n)", P2), 0, P2)
    assert base.points_to == [PointsTo("x", "node", (0, NULL))]
    assert len(rec.preds) == 2 and not rec.points_to


def test_unfold_without_occurrence():
    with pytest.raises(SpecError):
        unfold(parse_heap("emp", PRE), 0, PRE)


def two_lists(m, n):
    heap, stack = {}, {}
    k = 1
    for name, length in (("x", m), ("y", n)):
        first = None
        for i in range(length):
            loc = Loc(f"L{k + i}")
            nxt = Loc(f"L{k + i + 1}") if i + 1 < length else None
            heap[loc] = Record("node", {"val": 0, "next": nxt})
            first = first or loc
        stack[name] = first
        k += length
    return ConcreteState(heap, stack)


def test_satisfies_examples():
    pre = parse_heap("pre(x,y)", PRE)
    assert satisfies(ConcreteState({}, {"x": None, "y": None}), pre, PRE) is True
    assert satisfies(two_lists(2, 3), pre, PRE) is False
    assert satisfies(two_lists(2, 2), pre, PRE) is True
    one = ConcreteState({Loc("L1"): Record("node", {"val": 0, "next": None})}, {"r": Loc("L1"), "n": 0})
    assert satisfies(one, parse_heap("lsegP2(r,null,n)", P2, {"n": "int"}), P2) is True


def test_satisfies_rejects_cycle_and_garbage():
    pre = parse_heap("pre(x,y)", PRE)
    cyc = ConcreteState({Loc("L1"): Record("node", {"val": 0, "next": Loc("L1")}),
                         Loc("L2"): Record("node", {"val": 0, "next": None})}, {"x": Loc("L1"), "y": Loc("L2")})
    assert satisfies(cyc, pre, PRE) is False
    extra = two_lists(1, 1)
    extra.heap[Loc("L9")] = Record("node", {"val": 0, "next": None})
    assert satisfies(extra, pre, PRE) is False


def test_alias():
    h = parse_heap("ex v,n. x->node{v,n} & x = y & v > 0", PRE)
    assert set(alias(h).items) == {PtrEq("x", "y")}
    assert alias(parse_heap("emp", PRE)) == PAnd(())
    assert set(alias(parse_heap("pre(a,b) & a != b", PRE)).items) == {PtrNe("a", "b")}


# --- cross-check against the brute-force checker on random small states

@st.composite
def node_states(draw, names=("x", "y"), max_cells=4):
    n = draw(st.integers(0, max_cells))
    locs = [Loc(f"L{i + 1}") for i in range(n)]
    ptr = st.sampled_from([None] + locs + [Loc("L9")])
    heap = {l: Record("node", {"val": draw(st.integers(-2, 2)), "next": draw(ptr)}) for l in locs}
    stack = {v: draw(ptr) for v in names}
    return ConcreteState(heap, stack)


@st.composite
def dnode_states(draw, max_cells=4):
    n = draw(st.integers(0, max_cells))
    locs = [Loc(f"L{i + 1}") for i in range(n)]
    ptr = st.sampled_from([None] + locs)
    heap = {l: Record("dnode", {"val": draw(st.integers(-2, 2)), "next": draw(ptr), "prev": draw(ptr)})
            for l in locs}
    return ConcreteState(heap, {"x": draw(ptr), "p": draw(ptr)})


def agree(state, text, env, sorts=None):
    h = parse_heap(text, env, sorts)
    lib = satisfies(state, h, env)
    ref = oracles.holds(state, h, env, range(-2, 3))
    assert lib is not None
    assert lib == ref, (text, state)


@settings(max_examples=200, deadline=None)
@given(node_states())
def test_pre_matches_checker(s):
    agree(s, "pre(x,y)", PRE)


@settings(max_examples=200, deadline=None)
@given(node_states(names=("x",)))
def test_sll_matches_checker(s):
    agree(s, "sll(x)", SLL)


@settings(max_examples=200, deadline=None)
@given(dnode_states())
def test_dll_matches_checker(s):
    agree(s, "dll(x,p)", DLL)


@settings(max_examples=150, deadline=None)
@given(node_states(names=("x",)), st.integers(-1, 2))
def test_lsegp2_matches_checker(s, n):
    for rec in s.heap.values():
        rec.fields["val"] = 0
    s.stack["n"] = n
    agree(s, "lsegP2(x,null,n)", P2, {"n": "int"})
