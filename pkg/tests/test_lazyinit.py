import pytest

import oracles
from lazysl import benchmarks
from lazysl.seplog import NULL, PtrEq, format_heap, free_vars, parse_heap, parse_spec
from lazysl.lazyinit import AbsFact, LFPDivergence, abs_fact, enum, lfp, marked_predicates, rele

PRE = parse_spec(benchmarks.read("add.sl"))[0]
P2 = parse_spec(benchmarks.read("p2.sl"))[0]
PQ = parse_spec("""
data node { int val; node next; }
pred P(x,y) == emp & x = y;
pred Q(x,y) == emp & x = y;
pred R(z) == emp & z = null;
pred pre(a,b) == emp & a = null & b = null \\/ ex n1,n2. a->node{_,n1} * b->node{_,n2} * pre(n1,n2);
""")[0]


def test_rele():
    assert rele({"X"}, parse_heap("pre(X,Y)", PRE), PRE) == {"X", "Y"}
    assert rele({"z"}, parse_heap("pre(X,Y)", PRE), PRE) == {"z"}
    assert rele({"a"}, parse_heap("P(a,b) * Q(b,c)", PQ), PQ) == {"a", "b", "c"}


def test_rele_through_alias():
    assert rele({"a"}, parse_heap("P(b,c) & a = b", PQ), PQ) == {"a", "b", "c"}


def test_marked_predicates():
    h = parse_heap("pre(X,Y)", PRE)
    assert marked_predicates("X", h, PRE) == [0]
    h = parse_heap("pre(X,Y) * R(Z)", PQ)
    assert marked_predicates("X", h, PQ) == [0]
    assert marked_predicates("X", parse_heap("emp & X != null", PRE), PRE) == []


def test_abs_fact_cases():
    assert abs_fact("x", {"x"}, parse_heap("emp & x = null", PRE)) == AbsFact("null")
    h = parse_heap("v->node{_,null} & x = v", PRE)
    assert abs_fact("x", {"v"}, h) == AbsFact("alias", "v")
    assert abs_fact("x", set(), h) == AbsFact("new")
    assert abs_fact("x", {"x"}, parse_heap("pre(x,y)", PRE)) == AbsFact("true")


def test_lfp_example_table():
    r = lfp("x", parse_heap("pre(X,Y)", PRE), {"X", "Y"}, {"x": "X", "y": "Y"}, PRE)
    assert r.iterations == 2
    assert [format_heap(h) for h in r.contexts] == [
        "emp & X = null & Y = null",
        "ex n1,n2. X->node{_,n1} * Y->node{_,n2} * pre(n1,n2)",
    ]
    assert {f for f, _ in r.abstraction(1)} == {AbsFact("null"), AbsFact("alias", "X")}
    assert {f for f, _ in r.abstraction(2)} == {f for f, _ in r.abstraction(1)}


def test_lfp_single_base_case():
    r = lfp("x", parse_heap("R(X)", PQ), {"X"}, {"x": "X"}, PQ)
    assert r.iterations == 1 and len(r.contexts) == 1
    assert PtrEq("X", NULL) in r.contexts[0].pure


def test_lfp_lsegp2_never_null():
    h = parse_heap("lsegP2(R,null,N)", P2, {"N": "int"})
    r = lfp("root", h, {"R"}, {"root": "R"}, P2)
    final = r.abstraction(len(r.rows) - 1)
    assert AbsFact("null") not in {f for f, _ in final}
    # every small model of every context allocates the root
    for c in r.contexts:
        for m in oracles.all_models(c, P2, ["R", "N"], 4, (-2, 2), sorts={"N": "int"}):
            assert m.stack["R"] in m.heap


def test_lfp_iteration_cap():
    with pytest.raises(LFPDivergence):
        lfp("x", parse_heap("pre(X,Y)", PRE), {"X", "Y"}, {"x": "X", "y": "Y"}, PRE, iter_cap=1)


def test_enum_scenario_null():
    h = parse_heap("pre(X,Y) & X = null", PRE)
    (c,) = enum("x", {"x": "X"}, h, PRE)
    assert c.heap == h and c.provenance == "initialized:null"


def test_enum_scenario_unconstrained():
    h = parse_heap("L->node{_,null}", PRE)
    out = enum("x", {"x": "X"}, h, PRE, ctype="node")
    assert [c.provenance for c in out] == ["null", "new", "existing:L"]
    assert len(out[1].heap.points_to) == 2


def test_enum_scenario_predicate():
    out = enum("x", {"x": "X", "y": "Y"}, parse_heap("pre(X,Y)", PRE), PRE)
    assert [format_heap(c.heap) for c in out] == [
        "emp & X = null & Y = null",
        "ex n1,n2. X->node{_,n1} * Y->node{_,n2} * pre(n1,n2)",
    ]


@pytest.mark.parametrize("text, seed", [("pre(X,Y)", "X"), ("pre(X,Y)", "Y"),
                                        ("ex n1,n2. X->node{_,n1} * Y->node{_,n2} * pre(n1,n2)", "n1")])
def test_enum_preserves_models(text, seed):
    """Quick brute-force check over heaps of at most 4 cells; the full suite is in the acceptance tests."""
    h = parse_heap(text, PRE)
    free = sorted(free_vars(h))
    if seed not in free:
        # open the binder so the seed is a free name
        h = type(h)((), h.spatial, h.pure)
        free = sorted(free_vars(h))
    ctx = [c.heap for c in enum(seed.lower(), {seed.lower(): seed}, h, PRE)]
    models = oracles.all_models(h, PRE, free, 4, (-2, 2))
    for m in models:
        assert oracles.holds_any(m, ctx, PRE, range(-2, 3), free)
    for c in ctx:
        for m in oracles.all_models(c, PRE, free, 4, (-2, 2)):
            assert oracles.holds(m, h, PRE, range(-2, 3), free)
