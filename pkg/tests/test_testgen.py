import json

import pytest
from hypothesis import given, settings, strategies as st

from lazysl import benchmarks
from lazysl.core_lang import Loc, Record, parse_program
from lazysl.seplog import parse_heap, parse_spec, satisfies
from lazysl.solver import Model, get_model
from lazysl.testgen import (
    ModelError, TestInput, emit, is_fully_initialized, load, measure_coverage, model_to_input, validate,
)

ADD = parse_program(benchmarks.read("add.il"))
PRE = parse_spec(benchmarks.read("add.sl"))[0]
DLL = parse_spec(benchmarks.read("dll.sl"))[0]
PARAMS = [("x", "node"), ("y", "node")]


def lists(*lengths, names=("x", "y")):
    heap, stack, k = {}, {}, 1
    for name, n in zip(names, lengths):
        stack[name] = Loc(f"L{k}") if n else None
        for i in range(n):
            heap[Loc(f"L{k}")] = Record("node", {"val": 0, "next": Loc(f"L{k + 1}") if i + 1 < n else None})
            k += 1
    return TestInput(stack, heap)


def test_null_model_has_empty_heap():
    t = model_to_input(Model({"x": None, "y": None}, {}, None), PARAMS)
    assert t.heap == {} and t.stack == {"x": None, "y": None}


def test_one_digit_pre_model():
    h = parse_heap("ex a,b. x->node{a,null} * y->node{b,null} & 0 <= a & a < 5 & 0 <= b & b < 5", PRE)
    t = model_to_input(get_model(h, PRE), PARAMS, ADD)
    assert len(t.heap) == 2
    for v in t.stack.values():
        assert t.heap[v].fields["next"] is None and 0 <= t.heap[v].fields["val"] <= 4
    assert validate(t, parse_heap("pre(x,y)", PRE), PRE)


def test_dll_model_prev_inverts_next():
    h = parse_heap("dll(head,null) & head != null", DLL)
    prog = parse_program(benchmarks.read("indexOf.il"))
    m = get_model(parse_heap("ex a. head->dnode{_,a,null} * dll(a,head) & a != null", DLL), DLL)
    t = model_to_input(m, prog.params, prog)
    assert len(t.heap) >= 2
    for loc, rec in t.heap.items():
        nxt = rec.fields["next"]
        if nxt is not None:
            assert t.heap[nxt].fields["prev"] == loc
    assert validate(t, h, DLL)


def test_dangling_model_location_rejected():
    m = Model({"x": Loc("L1"), "y": None}, {Loc("L1"): Record("node", {"val": 0, "next": Loc("L7")})}, None)
    with pytest.raises(ModelError):
        model_to_input(m, PARAMS)


def test_renumbering_is_bfs_from_params():
    m = Model({"x": Loc("L5"), "y": Loc("L2")},
              {Loc("L5"): Record("node", {"val": 1, "next": Loc("L9")}),
               Loc("L9"): Record("node", {"val": 2, "next": None}),
               Loc("L2"): Record("node", {"val": 3, "next": None})}, None)
    t = model_to_input(m, PARAMS)
    assert t.stack == {"x": Loc("L1"), "y": Loc("L3")}
    assert t.heap[Loc("L2")].fields["val"] == 2


def test_validate_examples():
    pre = parse_heap("pre(x,y)", PRE)
    assert validate(lists(0, 0), pre, PRE)
    cyc = TestInput({"x": Loc("L1"), "y": Loc("L2")},
                    {Loc("L1"): Record("node", {"val": 0, "next": Loc("L1")}),
                     Loc("L2"): Record("node", {"val": 0, "next": None})})
    assert not validate(cyc, pre, PRE)
    assert not validate(lists(1, 2), pre, PRE)


def test_validate_treats_unknown_as_failure():
    env = parse_spec("data node { int val; node next; }\n"
                     "pred Z(x,n) == emp & n = 0 \\/ ex m. Z(x,m) & n = m + 1;")[0]
    t = TestInput({"x": None, "k": 5}, {})
    h = parse_heap("Z(x,k)", env, {"k": "int"})
    assert satisfies(t.state(), h, env, 2) is None
    assert not validate(t, h, env, budget=2)
    assert validate(t, h, env, budget=10)


def test_coverage_add():
    rep = measure_coverage(ADD, [lists(0, 0), lists(1, 1), lists(2, 2)])
    assert rep.hits[(4, "T")] and rep.hits[(4, "F")]
    assert rep.ratio == 1.0 and rep.missing() == []


def test_coverage_empty_inputs():
    rep = measure_coverage(ADD, [])
    assert rep.covered == 0 and rep.ratio == 0.0 and rep.total == 4


def test_coverage_straight_line_is_vacuous():
    prog = parse_program("data node { int val; node next; }\nprogram p(node x)\n0: x := null\n")
    rep = measure_coverage(prog, [TestInput({"x": None}, {})])
    assert rep.vacuous and rep.total == 0 and rep.ratio == 1.0
    assert rep.to_json() == {"branches": [], "covered": 0, "total": 0}


def test_json_examples():
    assert lists(0, 0).dumps() == '{"stack":{"x":null,"y":null},"heap":[]}\n'
    one = json.loads(lists(1, 0).dumps())
    assert one["heap"] == [{"loc": "L1", "type": "node", "fields": {"val": 0, "next": None}}]
    assert one["stack"] == {"x": {"ref": "L1"}, "y": None}


def test_is_fully_initialized():
    assert is_fully_initialized(lists(2, 1), ADD) == []
    bad = TestInput({"x": Loc("L1"), "y": Loc("L4")}, {Loc("L1"): Record("node", {"val": True})})
    problems = is_fully_initialized(bad, ADD)
    assert any("next missing" in p for p in problems)
    assert any("not an int" in p for p in problems)
    assert any("parameter y dangles" in p for p in problems)


@st.composite
def inputs(draw):
    n = draw(st.integers(0, 5))
    locs = [Loc(f"L{i + 1}") for i in range(n)]
    ptr = st.sampled_from([None] + locs)
    heap = {l: Record("node", {"val": draw(st.integers(-100, 100)), "next": draw(ptr)}) for l in locs}
    return TestInput({"x": draw(ptr), "y": draw(ptr), "k": draw(st.integers(-9, 9)), "b": draw(st.booleans())}, heap)


@settings(max_examples=100, deadline=None)
@given(inputs())
def test_json_round_trip(t):
    back = TestInput.from_json(t.dumps())
    assert back.same_input(t)
    assert back.dumps() == t.dumps()


def test_emit_and_load(tmp_path):
    t = lists(2, 2)
    p = emit(t, tmp_path / "a" / "t.json")
    assert load(p).same_input(t)


def length_inputs():
    return st.tuples(st.integers(0, 3), st.integers(0, 3)).map(lambda p: lists(*p))


@settings(max_examples=40, deadline=None)
@given(st.lists(length_inputs(), max_size=4), st.lists(length_inputs(), max_size=3))
def test_coverage_monotone(base, extra):
    small = measure_coverage(ADD, base)
    big = measure_coverage(ADD, base + extra)
    covered = {k for k, n in small.hits.items() if n}
    assert covered <= {k for k, n in big.hits.items() if n}
    assert big.covered >= small.covered
