"""End-to-end acceptance checks over the bundled benchmark suite.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints one
PASS/FAIL line per criterion.
"""
import random
import time
from pathlib import Path

import pytest

import oracles
from lazysl import benchmarks
from lazysl.cli import RunConfig, run_pipeline
from lazysl.core_lang import Loc, run
from lazysl.lazyinit import AbsFact, enum, lfp
from lazysl.seplog import SymHeap, free_vars, parse_heap, parse_spec, satisfies
from lazysl.solver import SAT, UNKNOWN, UNSAT, SolverBudget, check_sat
from lazysl.symexec import ASSERTION, NORMAL, ExplorationBounds, explore
from lazysl.testgen import model_to_input, validate

GOLDEN = Path(__file__).parent / "golden"


def criterion(n, title):
    return pytest.mark.criterion(n, title)


@pytest.fixture(scope="module")
def suite_runs(tmp_path_factory):
    start = time.monotonic()
    runs = {}
    for b in benchmarks.SUITE:
        cfg = RunConfig(b.path(b.program_file), b.path(b.spec_file), b.pre, b.loop_bound, b.depth,
                        out=tmp_path_factory.mktemp(b.name))
        runs[b.name] = run_pipeline(cfg)
    return runs, time.monotonic() - start


@criterion(1, "every emitted input satisfies its precondition")
def test_validity(suite_runs, record_property):
    runs, seconds = suite_runs
    total = bad = 0
    for name, res in runs.items():
        b = benchmarks.get(name)
        _, env, pre = b.load()
        for t in res.tests:
            total += 1
            bad += not validate(t, pre, env)
        assert res.valid == len(res.tests), name
    record_property("detail", f"{total - bad}/{total} valid over {len(runs)} methods in {seconds:.1f}s")
    assert bad == 0 and total > 0
    assert {b.family for b in benchmarks.SUITE} >= {"SLL", "DLL", "BST", "Stack", "lsegP2"}
    assert seconds < 60


@criterion(2, "all feasible branches covered at the per-method loop bounds")
def test_branch_coverage(suite_runs, record_property):
    runs, _ = suite_runs
    for name, res in runs.items():
        b = benchmarks.get(name)
        excluded = {br for br, _ in b.infeasible}
        assert set(res.coverage.missing()) == excluded, name
    assert {b.name: b.loop_bound for b in benchmarks.SUITE if b.name in ("add", "indexOf", "bst_find", "bst_insert")} \
        == {"add": 3, "indexOf": 2, "bst_find": 2, "bst_insert": 2}
    listed = [f"{b.name} {s}{d}" for b in benchmarks.SUITE for (s, d), _ in b.infeasible]
    record_property("detail", f"{len(runs)} methods at 100% of feasible; excluded: {', '.join(listed) or 'none'}")


def test_listed_branches_are_infeasible():
    """No small valid input reaches a branch the suite declares infeasible."""
    for b in benchmarks.SUITE:
        if not b.infeasible:
            continue
        prog, env, pre = b.load()
        params = [n for n, _ in prog.params]
        sorts = {n: t for n, t in prog.params if t == "int"}
        reached = set()
        for d in pre.disjuncts:
            for m in oracles.all_models(d, env, params, 4, (-2, 2), sorts=sorts):
                reached |= set(run(prog, m).branches)
        assert reached and not reached & {br for br, _ in b.infeasible}


@criterion(3, "fixed point on pre(X,Y) matches the golden dump")
def test_lfp_golden():
    env = parse_spec(benchmarks.read("add.sl"))[0]
    r = lfp("x", parse_heap("pre(X,Y)", env), {"X", "Y"}, {"x": "X", "y": "Y"}, env)
    assert r.dump() == (GOLDEN / "lfp_pre.txt").read_text()
    assert r.iterations == 2 and len(r.contexts) == 2
    assert {f for f, _ in r.abstraction(1)} == {AbsFact("null"), AbsFact("alias", "X")}


ENUM_CASES = [
    ("add.sl", "pre(X,Y)", "X"),
    ("add.sl", "pre(X,Y)", "Y"),
    ("add.sl", "pre(X,Y) & X != null", "Y"),
    ("add.sl", "ex n1,n2. X->node{_,n1} * Y->node{_,n2} * pre(n1,n2)", "n1"),
    ("sll.sl", "sll(X)", "X"),
    ("sll.sl", "ex v,n. X->node{v,n} * sll(n)", "n"),
    ("dll.sl", "dll(X,P)", "X"),
    ("dll.sl", "dll(X,P)", "P"),
    ("dll.sl", "ex n. X->dnode{_,n,P} * dll(n,X)", "n"),
    ("bst.sl", "tshape(X)", "X"),
    ("bst.sl", "ex v,l,r. X->tree{v,l,r} * tshape(l) * tshape(r)", "l"),
    ("bst.sl", "bst(X,-2,2)", "X"),
    ("p2.sl", "lsegP2(X,E,N)", "X"),
    ("p2.sl", "lsegP2(X,E,N)", "E"),
    ("p2.sl", "ex q. lsegP2(X,q,N) * lsegP2(q,E,N)", "q"),
]


@criterion(4, "enum contexts are sound and complete against brute-force models")
@pytest.mark.parametrize("spec, text, seed", ENUM_CASES)
def test_enum_sound_and_complete(spec, text, seed, record_property):
    env = parse_spec(benchmarks.read(spec))[0]
    h = parse_heap(text, env, {"N": "int"})
    if seed not in free_vars(h):
        # open the binders so the seed names a free reference
        h = SymHeap((), h.spatial, h.pure)
    free = sorted(free_vars(h))
    sorts = {"N": "int", "v": "int"}
    ints = range(-2, 3)
    contexts = [c.heap for c in enum(seed, {seed: seed}, h, env)]
    models = oracles.all_models(h, env, free, 4, (-2, 2), sorts=sorts)
    assert models
    missed = [m for m in models if not oracles.holds_any(m, contexts, env, ints, free)]
    extra = [m for c in contexts for m in oracles.all_models(c, env, free, 4, (-2, 2), sorts=sorts)
             if not oracles.holds(m, h, env, ints, free)]
    assert not missed and not extra


@criterion(5, "check_sat agrees with exhaustive small-model search")
def test_solver_oracle_equivalence(record_property):
    env = parse_spec(oracles.CORPUS_SPEC)[0]
    sorts = {v: "int" for v in oracles.INTS}
    budget = SolverBudget(unfold_depth=3, int_lo=-3, int_hi=3)
    rng = random.Random(2024)
    counts = {SAT: 0, UNSAT: 0, UNKNOWN: 0}
    disagreements = []
    n = 1000
    for _ in range(n):
        text = oracles.random_formula_text(rng)
        h = parse_heap(text, env, sorts)
        fv = sorted(free_vars(h))
        v = check_sat(h, env, budget)
        counts[v.status] += 1
        if v.status == UNKNOWN:
            continue
        witness = oracles.has_model(h, env, fv, 6, (-3, 3), sorts=sorts)
        if v.status == SAT:
            state = v.model.to_state(fv)
            ok = satisfies(state, h, env) is True and oracles.holds(state, h, env, range(-3, 4), fv)
            if not ok or (witness is None and len(state.heap) <= 6):
                disagreements.append(text)
        elif witness is not None:
            disagreements.append(text)
    record_property("detail", f"{n} formulas: {counts[SAT]} sat, {counts[UNSAT]} unsat, "
                              f"{counts[UNKNOWN]} unknown, {len(disagreements)} disagreements")
    assert not disagreements, disagreements[:5]
    assert counts[UNKNOWN] < 0.05 * n


@criterion(6, "lsegP2 models have exactly 2^n zero-payload nodes")
@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_lsegp2_sizes(n):
    env = parse_spec(benchmarks.read("p2.sl"))[0]
    h = parse_heap(f"lsegP2(x,null,n) & n = {n}", env, {"n": "int"})
    v = check_sat(h, env)
    assert v.status == SAT
    assert len(v.model.heap) == 2 ** n
    assert all(rec.fields["val"] == 0 for rec in v.model.heap.values())
    assert satisfies(v.model.to_state(["x", "n"]), h, env) is True


@criterion(7, "dll inputs have concrete prev fields that invert next")
def test_dll_prev_fields(suite_runs, record_property):
    runs, _ = suite_runs
    checked = 0
    for name in ("indexOf", "dll_push"):
        for t in runs[name].tests:
            head = t.stack["head"]
            for loc, rec in t.heap.items():
                assert rec.ctype == "dnode" and "prev" in rec.fields
                prev, nxt = rec.fields["prev"], rec.fields["next"]
                assert prev is None or isinstance(prev, Loc)
                if loc == head:
                    assert prev is None
                else:
                    assert prev in t.heap and t.heap[prev].fields["next"] == loc
                if nxt is not None:
                    assert t.heap[nxt].fields["prev"] == loc
                checked += 1
    record_property("detail", f"{checked} cells checked")
    assert checked > 0


@criterion(8, "emitted inputs replay along their recorded branch traces")
def test_replay_fidelity(record_property):
    replays = 0
    for b in benchmarks.SUITE:
        prog, env, pre = b.load()
        ex = explore(prog, pre, env, ExplorationBounds(loop_bound=b.loop_bound, depth=b.depth))
        for o in ex.outcomes:
            if o.status not in (NORMAL, ASSERTION) or o.input_model is None:
                continue
            t = model_to_input(o.input_model, prog.params, prog, o.path_id, o.heap)
            tr = run(prog, t.state())
            assert tr.status == ("normal" if o.status == NORMAL else "assertion"), (b.name, tr.message)
            assert tuple(tr.branches) == tuple(o.branches), b.name
            replays += 1
    record_property("detail", f"{replays} replays, 0 faults")
    assert replays > 0
