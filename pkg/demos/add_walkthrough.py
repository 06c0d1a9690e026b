"""Walk through test generation for the two-list digit adder.

Explores the program under its precondition, then shows for every finished
path the branch trace, the generated input as JSON, and whether it validates.
"""
from lazysl import benchmarks
from lazysl.symexec import ExplorationBounds, explore
from lazysl.testgen import measure_coverage, model_to_input, replay, validate

b = benchmarks.get("add")
prog, env, pre = b.load()
print(b.program_text())

ex = explore(prog, pre, env, ExplorationBounds(loop_bound=b.loop_bound))
print(f"{len(ex.outcomes)} paths, {len(ex.complete_outcomes)} finished\n")

inputs = []
for o in ex.complete_outcomes:
    t = model_to_input(o.input_model, prog.params, prog)
    trace = " ".join(f"{s}{d}" for s, d in o.branches)
    print(f"path {o.path_id}: {trace}")
    print(f"  input: {t.dumps().strip()}")
    print(f"  valid: {validate(t, pre, env)}  result: {replay(prog, t).final.stack.get('res')}")
    inputs.append(t)

cov = measure_coverage(prog, inputs)
print(f"\nbranch coverage {cov.covered}/{cov.total}")
