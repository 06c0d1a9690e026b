"""Print the fixed-point iteration tables for two lazy initializations.

The first initializes x under pre(X,Y), which settles after two rounds.  The
second initializes root under lsegP2, whose list is never empty: the null
case never shows up in the abstraction.
"""
from lazysl import benchmarks
from lazysl.lazyinit import lfp
from lazysl.seplog import parse_heap, parse_spec

env = parse_spec(benchmarks.read("add.sl"))[0]
r = lfp("x", parse_heap("pre(X,Y)", env), {"X", "Y"}, {"x": "X", "y": "Y"}, env)
print(r.dump())

env = parse_spec(benchmarks.read("p2.sl"))[0]
h = parse_heap("lsegP2(R,null,N)", env, {"N": "int"})
r = lfp("root", h, {"R"}, {"root": "R"}, env)
print(r.dump())
