"""Run the full pipeline on every bundled benchmark and tabulate the results."""
import tempfile
from pathlib import Path

from lazysl import benchmarks
from lazysl.cli import RunConfig, run_pipeline

print(f"{'method':<12} {'family':<7} {'bound':>5} {'tests':>5} {'valid':>6} {'coverage':>9}  excluded")
with tempfile.TemporaryDirectory() as tmp:
    for b in benchmarks.SUITE:
        cfg = RunConfig(b.path(b.program_file), b.path(b.spec_file), b.pre, b.loop_bound, b.depth,
                        out=Path(tmp) / b.name)
        res = run_pipeline(cfg)
        cov = res.coverage
        excluded = ", ".join(f"{s}{d} ({why})" for (s, d), why in b.infeasible)
        print(f"{b.name:<12} {b.family:<7} {b.loop_bound:>5} {len(res.tests):>5} "
              f"{res.valid:>3}/{len(res.tests):<2} {cov.covered:>4}/{cov.total:<4}  {excluded}")
