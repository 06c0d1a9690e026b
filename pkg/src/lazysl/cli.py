"""Command-line driver: parse, explore, solve, emit, validate, measure coverage.

Every flag can also be given through an environment variable named
``LAZYSL_<FLAG>`` (``--loop-bound`` becomes ``LAZYSL_LOOP_BOUND``); explicit
flags win over the environment.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .core_lang import ParseError, Program, parse_program
from .lazyinit import DEFAULT_ITER_CAP
from .seplog import Formula, PredApp, PredicateEnv, SpecError, SymHeap, _apply, as_formula, parse_formula, parse_spec
from .solver import SolverBudget
from .symexec import ASSERTION, NORMAL, ExplorationBounds, explore
from .testgen import CoverageReport, emit, is_fully_initialized, measure_coverage, model_to_input, replay, validate

log = logging.getLogger("lazysl")

ENV_PREFIX = "LAZYSL_"

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    program: Path
    spec: Path
    pre: Optional[str] = None
    loop_bound: int = 3
    depth: int = 5
    int_lo: int = -16
    int_hi: int = 16
    iter_cap: int = DEFAULT_ITER_CAP
    out: Path = Path("out")
    verbosity: int = 0
    deterministic: bool = True

    def __post_init__(self):
        for name in ("loop_bound", "depth", "iter_cap"):
            if getattr(self, name) < 0:
                raise UsageError(f"--{name.replace('_', '-')} must be >= 0")
        if self.int_lo > self.int_hi:
            raise UsageError("--int-lo must not exceed --int-hi")


@dataclass
class RunResult:
    status: int
    tests: list = field(default_factory=list)
    valid: int = 0
    replay_faults: int = 0
    trace_mismatches: int = 0
    init_problems: int = 0
    coverage: Optional[CoverageReport] = None
    stats: dict = field(default_factory=dict)
    partial: bool = False
    seconds: float = 0.0
    summary: str = ""


def load_inputs(cfg: RunConfig) -> tuple[Program, PredicateEnv, Formula]:
    for p in (cfg.program, cfg.spec):
        if not Path(p).is_file():
            raise UsageError(f"no such file: {p}")
    program = parse_program(Path(cfg.program).read_text())
    env, pres = parse_spec(Path(cfg.spec).read_text(), program.datas)
    return program, env, resolve_precondition(program, env, pres, cfg.pre)


def resolve_precondition(program: Program, env: PredicateEnv, pres: dict, name: Optional[str]) -> Formula:
    """A named ``precond`` (parameters matched by position), a predicate applied
    to the program parameters, or formula text over the parameters."""
    params = [n for n, _ in program.params]
    sorts = {n: t for n, t in program.params if t != "bool"}
    if name is None:
        if len(pres) != 1:
            raise UsageError("--pre is required when the --spec file does not declare exactly one precond")
        name = next(iter(pres))
    if name in pres:
        formals, phi = pres[name]
        if list(formals) != params:
            if len(formals) != len(params):
                raise UsageError(f"precond {name} takes {len(formals)} parameters, program has {len(params)}")
            m = dict(zip(formals, params))
            phi = Formula(tuple(_apply(d, m) for d in phi.disjuncts))
        return phi
    if name in env:
        pdef = env[name]
        if len(pdef.params) != len(params):
            raise UsageError(f"predicate {name} takes {len(pdef.params)} arguments, program has {len(params)}")
        return as_formula(SymHeap((), (PredApp(name, tuple(params)),), ()))
    try:
        return parse_formula(name, env, params, sorts)
    except SpecError as exc:
        raise UsageError(f"unknown precondition {name!r}: {exc}") from exc


def run_pipeline(cfg: RunConfig) -> RunResult:
    start = time.monotonic()
    program, env, pre = load_inputs(cfg)
    bounds = ExplorationBounds(loop_bound=cfg.loop_bound, depth=cfg.depth)
    budget = SolverBudget(int_lo=cfg.int_lo, int_hi=cfg.int_hi)
    ex = explore(program, pre, env, bounds, budget, cfg.iter_cap)
    res = RunResult(EXIT_OK, stats=dict(ex.stats), partial=ex.partial)

    out = Path(cfg.out)
    tests_dir = out / "tests"
    tests_dir.mkdir(parents=True, exist_ok=True)
    for old in tests_dir.glob("test_*.json"):
        old.unlink()
    emitted = []
    for o in ex.outcomes:
        if o.status not in (NORMAL, ASSERTION) or o.input_model is None:
            continue
        t = model_to_input(o.input_model, program.params, program, o.path_id, o.heap)
        ok = validate(t, pre, env)
        res.valid += ok
        if not ok:
            log.error("path %d: emitted input does not satisfy the precondition", o.path_id)
        problems = is_fully_initialized(t, program)
        if problems:
            res.init_problems += 1
            log.error("path %d: %s", o.path_id, "; ".join(problems))
        tr = replay(program, t)
        if tr.status in ("fault", "timeout"):
            res.replay_faults += 1
            log.error("path %d: replay %s: %s", o.path_id, tr.status, tr.message)
        if list(tr.branches) != list(o.branches):
            res.trace_mismatches += 1
            log.error("path %d: replay diverged from the symbolic branch trace", o.path_id)
        emitted.append(t)
        emit(t, tests_dir / f"test_{len(emitted) - 1:03d}.json")
    res.tests = emitted
    res.coverage = measure_coverage(program, emitted)
    (out / "coverage.json").write_text(_json(res.coverage.to_json()))
    res.seconds = time.monotonic() - start
    res.summary = _summary(program, cfg, res)
    (out / "summary.txt").write_text(res.summary)
    bad = len(emitted) - res.valid + res.replay_faults + res.trace_mismatches + res.init_problems
    res.status = EXIT_OK if bad == 0 else EXIT_INVALID
    return res


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _summary(program: Program, cfg: RunConfig, res: RunResult) -> str:
    cov = res.coverage
    st = res.stats
    lines = [
        f"program: {program.name}",
        f"loop bound: {cfg.loop_bound}",
        f"depth: {cfg.depth}",
        f"paths explored: {st.get('paths', 0)}",
        f"paths pruned: {st.get('pruned', 0)}",
        f"paths depth-bounded: {st.get('depth_bounded', 0)}",
        f"enum branches: {st.get('enum_branches', 0)}",
        f"unknown feasibility: {st.get('unknown', 0)}",
        f"tests emitted: {len(res.tests)}",
        f"valid: {res.valid}/{len(res.tests)}",
        f"replay faults: {res.replay_faults}",
        f"trace mismatches: {res.trace_mismatches}",
    ]
    if cov.vacuous:
        lines.append("coverage: 0/0 (no conditionals)")
    else:
        lines.append(f"coverage: {cov.covered}/{cov.total} ({100 * cov.ratio:.1f}%)")
        missing = ", ".join(f"{s}{d}" for s, d in cov.missing())
        lines.append(f"uncovered: {missing or 'none'}")
    if res.partial:
        lines.append("partial: path limit or time budget reached")
    return "\n".join(lines) + "\n"


def _env_default(name: str, default, conv=str):
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    if raw is None:
        return default
    try:
        return conv(raw)
    except ValueError:
        raise UsageError(f"bad value for {ENV_PREFIX}{name.upper().replace('-', '_')}: {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lazysl", description="Generate valid heap test inputs by symbolic execution.")
    ap.add_argument("--program", default=_env_default("program", None), help="IL source file")
    ap.add_argument("--spec", default=_env_default("spec", None), help="predicate/precondition file")
    ap.add_argument("--pre", default=_env_default("pre", None), help="precond name, predicate name, or formula")
    ap.add_argument("--loop-bound", type=int, default=_env_default("loop-bound", 3, int))
    ap.add_argument("--depth", type=int, default=_env_default("depth", 5, int))
    ap.add_argument("--int-lo", type=int, default=_env_default("int-lo", -16, int))
    ap.add_argument("--int-hi", type=int, default=_env_default("int-hi", 16, int))
    ap.add_argument("--iter-cap", type=int, default=_env_default("iter-cap", DEFAULT_ITER_CAP, int))
    ap.add_argument("--out", default=_env_default("out", "out"))
    ap.add_argument("-v", "--verbose", action="count", default=_env_default("verbose", 0, int))
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        if not args.program or not args.spec:
            raise UsageError("--program and --spec are required")
        cfg = RunConfig(Path(args.program), Path(args.spec), args.pre, args.loop_bound, args.depth,
                        args.int_lo, args.int_hi, args.iter_cap, Path(args.out), args.verbose)
        res = run_pipeline(cfg)
    except UsageError as exc:
        print(f"lazysl: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, SpecError) as exc:
        print(f"lazysl: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - surfaced as an internal error with its type
        log.debug("internal error", exc_info=True)
        print(f"lazysl: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    sys.stdout.write(res.summary)
    print(f"wall time: {res.seconds:.2f}s", file=sys.stderr)
    return res.status


if __name__ == "__main__":
    sys.exit(main())
