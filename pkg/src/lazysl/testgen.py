"""Concrete test inputs: materialization, validation, replay and coverage."""
from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

from .core_lang import PRIMITIVES, ConcreteState, Loc, Program, Record, Trace, run
from .seplog import Formula, PredicateEnv, SymHeap, as_formula, format_heap, satisfies
from .solver import Model


class ModelError(Exception):
    """A model cannot be turned into a well-formed input state."""


@dataclass(frozen=True)
class TestInput:
    stack: dict
    heap: dict
    path_id: Optional[int] = None
    digest: str = ""

    __test__ = False  # not a pytest class

    def state(self) -> ConcreteState:
        return ConcreteState({l: Record(r.ctype, dict(r.fields)) for l, r in self.heap.items()}, dict(self.stack))

    def to_json(self) -> dict:
        return {
            "stack": {k: _value_json(v) for k, v in self.stack.items()},
            "heap": [{"loc": loc.name, "type": rec.ctype, "fields": {f: _value_json(v) for f, v in rec.fields.items()}}
                     for loc, rec in sorted(self.heap.items(), key=lambda kv: _loc_key(kv[0]))],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":")) + "\n"

    @staticmethod
    def from_json(data: Union[str, dict]) -> "TestInput":
        if isinstance(data, str):
            data = json.loads(data)
        stack = {k: _value_from_json(v) for k, v in data["stack"].items()}
        heap = {}
        for cell in data["heap"]:
            heap[Loc(cell["loc"])] = Record(cell["type"], {f: _value_from_json(v) for f, v in cell["fields"].items()})
        return TestInput(stack, heap)

    def same_input(self, other: "TestInput") -> bool:
        return self.to_json() == other.to_json()


def _loc_key(loc: Loc):
    name = loc.name
    return (0, int(name[1:])) if name[1:].isdigit() else (1, name)


def _value_json(v):
    if isinstance(v, Loc):
        return {"ref": v.name}
    return v


def _value_from_json(v):
    if isinstance(v, dict):
        return Loc(v["ref"])
    return v


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def model_to_input(m: Model, params: Iterable[tuple[str, str]], program: Optional[Program] = None,
                   path_id: Optional[int] = None, delta: Optional[SymHeap] = None) -> TestInput:
    """Materialize the cells reachable from the parameters, renumbered L1.. in BFS order.

    Parameters missing from the model default to 0, false or null.  A reference
    to a location outside the model's heap raises :class:`ModelError`.
    """
    params = list(params)
    asg = m.assignment
    ren: dict = {}
    order: list = []
    queue: deque = deque()

    def visit(v):
        if isinstance(v, Loc) and v not in ren:
            if v not in m.heap:
                raise ModelError(f"model references unassigned location {v!r}")
            ren[v] = Loc(f"L{len(ren) + 1}")
            order.append(v)
            queue.append(v)

    for name, _ in params:
        visit(asg.get(name))
        while queue:
            loc = queue.popleft()
            for val in m.heap[loc].fields.values():
                visit(val)

    def conv(v):
        return ren[v] if isinstance(v, Loc) else v

    stack = {}
    for name, t in params:
        v = asg.get(name)
        if v is None and t in PRIMITIVES:
            v = 0 if t == "int" else False
        stack[name] = conv(v)
    heap = {}
    for loc in order:
        rec = m.heap[loc]
        fields = {}
        decl = program.data(rec.ctype) if program is not None else None
        for f, v in rec.fields.items():
            if v is None and decl is not None and decl.field_type(f) in PRIMITIVES:
                v = 0 if decl.field_type(f) == "int" else False
            fields[f] = conv(v)
        heap[ren[loc]] = Record(rec.ctype, fields)
    t = TestInput(stack, heap, path_id)
    src = format_heap(delta) if delta is not None else t.dumps()
    return TestInput(stack, heap, path_id, _digest(src))


def validate(t: TestInput, precondition: Union[Formula, SymHeap], env: PredicateEnv,
             budget: Optional[int] = None) -> bool:
    """True iff the input state satisfies the precondition; an undecided check counts as failure."""
    return satisfies(t.state(), as_formula(precondition), env, budget) is True


def is_fully_initialized(t: TestInput, program: Program) -> list[str]:
    """Problems found by a structural scan: missing or ill-typed fields, dangling references."""
    problems = []
    for loc, rec in t.heap.items():
        try:
            decl = program.data(rec.ctype)
        except KeyError:
            problems.append(f"{loc!r}: unknown type {rec.ctype}")
            continue
        for fname, ftype in decl.fields:
            if fname not in rec.fields:
                problems.append(f"{loc!r}.{fname} missing")
                continue
            v = rec.fields[fname]
            if ftype == "int" and (not isinstance(v, int) or isinstance(v, bool)):
                problems.append(f"{loc!r}.{fname} is not an int")
            elif ftype == "bool" and not isinstance(v, bool):
                problems.append(f"{loc!r}.{fname} is not a bool")
            elif ftype not in PRIMITIVES:
                if v is not None and not isinstance(v, Loc):
                    problems.append(f"{loc!r}.{fname} is not a reference")
                elif isinstance(v, Loc) and v not in t.heap:
                    problems.append(f"{loc!r}.{fname} dangles")
    for name, v in t.stack.items():
        if isinstance(v, Loc) and v not in t.heap:
            problems.append(f"parameter {name} dangles")
    return problems


@dataclass
class CoverageReport:
    hits: dict  # (stmt, "T"|"F") -> count
    total: int
    traces: list = field(default_factory=list)  # (status, digest) per input
    faults: list = field(default_factory=list)  # (input index, message)

    @property
    def covered(self) -> int:
        return sum(1 for v in self.hits.values() if v > 0)

    @property
    def vacuous(self) -> bool:
        return self.total == 0

    @property
    def ratio(self) -> float:
        return 1.0 if self.total == 0 else self.covered / self.total

    def missing(self) -> list[tuple[int, str]]:
        return sorted(k for k, v in self.hits.items() if v == 0)

    def to_json(self) -> dict:
        return {
            "branches": [{"stmt": s, "dir": d, "hits": n} for (s, d), n in sorted(self.hits.items())],
            "covered": self.covered,
            "total": self.total,
        }


def replay(program: Program, t: TestInput, fuel: int = 100_000) -> Trace:
    return run(program, t.state(), fuel)


def measure_coverage(program: Program, inputs: Iterable[TestInput], fuel: int = 100_000) -> CoverageReport:
    """Replay every input and tally branch outcomes over all conditionals."""
    hits = {}
    for idx in program.conditionals():
        hits[(idx, "T")] = 0
        hits[(idx, "F")] = 0
    report = CoverageReport(hits, len(hits))
    for i, t in enumerate(inputs):
        tr = replay(program, t, fuel)
        for b in tr.branches:
            hits[b] += 1
        report.traces.append((tr.status, _digest(repr(tr.branches))))
        if tr.status in ("fault", "timeout"):
            report.faults.append((i, f"{tr.status} at {tr.halt_pc}: {tr.message}"))
    return report


def emit(t: TestInput, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(t.dumps())
    return path


def load(path: Union[str, Path]) -> TestInput:
    return TestInput.from_json(Path(path).read_text())
