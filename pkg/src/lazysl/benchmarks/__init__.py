"""Bundled benchmark programs with their preconditions and per-method bounds."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Optional

from ..core_lang import Program, parse_program
from ..seplog import Formula, PredicateEnv, parse_spec


@dataclass(frozen=True)
class Benchmark:
    name: str
    family: str
    program_file: str
    spec_file: str
    pre: str
    loop_bound: int
    depth: int = 5
    # (stmt, dir) outcomes no valid input can reach, with the reason
    infeasible: tuple = ()

    def program_text(self) -> str:
        return read(self.program_file)

    def spec_text(self) -> str:
        return read(self.spec_file)

    def load(self) -> tuple[Program, PredicateEnv, Formula]:
        from ..cli import resolve_precondition

        program = parse_program(self.program_text())
        env, pres = parse_spec(self.spec_text(), program.datas)
        return program, env, resolve_precondition(program, env, pres, self.pre)

    def path(self, fname: Optional[str] = None):
        return resources.files(__name__) / (fname or self.program_file)


def read(fname: str) -> str:
    return (resources.files(__name__) / fname).read_text()


SUITE = (
    Benchmark("add", "SLL", "add.il", "add.sl", "addPre", 3),
    Benchmark("indexOf", "DLL", "indexOf.il", "dll.sl", "headPre", 2),
    Benchmark("dll_push", "DLL", "dll_push.il", "dll.sl", "headPre", 2),
    Benchmark("sll_find", "SLL", "sll_find.il", "sll.sl", "listPre", 2),
    Benchmark("sll_remove", "SLL", "sll_remove.il", "sll.sl", "listPre", 2),
    Benchmark("sll_append", "SLL", "sll_append.il", "sll.sl", "listPre", 2),
    Benchmark("bst_find", "BST", "bst_find.il", "bst.sl", "bstPre", 2),
    Benchmark("bst_insert", "BST", "bst_insert.il", "bst.sl", "bstPre", 2),
    Benchmark("stack_push", "Stack", "stack_push.il", "stack.sl", "pushPre", 2),
    Benchmark("stack_pop", "Stack", "stack_pop.il", "stack.sl", "popPre", 2),
    Benchmark("countP2", "lsegP2", "countP2.il", "p2.sl", "p2Pre", 2, depth=3,
              infeasible=(((3, "T"), "every payload of an lsegP2 list is 0"),)),
)

BY_NAME = {b.name: b for b in SUITE}


def get(name: str) -> Benchmark:
    return BY_NAME[name]
