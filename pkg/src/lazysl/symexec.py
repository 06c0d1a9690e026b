"""Symbolic execution of IL programs over symbolic-heap path conditions.

Configurations keep the path condition without existential quantifiers:
every symbol is free, so stack values can name them directly.  Pointer values
are symbol names or ``"null"``, integers are :class:`~lazysl.seplog.Lin`
terms and booleans are pure formulas.  Dereferencing a reference that is not
yet a points-to root calls :func:`lazyinit.enum`, and each returned context
becomes its own branch.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Union

from . import lia
from .core_lang import (
    PRIMITIVES, Assert, Assign, BinOp, Const, Expression, Free, Goto, If, Load, New, Null, Program,
    Record, Store, UnOp, Var,
)
from .lazyinit import DEFAULT_ITER_CAP, LFPDivergence, enum
from .seplog import (
    NULL, FalseAtom, Formula, Lin, LinCon, PAnd, PNot, POr, PointsTo, PredApp, PredicateEnv, PtrEq,
    PtrNe, SymHeap, _apply, all_vars, alias, as_formula, fresh_name, is_var, lin_con, lin_rel, negate_atom,
    ptr_eq, ptr_ne, pure_dnf, subst, vars_in_order,
)
from .solver import SAT, UNKNOWN, UNSAT, Model, SolverBudget, augment, check_sat, pure_implies

log = logging.getLogger(__name__)

SymValue = Union[str, Lin, object]

NORMAL, ASSERTION, FAULT, BOUNDED = "normal", "assertion", "fault", "depth-bounded"


@dataclass(frozen=True)
class ExplorationBounds:
    loop_bound: int = 3
    depth: int = 5
    path_limit: int = 10_000
    time: Optional[float] = None

    def __post_init__(self):
        for name in ("loop_bound", "depth", "path_limit"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass
class SymbolicConfig:
    pc: int
    stack: dict
    heap: SymHeap
    branches: tuple = ()
    loops: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    init_args: dict = field(default_factory=dict)
    new_roots: frozenset = frozenset()
    ghosts: tuple = ()
    unknown: bool = False

    def fork(self, **kw) -> "SymbolicConfig":
        base = dict(pc=self.pc, stack=dict(self.stack), heap=self.heap, branches=self.branches,
                    loops=dict(self.loops), inputs=self.inputs, init_args=dict(self.init_args),
                    new_roots=self.new_roots, ghosts=self.ghosts, unknown=self.unknown)
        base.update(kw)
        return SymbolicConfig(**base)

    def names(self) -> set:
        out = all_vars(self.heap) | set(self.new_roots)
        for v in self.stack.values():
            out |= _value_vars(v)
        for v in self.inputs.values():
            out |= _value_vars(v)
        for args in self.init_args.values():
            out |= {a for a in args if is_var(a)}
        out |= set(self.init_args)
        for g in self.ghosts:
            out |= {a for a in (g.root,) + g.args if is_var(a)}
        return out


@dataclass
class Terminal:
    status: str
    cfg: SymbolicConfig
    message: str = ""


@dataclass
class PathOutcome:
    """A finished path: status, final path condition, branch trace and, when
    the path is complete and satisfiable, a model restricted to the inputs."""

    path_id: int
    status: str
    heap: SymHeap
    stack: dict
    branches: tuple
    message: str = ""
    feasibility: str = SAT
    input_model: Optional[Model] = None


@dataclass
class Exploration:
    outcomes: list
    stats: dict
    partial: bool = False

    @property
    def complete_outcomes(self) -> list:
        return [o for o in self.outcomes if o.input_model is not None]


class _Unsupported(Exception):
    pass


# ------------------------------------------------------------------ helpers


def _value_vars(v) -> set:
    if isinstance(v, str):
        return {v} if is_var(v) else set()
    if isinstance(v, Lin):
        return set(v.vars)
    if isinstance(v, bool):
        return set()
    return {x for conj in pure_dnf(v) for a in conj for x in _atom_vars(a)}


def _atom_vars(a) -> list:
    if isinstance(a, (PtrEq, PtrNe)):
        return [x for x in (a.lhs, a.rhs) if is_var(x)]
    if isinstance(a, LinCon):
        return [v for v, _ in a.terms]
    return []


def disjoint_cases(cond) -> list[list]:
    """Pairwise-disjoint conjunctions covering a pure formula."""
    if cond is True:
        return [[]]
    if cond is False:
        return []
    cases = pure_dnf(cond)
    out: list = []
    previous: list = []
    for c in cases:
        pieces = [list(c)]
        for p in previous:
            nxt = []
            for piece in pieces:
                # piece and not(p) = piece & (!l1 | l1 & !l2 | ...)
                prefix: list = []
                for lit in p:
                    neg = negate_atom(lit)
                    if neg is not False:
                        cand = piece + prefix + ([] if neg is True else [neg])
                        nxt.append(cand)
                    prefix.append(lit)
            pieces = nxt
        out.extend(pieces)
        previous.append(list(c))
    return out


def _negate(cond):
    if isinstance(cond, bool):
        return not cond
    return PNot(cond)


def _is_false(atoms: list) -> bool:
    return any(isinstance(a, FalseAtom) for a in atoms)


# ------------------------------------------------------------------ engine


class Engine:
    """Holds the program, predicate environment, bounds and fresh-name supply."""

    def __init__(self, program: Program, env: PredicateEnv, bounds: Optional[ExplorationBounds] = None,
                 budget: Optional[SolverBudget] = None, iter_cap: int = DEFAULT_ITER_CAP):
        self.program = program
        self.env = augment(env, budget)
        self.bounds = bounds or ExplorationBounds()
        self.budget = budget or SolverBudget()
        self.iter_cap = iter_cap
        self.stats = {"paths": 0, "pruned": 0, "enum_calls": 0, "enum_branches": 0, "unknown": 0,
                      "depth_bounded": 0, "faults": 0}
        self.types = dict(program.params + program.locals)

    # -- sorts
    def sort_of(self, e: Expression) -> str:
        if isinstance(e, Const):
            return "bool" if isinstance(e.value, bool) else "int"
        if isinstance(e, Null):
            return "ptr"
        if isinstance(e, Var):
            t = self.types.get(e.name)
            return t if t in PRIMITIVES else "ptr"
        if isinstance(e, Load):
            ctype = self.types.get(e.var)
            t = self.program.data(ctype).field_type(e.field)
            return t if t in PRIMITIVES else "ptr"
        if isinstance(e, UnOp):
            return "int" if e.op == "-" else "bool"
        if e.op in ("+", "-", "*", "/", "%"):
            return "int"
        return "bool"

    # -- feasibility
    def feasible(self, cfg: SymbolicConfig) -> str:
        v = check_sat(cfg.heap, self.env, self.budget)
        return v.status

    def keep(self, cfg: SymbolicConfig) -> Optional[SymbolicConfig]:
        st = self.feasible(cfg)
        if st == UNSAT:
            self.stats["pruned"] += 1
            return None
        if st == UNKNOWN:
            self.stats["unknown"] += 1
            log.warning("feasibility unknown at pc %d; path kept", cfg.pc)
            return cfg.fork(unknown=True)
        return cfg

    def assume(self, cfg: SymbolicConfig, cond, check: bool = True) -> list[SymbolicConfig]:
        out = []
        for case in disjoint_cases(cond):
            if _is_false(case):
                continue
            c = cfg.fork(heap=cfg.heap.conj(*case))
            if any(isinstance(a, FalseAtom) for a in c.heap.pure):
                continue
            if check:
                c = self.keep(c)
            if c is not None:
                out.append(c)
        return out

    def fresh(self, cfg: SymbolicConfig, base: str) -> str:
        return fresh_name(base, cfg.names() | set(self.types), keep_base=False)

    # -- lazy initialization
    def record_inputs(self, cfg: SymbolicConfig) -> SymbolicConfig:
        new = None
        for a in cfg.heap.points_to:
            if a.root not in cfg.init_args and a.root not in cfg.new_roots:
                if new is None:
                    new = dict(cfg.init_args)
                new[a.root] = (a.ctype, a.args)
        return cfg if new is None else cfg.fork(init_args=new)

    def deref(self, cfg: SymbolicConfig, var: str) -> list:
        """Configurations where ``var`` points to a points-to atom, paired with its index; or faults."""
        if var not in cfg.stack:
            return [Terminal(FAULT, cfg, f"uninitialized variable {var!r}")]
        out = []
        work = [(cfg, 0)]
        while work:
            c, rounds = work.pop(0)
            X = c.stack[var]
            if X == NULL:
                out.append(Terminal(FAULT, c, f"null dereference of {var!r}"))
                continue
            idx = _root_index(c.heap, X)
            if idx is not None:
                out.append((c, idx))
                continue
            if pure_implies(alias(c.heap), PtrEq(X, NULL)):
                out.append(Terminal(FAULT, c, f"null dereference of {var!r}"))
                continue
            if any(X == g.root for g in c.ghosts):
                out.append(Terminal(FAULT, c, f"dangling dereference of {var!r}"))
                continue
            if rounds > self.bounds.depth:
                out.append(Terminal(BOUNDED, c, "enumeration depth"))
                continue
            self.stats["enum_calls"] += 1
            s = {v: val for v, val in c.stack.items() if isinstance(val, str)}
            s[var] = X
            try:
                ctxs = enum(var, s, c.heap, self.env, self.budget, self.iter_cap,
                            ctype=self.types.get(var), avoid=c.names() | set(self.types), augmented=True)
            except LFPDivergence as exc:
                out.append(Terminal(BOUNDED, c, str(exc)))
                continue
            if len(ctxs) == 1 and ctxs[0].heap == c.heap:
                # a scenario-1 answer without a points-to: cannot make progress
                out.append(Terminal(FAULT, c, f"dangling dereference of {var!r}"))
                continue
            self.stats["enum_branches"] += len(ctxs)
            for ctx in ctxs:
                h = ctx.heap
                h = SymHeap((), h.spatial, h.pure)
                nc = self.record_inputs(c.fork(heap=h))
                if any(isinstance(a, PredApp) and a.depth > self.bounds.depth for a in h.spatial):
                    out.append(Terminal(BOUNDED, nc, "predicate unfolding depth"))
                    continue
                work.append((nc, rounds + 1))
        return out

    # -- expressions
    def eval(self, cfg: SymbolicConfig, e: Expression) -> list:
        """Pairs ``(config, value)`` or :class:`Terminal` faults."""
        if isinstance(e, Const):
            return [(cfg, e.value if isinstance(e.value, bool) else Lin.of(e.value))]
        if isinstance(e, Null):
            return [(cfg, NULL)]
        if isinstance(e, Var):
            if e.name not in cfg.stack:
                return [Terminal(FAULT, cfg, f"uninitialized variable {e.name!r}")]
            return [(cfg, cfg.stack[e.name])]
        if isinstance(e, Load):
            out = []
            for r in self.deref(cfg, e.var):
                if isinstance(r, Terminal):
                    out.append(r)
                    continue
                c, idx = r
                atom = c.heap.spatial[idx]
                d = self.program.data(atom.ctype)
                if e.field not in d.field_names:
                    out.append(Terminal(FAULT, c, f"{atom.ctype} has no field {e.field!r}"))
                    continue
                i = d.index(e.field)
                out.append((c, _field_value(atom.args[i], d.fields[i][1])))
            return out
        if isinstance(e, UnOp):
            out = []
            for r in self.eval(cfg, e.operand):
                if isinstance(r, Terminal):
                    out.append(r)
                    continue
                c, v = r
                out.append((c, -v if e.op == "-" else _negate(v)))
            return out
        if e.op in ("&&", "||"):
            return self.eval_logic(cfg, e)
        out = []
        for r in self.eval(cfg, e.left):
            if isinstance(r, Terminal):
                out.append(r)
                continue
            c, a = r
            for r2 in self.eval(c, e.right):
                if isinstance(r2, Terminal):
                    out.append(r2)
                    continue
                c2, b = r2
                out.extend(self.binop(c2, e.op, a, b, self.sort_of(e.left)))
        return out

    def eval_logic(self, cfg: SymbolicConfig, e: BinOp) -> list:
        out = []
        for r in self.eval(cfg, e.left):
            if isinstance(r, Terminal):
                out.append(r)
                continue
            c, a = r
            if not _has_load(e.right):
                for r2 in self.eval(c, e.right):
                    if isinstance(r2, Terminal):
                        out.append(r2)
                        continue
                    c2, b = r2
                    out.append((c2, _and(a, b) if e.op == "&&" else _or(a, b)))
                continue
            # short-circuit: the right operand is evaluated only when needed
            stop = _negate(a) if e.op == "&&" else a
            for cs in self.assume(c, stop):
                out.append((cs, e.op == "||"))
            for cg in self.assume(c, _negate(stop)):
                out.extend(self.eval(cg, e.right))
        return out

    def binop(self, cfg: SymbolicConfig, op: str, a, b, sort: str) -> list:
        if op in ("==", "!="):
            if sort == "ptr":
                atom = ptr_eq(a, b) if op == "==" else ptr_ne(a, b)
            elif sort == "bool":
                same = _or(_and(a, b), _and(_negate(a), _negate(b)))
                return [(cfg, same if op == "==" else _negate(same))]
            else:
                atom = lin_rel(a, "=" if op == "==" else "!=", b)[0]
            return [(cfg, atom)]
        if op in ("<", "<=", ">", ">="):
            return [(cfg, lin_rel(a, op, b)[0])]
        if op == "+":
            return [(cfg, a + b)]
        if op == "-":
            return [(cfg, a - b)]
        if op == "*":
            if not a.coeffs:
                return [(cfg, b.scale(a.const))]
            if not b.coeffs:
                return [(cfg, a.scale(b.const))]
            raise _Unsupported("non-linear multiplication")
        if b.coeffs:
            raise _Unsupported("division by a symbolic value")
        k = b.const
        if k == 0:
            return [Terminal(FAULT, cfg, "division by zero")]
        if not a.coeffs:
            x = a.const
            q = abs(x) // abs(k) * (1 if (x >= 0) == (k >= 0) else -1)
            return [(cfg, Lin.of(q) if op == "/" else Lin.of(x - k * q))]
        q = self.fresh(cfg, "q")
        r = fresh_name("r", cfg.names() | {q} | set(self.types))
        m = abs(k)
        # a = k*q + r with truncation toward zero: r shares the sign of a and |r| < |k|
        link = lin_rel(a, "=", Lin.of(q).scale(k) + Lin.of(r))
        pos = PAnd(tuple(link + lin_rel(a, ">=", Lin.of(0)) + lin_rel(Lin.of(r), ">=", Lin.of(0))
                         + lin_rel(Lin.of(r), "<=", Lin.of(m - 1))))
        neg = PAnd(tuple(link + lin_rel(a, "<", Lin.of(0)) + lin_rel(Lin.of(r), "<=", Lin.of(0))
                         + lin_rel(Lin.of(r), ">=", Lin.of(1 - m))))
        out = []
        for case in (pos, neg):
            for c in self.assume(cfg, case):
                out.append((c, Lin.of(q) if op == "/" else Lin.of(r)))
        return out

    # -- materializing values into heap arguments
    def as_arg(self, cfg: SymbolicConfig, v, ftype: str) -> list:
        if ftype not in PRIMITIVES:
            return [(cfg, v)]
        if ftype == "int":
            if not v.coeffs:
                return [(cfg, v.const)]
            sv = v.single_var()
            if sv is not None:
                return [(cfg, sv)]
            t = self.fresh(cfg, "t")
            return [(cfg.fork(heap=cfg.heap.conj(*lin_rel(Lin.of(t), "=", v))), t)]
        if isinstance(v, bool):
            return [(cfg, int(v))]
        out = []
        for c in self.assume(cfg, v):
            out.append((c, 1))
        for c in self.assume(cfg, _negate(v)):
            out.append((c, 0))
        return out

    # -- statements
    def step(self, cfg: SymbolicConfig) -> list:
        prog = self.program
        if cfg.pc == prog.end:
            return [Terminal(NORMAL, cfg)]
        if not (0 <= cfg.pc < prog.end):
            return [Terminal(FAULT, cfg, f"pc {cfg.pc} outside program")]
        s = prog.stmts[cfg.pc]
        try:
            return self._step(cfg, s)
        except _Unsupported as exc:
            return [Terminal(BOUNDED, cfg, f"unsupported: {exc}")]

    def jump(self, cfg: SymbolicConfig, target: int) -> Union[SymbolicConfig, Terminal]:
        if target <= cfg.pc:
            loops = dict(cfg.loops)
            loops[target] = loops.get(target, 0) + 1
            if loops[target] > self.bounds.loop_bound:
                return Terminal(BOUNDED, cfg, f"loop bound at {target}")
            return cfg.fork(pc=target, loops=loops)
        return cfg.fork(pc=target)

    def _step(self, cfg: SymbolicConfig, s) -> list:
        out: list = []
        if isinstance(s, Assign):
            for r in self.eval(cfg, s.expr):
                if isinstance(r, Terminal):
                    out.append(r)
                    continue
                c, v = r
                st = dict(c.stack)
                st[s.target] = v
                out.append(c.fork(stack=st, pc=c.pc + 1))
            return out
        if isinstance(s, Goto):
            return [self.jump(cfg, s.target)]
        if isinstance(s, If):
            for r in self.eval(cfg, s.cond):
                if isinstance(r, Terminal):
                    out.append(r)
                    continue
                c, v = r
                for cond, target, tag in ((v, s.then_target, "T"), (_negate(v), s.else_target, "F")):
                    for cc in self.assume(c, cond):
                        out.append(self.jump(cc.fork(branches=cc.branches + ((s.index, tag),)), target))
            return out
        if isinstance(s, Assert):
            for r in self.eval(cfg, s.expr):
                if isinstance(r, Terminal):
                    out.append(r)
                    continue
                c, v = r
                for cc in self.assume(c, v):
                    out.append(cc.fork(pc=cc.pc + 1))
                for cc in self.assume(c, _negate(v)):
                    out.append(Terminal(ASSERTION, cc, "assertion failed"))
            return out
        if isinstance(s, Store):
            for r in self.deref(cfg, s.var):
                if isinstance(r, Terminal):
                    out.append(r)
                    continue
                c, _ = r
                d = self.program.data(c.heap.spatial[_].ctype)
                if s.field not in d.field_names:
                    out.append(Terminal(FAULT, c, f"{d.name} has no field {s.field!r}"))
                    continue
                i = d.index(s.field)
                for r2 in self.eval(c, s.expr):
                    if isinstance(r2, Terminal):
                        out.append(r2)
                        continue
                    c2, v = r2
                    for c3, arg in self.as_arg(c2, v, d.fields[i][1]):
                        idx = _root_index(c3.heap, c3.stack[s.var])
                        atom = c3.heap.spatial[idx]
                        args = atom.args[:i] + (arg,) + atom.args[i + 1:]
                        sp = c3.heap.spatial[:idx] + (PointsTo(atom.root, atom.ctype, args),) + c3.heap.spatial[idx + 1:]
                        out.append(c3.fork(heap=replace(c3.heap, spatial=sp), pc=c3.pc + 1))
            return out
        if isinstance(s, New):
            d = self.program.data(s.ctype)
            partial = [(cfg, [])]
            for (fname, ftype), a in zip(d.fields, s.args):
                nxt = []
                for c, args in partial:
                    for r in self.eval(c, a):
                        if isinstance(r, Terminal):
                            out.append(r)
                            continue
                        c2, v = r
                        for c3, arg in self.as_arg(c2, v, ftype):
                            nxt.append((c3, args + [arg]))
                partial = nxt
            for c, args in partial:
                loc = self.fresh(c, "l")
                distinct = [ptr_ne(loc, v) for v in sorted({v for v in c.stack.values() if isinstance(v, str) and is_var(v)})]
                heap = c.heap.star(PointsTo(loc, s.ctype, tuple(args))).conj(*distinct)
                st = dict(c.stack)
                st[s.target] = loc
                out.append(c.fork(heap=heap, stack=st, pc=c.pc + 1, new_roots=c.new_roots | {loc}))
            return out
        if isinstance(s, Free):
            for r in self.deref(cfg, s.var):
                if isinstance(r, Terminal):
                    out.append(r)
                    continue
                c, idx = r
                atom = c.heap.spatial[idx]
                ghosts = c.ghosts
                if atom.root in c.init_args:
                    ctype, args = c.init_args[atom.root]
                    ghosts = ghosts + (PointsTo(atom.root, ctype, args),)
                heap = replace(c.heap, spatial=c.heap.spatial[:idx] + c.heap.spatial[idx + 1:])
                out.append(c.fork(heap=heap, ghosts=ghosts, pc=c.pc + 1))
            return out
        raise _Unsupported(type(s).__name__)

    # -- initial configurations
    def initial(self, precondition: Union[Formula, SymHeap]) -> list[SymbolicConfig]:
        prog = self.program
        pre = as_formula(precondition)
        free = set()
        for d in pre.disjuncts:
            free |= set(vars_in_order(d))
        params = [n for n, _ in prog.params]
        extra = free - set(params)
        if extra:
            raise ValueError(f"precondition mentions non-parameters: {sorted(extra)}")
        out = []
        for d in pre.disjuncts:
            used = set(self.types) | all_vars(d)
            sigma: dict = {}
            for n, _ in prog.params:
                cand = n.upper() if n.upper() != n else n + "0"
                if cand in used:
                    cand = fresh_name(cand, used)
                used.add(cand)
                sigma[n] = cand
            # existentials are opened under fresh names
            ren = {}
            for w in d.bound:
                nw = fresh_name(w, used, keep_base=True)
                used.add(nw)
                ren[w] = nw
            h = _apply(d, {**ren, **sigma}, ())
            stack: dict = {}
            extra_pure = []
            for n, t in prog.params:
                sym = sigma[n]
                if t == "int":
                    stack[n] = Lin.of(sym)
                elif t == "bool":
                    stack[n] = lin_con(((sym, 1),), -1, "==")
                    extra_pure += [lin_con(((sym, -1),), 0, "<="), lin_con(((sym, 1),), -1, "<=")]
                else:
                    stack[n] = sym
            h = h.conj(*extra_pure)
            cfg = SymbolicConfig(prog.entry, stack, h, inputs=dict(stack))
            cfg = self.record_inputs(cfg)
            out.append(cfg)
        return out

    # -- outcomes
    def finish(self, t: Terminal, path_id: int) -> PathOutcome:
        c = t.cfg
        feas = UNKNOWN if c.unknown else SAT
        model = None
        if t.status in (NORMAL, ASSERTION):
            query = c.heap.star(*c.ghosts)
            v = check_sat(query, self.env, self.budget)
            feas = v.status
            if v.status == SAT:
                model = self.input_model(c, v.model, query)
        return PathOutcome(path_id, t.status, c.heap, dict(c.stack), c.branches, t.message, feas, model)

    def input_model(self, c: SymbolicConfig, m: Model, query: SymHeap) -> Model:
        vals = m.assignment
        ptypes = dict(self.program.params)
        heap = {}
        current_roots = {vals.get(a.root) for a in c.heap.points_to}
        for root, (ctype, args) in c.init_args.items():
            loc = vals.get(root)
            d = self.program.data(ctype)
            fields = {}
            for (fname, ftype), a in zip(d.fields, args):
                fields[fname] = _concrete(a, ftype, vals)
            heap[loc] = Record(ctype, fields)
        new_locs = {vals.get(r) for r in c.new_roots}
        for loc, rec in m.heap.items():
            if loc in heap or loc in new_locs or loc in current_roots:
                continue
            heap[loc] = Record(rec.ctype, dict(rec.fields))
        stack = {}
        for n, t in self.program.params:
            v = c.inputs[n]
            if t == "int":
                stack[n] = int(v.const + sum(k * int(vals.get(x) or 0) for x, k in v.coeffs))
            elif t == "bool":
                sym = v.terms[0][0]
                stack[n] = bool(vals.get(sym) or 0)
            else:
                stack[n] = None if v == NULL else vals.get(v)
        return Model(stack, heap, query)


def _concrete(a, ftype: str, vals: dict):
    if isinstance(a, int):
        return bool(a) if ftype == "bool" else a
    if a == NULL:
        return None
    v = vals.get(a)
    if ftype == "int":
        return int(v or 0)
    if ftype == "bool":
        return bool(v or 0)
    return v


def _field_value(arg, ftype: str):
    if ftype == "int":
        return Lin.of(arg)
    if ftype == "bool":
        if isinstance(arg, int):
            return bool(arg)
        return lin_con(((arg, 1),), -1, "==")
    return arg


def _root_index(h: SymHeap, X: str) -> Optional[int]:
    for i, a in enumerate(h.spatial):
        if isinstance(a, PointsTo) and a.root == X:
            return i
    for i, a in enumerate(h.spatial):
        if isinstance(a, PointsTo) and pure_implies(alias(h), PtrEq(*sorted((X, a.root), key=lambda t: (t == NULL, t)))):
            return i
    return None


def _has_load(e: Expression) -> bool:
    if isinstance(e, Load):
        return True
    if isinstance(e, UnOp):
        return _has_load(e.operand)
    if isinstance(e, BinOp):
        return _has_load(e.left) or _has_load(e.right)
    return False


def _and(a, b):
    if a is False or b is False:
        return False
    if a is True:
        return b
    if b is True:
        return a
    return PAnd((a, b))


def _or(a, b):
    if a is True or b is True:
        return True
    if a is False:
        return b
    if b is False:
        return a
    return POr((a, b))


# ------------------------------------------------------------------ public API


def sym_eval(engine: Engine, cfg: SymbolicConfig, e: Expression) -> list:
    """Evaluate ``e``; lazy initialization and short-circuiting may split the configuration."""
    return engine.eval(cfg, e)


def sym_step(engine: Engine, cfg: SymbolicConfig) -> list:
    """Successor configurations of ``cfg`` (terminals are :class:`Terminal`)."""
    return engine.step(cfg)


def is_feasible(engine: Engine, cfg: SymbolicConfig) -> str:
    """``"feasible"``, ``"infeasible"`` or ``"unknown"``."""
    st = engine.feasible(cfg)
    return {SAT: "feasible", UNSAT: "infeasible"}.get(st, "unknown")


def explore(program: Program, precondition: Union[Formula, SymHeap], env: PredicateEnv,
            bounds: Optional[ExplorationBounds] = None, budget: Optional[SolverBudget] = None,
            iter_cap: int = DEFAULT_ITER_CAP) -> Exploration:
    """Depth-first exploration (true branch and base cases first) from the precondition."""
    engine = Engine(program, env, bounds, budget, iter_cap)
    b = engine.bounds
    deadline = None if b.time is None else time.monotonic() + b.time
    outcomes: list[PathOutcome] = []
    stack = []
    for c in reversed(engine.initial(precondition)):
        c = engine.keep(c)
        if c is not None:
            stack.append(c)
    partial = False
    while stack:
        if len(outcomes) >= b.path_limit or (deadline is not None and time.monotonic() > deadline):
            partial = True
            break
        cfg = stack.pop()
        succ = engine.step(cfg)
        for s in reversed(succ):
            if isinstance(s, Terminal):
                outcomes.append(None)  # placeholder keeps DFS order
                outcomes[-1] = engine.finish(s, len(outcomes) - 1)
                engine.stats["paths"] += 1
                if s.status == BOUNDED:
                    engine.stats["depth_bounded"] += 1
                elif s.status == FAULT:
                    engine.stats["faults"] += 1
            else:
                stack.append(s)
    return Exploration(outcomes, engine.stats, partial)
