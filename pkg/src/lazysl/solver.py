"""Bounded satisfiability and model generation for symbolic heaps.

The search unfolds predicate applications depth first (base disjuncts first)
and refutes a branch as soon as its pure part is inconsistent.  Pointer
reasoning is union-find over (dis)equalities plus separation: distinct
points-to roots differ and are never null.  Integer reasoning goes to
:mod:`lazysl.lia`.

Also hosts the pure-formula services used by lazy initialization
(:func:`pure_implies`, :func:`project`) and the base-pair summaries
(:func:`base_pairs`, :func:`augment`).
"""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Union

from . import lia
from .core_lang import ConcreteState, Loc, Record
from .seplog import (
    FALSE, NULL, FalseAtom, Formula, LinCon, PAnd, PNot, POr, PointsTo, PredApp, PredicateDef,
    PredicateEnv, PtrEq, PtrNe, SymHeap, _apply, all_vars, as_formula, format_heap, fresh_name,
    infer_sorts, is_var, lin_con, negate_atom, normalize, pure_dnf, satisfies, vars_in_order,
)

log = logging.getLogger(__name__)

SAT, UNSAT, UNKNOWN = "SAT", "UNSAT", "UNKNOWN"


class ContractError(Exception):
    """An operation was called outside its documented precondition."""


class SolverError(Exception):
    """Internal inconsistency (for instance a model that fails re-validation)."""


@dataclass(frozen=True)
class SolverBudget:
    unfold_depth: int = 8
    int_lo: int = -16
    int_hi: int = 16
    time: Optional[float] = None
    max_nodes: int = 50_000

    def __post_init__(self):
        if self.unfold_depth < 0:
            raise ValueError("unfold_depth must be >= 0")
        if self.int_lo > self.int_hi:
            raise ValueError("int_lo must be <= int_hi")


@dataclass
class Model:
    """Values for the free variables plus the heap cells of the witness."""

    assignment: dict
    heap: dict
    base: SymHeap

    def to_state(self, names: Optional[Iterable[str]] = None) -> ConcreteState:
        stack = dict(self.assignment) if names is None else {n: self.assignment.get(n) for n in names}
        return ConcreteState({k: Record(r.ctype, dict(r.fields)) for k, r in self.heap.items()}, stack)

    def base_formula(self) -> SymHeap:
        """The predicate-free witness with free variables pinned to their values."""
        pure = []
        for v, val in self.assignment.items():
            if val is None:
                pure.append(PtrEq(v, NULL))
            elif isinstance(val, int):
                pure.append(lin_con(((v, 1),), -int(val), "=="))
        return self.base.conj(*pure)


@dataclass
class SolveVerdict:
    status: str
    model: Optional[Model] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.status == SAT


# ------------------------------------------------------------ pointer closure


class _UF:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        while p != x:
            self.parent[x] = self.parent.setdefault(p, p)
            x, p = p, self.parent[p]
        return x

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a != b:
            # keep null as the representative of its class
            if b == NULL:
                a, b = b, a
            self.parent[b] = a
        return a


def _pointer_closure(eqs: Iterable[tuple], nes: Iterable[tuple]) -> Optional[_UF]:
    uf = _UF()
    uf.find(NULL)
    for a, b in eqs:
        uf.union(a, b)
    for a, b in nes:
        if uf.find(a) == uf.find(b):
            return None
    return uf


def _definite_alloc(env: PredicateEnv) -> dict:
    """Parameter positions whose value is allocated in every model of the predicate."""
    cache = getattr(env, "_alloc_cache", None)
    if cache is not None:
        return cache
    alloc = {n: {i for i, s in enumerate(p.sorts) if s != "int"} for n, p in env.preds.items()}
    changed = True
    while changed:
        changed = False
        for n, p in env.preds.items():
            keep = set(alloc[n])
            for d in p.body.disjuncts:
                here = set()
                roots = {a.root for a in d.points_to}
                for i in alloc[n]:
                    v = p.params[i]
                    if v in roots or any(
                            a.name in alloc and any(j in alloc[a.name] and x == v for j, x in enumerate(a.args))
                            for a in d.preds):
                        here.add(i)
                keep &= here
            if keep != alloc[n]:
                alloc[n] = keep
                changed = True
    env._alloc_cache = alloc
    return alloc


def _nonempty_preds(env: PredicateEnv) -> set:
    cache = getattr(env, "_nonempty_cache", None)
    if cache is not None:
        return cache
    ok: set = set()
    changed = True
    while changed:
        changed = False
        for n, p in env.preds.items():
            if n in ok:
                continue
            for d in p.body.disjuncts:
                if all(a.name in ok for a in d.preds) and _pure_consistent(d, env, integer=False) is not False:
                    ok.add(n)
                    changed = True
                    break
    env._nonempty_cache = ok
    return ok


def _separation_facts(h: SymHeap, env: PredicateEnv) -> tuple[list, list]:
    """Pointer (dis)equalities implied by the spatial part and the pure part."""
    eqs, nes = [], []
    for a in h.pure:
        if isinstance(a, PtrEq):
            eqs.append((a.lhs, a.rhs))
        elif isinstance(a, PtrNe):
            nes.append((a.lhs, a.rhs))
    alloc = _definite_alloc(env)
    roots = [a.root for a in h.points_to]
    for a in h.preds:
        for i in sorted(alloc.get(a.name, ())):
            x = a.args[i]
            if isinstance(x, str):
                roots.append(x)
    # roots of distinct atoms are distinct; two alloc params of the same atom are too
    for r in roots:
        nes.append((r, NULL))
    for r1, r2 in itertools.combinations(roots, 2):
        nes.append((r1, r2))
    return eqs, nes


def _int_atoms(h: SymHeap, bool_vars: Iterable[str] = ()) -> list:
    out = [a.as_lia() for a in h.pure if isinstance(a, LinCon)]
    for v in bool_vars:
        out.append((((v, -1),), 0, "<="))
        out.append((((v, 1),), -1, "<="))
    return out


def _bool_vars(h: SymHeap, env: PredicateEnv) -> list[str]:
    out = []
    for a in h.points_to:
        d = env.datas.get(a.ctype)
        if d is None:
            continue
        for (fname, ftype), x in zip(d.fields, a.args):
            if ftype == "bool" and is_var(x) and x not in out:
                out.append(x)
    return out


def _pure_consistent(h: SymHeap, env: PredicateEnv, integer: bool = True,
                     lo: int = -16, hi: int = 16) -> Optional[bool]:
    if any(isinstance(a, FalseAtom) for a in h.pure):
        return False
    for a in h.points_to:
        if a.root == NULL:
            return False
    eqs, nes = _separation_facts(h, env)
    if _pointer_closure(eqs, nes) is None:
        return False
    ints = _int_atoms(h, _bool_vars(h, env))
    if not ints:
        return True
    if not lia.rational_feasible(ints):
        return False
    if not integer:
        return True
    verdict, _, _ = lia.solve(ints, lo, hi)
    if verdict == lia.UNSAT:
        return False
    return True if verdict == lia.SAT else None


# ------------------------------------------------------------------- search


class _Budget(Exception):
    pass


class Solver:
    """Satisfiability checker with model extraction.

    ``get_model`` is only legal after ``check_sat`` returned SAT for the same
    formula on this instance.
    """

    def __init__(self, env: PredicateEnv, budget: Optional[SolverBudget] = None):
        self.env = env
        self.budget = budget or SolverBudget()
        self._last: Optional[tuple] = None
        self.trace: list[str] = []

    def check_sat(self, phi: Union[SymHeap, Formula]) -> SolveVerdict:
        verdict = _check(as_formula(phi), self.env, self.budget, self.trace)
        self._last = (phi, verdict)
        return verdict

    def get_model(self, phi: Union[SymHeap, Formula]) -> Model:
        if self._last is None or self._last[0] != phi or self._last[1].status != SAT:
            raise ContractError("get_model requires a prior SAT verdict for the same formula")
        return self._last[1].model


def check_sat(phi: Union[SymHeap, Formula], env: PredicateEnv,
              budget: Optional[SolverBudget] = None) -> SolveVerdict:
    return _check(as_formula(phi), env, budget or SolverBudget(), None)


def get_model(phi: Union[SymHeap, Formula], env: PredicateEnv,
              budget: Optional[SolverBudget] = None) -> Model:
    verdict = check_sat(phi, env, budget)
    if verdict.status != SAT:
        raise ContractError(f"get_model on a formula that is {verdict.status}")
    return verdict.model


_CACHE: dict = {}
_CACHE_LIMIT = 4096


def _check(phi: Formula, env: PredicateEnv, budget: SolverBudget, trace: Optional[list]) -> SolveVerdict:
    if trace is not None:
        return _check_uncached(phi, env, budget, trace)
    # verdicts are pure functions of the formula, so repeated queries reuse them
    key = (phi, id(env), budget)
    hit = _CACHE.get(key)
    if hit is not None and hit[0] is env:
        return hit[1]
    v = _check_uncached(phi, env, budget, None)
    if budget.time is None or v.status != UNKNOWN:
        if len(_CACHE) >= _CACHE_LIMIT:
            _CACHE.clear()
        _CACHE[key] = (env, v)
    return v


def _check_uncached(phi: Formula, env: PredicateEnv, budget: SolverBudget, trace: Optional[list]) -> SolveVerdict:
    reasons = []
    for h in phi.disjuncts:
        v = _Search(h, env, budget, trace).run()
        if v.status == SAT:
            return v
        if v.status == UNKNOWN:
            reasons.append(v.reason)
    if reasons:
        return SolveVerdict(UNKNOWN, None, reasons[0])
    return SolveVerdict(UNSAT)


class _Search:
    def __init__(self, h: SymHeap, env: PredicateEnv, budget: SolverBudget, trace: Optional[list]):
        self.orig = h
        self.env = env
        self.budget = budget
        self.trace = trace
        self.deadline = None if budget.time is None else time.monotonic() + budget.time
        self.nodes = 0
        self.unknown = ""
        self.nonempty = _nonempty_preds(env)
        self.free = vars_in_order(h)
        self.sorts = infer_sorts(h, env)
        # bound variables are opened: satisfiability is unaffected
        self.avoid = all_vars(h)

    def log(self, msg: str) -> None:
        if self.trace is not None:
            self.trace.append(msg)
        log.debug(msg)

    def run(self) -> SolveVerdict:
        h = self.orig
        start = SymHeap((), tuple(replace(a, depth=0) if isinstance(a, PredApp) else a for a in h.spatial), h.pure)
        self.limit = self.budget.unfold_depth
        try:
            m = self.dfs(start)
        except _Budget as e:
            return SolveVerdict(UNKNOWN, None, str(e))
        if m is not None:
            return SolveVerdict(SAT, m)
        if self.unknown:
            return SolveVerdict(UNKNOWN, None, self.unknown)
        return SolveVerdict(UNSAT)

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget.max_nodes:
            raise _Budget(f"node budget {self.budget.max_nodes} exhausted")
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Budget(f"time budget {self.budget.time}s exhausted")

    def dfs(self, h: SymHeap) -> Optional[Model]:
        self.tick()
        if any(a.name not in self.nonempty for a in h.preds):
            return None
        ok = _pure_consistent(h, self.env, integer=False)
        if ok is False:
            return None
        preds = [(a.depth, i) for i, a in enumerate(h.spatial) if isinstance(a, PredApp)]
        if not preds:
            return self.leaf(h)
        depth, i = min(preds)
        app = h.spatial[i]
        if depth >= self.limit:
            self.unknown = self.unknown or f"unfold depth {self.budget.unfold_depth} reached"
            return None
        self.log(f"unfold {app.name}({','.join(map(str, app.args))}) at depth {depth}")
        pdef = self.env[app.name]
        rest_l, rest_r = h.spatial[:i], h.spatial[i + 1:]
        for d in pdef.body.disjuncts:
            m = {}
            for w in d.bound:
                nw = fresh_name(w, self.avoid, keep_base=True)
                self.avoid.add(nw)
                m[w] = nw
            m.update(zip(pdef.params, app.args))
            body = _apply(d, m, ())
            kids = tuple(PredApp(a.name, a.args, depth + 1) if isinstance(a, PredApp) else a for a in body.spatial)
            child = SymHeap((), rest_l + kids + rest_r, h.pure + body.pure)
            if any(isinstance(a, FalseAtom) for a in child.pure):
                continue
            r = self.dfs(child)
            if r is not None:
                return r
        return None

    def leaf(self, h: SymHeap) -> Optional[Model]:
        eqs, nes = _separation_facts(h, self.env)
        uf = _pointer_closure(eqs, nes)
        if uf is None:
            return None
        bools = _bool_vars(h, self.env)
        ints = _int_atoms(h, bools)
        int_model: dict = {}
        if ints:
            order = [v for v in self.free if self.sorts.get(v) == "int"]
            verdict, mdl, reason = lia.solve(ints, self.budget.int_lo, self.budget.int_hi, order=order)
            if verdict == lia.UNSAT:
                return None
            if verdict == lia.UNKNOWN:
                self.unknown = self.unknown or reason
                return None
            int_model = mdl
        model = self.build(h, uf, nes, int_model, set(bools))
        ok = satisfies(model.to_state(self.free), self.orig, self.env)
        if ok is None:
            self.unknown = self.unknown or "model re-validation undecided"
            return None
        if not ok:
            raise SolverError(f"model failed re-validation for {format_heap(self.orig)}")
        return model

    def build(self, h: SymHeap, uf: _UF, nes: list, ints: dict, bools: set) -> Model:
        values: dict = {}
        null_cls = uf.find(NULL)
        values[null_cls] = None
        counter = 0
        for a in h.points_to:
            c = uf.find(a.root)
            if c not in values:
                counter += 1
                values[c] = Loc(f"L{counter}")
        ptr_vars = []
        for a in h.spatial:
            for x in ((a.root,) + a.args if isinstance(a, PointsTo) else a.args):
                if is_var(x) and x not in ptr_vars and self._is_ptr(x, h):
                    ptr_vars.append(x)
        for a in h.pure:
            if isinstance(a, (PtrEq, PtrNe)):
                for x in (a.lhs, a.rhs):
                    if is_var(x) and x not in ptr_vars:
                        ptr_vars.append(x)
        for v in self.free:
            if self.sorts.get(v) != "int" and v not in ptr_vars:
                ptr_vars.append(v)
        ne_cls = {(uf.find(a), uf.find(b)) for a, b in nes}
        dangling = 0
        for v in ptr_vars:
            c = uf.find(v)
            if c in values:
                continue
            nulls = [k for k, val in values.items() if val is None]
            if not any((c, k) in ne_cls or (k, c) in ne_cls for k in nulls):
                values[c] = None
                continue
            dangling += 1
            values[c] = Loc(f"D{dangling}")
        # dangling locations are numbered after the allocated ones
        shift = {}
        for k, val in values.items():
            if isinstance(val, Loc) and val.name.startswith("D"):
                counter += 1
                shift[k] = Loc(f"L{counter}")
        values.update(shift)

        def val_of(x):
            if isinstance(x, int):
                return x
            if x == NULL:
                return None
            if x in ints or self.sorts.get(x) == "int" or not self._is_ptr(x, h):
                v = ints.get(x, 0)
                return bool(v) if x in bools else v
            return values[uf.find(x)]

        heap = {}
        for a in h.points_to:
            d = self.env.datas[a.ctype]
            fields = {}
            for (fname, ftype), x in zip(d.fields, a.args):
                v = val_of(x)
                if ftype == "bool":
                    v = bool(v)
                fields[fname] = v
            heap[values[uf.find(a.root)]] = Record(a.ctype, fields)
        assignment = {v: val_of(v) for v in self.free}
        return Model(assignment, heap, h)

    def _is_ptr(self, x: str, h: SymHeap) -> bool:
        s = self.sorts.get(x)
        if s is not None:
            return s != "int"
        return not any(isinstance(a, LinCon) and x in dict(a.terms) for a in h.pure)


# -------------------------------------------------------------- pure services


def _conj_consistent(atoms: list) -> Optional[bool]:
    eqs = [(a.lhs, a.rhs) for a in atoms if isinstance(a, PtrEq)]
    nes = [(a.lhs, a.rhs) for a in atoms if isinstance(a, PtrNe)]
    if any(isinstance(a, FalseAtom) for a in atoms):
        return False
    if _pointer_closure(eqs, nes) is None:
        return False
    ints = [a.as_lia() for a in atoms if isinstance(a, LinCon)]
    if not ints:
        return True
    verdict, _, _ = lia.solve(ints, -(2**20), 2**20)
    return None if verdict == lia.UNKNOWN else verdict == lia.SAT


def pure_implies(alpha, goal) -> bool:
    """Validity of ``alpha => goal`` with null as a distinguished constant.

    Both sides may be atoms, lists of atoms (conjunctions), or PAnd/POr/PNot
    trees.  Undecided integer sub-problems count as "not implied".
    """
    left = pure_dnf(alpha)
    neg = pure_dnf(PNot(goal if not isinstance(goal, (list, tuple)) else PAnd(tuple(goal))))
    for a in left:
        for g in neg:
            r = _conj_consistent(a + g)
            if r is not False:
                return False
    return True


def project(alpha, V: Iterable[str]) -> PAnd:
    """Eliminate the pointer variables outside ``V`` following the equality/disequality case table."""
    V = set(V) | {NULL}
    atoms = _as_atoms(alpha)
    out: list = []
    while atoms:
        a = atoms.pop(0)
        if isinstance(a, FalseAtom):
            return PAnd((FALSE,))
        if isinstance(a, PtrNe):
            if a.lhs == a.rhs:
                return PAnd((FALSE,))
            if a.lhs in V and a.rhs in V:
                out.append(a)
            continue
        if isinstance(a, PtrEq):
            v1, v2 = a.lhs, a.rhs
            if v1 == v2:
                continue
            if v1 not in V:
                atoms = [_rename(x, v1, v2) for x in atoms]
            elif v2 not in V:
                atoms = [_rename(x, v2, v1) for x in atoms]
            else:
                out.append(a)
            continue
    return PAnd(tuple(out))


def _rename(a, old: str, new: str):
    if isinstance(a, PtrEq):
        return PtrEq(new if a.lhs == old else a.lhs, new if a.rhs == old else a.rhs)
    if isinstance(a, PtrNe):
        return PtrNe(new if a.lhs == old else a.lhs, new if a.rhs == old else a.rhs)
    return a


def _as_atoms(alpha) -> list:
    if isinstance(alpha, PAnd):
        out = []
        for x in alpha.items:
            out.extend(_as_atoms(x))
        return out
    if isinstance(alpha, (list, tuple)):
        return [x for y in alpha for x in _as_atoms(y)]
    if isinstance(alpha, (PtrEq, PtrNe, FalseAtom)):
        return [alpha]
    if isinstance(alpha, LinCon):
        return []
    raise ContractError("project expects a conjunction of pointer (dis)equalities")


# --------------------------------------------------------------- base pairs


@dataclass
class BasePairs:
    """Predicate-free summary of a predicate over its parameters."""

    formula: Formula
    complete: bool = True
    reason: str = ""


_SIGNS = (("<0", -1), ("=0", 0), (">0", 1))


def _sign_atom(v: str, sign: str):
    if sign == "=0":
        return lin_con(((v, 1),), 0, "==")
    if sign == ">0":
        return lin_con(((v, -1),), 1, "<=")
    return lin_con(((v, 1),), 1, "<=")


def _abstract_leaf(h: SymHeap, pdef: PredicateDef, env: PredicateEnv) -> list[tuple]:
    """Parameter-level abstractions of a predicate-free formula (one per int sign pattern)."""
    eqs, nes = _separation_facts(h, env)
    uf = _pointer_closure(eqs, nes)
    if uf is None:
        return []
    ints = _int_atoms(h, _bool_vars(h, env))
    if ints and not lia.rational_feasible(ints):
        return []
    ptr_idx = [i for i, s in enumerate(pdef.sorts) if s != "int"]
    int_idx = [i for i, s in enumerate(pdef.sorts) if s == "int"]
    params = pdef.params
    roots = {uf.find(a.root): a.ctype for a in h.points_to}
    ne_set = {(uf.find(a), uf.find(b)) for a, b in nes}
    ne_set |= {(b, a) for a, b in ne_set}

    def implied_ne(x, y) -> bool:
        cx, cy = uf.find(x), uf.find(y)
        if cx == cy:
            return False
        return _pointer_closure(eqs + [(x, y)], nes) is None

    kinds = []
    for i in ptr_idx:
        c = uf.find(params[i])
        if c == uf.find(NULL):
            kinds.append(("null", None))
        elif c in roots:
            kinds.append(("alloc", roots[c]))
        elif implied_ne(params[i], NULL):
            kinds.append(("nonnull", None))
        else:
            kinds.append(("any", None))
    cls = {}
    part = []
    for i in ptr_idx:
        c = uf.find(params[i])
        part.append(cls.setdefault(c, len(cls)))
    diseq = []
    for (a, i), (b, j) in itertools.combinations(list(enumerate(ptr_idx)), 2):
        if part[a] == part[b]:
            continue
        ka, kb = kinds[a][0], kinds[b][0]
        if ka == "alloc" and kb == "alloc":
            continue
        if "null" in (ka, kb) and {ka, kb} & {"alloc", "nonnull"}:
            continue
        if implied_ne(params[i], params[j]):
            diseq.append((a, b))
    out = []
    sign_choices = []
    for i in int_idx:
        sign_choices.append([s for s, _ in _SIGNS])
    for combo in itertools.product(*sign_choices):
        extra = [_sign_atom(params[i], s).as_lia() for i, s in zip(int_idx, combo)]
        if int_idx:
            verdict, _, _ = lia.solve(ints + extra, -64, 64)
            if verdict == lia.UNSAT:
                continue
        out.append((tuple(kinds), tuple(part), tuple(diseq), tuple(combo)))
    return out


def _tuple_heap(key: tuple, pdef: PredicateDef, env: PredicateEnv) -> SymHeap:
    kinds, part, diseq, signs = key
    params = pdef.params
    ptr_idx = [i for i, s in enumerate(pdef.sorts) if s != "int"]
    int_idx = [i for i, s in enumerate(pdef.sorts) if s == "int"]
    rep: dict = {}
    spatial, pure, bound = [], [], []
    names = set(params)
    for a, i in enumerate(ptr_idx):
        p = params[i]
        kind, ctype = kinds[a]
        if part[a] in rep:
            if kind != "null":
                pure.append(PtrEq(rep[part[a]], p))
            else:
                pure.append(PtrEq(p, NULL))
            continue
        rep[part[a]] = p
        if kind == "null":
            pure.append(PtrEq(p, NULL))
        elif kind == "nonnull":
            pure.append(PtrNe(p, NULL))
        elif kind == "alloc":
            d = env.datas[ctype]
            args = []
            for _ in d.fields:
                w = fresh_name("_", names)
                names.add(w)
                bound.append(w)
                args.append(w)
            spatial.append(PointsTo(p, ctype, tuple(args)))
    for a, b in diseq:
        pure.append(PtrNe(params[ptr_idx[a]], params[ptr_idx[b]]))
    for i, s in zip(int_idx, signs):
        pure.append(_sign_atom(params[i], s))
    return SymHeap(tuple(bound), tuple(spatial), tuple(x for x in pure if x is not True))


def _compute_base_pairs(env: PredicateEnv, max_rounds: int) -> tuple[dict, bool]:
    cache = getattr(env, "_base_cache", None)
    if cache is not None and cache[2] >= max_rounds:
        return cache[0], cache[1]
    tuples: dict = {n: [] for n in env.preds}
    seen: dict = {n: set() for n in env.preds}
    complete = False
    for _ in range(max_rounds):
        changed = False
        snapshot = {n: [(_tuple_heap(k, env.preds[n], env), k) for k in ts] for n, ts in tuples.items()}
        for n, p in env.preds.items():
            for d in p.body.disjuncts:
                apps = d.preds
                choices = [snapshot.get(a.name, []) for a in apps]
                for combo in itertools.product(*choices):
                    avoid = all_vars(d) | set(p.params)
                    spatial = list(d.points_to)
                    pure = list(d.pure)
                    for app, (th, _) in zip(apps, combo):
                        q = env.preds[app.name]
                        m = {}
                        for w in th.bound:
                            nw = fresh_name(w, avoid)
                            avoid.add(nw)
                            m[w] = nw
                        m.update(zip(q.params, app.args))
                        inst = _apply(th, m, ())
                        spatial.extend(inst.spatial)
                        pure.extend(inst.pure)
                    leaf = SymHeap((), tuple(spatial), tuple(pure))
                    for key in _abstract_leaf(leaf, p, env):
                        if key not in seen[n]:
                            seen[n].add(key)
                            tuples[n].append(key)
                            changed = True
        if not changed:
            complete = True
            break
    env._base_cache = (tuples, complete, max_rounds)
    return tuples, complete


def base_pairs(pdef: PredicateDef, env: PredicateEnv, budget: Optional[SolverBudget] = None) -> BasePairs:
    """Predicate-free disjunction describing, per parameter, null / allocated /
    non-null / unconstrained, the aliasing partition and the sign of integer
    parameters, computed as a fixed point over the definitions."""
    rounds = max(4, 2 * (budget or SolverBudget()).unfold_depth)
    tuples, complete = _compute_base_pairs(env, rounds)
    heaps = tuple(_tuple_heap(k, pdef, env) for k in tuples.get(pdef.name, []))
    if not complete:
        return BasePairs(Formula(heaps), False, f"no fixed point within {rounds} rounds")
    return BasePairs(Formula(heaps))


def _syntactic_key(h: SymHeap):
    h = normalize(h)
    return (frozenset(h.pure), len(h.spatial))


def _pointer_only(env: PredicateEnv) -> set:
    """Predicates that, together with everything they call, have no integer parameters."""
    ok = {n for n, p in env.preds.items() if "int" not in p.sorts}
    changed = True
    while changed:
        changed = False
        for n in list(ok):
            if any(a.name not in ok for d in env.preds[n].body.disjuncts for a in d.preds):
                ok.discard(n)
                changed = True
    return ok


def augment(env: PredicateEnv, budget: Optional[SolverBudget] = None) -> PredicateEnv:
    """Prepend the heap-free base pairs that are not already base cases."""
    if not env.preds:
        return env
    cache = getattr(env, "_augmented", None)
    if cache is not None:
        return cache
    preds = {}
    exact = _pointer_only(env)
    for n, p in env.preds.items():
        if n not in exact:
            # sign abstraction of integer parameters is not exact, so it may not be added as a case
            preds[n] = p
            continue
        bp = base_pairs(p, env, budget)
        if not bp.complete:
            log.info("augment: leaving %s unchanged (%s)", n, bp.reason)
            preds[n] = p
            continue
        base_keys = {_syntactic_key(d) for d in p.body.disjuncts if not d.preds}
        extra = []
        for h in bp.formula.disjuncts:
            if h.spatial:
                continue
            if _syntactic_key(h) in base_keys:
                continue
            extra.append(h)
        preds[n] = PredicateDef(n, p.params, Formula(tuple(extra) + p.body.disjuncts), p.sorts) if extra else p
    out = PredicateEnv(preds, env.datas)
    env._augmented = out
    out._augmented = out
    return out
