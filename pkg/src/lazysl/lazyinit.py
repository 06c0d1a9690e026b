"""Context-sensitive lazy initialization.

When symbolic execution dereferences a reference whose target is not yet a
points-to atom in the path condition, :func:`enum` produces the alternative
contexts in which it is initialized.  Predicates constraining the reference
are unfolded by :func:`lfp` until the abstraction of the reference's possible
values (null, an existing cell, a new cell, unknown) together with the aliasing
among relevant variables stops growing.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional

from .seplog import (
    NULL, FalseAtom, PAnd, POr, PointsTo, PredApp, PredicateEnv, PtrEq, PtrNe, SymHeap,
    alias, all_vars, format_heap, format_pure, fresh_name, is_var, normalize, unfold,
)
from .solver import UNSAT, SolverBudget, _UF, augment, check_sat, project, pure_implies

log = logging.getLogger(__name__)

DEFAULT_ITER_CAP = 32


class LFPDivergence(Exception):
    """The fixed-point iteration hit its cap without stabilizing."""


@dataclass(frozen=True)
class AbsFact:
    """Abstract value of the initialized reference: null, alias, new or true."""

    kind: str
    target: Optional[str] = None

    def render(self, x: str) -> str:
        if self.kind == "null":
            return f"s({x})=null"
        if self.kind == "alias":
            return f"s({x})={self.target}"
        if self.kind == "new":
            return f"ex l'. s({x})=l'"
        return "true"

    def encode(self, proxy: str):
        if self.kind == "null":
            return PtrEq(proxy, NULL)
        if self.kind == "alias":
            return PtrEq(proxy, self.target) if proxy < self.target else PtrEq(self.target, proxy)
        if self.kind == "new":
            return PtrNe(proxy, NULL)
        return PAnd(())


@dataclass
class EnumContext:
    heap: SymHeap
    provenance: str


@dataclass
class LFPResult:
    contexts: list[SymHeap]
    iterations: int
    rows: list = field(default_factory=list)  # (i, [SymHeap], [(AbsFact, PAnd)] or None)
    var: str = "x"

    def abstraction(self, i: int) -> list:
        return self.rows[i][2]

    def dump(self) -> str:
        """Stable text table of every iteration: index, contexts, abstraction."""
        lines = ["i | SV_i | A_i"]
        for i, sv, a in self.rows:
            ctx = " ; ".join(format_heap(h) for h in sv)
            lines.append(f"{i} | {ctx} | {render_abstraction(a, self.var)}")
        return "\n".join(lines) + "\n"


def render_abstraction(a, x: str) -> str:
    if a is None:
        return "false"
    parts = []
    for fact, proj in a:
        s = fact.render(x)
        if proj.items:
            s = f"{s} & {format_pure(proj)}" if fact.kind != "true" else format_pure(proj)
        parts.append(s)
    return " \\/ ".join(parts) if parts else "false"


# ----------------------------------------------------------------- closures


def _alias_uf(h: SymHeap) -> Optional[_UF]:
    uf = _UF()
    uf.find(NULL)
    for a in h.pure:
        if isinstance(a, PtrEq):
            uf.union(a.lhs, a.rhs)
        elif isinstance(a, FalseAtom):
            return None
    return uf


def _pointer_args(app: PredApp, env: PredicateEnv) -> list[str]:
    sorts = env.param_sorts(app.name)
    return [x for i, x in enumerate(app.args) if is_var(x) and (i >= len(sorts) or sorts[i] != "int")]


def rele(seed: Iterable[str], h: SymHeap, env: PredicateEnv) -> frozenset:
    """Least superset of ``seed`` absorbing the pointer arguments of every
    predicate application that shares a member with it modulo aliasing."""
    V = set(seed)
    uf = _alias_uf(h)

    def same(a, b):
        return uf is None or uf.find(a) == uf.find(b)

    changed = True
    while changed:
        changed = False
        for app in h.preds:
            ts = _pointer_args(app, env)
            meets = any(same(t, v) for t in ts for v in V)
            outside = [t for t in ts if not any(same(t, v) for v in V)]
            if meets and outside:
                V |= set(ts)
                changed = True
    return frozenset(V)


def marked_predicates(x: str, h: SymHeap, env: PredicateEnv) -> list[int]:
    """Spatial positions of predicate applications whose pointer arguments lie in ``rele({x})``."""
    V = rele({x}, h, env)
    uf = _alias_uf(h)
    out = []
    for i, a in enumerate(h.spatial):
        if not isinstance(a, PredApp):
            continue
        ts = _pointer_args(a, env)
        if ts and all(any(uf is None or uf.find(t) == uf.find(v) for v in V) for t in ts):
            out.append(i)
    return out


def abs_fact(x: str, V: Iterable[str], h: SymHeap) -> AbsFact:
    """First matching case: null, existing cell in V, new cell outside V, else true."""
    V = set(V)
    alpha = alias(h)
    if pure_implies(alpha, PtrEq(x, NULL) if x != NULL else PAnd(())):
        return AbsFact("null")
    roots = [a.root for a in h.points_to]
    for r in roots:
        if r in V and (r == x or pure_implies(alpha, _eq(x, r))):
            return AbsFact("alias", r)
    for r in roots:
        if r not in V and (r == x or pure_implies(alpha, _eq(x, r))):
            return AbsFact("new")
    return AbsFact("true")


def _eq(a: str, b: str):
    return PtrEq(a, b) if (b == NULL or (a != NULL and a < b)) else PtrEq(b, a)


# --------------------------------------------------------------------- LFP


def _mark(h: SymHeap, positions: Iterable[int]) -> SymHeap:
    pos = set(positions)
    return replace(h, spatial=tuple(replace(a, marked=True) if i in pos else a for i, a in enumerate(h.spatial)))


def _pick(h: SymHeap, x: str) -> Optional[int]:
    marked = [i for i, a in enumerate(h.spatial) if isinstance(a, PredApp) and a.marked]
    if not marked:
        return None
    uf = _alias_uf(h)
    for i in marked:
        if any(uf is None or uf.find(t) == uf.find(x) for t in h.spatial[i].args if is_var(t)):
            return i
    return marked[0]


def lfp(x: str, h: SymHeap, V: Iterable[str], s: Mapping[str, str], env: PredicateEnv,
        budget: Optional[SolverBudget] = None, iter_cap: int = DEFAULT_ITER_CAP,
        avoid: Iterable[str] = ()) -> LFPResult:
    """Fixed-point enumeration of the contexts initializing program variable ``x``.

    ``h`` should carry marks on the predicates constraining ``s[x]``; when
    none are marked, those returned by :func:`marked_predicates` are marked.
    Children of unfolded predicates inherit the mark.  Unsatisfiable contexts
    are dropped.  Returns the contexts of the last iteration before the
    abstraction stopped growing.
    """
    X = s.get(x, x)
    V = frozenset(V)
    if not any(isinstance(a, PredApp) and a.marked for a in h.spatial):
        h = _mark(h, marked_predicates(X, h, env))
    budget = budget or SolverBudget()
    avoid = set(avoid) | set(s.values())
    proxy = fresh_name("sx", avoid | all_vars(h))
    sv = [h]
    A = None
    rows = [(0, list(sv), None)]
    i = 0
    loops = 0
    while True:
        loops += 1
        if loops > iter_cap:
            raise LFPDivergence(f"no fixed point for {x} within {iter_cap} iterations")
        nxt = []
        for ctx in sv:
            occ = _pick(ctx, X)
            if occ is None:
                nxt.append(ctx)
                continue
            for child in unfold(ctx, occ, env, avoid):
                if check_sat(child, env, budget).status == UNSAT:
                    continue
                nxt.append(child)
        facts = []
        for ctx in nxt:
            f = abs_fact(X, V, ctx)
            pair = (f, project(alias(ctx), V))
            if pair not in facts:
                facts.append(pair)
        if A is not None and _implies(facts, A, proxy):
            rows.append((i + 1, nxt, facts))
            return LFPResult(sv, loops, rows, x)
        if A is None and not facts:
            # nothing satisfiable remains: the empty disjunction implies false
            rows.append((i + 1, nxt, facts))
            return LFPResult(sv, loops, rows, x)
        if not any(isinstance(a, PredApp) and a.marked for c in nxt for a in c.spatial):
            # nothing left to unfold, so the next round would repeat this one
            rows.append((i + 1, nxt, facts))
            return LFPResult(nxt, loops, rows, x)
        sv, A = nxt, facts
        i += 1
        rows.append((i, list(sv), A))


def _implies(new: list, old: list, proxy: str) -> bool:
    def enc(facts):
        return POr(tuple(PAnd((f.encode(proxy), proj)) for f, proj in facts))
    return pure_implies(enc(new), enc(old))


# -------------------------------------------------------------------- enum


def enum(x: str, s: Mapping[str, str], h: SymHeap, env: PredicateEnv,
         budget: Optional[SolverBudget] = None, iter_cap: int = DEFAULT_ITER_CAP,
         ctype: Optional[str] = None, avoid: Iterable[str] = (),
         augmented: bool = False) -> list[EnumContext]:
    """Contexts in which the reference held by program variable ``x`` is initialized.

    Scenario 1: already null or a points-to root, returned unchanged.
    Scenario 3: constrained by a predicate, resolved by :func:`lfp`.
    Scenario 2: otherwise null, a fresh cell, or any existing cell of type ``ctype``.
    """
    budget = budget or SolverBudget()
    if not augmented:
        env = augment(env, budget)
    X = s.get(x, x)
    alpha = alias(h)
    if X == NULL or pure_implies(alpha, PtrEq(X, NULL)):
        return [EnumContext(h, "initialized:null")]
    for a in h.points_to:
        if a.root == X or pure_implies(alpha, _eq(X, a.root)):
            return [EnumContext(h, f"initialized:{a.root}")]
    marked = marked_predicates(X, h, env)
    if marked:
        roots = {a.root for a in h.points_to}
        uf = _alias_uf(h)
        seeds = {X}
        for v, val in s.items():
            if is_var(val) and any(uf is None or uf.find(val) == uf.find(r) for r in roots):
                seeds.add(val)
        V = rele(seeds, h, env)
        res = lfp(x, _mark(h, marked), V, s, env, budget, iter_cap, avoid)
        if log.isEnabledFor(logging.DEBUG):
            log.debug("lfp on %s:\n%s", x, res.dump())
        return [EnumContext(c, f"lfp:{k}") for k, c in enumerate(res.contexts)]
    out = []
    cand = [h.conj(_eq(X, NULL))]
    names = all_vars(h) | set(avoid) | set(s.values())
    if ctype is not None and ctype in env.datas:
        args = []
        for fname, _ in env.datas[ctype].fields:
            w = fresh_name(f"{X}_{fname}", names, keep_base=True)
            names.add(w)
            args.append(w)
        cand.append(h.star(PointsTo(X, ctype, tuple(args))))
    tags = ["null", "new"]
    for a in h.points_to:
        if ctype is None or a.ctype == ctype:
            cand.append(h.conj(_eq(X, a.root)))
            tags.append(f"existing:{a.root}")
    for tag, c in zip(tags, cand):
        if check_sat(c, env, budget).status == UNSAT:
            continue
        out.append(EnumContext(normalize(c), tag))
    return out
