"""Symbolic heaps with inductive predicates: syntax, parsing, substitution,
unfolding and the concrete satisfaction relation.

A :class:`SymHeap` is ``ex bound. spatial & pure`` where ``spatial`` is a
separating conjunction of points-to atoms and predicate applications (``emp``
when empty) and ``pure`` is a conjunction of pointer (dis)equalities and linear
integer constraints.  Arguments of spatial atoms are variable names, the string
``"null"`` or integer constants.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd
from typing import Iterable, Optional, Union

from . import lia
from .core_lang import PRIMITIVES, ConcreteState, DataDecl, Loc

NULL = "null"
Arg = Union[str, int]


class SpecError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.msg = msg
        self.line = line
        self.col = col


def is_var(a: Arg) -> bool:
    return isinstance(a, str) and a != NULL


# ------------------------------------------------------------------ linear terms


@dataclass(frozen=True)
class Lin:
    """Linear integer term ``sum(coeff * var) + const``."""

    coeffs: tuple[tuple[str, int], ...] = ()
    const: int = 0

    @staticmethod
    def of(x: Union[str, int]) -> "Lin":
        return Lin(((x, 1),), 0) if isinstance(x, str) else Lin((), x)

    @staticmethod
    def _make(d: dict, const: int) -> "Lin":
        return Lin(tuple(sorted((v, k) for v, k in d.items() if k)), const)

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def __add__(self, other: "Lin") -> "Lin":
        d = self.as_dict()
        for v, k in other.coeffs:
            d[v] = d.get(v, 0) + k
        return Lin._make(d, self.const + other.const)

    def scale(self, k: int) -> "Lin":
        return Lin._make({v: c * k for v, c in self.coeffs}, self.const * k)

    def __neg__(self) -> "Lin":
        return self.scale(-1)

    def __sub__(self, other: "Lin") -> "Lin":
        return self + (-other)

    @property
    def vars(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.coeffs)

    def single_var(self) -> Optional[str]:
        if len(self.coeffs) == 1 and self.coeffs[0][1] == 1 and self.const == 0:
            return self.coeffs[0][0]
        return None


# ------------------------------------------------------------------------- atoms


@dataclass(frozen=True)
class PointsTo:
    root: str
    ctype: str
    args: tuple[Arg, ...]


@dataclass(frozen=True)
class PredApp:
    name: str
    args: tuple[Arg, ...]
    depth: int = field(default=0, compare=False)
    marked: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class PtrEq:
    lhs: str
    rhs: str


@dataclass(frozen=True)
class PtrNe:
    lhs: str
    rhs: str


@dataclass(frozen=True)
class LinCon:
    """``sum(terms) + const  op  0`` with op in ``==``, ``<=``, ``!=``."""

    terms: tuple[tuple[str, int], ...]
    const: int
    op: str

    def as_lia(self) -> lia.Atom:
        return (self.terms, self.const, self.op)


@dataclass(frozen=True)
class FalseAtom:
    pass


FALSE = FalseAtom()
Spatial = Union[PointsTo, PredApp]
PureAtom = Union[PtrEq, PtrNe, LinCon, FalseAtom]


def ptr_eq(a: str, b: str) -> Union[PtrEq, bool]:
    if a == b:
        return True
    if a != NULL and b != NULL and b < a or a == NULL:
        a, b = b, a
    return PtrEq(a, b)


def ptr_ne(a: str, b: str) -> Union[PtrNe, bool]:
    if a == b:
        return False
    if a != NULL and b != NULL and b < a or a == NULL:
        a, b = b, a
    return PtrNe(a, b)


def lin_con(terms: Iterable[tuple[str, int]], const: int, op: str) -> Union[LinCon, bool]:
    d: dict = {}
    for v, k in terms:
        d[v] = d.get(v, 0) + k
    items = sorted((v, k) for v, k in d.items() if k)
    if not items:
        return const == 0 if op == "==" else const <= 0 if op == "<=" else const != 0
    g = 0
    for _, k in items:
        g = gcd(g, abs(k))
    if op == "<=":
        items = [(v, k // g) for v, k in items]
        const = -((-const) // g)
    else:
        if const % g:
            return op == "!="
        items = [(v, k // g) for v, k in items]
        const //= g
        if items[0][1] < 0:
            items = [(v, -k) for v, k in items]
            const = -const
    return LinCon(tuple(items), const, op)


def lin_rel(lhs: Lin, op: str, rhs: Lin) -> list[Union[LinCon, bool]]:
    """Relation between two linear terms as normalized atoms (strict forms use integrality)."""
    d = lhs - rhs
    if op in ("=", "=="):
        return [lin_con(d.coeffs, d.const, "==")]
    if op == "!=":
        return [lin_con(d.coeffs, d.const, "!=")]
    if op == "<=":
        return [lin_con(d.coeffs, d.const, "<=")]
    if op == "<":
        return [lin_con(d.coeffs, d.const + 1, "<=")]
    if op == ">=":
        n = -d
        return [lin_con(n.coeffs, n.const, "<=")]
    if op == ">":
        n = -d
        return [lin_con(n.coeffs, n.const + 1, "<=")]
    raise ValueError(op)


def negate_atom(a: PureAtom) -> Union[PureAtom, bool]:
    if isinstance(a, PtrEq):
        return ptr_ne(a.lhs, a.rhs)
    if isinstance(a, PtrNe):
        return ptr_eq(a.lhs, a.rhs)
    if isinstance(a, FalseAtom):
        return True
    if a.op == "==":
        return lin_con(a.terms, a.const, "!=")
    if a.op == "!=":
        return lin_con(a.terms, a.const, "==")
    return lin_con([(v, -k) for v, k in a.terms], -a.const + 1, "<=")


# ---------------------------------------------------------------- pure formulas


@dataclass(frozen=True)
class PAnd:
    items: tuple = ()


@dataclass(frozen=True)
class POr:
    items: tuple = ()


@dataclass(frozen=True)
class PNot:
    item: object


PTRUE = PAnd(())
PureEq = Union[PAnd, POr, PNot, PtrEq, PtrNe, LinCon, FalseAtom]


def pure_dnf(p) -> list[list[PureAtom]]:
    """Disjunctive normal form of a pure formula; unsatisfiable-by-syntax disjuncts dropped."""
    def go(p, neg: bool) -> list[list]:
        if isinstance(p, bool):
            return [[]] if p != neg else []
        if isinstance(p, PNot):
            return go(p.item, not neg)
        if isinstance(p, (PAnd, POr)):
            conj = isinstance(p, PAnd) != neg
            parts = [go(q, neg) for q in p.items]
            if conj:
                out = [[]]
                for part in parts:
                    out = [a + b for a in out for b in part]
                return out
            return [d for part in parts for d in part]
        if isinstance(p, (list, tuple)):
            return go(PAnd(tuple(p)), neg)
        a = negate_atom(p) if neg else p
        if a is True:
            return [[]]
        if a is False or isinstance(a, FalseAtom):
            return []
        return [[a]]
    return go(p, False)


# -------------------------------------------------------------------- SymHeap


@dataclass(frozen=True)
class SymHeap:
    bound: tuple[str, ...] = ()
    spatial: tuple[Spatial, ...] = ()
    pure: tuple[PureAtom, ...] = ()

    @property
    def points_to(self) -> list[PointsTo]:
        return [a for a in self.spatial if isinstance(a, PointsTo)]

    @property
    def preds(self) -> list[PredApp]:
        return [a for a in self.spatial if isinstance(a, PredApp)]

    def conj(self, *atoms) -> "SymHeap":
        """Conjoin pure atoms (booleans allowed: True is dropped, False yields ``false``)."""
        extra = []
        for a in atoms:
            if a is True:
                continue
            extra.append(FALSE if a is False else a)
        return _dedupe(replace(self, pure=self.pure + tuple(extra)))

    def star(self, *atoms: Spatial) -> "SymHeap":
        return replace(self, spatial=self.spatial + tuple(atoms))

    def __str__(self) -> str:
        return format_heap(self)


@dataclass(frozen=True)
class Formula:
    disjuncts: tuple[SymHeap, ...]

    def __str__(self) -> str:
        return " \\/ ".join(format_heap(d) for d in self.disjuncts)


def as_formula(x: Union[SymHeap, Formula]) -> Formula:
    return x if isinstance(x, Formula) else Formula((x,))


def _dedupe(h: SymHeap) -> SymHeap:
    out = []
    seen = set()
    for a in h.pure:
        if a in seen:
            continue
        seen.add(a)
        out.append(a)
    if FALSE in seen:
        out = [FALSE]
    return replace(h, pure=tuple(out))


def atom_vars(a) -> list[str]:
    if isinstance(a, PointsTo):
        return [x for x in (a.root,) + a.args if is_var(x)]
    if isinstance(a, PredApp):
        return [x for x in a.args if is_var(x)]
    if isinstance(a, (PtrEq, PtrNe)):
        return [x for x in (a.lhs, a.rhs) if is_var(x)]
    if isinstance(a, LinCon):
        return [v for v, _ in a.terms]
    return []


def vars_in_order(h: SymHeap, include_bound: bool = False) -> list[str]:
    seen: dict = {}
    for a in h.spatial + h.pure:
        for v in atom_vars(a):
            seen.setdefault(v, None)
    bound = set(h.bound)
    return [v for v in seen if include_bound or v not in bound]


def free_vars(h: Union[SymHeap, Formula]) -> frozenset:
    if isinstance(h, Formula):
        out: set = set()
        for d in h.disjuncts:
            out |= free_vars(d)
        return frozenset(out)
    return frozenset(vars_in_order(h))


def all_vars(h: SymHeap) -> set:
    return set(vars_in_order(h, True)) | set(h.bound)


_TRAIL = re.compile(r"^(.*?)(\d*)$")


def fresh_name(base: str, avoid, keep_base: bool = False) -> str:
    if keep_base and base not in avoid:
        return base
    prefix = _TRAIL.match(base).group(1) or "v"
    k = 1
    while f"{prefix}{k}" in avoid:
        k += 1
    return f"{prefix}{k}"


def _map_arg(a: Arg, m: dict) -> Arg:
    return m.get(a, a) if isinstance(a, str) else a


def subst_atom(a, m: dict):
    """Apply a simultaneous substitution; may return True/False for decided pure atoms."""
    if isinstance(a, PointsTo):
        root = _map_arg(a.root, m)
        if not isinstance(root, str):
            raise SpecError(f"integer substituted for points-to root {a.root}")
        return PointsTo(root, a.ctype, tuple(_map_arg(x, m) for x in a.args))
    if isinstance(a, PredApp):
        return PredApp(a.name, tuple(_map_arg(x, m) for x in a.args), a.depth, a.marked)
    if isinstance(a, PtrEq):
        return ptr_eq(_map_arg(a.lhs, m), _map_arg(a.rhs, m))
    if isinstance(a, PtrNe):
        return ptr_ne(_map_arg(a.lhs, m), _map_arg(a.rhs, m))
    if isinstance(a, LinCon):
        terms = []
        const = a.const
        for v, k in a.terms:
            t = m.get(v, v)
            if isinstance(t, int):
                const += k * t
            elif t == NULL:
                raise SpecError(f"null substituted for integer variable {v}")
            else:
                terms.append((t, k))
        return lin_con(terms, const, a.op)
    return a


def _apply(h: SymHeap, m: dict, bound: Optional[tuple] = None) -> SymHeap:
    spatial = tuple(subst_atom(a, m) for a in h.spatial)
    pure = []
    for a in h.pure:
        r = subst_atom(a, m)
        if r is True:
            continue
        pure.append(FALSE if r is False else r)
    return _dedupe(SymHeap(h.bound if bound is None else bound, spatial, tuple(pure)))


def subst(h: SymHeap, m: dict) -> SymHeap:
    """Capture-avoiding simultaneous substitution of free variables."""
    bound = set(h.bound)
    m = {k: v for k, v in m.items() if k not in bound and k != v}
    if not m:
        return h
    targets = {v for v in m.values() if isinstance(v, str)}
    clash = [w for w in h.bound if w in targets]
    if clash:
        avoid = all_vars(h) | targets | set(m)
        ren = {}
        for w in clash:
            nw = fresh_name(w, avoid)
            avoid.add(nw)
            ren[w] = nw
        h = _apply(h, ren, tuple(ren.get(w, w) for w in h.bound))
    return _apply(h, m)


def substitute(h: SymHeap, t1: Arg, t2: str) -> SymHeap:
    """``h[t1/t2]``: replace free occurrences of ``t2`` by ``t1``."""
    return subst(h, {t2: t1})


def normalize(h: SymHeap) -> SymHeap:
    """Drop trivial atoms and eliminate existentials fixed by an equality."""
    h = _dedupe(h)
    while True:
        bound = set(h.bound)
        target = None
        for a in h.pure:
            if isinstance(a, PtrEq):
                if a.lhs in bound:
                    target = (a.lhs, a.rhs)
                elif a.rhs in bound:
                    target = (a.rhs, a.lhs)
            elif isinstance(a, LinCon) and a.op == "==":
                if len(a.terms) == 1 and a.terms[0][0] in bound and abs(a.terms[0][1]) == 1:
                    v, k = a.terms[0]
                    target = (v, -a.const * k)
                elif len(a.terms) == 2 and a.const == 0 and a.terms[0][1] == -a.terms[1][1] \
                        and abs(a.terms[0][1]) == 1:
                    (u, _), (w, _) = a.terms
                    if w in bound:
                        target = (w, u)
                    elif u in bound:
                        target = (u, w)
            if target:
                break
        if not target:
            break
        w, t = target
        h = _apply(h, {w: t}, tuple(x for x in h.bound if x != w))
    used = set(vars_in_order(h, True))
    return replace(h, bound=tuple(w for w in h.bound if w in used))


# --------------------------------------------------------------- predicate env


@dataclass(frozen=True)
class PredicateDef:
    name: str
    params: tuple[str, ...]
    body: Formula
    sorts: tuple[str, ...] = ()

    def pointer_params(self) -> list[int]:
        return [i for i, s in enumerate(self.sorts) if s != "int"]


class PredicateEnv:
    """Named predicate definitions plus the node-type declarations they mention."""

    def __init__(self, preds: Optional[dict] = None, datas: Optional[dict] = None):
        self.preds: dict[str, PredicateDef] = dict(preds or {})
        self.datas: dict[str, DataDecl] = dict(datas or {})
        self._wf: Optional[dict] = None
        self._consts: Optional[set] = None

    def __contains__(self, name: str) -> bool:
        return name in self.preds

    def __getitem__(self, name: str) -> PredicateDef:
        if name not in self.preds:
            raise SpecError(f"undefined predicate {name!r}")
        return self.preds[name]

    def __len__(self) -> int:
        return len(self.preds)

    def with_preds(self, preds: dict) -> "PredicateEnv":
        return PredicateEnv(preds, self.datas)

    def param_sorts(self, name: str) -> tuple[str, ...]:
        p = self.preds.get(name)
        return p.sorts if p else ()

    def field_sort(self, ctype: str, i: int) -> str:
        d = self.datas.get(ctype)
        if d is None or i >= len(d.fields):
            return "ptr"
        t = d.fields[i][1]
        return "int" if t in PRIMITIVES else t

    def constants(self) -> set:
        if self._consts is None:
            out = set()
            for p in self.preds.values():
                for d in p.body.disjuncts:
                    out |= heap_constants(d)
            self._consts = out
        return self._consts

    def well_founded(self) -> dict:
        """Per predicate: ``("alloc", None)``, ``("measure", index)`` or None (not well-founded)."""
        if self._wf is None:
            self._wf = _classify(self)
        return self._wf


def heap_constants(h: SymHeap) -> set:
    out = set()
    for a in h.spatial:
        out |= {x for x in a.args if isinstance(x, int)}
    for a in h.pure:
        if isinstance(a, LinCon):
            out.add(a.const)
    return out


def _sccs(env: PredicateEnv) -> dict:
    graph = {n: sorted({a.name for d in p.body.disjuncts for a in d.preds}) for n, p in env.preds.items()}
    reach: dict = {}
    for n in graph:
        seen, stack = set(), [n]
        while stack:
            x = stack.pop()
            for y in graph.get(x, []):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        reach[n] = seen
    return {n: frozenset([n] + [m for m in reach[n] if n in reach.get(m, set())]) for n in graph}


def _classify(env: PredicateEnv) -> dict:
    scc = _sccs(env)
    out: dict = {}
    for name, p in env.preds.items():
        kind: Optional[tuple] = ("alloc", None)
        measure_ok: Optional[set] = None
        for d in p.body.disjuncts:
            rec = [a for a in d.preds if a.name in scc[name]]
            if not rec or d.points_to:
                continue
            ok_idx = set()
            ints = [x.as_lia() for x in d.pure if isinstance(x, LinCon)]
            for i, s in enumerate(p.sorts):
                if s != "int":
                    continue
                pv = p.params[i]
                b = lia.var_bounds(ints, pv)
                if b is None or b[0] is None:
                    continue
                good = True
                for a in rec:
                    if a.name != name:
                        good = False
                        break
                    arg = a.args[i]
                    t = Lin.of(arg) - Lin.of(pv) if not (isinstance(arg, str) and arg == NULL) else None
                    if t is None or lia.rational_feasible(ints + [((tuple((v, -k) for v, k in t.coeffs)), -t.const, "<=")]):
                        good = False
                        break
                if good:
                    ok_idx.add(i)
            measure_ok = ok_idx if measure_ok is None else measure_ok & ok_idx
            kind = None
        if kind is None:
            kind = ("measure", min(measure_ok)) if measure_ok else None
        out[name] = kind
    # a predicate is only as well-founded as the predicates it calls
    changed = True
    while changed:
        changed = False
        for name, p in env.preds.items():
            if out[name] is None:
                continue
            for d in p.body.disjuncts:
                for a in d.preds:
                    if a.name not in env.preds or out.get(a.name) is None:
                        out[name] = None
                        changed = True
                        break
                if out[name] is None:
                    break
    return out


# --------------------------------------------------------------------- unfold


def unfold(h: SymHeap, occ: int, env: PredicateEnv, avoid: Iterable[str] = ()) -> list[SymHeap]:
    """Replace the predicate application at spatial position ``occ`` by each body disjunct."""
    if not (0 <= occ < len(h.spatial)) or not isinstance(h.spatial[occ], PredApp):
        raise SpecError("no predicate application at the given position")
    app = h.spatial[occ]
    pdef = env[app.name]
    used = all_vars(h) | set(avoid) | set(pdef.params)
    out = []
    for d in pdef.body.disjuncts:
        taken = set(used)
        ren = {}
        for w in d.bound:
            nw = fresh_name(w, taken, keep_base=True)
            taken.add(nw)
            ren[w] = nw
        m = dict(ren)
        m.update(zip(pdef.params, app.args))
        body = _apply(d, m, tuple(ren[w] for w in d.bound))
        kids = tuple(PredApp(a.name, a.args, app.depth + 1, app.marked) if isinstance(a, PredApp) else a
                     for a in body.spatial)
        new = SymHeap(h.bound + body.bound, h.spatial[:occ] + kids + h.spatial[occ + 1:], h.pure + body.pure)
        out.append(normalize(new))
    return out


def alias(h: SymHeap) -> PAnd:
    """Pointer (dis)equality part of a symbolic heap."""
    return PAnd(tuple(a for a in h.pure if isinstance(a, (PtrEq, PtrNe, FalseAtom))))


# ----------------------------------------------------------------- formatting


def format_arg(a: Arg) -> str:
    return str(a)


def format_lin(terms, const: int) -> str:
    parts = []
    for v, k in terms:
        parts.append(v if k == 1 else f"{k}*{v}")
    if const or not parts:
        parts.append(str(const))
    return " + ".join(parts)


def format_atom(a) -> str:
    if isinstance(a, PointsTo):
        return f"{a.root}->{a.ctype}{{{','.join(format_arg(x) for x in a.args)}}}"
    if isinstance(a, PredApp):
        return f"{a.name}({','.join(format_arg(x) for x in a.args)})"
    if isinstance(a, PtrEq):
        return f"{a.lhs} = {a.rhs}"
    if isinstance(a, PtrNe):
        return f"{a.lhs} != {a.rhs}"
    if isinstance(a, FalseAtom):
        return "false"
    pos = [(v, k) for v, k in a.terms if k > 0]
    neg = [(v, -k) for v, k in a.terms if k < 0]
    lc, rc = (a.const, 0) if a.const > 0 else (0, -a.const)
    op = {"==": "=", "<=": "<=", "!=": "!="}[a.op]
    return f"{format_lin(pos, lc)} {op} {format_lin(neg, rc)}"


_WILD_NAME = re.compile(r"^_\d+$")


def format_heap(h: SymHeap) -> str:
    """Render ``h``; generated wildcard existentials used once print as ``_``."""
    counts: dict = {}
    for a in h.spatial + h.pure:
        for v in atom_vars(a):
            counts[v] = counts.get(v, 0) + 1
    wild = {w for w in h.bound if _WILD_NAME.match(w) and counts.get(w, 0) == 1}
    m = {w: "_" for w in wild}
    spatial = " * ".join(format_atom(subst_atom(a, m) if m else a) for a in h.spatial) if h.spatial else "emp"
    body = " & ".join([spatial] + [format_atom(a) for a in h.pure])
    bound = [w for w in h.bound if w not in wild]
    if bound:
        return f"ex {','.join(bound)}. {body}"
    return body


def format_pure(p) -> str:
    if isinstance(p, PAnd):
        return " & ".join(format_pure(x) for x in p.items) if p.items else "true"
    if isinstance(p, POr):
        return " | ".join(f"({format_pure(x)})" for x in p.items) if p.items else "false"
    if isinstance(p, PNot):
        return f"!({format_pure(p.item)})"
    return format_atom(p)


# -------------------------------------------------------------------- parser

_SPEC_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(\#|//)[^\n]*)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z][A-Za-z0-9_']*|_\d+)
  | (?P<op>\\/|->|==|!=|<=|>=|[-+*&|!=<>(){},;.:_])
    """,
    re.VERBOSE,
)
_SPEC_KW = {"pred", "data", "precond", "ex", "emp", "null", "true", "false"}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _spec_lex(text: str) -> list[_Tok]:
    out = []
    pos, line, ls = 0, 1, 0
    while pos < len(text):
        m = _SPEC_TOKEN.match(text, pos)
        if not m:
            raise SpecError(f"unexpected character {text[pos]!r}", line, pos - ls + 1)
        k, t = m.lastgroup, m.group()
        if k == "nl":
            line += 1
            ls = m.end()
        elif k not in ("ws", "comment"):
            if k == "id" and t in _SPEC_KW:
                k = "kw"
            out.append(_Tok(k, t, line, pos - ls + 1))
        pos = m.end()
    out.append(_Tok("eof", "", line, pos - ls + 1))
    return out


# raw tree produced by the parser, elaborated into SymHeaps afterwards
@dataclass(frozen=True)
class _TOr:
    items: tuple


@dataclass(frozen=True)
class _TAnd:
    items: tuple


@dataclass(frozen=True)
class _TEx:
    names: tuple
    body: object


@dataclass(frozen=True)
class _TNot:
    item: object


@dataclass(frozen=True)
class _TEmp:
    pass


@dataclass(frozen=True)
class _TPts:
    root: str
    ctype: str
    args: tuple
    tok: _Tok


@dataclass(frozen=True)
class _TPred:
    name: str
    args: tuple
    tok: _Tok


@dataclass(frozen=True)
class _TRel:
    lhs: object  # Lin or NULL
    op: str
    rhs: object


@dataclass(frozen=True)
class _TConst:
    value: bool


_WILD = "_"
_RELOPS = ("=", "==", "!=", "<", "<=", ">", ">=")


class _SpecParser:
    def __init__(self, text: str):
        self.toks = _spec_lex(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[_Tok] = None):
        tok = tok or self.tok
        raise SpecError(msg, tok.line, tok.col)

    def at(self, t: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == t

    def accept(self, t: str) -> bool:
        if self.at(t):
            self.i += 1
            return True
        return False

    def expect(self, t: str) -> _Tok:
        if not self.at(t):
            self.error(f"expected {t!r}, found {self.tok.text or 'end of input'!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self) -> _Tok:
        if self.tok.kind != "id":
            self.error(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        tok = self.tok
        self.i += 1
        return tok

    def formula(self):
        items = [self.disjunct()]
        while self.accept("\\/") or self.accept("|"):
            items.append(self.disjunct())
        return items[0] if len(items) == 1 else _TOr(tuple(items))

    def disjunct(self):
        if self.accept("ex"):
            names = [self.ident().text]
            while self.accept(","):
                names.append(self.ident().text)
            self.expect(".")
            return _TEx(tuple(names), self.conj())
        return self.conj()

    def conj(self):
        items = [self.item()]
        while self.accept("*") or self.accept("&"):
            items.append(self.item())
        return items[0] if len(items) == 1 else _TAnd(tuple(items))

    def item(self):
        if self.accept("emp"):
            return _TEmp()
        if self.accept("true"):
            return _TConst(True)
        if self.accept("false"):
            return _TConst(False)
        if self.accept("!"):
            return _TNot(self.item())
        if self.at("("):
            save = self.i
            self.i += 1
            try:
                inner = self.formula()
                self.expect(")")
                if not (self.tok.kind == "op" and self.tok.text in _RELOPS + ("+", "-")):
                    return inner
            except SpecError:
                pass
            self.i = save
            return self.relation()
        if self.tok.kind == "id" and self.toks[self.i + 1].text == "->":
            rt = self.ident()
            self.expect("->")
            ct = self.ident()
            self.expect("{")
            args = self.args("}")
            return _TPts(rt.text, ct.text, tuple(args), rt)
        if self.tok.kind == "id" and self.toks[self.i + 1].text == "(":
            nt = self.ident()
            self.expect("(")
            args = self.args(")")
            return _TPred(nt.text, tuple(args), nt)
        return self.relation()

    def args(self, closer: str) -> list:
        out = []
        if self.accept(closer):
            return out
        while True:
            if self.accept("_"):
                out.append(_WILD)
            elif self.accept("null"):
                out.append(NULL)
            else:
                out.append(self.lin())
            if self.accept(closer):
                return out
            self.expect(",")

    def relation(self):
        lhs = self.term()
        if not (self.tok.kind == "op" and self.tok.text in _RELOPS):
            self.error(f"expected relation, found {self.tok.text or 'end of input'!r}")
        op = self.tok.text
        self.i += 1
        rhs = self.term()
        return _TRel(lhs, "=" if op == "==" else op, rhs)

    def term(self):
        if self.accept("null"):
            return NULL
        return self.lin()

    def lin(self) -> Lin:
        t = self.lin_factor()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.tok.text
            self.i += 1
            u = self.lin_factor()
            t = t + u if op == "+" else t - u
        return t

    def lin_factor(self) -> Lin:
        if self.accept("-"):
            return -self.lin_factor()
        if self.accept("("):
            t = self.lin()
            self.expect(")")
            return t
        if self.tok.kind == "int":
            k = int(self.tok.text)
            self.i += 1
            if self.accept("*"):
                return self.lin_factor().scale(k)
            return Lin.of(k)
        return Lin.of(self.ident().text)


def _tree_dnf(t, neg: bool = False) -> list[tuple[list, list, list]]:
    """DNF of a raw tree as (bound-names, spatial raw atoms, pure raw atoms)."""
    if isinstance(t, _TNot):
        return _tree_dnf(t.item, not neg)
    if isinstance(t, _TConst):
        return [([], [], [])] if t.value != neg else []
    if isinstance(t, _TRel):
        return [([], [], [("rel", t.lhs, _NEG_OP[t.op] if neg else t.op, t.rhs)])]
    if isinstance(t, (_TEmp, _TPts, _TPred)):
        if neg:
            raise SpecError("negation of a spatial formula")
        return [([], [t] if not isinstance(t, _TEmp) else [], [])]
    if isinstance(t, _TEx):
        if neg:
            raise SpecError("negation of an existential formula")
        return [(list(t.names) + b, s, p) for b, s, p in _tree_dnf(t.body)]
    conj = isinstance(t, _TAnd) != neg
    parts = [_tree_dnf(x, neg) for x in t.items]
    if conj:
        out = [([], [], [])]
        for part in parts:
            out = [(b1 + b2, s1 + s2, p1 + p2) for b1, s1, p1 in out for b2, s2, p2 in part]
        return out
    return [d for part in parts for d in part]


_NEG_OP = {"=": "!=", "!=": "=", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}


def _elaborate(bound: list, spatial: list, pure: list, fixed: set) -> tuple[SymHeap, list]:
    """Turn raw atoms into a SymHeap; returns it with a list of pending var-var (dis)equalities."""
    names = set(fixed) | set(bound)
    for a in spatial:
        if isinstance(a, _TPts):
            names.add(a.root)
        for x in a.args:
            if isinstance(x, Lin):
                names |= set(x.vars)
    for r in pure:
        for side in (r[1], r[3]):
            if isinstance(side, Lin):
                names |= set(side.vars)
    bnd = list(dict.fromkeys(bound))
    extra_pure: list = []

    def fresh():
        n = fresh_name("_", names)
        names.add(n)
        bnd.append(n)
        return n

    def arg(x):
        if x == _WILD:
            return fresh()
        if x == NULL:
            return NULL
        v = x.single_var()
        if v is not None:
            return v
        if not x.coeffs:
            return x.const
        n = fresh()
        extra_pure.append(lin_con(((n, 1),) + tuple((v, -k) for v, k in x.coeffs), -x.const, "=="))
        return n

    atoms: list = []
    for a in spatial:
        if isinstance(a, _TPts):
            atoms.append(PointsTo(a.root, a.ctype, tuple(arg(x) for x in a.args)))
        else:
            atoms.append(PredApp(a.name, tuple(arg(x) for x in a.args)))
    pend = []
    out_pure: list = []
    for _, lhs, op, rhs in pure:
        if lhs == NULL or rhs == NULL:
            if op not in ("=", "!="):
                raise SpecError(f"ordering relation {op!r} on null")
            sides = []
            for s in (lhs, rhs):
                if s == NULL:
                    sides.append(NULL)
                else:
                    v = s.single_var()
                    if v is None:
                        raise SpecError("null compared with an arithmetic term")
                    sides.append(v)
            out_pure.append(ptr_eq(*sides) if op == "=" else ptr_ne(*sides))
        elif op in ("=", "!=") and lhs.single_var() and rhs.single_var():
            pend.append((lhs.single_var(), op, rhs.single_var()))
            out_pure.append(("pending", len(pend) - 1))
        else:
            out_pure.extend(lin_rel(lhs, op, rhs))
    out_pure.extend(extra_pure)
    return SymHeap(tuple(bnd), tuple(atoms), tuple(out_pure)), pend


def _resolve(h: SymHeap, pend: list, sorts: dict) -> SymHeap:
    pure = []
    for a in h.pure:
        if isinstance(a, tuple) and a and a[0] == "pending":
            x, op, y = pend[a[1]]
            if sorts.get(x) == "int" or sorts.get(y) == "int":
                a = lin_rel(Lin.of(x), op, Lin.of(y))[0]
            else:
                a = ptr_eq(x, y) if op == "=" else ptr_ne(x, y)
        if a is True:
            continue
        pure.append(FALSE if a is False else a)
    return _dedupe(SymHeap(h.bound, h.spatial, tuple(pure)))


def _merge_sort(cur: Optional[str], new: Optional[str], where: str) -> Optional[str]:
    if new is None or new == cur:
        return cur
    if cur is None:
        return new
    if cur == "ptr" and new != "int":
        return new
    if new == "ptr" and cur != "int":
        return cur
    raise SpecError(f"sort mismatch for {where}: {cur} vs {new}")


def _local_sorts(h: SymHeap, pend: list, init: dict, env: PredicateEnv, callee_sorts: dict) -> dict:
    s = dict(init)
    changed = True

    def put(v, srt, where):
        nonlocal changed
        if not is_var(v):
            return
        m = _merge_sort(s.get(v), srt, where or v)
        if m != s.get(v):
            s[v] = m
            changed = True

    while changed:
        changed = False
        for a in h.spatial:
            if isinstance(a, PointsTo):
                put(a.root, a.ctype, a.root)
                for i, x in enumerate(a.args):
                    put(x, env.field_sort(a.ctype, i), f"{a.ctype} field {i}")
            else:
                cs = callee_sorts.get(a.name)
                if cs is None:
                    continue
                for i, x in enumerate(a.args):
                    if i < len(cs):
                        if cs[i] is not None:
                            put(x, cs[i], f"argument {i} of {a.name}")
                        elif is_var(x) and s.get(x) is not None:
                            cs[i] = s[x]
                            changed = True
        for a in h.pure:
            if isinstance(a, (PtrEq, PtrNe)):
                put(a.lhs, "ptr", a.lhs)
                put(a.rhs, "ptr", a.rhs)
            elif isinstance(a, LinCon):
                for v, _ in a.terms:
                    put(v, "int", v)
            elif isinstance(a, tuple) and a and a[0] == "pending":
                x, _, y = pend[a[1]]
                if s.get(x) is not None:
                    put(y, s[x], y)
                if s.get(y) is not None:
                    put(x, s[y], x)
    return s


def parse_spec(text: str, datas: Iterable[DataDecl] = ()) -> tuple[PredicateEnv, dict]:
    """Parse ``data``/``pred``/``precond`` declarations.

    Returns the predicate environment and a mapping from precondition name to
    ``(params, Formula)``.
    """
    p = _SpecParser(text)
    data_map = {d.name: d for d in datas}
    raw_preds: list = []
    raw_pres: list = []
    while p.tok.kind != "eof":
        if p.accept("data"):
            name = p.ident().text
            p.expect("{")
            fields = []
            while not p.accept("}"):
                ft = p.ident().text
                fn = p.ident().text
                p.expect(";")
                fields.append((fn, ft))
            data_map[name] = DataDecl(name, tuple(fields))
        elif p.at("pred") or p.at("precond"):
            kind = p.tok.text
            p.i += 1
            nt = p.ident()
            params = []
            if kind == "pred" or p.at("("):
                p.expect("(")
                if not p.accept(")"):
                    params.append(p.ident().text)
                    while p.accept(","):
                        params.append(p.ident().text)
                    p.expect(")")
            p.expect("==")
            body = p.formula()
            p.expect(";")
            (raw_preds if kind == "pred" else raw_pres).append((nt, params, body))
        else:
            p.error(f"expected 'data', 'pred' or 'precond', found {p.tok.text or 'end of input'!r}")
    for d in data_map.values():
        for _, t in d.fields:
            if t not in PRIMITIVES and t not in data_map:
                raise SpecError(f"undeclared node-type {t!r} in data {d.name}")
    env = PredicateEnv({}, data_map)
    elaborated = []
    names = {nt.text for nt, _, _ in raw_preds}
    for nt, params, body in raw_preds:
        if len(set(params)) != len(params):
            p.error(f"duplicate parameter in {nt.text}", nt)
        ds = []
        for b, s, pu in _tree_dnf(body):
            h, pend = _elaborate(b, s, pu, set(params))
            _check_closed(h, set(params), nt, names, data_map, "predicate " + nt.text)
            ds.append((h, pend))
        elaborated.append((nt.text, tuple(params), ds))
    callee = {n: [None] * len(ps) for n, ps, _ in elaborated}
    for _ in range(len(elaborated) + 2):
        for n, ps, ds in elaborated:
            for h, pend in ds:
                init = {x: callee[n][i] for i, x in enumerate(ps) if callee[n][i] is not None}
                loc = _local_sorts(h, pend, init, env, callee)
                for i, x in enumerate(ps):
                    m = _merge_sort(callee[n][i], loc.get(x), f"parameter {x} of {n}")
                    callee[n][i] = m
    preds = {}
    for n, ps, ds in elaborated:
        sorts = tuple(s or "ptr" for s in callee[n])
        disj = []
        for h, pend in ds:
            init = dict(zip(ps, sorts))
            loc = _local_sorts(h, pend, init, env, callee)
            disj.append(normalize_bound_order(_resolve(h, pend, loc)))
        preds[n] = PredicateDef(n, ps, Formula(tuple(disj)), sorts)
    env = PredicateEnv(preds, data_map)
    pres = {}
    for nt, params, body in raw_pres:
        disj = []
        for b, s, pu in _tree_dnf(body):
            h, pend = _elaborate(b, s, pu, set(params))
            _check_closed(h, set(params), nt, names, data_map, "precondition " + nt.text)
            loc = _local_sorts(h, pend, {}, env, {k: list(v.sorts) for k, v in preds.items()})
            disj.append(normalize_bound_order(_resolve(h, pend, loc)))
        pres[nt.text] = (tuple(params), Formula(tuple(disj)))
    return env, pres


def normalize_bound_order(h: SymHeap) -> SymHeap:
    used = set(vars_in_order(h, True))
    return replace(h, bound=tuple(w for w in h.bound if w in used))


def _check_closed(h: SymHeap, params: set, tok: _Tok, pred_names: set, datas: dict, what: str) -> None:
    allowed = params | set(h.bound)
    for v in vars_in_order(h, True):
        if v not in allowed:
            raise SpecError(f"unquantified variable {v!r} in {what}", tok.line, tok.col)
    for a in h.spatial:
        if isinstance(a, PredApp) and a.name not in pred_names:
            raise SpecError(f"undefined predicate {a.name!r} in {what}", tok.line, tok.col)
        if isinstance(a, PointsTo):
            d = datas.get(a.ctype)
            if d is None:
                raise SpecError(f"undeclared node-type {a.ctype!r} in {what}", tok.line, tok.col)
            if len(d.fields) != len(a.args):
                raise SpecError(f"arity mismatch for {a.ctype} in {what}", tok.line, tok.col)


def parse_formula(text: str, env: PredicateEnv, params: Iterable[str] = (),
                  sorts: Optional[dict] = None) -> Formula:
    """Parse a standalone formula against ``env``; free variables are allowed."""
    p = _SpecParser(text)
    tree = p.formula()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}")
    disj = []
    callee = {k: list(v.sorts) for k, v in env.preds.items()}
    for b, s, pu in _tree_dnf(tree):
        h, pend = _elaborate(b, s, pu, set(params))
        for a in h.spatial:
            if isinstance(a, PredApp) and a.name not in env.preds:
                raise SpecError(f"undefined predicate {a.name!r}")
        loc = _local_sorts(h, pend, dict(sorts or {}), env, callee)
        disj.append(normalize_bound_order(_resolve(h, pend, loc)))
    return Formula(tuple(disj))


def parse_heap(text: str, env: PredicateEnv, sorts: Optional[dict] = None) -> SymHeap:
    f = parse_formula(text, env, sorts=sorts)
    if len(f.disjuncts) != 1:
        raise SpecError("expected a single symbolic heap")
    return f.disjuncts[0]


def infer_sorts(h: SymHeap, env: PredicateEnv, init: Optional[dict] = None) -> dict:
    """Sort of every variable: ``"int"``, a node-type name, or ``"ptr"``."""
    callee = {k: list(v.sorts) for k, v in env.preds.items()}
    s = _local_sorts(h, [], dict(init or {}), env, callee)
    return {v: s.get(v) or "ptr" for v in vars_in_order(h, True)} | {k: v for k, v in (init or {}).items()}


# ---------------------------------------------------------------- satisfaction

_UNSET = object()


def _to_logic(v):
    if isinstance(v, bool):
        return int(v)
    return v


class _Matcher:
    """Backtracking search for existential witnesses and a heap split."""

    def __init__(self, state: ConcreteState, env: PredicateEnv, budget: int):
        self.env = env
        self.cells = {}
        for loc, rec in state.heap.items():
            d = env.datas.get(rec.ctype)
            names = d.field_names if d else tuple(rec.fields)
            self.cells[loc] = (rec.ctype, tuple(_to_logic(rec.fields.get(f)) for f in names))
        self.budget = budget
        self.wf = env.well_founded()
        self.memo: dict = {}
        self.unknown = False
        self.counter = 0

    def fresh(self) -> str:
        self.counter += 1
        return f"?{self.counter}"

    def value(self, a: Arg, asg: dict):
        if isinstance(a, int):
            return a
        if a == NULL:
            return None
        return asg.get(a, _UNSET)

    def bind(self, a: Arg, val, asg: dict) -> bool:
        cur = self.value(a, asg)
        if cur is _UNSET:
            asg[a] = val
            return True
        return _same(cur, val)

    def run(self, h: SymHeap, stack: dict) -> Optional[bool]:
        ren = {w: self.fresh() for w in h.bound}
        body = _apply(h, ren, ())
        asg = {}
        for v in vars_in_order(body):
            if v in stack:
                asg[v] = _to_logic(stack[v])
        r = self.search(asg, frozenset(self.cells), tuple(body.spatial), tuple(body.pure))
        if r is None or (r is False and self.unknown):
            return None
        return r

    def propagate(self, asg: dict, pure: tuple) -> Optional[tuple]:
        changed = True
        pure = list(pure)
        while changed:
            changed = False
            rest = []
            for a in pure:
                if isinstance(a, FalseAtom):
                    return None
                if isinstance(a, (PtrEq, PtrNe)):
                    x, y = self.value(a.lhs, asg), self.value(a.rhs, asg)
                    if x is not _UNSET and y is not _UNSET:
                        if _same(x, y) != isinstance(a, PtrEq):
                            return None
                        continue
                    if isinstance(a, PtrEq):
                        if x is _UNSET and y is not _UNSET:
                            asg[a.lhs] = y
                            changed = True
                            continue
                        if y is _UNSET and x is not _UNSET:
                            asg[a.rhs] = x
                            changed = True
                            continue
                    rest.append(a)
                    continue
                total = a.const
                unknown = []
                for v, k in a.terms:
                    val = asg.get(v, _UNSET)
                    if val is _UNSET:
                        unknown.append((v, k))
                    elif not isinstance(val, int):
                        return None
                    else:
                        total += k * val
                if not unknown:
                    ok = total == 0 if a.op == "==" else total <= 0 if a.op == "<=" else total != 0
                    if not ok:
                        return None
                    continue
                if a.op == "==" and len(unknown) == 1:
                    v, k = unknown[0]
                    if total % k:
                        return None
                    asg[v] = -total // k
                    changed = True
                    continue
                rest.append(a)
            pure = rest
        return tuple(pure)

    def key(self, asg: dict, remaining: frozenset, spatial: tuple, pure: tuple):
        ren: dict = {}

        def c(x):
            if isinstance(x, int) or x == NULL:
                return x
            val = asg.get(x, _UNSET)
            if val is not _UNSET:
                return ("=", val)
            if x not in ren:
                ren[x] = len(ren)
            return ("?", ren[x])

        sp = tuple((type(a).__name__, getattr(a, "ctype", getattr(a, "name", None)),
                    tuple(c(x) for x in ((a.root,) + a.args if isinstance(a, PointsTo) else a.args)),
                    getattr(a, "depth", 0)) for a in spatial)
        pu = []
        for a in pure:
            if isinstance(a, (PtrEq, PtrNe)):
                pu.append((type(a).__name__, c(a.lhs), c(a.rhs)))
            elif isinstance(a, LinCon):
                pu.append(("L", tuple((c(v), k) for v, k in a.terms), a.const, a.op))
            else:
                pu.append(("F",))
        return remaining, sp, tuple(pu)

    def search(self, asg: dict, remaining: frozenset, spatial: tuple, pure: tuple) -> bool:
        asg = dict(asg)
        pure = self.propagate(asg, pure)
        if pure is None:
            return False
        # points-to atoms whose root is known claim their cell
        progress = True
        spatial = list(spatial)
        while progress:
            progress = False
            for i, a in enumerate(spatial):
                if isinstance(a, PointsTo):
                    root = self.value(a.root, asg)
                    if root is _UNSET:
                        continue
                    if not isinstance(root, Loc) or root not in remaining:
                        return False
                    ctype, vals = self.cells[root]
                    if ctype != a.ctype or len(vals) != len(a.args):
                        return False
                    for x, val in zip(a.args, vals):
                        if not self.bind(x, val, asg):
                            return False
                    remaining = remaining - {root}
                    del spatial[i]
                    pure = self.propagate(asg, pure)
                    if pure is None:
                        return False
                    progress = True
                    break
        n_pts = sum(1 for a in spatial if isinstance(a, PointsTo))
        if n_pts > len(remaining):
            return False
        if not spatial:
            if remaining:
                return False
            return self.residual(asg, pure)
        k = self.key(asg, remaining, tuple(spatial), pure)
        if k in self.memo:
            return self.memo[k]
        self.memo[k] = False
        r = self.branch(asg, remaining, spatial, pure)
        self.memo[k] = r
        return r

    def branch(self, asg, remaining, spatial, pure) -> bool:
        preds = [(i, a) for i, a in enumerate(spatial) if isinstance(a, PredApp)]
        if preds:
            def score(item):
                i, a = item
                return (-sum(1 for x in a.args if self.value(x, asg) is not _UNSET), i)
            i, app = min(preds, key=score)
            pdef = self.env[app.name]
            if app.depth >= self.budget:
                kind = self.wf.get(app.name)
                decided = kind is not None and (
                    kind[0] == "alloc" or self.value(app.args[kind[1]], asg) is not _UNSET)
                if not decided:
                    self.unknown = True
                return False
            rest = spatial[:i] + spatial[i + 1:]
            for d in pdef.body.disjuncts:
                m = {w: self.fresh() for w in d.bound}
                m.update(zip(pdef.params, app.args))
                body = _apply(d, m, ())
                kids = tuple(PredApp(a.name, a.args, app.depth + 1) if isinstance(a, PredApp) else a
                             for a in body.spatial)
                if self.search(asg, remaining, tuple(rest[:i]) + kids + tuple(rest[i:]), pure + body.pure):
                    return True
            return False
        # only points-to atoms with unknown roots remain
        i, a = next((i, a) for i, a in enumerate(spatial) if isinstance(a, PointsTo))
        for loc in sorted(remaining):
            if self.cells[loc][0] != a.ctype:
                continue
            trial = dict(asg)
            trial[a.root] = loc
            if self.search(trial, remaining, tuple(spatial), pure):
                return True
        return False

    def residual(self, asg: dict, pure: tuple) -> bool:
        parent: dict = {}

        def node(x):
            val = self.value(x, asg)
            return ("c", val) if val is not _UNSET else ("v", x)

        def find(n):
            parent.setdefault(n, n)
            while parent[n] != n:
                parent[n] = parent[parent[n]]
                n = parent[n]
            return n

        ints = []
        nes = []
        for a in pure:
            if isinstance(a, PtrEq):
                x, y = find(node(a.lhs)), find(node(a.rhs))
                if x != y:
                    if x[0] == "c" and y[0] == "c":
                        return False
                    if x[0] == "c":
                        parent[y] = x
                    else:
                        parent[x] = y
            elif isinstance(a, PtrNe):
                nes.append(a)
            elif isinstance(a, LinCon):
                ints.append(a)
        for a in nes:
            if find(node(a.lhs)) == find(node(a.rhs)):
                return False
        if not ints:
            return True
        atoms = []
        for a in ints:
            const = a.const
            terms = []
            for v, k in a.terms:
                val = asg.get(v, _UNSET)
                if val is _UNSET:
                    terms.append((v, k))
                else:
                    const += k * val
            atoms.append((tuple(terms), const, a.op))
        verdict, _, _ = lia.solve(atoms, -(2**40), 2**40)
        if verdict == lia.UNKNOWN:
            self.unknown = True
            return False
        return verdict == lia.SAT


def _same(x, y) -> bool:
    if x is None or y is None:
        return x is y
    if isinstance(x, Loc) or isinstance(y, Loc):
        return isinstance(x, Loc) and isinstance(y, Loc) and x == y
    return x == y


def satisfaction_budget(state: ConcreteState, h: Union[SymHeap, Formula], env: PredicateEnv) -> int:
    ints = {0}
    for v in state.stack.values():
        if isinstance(v, int):
            ints.add(int(v))
    for rec in state.heap.values():
        for v in rec.fields.values():
            if isinstance(v, int):
                ints.add(int(v))
    for d in as_formula(h).disjuncts:
        ints |= heap_constants(d)
    ints |= env.constants()
    return len(state.heap) + (max(ints) - min(ints)) + 1 + len(env.preds)


def satisfies(state: ConcreteState, phi: Union[SymHeap, Formula], env: PredicateEnv,
              budget: Optional[int] = None) -> Optional[bool]:
    """``state |= phi``: True, False, or None when undecided within the unfolding budget."""
    if budget is None:
        budget = satisfaction_budget(state, phi, env)
    unknown = False
    for h in as_formula(phi).disjuncts:
        r = _Matcher(state, env, budget).run(h, state.stack)
        if r:
            return True
        if r is None:
            unknown = True
    return None if unknown else False
