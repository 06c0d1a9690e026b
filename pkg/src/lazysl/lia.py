"""Linear integer arithmetic over conjunctions of atoms.

An atom is ``(coeffs, const, op)`` read as ``sum(c * v) + const  op  0`` with
``op`` one of ``"=="``, ``"<="``, ``"!="``.  Rational feasibility is decided by
Gaussian elimination followed by Fourier-Motzkin; integer models are found by
branching on variable values inside a box, pruned by the rational relaxation.
"""
from __future__ import annotations

from collections import deque
from fractions import Fraction
from math import ceil, floor
from typing import Iterable, Optional

Atom = tuple[tuple[tuple[str, int], ...], int, str]

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"

_Row = tuple[dict, Fraction]


def _rows(atoms: Iterable[Atom], fixed: Optional[dict] = None) -> tuple[list[_Row], list[_Row], list[_Row]]:
    """Split atoms into equality, inequality and disequality rows with ``fixed`` values plugged in."""
    fixed = fixed or {}
    eqs, les, nes = [], [], []
    for terms, const, op in atoms:
        row: dict = {}
        c = Fraction(const)
        for v, k in terms:
            if v in fixed:
                c += k * fixed[v]
            elif k:
                row[v] = row.get(v, 0) + Fraction(k)
        row = {v: k for v, k in row.items() if k}
        (eqs if op == "==" else les if op == "<=" else nes).append((row, c))
    return eqs, les, nes


def _eliminate_equalities(eqs: list[_Row], les: list[_Row], keep: frozenset = frozenset()) -> Optional[list[_Row]]:
    """Solve equalities for non-kept variables and substitute them into the inequalities."""
    solved: dict = {}  # v -> (expr, const); expr only mentions variables solved later
    resolved: dict = {}

    def resolve(v):
        if v not in resolved:
            expr, ec = solved[v]
            resolved[v] = reduce(expr, ec)
        return resolved[v]

    def reduce(row, c):
        if not any(u in solved for u in row):
            return row, c
        out: dict = {}
        for u, k in row.items():
            if u in solved:
                e, ec = resolve(u)
                c += k * ec
                for w, a in e.items():
                    out[w] = out.get(w, 0) + k * a
            else:
                out[u] = out.get(u, 0) + k
        return {u: a for u, a in out.items() if a}, c

    les = list(les)
    for row, c in eqs:
        row, c = reduce(row, c)
        if not row:
            if c != 0:
                return None
            continue
        free = [u for u in row if u not in keep]
        if not free:
            les.append((row, c))
            les.append(({u: -k for u, k in row.items()}, -c))
            continue
        v = min(free)
        a = row[v]
        solved[v] = ({u: -k / a for u, k in row.items() if u != v}, -c / a)
        resolved.clear()
    return [reduce(r, c) for r, c in les]


def _fm(les: list[_Row], keep: frozenset = frozenset()) -> Optional[list[_Row]]:
    """Eliminate every variable not in ``keep``; None when infeasible."""
    rows = []
    seen = set()
    for r, c in les:
        key = (tuple(sorted(r.items())), c)
        if key not in seen:
            seen.add(key)
            rows.append((r, c))
    while True:
        for r, c in rows:
            if not r and c > 0:
                return None
        rows = [(r, c) for r, c in rows if r]
        candidates = {v for r, _ in rows for v in r if v not in keep}
        if not candidates:
            return rows
        best, best_cost = None, None
        for v in sorted(candidates):
            pos = sum(1 for r, _ in rows if r.get(v, 0) > 0)
            neg = sum(1 for r, _ in rows if r.get(v, 0) < 0)
            cost = pos * neg - pos - neg
            if best_cost is None or cost < best_cost:
                best, best_cost = v, cost
        v = best
        pos = [(r, c) for r, c in rows if r.get(v, 0) > 0]
        neg = [(r, c) for r, c in rows if r.get(v, 0) < 0]
        rest = [(r, c) for r, c in rows if not r.get(v, 0)]
        for pr, pc in pos:
            for nr, nc in neg:
                a, b = pr[v], -nr[v]
                row = {}
                for u, k in pr.items():
                    if u != v:
                        row[u] = row.get(u, 0) + k / a
                for u, k in nr.items():
                    if u != v:
                        row[u] = row.get(u, 0) + k / b
                row = {u: k for u, k in row.items() if k}
                key = (tuple(sorted(row.items())), pc / a + nc / b)
                if key not in seen:
                    seen.add(key)
                    rest.append((row, pc / a + nc / b))
        rows = rest


_ZERO = object()


def _difference_edges(atoms: Iterable[Atom], fixed: Optional[dict] = None) -> Optional[list]:
    """Edges ``(u, v, w)`` meaning ``v - u <= w`` when every atom is a difference
    constraint (unit coefficients, at most two variables of opposite sign); else None.
    Such systems are totally unimodular, so rational and integer feasibility agree."""
    fixed = fixed or {}
    edges = []
    for terms, const, op in atoms:
        if op == "!=":
            continue
        c = const
        live = []
        for v, k in terms:
            if v in fixed:
                c += k * fixed[v]
            elif k:
                live.append((v, k))
        if len(live) == 0:
            if (op == "==" and c != 0) or (op == "<=" and c > 0):
                edges.append((_ZERO, _ZERO, -1))
            continue
        if len(live) == 1:
            (v, k), = live
            if k == 1:
                pos, neg = v, _ZERO
            elif k == -1:
                pos, neg = _ZERO, v
            else:
                return None
        elif len(live) == 2:
            (a, ka), (b, kb) = live
            if ka == 1 and kb == -1:
                pos, neg = a, b
            elif ka == -1 and kb == 1:
                pos, neg = b, a
            else:
                return None
        else:
            return None
        # pos - neg + c <= 0
        edges.append((neg, pos, -c))
        if op == "==":
            edges.append((pos, neg, c))
    return edges


def _shortest(edges: list, source) -> Optional[dict]:
    """Queue-based Bellman-Ford distances from ``source``; None on a negative cycle."""
    adj: dict = {}
    for u, v, w in edges:
        adj.setdefault(u, []).append((v, w))
    n = len(adj) + 1
    dist = {source: 0}
    count = {source: 0}
    queue = deque([source])
    queued = {source}
    while queue:
        u = queue.popleft()
        queued.discard(u)
        du = dist[u]
        for v, w in adj.get(u, ()):
            if v not in dist or du + w < dist[v]:
                dist[v] = du + w
                count[v] = count[u] + 1
                if count[v] > n:
                    return None
                if v not in queued:
                    queued.add(v)
                    queue.append(v)
    return dist


def _difference_feasible(edges: list) -> bool:
    # a virtual source reaching every node detects any negative cycle
    src = object()
    nodes = {u for u, _, _ in edges} | {v for _, v, _ in edges}
    return _shortest(edges + [(src, n, 0) for n in nodes], src) is not None


def rational_feasible(atoms: Iterable[Atom], fixed: Optional[dict] = None) -> bool:
    """Feasibility over the rationals; disequalities are ignored (they only cut out points)."""
    atoms = list(atoms)
    edges = _difference_edges(atoms, fixed)
    if edges is not None:
        return _difference_feasible(edges)
    eqs, les, _ = _rows(atoms, fixed)
    les = _eliminate_equalities(eqs, les)
    return les is not None and _fm(les) is not None


def _bounds_rows(eqs, les, v) -> Optional[tuple[Optional[Fraction], Optional[Fraction]]]:
    """Project onto ``v``: (lower, upper), either side None when unbounded."""
    out = _eliminate_equalities(eqs, les, frozenset([v]))
    if out is None:
        return None
    rows = _fm(out, frozenset([v]))
    if rows is None:
        return None
    lo = hi = None
    for r, c in rows:
        k = r.get(v, 0)
        if not k:
            continue
        bound = -c / k
        if k > 0:
            hi = bound if hi is None else min(hi, bound)
        else:
            lo = bound if lo is None else max(lo, bound)
    if lo is not None and hi is not None and lo > hi:
        return None
    return lo, hi


def _value_order(lo: int, hi: int):
    if lo > hi:
        return
    if lo <= 0 <= hi:
        yield 0
        k = 1
        while -k >= lo or k <= hi:
            if -k >= lo:
                yield -k
            if k <= hi:
                yield k
            k += 1
    elif lo > 0:
        yield from range(lo, hi + 1)
    else:
        yield from range(hi, lo - 1, -1)


def _components(atoms: list[Atom], variables: list[str]) -> list[tuple[list[Atom], list[str]]]:
    parent = {v: v for v in variables}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for terms, _, _ in atoms:
        vs = [v for v, k in terms if k]
        for u in vs[1:]:
            a, b = find(vs[0]), find(u)
            if a != b:
                parent[b] = a
    groups: dict[str, tuple[list, list]] = {}
    for v in variables:
        groups.setdefault(find(v), ([], []))[1].append(v)
    ground = []
    for a in atoms:
        vs = [v for v, k in a[0] if k]
        if vs:
            groups[find(vs[0])][0].append(a)
        else:
            ground.append(a)
    out = list(groups.values())
    if ground:
        out.append((ground, []))
    return out


def _holds(atom: Atom, asg: dict) -> bool:
    terms, const, op = atom
    val = const + sum(k * asg[v] for v, k in terms)
    return val == 0 if op == "==" else val <= 0 if op == "<=" else val != 0


def _search(atoms: list[Atom], order: list[str], lo: int, hi: int, asg: dict,
            steps: list[int]) -> Optional[dict]:
    steps[0] -= 1
    if steps[0] < 0:
        raise _Exhausted()
    i = len(asg)
    if i == len(order):
        return dict(asg) if all(_holds(a, asg) for a in atoms) else None
    v = order[i]
    edges = _difference_edges(atoms, asg)
    if edges is not None:
        edges += [(_ZERO, u, hi) for u in order[i:]] + [(u, _ZERO, -lo) for u in order[i:]]
        # box edges make every live variable reachable, so negative cycles surface here
        up = _shortest(edges, _ZERO)
        down = _shortest([(b, a, w) for a, b, w in edges], _ZERO)
        if up is None or down is None:
            return None
        blo, bhi = -down.get(v, lo), up.get(v, hi)
    else:
        eqs, les, _ = _rows(atoms, asg)
        box = [({u: Fraction(1)}, Fraction(-hi)) for u in order[i:]] + \
              [({u: Fraction(-1)}, Fraction(lo)) for u in order[i:]]
        b = _bounds_rows(eqs, les + box, v)
        if b is None:
            return None
        blo, bhi = b
    vlo = lo if blo is None else max(lo, ceil(blo))
    vhi = hi if bhi is None else min(hi, floor(bhi))
    for val in _value_order(vlo, vhi):
        asg[v] = val
        ok = True
        for a in atoms:
            if all(u in asg for u, _ in a[0]) and not _holds(a, asg):
                ok = False
                break
        if ok:
            r = _search(atoms, order, lo, hi, asg, steps)
            if r is not None:
                del asg[v]
                return r
        del asg[v]
    return None


class _Exhausted(Exception):
    pass


def solve(atoms: Iterable[Atom], lo: int, hi: int, order: Optional[list[str]] = None,
          max_steps: int = 200_000) -> tuple[str, Optional[dict], str]:
    """Decide a conjunction over the integers.

    Returns ``(SAT, model, "")``, ``(UNSAT, None, "")`` or ``(UNKNOWN, None, reason)``.
    Models live inside ``[lo, hi]`` and prefer the smallest magnitude, then the
    smallest value, for each variable in ``order``.
    """
    atoms = list(atoms)
    variables: list[str] = []
    seen = set()
    for v in (order or []):
        if v not in seen:
            seen.add(v)
            variables.append(v)
    for terms, _, _ in atoms:
        for v, _ in terms:
            if v not in seen:
                seen.add(v)
                variables.append(v)
    model: dict = {}
    unknown = ""
    for comp_atoms, comp_vars in _components(atoms, variables):
        if not comp_atoms:
            for v in comp_vars:
                model[v] = 0
            continue
        if not rational_feasible(comp_atoms):
            return UNSAT, None, ""
        try:
            r = _search(comp_atoms, comp_vars, lo, hi, {}, [max_steps])
        except _Exhausted:
            unknown = f"integer search exceeded {max_steps} steps"
            continue
        if r is not None:
            model.update(r)
            continue
        if _outside_box_infeasible(comp_atoms, comp_vars, lo, hi):
            return UNSAT, None, ""
        unknown = f"no integer model in [{lo}, {hi}]"
    if unknown:
        return UNKNOWN, None, unknown
    return SAT, model, ""


def _outside_box_infeasible(atoms: list[Atom], variables: list[str], lo: int, hi: int) -> bool:
    """True when no integer point with some coordinate outside ``[lo, hi]`` can satisfy ``atoms``."""
    for v in variables:
        if rational_feasible(atoms + [(((v, 1),), -(lo - 1), "<=")]):
            return False
        if rational_feasible(atoms + [(((v, -1),), hi + 1, "<=")]):
            return False
    return True


def var_bounds(atoms: Iterable[Atom], v: str) -> Optional[tuple[Optional[Fraction], Optional[Fraction]]]:
    """Rational projection of the conjunction onto ``v``; None if infeasible."""
    eqs, les, _ = _rows(atoms)
    return _bounds_rows(eqs, les, v)
