"""Core intermediate language: AST, text parser, pretty-printer and concrete interpreter.

A program is a list of ``data`` declarations, a header naming the typed input
parameters, an optional ``var`` line declaring typed locals, and a sequence of
numbered statements (one per line, indices ``0 .. n-1``).  Jumping to index
``n`` ends the run normally.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

PRIMITIVES = ("int", "bool")
INT_MIN = -(2**63)
INT_MAX = 2**63 - 1


class ParseError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


# --------------------------------------------------------------------------- AST


@dataclass(frozen=True)
class DataDecl:
    name: str
    fields: tuple[tuple[str, str], ...]

    @property
    def field_names(self) -> tuple[str, ...]:
        return tuple(f for f, _ in self.fields)

    def field_type(self, fname: str) -> str:
        for f, t in self.fields:
            if f == fname:
                return t
        raise KeyError(fname)

    def index(self, fname: str) -> int:
        return self.field_names.index(fname)


@dataclass(frozen=True)
class Const:
    value: Union[int, bool]


@dataclass(frozen=True)
class Null:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Load:
    var: str
    field: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class UnOp:
    op: str
    operand: "Expression"


Expression = Union[Const, Null, Var, Load, BinOp, UnOp]


@dataclass(frozen=True)
class Assign:
    index: int
    target: str
    expr: Expression


@dataclass(frozen=True)
class Store:
    index: int
    var: str
    field: str
    expr: Expression


@dataclass(frozen=True)
class Goto:
    index: int
    target: int


@dataclass(frozen=True)
class Assert:
    index: int
    expr: Expression


@dataclass(frozen=True)
class If:
    index: int
    cond: Expression
    then_target: int
    else_target: int


@dataclass(frozen=True)
class New:
    index: int
    target: str
    ctype: str
    args: tuple[Expression, ...]


@dataclass(frozen=True)
class Free:
    index: int
    var: str


Statement = Union[Assign, Store, Goto, Assert, If, New, Free]


@dataclass(frozen=True)
class Program:
    name: str
    datas: tuple[DataDecl, ...]
    params: tuple[tuple[str, str], ...]
    locals: tuple[tuple[str, str], ...]
    stmts: tuple[Statement, ...]
    entry: int = 0

    @property
    def end(self) -> int:
        return len(self.stmts)

    def data(self, name: str) -> DataDecl:
        for d in self.datas:
            if d.name == name:
                return d
        raise KeyError(name)

    def var_type(self, v: str) -> str:
        for n, t in self.params + self.locals:
            if n == v:
                return t
        raise KeyError(v)

    def conditionals(self) -> list[int]:
        return [s.index for s in self.stmts if isinstance(s, If)]


# ------------------------------------------------------------------------- lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(\#|//)[^\n]*)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z][A-Za-z0-9_']*)
  | (?P<op>:=|==|!=|<=|>=|&&|\|\||[-+*/%<>!(){}.,;:])
    """,
    re.VERBOSE,
)

KEYWORDS = {"data", "program", "var", "if", "then", "else", "goto", "assert",
            "new", "free", "null", "true", "false"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def lex(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            if kind == "id" and tok in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, tok, line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ------------------------------------------------------------------------ parser

_BINARY_LEVELS = [("||",), ("&&",), ("==", "!=", "<", "<=", ">", ">="), ("+", "-"), ("*", "/", "%")]


class _Parser:
    def __init__(self, text: str):
        self.toks = lex(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "kw")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> Token:
        if self.tok.kind != "id":
            self.error(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        t = self.tok
        self.i += 1
        return t

    def integer(self) -> int:
        neg = self.accept("-")
        if self.tok.kind != "int":
            self.error("expected integer")
        v = int(self.tok.text)
        self.i += 1
        return -v if neg else v

    # -- declarations
    def data_decl(self) -> DataDecl:
        self.expect("data")
        name = self.ident().text
        self.expect("{")
        fields = []
        while not self.accept("}"):
            ftype = self.ident().text
            fname = self.ident().text
            self.expect(";")
            fields.append((fname, ftype))
        return DataDecl(name, tuple(fields))

    def typed_list(self, closer: Optional[str]) -> list[tuple[str, str, Token]]:
        out = []
        if closer and self.at(closer):
            return out
        while True:
            ttok = self.ident()
            ntok = self.ident()
            out.append((ntok.text, ttok.text, ttok))
            if not self.accept(","):
                return out

    # -- expressions
    def expr(self, level: int = 0) -> Expression:
        if level == len(_BINARY_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in _BINARY_LEVELS[level]:
            op = self.tok.text
            self.i += 1
            right = self.expr(level + 1)
            left = BinOp(op, left, right)
        return left

    def unary(self) -> Expression:
        if self.accept("-"):
            operand = self.unary()
            if isinstance(operand, Const) and not isinstance(operand.value, bool):
                return Const(-operand.value)
            return UnOp("-", operand)
        if self.accept("!"):
            return UnOp("!", self.unary())
        return self.atom()

    def atom(self) -> Expression:
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return Const(int(t.text))
        if self.accept("true"):
            return Const(True)
        if self.accept("false"):
            return Const(False)
        if self.accept("null"):
            return Null()
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "id":
            self.i += 1
            if self.accept("."):
                return Load(t.text, self.ident().text)
            return Var(t.text)
        self.error(f"unexpected token {t.text or 'end of input'!r} in expression")

    def label(self) -> int:
        if self.tok.kind != "int":
            self.error("expected statement index")
        v = int(self.tok.text)
        self.i += 1
        return v

    def statement(self, index: int) -> Statement:
        if self.accept("goto"):
            return Goto(index, self.label())
        if self.accept("assert"):
            return Assert(index, self.expr())
        if self.accept("if"):
            cond = self.expr()
            self.expect("then")
            self.expect("goto")
            t = self.label()
            self.expect("else")
            self.expect("goto")
            return If(index, cond, t, self.label())
        if self.accept("free"):
            return Free(index, self.ident().text)
        v = self.ident().text
        if self.accept("."):
            f = self.ident().text
            self.expect(":=")
            return Store(index, v, f, self.expr())
        self.expect(":=")
        if self.accept("new"):
            c = self.ident().text
            self.expect("(")
            args = []
            if not self.at(")"):
                args.append(self.expr())
                while self.accept(","):
                    args.append(self.expr())
            self.expect(")")
            return New(index, v, c, tuple(args))
        return Assign(index, v, self.expr())


def parse_program(text: str) -> Program:
    """Parse IL source text into a checked :class:`Program`."""
    p = _Parser(text)
    datas: list[DataDecl] = []
    while p.at("data"):
        start = p.tok
        d = p.data_decl()
        if any(x.name == d.name for x in datas):
            p.error(f"duplicate node-type {d.name!r}", start)
        if len(set(d.field_names)) != len(d.fields):
            p.error(f"duplicate field in {d.name!r}", start)
        datas.append(d)
    p.expect("program")
    name = p.ident().text
    p.expect("(")
    params = p.typed_list(")")
    p.expect(")")
    local_vars: list[tuple[str, str, Token]] = []
    if p.accept("var"):
        local_vars = p.typed_list(None)
    type_names = {d.name for d in datas} | set(PRIMITIVES)
    for d in datas:
        for _, t in d.fields:
            if t not in type_names:
                raise ParseError(f"undeclared node-type {t!r} in data {d.name}")
    seen: set[str] = set()
    for n, t, tok in params + local_vars:
        if t not in type_names:
            p.error(f"undeclared node-type {t!r}", tok)
        if n in seen:
            p.error(f"duplicate variable {n!r}", tok)
        seen.add(n)
    stmts: list[Statement] = []
    positions: list[Token] = []
    last_line = 0
    while p.tok.kind != "eof":
        start = p.tok
        if start.line == last_line:
            p.error("one statement per line")
        idx = p.label()
        if idx != len(stmts):
            p.error(f"statement index {idx} out of sequence (expected {len(stmts)})", start)
        p.expect(":")
        stmts.append(p.statement(idx))
        positions.append(start)
        last_line = start.line
    prog = Program(name, tuple(datas), tuple((n, t) for n, t, _ in params),
                   tuple((n, t) for n, t, _ in local_vars), tuple(stmts))
    for s, tok in zip(stmts, positions):
        _check_statement(prog, s, tok)
    return prog


def _check_statement(prog: Program, s: Statement, tok: Token) -> None:
    declared = {n: t for n, t in prog.params + prog.locals}
    datas = {d.name: d for d in prog.datas}

    def fail(msg: str):
        raise ParseError(msg, tok.line, tok.col)

    def var(v: str) -> str:
        if v not in declared:
            fail(f"undeclared variable {v!r}")
        return declared[v]

    def field_of(v: str, f: str) -> None:
        t = var(v)
        if t not in datas:
            fail(f"variable {v!r} of type {t} has no fields")
        if f not in datas[t].field_names:
            fail(f"node-type {t} has no field {f!r}")

    def expr(e: Expression) -> None:
        if isinstance(e, Var):
            var(e.name)
        elif isinstance(e, Load):
            field_of(e.var, e.field)
        elif isinstance(e, BinOp):
            expr(e.left)
            expr(e.right)
        elif isinstance(e, UnOp):
            expr(e.operand)

    def label(k: int) -> None:
        if not 0 <= k <= prog.end:
            fail(f"unresolvable label {k}")

    if isinstance(s, Assign):
        var(s.target)
        expr(s.expr)
    elif isinstance(s, Store):
        field_of(s.var, s.field)
        expr(s.expr)
    elif isinstance(s, Goto):
        label(s.target)
    elif isinstance(s, Assert):
        expr(s.expr)
    elif isinstance(s, If):
        expr(s.cond)
        label(s.then_target)
        label(s.else_target)
    elif isinstance(s, New):
        var(s.target)
        if s.ctype not in datas:
            fail(f"undeclared node-type {s.ctype!r}")
        if len(s.args) != len(datas[s.ctype].fields):
            fail(f"arity mismatch: {s.ctype} has {len(datas[s.ctype].fields)} fields, got {len(s.args)}")
        for a in s.args:
            expr(a)
    elif isinstance(s, Free):
        var(s.var)


# ---------------------------------------------------------------- pretty-printer

_PREC = {op: i for i, ops in enumerate(_BINARY_LEVELS) for op in ops}


def format_expr(e: Expression, prec: int = -1) -> str:
    if isinstance(e, Const):
        if isinstance(e.value, bool):
            return "true" if e.value else "false"
        return str(e.value) if e.value >= 0 or prec < 0 else f"({e.value})"
    if isinstance(e, Null):
        return "null"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Load):
        return f"{e.var}.{e.field}"
    if isinstance(e, UnOp):
        return f"{e.op}{format_expr(e.operand, len(_BINARY_LEVELS))}"
    p = _PREC[e.op]
    s = f"{format_expr(e.left, p)} {e.op} {format_expr(e.right, p + 1)}"
    return f"({s})" if p < prec else s


def format_statement(s: Statement) -> str:
    if isinstance(s, Assign):
        body = f"{s.target} := {format_expr(s.expr)}"
    elif isinstance(s, Store):
        body = f"{s.var}.{s.field} := {format_expr(s.expr)}"
    elif isinstance(s, Goto):
        body = f"goto {s.target}"
    elif isinstance(s, Assert):
        body = f"assert {format_expr(s.expr)}"
    elif isinstance(s, If):
        body = f"if {format_expr(s.cond)} then goto {s.then_target} else goto {s.else_target}"
    elif isinstance(s, New):
        body = f"{s.target} := new {s.ctype}({', '.join(format_expr(a) for a in s.args)})"
    else:
        body = f"free {s.var}"
    return f"{s.index}: {body}"


def format_program(prog: Program) -> str:
    lines = []
    for d in prog.datas:
        fields = " ".join(f"{t} {f};" for f, t in d.fields)
        lines.append(f"data {d.name} {{ {fields} }}")
    params = ", ".join(f"{t} {n}" for n, t in prog.params)
    lines.append(f"program {prog.name}({params})")
    if prog.locals:
        lines.append("var " + ", ".join(f"{t} {n}" for n, t in prog.locals))
    lines.extend(format_statement(s) for s in prog.stmts)
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ interpreter

_LOC_RE = re.compile(r"^L(\d+)$")


@dataclass(frozen=True, order=True)
class Loc:
    """Opaque heap address.  Never equal to ``None`` (null) or to any integer."""

    name: str

    def __repr__(self) -> str:
        return self.name


Value = Union[int, bool, None, Loc]


@dataclass
class Record:
    ctype: str
    fields: dict[str, Value]


@dataclass
class ConcreteState:
    heap: dict[Loc, Record] = field(default_factory=dict)
    stack: dict[str, Value] = field(default_factory=dict)

    def copy(self) -> "ConcreteState":
        return ConcreteState({l: Record(r.ctype, dict(r.fields)) for l, r in self.heap.items()},
                             dict(self.stack))


class EvalFault(Exception):
    """Evaluation or execution got stuck (null/dangling access, type error, overflow)."""


@dataclass(frozen=True)
class Halted:
    reason: str  # "normal" | "assertion" | "fault"
    pc: int
    message: str = ""


@dataclass
class ConcreteConfig:
    program: Program
    state: ConcreteState
    pc: int
    next_loc: int = 1
    overflow: str = "error"
    last_branch: Optional[str] = None

    @property
    def stmt(self) -> Optional[Statement]:
        if 0 <= self.pc < self.program.end:
            return self.program.stmts[self.pc]
        return None

    @classmethod
    def initial(cls, program: Program, state: ConcreteState, overflow: str = "error") -> "ConcreteConfig":
        top = 0
        # fresh locations must also avoid dangling references held in fields or the stack
        seen = list(state.heap) + [v for v in state.stack.values() if isinstance(v, Loc)]
        for rec in state.heap.values():
            seen.extend(v for v in rec.fields.values() if isinstance(v, Loc))
        for loc in seen:
            m = _LOC_RE.match(loc.name)
            if m:
                top = max(top, int(m.group(1)))
        return cls(program, state, program.entry, top + 1, overflow)


def _is_int(v: Value) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _check_range(v: int, overflow: str) -> int:
    if INT_MIN <= v <= INT_MAX:
        return v
    if overflow == "wrap":
        return (v - INT_MIN) % (2**64) + INT_MIN
    raise EvalFault(f"integer overflow: {v}")


def _deref(state: ConcreteState, v: str) -> Record:
    if v not in state.stack:
        raise EvalFault(f"uninitialized variable {v!r}")
    loc = state.stack[v]
    if loc is None:
        raise EvalFault(f"null dereference of {v!r}")
    if not isinstance(loc, Loc) or loc not in state.heap:
        raise EvalFault(f"dangling dereference of {v!r}")
    return state.heap[loc]


def eval_expr(state: ConcreteState, e: Expression, overflow: str = "error") -> Value:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Null):
        return None
    if isinstance(e, Var):
        if e.name not in state.stack:
            raise EvalFault(f"uninitialized variable {e.name!r}")
        return state.stack[e.name]
    if isinstance(e, Load):
        rec = _deref(state, e.var)
        if e.field not in rec.fields:
            raise EvalFault(f"{rec.ctype} has no field {e.field!r}")
        return rec.fields[e.field]
    if isinstance(e, UnOp):
        v = eval_expr(state, e.operand, overflow)
        if e.op == "-":
            if not _is_int(v):
                raise EvalFault("type mismatch: '-' on non-integer")
            return _check_range(-v, overflow)
        if not isinstance(v, bool):
            raise EvalFault("type mismatch: '!' on non-boolean")
        return not v
    op = e.op
    if op in ("&&", "||"):
        a = eval_expr(state, e.left, overflow)
        if not isinstance(a, bool):
            raise EvalFault(f"type mismatch: {op!r} on non-boolean")
        if (op == "&&" and not a) or (op == "||" and a):
            return a
        b = eval_expr(state, e.right, overflow)
        if not isinstance(b, bool):
            raise EvalFault(f"type mismatch: {op!r} on non-boolean")
        return b
    a = eval_expr(state, e.left, overflow)
    b = eval_expr(state, e.right, overflow)
    if op in ("==", "!="):
        comparable = (_is_int(a) and _is_int(b)) or (isinstance(a, bool) and isinstance(b, bool)) \
            or (not _is_int(a) and not isinstance(a, bool) and not _is_int(b) and not isinstance(b, bool))
        if not comparable:
            raise EvalFault(f"type mismatch: {op!r} between incompatible values")
        return (a == b) == (op == "==")
    if not (_is_int(a) and _is_int(b)):
        raise EvalFault(f"type mismatch: {op!r} on non-integers")
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "+":
        return _check_range(a + b, overflow)
    if op == "-":
        return _check_range(a - b, overflow)
    if op == "*":
        return _check_range(a * b, overflow)
    if b == 0:
        raise EvalFault("division by zero")
    q = abs(a) // abs(b) * (1 if (a >= 0) == (b >= 0) else -1)
    if op == "/":
        return _check_range(q, overflow)
    return a - b * q


def _check_assignable(prog: Program, v: str, val: Value) -> None:
    t = prog.var_type(v) if v in {n for n, _ in prog.params + prog.locals} else None
    _check_field_type(t, val, v)


def _check_field_type(t: Optional[str], val: Value, what: str) -> None:
    if t is None:
        return
    if t == "int":
        ok = _is_int(val)
    elif t == "bool":
        ok = isinstance(val, bool)
    else:
        ok = val is None or isinstance(val, Loc)
    if not ok:
        raise EvalFault(f"type mismatch: {what} of type {t} cannot hold {val!r}")


def _exec(cfg: ConcreteConfig) -> Optional[Halted]:
    """Execute one statement in place.  Returns a Halted marker when execution stops."""
    prog, st = cfg.program, cfg.state
    if cfg.pc == prog.end:
        return Halted("normal", cfg.pc)
    s = cfg.stmt
    if s is None:
        return Halted("fault", cfg.pc, f"pc {cfg.pc} outside program")
    try:
        if isinstance(s, Assign):
            val = eval_expr(st, s.expr, cfg.overflow)
            _check_assignable(prog, s.target, val)
            st.stack[s.target] = val
            cfg.pc += 1
        elif isinstance(s, Store):
            rec = _deref(st, s.var)
            if s.field not in rec.fields:
                raise EvalFault(f"{rec.ctype} has no field {s.field!r}")
            val = eval_expr(st, s.expr, cfg.overflow)
            _check_field_type(prog.data(rec.ctype).field_type(s.field), val, f"{rec.ctype}.{s.field}")
            rec.fields[s.field] = val
            cfg.pc += 1
        elif isinstance(s, Goto):
            cfg.pc = s.target
        elif isinstance(s, Assert):
            val = eval_expr(st, s.expr, cfg.overflow)
            if not isinstance(val, bool):
                raise EvalFault("assert on non-boolean")
            if not val:
                return Halted("assertion", cfg.pc, "assertion failed")
            cfg.pc += 1
        elif isinstance(s, If):
            val = eval_expr(st, s.cond, cfg.overflow)
            if not isinstance(val, bool):
                raise EvalFault("condition is not boolean")
            cfg.pc = s.then_target if val else s.else_target
            cfg.last_branch = "T" if val else "F"
        elif isinstance(s, New):
            decl = prog.data(s.ctype)
            vals = [eval_expr(st, a, cfg.overflow) for a in s.args]
            for (f, t), v in zip(decl.fields, vals):
                _check_field_type(t, v, f"{s.ctype}.{f}")
            loc = Loc(f"L{cfg.next_loc}")
            cfg.next_loc += 1
            _check_assignable(prog, s.target, loc)
            st.heap[loc] = Record(s.ctype, dict(zip(decl.field_names, vals)))
            st.stack[s.target] = loc
            cfg.pc += 1
        elif isinstance(s, Free):
            _deref(st, s.var)
            del st.heap[st.stack[s.var]]
            cfg.pc += 1
    except EvalFault as exc:
        return Halted("fault", cfg.pc, str(exc))
    return None


def step(cfg: ConcreteConfig) -> Union[ConcreteConfig, Halted]:
    """One small-step transition; the input configuration is left untouched."""
    nxt = ConcreteConfig(cfg.program, cfg.state.copy(), cfg.pc, cfg.next_loc, cfg.overflow)
    halted = _exec(nxt)
    return halted if halted is not None else nxt


@dataclass
class Trace:
    pcs: list[int]
    branches: list[tuple[int, str]]
    status: str  # "normal" | "assertion" | "fault" | "timeout"
    halt_pc: int
    message: str
    final: ConcreteState


def run(program: Program, init: ConcreteState, fuel: int = 100_000, overflow: str = "error") -> Trace:
    """Run from ``init`` for at most ``fuel`` statements, recording pcs and branch outcomes."""
    cfg = ConcreteConfig.initial(program, init.copy(), overflow)
    pcs: list[int] = []
    branches: list[tuple[int, str]] = []
    remaining = fuel
    if fuel <= 0:
        return Trace(pcs, branches, "timeout", cfg.pc, "fuel exhausted", cfg.state)
    while True:
        if cfg.pc == program.end:
            return Trace(pcs, branches, "normal", cfg.pc, "", cfg.state)
        if remaining <= 0:
            return Trace(pcs, branches, "timeout", cfg.pc, "fuel exhausted", cfg.state)
        remaining -= 1
        pc = cfg.pc
        pcs.append(pc)
        halted = _exec(cfg)
        if halted is not None:
            return Trace(pcs, branches, halted.reason, halted.pc, halted.message, cfg.state)
        if isinstance(program.stmts[pc], If):
            branches.append((pc, cfg.last_branch))
