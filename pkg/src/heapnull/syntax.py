"""Abstract syntax, parser, scope resolution and printer for the
first-order eager language (with the nullifying extensions)."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line, self.col = line, col


class ScopeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# AST


@dataclass(eq=False)
class Expr:
    point: int = field(default=-1, kw_only=True)
    label: str | None = field(default=None, kw_only=True)

    def children(self) -> tuple["Expr", ...]:
        out: list[Expr] = []
        for name in _CHILD_FIELDS.get(type(self).__name__, ()):
            v = getattr(self, name)
            if isinstance(v, list):
                out.extend(v)
            else:
                out.append(v)
        return tuple(out)


_CHILD_FIELDS = {
    "Cons": ("left", "right"), "Prim": ("left", "right"),
    "Car": ("arg",), "Cdr": ("arg",), "PairQ": ("arg",), "NullQ": ("arg",),
    "If": ("cond", "then", "other"), "Let": ("init", "body"), "Call": ("args",),
    "SetCar": ("target",), "SetCdr": ("target",), "Begin": ("stmts", "body"),
}


@dataclass(eq=False)
class Const(Expr):
    value: int | bool


@dataclass(eq=False)
class Var(Expr):
    name: str


@dataclass(eq=False)
class Nil(Expr):
    pass


@dataclass(eq=False)
class Cons(Expr):
    left: Expr
    right: Expr


@dataclass(eq=False)
class Car(Expr):
    arg: Expr


@dataclass(eq=False)
class Cdr(Expr):
    arg: Expr


@dataclass(eq=False)
class PairQ(Expr):
    arg: Expr


@dataclass(eq=False)
class NullQ(Expr):
    arg: Expr


@dataclass(eq=False)
class Prim(Expr):
    left: Expr
    right: Expr


@dataclass(eq=False)
class If(Expr):
    cond: Expr
    then: Expr
    other: Expr


@dataclass(eq=False)
class Let(Expr):
    var: str
    init: Expr
    body: Expr


@dataclass(eq=False)
class Call(Expr):
    fn: str
    args: list[Expr]


@dataclass(eq=False)
class SetVar(Expr):
    name: str


@dataclass(eq=False)
class SetCar(Expr):
    target: Expr


@dataclass(eq=False)
class SetCdr(Expr):
    target: Expr


@dataclass(eq=False)
class Begin(Expr):
    stmts: list[Expr]
    body: Expr


UNARY = {"car": Car, "cdr": Cdr, "pair?": PairQ, "null?": NullQ}
BINARY = {"cons": Cons, "prim": Prim}


@dataclass(eq=False)
class FunctionDef:
    name: str
    params: list[str]
    body: Expr


@dataclass(eq=False)
class Program:
    defs: list[FunctionDef]
    body: Expr

    def fn(self, name: str) -> FunctionDef:
        for d in self.defs:
            if d.name == name:
                return d
        raise KeyError(name)

    def roots(self) -> Iterator[tuple[str | None, Expr]]:
        for d in self.defs:
            yield d.name, d.body
        yield None, self.body


def walk(e: Expr) -> Iterator[Expr]:
    """Preorder traversal."""
    stack = [e]
    while stack:
        x = stack.pop()
        yield x
        stack.extend(reversed(x.children()))


def shape(e: Expr) -> tuple:
    """Structure of an expression with program points erased."""
    kind = type(e).__name__
    if isinstance(e, Const):
        return (kind, e.value, type(e.value).__name__)
    if isinstance(e, (Var, SetVar)):
        return (kind, e.name)
    if isinstance(e, Let):
        return (kind, e.var, shape(e.init), shape(e.body))
    if isinstance(e, Call):
        return (kind, e.fn) + tuple(shape(a) for a in e.args)
    return (kind,) + tuple(shape(c) for c in e.children())


def program_shape(p: Program) -> tuple:
    return tuple((d.name, tuple(d.params), shape(d.body)) for d in p.defs) + (shape(p.body),)


# ---------------------------------------------------------------------------
# reader

_TOKEN = re.compile(r"\s+|;[^\n]*|(\()|(\))|([^\s()]+)")
_LABEL = re.compile(r"^[A-Za-z_][\w\-]*:$")


@dataclass
class _Tok:
    text: str
    line: int
    col: int


@dataclass
class _List:
    items: list
    line: int
    col: int


def _tokens(src: str) -> list[_Tok]:
    out = []
    line, col, i = 1, 1, 0
    while i < len(src):
        m = _TOKEN.match(src, i)
        if m is None:  # pragma: no cover - the pattern matches any char
            raise ParseError("unexpected character", line, col)
        text = m.group(0)
        if m.group(1) or m.group(2) or m.group(3):
            out.append(_Tok(text, line, col))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        i = m.end()
    return out


def _read(src: str) -> list:
    toks = _tokens(src)
    stack: list[_List] = [_List([], 0, 0)]
    for t in toks:
        if t.text == "(":
            stack.append(_List([], t.line, t.col))
        elif t.text == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", t.line, t.col)
            done = stack.pop()
            stack[-1].items.append(done)
        else:
            stack[-1].items.append(t)
    if len(stack) > 1:
        top = stack[-1]
        raise ParseError("unclosed '('", top.line, top.col)
    return stack[0].items


def _kw(x) -> str | None:
    return x.text.lower() if isinstance(x, _Tok) else None


_INT = re.compile(r"^[+-]?\d+$")
_IDENT = re.compile(r"^[A-Za-z_][\w\-?!*<>=/+]*$")
RESERVED = {"define", "if", "let", "in", "cons", "car", "cdr", "null?", "pair?", "prim",
            "nil", "set!", "set-car!", "set-cdr!", "begin", "<-", "←"}


def _ident(t, what: str) -> str:
    if not isinstance(t, _Tok) or not _IDENT.match(t.text) or t.text.lower() in RESERVED:
        line, col = (t.line, t.col) if hasattr(t, "line") else (0, 0)
        raise ParseError(f"expected {what}", line, col)
    return t.text


def _expr(items: list, i: int) -> tuple[Expr, int]:
    """Parse one expression starting at items[i], honouring labels."""
    if i >= len(items):
        raise ParseError("missing expression")
    x = items[i]
    label = None
    if isinstance(x, _Tok) and _LABEL.match(x.text) and x.text.lower()[:-1] not in RESERVED:
        label = x.text[:-1]
        i += 1
        if i >= len(items):
            raise ParseError("label without expression", x.line, x.col)
        x = items[i]
    e = _form(x)
    e.label = label
    return e, i + 1


def _args(x: _List, start: int) -> list[Expr]:
    out = []
    i = start
    while i < len(x.items):
        e, i = _expr(x.items, i)
        out.append(e)
    return out


def _arity(x: _List, name: str, want: int, got: list) -> None:
    if len(got) != want:
        raise ParseError(f"{name} expects {want} argument(s), got {len(got)}", x.line, x.col)


def _form(x) -> Expr:
    if isinstance(x, _Tok):
        t = x.text
        lo = t.lower()
        if _INT.match(t):
            return Const(int(t))
        if lo == "#t":
            return Const(True)
        if lo == "#f":
            return Const(False)
        if lo == "nil":
            return Nil()
        return Var(_ident(x, "identifier"))
    if not x.items:
        raise ParseError("empty form", x.line, x.col)
    head = _kw(x.items[0])
    if head in UNARY:
        a = _args(x, 1)
        _arity(x, head, 1, a)
        return UNARY[head](a[0])
    if head in BINARY:
        a = _args(x, 1)
        _arity(x, head, 2, a)
        return BINARY[head](a[0], a[1])
    if head == "if":
        a = _args(x, 1)
        _arity(x, "if", 3, a)
        return If(a[0], a[1], a[2])
    if head == "let":
        it = x.items
        if len(it) < 2:
            raise ParseError("malformed let", x.line, x.col)
        v = _ident(it[1], "let variable")
        if len(it) < 3 or _kw(it[2]) not in ("<-", "←"):
            raise ParseError("let expects '<-' after the variable", x.line, x.col)
        init, j = _expr(it, 3)
        if j >= len(it) or _kw(it[j]) != "in":
            raise ParseError("let expects 'in'", x.line, x.col)
        body, k = _expr(it, j + 1)
        if k != len(it):
            raise ParseError("trailing items in let", x.line, x.col)
        return Let(v, init, body)
    if head == "set!":
        if len(x.items) != 3 or _kw(x.items[2]) != "nil":
            raise ParseError("set! expects a variable and nil", x.line, x.col)
        return SetVar(_ident(x.items[1], "variable"))
    if head in ("set-car!", "set-cdr!"):
        it = x.items
        target, j = _expr(it, 1)
        if j != len(it) - 1 or _kw(it[j]) != "nil":
            raise ParseError(f"{head} expects an expression and nil", x.line, x.col)
        return (SetCar if head == "set-car!" else SetCdr)(target)
    if head == "begin":
        a = _args(x, 1)
        if not a:
            raise ParseError("empty begin", x.line, x.col)
        return Begin(a[:-1], a[-1])
    if head == "define":
        raise ParseError("define is only allowed at top level", x.line, x.col)
    fn = _ident(x.items[0], "function name")
    return Call(fn, _args(x, 1))


def parse(source: str) -> Program:
    """Parse definitions followed by exactly one program expression and
    number every node in preorder (function bodies first)."""
    forms = _read(source)
    defs: list[FunctionDef] = []
    body: Expr | None = None
    i = 0
    while i < len(forms):
        f = forms[i]
        if isinstance(f, _List) and f.items and _kw(f.items[0]) == "define":
            if body is not None:
                raise ParseError("definitions must precede the program expression", f.line, f.col)
            if len(f.items) != 3 or not isinstance(f.items[1], _List) or not f.items[1].items:
                raise ParseError("malformed define", f.line, f.col)
            sig = f.items[1].items
            name = _ident(sig[0], "function name")
            params = [_ident(p, "parameter") for p in sig[1:]]
            if len(set(params)) != len(params):
                raise ParseError(f"duplicate parameter in {name}", f.line, f.col)
            if any(d.name == name for d in defs):
                raise ParseError(f"function {name} defined twice", f.line, f.col)
            fbody, _ = _expr(f.items, 2)
            defs.append(FunctionDef(name, params, fbody))
            i += 1
            continue
        if body is not None:
            line = getattr(f, "line", 0)
            raise ParseError("more than one program expression", line, getattr(f, "col", 0))
        body, i = _expr(forms, i)
    if body is None:
        raise ParseError("missing program expression")
    p = Program(defs, body)
    number(p)
    return p


def number(p: Program) -> None:
    n = 0
    for _, root in p.roots():
        for e in walk(root):
            e.point = n
            n += 1


# ---------------------------------------------------------------------------
# scopes


@dataclass
class ScopedProgram:
    program: Program
    visible: dict[int, frozenset]
    nodes: dict[int, Expr]
    owner: dict[int, str | None]
    labels: dict[str, int]
    renamed: dict[str, str] = field(default_factory=dict)

    def point(self, ref: str | int) -> int:
        """Resolve a label (``pb``) or a preorder index."""
        if isinstance(ref, int) or str(ref).lstrip("-").isdigit():
            n = int(ref)
            if n not in self.nodes:
                raise KeyError(f"no program point {n}")
            return n
        if ref in self.labels:
            return self.labels[ref]
        raise KeyError(f"no program point labelled {ref!r}")

    def params(self, fn: str | None) -> list[str]:
        return [] if fn is None else self.program.fn(fn).params


def resolve_scopes(p: Program) -> ScopedProgram:
    """Alpha-rename binders apart, check references, and record the
    variables in scope at every program point."""
    fnames = {d.name: len(d.params) for d in p.defs}
    used: set[str] = set()
    renamed: dict[str, str] = {}

    def fresh(name: str) -> str:
        if name not in used:
            used.add(name)
            return name
        k = 1
        while f"{name}_{k}" in used:
            k += 1
        new = f"{name}_{k}"
        used.add(new)
        renamed[new] = name
        return new

    visible: dict[int, frozenset] = {}
    nodes: dict[int, Expr] = {}
    owner: dict[int, str | None] = {}
    labels: dict[str, int] = {}

    def go(e: Expr, env: dict[str, str], fn: str | None) -> None:
        nodes[e.point] = e
        owner[e.point] = fn
        visible[e.point] = frozenset(env.values())
        if e.label:
            if e.label in labels:
                raise ScopeError(f"label {e.label} used twice")
            labels[e.label] = e.point
        if isinstance(e, (Var, SetVar)):
            if e.name not in env:
                raise ScopeError(f"unbound variable {e.name} at point {e.point}")
            e.name = env[e.name]
            return
        if isinstance(e, Let):
            go(e.init, env, fn)
            new = fresh(e.var)
            inner = dict(env)
            inner[e.var] = new
            e.var = new
            go(e.body, inner, fn)
            return
        if isinstance(e, Call):
            if e.fn not in fnames:
                raise ScopeError(f"call to undefined function {e.fn}")
            if fnames[e.fn] != len(e.args):
                raise ScopeError(f"{e.fn} expects {fnames[e.fn]} argument(s), got {len(e.args)}")
        for c in e.children():
            go(c, env, fn)

    envs = []
    for d in p.defs:
        new = [fresh(v) for v in d.params]
        envs.append(dict(zip(d.params, new)))
        d.params = new
    for d, env in zip(p.defs, envs):
        go(d.body, env, d.name)
    go(p.body, {}, None)
    return ScopedProgram(p, visible, nodes, owner, labels, renamed)


def load(source: str) -> ScopedProgram:
    return resolve_scopes(parse(source))


# ---------------------------------------------------------------------------
# printer

WIDTH = 72


def _flat(e: Expr) -> str:
    pre = f"{e.label}: " if e.label else ""
    if isinstance(e, Const):
        v = e.value
        body = ("#t" if v else "#f") if isinstance(v, bool) else str(v)
    elif isinstance(e, Var):
        body = e.name
    elif isinstance(e, Nil):
        body = "nil"
    elif isinstance(e, SetVar):
        body = f"(set! {e.name} nil)"
    else:
        head, parts = _parts(e)
        body = "(" + " ".join([head] + [_flat(x) if isinstance(x, Expr) else x for x in parts]) + ")"
    return pre + body


def _parts(e: Expr) -> tuple[str, list]:
    for k, cls in UNARY.items():
        if type(e) is cls:
            return k, [e.arg]
    for k, cls in BINARY.items():
        if type(e) is cls:
            return k, [e.left, e.right]
    if isinstance(e, If):
        return "if", [e.cond, e.then, e.other]
    if isinstance(e, Let):
        return "let", [e.var, "<-", e.init, "in", e.body]
    if isinstance(e, Call):
        return e.fn, list(e.args)
    if isinstance(e, SetCar):
        return "set-car!", [e.target, "nil"]
    if isinstance(e, SetCdr):
        return "set-cdr!", [e.target, "nil"]
    if isinstance(e, Begin):
        return "begin", list(e.stmts) + [e.body]
    raise TypeError(type(e).__name__)


def _pretty(e: Expr, indent: int) -> str:
    flat = _flat(e)
    if len(flat) + indent <= WIDTH or isinstance(e, (Const, Var, Nil, SetVar)):
        return flat
    pre = f"{e.label}: " if e.label else ""
    pad = " " * (indent + 2)
    head, parts = _parts(e)
    if isinstance(e, Let):
        first = f"{pre}(let {e.var} <- {_pretty(e.init, indent + 2)} in"
        return first + "\n" + pad + _pretty(e.body, indent + 2) + ")"
    lines = [f"{pre}({head}"]
    for x in parts:
        lines.append(pad + (_pretty(x, indent + 2) if isinstance(x, Expr) else x))
    return "\n".join(lines) + ")"


def render_expr(e: Expr, indent: int = 0) -> str:
    return _pretty(e, indent)


def render(p: Program) -> str:
    out = []
    for d in p.defs:
        sig = " ".join([d.name] + d.params)
        out.append(f"(define ({sig})\n  {_pretty(d.body, 2)})")
    out.append(_pretty(p.body, 0))
    return "\n\n".join(out) + "\n"


FIG1_SOURCE = """\
(define (append lst1 lst2)
  (if (null? lst1)
      lst2
      (cons (car lst1)
            (append (cdr lst1) lst2))))

(let z <- (cons (cons 4 (cons 5 nil))
                (cons 6 nil)) in
  (let y <- (cons 3 nil) in
    pa: (let w <- (append y z) in
          pb: (car (car (cdr w))))))
"""
