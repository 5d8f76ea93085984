"""Reference interpreter over an explicit memory graph.

Every run records the program points it visits, each dereference of a
heap link together with the root-relative paths that led to it, the
links cut by nil assignments, and (optionally) the number of reachable
cells at every visit.
"""

from __future__ import annotations

import json
import random
import sys
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple

from . import pathalg as pa
from .syntax import (Begin, Call, Car, Cdr, Cons, Const, Expr, If, Let, Nil, NullQ,
                     PairQ, Prim, Program, ScopedProgram, SetCar, SetCdr, SetVar, Var,
                     load, walk)

STEP_BUDGET = 10**6
CHAIN_CAP = 8
PATH_CAP = 24
RESULT_EDGE_CAP = 4096


class RuntimeFault(RuntimeError):
    """Dereferencing exception or other dynamic error."""

    def __init__(self, msg: str, point: int = -1):
        super().__init__(f"{msg} (point {point})" if point >= 0 else msg)
        self.point = point


class StepLimit(RuntimeFault):
    pass


@dataclass(frozen=True)
class Ref:
    cell: int


class V(NamedTuple):
    """A value in flight: payload, the link it was read through, and the
    root-relative paths (loc, path, start step) that reached it."""
    val: object
    edge: tuple | None = None
    chains: tuple = ()


@dataclass
class Visit:
    point: int
    step: int
    frame: int
    locs: dict[str, int]
    vals: dict[str, object]
    reach: int | None = None


@dataclass
class Deref:
    step: int
    edge: tuple
    kind: str
    chains: tuple
    point: int


@dataclass
class Run:
    value: object
    heap: list
    visits: list[Visit]
    derefs: list[Deref]
    nullified: list[tuple]          # (edge, point, step)
    loc_frame: dict[int, int]
    loc_name: dict[int, str]
    steps: int

    def show(self) -> str:
        return show(self.value, self.heap)

    def visits_of(self, point: int) -> list[Visit]:
        return [v for v in self.visits if v.point == point]

    def to_json(self) -> dict:
        return {
            "value": self.show(),
            "steps": self.steps,
            "visits": [{"point": v.point, "step": v.step, "frame": v.frame,
                        "reach": v.reach} for v in self.visits],
            "derefs": [{"step": d.step, "edge": edge_name(d.edge), "kind": d.kind,
                        "point": d.point} for d in self.derefs],
            "nullified": [{"edge": edge_name(e), "point": p, "step": s}
                          for e, p, s in self.nullified],
        }


def edge_name(edge: tuple) -> str:
    if edge[0] == "r":
        return f"root:{edge[1]}"
    return f"cell{edge[1]}.{'car' if edge[2] == 0 else 'cdr'}"


def show(val, heap) -> str:
    """Scheme style printing of a value."""
    if val is None:
        return "nil"
    if isinstance(val, bool):
        return "#t" if val else "#f"
    if not isinstance(val, Ref):
        return str(val)
    items = []
    cur = val
    while isinstance(cur, Ref):
        car, cdr = heap[cur.cell]
        items.append(show(car, heap))
        cur = cdr
    if cur is None:
        return "(" + " ".join(items) + ")"
    return "(" + " ".join(items) + " . " + show(cur, heap) + ")"


def _extend(chains: tuple, sym: int) -> tuple:
    return tuple((loc, path + (sym,), t) for loc, path, t in chains if len(path) < PATH_CAP)


class Interpreter:
    """Eager, left-to-right evaluation with explicit locations and temps."""

    def __init__(self, program: Program, budget: int = STEP_BUDGET, reach: bool = False):
        self.p = program
        self.fns = {d.name: d for d in program.defs}
        self.budget = budget
        self.reach = reach
        self.heap: list[list] = []
        self.store: dict[int, V] = {}
        self.loc_frame: dict[int, int] = {}
        self.loc_name: dict[int, str] = {}
        self.frames = 0
        self.step = 0
        self.temps: list = []
        self.callers: list[dict] = []
        self.visits: list[Visit] = []
        self.derefs: list[Deref] = []
        self.nullified: list[tuple] = []

    # -- helpers ------------------------------------------------------------

    def bind(self, name: str, v: V, frame: int) -> int:
        loc = len(self.loc_frame)
        self.loc_frame[loc] = frame
        self.loc_name[loc] = name
        self.store[loc] = v
        return loc

    def deref(self, v: V, point: int) -> None:
        if v.edge is None:
            return
        kind = "root-read" if v.edge[0] == "r" else ("car-read" if v.edge[2] == 0 else "cdr-read")
        self.derefs.append(Deref(self.step, v.edge, kind, v.chains, point))

    def reachable(self, env: dict) -> int:
        roots = [self.store[loc].val for e in self.callers for loc in e.values()]
        roots += [self.store[loc].val for loc in env.values()]
        roots += self.temps
        seen: set[int] = set()
        todo = [r.cell for r in roots if isinstance(r, Ref)]
        while todo:
            c = todo.pop()
            if c in seen:
                continue
            seen.add(c)
            todo.extend(x.cell for x in self.heap[c] if isinstance(x, Ref))
        return len(seen)

    # -- evaluation -----------------------------------------------------------

    def run(self) -> Run:
        frame = self._frame()
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 20000))
        try:
            v = self.eval(self.p.body, {}, frame, -1)
        finally:
            sys.setrecursionlimit(limit)
        self._consume_result(v)
        return Run(v.val, self.heap, self.visits, self.derefs, self.nullified,
                   self.loc_frame, self.loc_name, self.step)

    def _frame(self) -> int:
        self.frames += 1
        return self.frames - 1

    def _consume_result(self, v: V) -> None:
        """The final value is printed: every link under it is read."""
        self.step += 1
        todo = [v]
        n = 0
        while todo and n < RESULT_EDGE_CAP:
            cur = todo.pop()
            n += 1
            self.deref(cur, -1)
            if isinstance(cur.val, Ref):
                for k in (1, 0):
                    todo.append(V(self.heap[cur.val.cell][k], ("s", cur.val.cell, k),
                                  _extend(cur.chains, k)))

    def _select(self, v: V, k: int, point: int, what: str) -> V:
        if not isinstance(v.val, Ref):
            raise RuntimeFault(f"{what} of {'nil' if v.val is None else 'a scalar'}", point)
        return V(self.heap[v.val.cell][k], ("s", v.val.cell, k), _extend(v.chains, k))

    def eval(self, e: Expr, env: dict, frame: int, ctx: int) -> V:
        self.step += 1
        if self.step > self.budget:
            raise StepLimit(f"step budget of {self.budget} exhausted", e.point)
        start = self.step
        if e.point >= 0:
            self.visits.append(Visit(e.point, start, frame, dict(env),
                                     {x: self.store[l].val for x, l in env.items()},
                                     self.reachable(env) if self.reach else None))
        here = e.point if e.point >= 0 else ctx
        if isinstance(e, Const):
            return V(e.value)
        if isinstance(e, Nil):
            return V(None)
        if isinstance(e, Var):
            loc = env[e.name]
            sv = self.store[loc]
            return V(sv.val, ("r", loc), (((loc, (), start),) + sv.chains)[:CHAIN_CAP])
        if isinstance(e, (Car, Cdr)):
            v = self.eval(e.arg, env, frame, here)
            self.deref(v, here)
            return self._select(v, 0 if isinstance(e, Car) else 1, here,
                                "car" if isinstance(e, Car) else "cdr")
        if isinstance(e, (NullQ, PairQ)):
            v = self.eval(e.arg, env, frame, here)
            self.deref(v, here)
            if isinstance(e, NullQ):
                return V(v.val is None)
            return V(isinstance(v.val, Ref))
        if isinstance(e, (Cons, Prim)):
            a = self.eval(e.left, env, frame, here)
            self.temps.append(a.val)
            b = self.eval(e.right, env, frame, here)
            self.temps.pop()
            if isinstance(e, Cons):
                self.heap.append([a.val, b.val])
                return V(Ref(len(self.heap) - 1))
            self.deref(a, here)
            self.deref(b, here)
            for x in (a.val, b.val):
                if x is None or isinstance(x, (Ref, bool)):
                    raise RuntimeFault("prim on a non-number", here)
            return V(a.val + b.val)
        if isinstance(e, If):
            c = self.eval(e.cond, env, frame, here)
            self.deref(c, here)
            taken = e.then if c.val is not False and c.val is not None else e.other
            return self.eval(taken, env, frame, here)
        if isinstance(e, Let):
            v = self.eval(e.init, env, frame, here)
            inner = dict(env)
            inner[e.var] = self.bind(e.var, v, frame)
            return self.eval(e.body, inner, frame, here)
        if isinstance(e, Call):
            d = self.fns.get(e.fn)
            if d is None:
                raise RuntimeFault(f"call to undefined function {e.fn}", here)
            args = []
            for a in e.args:
                v = self.eval(a, env, frame, here)
                args.append(v)
                self.temps.append(v.val)
            del self.temps[len(self.temps) - len(args):]
            callee = self._frame()
            fenv = {p: self.bind(p, v, callee) for p, v in zip(d.params, args)}
            self.callers.append(env)
            try:
                return self.eval(d.body, fenv, callee, here)
            finally:
                self.callers.pop()
        if isinstance(e, Begin):
            for s in e.stmts:
                self.eval(s, env, frame, e.body.point)
            return self.eval(e.body, env, frame, here)
        if isinstance(e, SetVar):
            loc = env[e.name]
            self.store[loc] = V(None)
            self.nullified.append((("r", loc), ctx, self.step))
            return V(None)
        if isinstance(e, (SetCar, SetCdr)):
            v = self.eval(e.target, env, frame, ctx)
            if not isinstance(v.val, Ref):
                raise RuntimeFault("nil assignment into a non-cell", ctx)
            k = 0 if isinstance(e, SetCar) else 1
            self.heap[v.val.cell][k] = None
            self.nullified.append((("s", v.val.cell, k), ctx, self.step))
            return V(None)
        raise TypeError(f"cannot evaluate {type(e).__name__}")


def evaluate(p: Program | ScopedProgram, reach: bool = False, budget: int = STEP_BUDGET) -> Run:
    """Run a program to completion."""
    prog = p.program if isinstance(p, ScopedProgram) else p
    return Interpreter(prog, budget=budget, reach=reach).run()


def run_source(source: str, reach: bool = False) -> Run:
    return evaluate(load(source), reach=reach)


# ---------------------------------------------------------------------------
# traces and statistics


def trace_derefs(run: Run) -> dict[int, set]:
    """Links dereferenced strictly after each visited point (any visit)."""
    first: dict[int, int] = {}
    for v in run.visits:
        first.setdefault(v.point, v.step)
    events = sorted(run.derefs, key=lambda d: d.step)
    steps = [d.step for d in events]
    suffix: list[set] = [set() for _ in range(len(events) + 1)]
    for i in range(len(events) - 1, -1, -1):
        suffix[i] = suffix[i + 1] | {events[i].edge}
    return {pt: suffix[bisect_right(steps, s)] for pt, s in first.items()}


def derefs_after(run: Run, step: int) -> set:
    return {d.edge for d in run.derefs if d.step > step}


def visit_keys(run: Run) -> list[tuple[int, int]]:
    """(point, occurrence) for every visit, in execution order."""
    seen: dict[int, int] = defaultdict(int)
    out = []
    for v in run.visits:
        out.append((v.point, seen[v.point]))
        seen[v.point] += 1
    return out


class Divergence(RuntimeError):
    pass


def reach_stats(p: Program | ScopedProgram, q: Program) -> dict[int, list[tuple[int, int]]]:
    """Reachable cells at every visit of both programs, keyed by point."""
    rp, rq = evaluate(p, reach=True), evaluate(q, reach=True)
    kp, kq = visit_keys(rp), visit_keys(rq)
    if kp != kq:
        raise Divergence("the two programs visit different points")
    out: dict[int, list] = defaultdict(list)
    for a, b in zip(rp.visits, rq.visits):
        out[a.point].append((a.reach, b.reach))
    return dict(out)


# ---------------------------------------------------------------------------
# memory graph export


def memory_dot(run: Run, visit: Visit, name: str = "heap") -> str:
    """DOT drawing of the cells reachable from the roots visible at a visit
    (the heap as it is at the end of the run)."""
    lines = [f"digraph {name} {{", "  rankdir=TB;", "  node [fontname=monospace];"]
    seen: set[int] = set()
    todo = []
    leaf = 0
    for x in sorted(visit.vals):
        lines.append(f'  "v_{x}" [label="{x}", shape=plaintext];')
        val = visit.vals[x]
        if isinstance(val, Ref):
            lines.append(f'  "v_{x}" -> "c{val.cell}";')
            todo.append(val.cell)
    while todo:
        c = todo.pop()
        if c in seen:
            continue
        seen.add(c)
        lines.append(f'  "c{c}" [label="", shape=circle, width=0.25];')
        for k, x in enumerate(run.heap[c]):
            if isinstance(x, Ref):
                lines.append(f'  "c{c}" -> "c{x.cell}" [label="{k}"];')
                todo.append(x.cell)
            else:
                leaf += 1
                text = show(x, run.heap)
                lines.append(f'  "l{leaf}" [label="{text}", shape=box];')
                lines.append(f'  "c{c}" -> "l{leaf}" [label="{k}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def trace_json(run: Run) -> str:
    return json.dumps(run.to_json(), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# random programs

INT, NIL = "int", "nil"

TEMPLATES = {
    "append": "(define (append a b) (if (null? a) b (cons (car a) (append (cdr a) b))))",
    "mapinc": "(define (mapinc l) (if (null? l) nil (cons (prim (car l) 1) (mapinc (cdr l)))))",
    "length": "(define (length l) (if (null? l) 0 (prim 1 (length (cdr l)))))",
    "revacc": "(define (revacc l acc) (if (null? l) acc (revacc (cdr l) (cons (car l) acc))))",
}


def _is_list(t) -> bool:
    while isinstance(t, tuple):
        t = t[2]
    return t == NIL


def _elems(t) -> list:
    out = []
    while isinstance(t, tuple):
        out.append(t[1])
        t = t[2]
    return out


def _list_type(elems: list, tail=NIL):
    t = tail
    for x in reversed(elems):
        t = ("cons", x, t)
    return t


def _size(t) -> int:
    return 1 + _size(t[1]) + _size(t[2]) if isinstance(t, tuple) else 1


class _Gen:
    def __init__(self, seed: int, budget: int):
        self.r = random.Random(seed)
        self.budget = budget
        self.used: set[str] = set()
        self.n = 0

    def fresh(self) -> str:
        self.n += 1
        return f"v{self.n}"

    def const(self) -> tuple[str, object]:
        return str(self.r.randint(0, 9)), INT

    def literal_list(self, nested: bool = False) -> tuple[str, object]:
        k = self.r.randint(0, 4)
        src, elems = "nil", []
        for _ in range(k):
            if nested and self.r.random() < 0.3:
                s, t = self.literal_list()
            else:
                s, t = self.const()
            src = f"(cons {s} {src})"
            elems.insert(0, t)
        return src, _list_type(elems)

    def pick(self, env: dict, pred) -> str | None:
        names = sorted(x for x, t in env.items() if pred(t))
        return self.r.choice(names) if names else None

    def select(self, env: dict) -> tuple[str, object] | None:
        """A car/cdr chain along cells known to exist."""
        x = self.pick(env, lambda t: isinstance(t, tuple))
        if x is None:
            return None
        src, t = x, env[x]
        for _ in range(self.r.randint(1, 3)):
            if not isinstance(t, tuple):
                break
            if self.r.random() < 0.5:
                src, t = f"(car {src})", t[1]
            else:
                src, t = f"(cdr {src})", t[2]
        return src, t

    def list_expr(self, env: dict, depth: int, ints: bool = False) -> tuple[str, object]:
        def ok(t):
            return _is_list(t) and (not ints or all(e == INT for e in _elems(t)))
        x = self.pick(env, ok)
        if x is not None and self.r.random() < 0.7:
            return x, env[x]
        if depth > 0 and self.r.random() < 0.4:
            s, t = self.expr(env, depth - 1)
            if ok(t):
                return s, t
        while True:
            s, t = self.literal_list(nested=not ints)
            if ok(t):
                return s, t

    def int_expr(self, env: dict, depth: int) -> tuple[str, object]:
        roll = self.r.random()
        if roll < 0.3:
            x = self.pick(env, lambda t: t == INT)
            if x:
                return x, INT
        if roll < 0.5 and depth > 0:
            self.used.add("length")
            s, _ = self.list_expr(env, depth - 1)
            return f"(length {s})", INT
        if roll < 0.7 and depth > 0:
            a, _ = self.int_expr(env, depth - 1)
            b, _ = self.int_expr(env, depth - 1)
            return f"(prim {a} {b})", INT
        sel = self.select(env)
        if sel and sel[1] == INT:
            return sel
        return self.const()

    def expr(self, env: dict, depth: int) -> tuple[str, object]:
        roll = self.r.random()
        if depth <= 0 or roll < 0.15:
            if env and self.r.random() < 0.6:
                x = self.r.choice(sorted(env))
                return x, env[x]
            return self.literal_list(nested=True) if self.r.random() < 0.5 else self.const()
        if roll < 0.3:
            a, ta = self.expr(env, depth - 1)
            b, tb = self.expr(env, depth - 1)
            return f"(cons {a} {b})", ("cons", ta, tb)
        if roll < 0.4:
            sel = self.select(env)
            if sel:
                return sel
            return self.int_expr(env, depth - 1)
        if roll < 0.5:
            self.used.add("append")
            a, ta = self.list_expr(env, depth - 1)
            b, tb = self.expr(env, depth - 1)
            return f"(append {a} {b})", _list_type(_elems(ta), tb)
        if roll < 0.58:
            self.used.add("mapinc")
            a, ta = self.list_expr(env, depth - 1, ints=True)
            return f"(mapinc {a})", ta
        if roll < 0.66:
            self.used.add("revacc")
            a, ta = self.list_expr(env, depth - 1)
            b, tb = self.list_expr(env, depth - 1)
            return f"(revacc {a} {b})", _list_type(list(reversed(_elems(ta))) + _elems(tb))
        if roll < 0.74:
            return self.int_expr(env, depth)
        if roll < 0.86:
            x = self.pick(env, lambda t: True)
            if x is None:
                return self.const()
            test = self.r.choice(["null?", "pair?"])
            holds = (env[x] == NIL) if test == "null?" else isinstance(env[x], tuple)
            a, ta = self.expr(env, depth - 1)
            b, tb = self.expr(env, depth - 1)
            return f"(if ({test} {x}) {a} {b})", ta if holds else tb
        v = self.fresh()
        a, ta = self.expr(env, depth - 1)
        inner = dict(env)
        inner[v] = ta
        b, tb = self.expr(inner, depth - 1)
        return f"(let {v} <- {a} in {b})", tb

    def program(self) -> str:
        env: dict = {}
        binds = []
        for _ in range(self.r.randint(2, 5)):
            v = self.fresh()
            s, t = self.expr(env, self.r.randint(1, 3))
            if _size(t) > 60:
                s, t = self.literal_list(nested=True)
            binds.append((v, s))
            env[v] = t
        # the final body always runs a recursive function
        fn = self.r.choice(["append", "length", "revacc", "mapinc"])
        if fn == "append":
            a, _ = self.list_expr(env, 1)
            b, _ = self.expr(env, 1)
            body = f"(append {a} {b})"
        elif fn == "length":
            a, _ = self.list_expr(env, 1)
            body = f"(length {a})"
        elif fn == "revacc":
            a, _ = self.list_expr(env, 1)
            b, _ = self.list_expr(env, 1)
            body = f"(revacc {a} {b})"
        else:
            a, _ = self.list_expr(env, 1, ints=True)
            body = f"(mapinc {a})"
        self.used.add(fn)
        if self.r.random() < 0.5:
            sel = self.select(env)
            if sel:
                v = self.fresh()
                body = f"(let {v} <- {body} in (cons {sel[0]} {v}))"
        src = body
        for v, s in reversed(binds):
            src = f"(let {v} <- {s} in\n  {src})"
        defs = "\n".join(TEMPLATES[f] for f in sorted(self.used))
        return defs + "\n" + src + "\n"


def count_nodes(p: Program) -> int:
    return sum(1 for _, root in p.roots() for _ in walk(root))


def gen_program(seed: int, size: int = 200) -> str:
    """Deterministic random program source with at most ``size`` nodes."""
    if size > 200:
        raise ValueError("size is bounded by 200 nodes")
    for attempt in range(1000):
        src = _Gen(seed * 1000 + attempt, size).program()
        if count_nodes(load(src).program) <= size:
            return src
    raise RuntimeError(f"no program within {size} nodes for seed {seed}")


# ---------------------------------------------------------------------------
# dynamic soundness oracles


@dataclass
class Violations:
    items: list[str] = field(default_factory=list)

    def add(self, kind: str, msg: str) -> None:
        self.items.append(f"{kind}: {msg}")

    def __bool__(self) -> bool:
        return bool(self.items)


def check_liveness(sp: ScopedProgram, live, run: Run, out: Violations, limit: int = 20000) -> int:
    """Every dereferenced link, spelled from a root through any path that
    led to it, is live at every earlier point where that root was bound."""
    by_loc: dict[int, list] = defaultdict(list)
    for v in run.visits:
        for x, loc in v.locs.items():
            by_loc[loc].append((v.step, v.point, x))
    memo: dict = {}
    checked = 0
    for d in run.derefs:
        for loc, path, t0 in d.chains:
            rows = by_loc.get(loc, ())
            for step, point, x in rows[:bisect_right(rows, (t0, sys.maxsize, ""))]:
                key = (point, x, path)
                if key in memo:
                    continue
                ok = live.is_live(point, x, path)
                memo[key] = ok
                checked += 1
                if not ok:
                    out.add("liveness", f"{x}.{pa.fmt(path)} dereferenced after point {point} "
                                        f"but not in its live language")
                if checked >= limit:
                    return checked
    return checked


def _paths_to_cells(val, heap, cap: int = 64) -> dict[int, list[tuple]]:
    out: dict[int, list] = defaultdict(list)
    todo = [(val, ())]
    n = 0
    while todo and n < 4096:
        cur, path = todo.pop()
        n += 1
        if not isinstance(cur, Ref):
            continue
        if len(out[cur.cell]) < cap:
            out[cur.cell].append(path)
        if len(path) < 12:
            for k in (1, 0):
                todo.append((heap[cur.cell][k], path + (k,)))
    return out


def _cell_at(val, path, heap):
    for k in path:
        val = heap[val.cell][k]
    return val


def check_sharing(sp: ScopedProgram, share, run: Run, out: Violations,
                  per_point: int = 2) -> int:
    """Every pair of roots meeting at a cell is covered by the static
    sharing language, at the first point where their paths converge."""
    seen: dict[int, int] = defaultdict(int)
    checked = 0
    for v in run.visits:
        if seen[v.point] >= per_point:
            continue
        seen[v.point] += 1
        names = sorted(x for x, val in v.vals.items() if isinstance(val, Ref))
        reach = {x: _paths_to_cells(v.vals[x], run.heap) for x in names}
        for i, x in enumerate(names):
            for y in names[i:]:
                common = reach[x].keys() & reach[y].keys()
                for c in sorted(common):
                    for a in reach[x][c]:
                        for b in reach[y][c]:
                            if x == y and a == b:
                                continue
                            if (a and b and a[-1] == b[-1] and
                                    _cell_at(v.vals[x], a[:-1], run.heap)
                                    == _cell_at(v.vals[y], b[:-1], run.heap)):
                                continue
                            bip = a + tuple(pa.bar(s) for s in reversed(b))
                            checked += 1
                            if not share.shares(v.point, x, y, bip):
                                out.add("sharing", f"S({x},{y}) at point {v.point} "
                                                   f"misses {pa.fmt(bip)}")
    return checked


def check_avail(sp: ScopedProgram, avail, run: Run, out: Violations, strict: bool) -> int:
    """Every available path can be walked at every visit without meeting
    nil; strict availability must end on a cell."""
    checked = 0
    for v in run.visits:
        for x, paths in avail.env.get(v.point, {}).items():
            if x not in v.vals:
                continue
            for p in paths:
                if not pa.is_forward(p):
                    continue
                checked += 1
                cur = v.vals[x]
                ok = True
                for k in p:
                    if not isinstance(cur, Ref):
                        ok = False
                        break
                    cur = run.heap[cur.cell][k]
                if ok:
                    ok = isinstance(cur, Ref) if strict else cur is not None
                if not ok:
                    kind = "strict availability" if strict else "availability"
                    out.add(kind, f"{x}.{pa.fmt(p)} at point {v.point} does not exist")
    return checked


def check_transform(sp: ScopedProgram, transformed: Program, out: Violations) -> dict:
    """Same value, no exceptions, no growth in reachable cells, and no cut
    link is read later by the original program."""
    orig = evaluate(sp, reach=True)
    try:
        new = evaluate(transformed, reach=True)
    except RuntimeFault as err:
        out.add("transform", f"transformed program failed: {err}")
        return {}
    if orig.show() != new.show():
        out.add("transform", f"value changed from {orig.show()} to {new.show()}")
    ko, kn = visit_keys(orig), visit_keys(new)
    if ko != kn:
        out.add("transform", "control flow diverged")
        return {}
    for a, b in zip(orig.visits, new.visits):
        if b.reach > a.reach:
            out.add("reachability", f"point {a.point} reaches {b.reach} cells, "
                                    f"was {a.reach}")
    step_map = {b.step: a.step for a, b in zip(orig.visits, new.visits)}
    new_steps = sorted(step_map)
    for edge, point, step in new.nullified:
        # the next original visit after the statement
        i = bisect_right(new_steps, step)
        if i == len(new_steps):
            continue
        later = derefs_after(orig, step_map[new_steps[i]] - 1)
        if edge in later:
            out.add("safety", f"{edge_name(edge)} cut before point {point} is read later")
    return {"orig": orig, "new": new}
