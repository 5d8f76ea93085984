"""Selection of dead links to cut at each program point and the rewrite
that inserts the corresponding nil assignments."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from . import langsolve as ls
from . import pathalg as pa
from .avail import Avail, avail_envs
from .liveness import Liveness, annotate
from .sharing import Sharing, analyze
from .syntax import (Begin, Call, Car, Cdr, Cons, Expr, FunctionDef, If, Let, Prim,
                     Program, ScopedProgram, SetCar, SetCdr, SetVar, Var, render_expr, walk)

AccessPath = tuple  # (root variable, forward path)

# every non-empty forward path, and every forward path
_PLUS = ls.Nfa(2, 0, frozenset({1}), frozenset({(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1)}))
_STAR = ls.Nfa(1, 0, frozenset({0}), frozenset({(0, 0, 0), (0, 1, 0)}))


def fmt_access(ap: AccessPath) -> str:
    v, path = ap
    return v if not path else f"{v}.{pa.fmt(path)}"


def order_key(ap: AccessPath) -> tuple:
    """Emission order at one point: longer paths first."""
    return (-len(ap[1]), ap[0], ap[1])


def candidates(pt: int, a: dict, visible) -> set[AccessPath]:
    """Roots plus one-step extensions of available forward paths."""
    out = set()
    for v in visible:
        out.add((v, ()))
        for alpha in a.get(v, ()):
            if pa.is_forward(alpha):
                out.add((v, alpha + (pa.CAR,)))
                out.add((v, alpha + (pa.CDR,)))
    return out


def temp_free_points(sp: ScopedProgram) -> set[int]:
    """Points not evaluated while an earlier argument waits in a temporary."""
    out: set[int] = set()

    def go(e: Expr, free: bool) -> None:
        if free:
            out.add(e.point)
        if isinstance(e, (Cons, Prim)):
            go(e.left, free)
            go(e.right, False)
        elif isinstance(e, Call):
            for i, arg in enumerate(e.args):
                go(arg, free and i == 0)
        else:
            for c in e.children():
                go(c, free)

    for _, body in sp.program.roots():
        go(body, True)
    return out


def emit(ap: AccessPath) -> Expr:
    """The statement that cuts the last link of ``ap``."""
    v, path = ap
    if not pa.is_forward(path):
        raise ValueError(f"cannot nullify a non-forward path {pa.fmt(path)}")
    if not path:
        return SetVar(v)
    target: Expr = Var(v)
    for s in path[:-1]:
        target = Car(target) if s == pa.CAR else Cdr(target)
    return SetCar(target) if path[-1] == pa.CAR else SetCdr(target)


@dataclass
class Mark:
    """A cut made at ``point``.  Poison marks stand for cuts the root can
    no longer spell: ``nil`` ones say the root itself may hold nil."""
    point: int
    root: str
    path: tuple
    poison: bool = False
    nil: bool = False


@dataclass
class Analyses:
    sp: ScopedProgram
    live: Liveness
    share: Sharing
    avail: Avail

    @classmethod
    def of(cls, sp: ScopedProgram) -> "Analyses":
        return cls(sp, annotate(sp), analyze(sp), avail_envs(sp, strict=True))


@dataclass
class NullPlan:
    sp: ScopedProgram
    entries: dict[int, list[AccessPath]] = field(default_factory=dict)
    notes: dict[int, dict[str, str]] = field(default_factory=dict)

    def paths(self, point: int) -> list[AccessPath]:
        return self.entries.get(point, [])

    def to_json(self) -> list[dict]:
        rows = []
        for pt in sorted(self.entries):
            for ap in self.entries[pt]:
                rows.append({"point": pt, "label": self.sp.nodes[pt].label,
                             "path": fmt_access(ap), "statement": render_expr(emit(ap))})
        return rows


class Planner:
    """Walks each body in execution order choosing links to cut."""

    def __init__(self, an: Analyses):
        self.an = an
        self.sp = an.sp
        self.free = temp_free_points(an.sp)
        self._live: dict = {}

    # -- queries ------------------------------------------------------------

    def live_nfa(self, pt: int, y: str) -> ls.Nfa:
        key = (pt, y)
        if key not in self._live:
            self._live[key] = self.an.live.nfa(pt, y)
        return self._live[key]

    def is_safe(self, pt: int, ap: AccessPath) -> bool:
        """No link-alias of ``ap`` is live at ``pt``."""
        v, path = ap
        for y, nfa in self.an.share.link_aliases(pt, v, path).items():
            if ls.intersects(nfa, self.live_nfa(pt, y)):
                return False
        return True

    def cut_language(self, pt: int, marks: list[Mark]) -> dict[str, ls.Nfa]:
        """Links already cut, spelled from the roots visible at ``pt``."""
        vis = self.sp.visible[pt]
        parts: dict[str, list] = {}
        for m in marks:
            if m.poison:
                if m.root in vis:
                    parts.setdefault(m.root, []).append(_STAR if m.nil else _PLUS)
                continue
            for y, nfa in self.an.share.link_aliases(m.point, m.root, m.path).items():
                if y in vis:
                    parts.setdefault(y, []).append(nfa)
            if m.path and m.root in vis and m.point != pt:
                # variables bound since the cut may share the cell too
                for y, nfa in self.an.share.link_aliases(pt, m.root, m.path).items():
                    parts.setdefault(y, []).append(nfa)
        return {y: ls.union_nfa(*ns) for y, ns in parts.items()}

    @staticmethod
    def _hits(langs: dict[str, ls.Nfa], cut: dict[str, ls.Nfa]) -> bool:
        return any(y in cut and ls.intersects(nfa, cut[y]) for y, nfa in langs.items())

    def _traversal(self, pt: int, ap: AccessPath) -> list[dict[str, ls.Nfa]]:
        v, path = ap
        return [self.an.share.link_aliases(pt, v, path[:k]) for k in range(len(path))]

    # -- selection ------------------------------------------------------------

    def select(self, pt: int, marks: list[Mark]) -> list[AccessPath]:
        if pt not in self.free:
            return []
        share = self.an.share
        vis = self.sp.visible[pt]
        fn = self.sp.owner[pt]
        params = [p for p in self.sp.params(fn) if p in vis]
        cut = self.cut_language(pt, marks)
        done = {(m.root, m.path) for m in marks if not m.poison}
        chosen: list[tuple[AccessPath, dict, list]] = []
        notes = {}
        cands = candidates(pt, self.an.avail.env.get(pt, {}), vis)
        for ap in sorted(cands, key=lambda c: (len(c[1]), c[0], c[1])):
            v, path = ap
            if not self.is_safe(pt, ap):
                continue
            if path and any(not share.aliases(pt, v, path[:-1], p).is_empty() for p in params):
                notes[fmt_access(ap)] = "reachable from a parameter"
                continue
            links = share.link_aliases(pt, v, path)
            trav = self._traversal(pt, ap)
            same_len = _merge(*(ln for (_, q), ln, _ in chosen if len(q) == len(path)))
            if any(self._hits(t, cut) or self._hits(t, same_len) for t in trav):
                notes[fmt_access(ap)] = "traversal crosses a cut link"
                continue
            if any(len(q) < len(path) and any(self._hits(links, t) for t in tr)
                   for (u, q), _, tr in chosen):
                notes[fmt_access(ap)] = "would cut a traversal at this point"
                continue
            if ap in done or any(self._hits(links, ln) for _, ln, _ in chosen):
                notes[fmt_access(ap)] = "already cut"
                continue
            if path:
                gone = _merge(cut, *(ln for _, ln, _ in chosen))
                if not any(ls.avoids_prefixes(a, gone.get(y, ls.EMPTY_NFA))
                           for y, a in share.node_aliases(pt, v, path[:-1]).items()):
                    notes[fmt_access(ap)] = "cell already unreachable"
                    continue
            chosen.append((ap, links, trav))
        if notes:
            self._notes[pt] = notes
        return sorted((ap for ap, _, _ in chosen), key=order_key)

    def _walk(self, e: Expr, marks: list[Mark], plan: NullPlan) -> list[Mark]:
        picked = self.select(e.point, marks)
        if picked:
            plan.entries[e.point] = picked
            marks = marks + [Mark(e.point, v, p) for v, p in picked]
        if isinstance(e, If):
            marks = self._walk(e.cond, marks, plan)
            m1 = self._walk(e.then, marks, plan)
            m2 = self._walk(e.other, marks, plan)
            seen = {id(m) for m in m1}
            return m1 + [m for m in m2 if id(m) not in seen]
        if isinstance(e, Let):
            before = len(marks)
            marks = self._walk(e.init, marks, plan)
            local = _bound_in(e.init)
            if self._may_read_nil(e.init, marks):
                marks = marks + [Mark(e.body.point, e.var, (), poison=True, nil=True)]
            elif any(m.root in local and (m.path or m.poison) for m in marks[before:]):
                marks = marks + [Mark(e.body.point, e.var, (), poison=True)]
            return self._walk(e.body, marks, plan)
        for c in e.children():
            marks = self._walk(c, marks, plan)
        return marks

    def _may_read_nil(self, init: Expr, marks: list[Mark]) -> bool:
        """The value of ``init`` may differ from the original one: it reads
        a variable whose root was cut, or selects through a cut link.  Cuts
        placed later in preorder cannot precede a read."""
        for x in walk(init):
            if isinstance(x, Var):
                if any(m.root == x.name and m.point <= x.point
                       and ((not m.path and not m.poison) or m.nil) for m in marks):
                    return True
                continue
            if not isinstance(x, (Car, Cdr)):
                continue
            path = []
            base = x
            while isinstance(base, (Car, Cdr)):
                path.append(pa.CAR if isinstance(base, Car) else pa.CDR)
                base = base.arg
            before = [m for m in marks if m.point <= base.point and (m.path or m.poison)]
            if not before:
                continue
            if not isinstance(base, Var):
                return True
            links = self.an.share.link_aliases(base.point, base.name, tuple(reversed(path)))
            if self._hits(links, self.cut_language(base.point, before)):
                return True
        return False

    def plan(self, only: int | None = None) -> NullPlan:
        plan = NullPlan(self.sp)
        self._notes = plan.notes
        if only is not None:
            picked = self.select(only, [])
            if picked:
                plan.entries[only] = picked
            return plan
        for _, body in self.sp.program.roots():
            self._walk(body, [], plan)
        return plan


def _merge(*langs: dict[str, ls.Nfa]) -> dict[str, ls.Nfa]:
    parts: dict[str, list] = {}
    for lang in langs:
        for y, nfa in lang.items():
            parts.setdefault(y, []).append(nfa)
    return {y: ns[0] if len(ns) == 1 else ls.union_nfa(*ns) for y, ns in parts.items()}


def _bound_in(e: Expr) -> set[str]:
    out = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Let):
            out.add(x.var)
        stack.extend(x.children())
    return out


def is_safe(an: Analyses, pt: int, ap: AccessPath) -> bool:
    return Planner(an).is_safe(pt, ap)


def plan(sp: ScopedProgram, an: Analyses | None = None, only: int | None = None) -> NullPlan:
    """Links to cut before each point.  With ``only`` the selection is made
    for that single point, ignoring cuts made earlier."""
    return Planner(an or Analyses.of(sp)).plan(only)


def _rebuild(e: Expr, entries: dict[int, list[AccessPath]]) -> Expr:
    changes = {}
    for f in dataclasses.fields(e):
        v = getattr(e, f.name)
        if isinstance(v, Expr):
            changes[f.name] = _rebuild(v, entries)
        elif isinstance(v, list) and v and isinstance(v[0], Expr):
            changes[f.name] = [_rebuild(x, entries) for x in v]
    new = dataclasses.replace(e, **changes)
    if entries.get(e.point):
        return Begin([emit(ap) for ap in entries[e.point]], new)
    return new


def transform(sp: ScopedProgram, null_plan: NullPlan | None = None) -> Program:
    """A copy of the program with the planned statements inserted.  Original
    nodes keep their points; inserted nodes get point -1."""
    null_plan = null_plan or plan(sp)
    p = sp.program
    defs = [FunctionDef(d.name, list(d.params), _rebuild(d.body, null_plan.entries))
            for d in p.defs]
    return Program(defs, _rebuild(p.body, null_plan.entries))
