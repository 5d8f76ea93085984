"""Intraprocedural availability: demand flows inward, availability flows
outward, over finite sets of canonical paths."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import pathalg as pa
from .liveness import prim_args, prim_name
from .syntax import Call, Const, Expr, If, Let, Nil, ScopedProgram, Var

PathSet = frozenset
EMPTY: PathSet = frozenset()
EPS: PathSet = frozenset({()})


def _canon(paths) -> PathSet:
    return pa.canon_set(paths)


def _pre(sym: int, s: PathSet) -> PathSet:
    return _canon((sym,) + p for p in s)


def ap(prim: str, i: int, s: PathSet) -> PathSet:
    """Demand on argument ``i`` given demand ``s`` on the result."""
    if prim == "car" and i == 1:
        return EPS | _pre(pa.CAR, s)
    if prim == "cdr" and i == 1:
        return EPS | _pre(pa.CDR, s)
    if prim == "cons" and i == 1:
        return _pre(pa.BAR0, s)
    if prim == "cons" and i == 2:
        return _pre(pa.BAR1, s)
    if (prim in ("null?", "pair?") and i == 1) or (prim == "prim" and i in (1, 2)):
        return EMPTY
    raise ValueError(f"no demand rule for argument {i} of {prim}")


def abp(prim: str, i: int, s: PathSet) -> PathSet:
    """Availability of the result given availability ``s`` of argument ``i``."""
    if prim == "car" and i == 1:
        return _pre(pa.BAR0, s)
    if prim == "cdr" and i == 1:
        return _pre(pa.BAR1, s)
    if prim == "cons" and i == 1:
        return EPS | _pre(pa.CAR, s)
    if prim == "cons" and i == 2:
        return EPS | _pre(pa.CDR, s)
    if (prim in ("null?", "pair?") and i == 1) or (prim == "prim" and i in (1, 2)):
        return EMPTY
    raise ValueError(f"no availability rule for argument {i} of {prim}")


def _meet(a: dict, b: dict) -> dict:
    return {v: a[v] & b[v] for v in a.keys() & b.keys() if a[v] & b[v]}


@dataclass
class Avail:
    """Per-point annotations of one availability run.

    ``strict`` runs only claim paths that reach cons cells: constants are
    not available and the condition of an ``if`` carries no demand.
    """

    strict: bool = False
    demand: dict[int, PathSet] = field(default_factory=dict)
    result: dict[int, PathSet] = field(default_factory=dict)
    env: dict[int, dict[str, PathSet]] = field(default_factory=dict)
    visible: dict[int, frozenset] | None = None

    def ae(self, e: Expr, s: PathSet, a: dict) -> tuple[PathSet, dict]:
        s = _canon(s)
        self.demand[e.point] = s
        out_s, out_a = self._ae(e, s, a)
        self.result[e.point] = out_s
        vis = self.visible.get(e.point) if self.visible else None
        self.env[e.point] = {v: p for v, p in out_a.items() if p and (vis is None or v in vis)}
        return out_s, out_a

    def _ae(self, e: Expr, s: PathSet, a: dict) -> tuple[PathSet, dict]:
        if isinstance(e, Const):
            return (EMPTY if self.strict else EPS), a
        if isinstance(e, Nil):
            return EMPTY, a
        if isinstance(e, Var):
            a2 = dict(a)
            a2[e.name] = a.get(e.name, EMPTY) | s
            return a2[e.name], a2
        if isinstance(e, If):
            # strict runs read the condition as a scalar, not as a cell
            _, a1 = self.ae(e.cond, EMPTY if self.strict else EPS, a)
            s2, a2 = self.ae(e.then, s, a1)
            s3, a3 = self.ae(e.other, s, a1)
            return s | (s2 & s3), _meet(a2, a3)
        if isinstance(e, Let):
            s1, a1 = self.ae(e.init, EMPTY, a)
            a1 = dict(a1)
            a1[e.var] = s1
            return self.ae(e.body, s, a1)
        if isinstance(e, Call):
            cur = a
            for arg in e.args:
                _, cur = self.ae(arg, EMPTY, cur)
            return s, cur
        name = prim_name(e)
        cur = a
        res = set(s)
        for i, arg in enumerate(prim_args(e), 1):
            si, cur = self.ae(arg, ap(name, i, s), cur)
            res |= abp(name, i, si)
        return _canon(res), cur


def ae(e: Expr, s=EMPTY, a: dict | None = None, strict: bool = False) -> tuple[PathSet, dict]:
    """Availability of ``e`` and the environment after it."""
    return Avail(strict=strict).ae(e, frozenset(s), dict(a or {}))


def avail_envs(sp: ScopedProgram, strict: bool = False) -> Avail:
    """Run availability over every function body and the program body with
    an empty entry environment and no demand on the result.  The
    annotation at a point is the environment after its expression,
    restricted to the variables in scope there."""
    run = Avail(strict=strict, visible=sp.visible)
    for _, body in sp.program.roots():
        run.ae(body, EMPTY, {})
    return run


def forward(paths) -> list[tuple]:
    return sorted((p for p in paths if pa.is_forward(p)), key=pa.sort_key)
