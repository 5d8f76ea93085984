"""Liveness of heap access paths: per-argument function summaries and the
per-point liveness environments."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from . import langsolve as ls
from . import pathalg as pa
from .langsolve import EMPTY, EPS_LANG, SIGMA, Apply, Grammar, Lang
from .syntax import (Call, Car, Cdr, Cons, Const, Expr, If, Let, Nil, NullQ, PairQ,
                     Prim, ScopedProgram, Var)

PGM = "pgm"
BOX_LIMIT = 6

Env = Mapping[str, Lang]


def exit_name(fn: str) -> str:
    return f"exit:{fn}"


def pgm_productions() -> set:
    return {(), (pa.CAR, PGM), (pa.CDR, PGM)}


def lp(prim: str, i: int, s: Lang) -> Lang:
    """Liveness of argument ``i`` given liveness ``s`` of the result."""
    if prim == "car" and i == 1:
        return ls.union(EPS_LANG, ls.cat((pa.CAR,), s))
    if prim == "cdr" and i == 1:
        return ls.union(EPS_LANG, ls.cat((pa.CDR,), s))
    if prim == "cons" and i == 1:
        return ls.cat((pa.BAR0,), s)
    if prim == "cons" and i == 2:
        return ls.cat((pa.BAR1,), s)
    if (prim in ("null?", "pair?") and i == 1) or (prim == "prim" and i in (1, 2)):
        return EPS_LANG
    raise ValueError(f"no liveness rule for argument {i} of {prim}")


def prim_name(e: Expr) -> str:
    return {Car: "car", Cdr: "cdr", Cons: "cons", NullQ: "null?", PairQ: "pair?",
            Prim: "prim"}[type(e)]


def prim_args(e: Expr) -> list[Expr]:
    if isinstance(e, (Cons, Prim)):
        return [e.left, e.right]
    return [e.arg]


def join(a: Env, b: Env) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = ls.union(out.get(k, EMPTY), v)
    return out


class _LE:
    """One run of the liveness transfer function over an expression.

    ``summary`` mode keeps calls symbolic (for decomposition); otherwise
    calls are instantiated as U | D.s and their result liveness is added
    to the callee's exit nonterminal.
    """

    def __init__(self, grammar: Grammar, summary: bool, order: str = "rtl",
                 visible: Mapping[int, frozenset] | None = None):
        self.g = grammar
        self.summary = summary
        self.order = order
        self.visible = visible
        self.notes: dict[int, dict] = {}

    def _small(self, t: Lang) -> Lang:
        if self.summary or len(t) <= BOX_LIMIT:
            return t
        return self.g.box(t, "L")

    def _note(self, e: Expr, env: dict) -> dict:
        if self.visible is not None and e.point in self.visible:
            vis = self.visible[e.point]
            self.notes[e.point] = {v: t for v, t in env.items() if v in vis and t}
        else:
            self.notes[e.point] = {v: t for v, t in env.items() if t}
        return env

    def lf(self, fn: str, i: int, s: Lang) -> Lang:
        if self.summary:
            return frozenset({(Apply((fn, i), s),)})
        self.g.add(exit_name(fn), s)
        key = (fn, i)
        return ls.union(ls.nt(ls.u_name(key)), ls.cat(ls.nt(ls.d_name(key)), s))

    def le(self, e: Expr, s: Lang, env: dict) -> dict:
        s = self._small(s)
        if isinstance(e, (Const, Nil)):
            return self._note(e, env)
        if isinstance(e, Var):
            out = dict(env)
            out[e.name] = self._small(ls.union(env.get(e.name, EMPTY), s))
            return self._note(e, out)
        if isinstance(e, If):
            l1 = self.le(e.other, s, env)
            l2 = self.le(e.then, s, env)
            return self._note(e, self.le(e.cond, EPS_LANG, join(l1, l2)))
        if isinstance(e, Let):
            l1 = self.le(e.body, s, env)
            inner = dict(l1)
            inner[e.var] = EMPTY
            return self._note(e, self.le(e.init, l1.get(e.var, EMPTY), inner))
        if isinstance(e, Call):
            idx = list(range(1, len(e.args) + 1))
            cur = env
            for i in (reversed(idx) if self.order == "rtl" else idx):
                cur = self.le(e.args[i - 1], self.lf(e.fn, i, s), cur)
            return self._note(e, cur)
        name = prim_name(e)
        args = prim_args(e)
        idx = list(range(1, len(args) + 1))
        cur = env
        for i in (reversed(idx) if self.order == "rtl" else idx):
            cur = self.le(args[i - 1], lp(name, i, s), cur)
        return self._note(e, cur)


def le(e: Expr, s: Lang, env: Mapping[str, Lang] | None = None,
       grammar: Grammar | None = None) -> dict:
    """Liveness environment before ``e`` given result liveness ``s`` and the
    environment ``env`` after it.  Calls are kept as symbolic applications."""
    return _LE(grammar or Grammar(), summary=True).le(e, s, dict(env or {}))


@dataclass
class Summaries:
    grammar: Grammar
    equations: dict[tuple, Lang]
    parts: dict[tuple, tuple[Lang, Lang]]

    def names(self, fn: str, i: int) -> tuple[str, str]:
        return ls.u_name((fn, i)), ls.d_name((fn, i))


def live_summaries(sp: ScopedProgram, grammar: Grammar | None = None) -> Summaries:
    """Summaries LF(s) = U | D.s for every parameter of every function."""
    g = grammar or Grammar()
    eqs: dict[tuple, Lang] = {}
    for d in sp.program.defs:
        env = _LE(g, summary=True).le(d.body, frozenset({(SIGMA,)}), {})
        for i, v in enumerate(d.params, 1):
            eqs[(d.name, i)] = env.get(v, EMPTY)
    parts = ls.decompose(eqs)
    for key, (u, dd) in parts.items():
        g.declare(ls.u_name(key))
        g.declare(ls.d_name(key))
        g.add(ls.u_name(key), u)
        g.add(ls.d_name(key), dd)
    return Summaries(g, eqs, parts)


@dataclass
class Liveness:
    """Per-point liveness terms with lazily built automata."""

    sp: ScopedProgram
    grammar: Grammar
    summaries: Summaries
    terms: dict[int, dict[str, Lang]]
    _solver: ls.Solver | None = None
    _cache: dict = field(default_factory=dict)

    @property
    def solver(self) -> ls.Solver:
        if self._solver is None:
            self._solver = ls.Solver(self.grammar)
        return self._solver

    def term(self, point: int, var: str) -> Lang:
        return self.terms.get(point, {}).get(var, EMPTY)

    def raw_nfa(self, point: int, var: str) -> ls.Nfa:
        key = ("raw", self.term(point, var))
        if key not in self._cache:
            self._cache[key] = self.solver.term_nfa(key[1])
        return self._cache[key]

    def nfa(self, point: int, var: str) -> ls.Nfa:
        """Canonical forward-path automaton of the live paths of ``var``."""
        key = ("simp", self.term(point, var))
        if key not in self._cache:
            self._cache[key] = ls.simplify(self.raw_nfa(point, var))
        return self._cache[key]

    def is_live(self, point: int, var: str, path) -> bool:
        return ls.accepts(self.nfa(point, var), tuple(path))

    def start_symbol(self, point: int, var: str) -> str:
        """Name a query as a grammar nonterminal (for dumps)."""
        name = f"N:{point}:{var}"
        if name not in self.grammar.prods:
            self.grammar.add(name, self.term(point, var))
        return name


def annotate(sp: ScopedProgram, order: str = "rtl") -> Liveness:
    """Liveness environment (as grammar terms) at every program point."""
    g = Grammar()
    g.add(PGM, pgm_productions())
    summ = live_summaries(sp, g)
    for d in sp.program.defs:
        g.declare(exit_name(d.name))
    terms: dict[int, dict[str, Lang]] = {}
    for fn, body in sp.program.roots():
        run = _LE(g, summary=False, order=order, visible=sp.visible)
        sigma = ls.nt(PGM) if fn is None else ls.nt(exit_name(fn))
        run.le(body, sigma, {})
        terms.update(run.notes)
    return Liveness(sp, g, summ, terms)
