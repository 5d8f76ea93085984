"""Sharing between root variables as bipath languages, function sharing
summaries, entry environments, and alias queries."""

from __future__ import annotations

from typing import Iterable

from . import langsolve as ls
from . import pathalg as pa
from .langsolve import EMPTY, EPS_LANG, Grammar, Lang, Nfa
from .liveness import prim_args, prim_name
from .syntax import (Call, Const, Expr, If, Let, Nil, ScopedProgram, Var, walk)

BOX_LIMIT = 6
SUMMARY, ANNOTATE = "sum", "ann"


def sp(prim: str, i: int) -> frozenset:
    """Bipaths from argument ``i`` of a primitive to its result."""
    table = {("car", 1): {(pa.CAR,)}, ("cdr", 1): {(pa.CDR,)},
             ("cons", 1): {(pa.BAR0,)}, ("cons", 2): {(pa.BAR1,)},
             ("null?", 1): set(), ("pair?", 1): set(), ("prim", 1): set(), ("prim", 2): set()}
    if (prim, i) not in table:
        raise ValueError(f"no sharing rule for argument {i} of {prim}")
    return frozenset(table[(prim, i)])


def sf_name(fn: str, i: int) -> str:
    return f"sf:{fn}:{i}"


def entry_name(fn: str, i: int, j: int) -> str:
    return f"entry:{fn}:{i}:{j}"


def lookup(env: dict, x: str, y: str) -> Lang:
    """S(x,y) with S(y,x) the reversal of S(x,y)."""
    if (x, y) in env:
        return env[(x, y)]
    if (y, x) in env:
        return ls.rev(env[(y, x)])
    return EPS_LANG if x == y else EMPTY


class Sharing:
    """Sharing environments at every program point, in two flavours:
    ``sum`` runs start every body from the empty environment (used for the
    summaries), ``ann`` runs start from the entry environments."""

    def __init__(self, sp_: ScopedProgram):
        self.sp = sp_
        self.g = Grammar()
        self.envs: dict[tuple[str, int], dict] = {}
        self._se: dict = {}
        self._ss: dict = {}
        self._solver: ls.Solver | None = None
        self._cache: dict = {}
        self._build()

    # -- environments -----------------------------------------------------

    def _small(self, t: Lang) -> Lang:
        return t if len(t) <= BOX_LIMIT else self.g.box(t, "S")

    def env(self, point: int, mode: str = ANNOTATE) -> dict:
        return self.envs[(mode, point)]

    def _visit(self, e: Expr, env: dict, mode: str) -> None:
        self.envs[(mode, e.point)] = env
        if isinstance(e, Let):
            self._visit(e.init, env, mode)
            inner = dict(env)
            v1 = e.var
            inner[(v1, v1)] = self._small(ls.union(EPS_LANG, self.ss(e.init, mode)))
            for x in sorted(self.sp.visible[e.point]):
                inner.pop((v1, x), None)
                inner[(x, v1)] = self._small(self.se(x, e.init, mode))
            self._visit(e.body, inner, mode)
            return
        for c in e.children():
            self._visit(c, env, mode)

    def _build(self) -> None:
        prog = self.sp.program
        for d in prog.defs:
            self._visit(d.body, {}, SUMMARY)
            for i, v in enumerate(d.params, 1):
                self.g.declare(sf_name(d.name, i))
                self.g.add(sf_name(d.name, i), self.se(v, d.body, SUMMARY))
        for d in prog.defs:
            env = {}
            for i, vi in enumerate(d.params, 1):
                for j, vj in enumerate(d.params, 1):
                    if i <= j:
                        self.g.declare(entry_name(d.name, i, j))
                        env[(vi, vj)] = ls.nt(entry_name(d.name, i, j))
                self.g.add(entry_name(d.name, i, i), EPS_LANG)
            self._visit(d.body, env, ANNOTATE)
        self._visit(prog.body, {}, ANNOTATE)
        for _, root in prog.roots():
            for c in walk(root):
                if not isinstance(c, Call):
                    continue
                vis = self.sp.visible[c.point]
                for i, ei in enumerate(c.args, 1):
                    self.g.add(entry_name(c.fn, i, i), self.ss(ei, ANNOTATE))
                    for j, ej in enumerate(c.args, 1):
                        if i < j:
                            self.g.add(entry_name(c.fn, i, j), self.shr(ei, ej, vis, ANNOTATE))

    # -- transfer functions ------------------------------------------------

    def se(self, x: str, e: Expr, mode: str = ANNOTATE) -> Lang:
        """Bipaths from the cell of ``x`` to the result of ``e``."""
        key = (mode, x, e.point)
        if key in self._se:
            return self._se[key]
        env = self.envs[(mode, e.point)]
        if isinstance(e, (Const, Nil)):
            r = EMPTY
        elif isinstance(e, Var):
            r = lookup(env, x, e.name)
        elif isinstance(e, If):
            r = ls.union(self.se(x, e.then, mode), self.se(x, e.other, mode))
        elif isinstance(e, Let):
            r = self.se(x, e.body, mode)
        elif isinstance(e, Call):
            r = ls.union(*(ls.cat(self.se(x, a, mode), ls.nt(sf_name(e.fn, i)))
                           for i, a in enumerate(e.args, 1)))
        else:
            name = prim_name(e)
            r = ls.union(*(ls.cat(self.se(x, a, mode), sp(name, i))
                           for i, a in enumerate(prim_args(e), 1)))
        r = self._small(r)
        self._se[key] = r
        return r

    def shr(self, e1: Expr, e2: Expr, names: Iterable[str], mode: str = ANNOTATE) -> Lang:
        return self._small(ls.union(*(ls.cat(ls.rev(self.se(x, e1, mode)), self.se(x, e2, mode))
                                      for x in sorted(names))))

    def ss(self, e: Expr, mode: str = ANNOTATE) -> Lang:
        """Bipaths from the result of ``e`` to itself."""
        key = (mode, e.point)
        if key in self._ss:
            return self._ss[key]
        env = self.envs[(mode, e.point)]
        if isinstance(e, (Const, Nil)):
            r = EPS_LANG
        elif isinstance(e, Var):
            r = lookup(env, e.name, e.name)
        elif isinstance(e, If):
            r = ls.union(self.ss(e.then, mode), self.ss(e.other, mode))
        elif isinstance(e, Let):
            r = self.ss(e.body, mode)
        else:
            if isinstance(e, Call):
                args = e.args
                summ = [ls.nt(sf_name(e.fn, i)) for i in range(1, len(args) + 1)]
            else:
                args = prim_args(e)
                summ = [sp(prim_name(e), i) for i in range(1, len(args) + 1)]
            vis = self.sp.visible[e.point]
            parts = []
            for i, ei in enumerate(args):
                for j, ej in enumerate(args):
                    if i != j:
                        parts.append(ls.cat(ls.rev(summ[i]), self.shr(ei, ej, vis, mode), summ[j]))
                parts.append(ls.cat(ls.rev(summ[i]), self.ss(ei, mode), summ[i]))
            r = ls.union(*parts)
        r = self._small(r)
        self._ss[key] = r
        return r

    # -- automata and queries ----------------------------------------------

    @property
    def solver(self) -> ls.Solver:
        if self._solver is None:
            self._solver = ls.Solver(self.g)
        return self._solver

    def term(self, point: int, x: str, y: str, mode: str = ANNOTATE) -> Lang:
        return lookup(self.envs[(mode, point)], x, y)

    def summary_term(self, fn: str, i: int) -> Lang:
        return frozenset(self.g.alts(sf_name(fn, i)))

    def raw_nfa(self, point: int, x: str, y: str) -> Nfa:
        # points in one scope share their terms, so key on the term
        key = ("raw", self.term(point, x, y))
        if key not in self._cache:
            self._cache[key] = self.solver.term_nfa(key[1])
        return self._cache[key]

    def nfa(self, point: int, x: str, y: str) -> Nfa:
        """Canonical bipaths from the cell of x to the cell of y."""
        key = ("canon", self.term(point, x, y))
        if key not in self._cache:
            self._cache[key] = ls.simplify(self.raw_nfa(point, x, y), keep_barred=True)
        return self._cache[key]

    def shares(self, point: int, x: str, y: str, bipath) -> bool:
        return ls.accepts(self.nfa(point, x, y), tuple(bipath))

    def aliases(self, point: int, x: str, alpha, y: str) -> Nfa:
        """Forward paths y.beta reaching the cell reached by x.alpha."""
        alpha = tuple(alpha)
        key = ("alias", point, x, alpha, y)
        if key in self._cache:
            return self._cache[key]
        if y not in self.sp.visible[point] or x not in self.sp.visible[point]:
            res = ls.EMPTY_NFA
        else:
            # the canonical bipaths already stand for every raw word
            res = ls.simplify(ls.concat_nfa(self.nfa(point, y, x), ls.from_words([alpha])))
            if y == x:
                # the heap is acyclic: a path never meets its own extensions
                res = ls.intersect(res, ls.exact_or_diverging(alpha))
        self._cache[key] = res
        return res

    def node_aliases(self, point: int, x: str, alpha) -> dict[str, Nfa]:
        return {y: self.aliases(point, x, alpha, y) for y in sorted(self.sp.visible[point])}

    def link_aliases(self, point: int, x: str, alpha) -> dict[str, Nfa]:
        """Access paths that may end with the same edge as x.alpha."""
        alpha = tuple(alpha)
        key = ("link", point, x, alpha)
        if key in self._cache:
            return self._cache[key]
        if not alpha:
            res = {x: ls.from_words([()])}
        else:
            last = ls.from_words([alpha[-1:]])
            res = {}
            for y, a in self.node_aliases(point, x, alpha[:-1]).items():
                if not a.is_empty():
                    res[y] = ls.concat_nfa(a, last)
        self._cache[key] = res
        return res


def analyze(sp_: ScopedProgram) -> Sharing:
    return Sharing(sp_)
