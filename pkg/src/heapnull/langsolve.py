"""Path languages: grammar terms, summary decomposition, regular
approximation of context-free grammars and canonical-path automata.

Terms are kept in a flat normal form: a ``frozenset`` of alternatives, each
alternative a tuple of symbols.  A symbol is an ``int`` terminal from
:mod:`heapnull.pathalg`, a ``str`` nonterminal name, or (only while
summaries are being decomposed) the placeholder ``SIGMA`` or an ``Apply``.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping

import networkx as nx

from . import pathalg as pa
from .pathalg import BOTTOM, Path

Symbol = object
Alt = tuple
Lang = frozenset

EMPTY: Lang = frozenset()
EPS_LANG: Lang = frozenset({()})
SIGMA = "$sigma"
REV_PREFIX = "~"


class DecomposeError(ValueError):
    """A summary equation cannot be written as U | D.sigma."""


@dataclass(frozen=True)
class Apply:
    """Symbolic application of a summary to an argument term."""

    key: tuple
    arg: Lang


# ---------------------------------------------------------------------------
# term algebra


def lit(paths: Iterable[Path]) -> Lang:
    return frozenset(tuple(p) for p in paths)


def nt(name: str) -> Lang:
    return frozenset({(name,)})


def _norm_alt(alt: Alt):
    """Reduce maximal terminal runs; return None when a run is undefined."""
    if all(type(s) is int for s in alt):
        r = pa.reduce(alt)
        return None if r is BOTTOM else r
    out: list = []
    run: list[int] = []
    for s in alt:
        if type(s) is int:
            run.append(s)
            continue
        if run:
            r = pa.reduce(tuple(run))
            if r is BOTTOM:
                return None
            out.extend(r)
            run = []
        out.append(s)
    if run:
        r = pa.reduce(tuple(run))
        if r is BOTTOM:
            return None
        out.extend(r)
    return tuple(out)


def union(*terms: Lang) -> Lang:
    out: set = set()
    for t in terms:
        out |= t
    return frozenset(out)


def cat(*terms) -> Lang:
    """Concatenate terms; bare paths are accepted as singleton literals."""
    acc: set = {()}
    for t in terms:
        if isinstance(t, tuple):
            t = (t,)
        nxt = set()
        for a in acc:
            for b in t:
                n = _norm_alt(a + b)
                if n is not None:
                    nxt.add(n)
        acc = nxt
        if not acc:
            return EMPTY
    return frozenset(acc)


def rev_name(name: str) -> str:
    if name.startswith(REV_PREFIX):
        return name[len(REV_PREFIX):]
    return REV_PREFIX + name


def rev_alt(alt: Alt) -> Alt:
    out = []
    for s in reversed(alt):
        if type(s) is int:
            out.append(s ^ 2)
        elif isinstance(s, str):
            out.append(rev_name(s))
        else:
            raise DecomposeError("cannot reverse a symbolic application")
    return tuple(out)


def rev(term: Lang) -> Lang:
    return frozenset(rev_alt(a) for a in term)


def fmt_alt(alt: Alt) -> str:
    if not alt:
        return "e"
    parts = []
    for s in alt:
        if type(s) is int:
            parts.append(pa.fmt((s,)))
        elif isinstance(s, str):
            parts.append(f"<{s}>")
        else:
            parts.append(repr(s))
    return " ".join(parts)


def fmt_term(term: Lang) -> list[str]:
    return sorted(fmt_alt(a) for a in term)


# ---------------------------------------------------------------------------
# summary decomposition


def u_name(key: tuple) -> str:
    return "U:" + ":".join(str(k) for k in key)


def d_name(key: tuple) -> str:
    return "D:" + ":".join(str(k) for k in key)


def _special(s) -> bool:
    return s == SIGMA or isinstance(s, Apply)


def decompose_term(term: Lang) -> tuple[Lang, Lang]:
    """Split ``term`` into (U, D) with term = U | D.sigma."""
    u: set = set()
    d: set = set()
    for alt in term:
        if not any(_special(s) for s in alt):
            u.add(alt)
            continue
        *prefix, last = alt
        prefix = tuple(prefix)
        if any(_special(s) for s in prefix) or not _special(last):
            raise DecomposeError(
                f"sigma occurs in a non-final position in {fmt_alt_safe(alt)}"
            )
        if last == SIGMA:
            d |= cat(prefix, EPS_LANG)
            continue
        au, ad = decompose_term(last.arg)
        un, dn = u_name(last.key), d_name(last.key)
        u |= cat(prefix, nt(un))
        u |= cat(prefix, nt(dn), au)
        d |= cat(prefix, nt(dn), ad)
    return frozenset(u), frozenset(d)


def fmt_alt_safe(alt: Alt) -> str:
    return " ".join(
        "<sigma>" if s == SIGMA else (f"LF{s.key}(..)" if isinstance(s, Apply) else fmt_alt((s,)))
        for s in alt
    )


def decompose(equations: Mapping[tuple, Lang]) -> dict[tuple, tuple[Lang, Lang]]:
    """Decompose every summary equation of a (mutually recursive) system."""
    return {key: decompose_term(rhs) for key, rhs in equations.items()}


# ---------------------------------------------------------------------------
# grammars


class Grammar:
    """Productions over terminals {0,1,0~,1~}; names prefixed by ``~``
    denote the reversal of the base nonterminal and are derived lazily."""

    def __init__(self, productions: Mapping[str, Iterable[Alt]] | None = None):
        self.prods: dict[str, set] = defaultdict(set)
        self._box = 0
        for k, v in (productions or {}).items():
            self.add(k, v)

    def add(self, name: str, alts: Iterable[Alt]) -> None:
        self.prods[name] |= set(alts)

    def declare(self, name: str) -> None:
        self.prods.setdefault(name, set())

    def box(self, term: Lang, hint: str = "t") -> Lang:
        """Name a term by a fresh nonterminal; keeps cross products small."""
        self._box += 1
        name = f"{hint}#{self._box}"
        self.add(name, term)
        return nt(name)

    def alts(self, name: str) -> set:
        if name in self.prods:
            return self.prods[name]
        if name.startswith(REV_PREFIX):
            base = self.alts(rev_name(name))
            r = {rev_alt(a) for a in base}
            self.prods[name] = r
            return r
        return set()

    def closure(self, roots: Iterable[str]) -> set[str]:
        seen: set[str] = set()
        todo = list(roots)
        while todo:
            n = todo.pop()
            if n in seen:
                continue
            seen.add(n)
            for alt in self.alts(n):
                for s in alt:
                    if isinstance(s, str) and s not in seen:
                        todo.append(s)
        return seen

    def productive(self, names: Iterable[str]) -> set[str]:
        names = set(names)
        good: set[str] = set()
        changed = True
        while changed:
            changed = False
            for n in names:
                if n in good:
                    continue
                for alt in self.alts(n):
                    if all(not isinstance(s, str) or s in good for s in alt):
                        good.add(n)
                        changed = True
                        break
        return good

    def is_empty(self, name: str) -> bool:
        return name not in self.productive(self.closure([name]))

    def to_json(self, roots: Iterable[str] | None = None) -> dict[str, list[str]]:
        names = self.closure(roots) if roots is not None else set(self.prods)
        return {n: sorted(fmt_alt(a) for a in self.alts(n)) for n in sorted(names)}

    def derive(self, start: str, max_steps: int) -> set[Path]:
        """Terminal words derivable by leftmost derivations of bounded length."""
        out: set[Path] = set()
        frontier = {(start,)}
        for _ in range(max_steps + 1):
            nxt = set()
            for form in frontier:
                idx = next((i for i, s in enumerate(form) if isinstance(s, str)), None)
                if idx is None:
                    out.add(form)
                    continue
                for alt in self.alts(form[idx]):
                    nxt.add(form[:idx] + alt + form[idx + 1 :])
            frontier = nxt
        return out


# ---------------------------------------------------------------------------
# automata


@dataclass(frozen=True)
class Nfa:
    """Labels are terminals or ``None`` for an epsilon move."""

    n: int
    start: int
    finals: frozenset
    edges: frozenset = field(default_factory=frozenset)

    @cached_property
    def out(self) -> dict[int, list[tuple]]:
        m: dict[int, list] = defaultdict(list)
        for s, a, t in self.edges:
            m[s].append((a, t))
        return m

    @cached_property
    def eps_closure(self) -> dict[int, frozenset]:
        succ = [0] * self.n
        for s, a, t in self.edges:
            if a is None:
                succ[s] |= 1 << t
        res = {}
        for q in range(self.n):
            seen = 1 << q
            todo = [q]
            while todo:
                new = succ[todo.pop()] & ~seen
                if new:
                    seen |= new
                    todo.extend(_bits(new))
            res[q] = frozenset(_bits(seen))
        return res

    def labels(self) -> set:
        return {a for _, a, _ in self.edges if a is not None}

    def step(self, states: Iterable[int], sym: int) -> frozenset:
        nxt = set()
        for q in states:
            for a, t in self.out.get(q, ()):
                if a == sym:
                    nxt |= self.eps_closure[t]
        return frozenset(nxt)

    def initial(self) -> frozenset:
        return self.eps_closure[self.start] if self.n else frozenset()

    def run(self, word: Iterable[int]) -> frozenset:
        cur = self.initial()
        for s in word:
            cur = self.step(cur, s)
            if not cur:
                break
        return cur

    def accepts_word(self, word: Iterable[int]) -> bool:
        return bool(self.run(word) & self.finals)

    def is_empty(self) -> bool:
        return not trim(self).finals

    def to_dot(self, name: str = "nfa") -> str:
        lines = [f'digraph "{name}" {{', "  rankdir=LR;", '  __start [shape=point];']
        for q in range(self.n):
            shape = "doublecircle" if q in self.finals else "circle"
            lines.append(f'  q{q} [shape={shape}, label="{q}"];')
        if self.n:
            lines.append(f"  __start -> q{self.start};")
        for s, a, t in sorted(self.edges, key=lambda e: (e[0], -1 if e[1] is None else e[1], e[2])):
            lab = "e" if a is None else pa.fmt((a,))
            lines.append(f'  q{s} -> q{t} [label="{lab}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


EMPTY_NFA = Nfa(1, 0, frozenset(), frozenset())


class _Builder:
    def __init__(self) -> None:
        self.n = 0
        self.edges: set = set()

    def state(self) -> int:
        self.n += 1
        return self.n - 1

    def embed(self, nfa: Nfa) -> tuple[int, int]:
        off = self.n
        self.n += nfa.n
        for s, a, t in nfa.edges:
            self.edges.add((s + off, a, t + off))
        entry, exit_ = self.state(), self.state()
        self.edges.add((entry, None, nfa.start + off))
        for f in nfa.finals:
            self.edges.add((f + off, None, exit_))
        return entry, exit_

    def seq(self, src: int, syms: Alt, dst: int, sub) -> None:
        cur = src
        for s in syms:
            if type(s) is int:
                nxt = self.state()
                self.edges.add((cur, s, nxt))
                cur = nxt
            else:
                a, b = self.embed(sub(s))
                self.edges.add((cur, None, a))
                cur = b
        self.edges.add((cur, None, dst))

    def build(self, start: int, finals: Iterable[int]) -> Nfa:
        return Nfa(self.n, start, frozenset(finals), frozenset(self.edges))


def from_words(words: Iterable[Path]) -> Nfa:
    b = _Builder()
    s, f = b.state(), b.state()
    for w in words:
        b.seq(s, tuple(w), f, None)
    return trim(remove_eps(b.build(s, [f])))


def trim(nfa: Nfa) -> Nfa:
    """Drop states unreachable from the start or unable to reach a final."""
    if nfa.n == 0:
        return EMPTY_NFA
    fwd = {nfa.start}
    todo = [nfa.start]
    while todo:
        x = todo.pop()
        for _, t in nfa.out.get(x, ()):
            if t not in fwd:
                fwd.add(t)
                todo.append(t)
    back_adj: dict[int, list[int]] = defaultdict(list)
    for s, _, t in nfa.edges:
        back_adj[t].append(s)
    bwd = set(f for f in nfa.finals if f in fwd)
    todo = list(bwd)
    while todo:
        x = todo.pop()
        for s in back_adj.get(x, ()):
            if s not in bwd and s in fwd:
                bwd.add(s)
                todo.append(s)
    keep = fwd & bwd
    if nfa.start not in keep:
        return EMPTY_NFA
    order = sorted(keep)
    ren = {q: i for i, q in enumerate(order)}
    edges = frozenset(
        (ren[s], a, ren[t]) for s, a, t in nfa.edges if s in keep and t in keep
    )
    return Nfa(len(order), ren[nfa.start], frozenset(ren[f] for f in nfa.finals if f in keep), edges)


def remove_eps(nfa: Nfa) -> Nfa:
    """Epsilon elimination that keeps the state set unchanged."""
    clo = nfa.eps_closure
    edges = set()
    finals = set()
    for q in range(nfa.n):
        for p in clo[q]:
            if p in nfa.finals:
                finals.add(q)
            for a, t in nfa.out.get(p, ()):
                if a is not None:
                    edges.add((q, a, t))
    return Nfa(nfa.n, nfa.start, frozenset(finals), frozenset(edges))


def minimize(nfa: Nfa, limit: int = 256) -> Nfa:
    """Subset construction plus partition refinement.  If determinisation
    exceeds ``limit`` states only bisimilar states are merged."""
    nfa = trim(nfa)
    if nfa.n <= 1:
        return nfa
    alphabet = sorted(nfa.labels())
    start = nfa.initial()
    index = {start: 0}
    trans: list[dict[int, int]] = [{}]
    todo = [start]
    while todo:
        cur = todo.pop()
        i = index[cur]
        for a in alphabet:
            nxt = nfa.step(cur, a)
            if not nxt:
                continue
            if nxt not in index:
                if len(index) >= limit:
                    return merge_bisimilar(nfa)
                index[nxt] = len(index)
                trans.append({})
                todo.append(nxt)
            trans[i][a] = index[nxt]
    m = len(index)
    acc = [False] * m
    for s, i in index.items():
        acc[i] = bool(s & nfa.finals)
    block = [1 if a else 0 for a in acc]
    while True:
        sig = {}
        new = []
        for q in range(m):
            key = (block[q],) + tuple(block[trans[q][a]] if a in trans[q] else -1 for a in alphabet)
            new.append(sig.setdefault(key, len(sig)))
        if len(sig) == len(set(block)):
            block = new
            break
        block = new
    edges = frozenset((block[q], a, block[t]) for q in range(m) for a, t in trans[q].items())
    finals = frozenset(block[q] for q in range(m) if acc[q])
    return trim(Nfa(max(block) + 1, block[0], finals, edges))


def merge_bisimilar(nfa: Nfa) -> Nfa:
    """Quotient by the coarsest forward bisimulation; keeps the language
    without determinising."""
    nfa = trim(remove_eps(nfa))
    out = nfa.out
    block = [1 if q in nfa.finals else 0 for q in range(nfa.n)]
    count = len(set(block))
    while True:
        sigs: dict = {}
        new = [sigs.setdefault((block[q], frozenset((a, block[t]) for a, t in out.get(q, ()))),
                               len(sigs)) for q in range(nfa.n)]
        if len(sigs) == count:
            break
        block, count = new, len(sigs)
    edges = frozenset((new[s], a, new[t]) for s, a, t in nfa.edges)
    return Nfa(count, new[nfa.start], frozenset(new[f] for f in nfa.finals), edges)


def _bits(m: int) -> Iterator[int]:
    while m:
        low = m & -m
        yield low.bit_length() - 1
        m ^= low


# silent moves added per state before silent cycles are merged
BYPASS_BUDGET = 64


def simplify(nfa: Nfa, keep_barred: bool = False) -> Nfa:
    """Canonical-path automaton: bypass 0~0 and 1~1 pairs with epsilon edges
    until nothing changes, then drop the backward edges and trim.

    With ``keep_barred`` the backward edges are retained, so canonical
    bipaths of the input language remain members.
    """
    cur = merge_bisimilar(nfa)
    n = cur.n
    # step[a][q]: successors by symbol a; eps[q]: silent moves added so far
    step = [[0] * n for _ in range(4)]
    for s, a, t in cur.edges:
        step[a][s] |= 1 << t
    fin = sum(1 << f for f in cur.finals)
    start = cur.start
    eps = [0] * n
    budget = BYPASS_BUDGET * (n + 1)
    while not _bypass(n, step, eps, budget):
        # states on a silent cycle accept the same words: merge them
        before = n
        n, step, eps, fin, start = _merge_cycles(n, step, eps, fin, start)
        if n == before:
            budget = 2 * budget + 1
    pred = [0] * n
    for p in range(n):
        for r in _bits(eps[p]):
            pred[r] |= 1 << p
    # close the silent moves over the kept symbols and the final states
    succ = [step[a][:] for a in range(4 if keep_barred else 2)]
    final = [fin >> q & 1 for q in range(n)]
    todo = deque(range(n))
    queued = [True] * n
    while todo:
        x = todo.popleft()
        queued[x] = False
        for y in _bits(pred[x]):
            more = final[x] and not final[y]
            for row in succ:
                if row[x] & ~row[y]:
                    row[y] |= row[x]
                    more = True
            if more:
                final[y] = final[y] or final[x]
                if not queued[y]:
                    queued[y] = True
                    todo.append(y)
    return _quotient(n, start, sum(f << q for q, f in enumerate(final)), succ)


def _bypass(n: int, step: list[list[int]], eps: list[int], budget: int) -> bool:
    """Add silent moves p -> r for every p -a~-> q ~> -a-> r until nothing
    changes (True) or more than ``budget`` moves were added (False)."""
    # hit[a][q]: states reached from q by silent moves then symbol a
    hit = [step[0][:], step[1][:]]
    into = [[] for _ in range(n)]
    for a in (2, 3):
        for s in range(n):
            for t in _bits(step[a][s]):
                into[t].append((s, a - 2))
    pred = [0] * n
    for p in range(n):
        for r in _bits(eps[p]):
            pred[r] |= 1 << p
    todo = deque(range(n))
    queued = [True] * n

    def grow(x: int, r: int) -> None:
        if (hit[0][r] & ~hit[0][x]) or (hit[1][r] & ~hit[1][x]):
            hit[0][x] |= hit[0][r]
            hit[1][x] |= hit[1][r]
            if not queued[x]:
                queued[x] = True
                todo.append(x)

    added = 0
    while todo:
        if added > budget:
            return False
        x = todo.popleft()
        queued[x] = False
        for y in _bits(pred[x]):
            grow(y, x)
        for p, a in into[x]:
            new = hit[a][x] & ~eps[p]
            if not new:
                continue
            eps[p] |= new
            for r in _bits(new):
                added += 1
                pred[r] |= 1 << p
                grow(p, r)
    return True


def _merge_cycles(n, step, eps, fin, start):
    graph = nx.DiGraph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from((p, r) for p in range(n) for r in _bits(eps[p]))
    comps = list(nx.strongly_connected_components(graph))
    if len(comps) == n:
        return n, step, eps, fin, start
    rep = [0] * n
    for c, comp in enumerate(comps):
        for q in comp:
            rep[q] = c

    def image(mask: int) -> int:
        out = 0
        for q in _bits(mask):
            out |= 1 << rep[q]
        return out
    m = len(comps)
    step2 = [[0] * m for _ in range(4)]
    eps2 = [0] * m
    fin2 = 0
    for q in range(n):
        c = rep[q]
        for a in range(4):
            step2[a][c] |= step[a][q]
        eps2[c] |= eps[q]
        if fin >> q & 1:
            fin2 |= 1 << c
    step2 = [[image(x) for x in row] for row in step2]
    eps2 = [image(x) & ~(1 << c) for c, x in enumerate(eps2)]
    return m, step2, eps2, fin2, rep[start]


def _quotient(n: int, start: int, fin: int, succ: list[list[int]]) -> Nfa:
    """Trimmed bisimulation quotient of an automaton given by successor
    bit sets per symbol."""
    live = 1 << start
    todo = [start]
    while todo:
        q = todo.pop()
        for row in succ:
            new = row[q] & ~live
            live |= new
            todo.extend(_bits(new))
    useful = fin & live
    changed = True
    while changed:
        changed = False
        for q in _bits(live & ~useful):
            if any(row[q] & useful for row in succ):
                useful |= 1 << q
                changed = True
    states = list(_bits(useful))
    if start not in states:
        return EMPTY_NFA
    block = {q: 1 if fin >> q & 1 else 0 for q in states}
    count = len(set(block.values()))
    while True:
        masks = {}
        for q in states:
            masks.setdefault(block[q], 0)
            masks[block[q]] |= 1 << q
        # signatures depend only on the successor mask, so cache them
        seen: dict[int, frozenset] = {}

        def hit(m: int) -> frozenset:
            m &= useful
            if m not in seen:
                seen[m] = frozenset(b for b, bm in masks.items() if m & bm)
            return seen[m]
        sigs: dict = {}
        new = {q: sigs.setdefault((block[q],) + tuple(hit(row[q]) for row in succ), len(sigs))
               for q in states}
        if len(sigs) == count:
            break
        block, count = new, len(sigs)
    # the last round did not split anything, so old blocks map onto new ones
    rename = {block[q]: new[q] for q in states}
    edges = set()
    for q in states:
        for a, row in enumerate(succ):
            for b in hit(row[q]):
                edges.add((new[q], a, rename[b]))
    finals = frozenset(new[q] for q in states if fin >> q & 1)
    return Nfa(count, new[start], finals, frozenset(edges))


def accepts(nfa: Nfa, p) -> bool:
    """Membership of a canonical, defined path."""
    if p is BOTTOM or not pa.is_canonical(p):
        raise ValueError(f"query path must be canonical and defined: {pa.fmt(p)}")
    return nfa.accepts_word(p)


def union_nfa(*nfas: Nfa) -> Nfa:
    b = _Builder()
    s, f = b.state(), b.state()
    for m in nfas:
        a, z = b.embed(m)
        b.edges.add((s, None, a))
        b.edges.add((z, None, f))
    return trim(remove_eps(b.build(s, [f])))


def concat_nfa(*nfas: Nfa) -> Nfa:
    b = _Builder()
    s = cur = b.state()
    for m in nfas:
        a, z = b.embed(m)
        b.edges.add((cur, None, a))
        cur = z
    return trim(remove_eps(b.build(s, [cur])))


def reverse_nfa(nfa: Nfa) -> Nfa:
    b = _Builder()
    b.n = nfa.n
    s = b.state()
    for x, a, y in nfa.edges:
        b.edges.add((y, None if a is None else a ^ 2, x))
    for f in nfa.finals:
        b.edges.add((s, None, f))
    return trim(remove_eps(b.build(s, [nfa.start])))


def combine(op: str, *args):
    """Language-level union / concat / reverse of automata or terms."""
    if all(isinstance(a, Nfa) for a in args):
        if op == "union":
            return union_nfa(*args)
        if op == "concat":
            return concat_nfa(*args)
        if op == "reverse" and len(args) == 1:
            return reverse_nfa(args[0])
    elif all(isinstance(a, frozenset) for a in args):
        if op == "union":
            return union(*args)
        if op == "concat":
            return cat(*args)
        if op == "reverse" and len(args) == 1:
            return rev(args[0])
    raise ValueError(f"unsupported combination {op!r}")


def enumerate_words(nfa: Nfa, max_len: int) -> list[Path]:
    """Accepted words of length <= max_len in shortlex order."""
    if max_len > 16:
        raise ValueError("max_len must be at most 16")
    out: list[Path] = []
    alphabet = sorted(nfa.labels())
    layer = [((), nfa.initial())]
    for length in range(max_len + 1):
        for w, st in layer:
            if st & nfa.finals:
                out.append(w)
        if length == max_len:
            break
        nxt = []
        for w, st in layer:
            for a in alphabet:
                s2 = nfa.step(st, a)
                if s2:
                    nxt.append((w + (a,), s2))
        layer = nxt
    return out


# ---------------------------------------------------------------------------
# strongly regular approximation


class Solver:
    """Turns nonterminals of a grammar into automata.

    Components of the nonterminal dependency graph that are neither left-
    nor right-linear are first rewritten with the Mohri-Nederhof
    transformation, which can only enlarge the language.
    """

    def __init__(self, grammar: Grammar, roots: Iterable[str] | None = None):
        self.g = grammar
        self.known: set[str] = set()
        self.good: set[str] = set()
        self.prods: dict[str, set] = {}
        self.approximated: set[str] = set()
        self._scc_of: dict[str, int] = {}
        self._sccs: list[set[str]] = []
        self._kind: list[str] = []
        self._memo: dict[str, Nfa] = {}
        self._scc_auto: dict[int, tuple] = {}
        self._extend(roots if roots is not None else list(grammar.prods))

    def _extend(self, roots: Iterable[str]) -> None:
        """Admit nonterminals met after construction, such as reversals
        that the grammar only derives on demand."""
        new = self.g.closure(roots) - self.known
        if not new:
            return
        self.known |= new
        fresh = self.g.productive(new | self.good) - self.good
        self.good |= fresh
        for n in fresh:
            self.prods[n] = {
                a for a in self.g.alts(n)
                if all(not isinstance(s, str) or s in self.good for s in a)
            }
        self._prepare(fresh)

    def _prepare(self, names: set[str]) -> None:
        graph = nx.DiGraph()
        graph.add_nodes_from(names)
        for n in names:
            for a in self.prods[n]:
                for s in a:
                    if isinstance(s, str) and s in names:
                        graph.add_edge(n, s)
        for comp in nx.strongly_connected_components(graph):
            comp = set(comp)
            kind = self._classify(comp)
            if kind == "mn":
                comp = self._mohri_nederhof(comp)
                kind = "right"
            idx = len(self._sccs)
            self._sccs.append(comp)
            self._kind.append(kind)
            for n in comp:
                self._scc_of[n] = idx

    def _classify(self, comp: set[str]) -> str:
        rec = False
        right = left = True
        for n in comp:
            for a in self.prods[n]:
                pos = [i for i, s in enumerate(a) if isinstance(s, str) and s in comp]
                if not pos:
                    continue
                rec = True
                if pos != [len(a) - 1]:
                    right = False
                if pos != [0]:
                    left = False
        if not rec:
            return "flat"
        if right:
            return "right"
        if left:
            return "left"
        return "mn"

    def _mohri_nederhof(self, comp: set[str]) -> set[str]:
        prime = {n: n + "#mn" for n in comp}
        new: dict[str, set] = {prime[n]: {()} for n in comp}
        for n in comp:
            new.setdefault(n, set())
        for n in comp:
            for a in self.prods[n]:
                pieces: list[list] = [[]]
                members: list[str] = []
                for s in a:
                    if isinstance(s, str) and s in comp:
                        members.append(s)
                        pieces.append([])
                    else:
                        pieces[-1].append(s)
                if not members:
                    new[n].add(tuple(pieces[0]) + (prime[n],))
                    continue
                new[n].add(tuple(pieces[0]) + (members[0],))
                for k in range(len(members) - 1):
                    new[prime[members[k]]].add(tuple(pieces[k + 1]) + (members[k + 1],))
                new[prime[members[-1]]].add(tuple(pieces[-1]) + (prime[n],))
        self.prods.update(new)
        self.approximated |= comp
        return comp | set(prime.values())

    def _scc_automaton(self, idx: int):
        if idx in self._scc_auto:
            return self._scc_auto[idx]
        comp, kind = self._sccs[idx], self._kind[idx]
        b = _Builder()
        st = {n: b.state() for n in sorted(comp)}
        extra = b.state()
        for n in sorted(comp):
            for a in sorted(self.prods[n], key=repr):
                if kind == "right" and a and isinstance(a[-1], str) and a[-1] in comp:
                    b.seq(st[n], a[:-1], st[a[-1]], self.nfa)
                elif kind == "right":
                    b.seq(st[n], a, extra, self.nfa)
                elif kind == "left" and a and isinstance(a[0], str) and a[0] in comp:
                    b.seq(st[a[0]], a[1:], st[n], self.nfa)
                else:
                    b.seq(extra, a, st[n], self.nfa)
        res = (b, st, extra)
        self._scc_auto[idx] = res
        return res

    def nfa(self, name: str) -> Nfa:
        """Automaton (possibly with backward labels) for one nonterminal."""
        if name in self._memo:
            return self._memo[name]
        if name not in self.known:
            self._extend([name])
        if name not in self.prods:
            self._memo[name] = EMPTY_NFA
            return EMPTY_NFA
        idx = self._scc_of[name]
        kind = self._kind[idx]
        if kind == "flat":
            b = _Builder()
            s, f = b.state(), b.state()
            for a in self.prods[name]:
                b.seq(s, a, f, self.nfa)
            res = b.build(s, [f])
        else:
            b, st, extra = self._scc_automaton(idx)
            if kind == "right":
                res = b.build(st[name], [extra])
            else:
                res = b.build(extra, [st[name]])
        res = minimize(remove_eps(res))
        self._memo[name] = res
        return res

    def term_nfa(self, term: Lang) -> Nfa:
        self._extend({x for a in term for x in a if isinstance(x, str)} - self.known)
        b = _Builder()
        s, f = b.state(), b.state()
        for a in term:
            if all(not isinstance(x, str) or x in self.good for x in a):
                b.seq(s, a, f, self.nfa)
        return minimize(remove_eps(b.build(s, [f])))


def approximate(grammar: Grammar, start: str) -> Nfa:
    """Regular superset automaton for the language of ``start``."""
    return Solver(grammar, [start]).nfa(start)


def intersect(a: Nfa, b: Nfa) -> Nfa:
    """Product automaton accepting L(a) & L(b)."""
    a, b = remove_eps(a), remove_eps(b)
    index: dict[tuple[int, int], int] = {}
    edges = set()
    finals = set()
    start = (a.start, b.start)
    index[start] = 0
    todo = [start]
    while todo:
        p, q = cur = todo.pop()
        i = index[cur]
        if p in a.finals and q in b.finals:
            finals.add(i)
        for sym, p2 in a.out.get(p, ()):
            for sym2, q2 in b.out.get(q, ()):
                if sym != sym2:
                    continue
                nxt = (p2, q2)
                if nxt not in index:
                    index[nxt] = len(index)
                    todo.append(nxt)
                edges.add((i, sym, index[nxt]))
    return trim(Nfa(len(index), 0, frozenset(finals), frozenset(edges)))


def intersects(a: Nfa, b: Nfa) -> bool:
    return not intersect(a, b).is_empty()


def exact_or_diverging(alpha: Path) -> Nfa:
    """Forward words that are neither proper prefixes nor proper
    extensions of ``alpha``."""
    n = len(alpha)
    div, ext = n + 1, n + 2
    edges = set()
    for k in range(n):
        for s in (pa.CAR, pa.CDR):
            edges.add((k, s, k + 1 if s == alpha[k] else div))
    for s in (pa.CAR, pa.CDR):
        edges.add((n, s, ext))
        edges.add((div, s, div))
        edges.add((ext, s, ext))
    return Nfa(n + 3, 0, frozenset({n, div}), frozenset(edges))


def avoids_prefixes(nfa: Nfa, cut: Nfa) -> bool:
    """True when some word of ``nfa`` has no prefix (including the empty
    one) in L(cut)."""
    nfa = remove_eps(nfa)
    cstart = cut.initial()
    if cstart & cut.finals:
        return False
    seen = {(nfa.start, cstart)}
    todo = [(nfa.start, cstart)]
    while todo:
        q, cs = todo.pop()
        if q in nfa.finals:
            return True
        for sym, q2 in nfa.out.get(q, ()):
            cs2 = cut.step(cs, sym)
            if cs2 & cut.finals:
                continue
            key = (q2, cs2)
            if key not in seen:
                seen.add(key)
                todo.append(key)
    return False
