"""Independent reference implementations used by the tests."""

import random

from heapnull import langsolve as ls
from heapnull import pathalg as pa


def random_nfa(rng: random.Random, max_states: int = 8) -> ls.Nfa:
    """A random trimmed, non-empty NFA over the four path symbols."""
    while True:
        n = rng.randint(1, max_states)
        edges = set()
        for _ in range(rng.randint(n, 3 * n)):
            edges.add((rng.randrange(n), rng.choice(pa.ALPHABET), rng.randrange(n)))
        finals = frozenset(rng.sample(range(n), rng.randint(1, n)))
        nfa = ls.trim(ls.Nfa(n, 0, finals, frozenset(edges)))
        if not nfa.is_empty():
            return nfa


def sample_word(rng: random.Random, nfa: ls.Nfa, max_len: int = 30):
    """A random accepted word, found by a walk that only visits live states."""
    out = nfa.out
    for _ in range(50):
        q, word = nfa.start, []
        for _ in range(max_len):
            if q in nfa.finals and rng.random() < 0.25:
                return tuple(word)
            moves = out.get(q, [])
            if not moves:
                break
            a, q = rng.choice(moves)
            word.append(a)
        if q in nfa.finals:
            return tuple(word)
    return None


def cancel_relation(nfa: ls.Nfa) -> set:
    """Pairs (p, q) joined by a word that reduces to the empty path.

    Such words follow D -> e | D D | 0~ D 0 | 1~ D 1, so the relation is a
    CFL-reachability fixpoint computed directly on the automaton."""
    edges = [(s, a, t) for s, a, t in nfa.edges]
    rel = {(q, q) for q in range(nfa.n)}
    changed = True
    while changed:
        changed = False
        new = set()
        for p, a, p1 in edges:
            if a not in (pa.BAR0, pa.BAR1):
                continue
            for q1, b, q in edges:
                if b == a - 2 and (p1, q1) in rel:
                    new.add((p, q))
        for p, q in list(rel):
            for q2, r in list(rel):
                if q == q2:
                    new.add((p, r))
        if not new <= rel:
            rel |= new
            changed = True
    return rel


def has_preimage(nfa: ls.Nfa, beta, rel: set) -> bool:
    """Some accepted word reduces to the canonical path ``beta``."""
    cur = {q for p, q in rel if p == nfa.start}
    for a in beta:
        step = {t for s, b, t in nfa.edges if b == a and s in cur}
        cur = {q for p, q in rel if p in step}
    return bool(cur & nfa.finals)


def edge_of(run, visit, var: str, path) -> tuple:
    """Identity of the last link of ``var.path`` in the heap of ``run``."""
    from heapnull.runtime import Ref
    if not path:
        return ("r", visit.locs[var])
    val = visit.vals[var]
    for s in path[:-1]:
        assert isinstance(val, Ref), f"{var}.{path} leaves the heap"
        val = run.heap[val.cell][s]
    assert isinstance(val, Ref)
    return ("s", val.cell, path[-1])


# the links crossed out in the memory graph of the running example at pb
FIG1_CUT = [("y", ()), ("z", ()), ("w", (0,)), ("w", (1, 1)), ("z", (0, 1))]
FIG1_LIVE = [("w", ()), ("w", (1,)), ("w", (1, 0)), ("w", (1, 0, 0))]


# a conditionally built cell that is only dereferenced on one branch
COND_EXAMPLE = """(define (g y z w)
  (let x <- (if (prim y 5) (cons 2 z) nil) in
    p: (if (prim y 5) p1: w p2: (cdr x))))
(g 7 (cons 1 nil) (cons 3 nil))"""


def reference_eval(program, e=None, env=None):
    """A direct evaluator over Python pairs, without heap bookkeeping."""
    from heapnull import syntax as s
    if e is None:
        return reference_eval(program, program.body, {})
    if isinstance(e, s.Const):
        return e.value
    if isinstance(e, s.Nil):
        return None
    if isinstance(e, s.Var):
        return env[e.name]
    if isinstance(e, (s.Car, s.Cdr, s.NullQ, s.PairQ)):
        v = reference_eval(program, e.arg, env)
        if isinstance(e, s.NullQ):
            return v is None
        if isinstance(e, s.PairQ):
            return isinstance(v, list)
        return v[0 if isinstance(e, s.Car) else 1]
    if isinstance(e, (s.Cons, s.Prim)):
        a, b = reference_eval(program, e.left, env), reference_eval(program, e.right, env)
        return [a, b] if isinstance(e, s.Cons) else a + b
    if isinstance(e, s.If):
        c = reference_eval(program, e.cond, env)
        return reference_eval(program, e.then if c is not False and c is not None else e.other, env)
    if isinstance(e, s.Let):
        inner = dict(env)
        inner[e.var] = reference_eval(program, e.init, env)
        return reference_eval(program, e.body, inner)
    if isinstance(e, s.Call):
        d = program.fn(e.fn)
        args = [reference_eval(program, a, env) for a in e.args]
        return reference_eval(program, d.body, dict(zip(d.params, args)))
    raise TypeError(type(e).__name__)


def show_ref(v) -> str:
    if v is None:
        return "nil"
    if isinstance(v, bool):
        return "#t" if v else "#f"
    if not isinstance(v, list):
        return str(v)
    items = []
    while isinstance(v, list):
        items.append(show_ref(v[0]))
        v = v[1]
    tail = "" if v is None else " . " + show_ref(v)
    return "(" + " ".join(items) + tail + ")"


# criterion number -> (passed, seconds, detail), printed at the end of the run
ACCEPTANCE: dict = {}


def record(n: int, ok: bool, seconds: float, detail: str = "") -> None:
    ACCEPTANCE[n] = (ok, seconds, detail)
