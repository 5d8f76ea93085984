import itertools
import random

import pytest
from oracles import cancel_relation, has_preimage, random_nfa, sample_word

from heapnull import langsolve as ls
from heapnull import pathalg as pa
from heapnull.langsolve import SIGMA, Apply, Grammar
from heapnull.pathalg import BAR0, BAR1, CAR, CDR

S = frozenset({(SIGMA,)})


def test_decompose_append_first_argument():
    # LF1(s) = {e} | {0 0~}.s | {1}.LF1({1~}.s)
    rhs = frozenset({(), (CAR, BAR0, SIGMA), (CDR, Apply(("app", 1), frozenset({(BAR1, SIGMA)})))})
    u, d = ls.decompose({("app", 1): rhs})[("app", 1)]
    assert u == {(), (CDR, "U:app:1")}
    assert d == {(CAR, BAR0), (CDR, "D:app:1", BAR1)}


def test_decompose_append_second_argument():
    rhs = frozenset({(SIGMA,), (Apply(("app", 2), frozenset({(BAR1, SIGMA)})),)})
    u, d = ls.decompose({("app", 2): rhs})[("app", 2)]
    assert u == {("U:app:2",)}
    assert d == {(), ("D:app:2", BAR1)}


def test_decompose_non_recursive():
    assert ls.decompose({("f", 1): frozenset({()})})[("f", 1)] == ({()}, set())


def test_decompose_rejects_inner_sigma():
    with pytest.raises(ls.DecomposeError):
        ls.decompose({("f", 1): frozenset({(SIGMA, CAR)})})


def _words(nfa, n):
    return set(ls.enumerate_words(nfa, n))


def test_approximate_right_linear():
    g = Grammar({"U": {(), (CDR, "U")}})
    nfa = ls.approximate(g, "U")
    assert nfa.n == 1 and nfa.start in nfa.finals
    assert nfa.edges == {(nfa.start, CDR, nfa.start)}


def test_approximate_self_embedding_loses_count():
    g = Grammar({"D": {(CAR, BAR0), (CDR, "D", BAR1)}})
    nfa = ls.approximate(g, "D")
    assert nfa.n == 3
    assert nfa.accepts_word((CDR, CAR, BAR0, BAR1))
    assert nfa.accepts_word((CDR, CDR, CAR, BAR0, BAR1))
    assert not nfa.accepts_word((CAR,))


def test_approximate_pgm():
    g = Grammar({"pgm": {(), (CAR, "pgm"), (CDR, "pgm")}})
    nfa = ls.approximate(g, "pgm")
    assert nfa.n == 1 and len(nfa.edges) == 2
    assert _words(nfa, 1) == {(), (CAR,), (CDR,)}


def test_approximation_is_superset():
    g = Grammar({"A": {(), (CAR, "A", CDR), ("A", "A")}})
    nfa = ls.approximate(g, "A")
    for w in g.derive("A", 6):
        assert nfa.accepts_word(w)


def test_empty_nonterminal():
    g = Grammar({"U": {("U",)}})
    assert g.is_empty("U")
    assert ls.approximate(g, "U").is_empty()


def test_simplify_without_barred_edges_unchanged():
    nfa = ls.from_words([(), (CDR,), (CDR, CAR)])
    assert _words(ls.simplify(nfa), 4) == _words(nfa, 4)


def test_simplify_cancels_pairs():
    nfa = ls.from_words([(BAR1, CDR, CAR), (BAR0, BAR1, CDR, CAR, CDR), (CDR, BAR1, CAR)])
    simple = ls.simplify(nfa)
    assert _words(simple, 4) == {(CAR,), (CDR,)}


def test_simplify_keep_barred_keeps_bipaths():
    nfa = ls.from_words([(CDR, BAR0)])
    assert ls.simplify(nfa).is_empty()
    assert ls.accepts(ls.simplify(nfa, keep_barred=True), (CDR, BAR0))


@pytest.mark.parametrize("seed", range(40))
def test_simplify_matches_reduction_oracle(seed):
    rng = random.Random(seed)
    nfa = random_nfa(rng, 6)
    simple = ls.simplify(nfa)
    rel = cancel_relation(nfa)
    for k in range(5):
        for beta in itertools.product((CAR, CDR), repeat=k):
            assert simple.accepts_word(beta) == has_preimage(nfa, beta, rel)
    for _ in range(30):
        w = sample_word(rng, nfa)
        if w is None:
            continue
        beta = pa.reduce(w)
        if beta is not pa.BOTTOM and pa.is_forward(beta):
            assert simple.accepts_word(beta)


@pytest.mark.parametrize("seed", range(20))
def test_simplify_merging_silent_cycles_keeps_language(seed, monkeypatch):
    rng = random.Random(1000 + seed)
    nfa = random_nfa(rng, 10)
    whole = [ls.simplify(nfa, keep) for keep in (False, True)]
    monkeypatch.setattr(ls, "BYPASS_BUDGET", 0)
    merged = [ls.simplify(nfa, keep) for keep in (False, True)]
    for a, b in zip(whole, merged):
        assert set(ls.enumerate_words(a, 6)) == set(ls.enumerate_words(b, 6))


def test_accepts_rejects_non_canonical():
    with pytest.raises(ValueError):
        ls.accepts(ls.from_words([()]), (BAR0, CAR))


def test_combine():
    a = ls.from_words([(), (CDR,)])
    b = ls.from_words([(CAR,)])
    assert _words(ls.combine("concat", a, b), 3) == {(CAR,), (CDR, CAR)}
    assert _words(ls.combine("reverse", ls.from_words([(CAR, CDR)])), 3) == {(BAR1, BAR0)}
    assert _words(ls.combine("union", a, b), 3) == {(), (CDR,), (CAR,)}


def test_enumerate():
    assert ls.enumerate_words(ls.EMPTY_NFA, 3) == []
    y = ls.union_nfa(ls.from_words([()]), ls.concat_nfa(
        ls.from_words([(CAR, CAR)]), ls.approximate(Grammar({"p": {(), (CAR, "p"), (CDR, "p")}}), "p")))
    loop = ls.approximate(Grammar({"o": {(), (CDR, "o")}}), "o")
    y = ls.union_nfa(loop, ls.concat_nfa(loop, y))
    assert set(ls.enumerate_words(y, 2)) == {(), (CDR,), (CDR, CDR), (CAR, CAR)}


def test_term_algebra_reduces():
    assert ls.cat(ls.lit([(CAR,)]), ls.lit([(BAR0,)])) == ls.lit([(CAR, BAR0)])
    assert ls.cat(ls.lit([(BAR0,)]), ls.lit([(CAR,)])) == ls.lit([()])
    assert ls.cat(ls.lit([(BAR0,)]), ls.lit([(CDR,)])) == ls.EMPTY
    assert ls.rev(ls.lit([(CAR, CDR)])) == ls.lit([(BAR1, BAR0)])


def test_solver_admits_late_reversals():
    g = Grammar({"A": {(CAR,), (CDR, "A")}})
    solver = ls.Solver(g)
    rev = solver.term_nfa(ls.rev(ls.nt("A")))
    assert rev.accepts_word((BAR0, BAR1))
    assert not rev.is_empty()


def test_intersects():
    a = ls.from_words([(CAR,), (CDR,)])
    assert ls.intersects(a, ls.from_words([(CDR,)]))
    assert not ls.intersects(a, ls.from_words([(CDR, CDR)]))
