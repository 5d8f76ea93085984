import itertools
import re

from heapnull import FIG1_SOURCE, annotate, live_summaries, load
from heapnull import langsolve as ls
from heapnull.langsolve import EPS_LANG, SIGMA
from heapnull.liveness import PGM, le, lp
from heapnull.pathalg import BAR0, BAR1, CAR, CDR
from heapnull.syntax import Const, Var


def _agrees(nfa, regex, max_len=8):
    for k in range(max_len + 1):
        for w in itertools.product((CAR, CDR), repeat=k):
            text = "".join(map(str, w))
            if bool(re.fullmatch(regex, text)) != ls.accepts(nfa, w):
                return False
    return True


def test_lp_table():
    assert lp("car", 1, EPS_LANG) == {(), (CAR,)}
    # 0~ 1 is undefined, so nothing reaches the argument
    assert lp("cons", 1, frozenset({(CDR,)})) == ls.EMPTY
    assert lp("cons", 1, frozenset({(CAR, CDR)})) == {(CDR,)}
    assert lp("prim", 2, frozenset({(CAR, CDR)})) == {()}
    assert lp("null?", 1, ls.EMPTY) == {()}


def test_le_var_and_const():
    s = frozenset({(CAR,)})
    assert le(Var("v"), s, {}) == {"v": s}
    env = {"u": EPS_LANG}
    assert le(Const(5), s, env) == env


def test_le_append_body_symbolic():
    sp = load(FIG1_SOURCE)
    body = sp.program.fn("append").body
    env = le(body, frozenset({(SIGMA,)}), {})
    lst1 = env["lst1"]
    assert () in lst1 and (CAR, BAR0, SIGMA) in lst1
    assert any(len(a) == 2 and a[0] == CDR and getattr(a[1], "key", None) == ("append", 1)
               for a in lst1)
    assert (SIGMA,) in env["lst2"]


def test_append_summaries():
    s = live_summaries(load(FIG1_SOURCE))
    u1, d1 = s.parts[("append", 1)]
    u2, d2 = s.parts[("append", 2)]
    assert u1 == {(), (CDR, "U:append:1")}
    assert d1 == {(CAR, BAR0), (CDR, "D:append:1", BAR1)}
    assert u2 == {("U:append:2",)}
    assert d2 == {(), ("D:append:2", BAR1)}
    assert s.grammar.is_empty("U:append:2")


def test_identity_and_unused_summaries():
    s = live_summaries(load("(define (id x) x) (id 1)"))
    assert s.parts[("id", 1)] == (set(), {()})
    s = live_summaries(load("(define (k x y) x) (k 1 2)"))
    assert s.parts[("k", 2)] == (set(), set())


def test_pgm_and_w_productions(fig1):
    lv = annotate(fig1)
    assert lv.grammar.alts(PGM) == {(), (CAR, PGM), (CDR, PGM)}
    assert lv.term(fig1.point("pb"), "w") == {(), (CDR,), (CDR, CAR), (CDR, CAR, CAR, PGM)}


def test_w_live_at_pb(fig1):
    lv = annotate(fig1)
    assert _agrees(lv.nfa(fig1.point("pb"), "w"), r"|1|10|100[01]*")
    assert lv.is_live(fig1.point("pb"), "w", (CDR, CAR, CAR, CDR, CDR))
    assert not lv.is_live(fig1.point("pb"), "y", ())


def test_y_live_at_pa(fig1):
    # the selector (car lst1) on every cell of the spine also makes 1*0 live
    lv = annotate(fig1)
    assert _agrees(lv.nfa(fig1.point("pa"), "y"), r"1*|1*0|1*00[01]*")


def test_z_live_at_pa(fig1):
    lv = annotate(fig1)
    assert _agrees(lv.nfa(fig1.point("pa"), "z"), r"|1|10|100[01]*|0|00[01]*")


def test_car_of_cons_result():
    s = ls.nt(PGM)
    assert lp("car", 1, s) == {(), (CAR, PGM)}


def _outside_arguments(sp):
    from heapnull.syntax import Call, Cons, Prim, walk
    inside = set()
    for _, root in sp.program.roots():
        for e in walk(root):
            if isinstance(e, (Cons, Prim, Call)):
                for c in e.children():
                    inside |= {x.point for x in walk(c)}
    return [pt for pt in sp.nodes if pt not in inside]


def test_evaluation_order_invariance(fig1):
    a, b = annotate(fig1, "rtl"), annotate(fig1, "ltr")
    points = _outside_arguments(fig1)
    assert fig1.point("pa") in points and fig1.point("pb") in points
    for pt in points:
        for v in fig1.visible[pt]:
            na, nb = a.nfa(pt, v), b.nfa(pt, v)
            assert set(ls.enumerate_words(na, 6)) == set(ls.enumerate_words(nb, 6))
