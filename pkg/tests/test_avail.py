from pathlib import Path

from oracles import COND_EXAMPLE

from heapnull import FIG1_SOURCE, avail_envs, load
from heapnull.avail import EMPTY, EPS, abp, ae, ap
from heapnull.pathalg import BAR0, CAR, CDR
from heapnull.syntax import Const

PROGRAMS = Path(__file__).parent.parent / "programs"


def test_ap_table():
    assert ap("car", 1, EPS) == {(), (CAR,)}
    assert ap("null?", 1, EPS) == EMPTY
    # 0~ 0 reduces to the empty path
    assert ap("cons", 1, frozenset({(CAR,)})) == {()}


def test_abp_table():
    assert abp("cons", 1, EPS) == {(), (CAR,)}
    assert abp("car", 1, EPS) == {(BAR0,)}
    assert abp("prim", 2, EPS) == EMPTY


def test_constant():
    a = {"u": EPS}
    assert ae(Const(7), EPS, a) == (EPS, a)
    assert ae(Const(7), EPS, a, strict=True) == (EMPTY, a)


def test_demand_example():
    sp = load((PROGRAMS / "demand.fun").read_text())
    run = avail_envs(sp)
    assert run.demand[sp.point("p1")] == {()}
    assert run.demand[sp.point("p2")] == {(), (CDR,)}


def test_conditional_cell_available_only_after_use():
    sp = load(COND_EXAMPLE)
    for strict in (False, True):
        env = avail_envs(sp, strict).env
        assert "x" not in env[sp.point("p")]
        assert "x" not in env[sp.point("p1")]
        assert () in env[sp.point("p2")]["x"]


def test_fig1_at_pb():
    sp = load(FIG1_SOURCE)
    env = avail_envs(sp, strict=True).env[sp.point("pb")]
    assert set(env) == {"w", "y", "z"}
    assert env["y"] == {()}
    assert env["z"] == {(), (CAR,), (CDR,), (CAR, CDR)}
    assert env["w"] == {(), (CDR,), (CDR, CAR)}


def test_function_entry_empty():
    sp = load("(define (h a b) (cons a b)) (h 1 nil)")
    body = sp.program.fn("h").body
    env = avail_envs(sp).env
    assert env[body.left.point] == {} and env[body.point] == {}


def test_let_of_cons():
    sp = load("(let v <- (cons 1 (cons 2 nil)) in p: v)")
    env = avail_envs(sp).env[sp.point("p")]
    assert env["v"] == {(), (CAR,), (CDR,), (CDR, CAR)}
    strict = avail_envs(sp, strict=True).env[sp.point("p")]
    assert strict["v"] == {(), (CDR,)}
