"""The eight acceptance criteria, each with its time limit.  A summary line
per criterion is printed at the end of the session."""

import itertools
import random
import re
import time
from pathlib import Path

import pytest
from oracles import (FIG1_CUT, cancel_relation, edge_of, has_preimage, random_nfa, record,
                     sample_word)

from heapnull import (FIG1_SOURCE, analyze, annotate, avail_envs, evaluate, gen_program,
                      live_summaries, load, plan, reach_stats, transform)
from heapnull import langsolve as ls
from heapnull import pathalg as pa
from heapnull import runtime as rt
from heapnull.nullify import Analyses
from heapnull.pathalg import BAR0, BAR1, BOTTOM, CAR, CDR

PROGRAMS = Path(__file__).parent.parent / "programs"


def _mismatches(nfa, regex, max_len=8):
    bad = []
    for k in range(max_len + 1):
        for w in itertools.product((CAR, CDR), repeat=k):
            text = "".join(map(str, w))
            if bool(re.fullmatch(regex, text)) != ls.accepts(nfa, w):
                bad.append(text or "e")
    return bad


# 1 -------------------------------------------------------------------------

def test_c1_append_summaries():
    t = time.perf_counter()
    s = live_summaries(load(FIG1_SOURCE))
    got = {k: (set(u), set(d)) for k, (u, d) in s.parts.items()}
    want = {
        ("append", 1): ({(), (CDR, "U:append:1")}, {(CAR, BAR0), (CDR, "D:append:1", BAR1)}),
        ("append", 2): ({("U:append:2",)}, {(), ("D:append:2", BAR1)}),
    }
    empty_u2 = s.grammar.is_empty("U:append:2")
    secs = time.perf_counter() - t
    ok = got == want and empty_u2 and secs < 1
    record(1, ok, secs)
    assert got == want and empty_u2
    assert secs < 1


# 2 -------------------------------------------------------------------------

GOLDEN = {
    ("pb", "w"): r"|1|10|100[01]*",
    ("pa", "y"): r"1*|1*00[01]*",
    ("pa", "z"): r"|1|10|100[01]*|0|00[01]*",
}


def _golden():
    t = time.perf_counter()
    sp = load(FIG1_SOURCE)
    lv = annotate(sp)
    bad = {key: _mismatches(lv.nfa(sp.point(key[0]), key[1]), rx) for key, rx in GOLDEN.items()}
    return bad, time.perf_counter() - t, lv, sp


def test_c2_golden_automata_w_and_z():
    bad, secs, _, _ = _golden()
    assert bad[("pb", "w")] == [] and bad[("pa", "z")] == []
    assert secs < 1


@pytest.mark.xfail(strict=True, reason="the published y automaton omits the live links 1*0")
def test_c2_golden_automaton_y_as_published():
    bad, secs, _, _ = _golden()
    failing = {f"{v}@{p}": ws for (p, v), ws in bad.items() if ws}
    detail = "; ".join(f"{k} differs on {len(ws)} words e.g. {', '.join(ws[:3])}"
                       for k, ws in failing.items())
    record(2, not failing and secs < 1, secs, detail)
    assert not failing


def test_c2_y_live_language():
    bad, secs, lv, sp = _golden()
    # (car lst1) on each spine cell reads the 0 link, so 1*0 is live too
    assert _mismatches(lv.nfa(sp.point("pa"), "y"), r"1*|1*0|1*00[01]*") == []
    assert set(bad[("pa", "y")]) == {"1" * k + "0" for k in range(8)}


# 3 -------------------------------------------------------------------------

def test_c3_theorem_properties():
    t = time.perf_counter()
    rng = random.Random(2024)
    part1 = part2 = 0
    failures = []
    for i in range(500):
        nfa = random_nfa(rng, 8)
        simple = ls.simplify(nfa)
        with_bars = ls.simplify(nfa, keep_barred=True)
        for _ in range(200):
            w = sample_word(rng, nfa)
            if w is None:
                continue
            beta = pa.reduce(w)
            if beta is BOTTOM:
                continue
            # forward reducts land in the forward automaton, bipaths in
            # the one that keeps its backward edges
            target = simple if pa.is_forward(beta) else with_bars
            part1 += 1
            if not target.accepts_word(beta):
                failures.append(("part 1", i, w))
        rel = cancel_relation(nfa)
        for beta in ls.enumerate_words(simple, 5):
            part2 += 1
            if not has_preimage(nfa, beta, rel):
                failures.append(("part 2", i, beta))
    secs = time.perf_counter() - t
    record(3, not failures and secs < 60, secs,
           f"{part1} sampled words, {part2} bounded words")
    assert not failures, failures[:5]
    assert secs < 60


# 4 -------------------------------------------------------------------------

_RULES = {(BAR0, CAR): (), (BAR1, CDR): (), (BAR0, CDR): None, (BAR1, CAR): None}


def _reduce_randomly(p, rng):
    p = list(p)
    while True:
        spots = [i for i in range(len(p) - 1) if (p[i], p[i + 1]) in _RULES]
        if not spots:
            return tuple(p)
        i = rng.choice(spots)
        if _RULES[(p[i], p[i + 1])] is None:
            return BOTTOM
        del p[i:i + 2]


def test_c4_path_algebra():
    t = time.perf_counter()
    rng = random.Random(4)
    for _ in range(10_000):
        p = tuple(rng.choice(pa.ALPHABET) for _ in range(rng.randrange(13)))
        r = pa.reduce(p)
        assert r == _reduce_randomly(p, rng)
        assert r is BOTTOM or pa.is_canonical(r)
        if r is not BOTTOM:
            k = next((i for i, s in enumerate(r) if s >= 2), len(r))
            assert all(s < 2 for s in r[:k]) and all(s >= 2 for s in r[k:])
            assert pa.reduce(r) == r
        assert pa.reverse(pa.reverse(p)) == p
    secs = time.perf_counter() - t
    record(4, secs < 5, secs, "10000 random paths")
    assert secs < 5


# 5 -------------------------------------------------------------------------

def test_c5_fig1_end_to_end():
    t = time.perf_counter()
    sp = load(FIG1_SOURCE)
    an = Analyses.of(sp)
    pb = sp.point("pb")
    orig = evaluate(sp)
    visit = orig.visits_of(pb)[0]
    expected = {edge_of(orig, visit, v, p) for v, p in FIG1_CUT}
    isolated = transform(sp, plan(sp, an, only=pb))
    run = evaluate(isolated)
    cut = {e for e, pt, _ in run.nullified if pt == pb}
    full = evaluate(transform(sp, plan(sp, an)))
    (before, after), = reach_stats(sp, isolated)[pb]
    secs = time.perf_counter() - t
    ok = (cut == expected and run.show() == "4" and full.show() == "4"
          and before - after >= 3 and secs < 1)
    record(5, ok, secs, f"reachable cells at pb {before} -> {after}")
    assert cut == expected
    assert run.show() == "4" and full.show() == "4"
    assert before - after >= 3
    assert secs < 1


# 6 -------------------------------------------------------------------------

def test_c6_dynamic_soundness_corpus():
    t = time.perf_counter()
    problems = []
    cuts = 0
    for seed in range(100):
        sp = load(gen_program(seed))
        an = Analyses.of(sp)
        out = rt.Violations()
        run = rt.evaluate(sp)
        rt.check_liveness(sp, an.live, run, out)
        rt.check_sharing(sp, an.share, run, out)
        rt.check_avail(sp, avail_envs(sp), run, out, strict=False)
        rt.check_avail(sp, an.avail, run, out, strict=True)
        p = plan(sp, an)
        cuts += sum(map(len, p.entries.values()))
        rt.check_transform(sp, transform(sp, p), out)
        problems += [f"seed {seed}: {item}" for item in out.items]
    secs = time.perf_counter() - t
    record(6, not problems and secs < 600, secs, f"100 programs, {cuts} statements inserted")
    assert not problems, problems[:10]
    assert secs < 600


# 7 -------------------------------------------------------------------------

def test_c7_sharing_figure():
    t = time.perf_counter()
    sp = load((PROGRAMS / "sharing.fun").read_text())
    sh = analyze(sp)
    p1, p3 = sp.point("p1"), sp.point("p3")
    entry = sp.program.fn("f").body.point
    checks = [
        sh.shares(p1, "x1", "y1", (CAR,)),
        sh.shares(entry, "v1", "v2", (BAR0,)),
        sh.shares(p3, "y3", "y3", (CAR, BAR1)),
        sh.shares(p3, "y3", "y3", (CDR, BAR0)),
        sh.shares(p3, "x3", "y3", (BAR0,)),
        sh.shares(p3, "x3", "y3", (BAR1,)),
    ]
    secs = time.perf_counter() - t
    record(7, all(checks) and secs < 1, secs)
    assert all(checks)
    assert secs < 1


# 8 -------------------------------------------------------------------------

def test_c8_demand_example():
    t = time.perf_counter()
    sp = load((PROGRAMS / "demand.fun").read_text())
    run = avail_envs(sp)
    got = (run.demand[sp.point("p1")], run.demand[sp.point("p2")])
    secs = time.perf_counter() - t
    ok = got == ({()}, {(), (CDR,)})
    record(8, ok and secs < 1, secs)
    assert ok
    assert secs < 1
