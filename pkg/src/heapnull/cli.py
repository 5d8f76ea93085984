"""Command line driver: parse, analyze, transform, run, trace, check, report."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import langsolve as ls
from . import pathalg as pa
from . import runtime as rt
from .avail import avail_envs
from .nullify import Analyses, plan, transform
from .syntax import (Const, Expr, Let, ParseError, ScopedProgram, ScopeError, Var, load,
                     render, render_expr)

SCHEMA = "heapnull.report/1"


class UsageError(Exception):
    pass


def _read(path: str) -> tuple[str, ScopedProgram]:
    if path == "-":
        src = sys.stdin.read()
    else:
        try:
            src = Path(path).read_text()
        except OSError as err:
            raise UsageError(f"cannot read {path}: {err.strerror}") from err
    return src, load(src)


def _point(sp: ScopedProgram, ref: str | None) -> int | None:
    if ref is None:
        return None
    try:
        return sp.point(ref)
    except KeyError as err:
        raise UsageError(err.args[0]) from err


def _word(p: tuple) -> str:
    return "ε" if not p else pa.fmt(p)


def _snippet(e: Expr, width: int = 48) -> str:
    text = " ".join(render_expr(e).split())
    return text if len(text) <= width else text[: width - 3] + "..."


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _emit(text: str, target: str | None) -> None:
    if target:
        Path(target).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# reports


def ast_json(e: Expr) -> dict:
    node = {"kind": type(e).__name__, "point": e.point}
    if e.label:
        node["label"] = e.label
    if isinstance(e, Const):
        node["value"] = e.value
    elif isinstance(e, Var):
        node["name"] = e.name
    elif isinstance(e, Let):
        node["var"] = e.var
    elif hasattr(e, "fn"):
        node["fn"] = e.fn
    kids = e.children()
    if kids:
        node["children"] = [ast_json(c) for c in kids]
    return node


def analysis_report(sp: ScopedProgram, an: Analyses, words: int = 3,
                    points: list[int] | None = None) -> dict:
    """Per-point liveness, availability and sharing plus the plan."""
    summaries = {}
    for (fn, i), (u, d) in sorted(an.live.summaries.parts.items()):
        summaries[f"{fn}:{i}"] = {"U": ls.fmt_term(u), "D": ls.fmt_term(d)}
    sharing_summ = {f"{d.name}:{i}": ls.fmt_term(an.share.summary_term(d.name, i))
                    for d in sp.program.defs for i in range(1, len(d.params) + 1)}
    literal = avail_envs(sp)
    rows = []
    wanted = set(points) if points else None
    for pt in sorted(sp.nodes):
        if wanted is not None and pt not in wanted:
            continue
        e = sp.nodes[pt]
        vis = sorted(sp.visible[pt])
        row = {"point": pt, "label": e.label, "kind": type(e).__name__,
               "source": _snippet(e), "visible": vis, "liveness": {},
               "availability": {x: pa.fmt_set(ps) for x, ps in
                                sorted(literal.env.get(pt, {}).items())},
               "strict_availability": {x: pa.fmt_set(ps) for x, ps in
                                       sorted(an.avail.env.get(pt, {}).items())}}
        for x in vis:
            nfa = an.live.nfa(pt, x)
            if not nfa.is_empty():
                row["liveness"][x] = [pa.fmt(w) for w in ls.enumerate_words(nfa, words)]
        if wanted is not None or e.label:
            share = {}
            for i, x in enumerate(vis):
                for y in vis[i:]:
                    nfa = an.share.nfa(pt, x, y)
                    if not nfa.is_empty():
                        share[f"{x},{y}"] = [pa.fmt(w) for w in ls.enumerate_words(nfa, words)]
            row["sharing"] = share
        rows.append(row)
    return {"schema": SCHEMA, "liveness_summaries": summaries,
            "sharing_summaries": sharing_summ, "points": rows,
            "plan": plan(sp, an).to_json()}


def _write_dots(sp: ScopedProgram, an: Analyses, pt: int | None, var: str | None,
                out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    pts = [pt] if pt is not None else sorted(p for p, e in sp.nodes.items() if e.label)
    written = []
    for p in pts:
        for x in sorted(sp.visible[p]):
            if var and x != var:
                continue
            f = out / f"live_{p}_{x}.dot"
            f.write_text(an.live.nfa(p, x).to_dot(f"live_{p}_{x}"))
            written.append(f)
    return written


def reach_rows(name: str, sp: ScopedProgram) -> list[dict]:
    """Reachable cells per point, original against transformed."""
    q = transform(sp)
    stats = rt.reach_stats(sp, q)
    rows = []
    for pt in sorted(stats):
        pairs = stats[pt]
        rows.append({"program": name, "point": pt, "label": sp.nodes[pt].label or "",
                     "visits": len(pairs),
                     "original": sum(a for a, _ in pairs),
                     "transformed": sum(b for _, b in pairs),
                     "first_original": pairs[0][0], "first_transformed": pairs[0][1]})
    return rows


def plot_reach(rows: list[dict], path: Path, title: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    programs = sorted({r["program"] for r in rows}, key=lambda s: (len(s), s))
    fig, ax = plt.subplots(figsize=(8, 3.6))
    if len(programs) == 1:
        xs = list(range(len(rows)))
        ax.bar([x - 0.2 for x in xs], [r["first_original"] for r in rows], 0.4,
               label="original", color="0.6")
        ax.bar([x + 0.2 for x in xs], [r["first_transformed"] for r in rows], 0.4,
               label="transformed", color="C0")
        ax.set_xticks(xs)
        ax.set_xticklabels([r["label"] or str(r["point"]) for r in rows],
                           rotation=90, fontsize=6)
        ax.set_xlabel("program point")
        ax.set_ylabel("reachable cells (first visit)")
    else:
        tot = {p: [0, 0] for p in programs}
        for r in rows:
            tot[r["program"]][0] += r["original"]
            tot[r["program"]][1] += r["transformed"]
        xs = list(range(len(programs)))
        saved = [1 - tot[p][1] / tot[p][0] if tot[p][0] else 0.0 for p in programs]
        ax.bar(xs, saved, color="C0")
        ax.set_xlabel("program")
        ax.set_ylabel("fraction of reachable cell-visits removed")
        ax.set_ylim(0, 1)
    ax.set_title(title, fontsize=9)
    if len(programs) == 1:
        ax.legend(frameon=False, fontsize=7)
    for side in ("top", "right"):
        ax.spines[side].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---------------------------------------------------------------------------
# subcommands


def cmd_parse(args) -> int:
    src, sp = _read(args.file)
    if args.json:
        tree = {"defs": [{"name": d.name, "params": d.params, "body": ast_json(d.body)}
                         for d in sp.program.defs],
                "body": ast_json(sp.program.body)}
        Path(args.json).write_text(_dump(tree))
    sys.stdout.write(render(sp.program))
    sys.stdout.write("\n")
    for pt in sorted(sp.nodes):
        e = sp.nodes[pt]
        lab = f"{e.label}:" if e.label else ""
        sys.stdout.write(f"{pt:4d} {lab:6s} {_snippet(e)}\n")
    return 0


def cmd_analyze(args) -> int:
    _, sp = _read(args.file)
    an = Analyses.of(sp)
    pt = _point(sp, args.point)
    if args.var is not None and pt is None:
        raise UsageError("--var needs --point")
    if args.var is not None and args.var not in sp.visible[pt]:
        raise UsageError(f"{args.var} is not in scope at point {pt}")
    if args.dot:
        _write_dots(sp, an, pt, args.var, Path(args.dot))
    if args.var is not None:
        words = ls.enumerate_words(an.live.nfa(pt, args.var), args.words)
        sys.stdout.write(",".join(_word(w) for w in words) + "\n")
        if args.json:
            Path(args.json).write_text(_dump(
                {"schema": SCHEMA, "point": pt, "var": args.var,
                 "words": [pa.fmt(w) for w in words]}))
        return 0
    rep = analysis_report(sp, an, args.words, [pt] if pt is not None else None)
    _emit(_dump(rep), args.json)
    return 0


def cmd_transform(args) -> int:
    _, sp = _read(args.file)
    an = Analyses.of(sp)
    only = _point(sp, args.point)
    p = plan(sp, an, only=only)
    if args.plan:
        Path(args.plan).write_text(_dump(p.to_json()))
    sys.stdout.write(render(transform(sp, p)))
    return 0


def cmd_run(args) -> int:
    _, sp = _read(args.file)
    r = rt.evaluate(sp, budget=args.budget)
    sys.stdout.write(r.show() + "\n")
    if args.json:
        Path(args.json).write_text(rt.trace_json(r) + "\n")
    return 0


def cmd_trace(args) -> int:
    _, sp = _read(args.file)
    r = rt.evaluate(sp, budget=args.budget)
    pt = _point(sp, args.point)
    tr = rt.trace_derefs(r)
    doc = r.to_json()
    doc["after_point"] = {str(k): sorted(rt.edge_name(e) for e in v)
                          for k, v in sorted(tr.items()) if pt is None or k == pt}
    if args.dot:
        if pt is None:
            raise UsageError("--dot needs --point for a memory graph")
        visits = r.visits_of(pt)
        if not visits:
            raise UsageError(f"point {pt} is never reached")
        out = Path(args.dot)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"heap_{pt}.dot").write_text(rt.memory_dot(r, visits[0], f"heap_{pt}"))
    _emit(_dump(doc), args.json)
    return 0


def _corpus(args) -> list[tuple[str, str]]:
    items = []
    for f in args.files:
        items.append((f, _read(f)[0]))
    if args.seeds:
        items += [(f"seed{s}", rt.gen_program(s)) for s in range(args.seeds)]
    if not items:
        raise UsageError("give program files or --seeds N")
    return items


def check_program(src: str) -> tuple[rt.Violations, dict]:
    """All dynamic oracles on one program."""
    sp = load(src)
    an = Analyses.of(sp)
    out = rt.Violations()
    run = rt.evaluate(sp)
    counts = {
        "liveness": rt.check_liveness(sp, an.live, run, out),
        "sharing": rt.check_sharing(sp, an.share, run, out),
        "availability": rt.check_avail(sp, avail_envs(sp), run, out, strict=False),
        "strict_availability": rt.check_avail(sp, an.avail, run, out, strict=True),
    }
    rt.check_transform(sp, transform(sp, plan(sp, an)), out)
    return out, counts


def cmd_check(args) -> int:
    failed = 0
    rows = []
    for name, src in _corpus(args):
        out, counts = check_program(src)
        rows.append({"program": name, "violations": out.items, "checked": counts})
        status = "ok" if not out else "FAIL"
        sys.stdout.write(f"{name}: {status} " + " ".join(f"{k}={v}" for k, v in counts.items())
                         + "\n")
        for item in out.items[:10]:
            sys.stdout.write(f"  {item}\n")
        failed += bool(out)
    if args.json:
        Path(args.json).write_text(_dump({"schema": SCHEMA, "programs": rows}))
    sys.stdout.write(f"{len(rows) - failed}/{len(rows)} programs passed\n")
    return 1 if failed else 0


def cmd_report(args) -> int:
    rows = []
    for name, src in _corpus(args):
        rows += reach_rows(name, load(src))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fields = ["program", "point", "label", "visits", "original", "transformed",
              "first_original", "first_transformed"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    (out / "reach.csv").write_text(buf.getvalue())
    (out / "reach.json").write_text(_dump({"schema": SCHEMA, "rows": rows}))
    plot_reach(rows, out / "reach.png", "reachable cells before and after nullification")
    orig = sum(r["original"] for r in rows)
    new = sum(r["transformed"] for r in rows)
    sys.stdout.write(f"{'program':>10} {'point':>5} {'label':>5} {'orig':>6} {'new':>6}\n")
    for r in rows:
        sys.stdout.write(f"{r['program']:>10} {r['point']:>5} {r['label']:>5} "
                         f"{r['original']:>6} {r['transformed']:>6}\n")
    sys.stdout.write(f"total reachable cell-visits {orig} -> {new}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heapnull",
                                 description="Liveness based nullification of heap links.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("parse", help="print the program with its numbered points")
    p.add_argument("file")
    p.add_argument("--json", help="write the syntax tree as JSON")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("analyze", help="liveness, sharing and availability report")
    p.add_argument("file")
    p.add_argument("--point", help="point index or label")
    p.add_argument("--var", help="print the live words of one variable at --point")
    p.add_argument("--words", type=int, default=3, help="enumerate words up to this length")
    p.add_argument("--dot", help="directory for liveness automata")
    p.add_argument("--json", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("transform", help="insert nil assignments")
    p.add_argument("file")
    p.add_argument("--plan", help="write the plan as JSON")
    p.add_argument("--point", help="plan this point alone, ignoring earlier cuts")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("run", help="evaluate a program")
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=rt.STEP_BUDGET)
    p.add_argument("--json", help="write the run trace as JSON")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("trace", help="dereference trace as JSON")
    p.add_argument("file")
    p.add_argument("--point", help="restrict the per-point sets to this point")
    p.add_argument("--budget", type=int, default=rt.STEP_BUDGET)
    p.add_argument("--dot", help="directory for the memory graph at --point")
    p.add_argument("--json", help="write the trace here instead of stdout")
    p.set_defaults(func=cmd_trace)

    for name, func, helptext in (("check", cmd_check, "dynamic soundness oracles"),
                                 ("report", cmd_report, "reachability comparison")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("files", nargs="*")
        p.add_argument("--seeds", type=int, default=0, help="add generated programs 0..N-1")
        if name == "check":
            p.add_argument("--json", help="write the results as JSON")
        else:
            p.add_argument("--out", default="report", help="directory for CSV, JSON and PNG")
        p.set_defaults(func=func)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as err:
        sys.stderr.write(f"heapnull: {err}\n")
        return 2
    except (ParseError, ScopeError) as err:
        sys.stderr.write(f"heapnull: {err}\n")
        return 1
    except rt.RuntimeFault as err:
        sys.stderr.write(f"heapnull: runtime error: {err}\n")
        return 1
    except (ls.DecomposeError, ValueError, RuntimeError) as err:
        sys.stderr.write(f"heapnull: internal error: {err}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
