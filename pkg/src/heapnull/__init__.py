"""Liveness based nullification of heap links in a first-order eager
functional language."""

from .avail import avail_envs
from .liveness import annotate, live_summaries
from .nullify import Analyses, candidates, emit, plan, transform
from .runtime import evaluate, gen_program, reach_stats, trace_derefs
from .sharing import analyze
from .syntax import FIG1_SOURCE, load, parse, render, resolve_scopes

__all__ = [
    "Analyses", "FIG1_SOURCE", "analyze", "annotate", "avail_envs", "candidates", "emit",
    "evaluate", "gen_program", "live_summaries", "load", "parse", "plan", "reach_stats",
    "render", "resolve_scopes", "trace_derefs", "transform",
]
