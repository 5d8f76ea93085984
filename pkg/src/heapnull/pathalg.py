"""Traversal paths over the four-letter alphabet {0, 1, 0~, 1~}.

A path is a tuple of small ints.  ``0`` and ``1`` are forward traversals of
car and cdr edges, ``BAR0`` and ``BAR1`` the corresponding backward
traversals.  The absorbing undefined path is the singleton ``BOTTOM``.
"""

from __future__ import annotations

from typing import Iterable, Union

CAR = 0
CDR = 1
BAR0 = 2
BAR1 = 3
ALPHABET = (CAR, CDR, BAR0, BAR1)

Path = tuple[int, ...]
EPS: Path = ()


class _Bottom:
    __slots__ = ()

    def __repr__(self) -> str:
        return "BOTTOM"

    def __reduce__(self):
        return "BOTTOM"


BOTTOM = _Bottom()
MaybePath = Union[Path, _Bottom]

_TEXT = {CAR: "0", CDR: "1", BAR0: "0~", BAR1: "1~"}
_PARSE = {v: k for k, v in _TEXT.items()}


def bar(sym: int) -> int:
    """Swap a symbol with its counterpart in the other direction."""
    return sym ^ 2


def is_barred(sym: int) -> bool:
    return sym >= 2


def reduce(p: MaybePath) -> MaybePath:
    """Rewrite to canonical form: 0~0 -> e, 1~1 -> e, 0~1 -> _|_, 1~0 -> _|_.

    Scanning left to right with a stack is the leftmost-innermost strategy;
    the result is a bipath or BOTTOM.
    """
    if p is BOTTOM:
        return BOTTOM
    out: list[int] = []
    for s in p:
        if s < 2 and out and out[-1] >= 2:
            if out[-1] - 2 != s:
                return BOTTOM
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def reverse(p: MaybePath) -> Path:
    if p is BOTTOM:
        raise ValueError("cannot reverse the undefined path")
    return tuple(s ^ 2 for s in reversed(p))


def concat(a, b):
    """Concatenate two paths, or two path sets (cross product)."""
    if isinstance(a, (set, frozenset)) or isinstance(b, (set, frozenset)):
        aa = a if isinstance(a, (set, frozenset)) else {a}
        bb = b if isinstance(b, (set, frozenset)) else {b}
        return frozenset(concat(x, y) for x in aa for y in bb)
    if a is BOTTOM or b is BOTTOM:
        return BOTTOM
    return a + b


def shape(p: MaybePath) -> str:
    """Classify as 'bottom', 'forward', 'backward', 'bipath' or 'other'."""
    if p is BOTTOM:
        return "bottom"
    if all(s < 2 for s in p):
        return "forward"
    if all(s >= 2 for s in p):
        return "backward"
    seen_bar = False
    for s in p:
        if s >= 2:
            seen_bar = True
        elif seen_bar:
            return "other"
    return "bipath"


def is_forward(p: MaybePath) -> bool:
    return p is not BOTTOM and all(s < 2 for s in p)


def is_canonical(p: MaybePath) -> bool:
    return shape(p) != "other"


def canon_set(paths: Iterable[MaybePath]) -> frozenset[Path]:
    """Reduce every member and drop the undefined ones."""
    out = set()
    for p in paths:
        r = reduce(p)
        if r is not BOTTOM:
            out.add(r)
    return frozenset(out)


def prefixes(p: Path) -> list[Path]:
    """All prefixes of ``p`` from the empty path up to ``p`` itself."""
    return [p[:i] for i in range(len(p) + 1)]


def fmt(p: MaybePath) -> str:
    if p is BOTTOM:
        return "_|_"
    if not p:
        return "e"
    if all(s < 2 for s in p):
        return "".join(_TEXT[s] for s in p)
    return " ".join(_TEXT[s] for s in p)


def parse(text: str) -> MaybePath:
    """Parse ``e``, ``_|_``, ``100`` or space separated ``1 0~ 1~``."""
    t = text.strip()
    if t in ("e", ""):
        return EPS
    if t == "_|_":
        return BOTTOM
    out: list[int] = []
    for tok in t.split():
        if tok in _PARSE:
            out.append(_PARSE[tok])
            continue
        i = 0
        while i < len(tok):
            if tok[i] not in "01":
                raise ValueError(f"bad path text {text!r}")
            if i + 1 < len(tok) and tok[i + 1] == "~":
                out.append(_PARSE[tok[i : i + 2]])
                i += 2
            else:
                out.append(_PARSE[tok[i]])
                i += 1
    return tuple(out)


def sort_key(p: Path) -> tuple[int, Path]:
    """Shortlex order."""
    return (len(p), p)


def fmt_set(paths: Iterable[Path]) -> list[str]:
    return [fmt(p) for p in sorted(paths, key=sort_key)]
