import pytest

from heapnull import FIG1_SOURCE, load
from heapnull.nullify import Analyses


@pytest.fixture(scope="session")
def fig1():
    return load(FIG1_SOURCE)


@pytest.fixture(scope="session")
def fig1_an(fig1):
    return Analyses.of(fig1)


def pytest_terminal_summary(terminalreporter):
    from oracles import ACCEPTANCE
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, secs, detail = ACCEPTANCE[n]
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({secs:.2f} s)"
        terminalreporter.write_line(line + (f" {detail}" if detail else ""))
