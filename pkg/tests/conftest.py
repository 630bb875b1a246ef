"""Shared fixtures: kernel warmup and the acceptance-criteria scoreboard.

Acceptance tests record every clause they check through the
``criterion`` fixture; the terminal summary then prints one PASS/FAIL
line per criterion, with failing clauses spelled out underneath.
"""

import pytest

from randzeros import _kernels

_SCOREBOARD = {}


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile the numba kernels once so timed tests measure math, not jit
    _kernels.warmup()


@pytest.fixture
def criterion():
    def record(cid: int, title: str, clause: str, ok: bool, detail: str = ""):
        entry = _SCOREBOARD.setdefault(cid, {"title": title, "clauses": []})
        entry["clauses"].append((clause, bool(ok), detail))
        return bool(ok)
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _SCOREBOARD:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(_SCOREBOARD):
        entry = _SCOREBOARD[cid]
        ok = all(c[1] for c in entry["clauses"])
        tr.write_line(f"criterion {cid:2d}  {'PASS' if ok else 'FAIL'}  "
                      f"{entry['title']}")
        for clause, cok, detail in entry["clauses"]:
            if not cok:
                tr.write_line(f"              failed: {clause}"
                              + (f" ({detail})" if detail else ""))
