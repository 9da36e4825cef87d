from __future__ import annotations

import pytest

from borelmod.formulas import Vocabulary


@pytest.fixture
def vr():
    return Vocabulary.parse("R/2")


@pytest.fixture
def vp():
    return Vocabulary.parse("P/1")


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    def report(n: int, what: str, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {what}" + (f" ({detail})" if detail else "")
        print(line)
        lines.append(line)

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
