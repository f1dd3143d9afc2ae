"""Shared fixtures and the acceptance summary printed at the end of a run."""
from __future__ import annotations

import pytest

from wiserd.group_core import Ball

ACCEPTANCE: dict = {}


def record(number: int, title: str, ok: bool, detail: str = "", variant: str = "") -> None:
    """Register one acceptance line; ``variant`` marks a reduced-scale companion."""
    ACCEPTANCE[(number, variant)] = (title, ok, detail)


@pytest.fixture(scope="session")
def ball5():
    return Ball(5)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, variant in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[(n, variant)]
        tag = f"{n}{variant}"
        line = f"criterion {tag:>3} [{'PASS' if ok else 'FAIL'}] {title}"
        if detail:
            line += f" :: {detail}"
        terminalreporter.write_line(line)
