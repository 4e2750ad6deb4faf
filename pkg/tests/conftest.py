"""Shared fixtures; collects acceptance results for the terminal summary."""
from __future__ import annotations

import pytest

_ACCEPTANCE: dict = {}


class AcceptanceRecorder:
    def __init__(self, store):
        self._store = store

    def record(self, number: int, ok: bool, detail: str) -> None:
        self._store[number] = (bool(ok), detail)


@pytest.fixture
def acceptance():
    return AcceptanceRecorder(_ACCEPTANCE)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
