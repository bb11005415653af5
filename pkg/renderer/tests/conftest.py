"""Shared fixtures for the renderer tests."""

import pytest


@pytest.fixture
def criterion(request):
    """Record a one-line pass/fail verdict shown in the terminal summary."""
    def record(name: str, ok: bool, detail: str = "") -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}"
        if detail:
            line += f" — {detail}"
        lines = getattr(request.config, "_criterion_lines", None)
        if lines is None:
            lines = []
            request.config._criterion_lines = lines
        lines.append(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_criterion_lines", [])
    config._criterion_lines = []     # consumed; other conftests print nothing
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
