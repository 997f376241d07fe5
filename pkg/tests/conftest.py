"""Shared fixtures: parameter presets and acceptance-line reporting."""

import math

import pytest

from lqgsim import derive_params

_ACCEPTANCE_LINES = []


def record_acceptance(name, ok, detail):
    """Log one acceptance line, then assert it holds.

    The line is queued before the assertion so the terminal summary shows
    every criterion's verdict even when some fail.
    """
    _ACCEPTANCE_LINES.append((name, bool(ok), detail))
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="session")
def params_sqrt2():
    return derive_params(math.sqrt(2.0))


@pytest.fixture(scope="session")
def params_one():
    return derive_params(1.0)


@pytest.fixture(scope="session")
def params_sqrt8over3():
    return derive_params(math.sqrt(8.0 / 3.0))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(_ACCEPTANCE_LINES):
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {verdict} {name}: {detail}")
