"""Shared fixtures plus the acceptance-criteria terminal summary.

Tests marked ``@pytest.mark.acceptance(k, "label")`` are the top-level release
gate; after the normal pytest output a one-line PASS/FAIL verdict is printed
per criterion so the gate can be read off without scrolling.
"""

import numpy as np
import pytest

_ACCEPTANCE: dict[str, tuple[int, str]] = {}
_OUTCOMES: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(num, label): top-level acceptance criterion; reported one line per criterion",
    )


def pytest_collection_modifyitems(config, items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            _ACCEPTANCE[item.nodeid] = (int(mark.args[0]), str(mark.args[1]))


def pytest_runtest_logreport(report):
    if report.nodeid not in _ACCEPTANCE:
        return
    if report.when == "call" or report.outcome != "passed":
        # setup errors/skips count; a passed setup phase does not
        _OUTCOMES.setdefault(report.nodeid, "")
        if report.outcome == "failed":
            _OUTCOMES[report.nodeid] = "failed"
        elif report.outcome == "skipped":
            _OUTCOMES[report.nodeid] = _OUTCOMES[report.nodeid] or "skipped"
        elif report.when == "call":
            _OUTCOMES[report.nodeid] = _OUTCOMES[report.nodeid] or "passed"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (num, label) in sorted(_ACCEPTANCE.items(), key=lambda kv: kv[1][0]):
        verdict = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
            _OUTCOMES.get(nodeid, ""), "NOT RUN"
        )
        terminalreporter.write_line(f"criterion {num}: {verdict} - {label}")


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)
