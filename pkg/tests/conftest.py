"""Acceptance bookkeeping: one PASS/FAIL line per numbered criterion at the end of the run.

Tests in ``test_acceptance.py`` carry ``@pytest.mark.criterion(n)``.  A criterion
passes only if every test tagged with it passed; an expected failure (xfail)
counts as FAIL, a skip as NOT RUN.
"""

import pytest

_OUTCOMES: dict[int, list[str]] = {}
_NOTES: dict[int, list[str]] = {}
_TITLES = {
    1: "selection rule: noise-free max P3 < 1e-6",
    2: "dark-state transfer: COND_I P1 >= 0.99, xi within 1%",
    3: "backend cross-validation within 1e-2",
    4: "trajectory average vs Lindblad, trace distance <= 0.02",
    5: "physics invariants on 100 configs; dt halving < 1e-6",
    6: "correlation symmetry probe",
    7: "classifier gradient check and loss decrease",
    8: "desk-scale classification accuracies",
    9: "end-to-end reproducibility",
}


@pytest.fixture
def note(request):
    """``note(text)`` attaches a measured value to this test's criterion line."""
    n = request.node.get_closest_marker("criterion").args[0]
    return lambda text: _NOTES.setdefault(n, []).append(text)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if hasattr(report, "wasxfail"):
            state = "xfail"
        else:
            state = report.outcome
        _OUTCOMES.setdefault(n, []).append(state)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_TITLES):
        states = _OUTCOMES.get(n)
        if not states:
            continue
        if all(s == "passed" for s in states):
            verdict = "PASS"
        elif all(s == "skipped" for s in states):
            verdict = "NOT RUN"
        else:
            verdict = "FAIL"
        detail = "" if verdict == "PASS" else "  (%s)" % ", ".join(states)
        terminalreporter.write_line("criterion %d: %s - %s%s" % (n, verdict, _TITLES[n], detail))
        for text in _NOTES.get(n, []):
            terminalreporter.write_line("    " + text)
