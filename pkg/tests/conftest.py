"""Per-criterion pass/fail summary for the acceptance suite.

Tests marked ``@pytest.mark.criterion(n)`` are grouped by ``n``; a criterion
passes when every test carrying its number passes.  Tests can attach the
numbers they measured through the ``measured`` fixture; those are printed
next to the verdict.
"""

from collections import defaultdict

import pytest

CRITERIA = {
    1: "closed form vs exhaustive C_sum optimum (exact, < 10 s)",
    2: "breakpoints vs numeric curve crossings (rel 1e-9) and worked values",
    3: "K=1 sweep: 14-vector sequence (exact) and boundaries within 30%",
    4: "K=2 sweep: reference rows in order and terminal vector",
    5: "optimal vs full reuse gains (15 pp) and random-baseline ordering",
    6: "full-reuse C_net/N_coh peak at N_coh/K = 2 and optimum at 2K",
    7: "one-hot per-user curves identical across K",
    8: "structural suites (lengths, bounds, round trip, chain, realization, count)",
    9: "Monte Carlo sanity: depth steps within 20% of gamma log2 3, residual < 15%",
    10: "determinism across workers and full pipeline < 2 min",
}

_outcomes = defaultdict(list)  # criterion -> [(test name, passed)]
_notes = defaultdict(list)  # criterion -> [text]


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture
def measured(request):
    marker = request.node.get_closest_marker("criterion")
    number = marker.args[0] if marker else None

    def note(text):
        if number is not None:
            _notes[number].append(f"{request.node.name}: {text}")

    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes[marker.args[0]].append((item.name, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(CRITERIA):
        results = _outcomes.get(number)
        if not results:
            tr.write_line(f"criterion {number:2d}: NOT RUN  {CRITERIA[number]}")
            continue
        failed = [name for name, ok in results if not ok]
        verdict = "FAIL" if failed else "PASS"
        line = f"criterion {number:2d}: {verdict}  {CRITERIA[number]}"
        if failed:
            line += f"  [failing: {', '.join(failed)}]"
        tr.write_line(line)
        for text in _notes.get(number, []):
            tr.write_line(f"    {text}")
