import re

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)")
_outcomes: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = _CRITERION.match(item.name)
    if m is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        doc = (item.function.__doc__ or "").strip().splitlines()
        title = doc[0] if doc else item.name
        n = int(m.group(1))
        # parametrized criteria pass only if every case passes
        failed = not report.passed or _outcomes.get(n, ("PASS",))[0] == "FAIL"
        _outcomes[n] = ("FAIL" if failed else "PASS", title)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        status, title = _outcomes[n]
        terminalreporter.write_line(f"criterion {n:>2}: {status}  {title}")
