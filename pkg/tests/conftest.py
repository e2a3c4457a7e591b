import re

import pytest

_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = re.match(r"test_criterion_(\d+)_", item.name)
    if not m:
        return
    n = int(m.group(1))
    desc = (item.function.__doc__ or item.name).strip().splitlines()[0]
    failed = report.failed or (report.when == "call" and report.skipped)
    prev = _ACCEPTANCE.get(n, (desc, True))
    _ACCEPTANCE[n] = (desc, prev[1] and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        desc, ok = _ACCEPTANCE[n]
        terminalreporter.write_line(f"ACCEPTANCE {n:2d} {'PASS' if ok else 'FAIL'} {desc}")
