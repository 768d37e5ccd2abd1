import pytest

_acceptance = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid, summary): exit criterion reported in the terminal summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    cid, summary = marker.args
    if report.when == "call" or (report.when == "setup" and not report.passed):
        # parametrized criteria fail if any instance fails
        previous = _acceptance.get(cid, (summary, "passed"))[1]
        _acceptance[cid] = (summary, report.outcome if previous == "passed" else previous)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_acceptance, key=lambda c: int(c[2:])):
        summary, outcome = _acceptance[cid]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status} {cid}: {summary}")
