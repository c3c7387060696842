import pytest

_OUTCOMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    measured = ", ".join(f"{k}={v}" for k, v in item.user_properties)
    prev = _OUTCOMES.get(name, ("PASS", ""))
    if report.failed:
        _OUTCOMES[name] = ("FAIL", measured)
    elif report.when == "call" and prev[0] == "PASS":
        _OUTCOMES[name] = ("PASS", measured)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, measured) in _OUTCOMES.items():
        line = f"{status}  {name}"
        if measured:
            line += f"  ({measured})"
        terminalreporter.write_line(line)
