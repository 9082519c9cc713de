import pytest

from qgplus.harness.registry import interp_battery

BATTERY_SIZE = 100

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    number, title = marker.args
    if rep.when == "call" or rep.failed:
        status = "FINDING" if hasattr(rep, "wasxfail") else ("PASS" if rep.passed else "FAIL")
        prev = _ACCEPTANCE.get(number, (title, "PASS"))[1]
        rank = ("PASS", "FINDING", "FAIL")
        _ACCEPTANCE[number] = (title, max(prev, status, key=rank.index))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{status:<7} criterion {number:>2}: {title}")


@pytest.fixture(scope="session")
def battery():
    return interp_battery(BATTERY_SIZE, 0)
