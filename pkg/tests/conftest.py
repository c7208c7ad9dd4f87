import pytest

from neckwall import minimiser

# every solve in the session, for the suite-wide monotone-descent audit
SOLVE_LOG: list = []
CRITERIA: dict = {}


@pytest.fixture(autouse=True, scope="session")
def _record_solves():
    minimiser.observers.append(SOLVE_LOG.append)
    yield
    minimiser.observers.remove(SOLVE_LOG.append)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, text): acceptance criterion")
    config.addinivalue_line("markers", "run_last: run after all other tests")
    config.addinivalue_line("markers", "slow: desk-scale sweeps (minutes)")


def pytest_collection_modifyitems(items):
    items.sort(key=lambda it: it.get_closest_marker("run_last") is not None)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        num, text = mark.args
        ok = rep.outcome == "passed"
        prev = CRITERIA.get(num, (True, text))
        CRITERIA[num] = (prev[0] and ok, text)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        ok, text = CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {text}")
