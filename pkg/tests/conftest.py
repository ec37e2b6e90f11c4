import hypothesis
import pytest

hypothesis.settings.register_profile("default", deadline=None, max_examples=60)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10)
hypothesis.settings.load_profile("default")

TABLE1 = (21, 18, 16, 11, 5, 2, 11, 14)
TABLE2 = (12, 9, 24, 131, 17, 99, 11, 100, 24, 31, 64, 79, 73, 6, 67, 101)

_acceptance = {}


@pytest.fixture
def table1():
    return TABLE1


@pytest.fixture
def table2():
    return TABLE2


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance.items():
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
