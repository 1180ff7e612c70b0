import pytest

from tagquality.metrics import Scale

_criteria = []


@pytest.fixture
def ordinal4():
    return Scale("ordinal", ("1", "2", "3", "4"))


@pytest.fixture
def nominal_ab():
    return Scale("nominal", ("a", "b"))


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = report.keywords.get("criterion_label")
    if marker is None:
        return
    _criteria.append((report.outcome, report.user_properties))


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.keywords["criterion_label"] = True
            item.user_properties.append(("criterion", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for outcome, props in _criteria:
        label = dict(props).get("criterion", "?")
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {label}")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion")
