import random

import pytest

from netcrawl.graph import barbell_graph, path_graph, star_graph

_criteria: dict[str, str] = {}


@pytest.fixture
def rnd():
    return random.Random(12345)


@pytest.fixture
def star5():
    return star_graph(5)


@pytest.fixture
def path3():
    return path_graph(3)


@pytest.fixture
def barbell55():
    return barbell_graph(5, 5)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid or "test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria[name] = "PASS" if report.outcome == "passed" else report.outcome.upper()


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda s: int(s.split("_")[2])):
        terminalreporter.write_line(f"{_criteria[name]:<6} {name}")
