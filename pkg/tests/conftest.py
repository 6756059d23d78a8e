import numpy as np
import pytest

from adaptive_oco import DomainSpec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_ball():
    return DomainSpec.ball(np.zeros(2), 1.0, gradient_bound=1.0)


@pytest.fixture
def unit_box():
    return DomainSpec.box(np.zeros(2), np.ones(2), gradient_bound=1.0)


def interval_1d(G=1.0):
    return DomainSpec.box(np.array([-1.0]), np.array([1.0]), gradient_bound=G)


# Acceptance summary: one line per acceptance check, in file order.
_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        _acceptance[report.nodeid] = ("PASS" if report.outcome == "passed" else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance checks")
    for k, (nodeid, (status, detail)) in enumerate(_acceptance.items(), start=1):
        name = nodeid.split("::")[-1].removeprefix("test_")
        terminalreporter.write_line(f"{status}  [{k:2d}/{len(_acceptance)}] {name}: {detail}")
