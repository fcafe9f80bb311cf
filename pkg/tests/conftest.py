import numpy as np
import pytest

from biparam import validate_generator

_ACCEPTANCE = []


@pytest.fixture
def a5():
    """Two-state repair/working chain of the golden tests."""
    return validate_generator([[-2.0, 2.0], [0.6, -0.6]], labels=["repair", "working"])


@pytest.fixture
def zero2():
    return validate_generator(np.zeros((2, 2)))


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test body fills in the detail."""
    record = {"name": request.node.name, "detail": ""}
    _ACCEPTANCE.append(record)
    yield record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and "criterion" in item.fixturenames:
        for rec in _ACCEPTANCE:
            if rec["name"] == item.name:
                rec["passed"] = rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for rec in _ACCEPTANCE:
        status = "PASS" if rec.get("passed") else "FAIL"
        terminalreporter.write_line(f"{status}  {rec['name']}  {rec['detail']}")
