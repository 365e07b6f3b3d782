import numpy as np
import pytest

from helmbie.geometry import make_boundary

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    number, title = marker.args
    detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    _ACCEPTANCE.append((number, title, rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE):
        line = f"[{'PASS' if passed else 'FAIL'}] #{number:2d} {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))


@pytest.fixture(scope="session")
def circle64():
    return make_boundary("circle", 64)


@pytest.fixture(scope="session")
def circle128():
    return make_boundary("circle", 128)


@pytest.fixture(scope="session")
def kite128():
    return make_boundary("kite", 128)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
