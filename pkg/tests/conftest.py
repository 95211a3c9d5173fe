import pytest

from paramdep.kernels import CHSH_ANGLES, SettingMap
from paramdep.outcomes import build_outcome_functions
from paramdep.regions import synthesize_regions


@pytest.fixture(scope="session")
def settings():
    return SettingMap.from_angles(*CHSH_ANGLES)


@pytest.fixture(scope="session")
def rc():
    return synthesize_regions()


@pytest.fixture(scope="session")
def fns(rc, settings):
    return build_outcome_functions(rc, settings)


_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if item.get_closest_marker("acceptance") is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _ACCEPTANCE.append((item.name, "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in _ACCEPTANCE:
        _, _, number, *words = name.split("_")
        terminalreporter.write_line(f"{verdict}  criterion {number}: {' '.join(words)}")
