import pytest

from gamma2cyl.engine import build_system

_systems = {}
_criteria = []


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", help="also run n >= 11 engine tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running (n >= 11); needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def get_system(n, strict_initial=True):
    key = (n, strict_initial)
    if key not in _systems:
        _systems[key] = build_system(n, strict_initial=strict_initial)
    return _systems[key]


@pytest.fixture(scope="session")
def system():
    return get_system


@pytest.fixture
def criterion():
    """Record one acceptance line; printed in the terminal summary."""

    def record(name, ok, detail=""):
        _criteria.append((name, bool(ok), detail))
        assert ok, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _criteria:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
