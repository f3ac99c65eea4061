import pytest

from hotelling_cournot import MarketConfig

_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def cfg():
    return MarketConfig(0.3, 0.6, 0.2)


@pytest.fixture
def acceptance_log(request):
    """Shared dict of criterion number -> summary line."""
    return request.config.stash.setdefault(_ACCEPTANCE, {})


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
