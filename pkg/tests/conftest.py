import pytest

from k3lattice.tables import default_tables

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def tables():
    return default_tables()


@pytest.fixture
def criterion(request):
    """``criterion(n, ok, detail)`` records one acceptance line and asserts ``ok``.

    A test that errors before recording gets a FAIL line from the teardown.
    """
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])
    recorded = []

    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        lines.append(line)
        recorded.append(n)
        assert ok, line

    yield record
    if not recorded:
        lines.append(f"criterion ?: FAIL  {request.node.name} raised before recording a result")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
